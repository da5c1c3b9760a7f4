import pytest

from tsbroadcast.model import NetworkSnapshot, residual_coverage

LABELS = list("sabcdefghijk")
ID = {name: i for i, name in enumerate(LABELS)}

REFERENCE_EDGES = [
    ("s", "a"), ("s", "b"), ("s", "c"), ("s", "d"),
    ("b", "f"), ("b", "g"), ("b", "h"),
    ("a", "e"), ("a", "k"),
    ("k", "f"), ("k", "i"), ("k", "j"),
    ("c", "g"), ("d", "i"),
]

# covered set after each step of the sample execution, and the RC every listed
# node must show at that moment
RC_STEPS = [
    ("sabcd", {"a": 2, "b": 3, "c": 1, "d": 1}),
    ("sabcdfgh", {"a": 2, "c": 0, "d": 1, "f": 1, "g": 0, "h": 0}),
    ("sabcdfghek", {"c": 0, "d": 1, "f": 0, "g": 0, "h": 0, "e": 0, "k": 2}),
]


def reference_graph() -> NetworkSnapshot:
    return NetworkSnapshot.from_edges(
        len(LABELS), [(ID[a], ID[b]) for a, b in REFERENCE_EDGES], LABELS)


def rc_mismatches(snap: NetworkSnapshot) -> list[str]:
    bad = []
    for covered_names, expected in RC_STEPS:
        covered = {ID[c] for c in covered_names}
        for name, rc in expected.items():
            got = residual_coverage(snap, covered, ID[name])
            if got != rc:
                bad.append(f"{name}: rc {got} != {rc} with covered={covered_names}")
    return bad


@pytest.fixture
def ref_net():
    snap = reference_graph()
    bad = rc_mismatches(snap)
    if bad:
        pytest.fail("reference adjacency does not reproduce the RC tables: " + "; ".join(bad))
    return snap


def path_graph(n):
    return NetworkSnapshot.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def cycle_graph(n):
    return NetworkSnapshot.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def star_graph(leaves):
    return NetworkSnapshot.from_edges(leaves + 1, [(0, i) for i in range(1, leaves + 1)])


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
