import numpy as np
import pytest

from conftest import ID
from tsbroadcast.dynamics import MacModel
from tsbroadcast.model import NetworkSnapshot
from tsbroadcast.protocol import (
    TRANSMIT_NOW,
    UNSCHEDULE,
    Kind,
    ScheduleDecision,
    conflict_groups,
    coverage_query,
    on_first_reception,
    preamble_check,
    resolve_conflicts,
    resolve_target_to_slot,
    schedule,
)
from tsbroadcast.timeseq import TsVector as V, build_time_sequence

TS4 = build_time_sequence(4)


def target(u, m, l):
    return ScheduleDecision(Kind.TARGET, V(u, m, l))


@pytest.mark.parametrize("rc,current,expected", [
    (3, V(4, 4, 4), target(4, 3, 3)),
    (2, V(4, 2, 2), target(4, 2, 1)),
    (5, V(4, 3, 2), TRANSMIT_NOW),
    (0, V(4, 4, 4), UNSCHEDULE),
    (1, V(4, 1, 1), target(4, 1, 1)),
    (2, V(4, 3, 2), target(4, 2, 2)),
    (1, V(4, 4, 3), target(4, 1, 1)),
])
def test_schedule(rc, current, expected):
    assert schedule(rc, current) == expected


@pytest.mark.parametrize("decision,current,slot", [
    (target(4, 1, 1), 1, 10),
    (target(4, 2, 1), 6, 9),
    (target(4, 4, 4), 10, 11),
    (target(4, 3, 3), 3, 13),
    (TRANSMIT_NOW, 7, 8),
])
def test_resolve_target(decision, current, slot):
    assert resolve_target_to_slot(TS4, decision, current) == slot


def test_resolve_rejects_unschedule():
    with pytest.raises(ValueError):
        resolve_target_to_slot(TS4, UNSCHEDULE, 1)


def test_preamble_check():
    assert preamble_check(2, V(4, 2, 2)) == TRANSMIT_NOW
    assert preamble_check(0, V(4, 1, 1)) == UNSCHEDULE
    assert preamble_check(2, V(4, 3, 2)) == target(4, 2, 2)


def test_coverage_query_perfect(ref_net):
    covered = [False] * ref_net.n
    for name in "sabcd":
        covered[ID[name]] = True
    rc, tally = coverage_query(ref_net, covered, ID["b"], MacModel(0), np.random.default_rng(0))
    assert rc == 3 and (tally.creq_count, tally.crep_count) == (1, 3)


def test_coverage_query_total_loss(ref_net):
    covered = [False] * ref_net.n
    covered[ID["s"]] = True
    rc, _ = coverage_query(ref_net, covered, ID["s"], MacModel(1.0), np.random.default_rng(0))
    assert rc == 0


def test_coverage_query_lossy_mean():
    star = NetworkSnapshot.from_edges(11, [(0, i) for i in range(1, 11)])
    covered = [True] + [False] * 10
    rng = np.random.default_rng(42)
    mac = MacModel(0.2)
    mean = np.mean([coverage_query(star, covered, 0, mac, rng)[0] for _ in range(10_000)])
    expected = 10 * 0.8 ** 2
    assert abs(mean - expected) <= 0.05 * expected


def test_coverage_query_control_loss_off():
    star = NetworkSnapshot.from_edges(4, [(0, 1), (0, 2), (0, 3)])
    rc, _ = coverage_query(star, [True, False, False, False], 0, MacModel(0.9),
                           np.random.default_rng(0), control_loss=False)
    assert rc == 3


def test_resolve_conflicts():
    assert resolve_conflicts([(3, 5), (7, 2)]) == (3, [7])
    assert resolve_conflicts([(9, 4), (2, 4)]) == (2, [9])
    assert resolve_conflicts([(5, 1)]) == (5, [])
    assert resolve_conflicts([]) == (None, [])


def test_conflict_groups(ref_net):
    ids = [ID["c"], ID["d"], ID["f"], ID["k"]]
    groups = conflict_groups(ref_net, ids)
    assert sorted(groups) == [[ID["c"]], [ID["d"]], sorted([ID["f"], ID["k"]])]
    never = conflict_groups(ref_net, ids, visible=lambda i, j: False)
    assert len(never) == 4


def test_on_first_reception_examples(ref_net):
    mac, rng = MacModel(0), np.random.default_rng(0)
    covered = [False] * ref_net.n
    for name in "sabcdfgh":
        covered[ID[name]] = True
    decision, slot, rc, _ = on_first_reception(ref_net, covered, ID["f"], TS4, 3, mac, rng)
    assert (decision.target, slot, rc) == (V(4, 1, 1), 10, 1)
    decision, slot, rc, _ = on_first_reception(ref_net, covered, ID["g"], TS4, 3, mac, rng)
    assert decision == UNSCHEDULE and slot is None and rc == 0
    covered[ID["e"]] = covered[ID["k"]] = True
    decision, slot, rc, _ = on_first_reception(ref_net, covered, ID["k"], TS4, 6, mac, rng)
    assert (decision.target, slot, rc) == (V(4, 2, 1), 9, 2)


def test_on_first_reception_same_vector_goes_next_slot():
    # a node receiving at (4,4,3) with rc 4 would target (4,4,3) itself
    star = NetworkSnapshot.from_edges(6, [(0, i) for i in range(1, 6)])
    covered = [False, False, False, False, False, True]
    decision, slot, rc, _ = on_first_reception(
        star, covered, 0, TS4, 2, MacModel(0), np.random.default_rng(0))
    assert rc == 4
    assert decision == TRANSMIT_NOW and slot == 3
