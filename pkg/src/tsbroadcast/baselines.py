"""Reference algorithms: the centralized greedy oracle, flooding, exact MCDS."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

from .errors import InvalidArgument, NotConnectedError
from .model import NetworkSnapshot, is_connected

MCDS_NODE_LIMIT = 16


@dataclass
class GreedyTrace:
    transmitters: list[int] = field(default_factory=list)
    covered_sizes: list[int] = field(default_factory=list)

    def __len__(self):
        return len(self.transmitters)


def greedy_broadcast(snapshot: NetworkSnapshot, source: int) -> GreedyTrace:
    """Centralized greedy: repeatedly let the covered node with the largest RC transmit.

    Ties go to the lowest id. Nodes whose RC is 0 are never picked.
    """
    if not is_connected(snapshot):
        raise NotConnectedError("greedy broadcast needs a connected graph")
    adj = snapshot.adjacency
    covered = {source} | adj[source]
    trace = GreedyTrace([source], [len(covered)])
    pending = set(adj[source])  # C - Q
    while len(covered) < snapshot.n:
        best, best_rc = None, 0
        for v in sorted(pending):
            rc = len(adj[v] - covered)
            if rc > best_rc:
                best, best_rc = v, rc
        if best is None:
            break
        pending.discard(best)
        fresh = adj[best] - covered
        covered |= fresh
        pending |= fresh
        trace.transmitters.append(best)
        trace.covered_sizes.append(len(covered))
    return trace


def flooding(snapshot: NetworkSnapshot, source: int, mac=None, seed: int = 0):
    """Every node rebroadcasts once, in the slot after its first reception."""
    from .dynamics import MacModel
    from .engine import SessionConfig, run_session

    cfg = SessionConfig(algorithm="flooding", loss_prob=(mac or MacModel()).loss_prob, seed=seed)
    return run_session(snapshot, cfg, source=source).metrics


@dataclass(frozen=True)
class McdsResult:
    size: int
    witness: frozenset[int]
    variant: str  # "standard" or "source-forced"


def mcds_bruteforce(snapshot: NetworkSnapshot, source: int | None = None,
                    force_source: bool = False) -> McdsResult:
    """Exact minimum connected dominating set by exhaustive subset search.

    By default the source plays no role. With ``force_source`` only sets
    containing ``source`` are considered.
    """
    n = snapshot.n
    if n > MCDS_NODE_LIMIT:
        raise InvalidArgument(f"exhaustive MCDS refused for {n} > {MCDS_NODE_LIMIT} nodes")
    if n == 0:
        raise InvalidArgument("empty graph")
    if not is_connected(snapshot):
        raise NotConnectedError("a disconnected graph has no connected dominating set")
    if force_source and source is None:
        raise InvalidArgument("force_source needs a source")

    nbr = [sum(1 << j for j in snapshot.adjacency[i]) for i in range(n)]
    closed = [nbr[i] | (1 << i) for i in range(n)]
    full = (1 << n) - 1

    def connected(mask: int, first: int) -> bool:
        reach = frontier = 1 << first
        while frontier:
            grow = 0
            m = frontier
            while m:
                low = m & -m
                grow |= nbr[low.bit_length() - 1]
                m ^= low
            frontier = grow & mask & ~reach
            reach |= frontier
        return reach == mask

    for k in range(1, n + 1):
        for combo in combinations(range(n), k):
            if force_source and source not in combo:
                continue
            dom = 0
            mask = 0
            for v in combo:
                dom |= closed[v]
                mask |= 1 << v
            if dom == full and connected(mask, combo[0]):
                return McdsResult(k, frozenset(combo), "source-forced" if force_source else "standard")
    raise AssertionError("unreachable for connected graphs")
