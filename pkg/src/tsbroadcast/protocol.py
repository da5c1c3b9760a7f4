"""Per-node behavior of the time-sequence schemes.

Everything here is a pure function of its arguments; the engine owns the node
states and calls in during the Preamble and Broadcast Field of each slot.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .dynamics import MacModel, mac_deliver
from .model import NetworkSnapshot
from .timeseq import TimeSequence, TsVector, is_admissible, is_edge_slot, vector_at_slot


class Kind(str, enum.Enum):
    TRANSMIT_NOW = "transmit-now"
    TARGET = "target-vector"
    UNSCHEDULE = "unschedule"


@dataclass(frozen=True)
class ScheduleDecision:
    kind: Kind
    target: TsVector | None = None

    def __post_init__(self):
        if (self.target is not None) != (self.kind is Kind.TARGET):
            raise ValueError("target must be given exactly for target-vector decisions")


TRANSMIT_NOW = ScheduleDecision(Kind.TRANSMIT_NOW)
UNSCHEDULE = ScheduleDecision(Kind.UNSCHEDULE)


@dataclass
class NodeState:
    id: int
    covered: bool = False
    transmitted: bool = False
    disqualified: bool = False
    scheduled_slot: int | None = None
    last_rc: int = 0


@dataclass
class ControlTally:
    creq_count: int = 0
    crep_count: int = 0

    def add(self, other: "ControlTally") -> None:
        self.creq_count += other.creq_count
        self.crep_count += other.crep_count


def schedule(rc: int, current: TsVector) -> ScheduleDecision:
    """Self-scheduling of a covered node given its RC and the current slot vector."""
    upper, middle, lower = current
    if rc > middle:
        return TRANSMIT_NOW
    if lower <= rc <= middle:
        if is_edge_slot(current):
            return ScheduleDecision(Kind.TARGET, TsVector(upper, rc, lower - 1 if lower > 1 else 1))
        return ScheduleDecision(Kind.TARGET, TsVector(upper, rc, lower))
    if 1 <= rc < lower:
        return ScheduleDecision(Kind.TARGET, TsVector(upper, rc, rc))
    return UNSCHEDULE


def resolve_target_to_slot(ts: TimeSequence, decision: ScheduleDecision, current_slot: int) -> int:
    """Concrete slot index for a decision issued during ``current_slot``.

    A target vector maps to its next occurrence strictly after the current
    slot, wrapping into the following cycle if needed.
    """
    if decision.kind is Kind.UNSCHEDULE:
        raise ValueError("unschedule decisions have no slot")
    if decision.kind is Kind.TRANSMIT_NOW:
        return current_slot + 1
    x = ts.length_x
    here = (current_slot - 1) % x
    delta = (ts.position(decision.target) - here) % x
    return current_slot + (delta or x)


def preamble_check(fresh_rc: int, current: TsVector) -> ScheduleDecision:
    if fresh_rc <= 0:
        return UNSCHEDULE
    if is_admissible(fresh_rc, current):
        return TRANSMIT_NOW
    return schedule(fresh_rc, current)


def coverage_query(snapshot: NetworkSnapshot, covered: Sequence[bool], node: int,
                   mac: MacModel, rng: np.random.Generator,
                   control_loss: bool = True) -> tuple[int, ControlTally]:
    """Broadcast one CReq and count the CReps that come back.

    Every uncovered neighbor answers; under a lossy MAC the CReq and the CRep
    must each survive an independent loss draw for the reply to be counted.
    """
    rc = 0
    lossy = control_loss and not mac.perfect
    for j in sorted(snapshot.adjacency[node]):
        if covered[j]:
            continue
        if lossy and not (mac_deliver(mac, rng) and mac_deliver(mac, rng)):
            continue
        rc += 1
    return rc, ControlTally(1, rc)


def resolve_conflicts(candidates: Iterable[tuple[int, int]]) -> tuple[int | None, list[int]]:
    """Largest RC wins; equal RC goes to the lowest id."""
    ordered = sorted(candidates, key=lambda c: (-c[1], c[0]))
    if not ordered:
        return None, []
    return ordered[0][0], sorted(i for i, _ in ordered[1:])


def conflict_groups(snapshot: NetworkSnapshot, ids: Iterable[int],
                    visible: Callable[[int, int], bool] | None = None) -> list[list[int]]:
    """Split same-slot candidates into groups linked through 1-hop adjacency.

    ``visible(i, j)`` may veto an edge, e.g. when an overheard CReq was lost.
    """
    pool = sorted(set(ids))
    members = set(pool)
    seen: set[int] = set()
    groups = []
    for start in pool:
        if start in seen:
            continue
        seen.add(start)
        group, stack = [start], [start]
        while stack:
            v = stack.pop()
            for w in sorted(snapshot.adjacency[v] & members):
                if w in seen or (visible is not None and not visible(v, w)):
                    continue
                seen.add(w)
                group.append(w)
                stack.append(w)
        groups.append(sorted(group))
    return groups


def on_first_reception(snapshot: NetworkSnapshot, covered: Sequence[bool], node: int,
                       ts: TimeSequence, slot_index: int, mac: MacModel,
                       rng: np.random.Generator, control_loss: bool = True):
    """Measure RC for a newly covered node and schedule it.

    Returns ``(decision, slot, rc, tally)``; ``slot`` is ``None`` when the
    node is not scheduled.
    """
    current = vector_at_slot(ts, slot_index)
    rc, tally = coverage_query(snapshot, covered, node, mac, rng, control_loss)
    decision = schedule(rc, current)
    if decision.kind is Kind.UNSCHEDULE:
        return decision, None, rc, tally
    if decision.target == current:
        # admissible in the slot being received; the next slot of the level is the earliest option
        decision = TRANSMIT_NOW
    return decision, resolve_target_to_slot(ts, decision, slot_index), rc, tally
