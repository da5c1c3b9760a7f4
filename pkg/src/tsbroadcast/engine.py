"""Slotted broadcast session loop.

Each slot runs, in order: pending mobility ticks, the Preamble (RC refresh,
rescheduling, TSS conflict resolution) and the Broadcast Field (data
transmissions and first receptions). Positions are frozen within a slot.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .baselines import greedy_broadcast
from .dynamics import MacModel, StaticModel, mac_deliver
from .errors import InvalidArgument
from .model import NetworkSnapshot, build_udg
from .protocol import (
    ControlTally,
    Kind,
    NodeState,
    conflict_groups,
    coverage_query,
    on_first_reception,
    preamble_check,
    resolve_conflicts,
    resolve_target_to_slot,
)
from .timeseq import auto_u, build_time_sequence, vector_at_slot

ALGORITHMS = ("ntss", "tss", "flooding", "greedy-replay")
STATIC_CYCLES = 10
MOBILE_HORIZON_S = 60.0


@dataclass
class SessionConfig:
    algorithm: str = "tss"
    u: int | None = None
    slot_duration: float = 0.1
    preamble_fraction: float = 0.1
    max_slots: int | None = None
    coverage_thresholds: tuple[float, ...] = (0.8, 0.9)
    loss_prob: float = 0.0
    control_loss: bool = True
    seed: int = 0
    trace: bool = False

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise InvalidArgument(f"algorithm must be one of {ALGORITHMS}, got {self.algorithm!r}")
        if not 0.0 < self.preamble_fraction < 1.0:
            raise InvalidArgument("preamble_fraction must be in (0, 1)")
        if not self.slot_duration > 0:
            raise InvalidArgument("slot_duration must be positive")
        if self.max_slots is not None and self.max_slots < 1:
            raise InvalidArgument("max_slots must be >= 1")
        if self.u is not None and self.u < 1:
            raise InvalidArgument("u must be >= 1")
        self.coverage_thresholds = tuple(sorted(self.coverage_thresholds))
        for t in self.coverage_thresholds:
            if not 0.0 < t <= 1.0:
                raise InvalidArgument(f"coverage threshold {t} outside (0, 1]")
        self.mac  # validates loss_prob

    @property
    def mac(self) -> MacModel:
        return MacModel(self.loss_prob)


@dataclass
class ThresholdRecord:
    slot: int
    tx: int


@dataclass
class SessionMetrics:
    n_nodes: int = 0
    u: int = 0
    tx_count: int = 0
    delay_slots: int = 0
    termination_slot: int = 0
    coverage_fraction: float = 0.0
    creq_count: int = 0
    crep_count: int = 0
    thresholds: dict[float, ThresholdRecord] = field(default_factory=dict)
    truncated: bool = False
    source: int = 0
    source_fallback: bool = False
    transmitters: list[int] = field(default_factory=list)
    tx_slots: list[int] = field(default_factory=list)

    def threshold(self, frac: float) -> ThresholdRecord | None:
        return self.thresholds.get(frac)


@dataclass
class SessionResult:
    metrics: SessionMetrics
    trace: list[str]
    nodes: list[NodeState]
    coverage_by_slot: list[int]
    scheduled_ever: set[int]


class _Tracer:
    def __init__(self, enabled: bool, snapshot: NetworkSnapshot):
        self.enabled = enabled
        self.lines: list[str] = []
        self.snapshot = snapshot

    def __call__(self, slot, node, event, **extra):
        if not self.enabled:
            return
        parts = [f"slot={slot}", f"node={self.snapshot.name(node)}", f"event={event}"]
        parts += [f"{k}={v}" for k, v in extra.items()]
        self.lines.append(" ".join(parts))


def _default_max_slots(config: SessionConfig, x: int, mobile: bool) -> int:
    if config.max_slots is not None:
        return config.max_slots
    if mobile:
        return int(math.ceil(MOBILE_HORIZON_S / config.slot_duration - 1e-9))
    return STATIC_CYCLES * x


def run_session(world, config: SessionConfig, source: int | None = None,
                source_fallback: bool = False) -> SessionResult:
    """Run one broadcast session.

    ``world`` is either a :class:`NetworkSnapshot` (static topology) or a
    mobility model exposing ``positions``, ``interval``, ``step(rng)`` and a
    ``radius_r`` attribute. ``source`` defaults to node 0.
    """
    if isinstance(world, NetworkSnapshot):
        snapshot, mobility = world, None
    else:
        mobility = world
        snapshot = build_udg(mobility.positions, mobility.radius_r)
        if isinstance(getattr(mobility, "model", mobility), StaticModel):
            mobility = None
    n = snapshot.n
    if n == 0:
        raise InvalidArgument("empty network")
    source = 0 if source is None else source
    if not 0 <= source < n:
        raise InvalidArgument(f"source {source} out of range")

    if config.algorithm == "greedy-replay":
        return replay_greedy(snapshot, source, config)

    streams = np.random.SeedSequence(config.seed).spawn(2)
    mac_rng = np.random.default_rng(streams[0])
    mob_rng = np.random.default_rng(streams[1])
    mac = config.mac

    u = config.u if config.u is not None else auto_u(snapshot)
    ts = build_time_sequence(u)
    max_slots = _default_max_slots(config, ts.length_x, mobility is not None)
    tss = config.algorithm == "tss"
    flood = config.algorithm == "flooding"

    nodes = [NodeState(i) for i in range(n)]
    covered = [False] * n
    buckets: dict[int, set[int]] = defaultdict(set)
    tally = ControlTally()
    trace = _Tracer(config.trace, snapshot)
    metrics = SessionMetrics(n_nodes=n, u=u, source=source, source_fallback=source_fallback)
    coverage_by_slot: list[int] = []
    scheduled_ever: set[int] = set()
    n_covered = 0
    next_tick = mobility.interval if mobility is not None else math.inf

    def place(i: int, slot: int):
        nodes[i].scheduled_slot = slot
        buckets[slot].add(i)
        scheduled_ever.add(i)

    slot = 0
    while slot < max_slots:
        slot += 1
        v = vector_at_slot(ts, slot)
        slot_start = (slot - 1) * config.slot_duration
        if mobility is not None and next_tick < slot_start - 1e-12:
            while next_tick < slot_start - 1e-12:
                mobility.step(mob_rng)
                next_tick += mobility.interval
            snapshot = build_udg(mobility.positions, snapshot.radius_r)
            trace.snapshot = snapshot

        # Preamble
        if slot == 1:
            transmit = [source]
            covered[source] = True
            nodes[source].covered = True
            n_covered = 1
        else:
            transmit = []
            ready: list[tuple[int, int]] = []
            for i in sorted(buckets.pop(slot, ())):
                st = nodes[i]
                st.scheduled_slot = None
                if flood:
                    transmit.append(i)
                    continue
                rc, delta = coverage_query(snapshot, covered, i, mac, mac_rng, config.control_loss)
                tally.add(delta)
                st.last_rc = rc
                trace(slot, i, "creq")
                trace(slot, i, "crep", n=rc)
                decision = preamble_check(rc, v)
                if decision.kind is Kind.UNSCHEDULE:
                    st.disqualified = True
                    trace(slot, i, "unsched", rc=rc)
                elif decision.kind is Kind.TRANSMIT_NOW:
                    ready.append((i, rc))
                else:
                    target = resolve_target_to_slot(ts, decision, slot)
                    place(i, target)
                    trace(slot, i, "resched", rc=rc, target=decision.target, at=target)
            if tss and len(ready) > 1:
                rcs = dict(ready)
                visible = _visibility(mac, mac_rng, config.control_loss)
                for group in conflict_groups(snapshot, rcs, visible):
                    winner, losers = resolve_conflicts((i, rcs[i]) for i in group)
                    transmit.append(winner)
                    for i in losers:
                        place(i, slot + 1)
                        trace(slot, i, "resched", rc=rcs[i], reason="conflict", at=slot + 1)
                transmit.sort()
            else:
                transmit.extend(i for i, _ in ready)
                transmit.sort()

        # Broadcast Field
        fresh: list[int] = []
        for t in transmit:
            nodes[t].transmitted = True
            metrics.tx_count += 1
            metrics.transmitters.append(t)
            metrics.tx_slots.append(slot)
            trace(slot, t, "tx", vector=v)
            for j in sorted(snapshot.adjacency[t]):
                if covered[j]:
                    continue
                if mac_deliver(mac, mac_rng):
                    covered[j] = True
                    fresh.append(j)
        if transmit:
            metrics.delay_slots = slot
        fresh.sort()
        n_covered += len(fresh)
        for j in fresh:
            nodes[j].covered = True
            trace(slot, j, "cover")
        for j in fresh:
            if flood:
                place(j, slot + 1)
                continue
            decision, at, rc, delta = on_first_reception(
                snapshot, covered, j, ts, slot, mac, mac_rng, config.control_loss)
            tally.add(delta)
            nodes[j].last_rc = rc
            trace(slot, j, "creq")
            trace(slot, j, "crep", n=rc)
            if at is None:
                nodes[j].disqualified = True
                trace(slot, j, "unsched", rc=rc)
            else:
                place(j, at)
                trace(slot, j, "resched", rc=rc, target=decision.target or "next", at=at)

        coverage_by_slot.append(n_covered)
        for frac in config.coverage_thresholds:
            if frac not in metrics.thresholds and n_covered >= frac * n - 1e-9:
                metrics.thresholds[frac] = ThresholdRecord(slot, metrics.tx_count)
        if not any(buckets.values()):
            break
    else:
        metrics.truncated = any(buckets.values())

    metrics.termination_slot = slot
    metrics.coverage_fraction = n_covered / n
    metrics.creq_count = tally.creq_count
    metrics.crep_count = tally.crep_count
    return SessionResult(metrics, trace.lines, nodes, coverage_by_slot, scheduled_ever)


def _visibility(mac: MacModel, rng, control_loss: bool):
    """Pairwise CReq overhearing; both directions must get through under loss."""
    if mac.perfect or not control_loss:
        return None
    cache: dict[tuple[int, int], bool] = {}

    def visible(i: int, j: int) -> bool:
        key = (min(i, j), max(i, j))
        if key not in cache:
            cache[key] = mac_deliver(mac, rng) and mac_deliver(mac, rng)
        return cache[key]

    return visible


def replay_greedy(snapshot: NetworkSnapshot, source: int,
                  config: SessionConfig | None = None) -> SessionResult:
    """The greedy oracle on the engine clock: one transmission per slot."""
    config = config or SessionConfig(algorithm="greedy-replay")
    gt = greedy_broadcast(snapshot, source)
    n = snapshot.n
    metrics = SessionMetrics(n_nodes=n, source=source)
    metrics.tx_count = len(gt)
    metrics.delay_slots = metrics.termination_slot = len(gt)
    metrics.coverage_fraction = gt.covered_sizes[-1] / n
    metrics.transmitters = list(gt.transmitters)
    metrics.tx_slots = list(range(1, len(gt) + 1))
    for step, size in enumerate(gt.covered_sizes, 1):
        for frac in config.coverage_thresholds:
            if frac not in metrics.thresholds and size >= frac * n - 1e-9:
                metrics.thresholds[frac] = ThresholdRecord(step, step)
    nodes = [NodeState(i, covered=True, transmitted=i in set(gt.transmitters)) for i in range(n)]
    return SessionResult(metrics, [], nodes, list(gt.covered_sizes), set(gt.transmitters))


class MobileWorld:
    """Pairs a mobility model with the radio range so the engine can rebuild the graph."""

    def __init__(self, model, radius_r: float):
        self.model = model
        self.radius_r = radius_r

    @property
    def positions(self):
        return self.model.positions

    @property
    def interval(self):
        return self.model.interval

    def step(self, rng):
        return self.model.step(rng)
