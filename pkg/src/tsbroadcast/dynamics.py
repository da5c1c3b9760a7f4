"""Node mobility models and the Bernoulli packet-loss MAC.

Every model exposes ``positions`` (an ``(n, 2)`` array), a tick length
``interval`` in seconds and ``step(rng)`` advancing one tick. Positions always
stay inside the ``[0, side_d]`` square.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument


@dataclass(frozen=True)
class MacModel:
    loss_prob: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.loss_prob <= 1.0:
            raise InvalidArgument(f"loss_prob must be in [0, 1], got {self.loss_prob}")

    @property
    def perfect(self) -> bool:
        return self.loss_prob == 0.0


def mac_deliver(mac: MacModel, rng: np.random.Generator) -> bool:
    """One independent reception attempt. No random draw is consumed at p=0 or p=1."""
    if mac.loss_prob <= 0.0:
        return True
    if mac.loss_prob >= 1.0:
        return False
    return rng.random() >= mac.loss_prob


@dataclass(frozen=True)
class GmmmParams:
    update_interval: float = 0.2
    alpha: float = 0.75
    mean_speed: float = 10.0
    speed_std: float = 0.75
    # angle noise in radians; the velocity std is reused for the heading
    direction_std: float = 0.75

    def __post_init__(self):
        if not self.update_interval > 0:
            raise InvalidArgument("update_interval must be positive")
        if not 0.0 <= self.alpha <= 1.0:
            raise InvalidArgument("alpha must be in [0, 1]")
        if self.speed_std < 0 or self.direction_std < 0:
            raise InvalidArgument("standard deviations must be non-negative")
        if self.mean_speed < 0:
            raise InvalidArgument("mean_speed must be non-negative")


@dataclass(frozen=True)
class RpgmParams:
    node_pause: float = 0.3
    node_update_interval: float = 0.5
    max_rp_pause: float = 4.0
    rp_radius: float = 50.0
    group_fraction: float = 0.2
    mean_speed: float = 10.0
    tick: float = 0.1

    def __post_init__(self):
        if not 0.0 < self.group_fraction <= 1.0:
            raise InvalidArgument("group_fraction must be in (0, 1]")
        for name in ("node_pause", "node_update_interval", "max_rp_pause", "tick"):
            if not getattr(self, name) > 0:
                raise InvalidArgument(f"{name} must be positive")
        if self.rp_radius < 0 or self.mean_speed < 0:
            raise InvalidArgument("rp_radius and mean_speed must be non-negative")


def reflect(pos: np.ndarray, heading: np.ndarray | None, side: float):
    """Mirror coordinates back into ``[0, side]``; flip headings that bounced."""
    for axis in (0, 1):
        c = pos[:, axis].copy()
        # fold into [0, 2*side) then mirror the upper half
        folded = np.mod(c, 2.0 * side)
        bounced = (c < 0) | (c > side)
        over = folded > side
        pos[:, axis] = np.where(over, 2.0 * side - folded, folded)
        if heading is not None:
            # an odd number of wall hits reverses the velocity component
            flip = bounced & (np.floor_divide(c, side).astype(np.int64) % 2 != 0)
            if axis == 0:
                heading[flip] = math.pi - heading[flip]
            else:
                heading[flip] = -heading[flip]
    return pos, heading


class StaticModel:
    interval = math.inf

    def __init__(self, positions, side_d: float):
        self.positions = np.array(positions, dtype=float)
        self.side_d = side_d

    def step(self, rng):
        return self.positions


class GaussMarkovModel:
    """Gauss-Markov motion: speed and heading each follow an AR(1) recursion.

    The speed state is kept unclamped so its stationary law is exactly
    Normal(mean_speed, speed_std); only the displacement uses ``max(speed, 0)``.
    """

    def __init__(self, positions, side_d: float, params: GmmmParams, rng: np.random.Generator):
        self.params = params
        self.side_d = side_d
        self.interval = params.update_interval
        self.positions = np.array(positions, dtype=float)
        n = len(self.positions)
        self.speed = rng.normal(params.mean_speed, params.speed_std, size=n)
        self.heading = rng.uniform(-math.pi, math.pi, size=n)

    def step(self, rng: np.random.Generator):
        gmmm_step(self, self.params, rng)
        return self.positions


def gmmm_step(state: GaussMarkovModel, params: GmmmParams, rng: np.random.Generator):
    a = params.alpha
    noise = math.sqrt(1.0 - a * a)
    n = len(state.positions)
    state.speed = a * state.speed + (1 - a) * params.mean_speed + \
        noise * params.speed_std * rng.standard_normal(n)
    # heading mean is the previous heading, so the mean-reversion term vanishes
    state.heading = state.heading + noise * params.direction_std * rng.standard_normal(n)
    move = np.maximum(state.speed, 0.0) * params.update_interval
    state.positions[:, 0] += move * np.cos(state.heading)
    state.positions[:, 1] += move * np.sin(state.heading)
    reflect(state.positions, state.heading, state.side_d)
    state.heading = np.mod(state.heading + math.pi, 2 * math.pi) - math.pi
    return state


class RpgmModel:
    """Nomadic reference-point group mobility.

    Each group's reference point (RP) hops between random waypoints of the
    inner area, pausing up to ``max_rp_pause`` at each. Members wander between
    random waypoints inside the RP disk, pausing ``node_pause`` on arrival and
    redrawing their speed every ``node_update_interval``.
    """

    def __init__(self, positions, side_d: float, params: RpgmParams,
                 rng: np.random.Generator, inner_margin: float = 25.0):
        self.params = params
        self.side_d = side_d
        self.interval = params.tick
        n = len(positions)
        self.lo = inner_margin / 2.0
        self.hi = side_d - inner_margin / 2.0
        n_groups = max(1, min(n, int(math.floor(1.0 / params.group_fraction + 0.5))))
        # id-contiguous blocks
        self.group = np.minimum((np.arange(n) * n_groups) // max(n, 1), n_groups - 1)
        self.n_groups = n_groups

        self.rp = rng.uniform(self.lo, self.hi, size=(n_groups, 2))
        self.rp_target = rng.uniform(self.lo, self.hi, size=(n_groups, 2))
        self.rp_pause = np.zeros(n_groups)

        self.offset = self._disk_points(rng, n)
        self.off_target = self._disk_points(rng, n)
        self.pause = np.zeros(n)
        self.node_speed = self._member_speed(rng, n)
        self.clock = 0.0
        self.next_speed_update = params.node_update_interval
        self.positions = np.zeros((n, 2))
        self._place()

    def _disk_points(self, rng, n):
        rad = self.params.rp_radius * np.sqrt(rng.uniform(0, 1, n))
        ang = rng.uniform(-math.pi, math.pi, n)
        return np.column_stack((rad * np.cos(ang), rad * np.sin(ang)))

    def _member_speed(self, rng, n):
        v = self.params.mean_speed
        return np.maximum(rng.normal(v, 0.1 * v, n), 0.0)

    def _place(self):
        pos = self.rp[self.group] + self.offset
        # projection onto the square never moves a point away from an inside RP
        np.clip(pos, 0.0, self.side_d, out=pos)
        self.positions = pos

    def step(self, rng: np.random.Generator):
        rpgm_step(self, self.params, rng)
        return self.positions


def _advance(cur, target, pause, speed, dt):
    """Move points toward their targets; return mask of arrivals this tick."""
    active = pause <= 0
    np.maximum(pause - dt, 0.0, out=pause)
    delta = target - cur
    dist = np.hypot(delta[:, 0], delta[:, 1])
    reach = speed * dt
    arrive = active & (dist <= reach)
    moving = active & ~arrive & (dist > 0)
    scale = np.zeros_like(dist)
    scale[moving] = reach[moving] / dist[moving]
    cur += delta * scale[:, None]
    cur[arrive] = target[arrive]
    return arrive


def rpgm_step(state: RpgmModel, params: RpgmParams, rng: np.random.Generator):
    dt = params.tick
    state.clock += dt
    if state.clock + 1e-12 >= state.next_speed_update:
        state.node_speed = state._member_speed(rng, len(state.offset))
        state.next_speed_update += params.node_update_interval

    rp_speed = np.full(state.n_groups, params.mean_speed)
    arrived = _advance(state.rp, state.rp_target, state.rp_pause, rp_speed, dt)
    k = int(arrived.sum())
    if k:
        state.rp_target[arrived] = rng.uniform(state.lo, state.hi, size=(k, 2))
        state.rp_pause[arrived] = rng.uniform(0.0, params.max_rp_pause, size=k)

    arrived = _advance(state.offset, state.off_target, state.pause, state.node_speed, dt)
    k = int(arrived.sum())
    if k:
        state.off_target[arrived] = state._disk_points(rng, k)
        state.pause[arrived] = params.node_pause
    state._place()
    return state


def warmup(model, duration: float, rng: np.random.Generator):
    """Advance mobility alone for ``duration`` seconds of simulated time."""
    if duration < 0:
        raise InvalidArgument("duration must be >= 0")
    if duration == 0 or not math.isfinite(model.interval):
        return model.positions
    steps = int(math.floor(duration / model.interval + 1e-9))
    for _ in range(steps):
        model.step(rng)
    return model.positions


def make_mobility(kind: str, positions, side_d: float, rng: np.random.Generator, *,
                  gmmm: GmmmParams | None = None, rpgm: RpgmParams | None = None,
                  inner_margin: float = 25.0):
    if kind == "static":
        return StaticModel(positions, side_d)
    if kind == "gmmm":
        return GaussMarkovModel(positions, side_d, gmmm or GmmmParams(), rng)
    if kind == "rpgm":
        return RpgmModel(positions, side_d, rpgm or RpgmParams(), rng, inner_margin)
    raise InvalidArgument(f"unknown mobility model {kind!r}")
