"""Flat ``key = value`` experiment configs, seeded sweeps and CSV output.

Config reference (defaults in brackets)::

    algorithm           ntss | tss | flooding | greedy-replay   [tss]
    n_nodes             node count                              [400]
    side_d              deployment square side, m               [200]
    radius_r            transmission radius, m                  [25]
    u                   'auto' or a positive integer            [auto]
    slot_duration       seconds per slot                        [0.1]
    preamble_fraction   share of a slot used by the Preamble    [0.1]
    max_slots           'auto' or a positive integer            [auto]
    thresholds          coverage fractions to record            [0.8,0.9]
    loss_prob           per-reception loss probability          [0]
    control_loss        loss also hits CReq/CRep                [true]
    mobility            static | gmmm | rpgm                    [static]
    mean_speed          m/s                                     [10]
    speed_std           m/s (Gauss-Markov)                      [0.75]
    alpha               Gauss-Markov memory                     [0.75]
    update_interval     Gauss-Markov tick, s                    [0.2]
    direction_std       Gauss-Markov heading noise, rad         [0.75]
    rp_radius           RP radius of influence, m               [50]
    group_fraction      expected group size / N                 [0.2]
    node_pause          member pause, s                         [0.3]
    node_update_interval member speed redraw period, s          [0.5]
    max_rp_pause        longest RP pause, s                     [4]
    rpgm_tick           RPGM integration step, s                [0.1]
    warmup              mobility warm-up before each session, s [1000]
    require_connected   redraw static placements until connected [true]
    max_attempts        placement redraw budget                 [1000]
    vary                none | n_nodes | u | mean_speed | rp_radius | loss_prob [none]
    values              comma-separated values for 'vary'       []
    repetitions         sessions per sweep point                [1]
    seed                base seed; run k uses seed + k          [0]
    workers             parallel worker processes               [1]
"""

from __future__ import annotations

import csv
import dataclasses
import io
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace

import numpy as np

from .dynamics import GmmmParams, RpgmParams, make_mobility, warmup
from .engine import ALGORITHMS, MobileWorld, SessionConfig, run_session
from .errors import ConfigError
from .model import DeploymentArea, build_udg, deploy_uniform, pick_source

VARY_DIMENSIONS = ("none", "n_nodes", "u", "mean_speed", "rp_radius", "loss_prob")
MOBILITY_MODELS = ("static", "gmmm", "rpgm")


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _auto_int(text: str):
    return None if text.strip().lower() == "auto" else int(text)


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(t) for t in text.split(",") if t.strip())


@dataclass(frozen=True)
class Settings:
    algorithm: str = "tss"
    n_nodes: int = 400
    side_d: float = 200.0
    radius_r: float = 25.0
    u: int | None = None
    slot_duration: float = 0.1
    preamble_fraction: float = 0.1
    max_slots: int | None = None
    thresholds: tuple[float, ...] = (0.8, 0.9)
    loss_prob: float = 0.0
    control_loss: bool = True
    mobility: str = "static"
    mean_speed: float = 10.0
    speed_std: float = 0.75
    alpha: float = 0.75
    update_interval: float = 0.2
    direction_std: float = 0.75
    rp_radius: float = 50.0
    group_fraction: float = 0.2
    node_pause: float = 0.3
    node_update_interval: float = 0.5
    max_rp_pause: float = 4.0
    rpgm_tick: float = 0.1
    warmup: float = 1000.0
    require_connected: bool = True
    max_attempts: int = 1000


PARSERS = {
    "algorithm": str, "n_nodes": int, "side_d": float, "radius_r": float, "u": _auto_int,
    "slot_duration": float, "preamble_fraction": float, "max_slots": _auto_int,
    "thresholds": _floats, "loss_prob": float, "control_loss": _bool, "mobility": str,
    "mean_speed": float, "speed_std": float, "alpha": float, "update_interval": float,
    "direction_std": float, "rp_radius": float, "group_fraction": float, "node_pause": float,
    "node_update_interval": float, "max_rp_pause": float, "rpgm_tick": float, "warmup": float,
    "require_connected": _bool, "max_attempts": int,
}
SWEEP_KEYS = {"vary": str, "values": _floats, "repetitions": int, "seed": int, "workers": int}
ALL_KEYS = {**PARSERS, **SWEEP_KEYS}


@dataclass(frozen=True)
class SweepSpec:
    base: Settings = field(default_factory=Settings)
    vary: str = "none"
    values: tuple[float, ...] = ()
    repetitions: int = 1
    base_seed: int = 0
    workers: int = 1

    def points(self) -> list[Settings]:
        """One Settings per sweep point, in ascending value order."""
        if self.vary == "none":
            return [self.base]
        out = []
        for value in sorted(set(self.values)):
            if self.vary in ("n_nodes", "u"):
                value = int(value)
            out.append(validate_settings(replace(self.base, **{self.vary: value}), self.vary))
        return out


def validate_settings(s: Settings, context: str = "") -> Settings:
    def bad(key, msg):
        where = f" (while varying {context})" if context else ""
        raise ConfigError(f"{key}: {msg}{where}")

    if s.algorithm not in ALGORITHMS:
        bad("algorithm", f"must be one of {', '.join(ALGORITHMS)}")
    if s.mobility not in MOBILITY_MODELS:
        bad("mobility", f"must be one of {', '.join(MOBILITY_MODELS)}")
    if s.n_nodes < 1:
        bad("n_nodes", "must be >= 1")
    if not s.radius_r > 0:
        bad("radius_r", "must be positive")
    if not s.side_d > 2 * s.radius_r:
        bad("side_d", "must exceed 2 * radius_r")
    if s.u is not None and s.u < 1:
        bad("u", "must be 'auto' or >= 1")
    if s.max_slots is not None and s.max_slots < 1:
        bad("max_slots", "must be 'auto' or >= 1")
    if not 0.0 <= s.loss_prob <= 1.0:
        bad("loss_prob", f"must be in [0, 1], got {s.loss_prob}")
    if not 0.0 < s.preamble_fraction < 1.0:
        bad("preamble_fraction", "must be in (0, 1)")
    if not 0.0 <= s.alpha <= 1.0:
        bad("alpha", "must be in [0, 1]")
    if not 0.0 < s.group_fraction <= 1.0:
        bad("group_fraction", "must be in (0, 1]")
    if any(not 0.0 < t <= 1.0 for t in s.thresholds):
        bad("thresholds", "fractions must be in (0, 1]")
    for key in ("slot_duration", "update_interval", "node_pause", "node_update_interval",
                "max_rp_pause", "rpgm_tick", "max_attempts"):
        if not getattr(s, key) > 0:
            bad(key, "must be positive")
    for key in ("mean_speed", "speed_std", "direction_std", "rp_radius", "warmup"):
        if not (getattr(s, key) >= 0 and math.isfinite(getattr(s, key))):
            bad(key, "must be finite and non-negative")
    return s


def parse_pairs(pairs: dict[str, str]) -> SweepSpec:
    settings, sweep = {}, {}
    for key, raw in pairs.items():
        if key not in ALL_KEYS:
            raise ConfigError(f"{key}: unknown key")
        try:
            value = ALL_KEYS[key](raw)
        except ValueError as exc:
            raise ConfigError(f"{key}: cannot parse {raw!r} ({exc})") from None
        (settings if key in PARSERS else sweep)[key] = value
    base = validate_settings(Settings(**settings))
    spec = SweepSpec(
        base=base,
        vary=sweep.get("vary", "none"),
        values=sweep.get("values", ()),
        repetitions=sweep.get("repetitions", 1),
        base_seed=sweep.get("seed", 0),
        workers=sweep.get("workers", 1),
    )
    if spec.vary not in VARY_DIMENSIONS:
        raise ConfigError(f"vary: must be one of {', '.join(VARY_DIMENSIONS)}")
    if spec.vary != "none" and not spec.values:
        raise ConfigError("values: must be non-empty when vary is set")
    if spec.repetitions < 1:
        raise ConfigError("repetitions: must be >= 1")
    if spec.workers < 1:
        raise ConfigError("workers: must be >= 1")
    spec.points()  # validates every point
    return spec


def read_pairs(text: str, origin: str = "<config>") -> dict[str, str]:
    pairs = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{origin}:{lineno}: expected 'key = value', got {line!r}")
        key, value = (p.strip() for p in line.split("=", 1))
        if key in pairs:
            raise ConfigError(f"{origin}:{lineno}: {key}: duplicate key")
        pairs[key] = value
    return pairs


def parse_config(path) -> SweepSpec:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_pairs(read_pairs(text, str(path)))


# --- running ---------------------------------------------------------------

RESULT_FIELDS = (
    "run_id", "seed", "algorithm", "n_nodes", "radius_r", "u", "mobility_model",
    "mean_speed", "rp_radius", "loss_prob", "tx_count", "delay_slots", "coverage_fraction",
    "creq_count", "crep_count", "slot_at_80", "tx_at_80", "slot_at_90", "tx_at_90",
    "truncated_flag", "error",
)


@dataclass
class ResultRow:
    run_id: int
    seed: int
    algorithm: str
    n_nodes: int
    radius_r: float
    u: int
    mobility_model: str
    mean_speed: float
    rp_radius: float
    loss_prob: float
    tx_count: int = -1
    delay_slots: int = -1
    coverage_fraction: float = -1.0
    creq_count: int = -1
    crep_count: int = -1
    slot_at_80: int = -1
    tx_at_80: int = -1
    slot_at_90: int = -1
    tx_at_90: int = -1
    truncated_flag: int = 0
    error: str = ""


def build_world(s: Settings, seed: int):
    """Deploy, warm up and pick a source for one run.

    Returns ``(world, source, fallback)`` where ``world`` is a snapshot for
    static runs and a :class:`MobileWorld` otherwise.
    """
    deploy_ss, mob_ss, src_ss = np.random.SeedSequence(seed).spawn(3)
    area = DeploymentArea(s.side_d, s.radius_r)
    static = s.mobility == "static"
    snap = deploy_uniform(s.n_nodes, area, deploy_ss, radius_r=s.radius_r,
                          require_connected=static and s.require_connected,
                          max_attempts=s.max_attempts)
    if static:
        source, fallback = pick_source(snap, area, np.random.default_rng(src_ss))
        return snap, source, fallback
    rng = np.random.default_rng(mob_ss)
    model = make_mobility(
        s.mobility, snap.positions, s.side_d, rng,
        gmmm=GmmmParams(s.update_interval, s.alpha, s.mean_speed, s.speed_std, s.direction_std),
        rpgm=RpgmParams(s.node_pause, s.node_update_interval, s.max_rp_pause, s.rp_radius,
                        s.group_fraction, s.mean_speed, s.rpgm_tick),
        inner_margin=s.radius_r,
    )
    warmup(model, s.warmup, rng)
    current = build_udg(model.positions, s.radius_r)
    source, fallback = pick_source(current, area, np.random.default_rng(src_ss))
    return MobileWorld(model, s.radius_r), source, fallback


def session_config(s: Settings, seed: int) -> SessionConfig:
    thresholds = tuple(sorted(set(s.thresholds) | {0.8, 0.9}))
    return SessionConfig(
        algorithm=s.algorithm, u=s.u, slot_duration=s.slot_duration,
        preamble_fraction=s.preamble_fraction, max_slots=s.max_slots,
        coverage_thresholds=thresholds, loss_prob=s.loss_prob,
        control_loss=s.control_loss, seed=seed,
    )


def run_one(s: Settings, run_id: int, seed: int, trace: bool = False):
    """Run one session and return ``(row, result)``; ``result`` is None on failure."""
    mobile = s.mobility != "static"
    row = ResultRow(
        run_id=run_id, seed=seed, algorithm=s.algorithm, n_nodes=s.n_nodes,
        radius_r=s.radius_r, u=s.u if s.u is not None else -1, mobility_model=s.mobility,
        mean_speed=s.mean_speed if mobile else 0.0,
        rp_radius=s.rp_radius if s.mobility == "rpgm" else 0.0, loss_prob=s.loss_prob,
    )
    try:
        world, source, fallback = build_world(s, seed)
        cfg = replace(session_config(s, seed), trace=trace)
        result = run_session(world, cfg, source=source, source_fallback=fallback)
    except Exception as exc:  # recorded in the row; the sweep carries on
        row.error = f"{type(exc).__name__}: {exc}"
        return row, None
    m = result.metrics
    row.u = m.u
    row.tx_count = m.tx_count
    row.delay_slots = m.delay_slots
    row.coverage_fraction = m.coverage_fraction
    row.creq_count = m.creq_count
    row.crep_count = m.crep_count
    for frac, slot_key, tx_key in ((0.8, "slot_at_80", "tx_at_80"), (0.9, "slot_at_90", "tx_at_90")):
        rec = m.threshold(frac)
        if rec is not None:
            setattr(row, slot_key, rec.slot)
            setattr(row, tx_key, rec.tx)
    row.truncated_flag = int(m.truncated)
    return row, result


def _job(args):
    s, run_id, seed = args
    return run_one(s, run_id, seed)[0]


def plan_runs(spec: SweepSpec) -> list[tuple[Settings, int, int]]:
    jobs = []
    run_id = 0
    for point in spec.points():
        for _ in range(spec.repetitions):
            jobs.append((point, run_id, spec.base_seed + run_id))
            run_id += 1
    return jobs


def run_sweep(spec: SweepSpec, workers: int | None = None) -> list[ResultRow]:
    jobs = plan_runs(spec)
    workers = workers or spec.workers
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, os.cpu_count() or 1)) as pool:
            rows = list(pool.map(_job, jobs))
    else:
        rows = [_job(j) for j in jobs]
    return sorted(rows, key=lambda r: r.run_id)


def _fmt(value) -> str:
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def format_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(RESULT_FIELDS)
    for row in rows:
        d = dataclasses.asdict(row)
        writer.writerow([_fmt(d[k]) for k in RESULT_FIELDS])
    return buf.getvalue()


def emit_csv(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(format_csv(rows))


def settings_fields() -> list[str]:
    return [f.name for f in fields(Settings)]
