"""Command line entry point: ``tsbroadcast <subcommand> ...``."""

from __future__ import annotations

import argparse
import sys

from . import bounds, model
from .baselines import greedy_broadcast, mcds_bruteforce
from .errors import ConfigError, InvalidArgument
from .sweep import (
    ALL_KEYS,
    PARSERS,
    emit_csv,
    format_csv,
    parse_pairs,
    read_pairs,
    run_one,
    run_sweep,
)
from .timeseq import build_time_sequence


def _add_setting_flags(p: argparse.ArgumentParser, keys) -> None:
    for key in keys:
        p.add_argument("--" + key.replace("_", "-"), dest="set_" + key, metavar="VALUE")


def _collect_pairs(args) -> dict[str, str]:
    pairs: dict[str, str] = {}
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc.strerror}") from None
        pairs.update(read_pairs(text, args.config))
    for key in ALL_KEYS:
        value = getattr(args, "set_" + key, None)
        if value is not None:
            pairs[key] = value
    return pairs


def cmd_simulate(args) -> int:
    spec = parse_pairs(_collect_pairs(args))
    point = spec.points()[0]
    row, result = run_one(point, 0, spec.base_seed, trace=args.trace)
    sys.stdout.write(format_csv([row]))
    if args.trace and result is not None:
        for line in result.trace:
            print(line, file=sys.stderr)
    return 1 if row.error else 0


def cmd_sweep(args) -> int:
    spec = parse_pairs(_collect_pairs(args))
    rows = run_sweep(spec, workers=args.workers)
    if args.out == "-":
        sys.stdout.write(format_csv(rows))
    else:
        emit_csv(rows, args.out)
    failed = sum(1 for r in rows if r.error)
    if failed:
        print(f"{failed} of {len(rows)} sessions failed", file=sys.stderr)
    return 0


def cmd_bounds(args) -> int:
    q = bounds.q_ratio(args.d, args.r)
    print(f"q={q:g}")
    print(f"lower={bounds.lower_bound_transmissions(q):.6g}")
    if q == int(q) and q >= 2:
        print(f"upper={bounds.upper_bound_transmissions(int(q))}")
    else:
        print("upper=undefined (needs integer q >= 2)")
    return 0


def cmd_ts(args) -> int:
    for v in build_time_sequence(args.u).vectors:
        print(f"{v.upper},{v.middle},{v.lower}")
    return 0


def _emit_topology(snap, out) -> None:
    if out == "-":
        model.write_node_list(snap, sys.stdout)
    else:
        with open(out, "w") as fh:
            model.write_node_list(snap, fh)


def cmd_topology(args) -> int:
    if args.kind == "gen":
        area = model.DeploymentArea(args.d, args.r)
        snap = model.deploy_uniform(args.n, area, args.seed, radius_r=args.r,
                                    require_connected=args.connected)
        _emit_topology(snap, args.out)
    elif args.kind == "worst-case":
        snap = bounds.worst_case_topology(args.q, args.r, args.epsilon)
        _emit_topology(snap, args.out)
    else:
        with open(args.file) as fh:
            snap = model.read_node_list(fh, args.r)
        edges = sum(len(a) for a in snap.adjacency) // 2
        print(f"nodes={snap.n} edges={edges} mean_degree={snap.mean_degree():.6g} "
              f"connected={int(model.is_connected(snap))}")
    return 0


def cmd_oracle(args) -> int:
    with open(args.mcds) as fh:
        snap = model.read_node_list(fh, args.r)
    res = mcds_bruteforce(snap, args.source, force_source=args.force_source)
    print(f"variant={res.variant}")
    print(f"size={res.size}")
    print("witness=" + " ".join(str(i) for i in sorted(res.witness)))
    if args.source is not None:
        trace = greedy_broadcast(snap, args.source)
        print(f"greedy={len(trace)}")
        print("greedy_transmitters=" + " ".join(map(str, trace.transmitters)))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tsbroadcast",
                                     description="Time-sequence broadcast simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one session and print its result row")
    p.add_argument("--config")
    p.add_argument("--trace", action="store_true", help="write the event trace to stderr")
    _add_setting_flags(p, list(PARSERS) + ["seed"])
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="run a parameter sweep and write CSV")
    p.add_argument("--config")
    p.add_argument("--out", default="-")
    p.add_argument("--workers", type=int)
    _add_setting_flags(p, [k for k in ALL_KEYS if k != "workers"])
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("bounds", help="closed-form transmission bounds")
    p.add_argument("--d", type=float, default=200.0)
    p.add_argument("--r", type=float, default=25.0)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("ts", help="print the time sequence for a given u")
    p.add_argument("--u", type=int, required=True)
    p.set_defaults(func=cmd_ts)

    p = sub.add_parser("topology", help="generate, construct or inspect node lists")
    tsub = p.add_subparsers(dest="kind", required=True)
    g = tsub.add_parser("gen")
    g.add_argument("--n", type=int, default=400)
    g.add_argument("--d", type=float, default=200.0)
    g.add_argument("--r", type=float, default=25.0)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--connected", action="store_true")
    g.add_argument("--out", default="-")
    w = tsub.add_parser("worst-case")
    w.add_argument("--q", type=int, required=True)
    w.add_argument("--r", type=float, default=25.0)
    w.add_argument("--epsilon", type=float, default=0.01)
    w.add_argument("--out", default="-")
    ld = tsub.add_parser("load")
    ld.add_argument("file")
    ld.add_argument("--r", type=float, default=25.0)
    p.set_defaults(func=cmd_topology)

    p = sub.add_parser("oracle", help="exact MCDS of a small node list")
    p.add_argument("--mcds", required=True, metavar="TOPOLOGY_FILE")
    p.add_argument("--r", type=float, default=25.0)
    p.add_argument("--source", type=int)
    p.add_argument("--force-source", action="store_true")
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, InvalidArgument) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
