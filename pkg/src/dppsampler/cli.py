"""Command-line front end.

Three subcommands: ``sample`` draws configurations from a space-config file,
``metrics`` profiles a point set, ``bench`` runs a benchmark config and emits
result tables.  stdout carries data only; diagnostics go to stderr.  Exit
codes: 0 success, 2 user/config error, 3 unsupported space/method pairing.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .errors import UnsupportedSpaceError
from .harness import (
    BenchmarkConfig,
    aggregate,
    emit,
    run_distance_benchmark,
    run_spread_benchmark,
    run_synthetic_optimization,
)
from .kernel import KernelConfig, default_sigma
from .metrics import PointSet, metric_report
from .samplers import (
    McmcSettings,
    default_mcmc_steps,
    grid_sample,
    kdpp_mcmc_mixed,
    kdpp_sequential,
    sobol_sample,
    uniform_sample,
)
from .searchspace import parse_space

_METHODS = ("uniform", "grid", "sobol", "kdpp-mcmc", "kdpp-seq")
_BENCHMARKS = {
    "spread": run_spread_benchmark,
    "distance": run_distance_benchmark,
    "synthetic": run_synthetic_optimization,
}
_BENCH_KEYS = {"benchmark", "samplers", "d", "k_values", "trials", "master_seed", "objective"}


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="dppsampler",
        description="Open-loop hyperparameter sampling: diverse configuration "
        "sequences, coverage metrics, and sampler benchmarks.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("sample", help="draw k configurations from a space-config file")
    sp.add_argument("--space", required=True, metavar="PATH", help="space-config JSON document")
    sp.add_argument("--k", required=True, type=int, help="number of configurations")
    sp.add_argument("--method", required=True, choices=_METHODS)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument(
        "--sigma", type=float, default=None, help="RBF bandwidth (default: sqrt(2)/k)"
    )
    sp.add_argument(
        "--steps",
        type=int,
        default=None,
        help="MCMC step count (default: a slow-growing multiple of k ln k)",
    )
    sp.add_argument("--pool", type=int, default=1000, help="sequential candidate-pool size")
    sp.add_argument("--rotate", choices=("true", "false"), default="false",
                    help="randomly rotate the sobol sequence")
    sp.add_argument("--out", metavar="PATH", default=None, help="write here instead of stdout")

    mp = sub.add_parser("metrics", help="coverage metrics of a point-set file")
    mp.add_argument("points", metavar="PATH", help="JSON lines, one [0,1]^d vector per line")
    mp.add_argument("--out", metavar="PATH", default=None, help="write here instead of stdout")

    bp = sub.add_parser("bench", help="run a benchmark config and emit result tables")
    bp.add_argument("config", metavar="PATH", help="benchmark-config JSON document")
    bp.add_argument("--out", metavar="DIR", default=".", help="directory for result artifacts")
    return ap


def _write_text(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _cmd_sample(args: argparse.Namespace) -> int:
    if args.k < 1:
        print("error: --k must be >= 1", file=sys.stderr)
        return 2
    if args.sigma is not None and not args.sigma > 0:
        print("error: --sigma must be > 0", file=sys.stderr)
        return 2
    space = parse_space(Path(args.space).read_text())
    sigma = args.sigma if args.sigma is not None else default_sigma(args.k)
    rotated = args.rotate == "true"

    header: dict[str, object] = {
        "method": args.method,
        "k": args.k,
        "seed": args.seed,
        "sigma": None,
        "steps": None,
        "pool": None,
        "rotated": None,
    }
    if args.method == "uniform":
        sample = uniform_sample(space, args.k, seed=args.seed)
    elif args.method == "grid":
        sample = grid_sample(space, args.k)
    elif args.method == "sobol":
        sample = sobol_sample(space, args.k, rotate=rotated, seed=args.seed)
        header["rotated"] = rotated
    elif args.method == "kdpp-mcmc":
        steps = args.steps if args.steps is not None else default_mcmc_steps(args.k)
        sample = kdpp_mcmc_mixed(
            space, args.k, KernelConfig(sigma=sigma), McmcSettings(steps=steps, seed=args.seed)
        )
        header["sigma"] = sigma
        header["steps"] = steps
    else:  # kdpp-seq
        sample = kdpp_sequential(
            space, args.k, KernelConfig(sigma=sigma), pool_size=args.pool, seed=args.seed
        )
        header["sigma"] = sigma
        header["pool"] = args.pool

    lines = [json.dumps(header, separators=(",", ":"))]
    lines.extend(
        json.dumps(dict(config.values), separators=(",", ":")) for config in sample.points
    )
    _write_text("\n".join(lines) + "\n", args.out)
    return 0


def _cmd_metrics(args: argparse.Namespace) -> int:
    rows: list[list[float]] = []
    for lineno, line in enumerate(Path(args.points).read_text().splitlines(), start=1):
        if not line.strip():
            continue
        try:
            vec = json.loads(line)
        except json.JSONDecodeError as exc:
            print(f"error: {args.points}:{lineno}: invalid JSON: {exc.msg}", file=sys.stderr)
            return 2
        if (
            not isinstance(vec, list)
            or not vec
            or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in vec)
        ):
            print(f"error: {args.points}:{lineno}: expected a vector of numbers", file=sys.stderr)
            return 2
        rows.append([float(x) for x in vec])
    if not rows:
        print(f"error: {args.points}: no points", file=sys.stderr)
        return 2
    if len({len(r) for r in rows}) != 1:
        print(f"error: {args.points}: vectors have inconsistent dimensions", file=sys.stderr)
        return 2
    point_set = PointSet(np.array(rows), len(rows[0]))
    report = metric_report(point_set)
    _write_text(json.dumps(asdict(report), indent=1) + "\n", args.out)
    return 0


def _cmd_bench(args: argparse.Namespace) -> int:
    doc = json.loads(Path(args.config).read_text())
    if not isinstance(doc, dict):
        print("error: benchmark config must be a JSON object", file=sys.stderr)
        return 2
    unknown = set(doc) - _BENCH_KEYS
    if unknown:
        print(f"error: unknown benchmark-config keys: {sorted(unknown)}", file=sys.stderr)
        return 2
    benchmark = doc.get("benchmark")
    if benchmark not in _BENCHMARKS:
        print(
            f"error: benchmark must be one of: {', '.join(_BENCHMARKS)}", file=sys.stderr
        )
        return 2
    try:
        cfg = BenchmarkConfig(
            samplers=tuple(str(s) for s in doc["samplers"]),
            d=int(doc["d"]),
            k_values=tuple(int(k) for k in doc["k_values"]),
            trials=int(doc.get("trials", 50)),
            master_seed=int(doc.get("master_seed", 0)),
            objective=doc.get("objective"),
        )
    except KeyError as exc:
        print(f"error: benchmark config missing key {exc}", file=sys.stderr)
        return 2
    except TypeError as exc:
        print(f"error: malformed benchmark config: {exc}", file=sys.stderr)
        return 2

    results = _BENCHMARKS[benchmark](cfg)
    for path in emit(results, cfg, benchmark, args.out):
        print(f"wrote {path}", file=sys.stderr)

    lines = [
        f"benchmark={benchmark} d={cfg.d} trials={cfg.trials} master_seed={cfg.master_seed}"
    ]
    # Per-step curves (metric names carrying "@") stay in the artifacts; the
    # console summary sticks to the whole-run metrics.
    metric_names = [m for m in results[0].metrics if "@" not in m]
    for metric in metric_names:
        table = aggregate(results, metric)
        lines.append(f"metric {metric}")
        for tag in cfg.samplers:
            for k in cfg.k_values:
                if (tag, k) not in table:
                    continue
                mean, lo, hi = table[(tag, k)]
                lines.append(
                    f"  {tag:<10} k={k:<4d} mean={mean:.6g} ci95=[{lo:.6g}, {hi:.6g}]"
                )
    sys.stdout.write("\n".join(lines) + "\n")
    return 0


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "sample":
            return _cmd_sample(args)
        if args.command == "metrics":
            return _cmd_metrics(args)
        return _cmd_bench(args)
    except UnsupportedSpaceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except json.JSONDecodeError as exc:
        print(f"error: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}",
              file=sys.stderr)
        return 2
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
