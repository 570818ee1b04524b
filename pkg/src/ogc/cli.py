"""Command line: ``ogc run | validate | report``.

Exit codes: 0 success, 1 usage, 2 validation, 3 runtime.  Failures print a
single ``error: <Kind>: <detail>`` line on stderr.
"""
from __future__ import annotations

import argparse
import re
import sys
import time
from pathlib import Path

from . import __version__, results
from .geometry import GeometryError, NoConvergence
from .scenario import ScenarioError, load_scenario, output_settings, with_overrides
from .sim import EpisodeError, run_episode, run_monte_carlo

EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, EXIT_RUNTIME = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _seed_range(text: str) -> list[int]:
    m = re.fullmatch(r"(\d+)\.\.(\d+)", text)
    if not m or int(m.group(1)) > int(m.group(2)):
        raise argparse.ArgumentTypeError(f"expected N..M with N <= M, got {text!r}")
    return list(range(int(m.group(1)), int(m.group(2)) + 1))


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ogc", description="Online gradient control simulator")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    r = sub.add_parser("run", help="run an episode (or a Monte Carlo sweep with --seeds)")
    r.add_argument("scenario")
    r.add_argument("--out", help="output directory (default: the scenario's output.directory, else ./out)")
    r.add_argument("--seed", type=int)
    r.add_argument("--seeds", type=_seed_range, help="inclusive seed range N..M")
    r.add_argument("--alpha", type=float)
    r.add_argument("--epsilon", type=float)
    r.add_argument("--workers", type=int, default=1)

    v = sub.add_parser("validate", help="check a scenario file")
    v.add_argument("scenario")

    rep = sub.add_parser("report", help="recompute summary.csv from a run directory")
    rep.add_argument("logdir")
    return p


def _fail(kind: str, detail: str, code: int) -> int:
    print(f"error: {kind}: {' '.join(str(detail).split())}", file=sys.stderr)
    return code


def _run(args) -> int:
    scn = load_scenario(args.scenario)
    if args.alpha is not None and not args.alpha > 0:
        raise UsageError("--alpha must be positive")
    if args.epsilon is not None and not args.epsilon >= 0:
        raise UsageError("--epsilon must be >= 0")
    scn = with_overrides(scn, seed=args.seed, alpha=args.alpha, epsilon=args.epsilon)
    settings = output_settings(args.scenario)
    out = Path(args.out or settings.get("directory") or "out")
    tables = tuple(settings.get("tables") or ("trajectory", "summary", "meta"))
    overrides = {k: getattr(args, k) for k in ("seed", "alpha", "epsilon") if getattr(args, k) is not None}

    meta = {
        "scenario": Path(args.scenario).name,
        "horizon": scn.horizon,
        "alpha": scn.step_size,
        "epsilon": scn.epsilon,
        "comparator_tol": scn.comparator_tol,
        "devices": ",".join(d.kind for d in scn.devices),
        "overrides": ",".join(f"{k}={v}" for k, v in overrides.items()) or "none",
    }
    t0 = time.perf_counter()
    if args.seeds:
        mc = run_monte_carlo(scn, args.seeds, workers=args.workers)
        out.mkdir(parents=True, exist_ok=True)
        per_seed, agg = results.montecarlo_tables(mc)
        (out / "montecarlo.csv").write_text(per_seed, encoding="utf-8")
        (out / "aggregate.csv").write_text(agg, encoding="utf-8")
        meta["seeds"] = f"{args.seeds[0]}..{args.seeds[-1]}"
        meta["elapsed_seconds"] = round(time.perf_counter() - t0, 3)
        meta["tool_version"] = __version__
        results.write_meta(out / "meta.txt", meta)
        print(f"OK {len(mc.seeds)} episodes, mean average regret {mc.mean:.6g} (bound {mc.mean_bound:.6g}) -> {out}")
        return EXIT_OK

    log = run_episode(scn)
    meta["seed"] = scn.seed
    meta["elapsed_seconds"] = round(time.perf_counter() - t0, 3)
    results.emit_results(log, out, meta, tables, override=scn.constants_override)
    print(f"OK {scn.horizon} steps, average regret {log.avg_regret[-1]:.6g} (bound {log.bound[-1]:.6g}) -> {out}")
    return EXIT_OK


def _report(args) -> int:
    d = Path(args.logdir)
    try:
        text = results.report(d)
    except (OSError, KeyError, ValueError, StopIteration) as exc:
        return _fail("ReportError", f"cannot recompute from {d}: {exc}", EXIT_VALIDATION)
    sys.stdout.write(text)
    existing = d / "summary.csv"
    if existing.exists() and existing.read_text(encoding="utf-8") != text:
        return _fail("ReportMismatch", f"{existing} differs from the recomputed summary", EXIT_RUNTIME)
    return EXIT_OK


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        return _fail("UsageError", exc, EXIT_USAGE)
    try:
        if args.command == "validate":
            scn = load_scenario(args.scenario)
            print(f"OK {args.scenario}: {scn.horizon} steps, {len(scn.devices)} devices")
            return EXIT_OK
        if args.command == "report":
            return _report(args)
        return _run(args)
    except UsageError as exc:
        return _fail("UsageError", exc, EXIT_USAGE)
    except ScenarioError as exc:
        return _fail(exc.kind, exc, EXIT_VALIDATION)
    except EpisodeError as exc:
        kind = "InfeasibleStep" if isinstance(exc.cause, NoConvergence) else type(exc.cause).__name__
        return _fail(kind, exc, EXIT_RUNTIME)
    except (GeometryError, NoConvergence, OSError) as exc:
        return _fail(type(exc).__name__, exc, EXIT_RUNTIME)


if __name__ == "__main__":
    sys.exit(main())
