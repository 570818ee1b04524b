"""Regret against its bound on the convex feeder, for several noise levels.

Writes one CSV per noise level (step, average regret, bound) and prints the
smallest margin seen after ``--burn-in`` steps.

    python3 scripts/bound_check.py --eps 0 0.01 --out out/bound_check
"""
import argparse
from dataclasses import replace
from pathlib import Path

import numpy as np

from ogc.results import fmt
from ogc.scenario import load_scenario
from ogc.sim import run_episode

ROOT = Path(__file__).resolve().parents[1]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--scenario", default=ROOT / "scenarios" / "bound_check.yaml", type=Path)
    ap.add_argument("--eps", nargs="+", type=float, default=[0.0, 0.01])
    ap.add_argument("--burn-in", type=int, default=100)
    ap.add_argument("--out", type=Path, default=Path("out/bound_check"))
    args = ap.parse_args()

    base = load_scenario(args.scenario)
    args.out.mkdir(parents=True, exist_ok=True)
    print(f"{'eps':>8} {'avg regret':>12} {'bound':>10} {'min margin':>12}")
    for eps in args.eps:
        log = run_episode(replace(base, epsilon=eps))
        steps = np.arange(1, log.horizon + 1)
        with open(args.out / f"regret_eps{eps:g}.csv", "w", encoding="utf-8", newline="\n") as fh:
            fh.write("step,avg_regret,bound\n")
            for n, r, b in zip(steps, log.avg_regret, log.bound):
                fh.write(f"{n},{fmt(r)},{fmt(b)}\n")
        k = args.burn_in - 1
        margin = float(np.min(log.bound[k:] - log.avg_regret[k:]))
        print(f"{eps:8g} {log.avg_regret[-1]:12.4e} {log.bound[-1]:10.4f} {margin:12.4e}")


if __name__ == "__main__":
    main()
