"""Result tables: trajectory.csv, summary.csv and meta.txt.

The summary is always computed from the trajectory table (never from the
in-memory log), so ``ogc report`` reproduces it byte for byte.
"""
from __future__ import annotations

import csv
import io
from pathlib import Path

import numpy as np

from . import __version__
from .oco import BoundConstants, finite_horizon_bound
from .sim import EpisodeLog, MonteCarloResult


def fmt(x) -> str:
    """Shortest round-tripping representation of a float."""
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def _write_table(header: list[str], rows, path: Path | None = None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) for v in r])
    text = buf.getvalue()
    if path is not None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return text


def trajectory_table(log: EpisodeLog) -> tuple[list[str], list[list]]:
    T = log.horizon
    n = np.arange(1, T + 1)
    cum = np.cumsum(log.regret)
    header = ["step", "regret", "cum_regret", "avg_regret", "variability", "avg_variability", "bound",
              "f_y", "f_z", "substation_power", "target", "v_min", "v_max", "v_min_realized",
              "v_max_realized", "grad_bound", "lipschitz", "diameter", "norm_bound", "bibs"]
    cols = [n - 1, log.regret, cum, cum / n, log.variability, log.variability / n, log.bound,
            log.f_y, log.f_z, log.substation, log.target, log.voltages.min(axis=1), log.voltages.max(axis=1),
            log.voltages_realized.min(axis=1), log.voltages_realized.max(axis=1),
            log.grad_bound, log.lipschitz, log.diameter, log.norm_bound, log.bibs]
    for j, kind in enumerate(log.device_kinds):
        header += [f"P_{j}", f"Q_{j}"]
        cols += [log.power[:, 2 * j], log.power[:, 2 * j + 1]]
        if kind == "battery":
            header.append(f"soc_{j}")
            cols.append(log.soc[:, j])
        if kind == "hvac":
            header += [f"on_prob_{j}", f"on_{j}", f"locked_{j}"]
            y_idx = sum(1 if k == "hvac" else 2 for k in log.device_kinds[:j])
            cols += [log.implemented[:, y_idx], log.hvac_on[:, j].astype(int), log.hvac_locked[:, j]]
    rows = [list(r) for r in zip(*[c.tolist() for c in cols])]
    # keep integer/bool columns typed
    for r in rows:
        r[0] = int(r[0])
    return header, rows


def read_table(path) -> dict[str, np.ndarray]:
    return _parse_text(Path(path).read_text(encoding="utf-8"))


_CONSTANT_KEYS = ("grad_bound", "lipschitz", "diameter", "norm_bound")


def summarize(
    table: dict[str, np.ndarray],
    alpha: float,
    epsilon: float,
    terminal: dict[str, float],
    override: dict[str, float] | None = None,
) -> list[tuple[str, object]]:
    """Summary rows from trajectory columns and the run parameters.

    Bound constants are the maxima of the per-step columns and the closing
    step, unless ``override`` pins them.
    """
    override = override or {}
    n = len(table["regret"])
    vals = {k: override.get(k, max(float(np.max(table[k])), terminal[k])) for k in _CONSTANT_KEYS}
    constants = BoundConstants(**vals, step_size=alpha, meas_error=epsilon)
    total = float(np.sum(table["regret"]))
    V = float(table["variability"][-1])
    return [
        ("horizon", n),
        ("alpha", alpha),
        ("epsilon", epsilon),
        ("avg_regret", total / n),
        ("avg_variability", V / n),
        ("bound", finite_horizon_bound(constants, V, n)),
        ("bound_holds", bool(np.all(table["avg_regret"] <= table["bound"]))),
        ("F", constants.grad_bound),
        ("lambda", constants.lipschitz),
        ("D", constants.diameter),
        ("B", constants.norm_bound),
        ("K1", constants.k1),
        ("K2", constants.k2),
        ("K3", constants.k3),
        ("bibs", bool(np.all(table["bibs"] == 1))),
    ]


def summary_text(rows) -> str:
    return _write_table(["quantity", "value"], rows)


def write_meta(path: Path, items: dict) -> str:
    text = "".join(f"{k}: {fmt(v) if isinstance(v, (float, int, np.floating, bool)) else v}\n" for k, v in items.items())
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return text


def read_meta(path) -> dict[str, str]:
    out = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if ": " in line:
            k, v = line.split(": ", 1)
            out[k] = v
    return out


def emit_results(
    log: EpisodeLog,
    directory,
    meta: dict,
    tables=("trajectory", "summary", "meta"),
    override: dict | None = None,
) -> dict[str, Path]:
    """Write the run's tables into ``directory``; returns the written paths."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    header, rows = trajectory_table(log)
    traj_text = _write_table(header, rows)
    written = {}
    if "trajectory" in tables:
        written["trajectory"] = d / "trajectory.csv"
        written["trajectory"].write_text(traj_text, encoding="utf-8")
    meta = dict(meta)
    meta["tool_version"] = __version__
    for k, v in log.terminal.items():
        meta[f"terminal_{k}"] = v
    for k, v in (override or {}).items():
        meta[f"override_{k}"] = float(v)
    if "summary" in tables:
        table = _parse_text(traj_text)
        rows_ = summarize(table, log.constants.step_size, log.constants.meas_error, log.terminal, override)
        written["summary"] = d / "summary.csv"
        written["summary"].write_text(summary_text(rows_), encoding="utf-8")
    if "meta" in tables:
        written["meta"] = d / "meta.txt"
        write_meta(written["meta"], meta)
    return written


def _parse_text(text: str) -> dict[str, np.ndarray]:
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    data = np.array([[float(v) for v in row] for row in reader], dtype=float).reshape(-1, len(header))
    return {h: data[:, i] for i, h in enumerate(header)}


def report(directory) -> str:
    """Recompute summary.csv text from trajectory.csv and meta.txt."""
    d = Path(directory)
    meta = read_meta(d / "meta.txt")
    table = read_table(d / "trajectory.csv")
    terminal = {k: float(meta[f"terminal_{k}"]) for k in _CONSTANT_KEYS}
    override = {k: float(meta[f"override_{k}"]) for k in _CONSTANT_KEYS if f"override_{k}" in meta}
    return summary_text(summarize(table, float(meta["alpha"]), float(meta["epsilon"]), terminal, override))


def montecarlo_tables(mc: MonteCarloResult) -> tuple[str, str]:
    per_seed = _write_table(["seed", "avg_regret", "bound"],
                            [[int(s), r, b] for s, r, b in zip(mc.seeds, mc.avg_regret, mc.bound)])
    lo, hi = mc.interval
    agg = _write_table(["quantity", "value"], [
        ("seeds", len(mc.seeds)),
        ("mean_avg_regret", mc.mean),
        ("stderr", mc.stderr),
        ("ci3_low", lo),
        ("ci3_high", hi),
        ("mean_bound", mc.mean_bound),
        ("mean_below_bound", mc.mean <= mc.mean_bound),
    ])
    return per_seed, agg
