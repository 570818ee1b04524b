"""Closed-loop episodes of online gradient control.

One step ``n`` of :func:`run_episode`:

1. every LC advertises its current set and cost (valid for ``n + 1``),
2. every LC projects its request ``x_n`` onto that set and implements it;
   HVAC units sample their ON/OFF state, batteries update their charge,
3. the CC measures ``y_n`` with bounded noise,
4. the CC assembles ``F_n`` and ``U_n`` and computes ``x_{n+1}``,
5. the per-step comparator ``z_n = argmin_{U_n} F_n`` is recorded.
"""
from __future__ import annotations

import pickle
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from . import devices as dev
from .geometry import NoConvergence, Product, sample_uniform_ball
from .grid import DecisionLayout, GridModel, build_feasible_set, build_objective, substation_power, voltages
from .oco import (
    BoundConstants,
    RegretAccount,
    accumulate_regret,
    cc_update,
    check_bibs,
    comparator_step,
    finite_horizon_bound,
    gradient_bound,
    lipschitz,
)


class EpisodeError(RuntimeError):
    def __init__(self, step: int, cause: Exception):
        self.step = step
        self.cause = cause
        super().__init__(f"step {step}: {type(cause).__name__}: {cause}")


class InfeasibleStep(EpisodeError):
    pass


@dataclass(frozen=True, eq=False)
class Scenario:
    horizon: int
    step_size: float
    epsilon: float
    devices: tuple
    grid: GridModel
    seed: int = 0
    comparator_tol: float = 1e-6
    projection_tol: float = 1e-9
    projection_max_iter: int = 10_000
    constants_override: Optional[dict] = None

    def __post_init__(self):
        object.__setattr__(self, "devices", tuple(self.devices))
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if not self.step_size > 0:
            raise ValueError("step size must be positive")
        if self.epsilon < 0:
            raise ValueError("epsilon must be >= 0")
        if 2 * len(self.devices) != self.grid.power_dim:
            raise ValueError(f"grid power space {self.grid.power_dim} does not match {len(self.devices)} devices")

    @property
    def layout(self) -> DecisionLayout:
        return DecisionLayout.from_devices(self.devices)


@dataclass(eq=False)
class EpisodeLog:
    """Per-step arrays (leading axis = step) plus run summary."""

    requested: np.ndarray
    implemented: np.ndarray
    measured: np.ndarray
    power: np.ndarray
    f_y: np.ndarray
    comparator: np.ndarray
    f_z: np.ndarray
    regret: np.ndarray
    variability: np.ndarray  # cumulative, including the edge to the next comparator
    voltages: np.ndarray  # at the implemented decision (expected HVAC power)
    voltages_realized: np.ndarray
    substation: np.ndarray
    target: np.ndarray
    hvac_on: np.ndarray  # -1 for non-HVAC devices
    hvac_locked: np.ndarray
    soc: np.ndarray  # nan for non-battery devices
    grad_bound: np.ndarray
    lipschitz: np.ndarray
    diameter: np.ndarray
    norm_bound: np.ndarray
    bibs: np.ndarray
    account: RegretAccount
    constants: BoundConstants
    bound: np.ndarray  # finite-horizon bound after each step
    device_kinds: tuple
    terminal: dict  # constants of the closing step ``horizon``

    @property
    def horizon(self) -> int:
        return len(self.regret)

    @property
    def avg_regret(self) -> np.ndarray:
        return np.cumsum(self.regret) / np.arange(1, self.horizon + 1)

    @property
    def bibs_ok(self) -> bool:
        return bool(np.all(self.bibs))


def measure(implemented, epsilon: float, rng: np.random.Generator) -> np.ndarray:
    y = np.asarray(implemented, dtype=float)
    return y + sample_uniform_ball(y.size, epsilon, rng)


_PROBLEM_CACHE: dict[bytes, tuple] = {}
_CACHE_LIMIT = 4096


def _step_key(scn: Scenario, ads, step: int) -> bytes:
    g = scn.grid
    return pickle.dumps((
        [(ad.feasible, ad.cost) for ad in ads],
        g.A(step), g.a(step), g.w(step), g.b(step), g.target(step), g.v_min, g.v_max, g.device_weights,
        scn.epsilon, scn.comparator_tol, scn.projection_tol, scn.projection_max_iter,
    ))


def _solve_step(scn: Scenario, layout: DecisionLayout, ads, step: int):
    """(F_n, U_n, z_n, bound constants) of one step, memoised.

    Everything here is a deterministic function of the advertisements and
    the grid data of the step, which repeat often (piecewise-constant
    signals, lock states), so results are shared across steps and episodes.
    """
    key = _step_key(scn, ads, step)
    hit = _PROBLEM_CACHE.get(key)
    if hit is None:
        F = build_objective(scn.grid, layout, ads, step)
        U = build_feasible_set(scn.grid, layout, ads, step, scn.projection_tol, scn.projection_max_iter)
        z = comparator_step(F, U, scn.comparator_tol)
        hit = (F, U, z, _set_constants(F, ads, scn.epsilon))
        if len(_PROBLEM_CACHE) >= _CACHE_LIMIT:
            _PROBLEM_CACHE.clear()
        _PROBLEM_CACHE[key] = hit
    F, U, z, consts = hit
    return F, U, z.copy(), consts


def _advertise_all(devices: Sequence, step: int) -> list[dev.Advertisement]:
    ads = [dev.advertise(d, step, j) for j, d in enumerate(devices)]
    for ad in ads:
        if ad.valid_for_step != step + 1:
            raise AssertionError("advertisement produced from the wrong step")
    return ads


def _set_constants(F, ads, eps: float) -> tuple[float, float, float, float]:
    sb = Product([ad.feasible for ad in ads]).bounds()
    return gradient_bound(F, sb.norm_bound + eps), lipschitz(F), sb.diameter, sb.norm_bound


def run_episode(scenario: Scenario) -> EpisodeLog:
    scn = scenario
    T, J = scn.horizon, len(scn.devices)
    layout = scn.layout
    d = layout.dim
    rng = np.random.default_rng(scn.seed)
    devices = list(scn.devices)
    kinds = tuple(x.kind for x in devices)

    rows = {k: [] for k in ("x", "y", "yh", "pw", "fy", "z", "fz", "v", "vr", "p0", "tg",
                            "on", "lk", "soc", "F", "lam", "D", "B", "bibs")}

    ads = _advertise_all(devices, 0)
    try:
        x = _solve_step(scn, layout, ads, 0)[1].project(np.zeros(d))
    except NoConvergence as exc:
        raise InfeasibleStep(0, exc) from exc

    account = RegretAccount()
    z_prev = None
    for n in range(T):
        try:
            ads = _advertise_all(devices, n)
            y = np.empty(d)
            power = np.empty(2 * J)
            on = np.full(J, -1)
            locked = np.zeros(J, dtype=bool)
            soc = np.full(J, np.nan)
            for j, device in enumerate(devices):
                sl = layout.slices[j]
                if device.kind == "hvac":
                    locked[j] = device.locked
                    realized, y_j, devices[j] = dev.hvac_implement(device, x[sl][0], rng)
                    y[sl] = y_j
                    on[j] = realized
                    power[2 * j: 2 * j + 2] = dev.realized_power(device, realized)
                else:
                    y[sl] = ads[j].feasible.project(x[sl])
                    power[2 * j: 2 * j + 2] = dev.realized_power(device, y[sl])
                    if device.kind == "battery":
                        soc[j] = device.soc
                        devices[j] = dev.battery_soc_update(device, y[sl][0])

            y_hat = measure(y, scn.epsilon, rng)
            try:
                F, U, z, (Fb, lam, D, B) = _solve_step(scn, layout, ads, n)
                x_next = cc_update(y_hat, F, U, scn.step_size)
            except NoConvergence as exc:
                raise InfeasibleStep(n, exc) from exc
            f_y, f_z = F.value(y), F.value(z)
            account = accumulate_regret(account, f_y, f_z, z_prev, z)
        except EpisodeError:
            raise
        except Exception as exc:  # attach the step index
            raise EpisodeError(n, exc) from exc

        rows["x"].append(x)
        rows["y"].append(y)
        rows["yh"].append(y_hat)
        rows["pw"].append(power)
        rows["fy"].append(f_y)
        rows["z"].append(z)
        rows["fz"].append(f_z)
        rows["v"].append(voltages(scn.grid, layout, y, n))
        rows["vr"].append(voltages(scn.grid, layout, power, n, is_power=True))
        rows["p0"].append(substation_power(scn.grid, layout, power, n, is_power=True))
        rows["tg"].append(scn.grid.target(n))
        rows["on"].append(on)
        rows["lk"].append(locked)
        rows["soc"].append(soc)
        rows["F"].append(Fb)
        rows["lam"].append(lam)
        rows["D"].append(D)
        rows["B"].append(B)
        rows["bibs"].append(check_bibs(y, B))
        x, z_prev = x_next, z

    # comparator of step T closes the path length of z_1..z_T
    try:
        ads = _advertise_all(devices, T)
        _, _, z_end, extra = _solve_step(scn, layout, ads, T)
    except NoConvergence as exc:
        raise InfeasibleStep(T, exc) from exc
    except Exception as exc:
        raise EpisodeError(T, exc) from exc

    z_all = np.vstack(rows["z"] + [z_end])
    variability = np.cumsum(np.linalg.norm(np.diff(z_all, axis=0), axis=1))

    arr = {k: np.asarray(v) for k, v in rows.items()}
    override = scn.constants_override or {}
    constants = BoundConstants(
        grad_bound=override.get("grad_bound", max(float(arr["F"].max()), extra[0])),
        lipschitz=override.get("lipschitz", max(float(arr["lam"].max()), extra[1])),
        diameter=override.get("diameter", max(float(arr["D"].max()), extra[2])),
        norm_bound=override.get("norm_bound", max(float(arr["B"].max()), extra[3])),
        step_size=scn.step_size,
        meas_error=scn.epsilon,
    )
    bound = finite_horizon_bound(constants, variability, np.arange(1, T + 1))

    return EpisodeLog(
        requested=arr["x"], implemented=arr["y"], measured=arr["yh"], power=arr["pw"],
        f_y=arr["fy"], comparator=arr["z"], f_z=arr["fz"], regret=arr["fy"] - arr["fz"],
        variability=variability, voltages=arr["v"], voltages_realized=arr["vr"],
        substation=arr["p0"], target=arr["tg"], hvac_on=arr["on"], hvac_locked=arr["lk"],
        soc=arr["soc"], grad_bound=arr["F"], lipschitz=arr["lam"], diameter=arr["D"],
        norm_bound=arr["B"], bibs=arr["bibs"], account=account, constants=constants,
        bound=bound, device_kinds=kinds,
        terminal=dict(zip(("grad_bound", "lipschitz", "diameter", "norm_bound"), extra)),
    )


@dataclass
class MonteCarloResult:
    seeds: np.ndarray
    avg_regret: np.ndarray  # final average regret per seed
    bound: np.ndarray  # final bound per seed
    logs: list = field(default_factory=list)

    @property
    def mean(self) -> float:
        return float(np.mean(self.avg_regret))

    @property
    def stderr(self) -> float:
        n = len(self.avg_regret)
        if n < 2 or np.ptp(self.avg_regret) == 0:
            return 0.0
        return float(np.std(self.avg_regret, ddof=1) / np.sqrt(n))

    @property
    def interval(self) -> tuple[float, float]:
        return self.mean - 3 * self.stderr, self.mean + 3 * self.stderr

    @property
    def mean_bound(self) -> float:
        return float(np.mean(self.bound))


def _episode_summary(scenario: Scenario):
    return run_episode(scenario)


def bernoulli_calibration(probabilities, outcomes, bins: int = 10) -> tuple[float, int, float]:
    """Chi-square test that ``outcomes`` are Bernoulli(``probabilities``) draws.

    Draws are grouped by probability into ``bins`` equal-width bins; within a
    bin the count of ones is compared with the sum of the probabilities, with
    variance ``sum p(1 - p)``.  Returns (statistic, degrees of freedom, p-value).
    """
    from scipy.stats import chi2

    p = np.asarray(probabilities, dtype=float)
    o = np.asarray(outcomes, dtype=float)
    idx = np.minimum((p * bins).astype(int), bins - 1)
    stat, dof = 0.0, 0
    for b in range(bins):
        mask = idx == b
        var = float(np.sum(p[mask] * (1 - p[mask])))
        if var <= 0:
            continue
        stat += (float(np.sum(o[mask])) - float(np.sum(p[mask]))) ** 2 / var
        dof += 1
    return stat, dof, float(chi2.sf(stat, dof)) if dof else 1.0


def run_monte_carlo(scenario: Scenario, seeds: Sequence[int], workers: int = 1, keep_logs: bool = False) -> MonteCarloResult:
    """Independent episodes, one per seed.  ``workers > 1`` uses processes."""
    seeds = list(seeds)
    if not seeds:
        raise ValueError("at least one seed is required")
    scns = [replace(scenario, seed=int(s)) for s in seeds]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            logs = list(pool.map(_episode_summary, scns))
    else:
        logs = [_episode_summary(s) for s in scns]
    return MonteCarloResult(
        seeds=np.asarray(seeds),
        avg_regret=np.array([lg.avg_regret[-1] for lg in logs]),
        bound=np.array([lg.bound[-1] for lg in logs]),
        logs=logs if keep_logs else [],
    )
