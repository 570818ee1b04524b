"""Online gradient control: costs, the CC/LC updates, regret and the regret bound.

All cost variants are convex quadratics (or linear), so gradients are affine
and Hessians are constant.  That makes the gradient bound and the Lipschitz
constant of a cost exactly computable, see :func:`hessian` and
:func:`gradient_bound`.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .geometry import FeasibleSet, NoConvergence, _vec


class GradientNotFinite(ArithmeticError):
    pass


class CostFunction:
    """Base class.  ``dim`` is the length of the argument vector."""

    dim: int

    def value(self, x) -> float:
        raise NotImplementedError

    def gradient(self, x) -> np.ndarray:
        raise NotImplementedError

    def hessian(self) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, x) -> float:
        return self.value(x)


@dataclass(frozen=True, eq=False)
class LinearQuadraticPQ(CostFunction):
    """sign * c1 * P + c2 * Q**2 on a (P, Q) pair."""

    c1: float
    c2: float
    sign: int = -1

    def __post_init__(self):
        if self.c2 < 0:
            raise ValueError("c2 must be >= 0")
        if self.sign not in (-1, 1):
            raise ValueError("sign must be +1 or -1")

    dim = 2

    def value(self, x) -> float:
        p, q = _vec(x)
        return float(self.sign * self.c1 * p + self.c2 * q * q)

    def gradient(self, x) -> np.ndarray:
        _, q = _vec(x)
        return np.array([self.sign * self.c1, 2.0 * self.c2 * q])

    def hessian(self) -> np.ndarray:
        return np.diag([0.0, 2.0 * self.c2])


@dataclass(frozen=True, eq=False)
class ExpectedFinite(CostFunction):
    """Expected cost of a finite action set under a probability vector.

    With ``reduced=False`` the argument is the full probability vector and
    the cost is ``values @ p``.  With ``reduced=True`` the probability of the
    first action is implied, so a two-action device is parametrised by the
    scalar ``y`` and costs ``(1 - y) * values[0] + y * values[1]``.
    """

    values: np.ndarray
    reduced: bool = True

    def __post_init__(self):
        v = _vec(self.values)
        if not np.all(np.isfinite(v)):
            raise ValueError("ExpectedFinite values must be finite")
        object.__setattr__(self, "values", v)

    @property
    def dim(self) -> int:
        return self.values.size - 1 if self.reduced else self.values.size

    def gradient(self, x=None) -> np.ndarray:
        if self.reduced:
            return self.values[1:] - self.values[0]
        return self.values.copy()

    def value(self, x) -> float:
        x = _vec(x)
        if self.reduced:
            return float(self.values[0] + self.gradient() @ x)
        return float(self.values @ x)

    def hessian(self) -> np.ndarray:
        return np.zeros((self.dim, self.dim))


@dataclass(frozen=True, eq=False)
class QuadraticTracking(CostFunction):
    """0.5 * (weights @ x + offset - target)**2"""

    weights: np.ndarray
    offset: float
    target: float

    def __post_init__(self):
        object.__setattr__(self, "weights", _vec(self.weights))

    @property
    def dim(self) -> int:
        return self.weights.size

    def residual(self, x) -> float:
        return float(self.weights @ _vec(x) + self.offset - self.target)

    def value(self, x) -> float:
        return 0.5 * self.residual(x) ** 2

    def gradient(self, x) -> np.ndarray:
        return self.residual(x) * self.weights

    def hessian(self) -> np.ndarray:
        return np.outer(self.weights, self.weights)


@dataclass(frozen=True, eq=False)
class WeightedSum(CostFunction):
    """sum_k weight_k * cost_k(x[slice_k]).

    A term whose slice is ``None`` acts on the whole vector.  Explicit
    slices must be disjoint.
    """

    terms: tuple
    size: int

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        covered = np.zeros(self.size, dtype=int)
        for w, cost, sl in self.terms:
            if w < 0:
                raise ValueError("term weights must be >= 0")
            idx = np.arange(self.size) if sl is None else np.arange(self.size)[sl]
            if idx.size != cost.dim:
                raise ValueError(f"slice of length {idx.size} for a cost of dimension {cost.dim}")
            if sl is not None:
                covered[idx] += 1
        if np.any(covered > 1):
            raise ValueError("term slices overlap")

    @property
    def dim(self) -> int:
        return self.size

    def _check(self, x) -> np.ndarray:
        x = _vec(x)
        if x.shape != (self.size,):
            from .geometry import DimensionMismatch

            raise DimensionMismatch(f"expected a vector of length {self.size}, got shape {x.shape}")
        return x

    def value(self, x) -> float:
        x = self._check(x)
        total = 0.0
        for w, cost, sl in self.terms:
            total += w * cost.value(x if sl is None else x[sl])
        return float(total)

    def gradient(self, x) -> np.ndarray:
        x = self._check(x)
        g = np.zeros(self.size)
        for w, cost, sl in self.terms:
            if sl is None:
                g += w * cost.gradient(x)
            else:
                g[sl] += w * cost.gradient(x[sl])
        return g

    def hessian(self) -> np.ndarray:
        H = np.zeros((self.size, self.size))
        for w, cost, sl in self.terms:
            if sl is None:
                H += w * cost.hessian()
            else:
                H[sl, sl] += w * cost.hessian()
        return H


def gradient(cost: CostFunction, point) -> np.ndarray:
    return cost.gradient(point)


def lipschitz(cost: CostFunction) -> float:
    """Exact Lipschitz constant of the (affine) gradient."""
    H = cost.hessian()
    if H.size == 0:
        return 0.0
    return float(np.max(np.abs(np.linalg.eigvalsh(H))))


def gradient_bound(cost: CostFunction, radius: float) -> float:
    """Upper bound on ||grad cost(x)|| over the ball ||x|| <= radius."""
    g0 = cost.gradient(np.zeros(cost.dim))
    return float(np.linalg.norm(g0) + lipschitz(cost) * radius)


# ---------------------------------------------------------------- updates


def cc_update(measured, objective: CostFunction, feasible: FeasibleSet, step_size: float) -> np.ndarray:
    """Central-controller step: project ``measured - step_size * grad F(measured)``."""
    if not step_size > 0:
        raise ValueError("step_size must be positive")
    y = _vec(measured)
    g = objective.gradient(y)
    if not np.all(np.isfinite(g)):
        raise GradientNotFinite(f"gradient has non-finite entries at {y}")
    return feasible.project(y - step_size * g)


def lc_implement(requested, local_set: FeasibleSet) -> np.ndarray:
    return local_set.project(requested)


def comparator_step(
    objective: CostFunction,
    feasible: FeasibleSet,
    tol: float = 1e-6,
    max_iter: int = 100_000,
) -> np.ndarray:
    """Minimise ``objective`` over ``feasible`` by projected gradient descent.

    Starts from the projection of the origin and backtracks on the step
    length.  Stops when the gradient mapping ``(x - P(x - t g)) / t`` has
    norm at most ``tol``.
    """
    x = feasible.project(np.zeros(objective.dim))
    fx = objective.value(x)
    L = lipschitz(objective)
    t = 1.0 / L if L > 0 else 1.0
    for _ in range(max_iter):
        g = objective.gradient(x)
        while True:
            x_new = feasible.project(x - t * g)
            d = x_new - x
            f_new = objective.value(x_new)
            if f_new <= fx + g @ d + (d @ d) / (2 * t) + 1e-15 * max(1.0, abs(fx)) or t < 1e-14:
                break
            t *= 0.5
        if np.linalg.norm(d) / t <= tol:
            return x_new
        x, fx = x_new, f_new
        if L == 0:
            # linear objective: grow the step so boundary minimisers are reached
            t *= 2.0
    raise NoConvergence(max_iter, x, np.array([np.linalg.norm(d) / t]))


# ---------------------------------------------------------------- regret


@dataclass(frozen=True)
class RegretAccount:
    cumulative_regret: float = 0.0
    cumulative_variability: float = 0.0
    step_count: int = 0
    per_step_rows: tuple = ()


def accumulate_regret(account: RegretAccount, f_at_y: float, f_at_z: float, z_prev, z_now) -> RegretAccount:
    step_var = 0.0 if z_prev is None else float(np.linalg.norm(_vec(z_now) - _vec(z_prev)))
    return RegretAccount(
        cumulative_regret=account.cumulative_regret + (f_at_y - f_at_z),
        cumulative_variability=account.cumulative_variability + step_var,
        step_count=account.step_count + 1,
        per_step_rows=account.per_step_rows + ((f_at_y, f_at_z),),
    )


@dataclass(frozen=True)
class BoundConstants:
    """Constants of the regret bound.  ``k1``..``k3`` are derived."""

    grad_bound: float
    lipschitz: float
    diameter: float
    norm_bound: float
    step_size: float
    meas_error: float
    k1: float = field(init=False)
    k2: float = field(init=False)
    k3: float = field(init=False)

    def __post_init__(self):
        vals = (self.grad_bound, self.lipschitz, self.diameter, self.norm_bound, self.meas_error)
        if not all(np.isfinite(v) and v >= 0 for v in vals):
            raise ValueError(f"bound constants must be finite and >= 0: {vals}")
        if not self.step_size > 0:
            raise ValueError("step size must be positive")
        F, lam, D, a, eps = self.grad_bound, self.lipschitz, self.diameter, self.step_size, self.meas_error
        object.__setattr__(self, "k1", F**2 / 2)
        object.__setattr__(self, "k2", (2 * (D + a * F) + (1 + a * lam) * eps) / 2)
        object.__setattr__(self, "k3", D + self.norm_bound)


def evaluate_bound(constants: BoundConstants, avg_variability: float) -> float:
    """Asymptotic bound on the average dynamic regret."""
    c = constants
    a, lam, eps = c.step_size, c.lipschitz, c.meas_error
    return c.k1 * a + c.k2 * (1 + a * lam) * eps / a + c.k3 * avg_variability / a


def finite_horizon_bound(constants: BoundConstants, variability: float, n: int) -> float:
    """The bound after ``n`` steps, including the D**2 / (2 alpha n) transient.

    ``variability`` is the comparator path length including the edge to the
    comparator of step ``n + 1``.
    """
    c = constants
    return evaluate_bound(c, variability / n) + c.diameter**2 / (2 * c.step_size * n)


def check_bibs(implemented, norm_bound: float) -> bool:
    return bool(np.linalg.norm(_vec(implemented)) <= norm_bound + 1e-9)
