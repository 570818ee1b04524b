"""Linearised grid model and assembly of the central controller's problem.

Power vectors stack (P_j, Q_j) per device, so a grid with J devices has a
2J-dimensional power space.  The CC's decision vector holds (P, Q) for
inverter devices and the ON probability for HVAC units; ``DecisionLayout``
maps one to the other.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .devices import Advertisement, SeriesOutOfRange
from .geometry import DimensionMismatch, HalfspaceBand, Intersection, Product
from .oco import QuadraticTracking, WeightedSum


class MissingAdvertisement(ValueError):
    pass


def _series(x, horizon_len: int | None, ndim: int) -> np.ndarray:
    """Broadcast a constant (ndim-dimensional) value to a time series."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim == ndim:
        if horizon_len is None:
            return arr[None]
        return np.broadcast_to(arr, (horizon_len,) + arr.shape)
    if arr.ndim == ndim + 1:
        return arr
    raise DimensionMismatch(f"expected {ndim} or {ndim + 1} dimensions, got {arr.ndim}")


@dataclass(frozen=True, eq=False)
class GridModel:
    """Time-varying linear model v = A_n x + a_n, P0 = w_n . x + b_n.

    Each series may be passed as a constant; constants apply at every step.
    ``voltage_matrix`` maps power space (2 coordinates per device) to J
    node voltages.
    """

    voltage_matrix: np.ndarray
    voltage_offset: np.ndarray
    substation_weights: np.ndarray
    substation_offset: np.ndarray
    tracking_signal: np.ndarray
    device_weights: np.ndarray
    v_min: float = 0.95
    v_max: float = 1.05

    def __post_init__(self):
        if not self.v_min < self.v_max:
            raise ValueError(f"v_min ({self.v_min}) must be below v_max ({self.v_max})")
        A = _series(self.voltage_matrix, None, 2)
        a = _series(self.voltage_offset, None, 1)
        w = _series(self.substation_weights, None, 1)
        b = _series(self.substation_offset, None, 0)
        t = _series(self.tracking_signal, None, 0)
        for name, val in (("voltage_matrix", A), ("voltage_offset", a), ("substation_weights", w),
                          ("substation_offset", b), ("tracking_signal", t)):
            object.__setattr__(self, name, val)
        dw = np.atleast_1d(np.asarray(self.device_weights, dtype=float))
        if np.any(dw < 0):
            raise ValueError("device weights must be >= 0")
        object.__setattr__(self, "device_weights", dw)
        n_nodes, power_dim = A.shape[1:]
        if a.shape[1] != n_nodes:
            raise DimensionMismatch(f"voltage_offset has {a.shape[1]} entries for {n_nodes} voltage rows")
        if w.shape[1] != power_dim:
            raise DimensionMismatch(f"substation_weights has {w.shape[1]} entries, power space is {power_dim}")
        if power_dim != 2 * dw.size:
            raise DimensionMismatch(f"power space {power_dim} does not match {dw.size} devices")

    @property
    def power_dim(self) -> int:
        return self.voltage_matrix.shape[2]

    def horizon_len(self) -> int:
        """Number of steps covered by every non-constant series."""
        lens = [len(s) for s in (self.voltage_matrix, self.voltage_offset, self.substation_weights,
                                 self.substation_offset, self.tracking_signal) if len(s) > 1]
        return min(lens) if lens else np.iinfo(np.int64).max

    @staticmethod
    def _pick(series: np.ndarray, step: int, name: str) -> np.ndarray:
        if len(series) == 1:
            return series[0]
        if not 0 <= step < len(series):
            raise SeriesOutOfRange(f"{name} has {len(series)} entries, step {step} requested")
        return series[step]

    def A(self, step: int) -> np.ndarray:
        return self._pick(self.voltage_matrix, step, "voltage_matrix")

    def a(self, step: int) -> np.ndarray:
        return self._pick(self.voltage_offset, step, "voltage_offset")

    def w(self, step: int) -> np.ndarray:
        return self._pick(self.substation_weights, step, "substation_weights")

    def b(self, step: int) -> float:
        return float(self._pick(self.substation_offset, step, "substation_offset"))

    def target(self, step: int) -> float:
        return float(self._pick(self.tracking_signal, step, "tracking_signal"))


@dataclass(frozen=True, eq=False)
class DecisionLayout:
    slices: tuple
    M: np.ndarray

    @property
    def dim(self) -> int:
        return self.M.shape[1]

    @property
    def power_dim(self) -> int:
        return self.M.shape[0]

    @classmethod
    def from_devices(cls, devices: Sequence) -> "DecisionLayout":
        dims = [d.decision_dim for d in devices]
        cuts = np.cumsum([0] + dims)
        M = np.zeros((2 * len(devices), int(cuts[-1])))
        slices = []
        for j, d in enumerate(devices):
            sl = slice(int(cuts[j]), int(cuts[j + 1]))
            slices.append(sl)
            if d.kind == "hvac":
                M[2 * j, sl.start] = -d.p_max
            else:
                M[2 * j: 2 * j + 2, sl] = np.eye(2)
        return cls(tuple(slices), M)

    def to_power(self, decision) -> np.ndarray:
        return self.M @ np.asarray(decision, dtype=float)


def _power(layout: DecisionLayout, x, is_power: bool) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    expected = layout.power_dim if is_power else layout.dim
    if x.shape != (expected,):
        raise DimensionMismatch(f"expected a vector of length {expected}, got shape {x.shape}")
    return x if is_power else layout.M @ x


def voltages(model: GridModel, layout: DecisionLayout, x, step: int, is_power: bool = False) -> np.ndarray:
    return model.A(step) @ _power(layout, x, is_power) + model.a(step)


def substation_power(model: GridModel, layout: DecisionLayout, x, step: int, is_power: bool = False) -> float:
    return float(model.w(step) @ _power(layout, x, is_power) + model.b(step))


def _check_ads(layout: DecisionLayout, advertisements: Sequence[Advertisement]) -> None:
    if len(advertisements) != len(layout.slices):
        raise MissingAdvertisement(f"{len(advertisements)} advertisements for {len(layout.slices)} devices")
    for j, ad in enumerate(advertisements):
        if ad is None or ad.device_id != j:
            raise MissingAdvertisement(f"no advertisement for device {j}")


def build_objective(model: GridModel, layout: DecisionLayout, advertisements: Sequence[Advertisement], step: int) -> WeightedSum:
    """sum_j w_j C_j(x_j) + 0.5 (w_n . M x + b_n - target_n)**2"""
    _check_ads(layout, advertisements)
    terms = [(float(model.device_weights[j]), ad.cost, layout.slices[j]) for j, ad in enumerate(advertisements)]
    tracking = QuadraticTracking(layout.M.T @ model.w(step), model.b(step), model.target(step))
    terms.append((1.0, tracking, None))
    return WeightedSum(terms, layout.dim)


def build_feasible_set(
    model: GridModel,
    layout: DecisionLayout,
    advertisements: Sequence[Advertisement],
    step: int,
    tol: float = 1e-9,
    max_iter: int = 10_000,
) -> Intersection:
    _check_ads(layout, advertisements)
    product = Product([ad.feasible for ad in advertisements])
    n_nodes = model.A(step).shape[0]
    band = HalfspaceBand(
        model.A(step) @ layout.M,
        model.a(step),
        np.full(n_nodes, model.v_min),
        np.full(n_nodes, model.v_max),
    )
    # the product goes last: the projection then lies exactly in every S_n(j)
    return Intersection([band, product], tol=tol, max_iter=max_iter)
