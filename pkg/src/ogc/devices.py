"""Local controllers: PV and battery inverters (convex) and an ON/OFF HVAC unit.

Devices are immutable; state changes return a new device.  Power sign
convention: positive is production, negative is consumption.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from .geometry import FeasibleSet, Interval, InverterDisk
from .oco import CostFunction, ExpectedFinite, LinearQuadraticPQ


class SeriesOutOfRange(IndexError):
    pass


class InfeasibleLimits(ValueError):
    pass


def _at(series: np.ndarray, step: int, name: str) -> float:
    """Entry ``step`` of a per-step series; a length-1 series is a constant."""
    if len(series) == 1 and step >= 0:
        return float(series[0])
    if not 0 <= step < len(series):
        raise SeriesOutOfRange(f"{name} has {len(series)} entries, step {step} requested")
    return float(series[step])


@dataclass(frozen=True)
class Advertisement:
    feasible: FeasibleSet
    cost: CostFunction
    device_id: int
    valid_for_step: int


@dataclass(frozen=True, eq=False)
class PvDevice:
    s_rated: float
    available_power: np.ndarray
    c1: float = 1.0
    c2: float = 1.0

    kind = "pv"
    decision_dim = 2

    def __post_init__(self):
        object.__setattr__(self, "available_power", np.atleast_1d(np.asarray(self.available_power, dtype=float)))
        if not self.s_rated > 0:
            raise ValueError("s_rated must be positive")
        if np.any(self.available_power < 0):
            raise ValueError("available power must be >= 0")
        if self.c1 < 0 or self.c2 < 0:
            raise ValueError("cost coefficients must be >= 0")


def pv_advertise(device: PvDevice, step: int, device_id: int = 0) -> Advertisement:
    p_av = _at(device.available_power, step, "available_power")
    return Advertisement(
        feasible=InverterDisk(min(p_av, device.s_rated), device.s_rated),
        cost=LinearQuadraticPQ(device.c1, device.c2, sign=-1),
        device_id=device_id,
        valid_for_step=step + 1,
    )


@dataclass(frozen=True, eq=False)
class BatteryDevice:
    """Battery inverter with state-of-charge dependent power limits.

    Unless ``p_min_fn``/``p_max_fn`` are given, the limits are the constants
    ``p_min``/``p_max`` (default -s_rated / s_rated), linearly tapered to zero
    over the last ``taper`` fraction of the charge range.
    """

    s_rated: float
    soc: float
    soc_target: float = 0.5
    capacity_energy: float = 1.0
    step_duration: float = 1.0
    c1: float = 1.0
    c2: float = 1.0
    p_min: Optional[float] = None
    p_max: Optional[float] = None
    taper: float = 0.05
    p_min_fn: Optional[Callable[[float], float]] = None
    p_max_fn: Optional[Callable[[float], float]] = None

    kind = "battery"
    decision_dim = 2

    def __post_init__(self):
        if not self.s_rated > 0:
            raise ValueError("s_rated must be positive")
        if not (0.0 <= self.soc <= 1.0 and 0.0 <= self.soc_target <= 1.0):
            raise ValueError("soc and soc_target must lie in [0, 1]")
        if not (self.capacity_energy > 0 and self.step_duration > 0):
            raise ValueError("capacity_energy and step_duration must be positive")
        if self.c1 < 0 or self.c2 < 0:
            raise ValueError("cost coefficients must be >= 0")
        if not 0.0 <= self.taper <= 1.0:
            raise ValueError("taper must lie in [0, 1]")

    def limits(self) -> tuple[float, float]:
        soc = self.soc
        if self.p_min_fn is not None:
            lo = float(self.p_min_fn(soc))
        else:
            lo = -self.s_rated if self.p_min is None else self.p_min
            if self.taper > 0:
                lo *= min(1.0, (1.0 - soc) / self.taper)
        if self.p_max_fn is not None:
            hi = float(self.p_max_fn(soc))
        else:
            hi = self.s_rated if self.p_max is None else self.p_max
            if self.taper > 0:
                hi *= min(1.0, soc / self.taper)
        return lo, hi


def battery_advertise(device: BatteryDevice, step: int, device_id: int = 0) -> Advertisement:
    lo, hi = device.limits()
    if lo > hi or lo > device.s_rated or hi < -device.s_rated:
        raise InfeasibleLimits(f"power limits [{lo}, {hi}] at soc={device.soc} are infeasible")
    if device.soc > device.soc_target:
        cost = LinearQuadraticPQ(device.c1, device.c2, sign=-1)
    elif device.soc < device.soc_target:
        cost = LinearQuadraticPQ(device.c1, device.c2, sign=+1)
    else:
        cost = LinearQuadraticPQ(0.0, device.c2, sign=-1)
    return Advertisement(InverterDisk(hi, device.s_rated, p_min=lo), cost, device_id, step + 1)


def battery_soc_update(device: BatteryDevice, implemented_p: float) -> BatteryDevice:
    soc = device.soc - implemented_p * device.step_duration / device.capacity_energy
    return replace(device, soc=min(max(soc, 0.0), 1.0))


@dataclass(frozen=True, eq=False)
class HvacDevice:
    """ON/OFF unit consuming ``p_max`` when ON.

    Switching state locks the unit for ``min_on_steps`` (after turning on) or
    ``min_off_steps`` (after turning off) subsequent steps.  The decision
    variable is the probability of being ON.
    """

    p_max: float
    cost_on: np.ndarray
    cost_off: np.ndarray
    min_on_steps: int = 0
    min_off_steps: int = 0
    locked: bool = False
    last_on: bool = False
    dwell_counter: int = 0

    kind = "hvac"
    decision_dim = 1

    def __post_init__(self):
        object.__setattr__(self, "cost_on", np.atleast_1d(np.asarray(self.cost_on, dtype=float)))
        object.__setattr__(self, "cost_off", np.atleast_1d(np.asarray(self.cost_off, dtype=float)))
        if not self.p_max > 0:
            raise ValueError("p_max must be positive")
        if self.min_on_steps < 0 or self.min_off_steps < 0 or self.dwell_counter < 0:
            raise ValueError("dwell parameters must be >= 0")
        if self.locked != (self.dwell_counter > 0):
            raise ValueError("locked must equal dwell_counter > 0")

    def feasible(self) -> Interval:
        if not self.locked:
            return Interval(0.0, 1.0)
        return Interval(1.0, 1.0) if self.last_on else Interval(0.0, 0.0)


def hvac_advertise(device: HvacDevice, step: int, device_id: int = 0) -> Advertisement:
    c_on = _at(device.cost_on, step, "cost_on")
    c_off = _at(device.cost_off, step, "cost_off")
    return Advertisement(device.feasible(), ExpectedFinite(np.array([c_off, c_on])), device_id, step + 1)


def hvac_implement(device: HvacDevice, requested_y: float, rng: np.random.Generator):
    """Project the requested ON probability and sample the realised state.

    Returns ``(realized_on, simplex_point, next_device)``.  A uniform number
    is drawn every step, locked or not, so the random stream does not depend
    on the lock history.
    """
    y = float(device.feasible().project(requested_y)[0])
    u = rng.random()
    on = device.last_on if device.locked else bool(u < y)
    if device.locked:
        counter = device.dwell_counter - 1
    elif on != device.last_on:
        counter = device.min_on_steps if on else device.min_off_steps
    else:
        counter = 0
    nxt = replace(device, last_on=on, dwell_counter=counter, locked=counter > 0)
    return on, y, nxt


def realized_power(device, control) -> np.ndarray:
    """Physical (P, Q) of a device given its realised control."""
    if device.kind == "hvac":
        return np.array([-device.p_max, 0.0]) if bool(control) else np.zeros(2)
    return np.asarray(control, dtype=float).copy()


def advertise(device, step: int, device_id: int = 0) -> Advertisement:
    if device.kind == "pv":
        return pv_advertise(device, step, device_id)
    if device.kind == "battery":
        return battery_advertise(device, step, device_id)
    if device.kind == "hvac":
        return hvac_advertise(device, step, device_id)
    raise TypeError(f"unknown device kind {device.kind!r}")
