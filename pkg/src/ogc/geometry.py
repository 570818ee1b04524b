"""Feasible sets and Euclidean projections.

Every set exposes ``dim``, ``project(x)``, ``contains(x, tol)`` and
``bounds()``.  Convex sets project exactly in closed form, except
:class:`HalfspaceBand` (several rows) and :class:`Intersection`, which go
through :func:`project_intersection` (exact multiplier solves where they
apply, Dykstra's algorithm otherwise).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

# Points this close to a curved boundary are treated as members, so that
# projecting a projected point returns it bit-for-bit.
_ROUND = 1e-13


class GeometryError(ValueError):
    pass


class DimensionMismatch(GeometryError):
    pass


class EmptySet(GeometryError):
    pass


class UnboundedSet(GeometryError):
    pass


class NoConvergence(RuntimeError):
    """Dykstra ran out of iterations; usually an empty intersection."""

    def __init__(self, max_iter: int, last_iterate: np.ndarray, violations: np.ndarray):
        self.max_iter = max_iter
        self.last_iterate = last_iterate
        self.violations = violations
        super().__init__(
            f"no convergence after {max_iter} iterations; "
            f"max member violation {float(np.max(violations, initial=0.0)):.3e}"
        )


@dataclass(frozen=True)
class SetBounds:
    norm_bound: float
    diameter: float


def _vec(x) -> np.ndarray:
    return np.atleast_1d(np.asarray(x, dtype=float))


def _check_dim(s, x: np.ndarray) -> None:
    if x.ndim != 1 or x.shape[0] != s.dim:
        raise DimensionMismatch(f"{type(s).__name__} has dimension {s.dim}, got point of shape {x.shape}")


class FeasibleSet:
    """Base class; subclasses are frozen dataclasses."""

    dim: int
    convex = True
    bounded = True

    def project(self, x) -> np.ndarray:
        raise NotImplementedError

    def contains(self, x, tol: float = 1e-9) -> bool:
        raise NotImplementedError

    def bounds(self) -> SetBounds:
        raise NotImplementedError

    def violation(self, x) -> float:
        x = _vec(x)
        return float(np.linalg.norm(x - self.project(x)))


@dataclass(frozen=True, eq=False)
class Box(FeasibleSet):
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo, up = _vec(self.lower), _vec(self.upper)
        if lo.shape != up.shape:
            raise DimensionMismatch("box bounds differ in shape")
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(up))):
            raise UnboundedSet("box bounds must be finite")
        if np.any(lo > up):
            raise EmptySet("box lower bound exceeds upper bound")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", up)

    @property
    def dim(self) -> int:
        return self.lower.shape[0]

    def project(self, x) -> np.ndarray:
        x = _vec(x)
        _check_dim(self, x)
        return np.minimum(np.maximum(x, self.lower), self.upper)

    def contains(self, x, tol=1e-9) -> bool:
        x = _vec(x)
        return bool(np.all(x >= self.lower - tol) and np.all(x <= self.upper + tol))

    def bounds(self) -> SetBounds:
        corner = np.maximum(np.abs(self.lower), np.abs(self.upper))
        return SetBounds(float(np.linalg.norm(corner)), float(np.linalg.norm(self.upper - self.lower)))


@dataclass(frozen=True, eq=False)
class Interval(FeasibleSet):
    """One-dimensional box; ``Interval(1, 1)`` is the singleton {1}."""

    lower: float
    upper: float

    def __post_init__(self):
        if not (np.isfinite(self.lower) and np.isfinite(self.upper)):
            raise UnboundedSet("interval bounds must be finite")
        if self.lower > self.upper:
            raise EmptySet(f"interval [{self.lower}, {self.upper}] is empty")

    dim = 1

    def project(self, x) -> np.ndarray:
        x = _vec(x)
        _check_dim(self, x)
        return np.minimum(np.maximum(x, self.lower), self.upper)

    def contains(self, x, tol=1e-9) -> bool:
        x = _vec(x)
        return bool(self.lower - tol <= x[0] <= self.upper + tol)

    def bounds(self) -> SetBounds:
        return SetBounds(max(abs(self.lower), abs(self.upper)), self.upper - self.lower)


@dataclass(frozen=True, eq=False)
class Ball(FeasibleSet):
    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", _vec(self.center))
        if not np.isfinite(self.radius):
            raise GeometryError(f"ball radius must be finite, got {self.radius}")
        if self.radius < 0:
            raise EmptySet(f"ball radius {self.radius} < 0 describes the empty set")

    @property
    def dim(self) -> int:
        return self.center.shape[0]

    def project(self, x) -> np.ndarray:
        x = _vec(x)
        _check_dim(self, x)
        d = x - self.center
        r = np.linalg.norm(d)
        if r <= self.radius * (1 + _ROUND):
            return x
        return self.center + d * (self.radius / r)

    def contains(self, x, tol=1e-9) -> bool:
        return bool(np.linalg.norm(_vec(x) - self.center) <= self.radius + tol)

    def bounds(self) -> SetBounds:
        return SetBounds(float(np.linalg.norm(self.center)) + self.radius, 2.0 * self.radius)


def project_simplex(v: np.ndarray) -> np.ndarray:
    """Sort-based projection onto {x >= 0, sum(x) = 1}."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    k = np.arange(1, v.size + 1)
    rho = np.nonzero(u - css / k > 0)[0][-1]
    theta = css[rho] / (rho + 1.0)
    return np.maximum(v - theta, 0.0)


@dataclass(frozen=True, eq=False)
class Simplex(FeasibleSet):
    dimension: int

    def __post_init__(self):
        if int(self.dimension) < 1:
            raise GeometryError("simplex dimension must be positive")

    @property
    def dim(self) -> int:
        return int(self.dimension)

    def project(self, x) -> np.ndarray:
        x = _vec(x)
        _check_dim(self, x)
        return project_simplex(x)

    def contains(self, x, tol=1e-9) -> bool:
        x = _vec(x)
        return bool(np.all(x >= -tol) and abs(x.sum() - 1.0) <= tol)

    def bounds(self) -> SetBounds:
        return SetBounds(1.0, np.sqrt(2.0) if self.dim > 1 else 0.0)


@dataclass(frozen=True, eq=False)
class InverterDisk(FeasibleSet):
    """{(P, Q) : p_min <= P <= p_available, P^2 + Q^2 <= s_rated^2}.

    PV inverters use the default ``p_min = 0``; batteries pass a negative
    lower limit.
    """

    p_available: float
    s_rated: float
    p_min: float = 0.0

    def __post_init__(self):
        if not self.s_rated > 0:
            raise GeometryError(f"s_rated must be positive, got {self.s_rated}")
        if self.p_min > self.p_available:
            raise EmptySet(f"power interval [{self.p_min}, {self.p_available}] is empty")
        if self.p_lo > self.p_hi:
            raise EmptySet(
                f"power interval [{self.p_min}, {self.p_available}] misses [-{self.s_rated}, {self.s_rated}]"
            )

    dim = 2

    @property
    def p_lo(self) -> float:
        return max(self.p_min, -self.s_rated)

    @property
    def p_hi(self) -> float:
        return min(self.p_available, self.s_rated)

    def _q_max(self, p: float) -> float:
        return math.sqrt(max(self.s_rated**2 - p * p, 0.0))

    def project(self, x) -> np.ndarray:
        x = _vec(x)
        _check_dim(self, x)
        s, lo, hi = self.s_rated, self.p_lo, self.p_hi
        p, q = x.tolist()
        r = math.hypot(p, q)
        in_disk = r <= s * (1 + _ROUND)
        if lo <= p <= hi and in_disk:
            return x
        # projection onto the strip alone
        pc = min(max(p, lo), hi)
        if math.hypot(pc, q) <= s * (1 + _ROUND):
            return np.array([pc, q])
        # projection onto the disk alone
        if not in_disk:
            pr, qr = p * s / r, q * s / r
            if lo <= pr <= hi:
                return np.array([pr, qr])
        # both constraints active: nearest corner
        best, best_d = None, math.inf
        for pe in (lo, hi):
            qe = self._q_max(pe)
            for cand in ((pe, qe), (pe, -qe)):
                d = (cand[0] - p) ** 2 + (cand[1] - q) ** 2
                if d < best_d:
                    best, best_d = cand, d
        return np.array(best, dtype=float)

    def contains(self, x, tol=1e-9) -> bool:
        p, q = _vec(x)
        return bool(self.p_lo - tol <= p <= self.p_hi + tol and np.hypot(p, q) <= self.s_rated + tol)

    def bounds(self) -> SetBounds:
        s, lo, hi = self.s_rated, self.p_lo, self.p_hi
        # every extreme point lies on the rated circle; the longest chord is
        # the vertical one through the power closest to zero
        p_star = min(max(0.0, lo), hi)
        return SetBounds(s, 2.0 * self._q_max(p_star) if p_star != 0.0 else 2.0 * s)


@dataclass(frozen=True, eq=False)
class Halfspace(FeasibleSet):
    """{x : normal . x <= offset}.  Unbounded; only useful inside an Intersection."""

    normal: np.ndarray
    offset: float

    bounded = False

    def __post_init__(self):
        a = _vec(self.normal)
        if not np.any(a):
            raise GeometryError("halfspace normal must be nonzero")
        object.__setattr__(self, "normal", a)
        object.__setattr__(self, "_nn", float(a @ a))
        object.__setattr__(self, "norm", math.sqrt(self._nn))

    @property
    def dim(self) -> int:
        return self.normal.shape[0]

    def project(self, x) -> np.ndarray:
        x = _vec(x)
        _check_dim(self, x)
        excess = self.normal @ x - self.offset
        if excess <= 0:
            return x
        return x - (excess / self._nn) * self.normal

    def contains(self, x, tol=1e-9) -> bool:
        return bool(self.normal @ _vec(x) - self.offset <= tol * self.norm)

    def bounds(self) -> SetBounds:
        raise UnboundedSet("a halfspace is unbounded")


@dataclass(frozen=True, eq=False)
class HalfspaceBand(FeasibleSet):
    """{x : lower <= matrix @ x + offset <= upper}; infinite bounds drop a side."""

    matrix: np.ndarray
    offset: np.ndarray
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.matrix, dtype=float))
        m = A.shape[0]
        a, lo, up = (np.broadcast_to(_vec(v), (m,)).copy() for v in (self.offset, self.lower, self.upper))
        if np.any(lo > up):
            raise EmptySet("band lower bound exceeds upper bound")
        object.__setattr__(self, "matrix", A)
        object.__setattr__(self, "offset", a)
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", up)

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]

    @property
    def bounded(self) -> bool:
        return np.linalg.matrix_rank(self.matrix) == self.dim and bool(
            np.all(np.isfinite(self.lower)) and np.all(np.isfinite(self.upper))
        )

    def halfspaces(self) -> list[Halfspace]:
        cached = self.__dict__.get("_halfspaces")
        if cached is not None:
            return cached
        out = []
        for row, a, lo, up in zip(self.matrix, self.offset, self.lower, self.upper):
            if not np.any(row):
                if not lo <= a <= up:
                    raise EmptySet("zero row with offset outside the band")
                continue
            if np.isfinite(up):
                out.append(Halfspace(row, up - a))
            if np.isfinite(lo):
                out.append(Halfspace(-row, a - lo))
        object.__setattr__(self, "_halfspaces", out)
        return out

    def project(self, x) -> np.ndarray:
        x = _vec(x)
        _check_dim(self, x)
        hs = self.halfspaces()
        if len(hs) == 0:
            return x
        if self.matrix.shape[0] == 1:
            # two parallel halfspaces: the sequential projection is exact
            for h in hs:
                x = h.project(x)
            return x
        poly = self.__dict__.get("_poly")
        if poly is None:
            poly = _polyhedron(hs)
            object.__setattr__(self, "_poly", poly)
        return _dykstra(hs, x, 1e-9, 10_000, poly)

    def contains(self, x, tol=1e-9) -> bool:
        v = self.matrix @ _vec(x) + self.offset
        scale = np.linalg.norm(self.matrix, axis=1)
        return bool(np.all(v >= self.lower - tol * scale) and np.all(v <= self.upper + tol * scale))

    def bounds(self) -> SetBounds:
        if not self.bounded:
            raise UnboundedSet("halfspace band is unbounded")
        # bounded band: a parallelotope; enumerate its vertices
        return _vertex_bounds(self)

    def violation(self, x) -> float:
        return float(np.linalg.norm(_vec(x) - self.project(x)))


def _vertex_bounds(band: HalfspaceBand) -> SetBounds:
    A, a, lo, up = band.matrix, band.offset, band.lower, band.upper
    if A.shape[0] != A.shape[1]:
        raise UnboundedSet("vertex enumeration only supported for square bands")
    from itertools import product as iproduct

    Ainv = np.linalg.inv(A)
    verts = np.array([Ainv @ (np.array(c) - a) for c in iproduct(*zip(lo, up))])
    return _points_bounds(verts)


def _points_bounds(pts: np.ndarray) -> SetBounds:
    B = float(np.max(np.linalg.norm(pts, axis=1)))
    diff = pts[:, None, :] - pts[None, :, :]
    D = float(np.max(np.linalg.norm(diff, axis=2)))
    return SetBounds(B, D)


@dataclass(frozen=True, eq=False)
class FinitePoints(FeasibleSet):
    points: np.ndarray

    convex = False

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.shape[0] == 0:
            raise EmptySet("no points")
        object.__setattr__(self, "points", pts)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def project(self, x) -> np.ndarray:
        x = _vec(x)
        _check_dim(self, x)
        d = np.sum((self.points - x) ** 2, axis=1)
        return self.points[int(np.argmin(d))].copy()  # argmin keeps the lowest index on ties

    def contains(self, x, tol=1e-9) -> bool:
        return bool(np.min(np.linalg.norm(self.points - _vec(x), axis=1)) <= tol)

    def bounds(self) -> SetBounds:
        return _points_bounds(self.points)


@dataclass(frozen=True, eq=False)
class Product(FeasibleSet):
    factors: tuple

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        dims = [f.dim for f in self.factors]
        object.__setattr__(self, "_cuts", np.cumsum([0] + dims))

    @property
    def dim(self) -> int:
        return int(self._cuts[-1])

    @property
    def convex(self) -> bool:
        return all(f.convex for f in self.factors)

    @property
    def bounded(self) -> bool:
        return all(f.bounded for f in self.factors)

    def slices(self) -> list[slice]:
        c = self._cuts
        return [slice(int(c[i]), int(c[i + 1])) for i in range(len(self.factors))]

    def project(self, x) -> np.ndarray:
        x = _vec(x)
        _check_dim(self, x)
        return np.concatenate([f.project(x[s]) for f, s in zip(self.factors, self.slices())])

    def contains(self, x, tol=1e-9) -> bool:
        x = _vec(x)
        return all(f.contains(x[s], tol) for f, s in zip(self.factors, self.slices()))

    def bounds(self) -> SetBounds:
        bs = [f.bounds() for f in self.factors]
        return SetBounds(
            float(np.sqrt(sum(b.norm_bound**2 for b in bs))),
            float(np.sqrt(sum(b.diameter**2 for b in bs))),
        )


@dataclass(frozen=True, eq=False)
class Intersection(FeasibleSet):
    members: tuple
    tol: float = 1e-9
    max_iter: int = 10_000

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(self.members))
        if not self.members:
            raise GeometryError("intersection needs at least one member")
        dims = {m.dim for m in self.members}
        if len(dims) != 1:
            raise DimensionMismatch(f"intersection members have dimensions {sorted(dims)}")
        if not all(m.convex for m in self.members):
            raise GeometryError("intersection members must be convex")
        if not any(m.bounded for m in self.members):
            raise UnboundedSet("intersection needs at least one bounded member")
        object.__setattr__(self, "_flat", _flatten(self.members))
        object.__setattr__(self, "_poly", _polyhedron(self._flat))

    @property
    def dim(self) -> int:
        return self.members[0].dim

    def project(self, x) -> np.ndarray:
        return _dykstra(self._flat, _vec(x), self.tol, self.max_iter, self._poly)

    def contains(self, x, tol=1e-9) -> bool:
        return all(m.contains(x, tol) for m in self.members)

    def bounds(self) -> SetBounds:
        bs = [m.bounds() for m in self.members if m.bounded]
        return SetBounds(min(b.norm_bound for b in bs), min(b.diameter for b in bs))


def _flatten(members: Sequence[FeasibleSet]) -> list[FeasibleSet]:
    out: list[FeasibleSet] = []
    for m in members:
        if isinstance(m, Intersection):
            out.extend(_flatten(m.members))
        elif isinstance(m, HalfspaceBand):
            out.extend(m.halfspaces())
        else:
            out.append(m)
    return out


def _polyhedron(sets: Sequence[FeasibleSet]):
    """Rows (G, g) with sets == {x : G x <= g}, or None if a set is curved."""
    rows, rhs = [], []
    for m in sets:
        if isinstance(m, Halfspace):
            rows.append(m.normal)
            rhs.append(m.offset)
        elif isinstance(m, (Box, Interval)):
            lo = np.broadcast_to(np.atleast_1d(np.asarray(m.lower, dtype=float)), (m.dim,))
            up = np.broadcast_to(np.atleast_1d(np.asarray(m.upper, dtype=float)), (m.dim,))
            eye = np.eye(m.dim)
            rows.extend(eye)
            rhs.extend(up)
            rows.extend(-eye)
            rhs.extend(-lo)
        else:
            return None
    G = np.array(rows)
    return G, np.array(rhs), np.linalg.norm(G, axis=1)


def _kkt_projection(poly, x: np.ndarray, active: np.ndarray):
    """Exact projection of ``x`` onto the polyhedron, given its active rows.

    Returns None unless the KKT conditions hold: the candidate is feasible
    (to 1e-12), it is tight on every active row, and every multiplier is
    >= 0.
    """
    G, g, norms = poly
    A, b = G[active], g[active]
    M, r = A @ A.T, A @ x - b
    try:
        lam = np.linalg.solve(M, r)
    except np.linalg.LinAlgError:
        lam = np.linalg.lstsq(M, r, rcond=None)[0]
    w = x - A.T @ lam
    slack = G @ w - g
    tight = np.abs(slack[active]) <= 1e-12 * (1 + np.abs(b))
    if np.all(lam >= -1e-12) and np.all(tight) and np.all(slack <= 1e-12 * norms):
        return w
    return None


def _single_row_projection(sets: list, x: np.ndarray):
    """Exact projection onto C & {halfspaces} when C's projection violates one row.

    With ``C`` the only member that is not a halfspace and ``a . z <= c`` the
    one row violated by ``P_C(x)``, the projection is ``z = P_C(x - mu a)``
    with ``mu >= 0`` the root of ``a . P_C(x - mu a) = c``.  The left side is
    non-increasing in ``mu`` (monotonicity of ``P_C``), so the root is
    bracketed and found by Brent's method.  The candidate is returned only if
    it satisfies every other row, which completes the KKT conditions.
    Returns None when the shortcut does not apply.
    """
    curved = [m for m in sets if not isinstance(m, Halfspace)]
    if len(curved) != 1:
        return None
    C = curved[0]
    rows = [m for m in sets if m is not C]
    y = C.project(x)
    tol = 1e-12 * (1 + np.abs(y).max())
    bad = [h for h in rows if h.normal @ y - h.offset > tol * h.norm]
    if not bad:
        return y
    if len(bad) != 1:
        return None
    a, c = bad[0].normal, bad[0].offset

    seen = {}

    def excess(mu):
        seen[mu] = z = C.project(x - mu * a)
        return float(a @ z) - c

    # bracket the root, stepping past the secant estimate each time
    lo, f_lo = 0.0, float(a @ y) - c
    hi = f_lo / float(a @ a)
    for _ in range(100):
        f_hi = excess(hi)
        if f_hi <= 0:
            break
        step = 1.5 * f_hi * (hi - lo) / (f_lo - f_hi) if f_lo > f_hi else hi
        lo, f_lo, hi = hi, f_hi, hi + min(max(step, 0.5 * (hi - lo)), 1e3 * (hi - lo))
    else:
        return None  # no crossing: the row misses C
    mu = hi if f_hi == 0 else brentq(excess, lo, hi, xtol=1e-15 / bad[0].norm)
    z = seen[mu] if mu in seen else C.project(x - mu * a)
    tol = 1e-12 * (1 + np.abs(z).max())
    if all(float(h.normal @ z) - h.offset <= tol * h.norm for h in rows):
        return z
    return None


def project_intersection(members: Sequence[FeasibleSet], point, tol: float = 1e-9, max_iter: int = 10_000) -> np.ndarray:
    """Dykstra's algorithm for the projection onto ``members[0] & members[1] & ...``.

    Stops once a full sweep changes the iterate and the correction terms by
    less than ``tol`` and every member is violated by at most ``tol``.
    Raises :class:`NoConvergence` otherwise, which in practice signals an
    empty intersection.

    Two exact paths come first.  When all members but one are halfspaces and
    that member's projection violates a single row, a scalar multiplier is
    solved for instead (see :func:`_single_row_projection`).  When every
    member is polyhedral (halfspaces, boxes, intervals) the iterate is
    finished by solving for its active constraints, and that point is
    returned once it passes the KKT test.  Otherwise the returned point is the
    output of a projection onto the last member.
    """
    sets = _flatten(members)
    return _dykstra(sets, _vec(point), tol, max_iter, _polyhedron(sets))


def _dykstra(sets: list, x: np.ndarray, tol: float, max_iter: int, poly) -> np.ndarray:
    if tol <= 0:
        raise ValueError("tol must be positive")
    for m in sets:
        _check_dim(m, x)
    if len(sets) == 1:
        return sets[0].project(x)

    exact = _single_row_projection(sets, x)
    if exact is not None:
        return exact

    # If one member's projection already satisfies the rest, it is the answer.
    # The result is always a fixed point of the last member's projection, so
    # callers that list a bounded set last get points exactly inside it.
    last = sets[-1]
    for i, m in enumerate(sets):
        y = m.project(x)
        if all(o.contains(y, 1e-12) for o in sets[:-1] if o is not m) and (
            m is last or np.array_equal(last.project(y), y)
        ):
            return y

    origin = x
    tried = None
    if poly is not None:
        # first guess: the rows that ``x`` violates
        tried = poly[0] @ x - poly[1] > 0
        exact = _kkt_projection(poly, origin, tried) if np.any(tried) else None
        if exact is not None:
            return exact
    incr = np.zeros((len(sets), x.shape[0]))
    viol = np.full(len(sets), np.inf)
    for _ in range(max_iter):
        x_prev, incr_prev = x, incr.copy()
        for i, m in enumerate(sets):
            y = m.project(x + incr[i])
            incr[i] = x + incr[i] - y
            x = y
        # the iterate can pause for a sweep while the increments still change
        moved = max(np.linalg.norm(x - x_prev), np.linalg.norm(incr - incr_prev))
        if poly is not None:
            # guess the active rows from the iterate and finish exactly
            G, g, norms = poly
            active = G @ x - g >= -max(1e-7, 10 * moved) * norms
            if np.any(active) and (tried is None or not np.array_equal(active, tried)):
                tried = active
                exact = _kkt_projection(poly, origin, active)
                if exact is not None:
                    return exact
        if moved < tol:
            viol = np.array([m.violation(x) for m in sets])
            if viol.max() <= tol:
                return x
    viol = np.array([m.violation(x) for m in sets])
    raise NoConvergence(max_iter, x, viol)


def project(s: FeasibleSet, point) -> np.ndarray:
    return s.project(point)


def bounds(s: FeasibleSet) -> SetBounds:
    return s.bounds()


def sample_uniform_ball(dimension: int, radius: float, rng: np.random.Generator) -> np.ndarray:
    """Uniform draw from the closed ball of ``radius`` centred at the origin."""
    if radius < 0:
        raise ValueError("radius must be >= 0")
    if radius == 0 or dimension == 0:
        return np.zeros(dimension)
    g = rng.standard_normal(dimension)
    n = np.linalg.norm(g)
    while n == 0:
        g = rng.standard_normal(dimension)
        n = np.linalg.norm(g)
    return g / n * radius * rng.random() ** (1.0 / dimension)
