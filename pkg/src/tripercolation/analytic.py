"""Exact characteristics solution for the triangulated component densities.

Notation follows the usual generating-function conventions:

* ``V(t, x) = sum_n v_n(t) exp(-n x)`` with ``v_n = n c_n``;
* ``W(t, x) = exp(V^2 - m1*(t)^2 - x)`` with ``m1*(t) = m1(0) + t``;
* along a characteristic started at ``x0`` the value ``w = W(0, x0)`` is
  conserved, ``v`` grows linearly, ``v(t) = V(0, x0) + t w``, and ``x(t)`` is
  quadratic in t.

Inverting ``W(0, .)`` gives ``X0(w)`` and ``V0hat(w) = V(0, X0(w))``, from which
``Xhat(t, w) = X0(w) + (V0hat(w) + t w)^2 - V0hat(w)^2 - (m1 + t)^2 + m1^2``.
``W(t, 0)`` is the smallest root of ``Xhat(t, .) = 0`` in (0, 1], and the
giant-component density follows from it.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Mapping

import numpy as np

from .errors import DomainError, InvalidArgumentError, NearCriticalWarning, NumericalError

SQRT_HALF = math.sqrt(0.5)

# Below this |Xhat| a negative scan value is treated as round-off, not a sign change.
_SCAN_NOISE = 1e-13
_W_FLOOR = 1e-300
_NEAR_CRITICAL = 1e-6
_MAX_BISECT = 200


@dataclass(frozen=True)
class Tolerances:
    root_abs: float = 1e-12
    bracket_points: int = 10_000
    fd_step: float = 1e-5

    def __post_init__(self):
        if not self.root_abs > 0:
            raise InvalidArgumentError(f"root_abs must be positive, got {self.root_abs}")
        if self.bracket_points < 100:
            raise InvalidArgumentError(f"bracket_points must be >= 100, got {self.bracket_points}")
        if not self.fd_step > 0:
            raise InvalidArgumentError(f"fd_step must be positive, got {self.fd_step}")


DEFAULT_TOL = Tolerances()


@dataclass(frozen=True)
class InitialDistribution:
    """Initial weight-biased densities v_n(0), in units of N^(3/2)/2.

    Use the constructors :meth:`empty`, :meth:`er_density` and
    :meth:`explicit` rather than building instances directly.
    """

    kind: str
    m1_0: float = 0.0
    support: tuple[tuple[int, float], ...] = ()
    tail_mass: float = 0.0
    _ns: np.ndarray = field(default=None, repr=False, compare=False)
    _vs: np.ndarray = field(default=None, repr=False, compare=False)

    # -- constructors --------------------------------------------------

    @classmethod
    def empty(cls) -> InitialDistribution:
        return cls("empty")

    @classmethod
    def er_density(cls, m1_0: float) -> InitialDistribution:
        """The uniform random graph at density m1_0, i.e. the empty start evolved to t = m1_0."""
        # guard band: 1/sqrt(2) and sqrt(0.5) differ by one ulp in floating point
        if not 0 <= m1_0 < SQRT_HALF - 1e-12:
            raise DomainError(f"ER initial density must lie in [0, 1/sqrt(2)), got {m1_0}")
        if m1_0 == 0:
            return cls.empty()
        return cls("er", m1_0=float(m1_0))

    @classmethod
    def explicit(cls, support: Mapping[int, float], tail_mass: float = 0.0) -> InitialDistribution:
        items = []
        for n, v in sorted(support.items()):
            if not isinstance(n, (int, np.integer)) or n < 1 or n % 2 == 0:
                raise DomainError(f"support keys must be odd positive integers, got {n!r}")
            if not v >= 0 or not math.isfinite(v):
                raise DomainError(f"v_{n}(0) must be finite and non-negative, got {v}")
            if v > 0:
                items.append((int(n), float(v)))
        ns = np.array([n for n, _ in items], dtype=float)
        vs = np.array([v for _, v in items], dtype=float)
        return cls("explicit", m1_0=float(vs.sum()), support=tuple(items),
                   tail_mass=float(tail_mass), _ns=ns, _vs=vs)

    @classmethod
    def from_function(cls, v_of_n: Callable[[int], float], n_max: int = 10_000) -> InitialDistribution:
        """Truncate an infinite odd-support sequence at ``n_max``.

        ``tail_mass`` reports the mass of the next ``n_max`` odd terms, a
        lower bound on what was dropped.
        """
        support = {n: v_of_n(n) for n in range(1, n_max + 1, 2)}
        tail = sum(v_of_n(n) for n in range(n_max + 1 + (n_max % 2 == 0), 3 * n_max, 2))
        return cls.explicit(support, tail_mass=tail)

    @classmethod
    def from_component_counts(cls, counts: Mapping[int, int], n_vertices: int) -> InitialDistribution:
        """Densities v_n = n C_n / (N^(3/2)/2) of an observed graph, all components included."""
        norm = 0.5 * n_vertices ** 1.5
        return cls.explicit({k: k * c / norm for k, c in counts.items()})

    # -- generating functions at t = 0 ---------------------------------

    def moments(self) -> tuple[float, float]:
        """(m1, m2) = (sum v_n, sum n v_n)."""
        if self.kind == "empty":
            return 0.0, 0.0
        if self.kind == "er":
            s = self.m1_0
            return s, s / (1.0 - 2.0 * s * s)
        return float(self._vs.sum()), float((self._ns * self._vs).sum())

    def _series(self, x, power: int) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if not len(self._ns):
            return np.zeros_like(x)
        terms = self._vs * self._ns ** power * np.exp(-np.multiply.outer(x, self._ns))
        return terms.sum(axis=-1)

    def initial_V(self, x):
        if self.kind == "empty":
            return np.zeros_like(np.asarray(x, dtype=float))
        if self.kind == "er":
            return self.m1_0 * _er_label(self.m1_0, x)
        return self._series(x, 0)

    def initial_W(self, x):
        x = np.asarray(x, dtype=float)
        v = self.initial_V(x)
        return np.exp(v * v - self.m1_0 ** 2 - x)

    def xhat0(self, w, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
        """Inverse of the strictly decreasing map x -> W(0, x) on (0, 1]."""
        w = np.asarray(w, dtype=float)
        if self.kind == "empty":
            return -np.log(w)
        if self.kind == "er":
            s = self.m1_0
            return -np.log(w) + s * s * (w * w - 1.0)
        return _invert_initial_W(self, w, tol.root_abs)

    def vhat0(self, w, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
        """V(0, Xhat(0, w))."""
        w = np.asarray(w, dtype=float)
        if self.kind == "empty":
            return np.zeros_like(w)
        if self.kind == "er":
            return self.m1_0 * w
        return self._series(self.xhat0(w, tol), 0)


def _er_label(s: float, x) -> np.ndarray:
    """Characteristic label w of the empty-start solution at time s, reaching position x.

    Solves -ln w + s^2 (w^2 - 1) = x, which is strictly decreasing in w for
    s < 1/sqrt(2), by the same scan-and-bisect used for W(t, 0).
    """
    x = np.asarray(x, dtype=float)
    empty = InitialDistribution.empty()
    if x.ndim == 0:
        return _smallest_root(empty, s, float(x), DEFAULT_TOL)
    return np.array([_smallest_root(empty, s, xi, DEFAULT_TOL) for xi in x.ravel()]).reshape(x.shape)


def _invert_initial_W(dist: InitialDistribution, w: np.ndarray, root_abs: float) -> np.ndarray:
    # exp(-m1^2 - x) <= W(0, x) <= exp(-x) since 0 <= V <= m1
    m1 = dist.m1_0
    target = np.log(w)
    lo = np.maximum(0.0, -target - m1 * m1)
    hi = -target.copy()
    for _ in range(_MAX_BISECT):
        if np.all(hi - lo <= root_abs):
            break
        mid = 0.5 * (lo + hi)
        v = dist._series(mid, 0)
        above = v * v - m1 * m1 - mid > target
        lo = np.where(above, mid, lo)
        hi = np.where(above, hi, mid)
    return 0.5 * (lo + hi)


# -- characteristic machinery ------------------------------------------


@dataclass(frozen=True)
class GFValues:
    x: float
    V: float
    Vprime: float
    W: float
    C: float


def _check_dist(dist: InitialDistribution) -> None:
    if not isinstance(dist, InitialDistribution):
        raise InvalidArgumentError(f"expected InitialDistribution, got {type(dist).__name__}")


def moments(dist: InitialDistribution) -> tuple[float, float]:
    _check_dist(dist)
    return dist.moments()


def gf_values(dist: InitialDistribution, x: float) -> GFValues:
    """V, V', W and C of the initial data at a single point x >= 0."""
    _check_dist(dist)
    if not x >= 0:
        raise DomainError(f"x must be non-negative, got {x}")
    m1 = dist.m1_0
    if dist.kind == "empty":
        return GFValues(x, 0.0, 0.0, math.exp(-x), 0.0)
    if dist.kind == "er":
        s = m1
        w = _er_label(s, x)
        v = s * w
        # implicit derivative of V = s w along -ln w + s^2 (w^2 - 1) = x
        vprime = s * w / (2.0 * s * s * w * w - 1.0)
        c = s * w - 2.0 / 3.0 * s ** 3 * w ** 3
        return GFValues(x, v, vprime, math.exp(v * v - m1 * m1 - x), c)
    v = float(dist._series(x, 0))
    vprime = -float(dist._series(x, 1))
    c = float(dist._series(x, -1))
    return GFValues(x, v, vprime, math.exp(v * v - m1 * m1 - x), c)


def critical_time(m1: float, m2: float) -> float:
    """Positive root of (2 m1 m2 + 1) T^2 + (m2 + m1 (2 m1 m2 + 1)) T - 1/2 = 0."""
    if m1 < 0 or m2 < 0:
        raise DomainError(f"moments must be non-negative, got m1={m1}, m2={m2}")
    a = 2.0 * m1 * m2 + 1.0
    b = m2 + m1 * a
    # 2c / (-b - sqrt(b^2 - 4ac)) with c = -1/2; avoids cancellation for large b
    return 1.0 / (b + math.sqrt(b * b + 2.0 * a))


def characteristic_state(dist: InitialDistribution, x0: float, t: float) -> tuple[float, float, float]:
    """(x(t), v(t), w) along the characteristic that starts at x0."""
    _check_dist(dist)
    if not x0 >= 0 or not t >= 0:
        raise DomainError(f"need x0 >= 0 and t >= 0, got x0={x0}, t={t}")
    g = gf_values(dist, x0)
    m1 = dist.m1_0
    w = g.W
    v = g.V + t * w
    x = x0 + v * v - g.V * g.V - (m1 + t) ** 2 + m1 * m1
    return x, v, w


def _xhat(dist: InitialDistribution, t: float, w, tol: Tolerances):
    w = np.asarray(w, dtype=float)
    m1 = dist.m1_0
    x0 = dist.xhat0(w, tol)
    v0 = dist.vhat0(w, tol)
    return x0 + (v0 + t * w) ** 2 - v0 * v0 - (m1 + t) ** 2 + m1 * m1


def xhat(dist: InitialDistribution, t: float, w: float, tol: Tolerances = DEFAULT_TOL) -> float:
    """Position at time t of the characteristic carrying the conserved value w."""
    _check_dist(dist)
    if not 0 < w <= 1:
        raise DomainError(f"w must lie in (0, 1], got {w}")
    if w == 1:
        return 0.0
    return float(_xhat(dist, t, w, tol))


@lru_cache(maxsize=8)
def _scan_grid(points: int) -> np.ndarray:
    # log-spaced in w for small w, and in 1 - w to resolve roots just below 1
    low = np.geomspace(_W_FLOOR, 0.5, points // 2)
    high = 1.0 - np.geomspace(0.5, 1e-13, points - points // 2)
    grid = np.unique(np.concatenate([low, high]))
    grid.setflags(write=False)
    return grid


def _smallest_root(dist: InitialDistribution, t: float, x: float, tol: Tolerances) -> float:
    """Smallest w in (0, 1) with Xhat(t, w) = x, or 1.0 if the scan finds no crossing."""
    grid = _scan_grid(tol.bracket_points)
    g = _xhat(dist, t, grid, tol) - x
    neg = np.flatnonzero(g < -_SCAN_NOISE)
    if not len(neg):
        return 1.0
    i = int(neg[0])
    if i == 0:
        raise NumericalError(f"root below w={_W_FLOOR:g} at t={t}, x={x}")
    lo, hi = float(grid[i - 1]), float(grid[i])
    for _ in range(_MAX_BISECT):
        if hi - lo <= tol.root_abs:
            break
        mid = 0.5 * (lo + hi)
        if float(_xhat(dist, t, mid, tol)) - x > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def w_at_zero(dist: InitialDistribution, t: float, tol: Tolerances = DEFAULT_TOL) -> float:
    """W(t, 0): the smallest w in (0, 1] with Xhat(t, w) = 0 (1 when subcritical)."""
    _check_dist(dist)
    if not t >= 0:
        raise DomainError(f"t must be non-negative, got {t}")
    t_g = critical_time(*dist.moments())
    if abs(t - t_g) < _NEAR_CRITICAL:
        warnings.warn(
            f"t={t!r} is within {_NEAR_CRITICAL:g} of T_g={t_g!r}; returning W(t,0)=1",
            NearCriticalWarning,
            stacklevel=2,
        )
        return 1.0
    return _smallest_root(dist, t, 0.0, tol)


@dataclass(frozen=True)
class TheoryResult:
    t: float
    T_g: float
    w_star: float
    v_inf: float
    m1_finite: float
    m1_star: float


def theory(dist: InitialDistribution, t: float, tol: Tolerances = DEFAULT_TOL) -> TheoryResult:
    _check_dist(dist)
    m1, m2 = dist.moments()
    t_g = critical_time(m1, m2)
    w = w_at_zero(dist, t, tol)
    if w == 1.0:
        return TheoryResult(t=t, T_g=t_g, w_star=1.0, v_inf=0.0, m1_finite=m1 + t, m1_star=m1 + t)
    v_at_w = float(dist.vhat0(w, tol))
    m1_finite = v_at_w + t * w
    # V0hat(1) = V(0, 0) = m1
    v_inf = m1 + t - v_at_w - t * w
    return TheoryResult(t=t, T_g=t_g, w_star=w, v_inf=v_inf, m1_finite=m1_finite, m1_star=m1 + t)


def eval_V(dist: InitialDistribution, t: float, x: float, tol: Tolerances = DEFAULT_TOL) -> float:
    """V(t, x) on the branch given by the smallest w-root of Xhat(t, w) = x."""
    _check_dist(dist)
    if not x >= 0 or not t >= 0:
        raise DomainError(f"need t >= 0 and x >= 0, got t={t}, x={x}")
    if x == 0:
        w = w_at_zero(dist, t, tol)
    else:
        w = _smallest_root(dist, t, x, tol)
    if w == 1.0:
        return dist.m1_0 + t
    return float(dist.vhat0(w, tol)) + t * w


def eval_W(dist: InitialDistribution, t: float, x: float, tol: Tolerances = DEFAULT_TOL) -> float:
    v = eval_V(dist, t, x, tol)
    return math.exp(v * v - (dist.m1_0 + t) ** 2 - x)


def pde_residual(dist: InitialDistribution, t: float, x: float, tol: Tolerances = DEFAULT_TOL) -> float:
    """|dV/dt + dV/dx (2 V W - 2 m1*) - W| by central differences of :func:`eval_V`."""
    _check_dist(dist)
    h = tol.fd_step
    if not t > h or not x > h:
        raise DomainError(f"need t, x > fd_step={h}, got t={t}, x={x}")
    try:
        v = eval_V(dist, t, x, tol)
        v_t = (eval_V(dist, t + h, x, tol) - eval_V(dist, t - h, x, tol)) / (2 * h)
        v_x = (eval_V(dist, t, x + h, tol) - eval_V(dist, t, x - h, tol)) / (2 * h)
    except (NumericalError, FloatingPointError) as exc:
        raise NumericalError(f"stencil evaluation failed at t={t}, x={x}: {exc}") from exc
    m_star = dist.m1_0 + t
    w = math.exp(v * v - m_star * m_star - x)
    return abs(v_t + v_x * (2 * v * w - 2 * m_star) - w)
