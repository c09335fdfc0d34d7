"""Pressure from periodic points, the Bowen root, and Hessian diagnostics."""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from . import kernels
from .coding_measure import BernoulliWeights, CircleMeasure, PointMass, Word, integrate_measure
from .conjugacy import BoettcherSeries
from .errors import (
    BracketFailure,
    BudgetExceeded,
    InputError,
    NewtonDivergence,
    NonMonotoneSequence,
    OutOfFamily,
    RootCountMismatch,
)
from .lyapunov import (
    QuadConfig,
    get_series,
    lyap_conjugacy_cubic_exact,
    lyap_conjugacy_quadratic,
    lyap_dirac_closed_form,
    bracket_expansion_quadratic,
)
from .poly_core import (
    MonicCenteredPolynomial,
    derivative_at,
    evaluate,
    in_family,
    iterate_coefficients,
    julia_cloud,
    quadratic_map,
)

PERIODIC_BUDGET = 2 ** 20


class OrbitMethod(str, enum.Enum):
    NEWTON_FROM_ANGLES = "NewtonFromAngles"
    POLYNOMIAL_ROOTS = "PolynomialRoots"


@dataclass(frozen=True)
class PeriodicOrbitSet:
    """Period-n points on the Julia set, indexed by external angle j/(d^n - 1)."""

    period: int
    degree: int
    points: np.ndarray
    multipliers: np.ndarray
    angle_indices: np.ndarray
    method: OrbitMethod

    def __len__(self) -> int:
        return len(self.points)

    @property
    def itineraries(self) -> list[Word]:
        return [Word.from_index(int(j), self.period, self.degree) for j in self.angle_indices]

    def digits(self) -> np.ndarray:
        """Base-d digits of each angle index, most significant first, shape [points, n]."""
        j = self.angle_indices.astype(np.int64)
        powers = self.degree ** np.arange(self.period - 1, -1, -1, dtype=np.int64)
        return (j[:, None] // powers[None, :]) % self.degree


def _min_separation_ok(z: np.ndarray, tol: float) -> bool:
    order = np.argsort(z.real, kind="stable")
    zs = z[order]
    for k in range(1, 9):
        if len(zs) <= k:
            break
        if np.any(np.abs(zs[k:] - zs[:-k]) < tol):
            return False
    # points further apart in sorted order can still be close if many share a real part
    return True


def _iterate_with_derivative(P: MonicCenteredPolynomial, z: np.ndarray, n: int):
    w = z.copy()
    dw = np.ones_like(z)
    for _ in range(n):
        dw = dw * derivative_at(P, w)
        w = evaluate(P, w)
    return w, dw


@lru_cache(maxsize=64)
def periodic_points(P: MonicCenteredPolynomial, n: int,
                    method: OrbitMethod = OrbitMethod.NEWTON_FROM_ANGLES,
                    check_family: bool = True) -> PeriodicOrbitSet:
    d = P.degree
    if n < 1:
        raise InputError("period must be >= 1")
    if d ** n > PERIODIC_BUDGET:
        raise BudgetExceeded(f"{d}^{n} exceeds the periodic-point budget {PERIODIC_BUDGET}")
    if check_family and not in_family(P):
        raise OutOfFamily(f"parameters {P.lower_coeffs} are outside the hyperbolic family")
    method = OrbitMethod(method)
    count = d ** n - 1
    j = np.arange(count, dtype=np.int64)
    theta = j / count
    series = get_series(d)
    seeds = _pullback_refine(P, series.evaluate(list(P.params), theta, cache=False))
    if method is OrbitMethod.NEWTON_FROM_ANGLES:
        roots, mults, iters = kernels.newton_periodic(np.ascontiguousarray(seeds), P.coefficients(), n, 100, 1e-14)
        roots, mults, iters = np.asarray(roots), np.asarray(mults), np.asarray(iters)
        if np.any(iters < 0):
            bad = np.flatnonzero(iters < 0)
            raise NewtonDivergence(f"Newton failed for {len(bad)} angles", angles=(theta[bad]).tolist())
        idx = j
    else:
        roots, mults, idx = _roots_by_polynomial(P, n, seeds)
    resid = np.abs(_iterate_with_derivative(P, roots, n)[0] - roots)
    if np.any(resid >= 1e-9 * np.maximum(1.0, np.abs(roots))):
        raise NewtonDivergence("periodic-point residual above 1e-9", angles=theta[resid >= 1e-9].tolist())
    if len(roots) != count or not _min_separation_ok(roots, 1e-9):
        raise RootCountMismatch(f"expected {count} distinct period-{n} points, got a collision or {len(roots)}")
    if np.any(np.abs(mults) <= 1.0):
        raise RootCountMismatch("a non-repelling point was produced by angle enumeration")
    return PeriodicOrbitSet(n, d, roots, mults, idx, method)


def _pullback_refine(P: MonicCenteredPolynomial, seeds: np.ndarray, rounds: int = 200,
                     tol: float = 1e-13) -> np.ndarray:
    """Contract the truncated-series seeds toward the periodic points.

    Seed j is replaced by the preimage of seed (d*j mod N) lying next to it,
    found by a few Newton steps on P(z) = target. Inverse branches contract,
    so the label-preserving fixed point of this sweep is the periodic set.
    """
    N = len(seeds)
    image = (np.arange(N, dtype=np.int64) * P.degree) % N
    z = seeds.copy()
    for _ in range(rounds):
        target = z[image]
        new = z.copy()
        for _ in range(4):
            new = new - (evaluate(P, new) - target) / derivative_at(P, new)
        change = float(np.max(np.abs(new - z)))
        z = new
        if change < tol:
            break
    return z


def _roots_by_polynomial(P: MonicCenteredPolynomial, n: int, seeds: np.ndarray):
    """All roots of P^n(z) - z, filtered to repelling points near the Julia set."""
    if P.degree ** n > 256:
        raise BudgetExceeded("polynomial-root enumeration is limited to d^n <= 256")
    coef = iterate_coefficients(P, n)
    coef[-2] -= 1.0
    roots = np.roots(coef)
    for _ in range(3):
        w, dw = _iterate_with_derivative(P, roots, n)
        roots = roots - (w - roots) / (dw - 1.0)
    _, mults = _iterate_with_derivative(P, roots, n)
    cloud = julia_cloud(P, 100000, seed=0).points
    near = np.array([np.min(np.abs(cloud - r)) for r in roots]) < 1e-3
    keep = (np.abs(mults) > 1.0) & near
    roots, mults = roots[keep], mults[keep]
    # angle labels come from the nearest series seed
    idx = np.argmin(np.abs(roots[:, None] - seeds[None, :]), axis=1).astype(np.int64)
    order = np.argsort(idx, kind="stable")
    return roots[order], mults[order], idx[order]


class PotentialKind(str, enum.Enum):
    MINUS_S_LOG_DERIV = "f_s"
    LOCALLY_CONSTANT_LOG_P = "g"
    LINEAR_COMBINATION = "g+tf"


@dataclass(frozen=True)
class PotentialSpec:
    kind: PotentialKind
    s: float = 0.0
    weights: BernoulliWeights | None = None
    t: float = 0.0

    @classmethod
    def f_s(cls, s: float) -> "PotentialSpec":
        return cls(PotentialKind.MINUS_S_LOG_DERIV, s=float(s))

    @classmethod
    def g(cls, weights: BernoulliWeights, t: float = 0.0) -> "PotentialSpec":
        kind = PotentialKind.LINEAR_COMBINATION if t else PotentialKind.LOCALLY_CONSTANT_LOG_P
        return cls(kind, weights=weights, t=float(t))


def _birkhoff_sums(orbits: PeriodicOrbitSet, spec: PotentialSpec) -> np.ndarray:
    kind = PotentialKind(spec.kind)
    logmult = np.log(np.abs(orbits.multipliers))
    if kind is PotentialKind.MINUS_S_LOG_DERIV:
        return -spec.s * logmult
    if spec.weights is None or spec.weights.d != orbits.degree:
        raise InputError("the locally constant potential needs weights over d symbols")
    logp = np.log(np.array(spec.weights.p))
    sums = logp[orbits.digits()].sum(axis=1)
    if kind is PotentialKind.LINEAR_COMBINATION:
        sums = sums - spec.t * logmult
    return sums


def _log_sum_exp(x: np.ndarray) -> float:
    m = float(np.max(x))
    return m + math.log(math.fsum(np.exp(x - m).tolist()))


@dataclass(frozen=True)
class PressureSample:
    spec: PotentialSpec
    n: int
    value: float


def pressure_at(P: MonicCenteredPolynomial, spec: PotentialSpec, n: int) -> PressureSample:
    """(1/n) log of the sum over period-n points of exp(Birkhoff sum)."""
    orbits = periodic_points(P, n)
    return PressureSample(spec, n, _log_sum_exp(_birkhoff_sums(orbits, spec)) / n)


@dataclass(frozen=True)
class PressureLimit:
    value: float
    error_estimate: float
    samples: tuple[PressureSample, ...] = field(repr=False)
    monotone: bool = True

    def __iter__(self):
        return iter((self.value, self.error_estimate))


def default_period_range(d: int) -> tuple[int, int]:
    return (4, 12) if d == 2 else (2, 8)


def _aitken_seq(x: Sequence[float]) -> list[float]:
    out = []
    for a0, a1, a2 in zip(x, x[1:], x[2:]):
        den = (a2 - a1) - (a1 - a0)
        out.append(a2 if den == 0.0 else a2 - (a2 - a1) ** 2 / den)
    return out


def pressure_limit(P: MonicCenteredPolynomial, spec: PotentialSpec, n_min: int | None = None,
                   n_max: int | None = None) -> PressureLimit:
    """Extrapolated pressure from periods n_min..n_max.

    Uses the log-ratios D_n = log(Z_{n+1}/Z_n) of successive partition sums,
    which converge geometrically, then Aitken's delta-squared process, applied
    twice when enough periods are available. The error estimate is the gap
    between the last two accelerated values.
    """
    lo, hi = default_period_range(P.degree)
    n_min = lo if n_min is None else n_min
    n_max = hi if n_max is None else n_max
    if n_max < n_min + 2:
        raise InputError("n_max must be at least n_min + 2")
    samples = tuple(pressure_at(P, spec, n) for n in range(n_min, n_max + 1))
    logZ = [s.n * s.value for s in samples]
    D = [b - a for a, b in zip(logZ, logZ[1:])]
    steps = np.diff(D)
    monotone = bool(np.all(steps >= 0) or np.all(steps <= 0))
    if not monotone:
        warnings.warn("partition-sum ratios are not monotone in n; extrapolation may be unreliable",
                      NonMonotoneSequence, stacklevel=2)
    acc = _aitken_seq(D)
    if len(acc) >= 4:
        acc = _aitken_seq(acc)
    if len(acc) >= 2:
        value, err = acc[-1], abs(acc[-1] - acc[-2])
    elif acc:
        value, err = acc[-1], abs(acc[-1] - D[-1])
    else:
        value, err = D[-1], abs(D[-1] - D[-2])
    return PressureLimit(float(value), float(err), samples, monotone)


@dataclass(frozen=True)
class DimensionEstimate:
    s_star: float
    bracket: tuple[float, float]
    periods_used: tuple[int, ...]
    extrapolated: bool
    error_estimate: float = 0.0


def hausdorff_dimension(P: MonicCenteredPolynomial, n_max: int | None = None, tol: float = 1e-7,
                        n_min: int | None = None) -> DimensionEstimate:
    """Bowen root of s -> pressure(-s log|P'|) by bisection on [0, 2]."""
    lo_n, hi_n = default_period_range(P.degree)
    n_max = hi_n if n_max is None else n_max
    n_min = max(1, n_max - (hi_n - lo_n)) if n_min is None else n_min

    def pressure(s):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", NonMonotoneSequence)
            return pressure_limit(P, PotentialSpec.f_s(s), n_min, n_max)

    if pressure(0.0).value <= 0.0 or pressure(2.0).value >= 0.0:
        raise BracketFailure("pressure does not change sign on [0, 2]")
    lo, hi = 0.0, 2.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if pressure(mid).value > 0.0:
            lo = mid
        else:
            hi = mid
    s = 0.5 * (lo + hi)
    pl = pressure(s)
    # derivative of pressure in s is minus the exponent of the equilibrium state, roughly -log d
    err = pl.error_estimate / math.log(P.degree)
    return DimensionEstimate(s, (lo, hi), tuple(range(n_min, n_max + 1)), True, err)


@dataclass(frozen=True)
class DerivativeCheck:
    lhs: float
    rhs: float
    gap: float


def _exponent(P: MonicCenteredPolynomial, measure, quad_config: QuadConfig | None = None) -> float:
    if P.degree == 2:
        return lyap_conjugacy_quadratic(P.params[0], measure, quad_config=quad_config).value
    return lyap_conjugacy_cubic_exact(*P.params, measure, quad_config=quad_config).value


def pressure_derivative_check(P: MonicCenteredPolynomial, weights: BernoulliWeights, h: float = 1e-3,
                              n_min: int | None = None, n_max: int | None = None) -> DerivativeCheck:
    """Central difference of t -> pressure(g + t f) at 0 versus the integral of f = -log|P'|."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NonMonotoneSequence)
        plus = pressure_limit(P, PotentialSpec(PotentialKind.LINEAR_COMBINATION, weights=weights, t=h),
                              n_min, n_max).value
        minus = pressure_limit(P, PotentialSpec(PotentialKind.LINEAR_COMBINATION, weights=weights, t=-h),
                               n_min, n_max).value
    lhs = (plus - minus) / (2.0 * h)
    rhs = _exponent(P, CircleMeasure(weights))
    return DerivativeCheck(lhs, rhs, abs(lhs - rhs))


class HessianMode(str, enum.Enum):
    REDUCED = "reduced"
    CONJUGACY = "conjugacy"
    DIRAC = "dirac"


@dataclass(frozen=True)
class HessianReport:
    mode: HessianMode
    second_partials: tuple[float, float, float]
    det: float
    harmonicity_gap: float


def _quadratic_functional(mode: HessianMode, measure, quad_config: QuadConfig | None):
    if mode is HessianMode.REDUCED:
        return lambda c: bracket_expansion_quadratic(c, measure, quad_config)
    if mode is HessianMode.CONJUGACY:
        return lambda c: lyap_conjugacy_quadratic(c, measure, quad_config=quad_config, check_family=False).value
    return lambda c: lyap_dirac_closed_form(quadratic_map(c)).value


def hessian_report(family: str, weights: BernoulliWeights | None, h: float = 1e-2,
                   mode: HessianMode = HessianMode.REDUCED, quad_config: QuadConfig | None = None) -> HessianReport:
    """Second differences in (c_R, c_I) at c = 0 of the chosen quadratic Lyapunov functional.

    ``weights=None`` evaluates at the point mass at angle 0.
    """
    if family not in ("quad", "quadratic"):
        raise InputError("the Hessian report is defined for the quadratic family")
    if not 1e-3 <= h <= 5e-2:
        raise InputError("h must lie in [1e-3, 5e-2]")
    mode = HessianMode(mode)
    measure = PointMass.dirac(2) if weights is None else CircleMeasure(weights)
    quad_config = quad_config or QuadConfig(tol=1e-11)
    L = _quadratic_functional(mode, measure, quad_config)
    l0 = L(0j)
    lrr = (L(complex(h, 0)) - 2 * l0 + L(complex(-h, 0))) / h ** 2
    lii = (L(complex(0, h)) - 2 * l0 + L(complex(0, -h))) / h ** 2
    lri = (L(complex(h, h)) - L(complex(h, -h)) - L(complex(-h, h)) + L(complex(-h, -h))) / (4 * h ** 2)
    return HessianReport(mode, (lrr, lri, lii), lrr * lii - lri ** 2, abs(lrr + lii))


def theta2_scan(c, p1_grid: Sequence[float], quad_config: QuadConfig | None = None) -> list[tuple[float, float]]:
    """Integrated second-order bracket of the quadratic functional along weights (p1, 1 - p1).

    The value is the integral of Re(c^2 conj(z) phi_2) - (Re(c conj(z) phi_1))^2 / 2
    + (Im(c conj(z) phi_1))^2 / 2, an approximation of the second-order part.
    """
    series: BoettcherSeries = get_series(2)
    c = complex(c)
    i1, i2 = series.index_of((1,)), series.index_of((2,))
    out = []
    for p1 in p1_grid:
        if not 0.0 < p1 < 1.0:
            raise InputError("p1 must lie strictly between 0 and 1")
        measure = CircleMeasure(BernoulliWeights((p1, 1.0 - p1)))

        def F(th):
            t = series.terms(th)
            zc = np.conj(t[0])
            u, v = c * zc * t[i1], c * c * zc * t[i2]
            return v.real - 0.5 * u.real ** 2 + 0.5 * u.imag ** 2

        out.append((float(p1), float(integrate_measure(F, measure, **(quad_config or QuadConfig()).kwargs()).value)))
    return out
