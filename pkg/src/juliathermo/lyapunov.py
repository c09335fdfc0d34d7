"""Lyapunov exponents against Bernoulli pushforward measures.

Sign convention: ``value`` is -integral log|P'| (negative for expanding maps);
``positive_exponent`` is its negation.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from . import kernels
from .coding_measure import (
    BernoulliWeights,
    CircleMeasure,
    PointMass,
    Representative,
    dirac_limit_angle,
    integrate_measure,
)
from .conjugacy import BoettcherSeries, DEFAULT_DEPTH
from .errors import BranchFailure, BudgetExceeded, IllConditionedFit, InputError, NoConvergence, OutOfFamily, SingularIntegrand
from .expansion import (
    RealParamPolynomial,
    complex_monomial,
    fit_basis,
    monomial_label,
    monomial_matrix,
    real_parts_of_series,
    series_log1p,
    series_product,
    target_polynomial,
    variables_for,
)
from .poly_core import (
    MonicCenteredPolynomial,
    cubic_map,
    derivative_at,
    in_family,
    newton_fixed_point,
    quadratic_map,
)

Measure = CircleMeasure | PointMass


class Method(str, enum.Enum):
    CONJUGACY_QUADRATURE = "ConjugacyQuadrature"
    REDUCED_EXPANSION = "ReducedExpansion"
    BIRKHOFF_MC = "BirkhoffMC"
    DIRAC_CLOSED_FORM = "DiracClosedForm"


class Mode(str, enum.Enum):
    REDUCED = "reduced"
    EXACT = "exact"


@dataclass(frozen=True)
class LyapunovEstimate:
    value: float
    method: Method
    error_estimate: float
    positive_exponent: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "value", float(self.value))
        object.__setattr__(self, "error_estimate", float(self.error_estimate))
        object.__setattr__(self, "positive_exponent", -self.value)


@dataclass(frozen=True)
class SeriesConfig:
    order: int | None = None
    cap: int | None = None
    depth: int = DEFAULT_DEPTH


@dataclass(frozen=True)
class QuadConfig:
    tol: float = 1e-8
    max_level: int | None = None
    representative: Representative = Representative.BARYCENTER
    accelerate: bool = True

    def kwargs(self) -> dict:
        return {"tol": self.tol, "max_level": self.max_level,
                "representative": self.representative, "accelerate": self.accelerate}


@lru_cache(maxsize=16)
def get_series(degree: int, config: SeriesConfig = SeriesConfig()) -> BoettcherSeries:
    """Shared series objects so cached node values are reused across calls."""
    return BoettcherSeries(degree, order=config.order, cap=config.cap, depth=config.depth)


def _require_family(P: MonicCenteredPolynomial):
    if not in_family(P):
        raise OutOfFamily(f"parameters {P.lower_coeffs} are outside the hyperbolic family")


def _measure_degree(measure: Measure) -> int:
    return measure.d


def _integrate(F, measure: Measure, quad: QuadConfig | None):
    return integrate_measure(F, measure, **(quad or QuadConfig()).kwargs())


def _affine_integral(F, measure: Measure, quad: QuadConfig | None, offset: float,
                     scale: float = -1.0) -> tuple[float, float]:
    """offset + scale * integral of F, with the same map applied to a NoConvergence payload."""
    try:
        res = _integrate(F, measure, quad)
    except NoConvergence as exc:
        raise NoConvergence(str(exc), value=offset + scale * exc.value,
                            error_estimate=abs(scale) * exc.error_estimate, level=exc.level) from exc
    return offset + scale * res.value, abs(scale) * res.error_estimate


def lyap_conjugacy_quadratic(c, measure: Measure, series_config: SeriesConfig | None = None,
                             quad_config: QuadConfig | None = None, check_family: bool = True) -> LyapunovEstimate:
    """-log 2 - integral log|Phi_c|, using |P'(Phi(z))| = 2 |Phi(z)|."""
    P = quadratic_map(c)
    if _measure_degree(measure) != 2:
        raise InputError("quadratic maps need a two-symbol measure")
    if check_family:
        _require_family(P)
    series = get_series(2, series_config or SeriesConfig())
    params = [complex(c)]
    value, err = _affine_integral(lambda th: np.log(np.abs(series.evaluate(params, th))), measure, quad_config,
                                  -math.log(2.0))
    return LyapunovEstimate(value, Method.CONJUGACY_QUADRATURE, err)


def lyap_conjugacy_cubic_exact(a1, a0, measure: Measure, series_config: SeriesConfig | None = None,
                               quad_config: QuadConfig | None = None, check_family: bool = True) -> LyapunovEstimate:
    """-integral log|3 Phi^2 + a1|, the full pullback of log|P'|."""
    P = cubic_map(a1, a0)
    if _measure_degree(measure) != 3:
        raise InputError("cubic maps need a three-symbol measure")
    if check_family:
        _require_family(P)
    series = get_series(3, series_config or SeriesConfig())
    params = [complex(a1), complex(a0)]

    def F(th):
        phi = series.evaluate(params, th)
        g = np.abs(3.0 * phi * phi + params[0])
        if np.any(g < 1e-14):
            raise SingularIntegrand("|3 Phi^2 + a1| vanishes at a quadrature node")
        return np.log(g)

    value, err = _affine_integral(F, measure, quad_config, 0.0)
    return LyapunovEstimate(value, Method.CONJUGACY_QUADRATURE, err)


def lyap_reduced_cubic(a1, a0, measure: Measure, series_config: SeriesConfig | None = None,
                          quad_config: QuadConfig | None = None, check_family: bool = True) -> LyapunovEstimate:
    """-log 3 - integral log|Phi_a|, the reduced cubic functional."""
    P = cubic_map(a1, a0)
    if _measure_degree(measure) != 3:
        raise InputError("cubic maps need a three-symbol measure")
    if check_family:
        _require_family(P)
    series = get_series(3, series_config or SeriesConfig())
    params = [complex(a1), complex(a0)]
    value, err = _affine_integral(lambda th: np.log(np.abs(series.evaluate(params, th))), measure, quad_config,
                                  -math.log(3.0))
    return LyapunovEstimate(value, Method.REDUCED_EXPANSION, err)

# digits drawn per Monte Carlo call; the int64 draw buffer is 8 bytes each
MC_BUDGET = 2 ** 26



def lyap_birkhoff_mc(P: MonicCenteredPolynomial, measure: CircleMeasure, n_samples: int = 64,
                     orbit_length: int = 20000, burn_in: int = 1000, seed: int = 0,
                     check_family: bool = True) -> LyapunovEstimate:
    """Average of -log|P'| along random backward orbits.

    Each chain starts at the fixed point reached by Newton from z=1 (external
    angle 0) and repeatedly steps to the preimage whose external angle is
    (theta + k)/d, with the digit k drawn from the weights. Preimages are
    matched to angles through their nearest zeroth-order position
    e^{2 pi i (theta + k)/d}; an ambiguous match raises BranchFailure.
    """
    if measure.d != P.degree:
        raise InputError("measure alphabet does not match the degree")
    if orbit_length <= burn_in:
        raise InputError("orbit_length must exceed burn_in")
    if n_samples * orbit_length > MC_BUDGET:
        raise BudgetExceeded(f"{n_samples} chains of {orbit_length} steps exceed the budget of {MC_BUDGET} digits")
    if check_family:
        _require_family(P)
    z0, _ = newton_fixed_point(P, 1.0)
    rng = np.random.default_rng(seed)
    digits = rng.choice(P.degree, size=(n_samples, orbit_length), p=measure.weights.p).astype(np.int8)
    means, status = kernels.mc_chains(P.coefficients(), P.degree, complex(z0), 0.0,
                                      np.ascontiguousarray(digits), burn_in)
    status = np.asarray(status)
    if np.any(status):
        bad = int(np.flatnonzero(status)[0])
        raise BranchFailure(f"chain {bad} lost track of its inverse branch at step {int(status[bad])}")
    means = np.asarray(means)
    value = math.fsum(means.tolist()) / n_samples
    stderr = float(np.std(means, ddof=1) / math.sqrt(n_samples)) if n_samples > 1 else math.inf
    return LyapunovEstimate(value, Method.BIRKHOFF_MC, stderr)


def dirac_fixed_point(P: MonicCenteredPolynomial, which_symbol: int = 1) -> tuple[complex, float]:
    theta = dirac_limit_angle(CircleMeasure(BernoulliWeights.uniform(P.degree)), which_symbol)
    return newton_fixed_point(P, complex(math.cos(2 * math.pi * theta), math.sin(2 * math.pi * theta)))


def lyap_dirac_closed_form(P: MonicCenteredPolynomial, which_symbol: int = 1) -> LyapunovEstimate:
    """-log|P'(z*)| at the fixed point carrying the constant itinerary on one symbol."""
    z, resid = dirac_fixed_point(P, which_symbol)
    dp = abs(derivative_at(P, z))
    # first-order propagation of the fixed-point residual
    err = resid * abs(2.0 * (P.degree - 1)) / max(dp, 1e-300) + 1e-16
    return LyapunovEstimate(-math.log(dp), Method.DIRAC_CLOSED_FORM, err)


# ----- bracketed expansions --------------------------------------------------

def _u_parts(degree: int, terms: np.ndarray, indices, params=None):
    """Real and imaginary parts of u_alpha = params**alpha * conj(z) phi_alpha.

    With ``params`` given the parts are numbers per node; otherwise they are
    polynomials in the real parameter components with node-array coefficients.
    """
    zc = np.conj(terms[0])
    R, I = {}, {}
    for i, a in enumerate(indices):
        if sum(a) == 0:
            continue
        w = zc * terms[i]
        if params is None:
            u = complex_monomial(degree, a) * w
            R[a], I[a] = u.real(), u.imag()
        else:
            u = np.prod(np.asarray(params, dtype=np.complex128) ** np.array(a)) * w
            R[a], I[a] = u.real, u.imag
    return R, I


def quadratic_bracket(R, I):
    """Second-order expansion of log|Phi_c| in reduced bracket form."""
    return R[(1,)] + R[(2,)] - 0.5 * R[(1,)] * R[(1,)] + 0.5 * I[(1,)] * I[(1,)]


CUBIC_TERM_LABELS = ("a1", "a0", "a1a0", "a1sq", "a0sq", "a1sqa0", "a1a0sq", "a1sqa0sq")


def cubic_brackets(R, I) -> dict:
    """Correction terms of -integral log|Phi_a| grouped by parameter monomial.

    Each entry is minus the corresponding coefficient of Re log(1 + sum u_alpha),
    written as products of real and imaginary parts of the u_alpha.
    """
    R10, R01, R20, R11, R02, R21, R12, R22 = (R[a] for a in
                                              [(1, 0), (0, 1), (2, 0), (1, 1), (0, 2), (2, 1), (1, 2), (2, 2)])
    I10, I01, I20, I11, I02, I21, I12 = (I[a] for a in
                                         [(1, 0), (0, 1), (2, 0), (1, 1), (0, 2), (2, 1), (1, 2)])
    return {
        "a1": -R10,
        "a0": -R01,
        "a1a0": -(R11 - R10 * R01 + I10 * I01),
        "a1sq": -(R20 - 0.5 * R10 * R10 + 0.5 * I10 * I10),
        "a0sq": -(R02 - 0.5 * R01 * R01 + 0.5 * I01 * I01),
        "a1sqa0": -(R21 - R10 * R11 + I01 * I20 + I10 * I11 - R01 * R20 + R10 * R10 * R01
                    - R01 * I10 * I10 - 2.0 * R10 * I01 * I10),
        "a1a0sq": -(R12 - R10 * I01 * I01 - R10 * R02 - R01 * R11 + I01 * I11 + R01 * R01 * R10
                    + I10 * I02 - 2.0 * R01 * I10 * I01),
        "a1sqa0sq": -(R22 - 0.5 * R11 * R11 + 0.5 * I11 * I11 - R10 * R12 + I10 * I12 - R01 * R21
                      + I01 * I21 - R20 * R02 + I20 * I02 + R10 * R10 * R02 + R01 * R01 * R20
                      + 2.0 * R10 * R01 * R11 - 2.0 * R10 * I10 * I02 - 2.0 * R10 * I01 * I11
                      - 2.0 * R01 * I10 * I11 - 2.0 * R01 * I01 * I20 - 2.0 * R11 * I10 * I01
                      - (R20 * I01 * I01 + R02 * I10 * I10)
                      - 1.5 * (R10 * R10 * R01 * R01 + I10 * I10 * I01 * I01)
                      + 1.5 * (R10 * R10 * I01 * I01 + R01 * R01 * I10 * I10)
                      + 6.0 * R10 * R01 * I10 * I01),
    }


def bracket_expansion_quadratic(c, measure: Measure, quad_config: QuadConfig | None = None,
                              series_config: SeriesConfig | None = None) -> float:
    """-log 2 minus the integrated second-order bracket for log|Phi_c|."""
    if abs(complex(c)) >= 1.0:
        raise OutOfFamily("|c| must be < 1")
    series = get_series(2, series_config or SeriesConfig())

    def F(th):
        R, I = _u_parts(2, series.terms(th), series.indices, [complex(c)])
        return quadratic_bracket(R, I)

    return _affine_integral(F, measure, quad_config, -math.log(2.0))[0]


def bracket_expansion_cubic_terms(a1, a0, measure: Measure, quad_config: QuadConfig | None = None,
                                series_config: SeriesConfig | None = None) -> dict[str, float]:
    """Each bracketed correction term integrated against the measure."""
    if abs(complex(a1)) >= 1.0 or abs(complex(a0)) >= 1.0:
        raise OutOfFamily("parameter moduli must be < 1")
    series = get_series(3, series_config or SeriesConfig())
    params = [complex(a1), complex(a0)]

    def F(th):
        R, I = _u_parts(3, series.terms(th), series.indices, params)
        t = cubic_brackets(R, I)
        return np.stack([np.asarray(t[k], dtype=float) for k in CUBIC_TERM_LABELS])

    vals = np.atleast_1d(_integrate(F, measure, quad_config).value)
    return {k: float(v) for k, v in zip(CUBIC_TERM_LABELS, vals)}


def bracket_expansion_cubic(a1, a0, measure: Measure, **kw) -> float:
    return -math.log(3.0) + math.fsum(bracket_expansion_cubic_terms(a1, a0, measure, **kw).values())


@dataclass(frozen=True)
class CubicModeGap:
    reduced_mode: float
    exact_mode: float
    gap: float
    reduced_first_order_a1: float
    exact_first_order_a1: float


def cubic_mode_gap(a1, a0, measure: Measure, quad_config: QuadConfig | None = None) -> CubicModeGap:
    """Reduced versus full cubic functional, plus their first-order a1_R coefficients."""
    pm = lyap_reduced_cubic(a1, a0, measure, quad_config=quad_config).value
    ex = lyap_conjugacy_cubic_exact(a1, a0, measure, quad_config=quad_config).value
    reduced_poly = functional_polynomial(3, measure, Mode.REDUCED, quad_config)
    exact_poly = functional_polynomial(3, measure, Mode.EXACT, quad_config)
    e = (1, 0, 0, 0)
    return CubicModeGap(pm, ex, ex - pm, float(reduced_poly.coefficient(e)), float(exact_poly.coefficient(e)))


# ----- coefficient extraction ------------------------------------------------

def _basis_for_report(degree: int) -> list[tuple[int, ...]]:
    if degree == 2:
        return fit_basis(2)
    return fit_basis(3, extended=True)


def _pointwise_polynomial(degree: int, terms: np.ndarray, indices, mode: Mode) -> RealParamPolynomial:
    """Correction polynomial (constant excluded) with node-array coefficients."""
    if mode is Mode.REDUCED:
        R, I = _u_parts(degree, terms, indices)
        if degree == 2:
            return -quadratic_bracket(R, I)
        total = RealParamPolynomial(variables_for(degree))
        for v in cubic_brackets(R, I).values():
            total = total + v
        return total
    zc = np.conj(terms[0])
    X = terms * zc
    X[0] = 0.0
    if degree == 3:
        # (3 Phi^2 + a1) / (3 z^2) - 1
        sq = series_product(indices, terms, terms)
        X = sq / terms[0] ** 2
        X[0] = 0.0
        X[indices.index((1, 0))] += 1.0 / (3.0 * terms[0] ** 2)
    logs = series_log1p(indices, X)
    poly = -real_parts_of_series(degree, indices, logs)
    return poly.truncated(lambda e: max(e) <= 2)


def _exact_series(degree: int) -> BoettcherSeries:
    # quadratic terms up to c^4 still feed real monomials of per-variable degree <= 2
    return get_series(2, SeriesConfig(order=4)) if degree == 2 else get_series(3)


def functional_polynomial(degree: int, measure: Measure, mode: Mode,
                          quad_config: QuadConfig | None = None) -> RealParamPolynomial:
    """Strategy (a): correction coefficients of the functional, integrated monomial by monomial."""
    mode = Mode(mode)
    if mode is Mode.REDUCED:
        series = get_series(degree, SeriesConfig(order=2) if degree == 2 else SeriesConfig())
        indices = list(series.indices)
    else:
        series = _exact_series(degree)
        indices = list(series.indices)
    basis = _basis_for_report(degree)

    def F(th):
        poly = _pointwise_polynomial(degree, series.terms(th), indices, mode)
        out = np.zeros((len(basis), len(th)))
        for i, e in enumerate(basis):
            out[i] = np.real(poly.coefficient(e))
        return out

    vals = _integrate(F, measure, quad_config).value
    return RealParamPolynomial(variables_for(degree), {e: float(v) for e, v in zip(basis, np.atleast_1d(vals))
                                                       if sum(e) > 0})


def functional_value(degree: int, params: Sequence[complex], measure: Measure, mode: Mode,
                     quad_config: QuadConfig | None = None) -> float:
    """The Lyapunov functional used for fitting, at one parameter point."""
    mode = Mode(mode)
    if degree == 2:
        if mode is Mode.REDUCED:
            return bracket_expansion_quadratic(params[0], measure, quad_config)
        return lyap_conjugacy_quadratic(params[0], measure, quad_config=quad_config, check_family=False).value
    if mode is Mode.REDUCED:
        return bracket_expansion_cubic(params[0], params[1], measure, quad_config=quad_config)
    return lyap_conjugacy_cubic_exact(params[0], params[1], measure, quad_config=quad_config,
                                      check_family=False).value


@dataclass(frozen=True)
class FitResult:
    polynomial: RealParamPolynomial
    constant: float
    condition_number: float
    residual_rms: float
    std_errors: dict


def _grid(degree: int, rho: float, per_axis: int | None) -> np.ndarray:
    nv = 2 * (degree - 1)
    if per_axis is None:
        per_axis = 5 if degree == 2 else 3
    axis = np.linspace(-rho, rho, per_axis)
    return np.array(list(itertools.product(axis, repeat=nv)))


def fit_functional(degree: int, measure: Measure, mode: Mode, rho: float = 0.02, basis=None,
                   per_axis: int | None = None, quad_config: QuadConfig | None = None,
                   values: np.ndarray | None = None, noise: float = 0.0) -> FitResult:
    """Strategy (b): least squares of the functional over a parameter grid of radius rho."""
    if basis is None:
        basis = fit_basis(degree)
    pts = _grid(degree, rho, per_axis)
    if values is None:
        values = np.array([functional_value(degree, [complex(p[2 * j], p[2 * j + 1]) for j in range(degree - 1)],
                                            measure, mode, quad_config) for p in pts])
    A = monomial_matrix(basis, pts / rho)
    cond = float(np.linalg.cond(A.T @ A))
    if not math.isfinite(cond) or cond > 1e10:
        raise IllConditionedFit(f"normal-equation condition number {cond:.3g} exceeds 1e10")
    coef, *_ = np.linalg.lstsq(A, values, rcond=None)
    resid = values - A @ coef
    rms = float(np.sqrt(np.mean(resid ** 2)))
    # per-coefficient standard error from the larger of the fit residual and the value noise
    sigma = max(rms, noise)
    se_raw = sigma * np.sqrt(np.diag(np.linalg.inv(A.T @ A)))
    scaled = {e: float(c) / rho ** sum(e) for e, c in zip(basis, coef)}
    std_errors = {e: float(s) / rho ** sum(e) for e, s in zip(basis, se_raw)}
    const = scaled.pop((0,) * len(basis[0]), 0.0)
    return FitResult(RealParamPolynomial(variables_for(degree), scaled), const, cond, rms, std_errors)


@dataclass
class TermComparison:
    monomial: str
    target: float
    pointwise: float
    fitted: float
    abs_deviation: float
    rel_deviation: float
    strategy_gap: float
    fit_std_error: float
    target_status: str
    consistency_status: str


@dataclass
class ExpansionReport:
    family: str
    mode: Mode
    measure: str
    computed: RealParamPolynomial
    fitted: RealParamPolynomial
    printed_target: RealParamPolynomial
    constant: float
    fitted_constant: float
    terms: list[TermComparison]
    fit_condition_number: float
    fit_residual_rms: float
    extended_fit_residual_rms: float | None
    max_extraneous_coefficient: float | None

    @property
    def target_ok(self) -> bool:
        """True when every term that has a printed target matches it (vacuous without targets)."""
        return all(t.target_status == "pass" for t in self.terms if t.target_status != "no-target")

    @property
    def consistent(self) -> bool:
        return all(t.consistency_status == "pass" for t in self.terms)

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "mode": self.mode.value,
            "measure": self.measure,
            "constant": self.constant,
            "fitted_constant": self.fitted_constant,
            "terms": [t.__dict__ for t in self.terms],
            "fit_condition_number": self.fit_condition_number,
            "fit_residual_rms": self.fit_residual_rms,
            "extended_fit_residual_rms": self.extended_fit_residual_rms,
            "max_extraneous_coefficient": self.max_extraneous_coefficient,
            "target_ok": self.target_ok,
            "strategies_consistent": self.consistent,
        }


def _describe(measure: Measure) -> str:
    if isinstance(measure, PointMass):
        return f"point mass at angle {measure.angle:g}"
    return "bernoulli(" + ",".join(f"{p:g}" for p in measure.weights.p) + ")"


def extract_coefficients(family: str, measure: Measure, mode: Mode = Mode.REDUCED,
                         fit_radius: float = 0.02, rel_tol: float = 0.01, abs_tol: float = 1e-6,
                         target_rel_tol: float | None = None, quad_config: QuadConfig | None = None,
                         per_axis: int | None = None) -> ExpansionReport:
    """Monomial coefficients of the Lyapunov functional by two strategies, compared to printed targets.

    ``measure`` is a :class:`PointMass` for the point-mass limit or a
    :class:`CircleMeasure`. Targets are the printed point-mass tables when the
    point mass sits at angle 0, and the zero polynomial for the uniform measure.
    """
    degree = {"quad": 2, "quadratic": 2, "cubic": 3}.get(family)
    if degree is None:
        raise InputError(f"unknown family {family!r}")
    if fit_radius > 0.05:
        raise InputError("fit radius must be <= 0.05")
    if measure.d != degree:
        raise InputError("measure alphabet does not match the family degree")
    mode = Mode(mode)
    target_rel_tol = rel_tol if target_rel_tol is None else target_rel_tol
    dirac = isinstance(measure, PointMass)
    if not dirac and not measure.weights.is_uniform:
        target = None
    else:
        target = target_polynomial(degree, dirac)
    computed = functional_polynomial(degree, measure, mode, quad_config)
    base = -math.log(degree)
    grid_pts = _grid(degree, fit_radius, per_axis)
    values = np.array([functional_value(degree, [complex(p[2 * j], p[2 * j + 1]) for j in range(degree - 1)],
                                        measure, mode, quad_config) for p in grid_pts])
    noise = 0.0 if dirac else (quad_config or QuadConfig()).tol
    fit = fit_functional(degree, measure, mode, fit_radius, per_axis=per_axis, values=values, noise=noise)
    ext_rms = ext_max = None
    if degree == 3:
        ext = fit_functional(degree, measure, mode, fit_radius, basis=fit_basis(3, extended=True),
                             per_axis=per_axis, values=values)
        ext_rms = ext.residual_rms
        printed_keys = set(fit_basis(3))
        extra = [abs(c) for e, c in ext.polynomial.terms.items() if e not in printed_keys]
        ext_max = max(extra, default=0.0)
    variables = variables_for(degree)
    keys = set(computed.terms) | set(fit.polynomial.terms)
    if target is not None:
        keys |= set(target.terms)
    rows = []
    for e in sorted(keys, key=lambda e: (sum(e), tuple(-x for x in e))):
        t = float(target.coefficient(e)) if target is not None else float("nan")
        a = float(computed.coefficient(e))
        b = float(fit.polynomial.coefficient(e))
        dev = abs(a - t) if target is not None else float("nan")
        rel = dev / abs(t) if target is not None and t != 0 else float("nan")
        gap = abs(a - b)
        t_ok = target is not None and dev <= target_rel_tol * abs(t) + abs_tol
        c_ok = gap <= rel_tol * max(abs(a), abs(b)) + abs_tol + 3.0 * fit.std_errors.get(e, 0.0)
        rows.append(TermComparison(monomial_label(variables, e), t, a, b, dev, rel, gap,
                                   fit.std_errors.get(e, 0.0),
                                   "pass" if t_ok else ("flagged" if target is not None else "no-target"),
                                   "pass" if c_ok else "fail"))
    return ExpansionReport(family="quad" if degree == 2 else "cubic", mode=mode, measure=_describe(measure),
                           computed=computed, fitted=fit.polynomial,
                           printed_target=target if target is not None else RealParamPolynomial(variables),
                           constant=base, fitted_constant=fit.constant, terms=rows,
                           fit_condition_number=fit.condition_number, fit_residual_rms=fit.residual_rms,
                           extended_fit_residual_rms=ext_rms, max_extraneous_coefficient=ext_max)


def dirac_sweep(estimator: Callable[[Measure], float], d: int, which_symbol: int = 1,
                eps_values: Sequence[float] = (1e-2, 1e-3, 1e-4)) -> list[tuple[float, float]]:
    """Estimator values along weights (1 - eps on one symbol) as eps decreases."""
    return [(eps, estimator(CircleMeasure(BernoulliWeights.near_dirac(d, eps, which_symbol))))
            for eps in eps_values]
