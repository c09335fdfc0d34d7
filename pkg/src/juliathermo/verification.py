"""Acceptance checks shared by ``juliathermo verify`` and the test-suite.

Each criterion returns a list of :class:`Check` records. A check is
``pass``, ``fail`` or ``flagged``; flagged rows are reported but never
counted as failures (they mark printed reduced-mode cubic coefficients that
disagree with an independent derivation).
"""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from . import __version__, kernels
from .coding_measure import (
    BernoulliWeights,
    CircleMeasure,
    PointMass,
    Word,
    integrate,
    sample_angles,
)
from .conjugacy import BoettcherSeries, functional_equation_defect, residual
from .lyapunov import (
    Mode,
    bracket_expansion_quadratic,
    cubic_mode_gap,
    extract_coefficients,
    lyap_birkhoff_mc,
    lyap_conjugacy_cubic_exact,
    lyap_conjugacy_quadratic,
    lyap_dirac_closed_form,
)
from .poly_core import cubic_map, evaluate, quadratic_map
from .thermo import (
    HessianMode,
    PotentialSpec,
    hausdorff_dimension,
    hessian_report,
    periodic_points,
    pressure_at,
    pressure_derivative_check,
    pressure_limit,
)

LOG2, LOG3 = math.log(2.0), math.log(3.0)
MC_FLOOR = 1e-12

# where a target value comes from
PUBLISHED, DERIVED, TRIVIAL = "published", "derived", "trivial"


@dataclass
class Check:
    id: str
    description: str
    target: float | str | None
    computed: float | str | None
    tolerance: float | None
    status: str
    basis: str

    @classmethod
    def within(cls, id, description, target, computed, tol, basis=DERIVED) -> "Check":
        ok = math.isfinite(computed) and abs(computed - target) <= tol
        return cls(id, description, float(target), float(computed), float(tol), "pass" if ok else "fail", basis)

    @classmethod
    def truth(cls, id, description, ok: bool, computed=None, basis=DERIVED, target=None, tol=None) -> "Check":
        return cls(id, description, target, computed, tol, "pass" if ok else "fail", basis)


@dataclass
class CriterionResult:
    number: int
    title: str
    checks: list[Check]
    seconds: float = field(default=0.0, compare=False)

    @property
    def passed(self) -> bool:
        return all(c.status != "fail" for c in self.checks)

    def to_dict(self) -> dict:
        return {
            "criterion": self.number,
            "title": self.title,
            "status": "pass" if self.passed else "fail",
            "flagged": sum(c.status == "flagged" for c in self.checks),
            "checks": [asdict(c) for c in self.checks],
        }


def _mc_tol(stderr: float, extra: float = 0.0) -> float:
    return 3.0 * (max(stderr, MC_FLOOR) + extra)


def criterion_1(seed: int) -> list[Check]:
    checks = []
    uniform2 = CircleMeasure(BernoulliWeights.uniform(2))
    for c in (0j, 0.05 + 0j, 0.05j, 0.03 + 0.04j):
        q = lyap_conjugacy_quadratic(c, uniform2)
        checks.append(Check.within(f"quad-conj-{c}", f"conjugacy quadrature, c={c}, uniform weights",
                                   -LOG2, q.value, 1e-6, PUBLISHED))
        m = lyap_birkhoff_mc(quadratic_map(c), uniform2, n_samples=32, orbit_length=10000, burn_in=500, seed=seed)
        checks.append(Check.within(f"quad-mc-{c}", f"Birkhoff Monte Carlo, c={c}, uniform weights",
                                   -LOG2, m.value, _mc_tol(m.error_estimate), PUBLISHED))
    uniform3 = CircleMeasure(BernoulliWeights.uniform(3))
    q = lyap_conjugacy_cubic_exact(0, 0, uniform3)
    checks.append(Check.within("cubic-conj-0", "cubic conjugacy quadrature at (0,0)", -LOG3, q.value, 1e-6, PUBLISHED))
    m = lyap_birkhoff_mc(cubic_map(0, 0), uniform3, n_samples=32, orbit_length=10000, burn_in=500, seed=seed)
    checks.append(Check.within("cubic-mc-0", "cubic Birkhoff Monte Carlo at (0,0)", -LOG3, m.value,
                               _mc_tol(m.error_estimate), PUBLISHED))
    return checks


def criterion_2(seed: int) -> list[Check]:
    checks = []
    near = CircleMeasure(BernoulliWeights.near_dirac(2, 1e-4))
    axis = (-0.035, 0.0, 0.035)
    for x in axis:
        for y in axis:
            c = complex(x, y)
            val = bracket_expansion_quadratic(c, near)
            oracle = lyap_dirac_closed_form(quadratic_map(c)).value
            checks.append(Check.within(f"dirac-grid-{c}", f"reduced expansion vs -log|2 beta(c)| at c={c}",
                                       oracle, val, 5e-3, DERIVED))
    report = extract_coefficients("quad", PointMass.dirac(2), Mode.REDUCED, rel_tol=0.02, target_rel_tol=0.02)
    for t in report.terms:
        if t.target_status == "no-target" or t.target == 0.0 and abs(t.pointwise) < 1e-6:
            continue
        for name, v in (("pointwise", t.pointwise), ("least-squares", t.fitted)):
            checks.append(Check.within(f"coef-{name}-{t.monomial}", f"{name} coefficient of {t.monomial}",
                                       t.target, v, 0.02 * abs(t.target) + 1e-6, PUBLISHED))
    return checks


def criterion_3(seed: int) -> list[Check]:
    report = extract_coefficients("cubic", PointMass.dirac(3), Mode.REDUCED, rel_tol=0.01)
    checks = []
    rows = {t.monomial: t for t in report.terms}
    for m in ("a1_R", "a0_R"):
        checks.append(Check.within(f"linear-{m}", f"first-order coefficient of {m}", 0.5, rows[m].pointwise,
                                   0.005, DERIVED))
    for t in report.terms:
        if t.target_status == "no-target":
            continue
        # agreement with printed values is informative only
        checks.append(Check(f"printed-{t.monomial}", f"pointwise coefficient of {t.monomial} vs printed value",
                            t.target, t.pointwise, 0.01 * abs(t.target),
                            "pass" if t.target_status == "pass" else "flagged", PUBLISHED))
    for t in report.terms:
        tol = 0.01 * max(abs(t.pointwise), abs(t.fitted)) + 1e-6 + 3.0 * t.fit_std_error
        checks.append(Check(f"consistency-{t.monomial}", f"pointwise vs least-squares coefficient of {t.monomial}",
                            t.pointwise, t.fitted, tol, t.consistency_status, DERIVED))
    return checks


def criterion_4(seed: int) -> list[Check]:
    checks = []
    a1 = a0 = 0.05
    P = cubic_map(a1, a0)
    for w in ((1 / 3, 1 / 3, 1 / 3), (0.2, 0.3, 0.5), (0.6, 0.3, 0.1)):
        measure = CircleMeasure(BernoulliWeights.normalized(w))
        q = lyap_conjugacy_cubic_exact(a1, a0, measure)
        m = lyap_birkhoff_mc(P, measure, n_samples=32, orbit_length=10000, burn_in=500, seed=seed)
        label = ",".join(f"{x:.3g}" for x in w)
        checks.append(Check.within(f"exact-vs-mc-{label}", f"exact cubic quadrature vs Monte Carlo, weights {label}",
                                   q.value, m.value, _mc_tol(m.error_estimate, q.error_estimate), DERIVED))
    gap = cubic_mode_gap(0.05, 0.0, PointMass.dirac(3))
    checks.append(Check("mode-gap-value", "exact minus reduced cubic functional at a=(0.05,0), point mass",
                        None, gap.gap, None, "pass" if abs(gap.gap) > 0 else "fail", DERIVED))
    first = gap.exact_first_order_a1 - gap.reduced_first_order_a1
    checks.append(Check("mode-gap-first-order", "first-order a1_R coefficient, exact minus reduced",
                        None, first, 1e-3, "pass" if abs(first) > 1e-3 else "fail", DERIVED))
    return checks


def criterion_5(seed: int) -> list[Check]:
    checks = []
    for P, d in ((quadratic_map(0), 2),):
        worst = 0.0
        for n in range(1, 13):
            for s in (0.0, 0.5, 1.0, 1.5, 2.0):
                exact = (math.log(d ** n - 1) - n * s * math.log(d)) / n
                worst = max(worst, abs(pressure_at(P, PotentialSpec.f_s(s), n).value - exact))
        checks.append(Check("closed-form", "max deviation from (1/n) log((2^n-1) 2^{-ns}), n<=12",
                            0.0, worst, 1e-12, "pass" if worst <= 1e-12 else "fail", DERIVED))
    pl = pressure_limit(quadratic_map(0), PotentialSpec.f_s(1.0))
    checks.append(Check.within("limit-s1", "extrapolated pressure at s=1, c=0", 0.0, pl.value, 1e-6, DERIVED))
    dq = hausdorff_dimension(quadratic_map(0))
    checks.append(Check.within("dim-quad-0", "Bowen root at c=0", 1.0, dq.s_star, 1e-6, PUBLISHED))
    dc = hausdorff_dimension(cubic_map(0, 0))
    checks.append(Check.within("dim-cubic-0", "Bowen root for the cubic at (0,0)", 1.0, dc.s_star, 1e-6, TRIVIAL))
    return checks


def criterion_6(seed: int) -> list[Check]:
    checks = []
    for c in (0.05, 0.1):
        P = quadratic_map(c)
        d1 = hausdorff_dimension(P, n_max=12).s_star
        d2 = hausdorff_dimension(P, n_max=14).s_star
        checks.append(Check.within(f"depth-{c}", f"Bowen root at n_max=12 vs 14, c={c}", d1, d2, 1e-3, DERIVED))
        checks.append(Check.truth(f"above-one-{c}", f"Bowen root exceeds 1, c={c}", d2 > 1.0, d2, target=1.0))
    return checks


def criterion_7(seed: int) -> list[Check]:
    checks = []
    for c in (0.0, 0.05, 0.1):
        for w in ((0.5, 0.5), (0.3, 0.7), (0.7, 0.3)):
            r = pressure_derivative_check(quadratic_map(c), BernoulliWeights(w))
            checks.append(Check.within(f"derivative-{c}-{w[0]}", f"pressure derivative vs exponent, c={c}, p={w}",
                                       r.rhs, r.lhs, 1e-3, DERIVED))
    return checks


def criterion_8(seed: int) -> list[Check]:
    checks = []
    uni = hessian_report("quad", BernoulliWeights.uniform(2), mode=HessianMode.REDUCED)
    checks.append(Check.within("det-uniform", "Hessian determinant, uniform weights", 0.0, uni.det, 1e-3, PUBLISHED))
    near = BernoulliWeights.near_dirac(2, 1e-4)
    for mode in (HessianMode.REDUCED, HessianMode.DIRAC):
        r = hessian_report("quad", near, mode=mode)
        checks.append(Check.within(f"det-{mode.value}", f"Hessian determinant near the point mass, {mode.value}",
                                   -9.0, r.det, 0.45, PUBLISHED))
        checks.append(Check.within(f"harmonic-{mode.value}", f"|d2/dcR2 + d2/dcI2|, {mode.value}",
                                   0.0, r.harmonicity_gap, 1e-2, PUBLISHED))
    checks.append(Check.within("harmonic-uniform", "|d2/dcR2 + d2/dcI2|, uniform weights",
                               0.0, uni.harmonicity_gap, 1e-2, PUBLISHED))
    return checks


def criterion_9(seed: int) -> list[Check]:
    checks = []
    r = residual(BoettcherSeries(2), [0.05], n_samples=256, seed=seed)
    checks.append(Check.within("residual-quad", "sup |Phi(z^2) - P(Phi(z))|, c=0.05, order 6", 0.0,
                               r.sup_residual, 1e-6))
    r = residual(BoettcherSeries(3, order=5, cap=5), [0.05, 0.05], n_samples=256, seed=seed)
    checks.append(Check.within("residual-cubic", "sup |Phi(z^3) - P(Phi(z))|, a=(0.05,0.05), order 5", 0.0,
                               r.sup_residual, 1e-5))
    theta = np.random.default_rng(seed).random(64)
    for d in (2, 3):
        defect = float(np.max(functional_equation_defect(BoettcherSeries(d), theta)))
        checks.append(Check.within(f"coefficient-equation-{d}", f"coefficient recursion defect, degree {d}",
                                   0.0, defect, 1e-9))
    for P, n in ((quadratic_map(0.1), 8), (quadratic_map(0.05j), 10), (cubic_map(0.05, 0.05j), 5)):
        orbits = periodic_points(P, n)
        d = P.degree
        count = d ** n - 1
        checks.append(Check.truth(f"fix-count-{P.params}-{n}", f"number of period-{n} points",
                                  len(orbits) == count, len(orbits), target=count))
        pos = {int(j): i for i, j in enumerate(orbits.angle_indices)}
        image = np.array([pos[(d * int(j)) % count] for j in orbits.angle_indices])
        shift_err = float(np.max(np.abs(evaluate(P, orbits.points) - orbits.points[image])))
        checks.append(Check.within(f"shift-{P.params}-{n}", "P maps point j to point d*j mod (d^n-1)",
                                   0.0, shift_err, 1e-9))
        words = orbits.itineraries[:5]
        ok = all(Word.from_index((d * int(j)) % count, n, d) == w.shift()
                 for j, w in zip(orbits.angle_indices[:5], words))
        checks.append(Check.truth(f"itinerary-{P.params}-{n}", "itinerary of the image is the shifted word", ok))
    for w in ((0.5, 0.5), (0.3, 0.7), (0.2, 0.3, 0.5)):
        m = CircleMeasure(BernoulliWeights(w))
        total = integrate(lambda th: np.ones_like(th), m).value
        checks.append(Check.within(f"normalization-{w}", "integral of 1", 1.0, total, 1e-14, TRIVIAL))
        n = 20000
        ang = sample_angles(m, n, 40, seed)
        freq = np.bincount(np.floor(ang * len(w)).astype(int), minlength=len(w)) / n
        z = float(np.max(np.abs(freq - np.array(w)) / np.sqrt(np.array(w) * (1 - np.array(w)) / n)))
        checks.append(Check.within(f"cylinder-freq-{w}", "first-symbol frequency, max z-score", 0.0, z, 5.0))
    from .cli import render_command
    argv = ["pressure", "--family", "quad", "--c", "0.05", "--s", "1", "--n", "6"]
    checks.append(Check.truth("cli-determinism", "identical CLI output on repeat",
                              render_command(argv) == render_command(argv), basis=TRIVIAL))
    return checks


CRITERIA: dict[int, tuple[str, Callable[[int], list[Check]]]] = {
    1: ("uniform-measure constants", criterion_1),
    2: ("quadratic point-mass expansion", criterion_2),
    3: ("cubic reduced-mode coefficients", criterion_3),
    4: ("exact cubic functional vs Monte Carlo", criterion_4),
    5: ("pressure closed forms", criterion_5),
    6: ("Bowen root stability", criterion_6),
    7: ("pressure derivative identity", criterion_7),
    8: ("Hessian observations", criterion_8),
    9: ("structural invariants", criterion_9),
}


def run_criterion(number: int, seed: int = 42) -> CriterionResult:
    title, fn = CRITERIA[number]
    t0 = time.perf_counter()
    checks = fn(seed)
    return CriterionResult(number, title, checks, time.perf_counter() - t0)


def parse_suite(suite: str) -> list[int]:
    if suite == "all":
        return sorted(CRITERIA)
    out = []
    for part in suite.split(","):
        k = int(part)
        if k not in CRITERIA:
            raise KeyError(part)
        out.append(k)
    return out


def run_suite(suite: str = "all", seed: int = 42) -> tuple[dict, dict]:
    """Run the chosen criteria; returns (deterministic report, timing sidecar)."""
    results = [run_criterion(k, seed) for k in parse_suite(suite)]
    report = {
        "suite": suite,
        "passed": all(r.passed for r in results),
        "criteria": [r.to_dict() for r in results],
        "environment": {"version": __version__, "seed": seed, "backend": kernels.BACKEND},
    }
    timing = {str(r.number): round(r.seconds, 3) for r in results}
    return report, timing
