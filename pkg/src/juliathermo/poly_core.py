"""Monic centered polynomials, critical orbits and Julia point clouds."""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import BranchFailure, InputError, NewtonDivergence, NumericalError, ZeroLeadingCoefficient


def _as_complex(x) -> complex:
    z = complex(x)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise InputError(f"non-finite complex value {x!r}")
    return z


@dataclass(frozen=True)
class MonicCenteredPolynomial:
    """z**d + a_{d-2} z**(d-2) + ... + a_0.

    ``lower_coeffs`` is ordered ``[a_{d-2}, ..., a_1, a_0]``; for the quadratic
    family that is ``(c,)`` and for the cubic family ``(a1, a0)``.
    """

    degree: int
    lower_coeffs: tuple[complex, ...]

    def __post_init__(self):
        if int(self.degree) != self.degree or self.degree < 2:
            raise InputError("degree must be an integer >= 2")
        coeffs = tuple(_as_complex(a) for a in self.lower_coeffs)
        if len(coeffs) != self.degree - 1:
            raise InputError(f"expected {self.degree - 1} lower coefficients, got {len(coeffs)}")
        object.__setattr__(self, "degree", int(self.degree))
        object.__setattr__(self, "lower_coeffs", coeffs)

    @property
    def family(self) -> str | None:
        return {2: "quad", 3: "cubic"}.get(self.degree)

    @property
    def params(self) -> tuple[complex, ...]:
        return self.lower_coeffs

    @property
    def param_powers(self) -> tuple[int, ...]:
        """Power of z multiplying each entry of ``lower_coeffs``."""
        return tuple(range(self.degree - 2, -1, -1))

    def coefficients(self) -> np.ndarray:
        """Coefficients ordered from z**0 up to z**d."""
        out = np.zeros(self.degree + 1, dtype=np.complex128)
        out[self.degree] = 1.0
        for k, a in zip(self.param_powers, self.lower_coeffs):
            out[k] = a
        return out

    def __call__(self, z):
        return evaluate(self, z)


def quadratic_map(c) -> MonicCenteredPolynomial:
    return MonicCenteredPolynomial(2, (c,))


def cubic_map(a1, a0) -> MonicCenteredPolynomial:
    return MonicCenteredPolynomial(3, (a1, a0))


def evaluate(P: MonicCenteredPolynomial, z):
    """Horner evaluation; accepts scalars or numpy arrays."""
    coef = P.coefficients()
    acc = np.ones_like(z, dtype=np.complex128) if isinstance(z, np.ndarray) else 1.0 + 0j
    for a in coef[-2::-1]:
        acc = acc * z + a
    return acc


def derivative_at(P: MonicCenteredPolynomial, z):
    coef = P.coefficients()
    d = P.degree
    acc = np.full_like(z, d, dtype=np.complex128) if isinstance(z, np.ndarray) else complex(d)
    for k in range(d - 1, 0, -1):
        acc = acc * z + k * coef[k]
    return acc


def escape_radius(P: MonicCenteredPolynomial) -> float:
    return max(2.0, 1.0 + sum(abs(a) for a in P.lower_coeffs))


@dataclass(frozen=True)
class AffineMap:
    """T(z) = scale * z + shift."""

    scale: complex
    shift: complex

    def __call__(self, z):
        return self.scale * z + self.shift

    def inverse(self, w):
        return (w - self.shift) / self.scale


def _compose_affine(coeffs_high_first: np.ndarray, scale: complex, shift: complex) -> np.ndarray:
    """Coefficients (highest first) of Q(scale*z + shift)."""
    lin = np.array([scale, shift], dtype=np.complex128)
    out = np.zeros(1, dtype=np.complex128)
    for b in coeffs_high_first:
        out = np.polymul(out, lin)
        out[-1] += b
    return out


def normalize(general_coeffs: Sequence[complex], degree: int) -> tuple[MonicCenteredPolynomial, AffineMap]:
    """Monic centered form of a degree-``degree`` polynomial given highest-first.

    Returns ``(P, T)`` with ``T^{-1}(Q(T(z))) == P(z)``.
    """
    b = np.array([_as_complex(x) for x in general_coeffs], dtype=np.complex128)
    if len(b) != degree + 1:
        raise InputError(f"expected {degree + 1} coefficients for degree {degree}")
    if b[0] == 0:
        raise ZeroLeadingCoefficient("leading coefficient is zero")
    d = degree
    scale = complex(b[0]) ** (-1.0 / (d - 1))
    shift = -complex(b[1]) / (d * complex(b[0]))
    comp = _compose_affine(b, scale, shift)
    comp[-1] -= shift
    comp /= scale
    # comp[0] == 1 and comp[1] == 0 up to rounding; both are structural
    P = MonicCenteredPolynomial(d, tuple(complex(x) for x in comp[2:]))
    T = AffineMap(scale, shift)
    zs = np.exp(2j * np.pi * np.arange(16) / 16) * 1.1
    err = np.abs(T.inverse(np.polyval(b, T(zs))) - evaluate(P, zs))
    if np.max(err) >= 1e-10 * max(1.0, float(np.max(np.abs(evaluate(P, zs))))):
        raise NumericalError("normalization failed its pointwise conjugacy check")
    return P, T


def denormalize(P: MonicCenteredPolynomial, T: AffineMap) -> np.ndarray:
    """Highest-first coefficients of T o P o T^{-1}."""
    high = P.coefficients()[::-1]
    inv_scale = 1.0 / T.scale
    comp = _compose_affine(high, inv_scale, -T.shift * inv_scale)
    comp = comp * T.scale
    comp[-1] += T.shift
    return comp


def critical_points(P: MonicCenteredPolynomial) -> list[complex]:
    """Roots of P' with multiplicity."""
    d = P.degree
    if d == 2:
        return [0j]
    if d == 3:
        r = cmath.sqrt(-P.lower_coeffs[0] / 3.0)
        return [r, -r]
    dcoef = np.polyder(P.coefficients()[::-1])
    return [complex(r) for r in np.roots(dcoef)]


class Verdict(str, enum.Enum):
    HYPERBOLIC_CONNECTED = "HyperbolicConnected"
    ESCAPING = "Escaping"
    UNDECIDED = "Undecided"


@dataclass(frozen=True)
class HyperbolicityCertificate:
    verdict: Verdict
    attracting_cycle_period: int | None
    expansion_constant_lambda: float | None
    expansion_prefactor_C: float | None
    iterations_used: int


def _checkpoint(t: int) -> bool:
    # reference points are taken at iterations independent of the budget, so a
    # verdict reached at some budget is reached identically at every larger one
    return (t & (t - 1)) == 0 if t <= 1024 else t % 1024 == 0


def _orbit_event(P, z0: complex, max_iter: int, R: float, tol: float):
    """Follow one critical orbit; returns (kind, period, iterations)."""
    high = [complex(a) for a in P.coefficients()[::-1]]

    def step(w: complex) -> complex:
        acc = 0j
        for a in high:
            acc = acc * w + a
        return acc

    z = z0
    ref = None
    ref_t = 0
    for t in range(1, max_iter + 1):
        z = step(z)
        if abs(z) > R:
            return "escape", None, t
        if ref is not None and abs(z - ref) < tol:
            period = t - ref_t
            w = ref
            for p in range(1, period + 1):
                w = step(w)
                if abs(w - ref) < tol:
                    period = p
                    break
            mult = 1.0 + 0j
            w = ref
            for _ in range(period):
                mult *= derivative_at(P, w)
                w = evaluate(P, w)
            if abs(mult) < 1.0:
                return "cycle", period, t
        if _checkpoint(t):
            ref, ref_t = z, t
    return "undecided", None, max_iter


def _repelling_fixed_modulus(P) -> float | None:
    coef = P.coefficients()[::-1].copy()
    coef[-2] -= 1.0
    mods = [abs(derivative_at(P, complex(r))) for r in np.roots(coef)]
    rep = [m for m in mods if m > 1.0]
    return float(min(rep)) if rep else None


@lru_cache(maxsize=256)
def classify_hyperbolic(P: MonicCenteredPolynomial, max_iter: int = 100000,
                        escape_radius_override: float | None = None,
                        tol: float = 1e-9) -> HyperbolicityCertificate:
    """Heuristic hyperbolicity verdict from the critical orbits."""
    if max_iter < 1:
        raise InputError("max_iter must be >= 1")
    R = escape_radius_override if escape_radius_override is not None else escape_radius(P)
    events = [_orbit_event(P, c, max_iter, R, tol) for c in critical_points(P)]
    used = max(e[2] for e in events)
    if any(e[0] == "escape" for e in events):
        return HyperbolicityCertificate(Verdict.ESCAPING, None, None, None, used)
    if all(e[0] == "cycle" for e in events):
        period = min(e[1] for e in events)
        lam = _repelling_fixed_modulus(P)
        return HyperbolicityCertificate(Verdict.HYPERBOLIC_CONNECTED, period, lam,
                                        1.0 if lam is not None else None, used)
    return HyperbolicityCertificate(Verdict.UNDECIDED, None, None, None, used)


def in_family(P: MonicCenteredPolynomial) -> bool:
    """Membership in the quadratic or cubic parameter family used throughout."""
    if P.degree not in (2, 3):
        raise InputError("family membership is defined for degree 2 and 3 only")
    if any(abs(a) >= 1.0 for a in P.lower_coeffs):
        return False
    return classify_hyperbolic(P).verdict is Verdict.HYPERBOLIC_CONNECTED


def newton_fixed_point(P: MonicCenteredPolynomial, seed: complex, tol: float = 1e-15,
                       maxit: int = 100) -> tuple[complex, float]:
    """Solve P(z) = z from ``seed``; returns (z, |P(z) - z|)."""
    z = complex(seed)
    for _ in range(maxit):
        g = evaluate(P, z) - z
        dg = derivative_at(P, z) - 1.0
        if dg == 0:
            break
        step = g / dg
        z -= step
        if abs(step) <= tol * (1.0 + abs(z)):
            return z, abs(evaluate(P, z) - z)
    raise NewtonDivergence(f"fixed-point Newton from {seed} did not converge")


def iterate_coefficients(P: MonicCenteredPolynomial, n: int) -> np.ndarray:
    """Highest-first coefficients of the n-th iterate."""
    base = P.coefficients()[::-1]
    out = np.array([1.0, 0.0], dtype=np.complex128)
    for _ in range(n):
        acc = np.zeros(1, dtype=np.complex128)
        for b in base:
            acc = np.polymul(acc, out)
            acc[-1] += b
        out = acc
    return out


@dataclass(frozen=True)
class JuliaCloud:
    points: np.ndarray
    generator_seed: int
    method: str = "InverseIteration"


def _inverse_branches(P: MonicCenteredPolynomial, z: complex) -> np.ndarray:
    if P.degree == 2:
        r = cmath.sqrt(z - P.lower_coeffs[0])
        return np.array([r, -r])
    coef = P.coefficients()[::-1].copy()
    coef[-1] -= z
    return np.roots(coef)


def julia_cloud(P: MonicCenteredPolynomial, n_points: int, seed: int, transient: int = 100) -> JuliaCloud:
    """Random backward orbit started at the repelling fixed point reached from z=1."""
    rng = np.random.default_rng(seed)
    z, _ = newton_fixed_point(P, 1.0)
    R = escape_radius(P)
    choices = rng.integers(0, P.degree, size=n_points + transient)
    pts = np.empty(n_points, dtype=np.complex128)
    for t, k in enumerate(choices):
        roots = _inverse_branches(P, z)
        if len(roots) != P.degree or not np.all(np.isfinite(roots)):
            raise BranchFailure(f"inverse branches unavailable at {z}")
        z = complex(roots[k])
        if abs(evaluate(P, z)) > R:
            raise BranchFailure(f"backward orbit left the escape disc at {z}")
        if t >= transient:
            pts[t - transient] = z
    return JuliaCloud(pts, int(seed))
