"""Polynomials in the real and imaginary parts of the family parameters.

Coefficients may be scalars or numpy arrays (one entry per circle node), so
the same algebra serves pointwise evaluation at a single angle and quadrature
over many nodes.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

QUAD_VARS = ("c_R", "c_I")
CUBIC_VARS = ("a1_R", "a1_I", "a0_R", "a0_I")


def variables_for(degree: int) -> tuple[str, ...]:
    return {2: QUAD_VARS, 3: CUBIC_VARS}[degree]


def _is_zero(c) -> bool:
    return bool(np.all(np.asarray(c) == 0))


class RealParamPolynomial:
    """Sparse polynomial keyed by exponent tuples over named real variables."""

    __slots__ = ("variables", "terms")

    def __init__(self, variables: Sequence[str], terms: Mapping[tuple[int, ...], object] | None = None):
        self.variables = tuple(variables)
        self.terms: dict[tuple[int, ...], object] = {}
        for e, c in (terms or {}).items():
            e = tuple(int(x) for x in e)
            if len(e) != len(self.variables):
                raise ValueError("exponent length does not match variables")
            if not _is_zero(c):
                self.terms[e] = c

    @classmethod
    def constant(cls, variables, value) -> "RealParamPolynomial":
        return cls(variables, {(0,) * len(variables): value})

    @classmethod
    def variable(cls, variables, name: str) -> "RealParamPolynomial":
        e = [0] * len(variables)
        e[list(variables).index(name)] = 1
        return cls(variables, {tuple(e): 1.0})

    @classmethod
    def complex_parameter(cls, degree: int, j: int) -> "RealParamPolynomial":
        """The j-th complex parameter written as x + i y in its real components."""
        v = variables_for(degree)
        ex, ey = [0] * len(v), [0] * len(v)
        ex[2 * j] = 1
        ey[2 * j + 1] = 1
        return cls(v, {tuple(ex): 1.0, tuple(ey): 1j})

    def _coerce(self, other) -> "RealParamPolynomial":
        if isinstance(other, RealParamPolynomial):
            if other.variables != self.variables:
                raise ValueError("variable sets differ")
            return other
        return RealParamPolynomial.constant(self.variables, other)

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out[e] + c if e in out else c
        return RealParamPolynomial(self.variables, out)

    __radd__ = __add__

    def __neg__(self):
        return RealParamPolynomial(self.variables, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, RealParamPolynomial):
            return RealParamPolynomial(self.variables, {e: c * other for e, c in self.terms.items()})
        other = self._coerce(other)
        out: dict = {}
        for (e1, c1), (e2, c2) in itertools.product(self.terms.items(), other.terms.items()):
            e = tuple(a + b for a, b in zip(e1, e2))
            out[e] = out[e] + c1 * c2 if e in out else c1 * c2
        return RealParamPolynomial(self.variables, out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        out = RealParamPolynomial.constant(self.variables, 1.0)
        for _ in range(n):
            out = out * self
        return out

    def real(self) -> "RealParamPolynomial":
        return RealParamPolynomial(self.variables, {e: np.real(c) for e, c in self.terms.items()})

    def imag(self) -> "RealParamPolynomial":
        return RealParamPolynomial(self.variables, {e: np.imag(c) for e, c in self.terms.items()})

    def map_coefficients(self, fn) -> "RealParamPolynomial":
        return RealParamPolynomial(self.variables, {e: fn(c) for e, c in self.terms.items()})

    def max_variable_degree(self) -> int:
        return max((max(e) for e in self.terms), default=0)

    def truncated(self, keep) -> "RealParamPolynomial":
        """Keep only exponents for which ``keep(exponents)`` is true."""
        return RealParamPolynomial(self.variables, {e: c for e, c in self.terms.items() if keep(e)})

    def coefficient(self, exps: Sequence[int]):
        return self.terms.get(tuple(exps), 0.0)

    def evaluate(self, values: Sequence[float]):
        values = list(values)
        total = 0.0
        for e, c in self.terms.items():
            total = total + c * np.prod([v ** k for v, k in zip(values, e)])
        return total

    def label(self, exps: Sequence[int]) -> str:
        return monomial_label(self.variables, exps)

    def as_dict(self, tol: float = 0.0) -> dict[str, float]:
        """Scalar coefficients keyed by monomial label, dropping |coef| <= tol."""
        out = {}
        for e in sorted(self.terms, key=_monomial_order):
            c = float(np.real(self.terms[e]))
            if abs(c) > tol:
                out[self.label(e)] = c
        return out

    def __repr__(self):
        return f"RealParamPolynomial({self.variables}, {len(self.terms)} terms)"


def _monomial_order(e):
    return (sum(e), tuple(-x for x in e))


def monomial_label(variables: Sequence[str], exps: Sequence[int]) -> str:
    parts = []
    for v, k in zip(variables, exps):
        if k == 1:
            parts.append(v)
        elif k > 1:
            parts.append(f"{v}^{k}")
    return "*".join(parts) if parts else "1"


def parse_label(variables: Sequence[str], label: str) -> tuple[int, ...]:
    e = [0] * len(variables)
    if label == "1":
        return tuple(e)
    for part in label.split("*"):
        name, _, k = part.partition("^")
        e[list(variables).index(name)] += int(k) if k else 1
    return tuple(e)


def from_labels(variables: Sequence[str], table: Mapping[str, float]) -> RealParamPolynomial:
    return RealParamPolynomial(variables, {parse_label(variables, k): float(v) for k, v in table.items()})


# Printed expansion targets at the point-mass limit, constant term excluded.
QUADRATIC_DIRAC_TARGET = {"c_R": 1.0, "c_R^2": 1.5, "c_I^2": -1.5}

CUBIC_DIRAC_TARGET = {
    "a1_R": Fraction(1, 2), "a0_R": Fraction(1, 2),
    "a1_R*a0_R": Fraction(3, 4), "a1_I*a0_I": Fraction(-3, 4),
    "a1_R^2": Fraction(1, 4), "a1_I^2": Fraction(-1, 4),
    "a0_R^2": Fraction(1, 2), "a0_I^2": Fraction(-1, 2),
    "a1_R^2*a0_R": Fraction(15, 16), "a1_I^2*a0_R": Fraction(-15, 16),
    "a1_R*a0_R^2": Fraction(3, 2), "a1_R*a0_I^2": Fraction(-3, 2),
    "a1_R*a1_I*a0_I": Fraction(-15, 8), "a1_I*a0_R*a0_I": Fraction(-3),
    "a1_R*a1_I*a0_R*a0_I": Fraction(-12),
    "a1_R^2*a0_R^2": Fraction(3), "a1_R^2*a0_I^2": Fraction(-3),
    "a1_I^2*a0_R^2": Fraction(-3), "a1_I^2*a0_I^2": Fraction(3),
}


def target_polynomial(degree: int, dirac: bool) -> RealParamPolynomial:
    """Printed correction terms (zero for the uniform measure)."""
    v = variables_for(degree)
    if not dirac:
        return RealParamPolynomial(v)
    table = QUADRATIC_DIRAC_TARGET if degree == 2 else CUBIC_DIRAC_TARGET
    return from_labels(v, {k: float(x) for k, x in table.items()})


def fit_basis(degree: int, extended: bool = False) -> list[tuple[int, ...]]:
    """Monomials used by the least-squares extraction.

    Quadratic: every monomial with per-variable degree <= 2. Cubic: the printed
    monomials plus the constant, or with ``extended`` every real monomial that
    Re(g * a1**i * a0**j) can produce for i, j <= 2.
    """
    v = variables_for(degree)
    if degree == 2:
        return sorted(itertools.product(range(3), repeat=2), key=_monomial_order)
    if not extended:
        return [(0, 0, 0, 0)] + sorted((parse_label(v, k) for k in CUBIC_DIRAC_TARGET), key=_monomial_order)
    out = set()
    for i, j in itertools.product(range(3), repeat=2):
        for k1 in range(i + 1):
            for k0 in range(j + 1):
                out.add((i - k1, k1, j - k0, k0))
    return sorted(out, key=_monomial_order)


def monomial_matrix(basis: Sequence[tuple[int, ...]], points: np.ndarray) -> np.ndarray:
    points = np.asarray(points, dtype=float)
    return np.stack([np.prod(points ** np.array(e), axis=1) for e in basis], axis=1)


def complex_monomial(degree: int, alpha: Sequence[int]) -> RealParamPolynomial:
    """params**alpha as a complex-coefficient polynomial in real components."""
    out = RealParamPolynomial.constant(variables_for(degree), 1.0)
    for j, a in enumerate(alpha):
        out = out * RealParamPolynomial.complex_parameter(degree, j) ** a
    return out


def real_parts_of_series(degree: int, indices: Iterable[Sequence[int]], coeffs) -> RealParamPolynomial:
    """Re(sum_alpha coeffs[alpha] * params**alpha) for complex coefficient arrays."""
    total = RealParamPolynomial(variables_for(degree))
    for a, g in zip(indices, coeffs):
        if sum(a) == 0:
            continue
        total = total + (complex_monomial(degree, a) * g).real()
    return total


def series_log1p(series_indices: Sequence[Sequence[int]], X: np.ndarray) -> np.ndarray:
    """Coefficients of log(1 + X) on a downward-closed index set.

    ``X[a]`` holds the coefficient arrays of a series without constant term
    (``X[0]`` is ignored). Products are truncated to the same index set.
    """
    idx = [tuple(a) for a in series_indices]
    pos = {a: i for i, a in enumerate(idx)}
    pairs = []
    for i, a in enumerate(idx):
        for b in itertools.product(*(range(x + 1) for x in a)):
            g = tuple(x - y for x, y in zip(a, b))
            if sum(b) and sum(g):
                pairs.append((pos[b], pos[g], i))
    X = np.array(X, dtype=np.complex128, copy=True)
    X[0] = 0.0
    max_order = max(sum(a) for a in idx)
    power = X.copy()
    out = X.copy()
    for k in range(2, max_order + 1):
        nxt = np.zeros_like(X)
        for b, g, i in pairs:
            nxt[i] += power[b] * X[g]
        power = nxt
        out += (-1) ** (k + 1) / k * power
    return out


def series_product(series_indices: Sequence[Sequence[int]], A: np.ndarray, B: np.ndarray) -> np.ndarray:
    idx = [tuple(a) for a in series_indices]
    pos = {a: i for i, a in enumerate(idx)}
    out = np.zeros(np.broadcast_shapes(np.shape(A), np.shape(B)), dtype=np.complex128)
    for i, a in enumerate(idx):
        for b in itertools.product(*(range(x + 1) for x in a)):
            g = tuple(x - y for x, y in zip(a, b))
            out[i] += A[pos[b]] * B[pos[g]]
    return out
