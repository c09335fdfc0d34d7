"""Parameter expansion of the conjugacy Phi from the circle to the Julia set.

Phi(z) = z + sum_alpha phi_alpha(z) * params**alpha satisfies
Phi(z**d) = P(Phi(z)). Matching the coefficient of params**alpha gives

    phi_alpha(z**d) = d z**(d-1) phi_alpha(z) + Q_alpha(z)

with Q_alpha built from lower-order coefficients. The solution bounded on
the circle is the telescoping sum

    phi_alpha(z) = -sum_{n>=0} Q_alpha(z**(d**n)) / (d**(n+1) z**(d**(n+1) - 1)),

evaluated backwards along the angle orbit theta -> d*theta mod 1.
"""

from __future__ import annotations

import cmath
import itertools
import math
import threading
from collections import OrderedDict
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from .errors import BranchAmbiguity, ConvergenceBudget, InputError, OutOfFamily
from .poly_core import MonicCenteredPolynomial, escape_radius, evaluate

DEFAULT_DEPTH = 48
POINT_BUDGET = 2 ** 22

MultiIndex = tuple[int, ...]


def default_indices(degree: int, order: int | None = None, cap: int | None = None) -> list[MultiIndex]:
    """Downward-closed index set in graded order, starting with the zero index."""
    m = degree - 1
    if order is None:
        order = 6 if degree == 2 else 4
    if cap is None:
        cap = order if degree == 2 else 2
    idx = [a for a in itertools.product(range(cap + 1), repeat=m) if sum(a) <= order]
    return sorted(idx, key=lambda a: (sum(a), tuple(-x for x in a)))


def downward_closure(alpha: MultiIndex) -> list[MultiIndex]:
    idx = list(itertools.product(*(range(a + 1) for a in alpha)))
    return sorted(idx, key=lambda a: (sum(a), tuple(-x for x in a)))


def orbit_padding(degree: int, depth: int, order: int) -> int:
    """Extra orbit points so that lower-order terms are accurate along the first ``depth`` points.

    A coefficient of total order k read from an orbit of length L carries a
    truncation error of roughly binom(L, k-1) d^{-L}; padding by about
    (k-1) log_d(depth) brings that below d^{-depth}.
    """
    if order <= 1:
        return 0
    return math.ceil((order - 1) * math.log(depth) / math.log(degree)) + 2


def angle_orbit(theta: np.ndarray, d: int, length: int) -> np.ndarray:
    """Points e^{2 pi i d^n theta} for n < length, one row per angle."""
    theta = np.mod(np.asarray(theta, dtype=float).ravel(), 1.0)
    angles = np.empty((theta.size, length))
    angles[:, 0] = theta
    for n in range(1, length):
        angles[:, n] = np.mod(d * angles[:, n - 1], 1.0)
    return np.exp(2j * np.pi * angles)


class BoettcherSeries:
    """Truncated conjugacy series for a monic centered degree-d family.

    Parameters are ordered like ``MonicCenteredPolynomial.lower_coeffs``.
    Coefficient values at a batch of angles are cached (LRU keyed by the
    exact angle array), which is what repeated quadrature levels and grid
    sweeps hit.
    """

    def __init__(self, degree: int, order: int | None = None, cap: int | None = None,
                 depth: int = DEFAULT_DEPTH, indices: Sequence[MultiIndex] | None = None,
                 cache_size: int = 64):
        if degree < 2:
            raise InputError("degree must be >= 2")
        if depth < 1:
            raise InputError("tail depth must be >= 1")
        self.degree = degree
        self.depth = int(depth)
        self.indices: list[MultiIndex] = list(indices) if indices is not None else default_indices(degree, order, cap)
        if self.indices[0] != (0,) * (degree - 1):
            raise InputError("index set must start with the zero index")
        pos = {a: i for i, a in enumerate(self.indices)}
        for a in self.indices:
            for j, aj in enumerate(a):
                if aj and a[:j] + (aj - 1,) + a[j + 1:] not in pos:
                    raise InputError(f"index set is not downward closed at {a}")
        self.order = max(sum(a) for a in self.indices)
        self.orbit_length = self.depth + orbit_padding(degree, self.depth, self.order)
        self._pos = pos
        self._build_plan()
        self._cache: OrderedDict[tuple, np.ndarray] = OrderedDict()
        self._cache_size = cache_size
        self._lock = threading.Lock()

    def _build_plan(self):
        m = self.degree - 1
        pos = self._pos
        ptr, pb, pg = [0], [], []
        for a in self.indices:
            for b in itertools.product(*(range(x + 1) for x in a)):
                g = tuple(x - y for x, y in zip(a, b))
                pb.append(pos[b])
                pg.append(pos[g])
            ptr.append(len(pb))
        self._pair_ptr = np.array(ptr, dtype=np.intp)
        self._pair_b = np.array(pb, dtype=np.intp)
        self._pair_g = np.array(pg, dtype=np.intp)
        shift = np.full((len(self.indices), m), -1, dtype=np.intp)
        for i, a in enumerate(self.indices):
            for j in range(m):
                if a[j] > 0:
                    shift[i, j] = pos[a[:j] + (a[j] - 1,) + a[j + 1:]]
        self._shift_pos = shift
        # parameter j multiplies z**(d-2-j)
        self._shift_k = np.arange(self.degree - 2, -1, -1, dtype=np.intp)

    def index_of(self, alpha: MultiIndex) -> int:
        try:
            return self._pos[tuple(alpha)]
        except KeyError:
            raise InputError(f"multi-index {alpha} not in this series") from None

    def terms(self, theta, cache: bool = True) -> np.ndarray:
        """Array ``[len(indices), n_angles]`` of phi_alpha at e^{2 pi i theta}; row 0 is z."""
        theta = np.ascontiguousarray(np.mod(np.asarray(theta, dtype=float).ravel(), 1.0))
        if theta.size * self.orbit_length * len(self.indices) > POINT_BUDGET * 64:
            raise ConvergenceBudget(f"{theta.size} angles exceed the point-evaluation budget")
        key = (theta.size, theta.tobytes())
        if not cache:
            return np.asarray(kernels.series_terms(angle_orbit(theta, self.degree, self.orbit_length), self.degree,
                                                   self._pair_ptr, self._pair_b, self._pair_g,
                                                   self._shift_pos, self._shift_k))
        with self._lock:
            hit = self._cache.get(key)
            if hit is not None:
                self._cache.move_to_end(key)
                return hit
        orbit = angle_orbit(theta, self.degree, self.orbit_length)
        out = np.asarray(kernels.series_terms(orbit, self.degree, self._pair_ptr, self._pair_b,
                                              self._pair_g, self._shift_pos, self._shift_k))
        out.setflags(write=False)
        with self._lock:
            self._cache[key] = out
            while len(self._cache) > self._cache_size:
                self._cache.popitem(last=False)
        return out

    def monomials(self, params: Sequence[complex]) -> np.ndarray:
        params = np.asarray(params, dtype=np.complex128)
        return np.array([np.prod(params ** np.array(a)) for a in self.indices])

    def evaluate(self, params: Sequence[complex], theta, cache: bool = True) -> np.ndarray:
        """Phi at e^{2 pi i theta}; no family check (see :func:`evaluate_Phi`)."""
        return self.monomials(params) @ self.terms(theta, cache)


def _check_params(params: Sequence[complex], m: int):
    if len(params) != m:
        raise InputError(f"expected {m} parameters, got {len(params)}")
    if any(abs(complex(p)) >= 1.0 for p in params):
        raise OutOfFamily("parameter moduli must be < 1")


def _angle_of(z) -> np.ndarray:
    z = np.asarray(z, dtype=np.complex128)
    if np.any(np.abs(np.abs(z) - 1.0) > 1e-12):
        raise InputError("points must lie on the unit circle")
    return np.mod(np.angle(z) / (2 * np.pi), 1.0)


def evaluate_Phi(series: BoettcherSeries, params: Sequence[complex], z) -> np.ndarray | complex:
    """z + sum phi_alpha(z) params**alpha for points z on the unit circle."""
    _check_params(params, series.degree - 1)
    scalar = np.ndim(z) == 0
    out = series.evaluate(params, _angle_of(z))
    return complex(out[0]) if scalar else out.reshape(np.shape(z))


def _doublings(z: np.ndarray, count: int) -> np.ndarray:
    """w_k = z**(2**k) for k < count, renormalised onto the circle."""
    w = np.empty((count,) + z.shape, dtype=np.complex128)
    w[0] = z
    for k in range(1, count):
        v = w[k - 1] * w[k - 1]
        w[k] = v / np.abs(v)
    return w


def phi1_quadratic(z, tail_depth: int = DEFAULT_DEPTH):
    """First-order quadratic coefficient -z sum_{i=1}^{M} 2^{-i} z^{-2^i}; tail below 2^{-M}."""
    zz = np.asarray(z, dtype=np.complex128)
    _angle_of(zz)
    w = _doublings(zz, tail_depth + 1)
    k = np.arange(1, tail_depth + 1).reshape((-1,) + (1,) * zz.ndim)
    out = -zz * np.sum(np.conj(w[1:]) / 2.0 ** k, axis=0)
    return complex(out) if zz.ndim == 0 else out


def phi2_quadratic(z, tail_depth: int = 60):
    """Second-order quadratic coefficient as an explicit triple sum truncated at M per index.

    The exponent of z in each term is 2^{i3-1} (2^{i1} + 2^{i2-i1+1}), so every
    term is a product of two conjugated repeated squares of z.
    """
    zz = np.asarray(z, dtype=np.complex128)
    _angle_of(zz)
    M = tail_depth
    wc = np.conj(_doublings(zz, 2 * M + 1))
    total = np.zeros(zz.shape, dtype=np.complex128)
    for i3 in range(M, 0, -1):
        inner = np.zeros(zz.shape, dtype=np.complex128)
        for i2 in range(M, 0, -1):
            s = np.zeros(zz.shape, dtype=np.complex128)
            for i1 in range(1, i2 + 1):
                s = s + wc[i3 - 1 + i1] * wc[i3 + i2 - i1]
            inner = inner + s / 2.0 ** (i2 + 1)
        total = total + inner / 2.0 ** i3
    out = -zz * total
    return complex(out) if zz.ndim == 0 else out


def solve_phi_generic(d: int, family: str | None, alpha: MultiIndex, z, tail_depth: int = DEFAULT_DEPTH,
                      lower_terms: BoettcherSeries | None = None):
    """phi_alpha at circle points z via the telescoping solution of the linear equation.

    ``lower_terms`` may supply an existing series whose index set contains
    alpha and its lower indices; otherwise the downward closure of alpha is
    solved afresh.
    """
    if family is not None:
        expected = {"quad": 2, "quadratic": 2, "cubic": 3}.get(family)
        if expected != d:
            raise InputError(f"family {family!r} does not have degree {d}")
    alpha = tuple(int(a) for a in alpha)
    if len(alpha) != d - 1:
        raise InputError(f"multi-index must have {d - 1} entries")
    series = lower_terms
    if series is None or series.degree != d or alpha not in series._pos:
        series = BoettcherSeries(d, depth=tail_depth, indices=downward_closure(alpha))
    scalar = np.ndim(z) == 0
    vals = series.terms(_angle_of(z))[series.index_of(alpha)]
    return complex(vals[0]) if scalar else vals.reshape(np.shape(z))


def power_coefficients(series: BoettcherSeries, terms: np.ndarray, k: int) -> np.ndarray:
    """Coefficients of Phi**k on the same index set, from term values."""
    pairs = [(series._pair_b[q], series._pair_g[q], a)
             for a in range(len(series.indices))
             for q in range(series._pair_ptr[a], series._pair_ptr[a + 1])]
    out = np.zeros_like(terms)
    out[0] = 1.0
    for _ in range(k):
        nxt = np.zeros_like(terms)
        for b, g, a in pairs:
            nxt[a] += out[b] * terms[g]
        out = nxt
    return out


def inhomogeneity(series: BoettcherSeries, theta) -> np.ndarray:
    """Q_alpha at e^{2 pi i theta} for every index, recomputed from the solved terms."""
    terms = np.asarray(series.terms(theta))
    d = series.degree
    pw = [power_coefficients(series, terms, k) for k in range(d + 1)]
    z = terms[0]
    Q = pw[d].copy()
    for i in range(1, len(series.indices)):
        Q[i] -= d * z ** (d - 1) * terms[i]
        for j, k in enumerate(series._shift_k):
            b = series._shift_pos[i, j]
            if b >= 0:
                Q[i] += pw[k][b]
    Q[0] = 0.0
    return Q


def functional_equation_defect(series: BoettcherSeries, theta) -> np.ndarray:
    """|phi_alpha(z^d) - d z^{d-1} phi_alpha(z) - Q_alpha(z)| per index and angle."""
    theta = np.asarray(theta, dtype=float)
    d = series.degree
    here = series.terms(theta)
    there = series.terms(np.mod(d * theta, 1.0))
    Q = inhomogeneity(series, theta)
    z = here[0]
    defect = there - d * z ** (d - 1) * here - Q
    defect[0] = 0.0
    return np.abs(defect)


@dataclass(frozen=True)
class ResidualReport:
    sup_residual: float
    n_samples: int
    parameters: tuple[complex, ...]
    truncation_order: int


def residual(series: BoettcherSeries, params: Sequence[complex], n_samples: int = 256,
             seed: int = 0) -> ResidualReport:
    """Sup over random circle points of |Phi(z^d) - P(Phi(z))|."""
    params = tuple(complex(p) for p in params)
    P = MonicCenteredPolynomial(series.degree, params)
    theta = np.random.default_rng(seed).random(n_samples)
    lhs = series.evaluate(params, np.mod(series.degree * theta, 1.0))
    rhs = evaluate(P, series.evaluate(params, theta))
    return ResidualReport(float(np.max(np.abs(lhs - rhs))), n_samples, params, series.order)


def boettcher_forward(P: MonicCenteredPolynomial, w: complex, n_iters: int = 60) -> complex:
    """Forward Boettcher coordinate lim (P^n(w))^{d^{-n}} outside the escape radius.

    Written as w * prod_k (P(w_k)/w_k^d)^{d^{-k-1}}; each ratio is close to 1 in
    the escape region, so the principal root continues the argument of the
    previous partial product. A ratio whose argument exceeds pi/2 makes that
    continuation ambiguous.
    """
    w = complex(w)
    d = P.degree
    if abs(w) < escape_radius(P):
        raise InputError("w must lie outside the escape radius")
    lower = list(zip(P.param_powers, P.lower_coeffs))
    log_b = cmath.log(w)
    wk = w
    for k in range(n_iters):
        ratio = 1.0 + sum(a * wk ** (p - d) for p, a in lower)
        lr = cmath.log(ratio)
        if abs(lr.imag) > math.pi / 2:
            raise BranchAmbiguity(f"argument jump {lr.imag:.3f} at refinement {k}")
        log_b += lr / d ** (k + 1)
        if abs(lr) < 1e-300 or abs(wk) > 1e100:
            break
        wk = evaluate(P, wk)
    return cmath.exp(log_b)
