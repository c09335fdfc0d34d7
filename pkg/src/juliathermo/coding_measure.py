"""Symbolic coding on d symbols, Bernoulli weights and quadrature on the circle.

Symbol ``i`` (1-based) is the base-d digit ``i - 1`` of an angle in [0, 1), so
the one-sided shift corresponds to angle multiplication by d.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import AlphabetMismatch, BudgetExceeded, InputError, NoConvergence

QUADRATURE_BUDGET = 2 ** 24


@dataclass(frozen=True)
class BernoulliWeights:
    p: tuple[float, ...]

    def __post_init__(self):
        p = tuple(float(x) for x in self.p)
        if len(p) < 2:
            raise InputError("at least two symbols are required")
        if not all(math.isfinite(x) and x > 0.0 for x in p):
            raise InputError(f"weights must be strictly positive, got {p}")
        if abs(math.fsum(p) - 1.0) > 1e-12:
            raise InputError(f"weights must sum to 1, got sum {math.fsum(p)!r}")
        object.__setattr__(self, "p", p)

    @classmethod
    def normalized(cls, p: Sequence[float]) -> "BernoulliWeights":
        """Rescale positive weights so they sum to one (parsing convenience)."""
        p = [float(x) for x in p]
        if not all(math.isfinite(x) and x > 0.0 for x in p):
            raise InputError(f"weights must be strictly positive, got {p}")
        s = math.fsum(p)
        return cls(tuple(x / s for x in p))

    @classmethod
    def uniform(cls, d: int) -> "BernoulliWeights":
        return cls(tuple([1.0 / d] * d))

    @classmethod
    def near_dirac(cls, d: int, eps: float, symbol: int = 1) -> "BernoulliWeights":
        """Weight 1 - eps on ``symbol`` and eps spread evenly over the rest."""
        p = [eps / (d - 1)] * d
        p[symbol - 1] = 1.0 - eps
        return cls(tuple(p))

    @property
    def d(self) -> int:
        return len(self.p)

    @property
    def is_uniform(self) -> bool:
        return all(abs(x - 1.0 / self.d) < 1e-12 for x in self.p)


@dataclass(frozen=True)
class Word:
    symbols: tuple[int, ...]
    d: int

    def __post_init__(self):
        s = tuple(int(x) for x in self.symbols)
        if any(x < 1 or x > self.d for x in s):
            raise InputError(f"symbols must lie in 1..{self.d}")
        object.__setattr__(self, "symbols", s)

    def __len__(self) -> int:
        return len(self.symbols)

    def shift(self) -> "Word":
        """Cyclic left rotation, the action of the shift on a periodic word."""
        return Word(self.symbols[1:] + self.symbols[:1], self.d)

    @classmethod
    def from_index(cls, j: int, n: int, d: int) -> "Word":
        """Length-n word whose base-d digits (most significant first) spell j."""
        digits = []
        for _ in range(n):
            j, r = divmod(j, d)
            digits.append(r + 1)
        return cls(tuple(reversed(digits)), d)


@dataclass(frozen=True)
class CircleMeasure:
    """Pushforward of a Bernoulli measure to the circle through the digit map."""

    weights: BernoulliWeights

    @property
    def d(self) -> int:
        return self.weights.d


@dataclass(frozen=True)
class PointMass:
    """Point mass at one angle; the weak limit of Bernoulli measures as one weight tends to 1."""

    d: int
    angle: float

    @classmethod
    def dirac(cls, d: int, which_symbol: int = 1) -> "PointMass":
        return cls(d, dirac_limit_angle(CircleMeasure(BernoulliWeights.uniform(d)), which_symbol))


class Representative(str, enum.Enum):
    MIDPOINT = "midpoint"
    LEFT_ENDPOINT = "left"
    # the measure's own barycenter inside a cylinder, relative to its left edge
    BARYCENTER = "barycenter"


@dataclass(frozen=True)
class QuadratureRule:
    level: int
    nodes: np.ndarray
    node_weights: np.ndarray
    representative: Representative


def cylinder_measure(w: Word, weights: BernoulliWeights) -> float:
    if w.d != weights.d:
        raise AlphabetMismatch(f"word over {w.d} symbols, weights over {weights.d}")
    return math.prod(weights.p[s - 1] for s in w.symbols)


def entropy(weights: BernoulliWeights) -> float:
    return -math.fsum(p * math.log(p) for p in weights.p)


def angle_of_word_prefix(w: Word) -> float:
    """Sum of (symbol_k - 1) d^{-k}, reduced to [0, 1)."""
    num = 0
    for s in w.symbols:
        num = num * w.d + (s - 1)
    return math.fmod(num / w.d ** len(w.symbols), 1.0) if w.symbols else 0.0


def _cylinder_weights(p: Sequence[float], n: int) -> np.ndarray:
    out = np.ones(1)
    for _ in range(n):
        out = np.outer(out, np.asarray(p)).ravel()
    return out


def _barycenter_offset(p: Sequence[float]) -> float:
    """Mean angle of the measure inside [0, 1), i.e. sum p_i (i-1) / (d-1)."""
    d = len(p)
    return math.fsum(pi * i for i, pi in enumerate(p)) / (d - 1)


def build_quadrature(measure: CircleMeasure, level: int,
                     representative: Representative = Representative.MIDPOINT) -> QuadratureRule:
    d = measure.d
    if level < 1:
        raise InputError("quadrature level must be >= 1")
    if d ** level > QUADRATURE_BUDGET:
        raise BudgetExceeded(f"{d}^{level} nodes exceed the budget of {QUADRATURE_BUDGET}")
    representative = Representative(representative)
    offset = {
        Representative.MIDPOINT: 0.5,
        Representative.LEFT_ENDPOINT: 0.0,
        Representative.BARYCENTER: _barycenter_offset(measure.weights.p),
    }[representative]
    nodes = (np.arange(d ** level) + offset) / d ** level
    return QuadratureRule(level, nodes, _cylinder_weights(measure.weights.p, level), representative)


def _weighted_sum(values: np.ndarray, weights: np.ndarray):
    # averaging deviations from the first node keeps constants exact
    base = values[..., 0]
    dev = values - base[..., None]
    if values.ndim == 1:
        return base + math.fsum((dev * weights).tolist()) / math.fsum(weights.tolist())
    # numpy's pairwise summation along the contiguous last axis
    return base + np.sum(dev * weights, axis=-1) / np.sum(weights)


def _aitken(a0, a1, a2):
    """Delta-squared extrapolation, applied only where convergence looks geometric."""
    a0, a1, a2 = (np.asarray(x, dtype=float) for x in (a0, a1, a2))
    d1, d2 = a1 - a0, a2 - a1
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.where(d1 != 0.0, d2 / np.where(d1 != 0.0, d1, 1.0), np.nan)
        ok = (r > 0.0) & (r < 0.9)
        acc = a2 + d2 * r / (1.0 - r)
    return np.where(ok, acc, a2)


@dataclass(frozen=True)
class IntegrationResult:
    value: float | np.ndarray
    error_estimate: float
    level_used: int

    def __iter__(self):
        return iter((self.value, self.error_estimate, self.level_used))


def default_max_level(d: int) -> int:
    return 18 if d == 2 else 12


def integrate(F: Callable[[np.ndarray], np.ndarray], measure: CircleMeasure, tol: float = 1e-8,
              max_level: int | None = None, min_level: int = 3,
              representative: Representative = Representative.BARYCENTER,
              accelerate: bool = True) -> IntegrationResult:
    """Integrate a function of the angle against the measure by refining cylinders.

    ``F`` receives an array of angles in [0, 1) and returns real values with
    the angles along the last axis (extra leading axes integrate componentwise). The
    level is raised until successive estimates differ by less than ``tol``;
    Aitken's delta-squared process is applied across levels when the
    differences decay geometrically.
    """
    d = measure.d
    if max_level is None:
        max_level = default_max_level(d)
    raw: list = []
    est: list = []
    for n in range(1, max_level + 1):
        rule = build_quadrature(measure, n, representative)
        vals = np.asarray(F(rule.nodes), dtype=float)
        if vals.shape[-1:] != rule.nodes.shape or not np.all(np.isfinite(vals)):
            raise InputError("integrand must return finite values at every node")
        raw.append(_weighted_sum(vals, rule.node_weights))
        if accelerate and len(raw) >= 3:
            est.append(_aitken(*raw[-3:]))
        else:
            est.append(np.asarray(raw[-1], dtype=float))
        if n >= min_level and len(est) >= 2:
            err = float(np.max(np.abs(est[-1] - est[-2])))
            if err < tol:
                return IntegrationResult(_unwrap(est[-1]), err, n)
    err = float(np.max(np.abs(est[-1] - est[-2]))) if len(est) >= 2 else math.inf
    raise NoConvergence(f"integral not within tol={tol} by level {max_level}",
                        value=_unwrap(est[-1]), error_estimate=err, level=max_level)


def _unwrap(x):
    x = np.asarray(x, dtype=float)
    return float(x) if x.ndim == 0 else x


def integrate_best(F, measure: CircleMeasure, **kw) -> IntegrationResult:
    """Like :func:`integrate` but returns the best value on budget exhaustion, with a warning."""
    try:
        return integrate(F, measure, **kw)
    except NoConvergence as exc:
        warnings.warn(str(exc), RuntimeWarning, stacklevel=2)
        return IntegrationResult(exc.value, exc.error_estimate, exc.level)


def sample_angles(measure: CircleMeasure, n_samples: int, word_length: int, seed: int) -> np.ndarray:
    """Angles built from i.i.d. symbols; deterministic in ``seed``."""
    d = measure.d
    if word_length < 32 / math.log2(d):
        raise InputError(f"word_length must be >= {math.ceil(32 / math.log2(d))} for d={d}")
    rng = np.random.default_rng(seed)
    digits = rng.choice(d, size=(n_samples, word_length), p=measure.weights.p)
    scale = float(d) ** -np.arange(1, word_length + 1)
    # most significant digits dominate; summing from the tail keeps rounding low
    return np.mod(digits[:, ::-1].astype(float) @ scale[::-1], 1.0)


def dirac_limit_angle(measure: CircleMeasure, which_symbol: int) -> float:
    """Angle of the constant word on ``which_symbol``: (i-1)/(d-1) mod 1."""
    d = measure.d
    if not 1 <= which_symbol <= d:
        raise InputError(f"symbol must lie in 1..{d}")
    return math.fmod((which_symbol - 1) / (d - 1), 1.0)


def integrate_measure(F, measure, **kw) -> IntegrationResult:
    """Integrate against a :class:`CircleMeasure` or evaluate at a :class:`PointMass`."""
    if isinstance(measure, PointMass):
        vals = np.asarray(F(np.array([measure.angle])), dtype=float)[..., 0]
        return IntegrationResult(_unwrap(vals), 0.0, 0)
    return integrate(F, measure, **kw)
