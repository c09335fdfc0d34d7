import cmath

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from juliathermo.errors import BranchFailure, InputError, ZeroLeadingCoefficient
from juliathermo.poly_core import (
    MonicCenteredPolynomial,
    Verdict,
    classify_hyperbolic,
    critical_points,
    cubic_map,
    denormalize,
    derivative_at,
    escape_radius,
    evaluate,
    in_family,
    iterate_coefficients,
    julia_cloud,
    newton_fixed_point,
    normalize,
    quadratic_map,
)

small = st.floats(-1.0, 1.0, allow_nan=False)
complex_in_disk = st.builds(complex, small, small).filter(lambda z: abs(z) <= 1.0)
z_in_2disk = st.builds(complex, st.floats(-2, 2), st.floats(-2, 2)).filter(lambda z: abs(z) <= 2.0)


@pytest.mark.parametrize("P, z, expected", [
    (quadratic_map(0), 2, 4),
    (quadratic_map(0.1), 1j, -0.9),
    (cubic_map(0.2, 0.1), 1, 1.3),
])
def test_evaluate_examples(P, z, expected):
    assert evaluate(P, z) == pytest.approx(expected, abs=1e-15)
    assert P(z) == evaluate(P, z)


@pytest.mark.parametrize("P, z, expected", [
    (quadratic_map(0.37 - 0.2j), 1, 2),
    (cubic_map(0.2, 0.5), 1, 3.2),
    (cubic_map(-3, 0), 1, 0),
])
def test_derivative_examples(P, z, expected):
    assert derivative_at(P, z) == pytest.approx(expected, abs=1e-15)


def test_structure_is_validated():
    with pytest.raises(InputError):
        MonicCenteredPolynomial(3, (0.1,))
    with pytest.raises(InputError):
        MonicCenteredPolynomial(1, ())
    with pytest.raises(InputError):
        quadratic_map(complex(float("nan"), 0))
    assert quadratic_map(0.3).family == "quad" and cubic_map(0, 0).family == "cubic"


def _naive(P, z):
    return z ** P.degree + sum(a * z ** k for k, a in zip(P.param_powers, P.lower_coeffs))


@settings(max_examples=300)
@given(a1=complex_in_disk, a0=complex_in_disk, z=z_in_2disk)
def test_horner_matches_power_sum(a1, a0, z):
    for P in (quadratic_map(a0), cubic_map(a1, a0)):
        ref = _naive(P, z)
        assert abs(evaluate(P, z) - ref) <= 1e-12 * max(1.0, abs(ref))


@settings(max_examples=200)
@given(a1=complex_in_disk, a0=complex_in_disk, z=z_in_2disk)
def test_derivative_matches_central_difference(a1, a0, z):
    h = 1e-6
    for P in (quadratic_map(a0), cubic_map(a1, a0)):
        fd = (evaluate(P, z + h) - evaluate(P, z - h)) / (2 * h)
        assert abs(derivative_at(P, z) - fd) < 1e-6


def test_vectorized_evaluation():
    P = cubic_map(0.1 + 0.2j, -0.3)
    z = np.linspace(-1, 1, 7) + 0.5j
    assert np.allclose(evaluate(P, z), [evaluate(P, complex(w)) for w in z], rtol=0, atol=1e-15)


def test_escape_radius():
    assert escape_radius(quadratic_map(0.1)) == 2.0
    assert escape_radius(cubic_map(1.0, 1.5)) == pytest.approx(3.5)


def test_normalize_examples():
    P, T = normalize([1, 0.2, 0.1], 2)
    assert P.params[0] == pytest.approx(0.19, abs=1e-14)
    P, T = normalize([1, 0, 0.3 - 0.1j], 2)
    assert P.params[0] == pytest.approx(0.3 - 0.1j, abs=1e-15)
    assert T.scale == pytest.approx(1) and T.shift == pytest.approx(0)
    P, T = normalize([2, 0, 0], 2)
    assert P.params[0] == pytest.approx(0, abs=1e-15)
    zs = np.exp(1j * np.arange(5))
    assert np.allclose(T.inverse(2 * T(zs) ** 2), evaluate(P, zs))
    with pytest.raises(ZeroLeadingCoefficient):
        normalize([0, 1, 1], 2)


@settings(max_examples=100)
@given(a1=complex_in_disk, a0=complex_in_disk,
       scale=st.builds(complex, st.floats(0.5, 2), st.floats(-1, 1)),
       shift=st.builds(complex, st.floats(-1, 1), st.floats(-1, 1)))
def test_normalize_denormalize_roundtrip(a1, a0, scale, shift):
    from juliathermo.poly_core import AffineMap
    for P in (quadratic_map(a0), cubic_map(a1, a0)):
        general = denormalize(P, AffineMap(scale, shift))
        P2, _ = normalize(general, P.degree)
        assert np.allclose(P2.params, P.params, rtol=0, atol=1e-12)


def test_critical_points():
    assert critical_points(quadratic_map(0.3j)) == [0j]
    assert critical_points(cubic_map(0, 0.2)) == [0j, 0j]
    pts = sorted(critical_points(cubic_map(-0.75, 0)), key=lambda z: z.real)
    assert np.allclose(pts, [-0.5, 0.5])


def test_classification_examples():
    cert = classify_hyperbolic(quadratic_map(0))
    assert cert.verdict is Verdict.HYPERBOLIC_CONNECTED and cert.attracting_cycle_period == 1
    assert cert.expansion_constant_lambda > 1 and cert.expansion_prefactor_C > 0
    assert classify_hyperbolic(quadratic_map(1)).verdict is Verdict.ESCAPING
    assert classify_hyperbolic(cubic_map(0, 0)).verdict is Verdict.HYPERBOLIC_CONNECTED
    # period-2 component of the Mandelbrot set
    assert classify_hyperbolic(quadratic_map(-1)).attracting_cycle_period == 2


def test_in_family():
    assert in_family(quadratic_map(0))
    assert not in_family(quadratic_map(0.9 + 0.9j))
    assert not in_family(quadratic_map(1))
    assert in_family(cubic_map(0.05, 0.05j))
    with pytest.raises(InputError):
        in_family(MonicCenteredPolynomial(4, (0, 0, 0)))


@settings(max_examples=25)
@given(c=st.builds(complex, st.floats(-1.2, 0.6), st.floats(-0.8, 0.8)))
def test_classification_monotone_in_budget(c):
    P = quadratic_map(c)
    budgets = (64, 512, 4096)
    verdicts = [classify_hyperbolic(P, max_iter=b).verdict for b in budgets]
    for small_v, large_v in zip(verdicts, verdicts[1:]):
        if small_v is not Verdict.UNDECIDED:
            assert large_v is small_v


def test_fixed_point_and_iterates():
    c = 0.1
    beta = (1 + cmath.sqrt(1 - 4 * c)) / 2
    z, resid = newton_fixed_point(quadratic_map(c), 1.0)
    assert z == pytest.approx(beta, abs=1e-15) and resid < 1e-15
    P = cubic_map(0.1, 0.2j)
    coef = iterate_coefficients(P, 2)
    zs = np.array([0.3 + 0.1j, -0.7j])
    assert np.allclose(np.polyval(coef, zs), evaluate(P, evaluate(P, zs)))


@pytest.mark.parametrize("P", [quadratic_map(0), cubic_map(0, 0)])
def test_cloud_on_unit_circle(P):
    cloud = julia_cloud(P, 3000, seed=7)
    assert np.all(np.abs(np.abs(cloud.points) - 1) <= 1e-8)
    assert cloud.method == "InverseIteration" and cloud.generator_seed == 7


def test_cloud_forward_invariant_and_deterministic():
    P = quadratic_map(0.1)
    pts = julia_cloud(P, 4000, seed=3).points
    image = evaluate(P, pts)
    dist = np.min(np.abs(image[:, None] - pts[None, :]), axis=1)
    assert np.max(dist) < 1e-3 * 30  # inverse-iteration clouds are uneven near the fixed point
    assert np.quantile(dist, 0.99) < 1e-2
    assert np.all(np.abs(image) <= escape_radius(P))
    assert np.array_equal(pts, julia_cloud(P, 4000, seed=3).points)
