import math

import numpy as np
import pytest

from juliathermo.coding_measure import (
    BernoulliWeights,
    CircleMeasure,
    PointMass,
    Representative,
    Word,
    angle_of_word_prefix,
    build_quadrature,
    cylinder_measure,
    dirac_limit_angle,
    entropy,
    integrate,
    integrate_measure,
    sample_angles,
)
from juliathermo.conjugacy import phi1_quadratic
from juliathermo.errors import AlphabetMismatch, BudgetExceeded, InputError, NoConvergence


def measure(*p):
    return CircleMeasure(BernoulliWeights(p))


def test_weights_invariants():
    with pytest.raises(InputError):
        BernoulliWeights((1.0, 0.0))
    with pytest.raises(InputError):
        BernoulliWeights((0.5, 0.6))
    with pytest.raises(InputError):
        BernoulliWeights((1.0,))
    assert BernoulliWeights.normalized([1, 3]).p == (0.25, 0.75)
    nd = BernoulliWeights.near_dirac(3, 1e-3, symbol=2)
    assert nd.p[1] == pytest.approx(1 - 1e-3) and math.fsum(nd.p) == pytest.approx(1)


def test_cylinder_measure():
    assert cylinder_measure(Word((1, 2, 1), 2), BernoulliWeights((0.3, 0.7))) == pytest.approx(0.063, abs=1e-15)
    assert cylinder_measure(Word((), 2), BernoulliWeights((0.3, 0.7))) == 1
    assert cylinder_measure(Word((1,) * 9, 2), BernoulliWeights.uniform(2)) == 2.0 ** -9
    with pytest.raises(AlphabetMismatch):
        cylinder_measure(Word((1, 2), 2), BernoulliWeights.uniform(3))


def test_entropy():
    assert entropy(BernoulliWeights.uniform(2)) == pytest.approx(math.log(2), abs=1e-15)
    assert entropy(BernoulliWeights.uniform(3)) == pytest.approx(math.log(3), abs=1e-15)
    assert entropy(BernoulliWeights((0.99, 0.01))) == pytest.approx(0.0560, abs=1e-4)


def test_angle_of_word_prefix():
    assert angle_of_word_prefix(Word((1,) * 12, 2)) == 0
    assert angle_of_word_prefix(Word((2,) + (1,) * 10, 2)) == 0.5
    assert abs(angle_of_word_prefix(Word((2,) * 20, 3)) - 0.5) <= 3.0 ** -20
    # the shift is angle multiplication by d
    w = Word((3, 1, 2, 2, 1), 3)
    shifted = Word(w.symbols[1:], 3)
    assert angle_of_word_prefix(shifted) == pytest.approx(math.fmod(3 * angle_of_word_prefix(w), 1.0))


def test_word_index_roundtrip():
    for j in range(8):
        w = Word.from_index(j, 3, 2)
        assert angle_of_word_prefix(w) * 8 == j
    assert Word((1, 2, 2), 2).shift().symbols == (2, 2, 1)


def test_quadrature_examples():
    r = build_quadrature(measure(0.5, 0.5), 1)
    assert np.allclose(r.nodes, [0.25, 0.75]) and np.allclose(r.node_weights, [0.5, 0.5])
    r = build_quadrature(measure(0.3, 0.7), 2)
    assert np.allclose(r.nodes, [1 / 8, 3 / 8, 5 / 8, 7 / 8])
    assert np.allclose(r.node_weights, [0.09, 0.21, 0.21, 0.49], rtol=0, atol=1e-15)
    r = build_quadrature(measure(0.2, 0.5, 0.3), 4, Representative.LEFT_ENDPOINT)
    assert abs(r.node_weights.sum() - 1) < 1e-10 and len(r.nodes) == 81
    for j in (0, 17, 80):
        assert r.node_weights[j] == pytest.approx(cylinder_measure(Word.from_index(j, 4, 3), BernoulliWeights((0.2, 0.5, 0.3))))
    with pytest.raises(BudgetExceeded):
        build_quadrature(measure(0.5, 0.5), 25)


@pytest.mark.parametrize("p", [(0.5, 0.5), (0.9, 0.1), (0.2, 0.3, 0.5)])
def test_constant_integrates_exactly(p):
    for rep in Representative:
        for n in range(2, 7):
            res = integrate(lambda t: np.full_like(t, 2.5), measure(*p), min_level=n,
                            max_level=n, representative=rep)
            assert res.value == 2.5 and res.level_used == n
        r = build_quadrature(measure(*p), 6, rep)
        assert abs(r.node_weights.sum() - 1) < 1e-10


@pytest.mark.parametrize("d", [2, 3])
def test_haar_orthogonality(d):
    m = CircleMeasure(BernoulliWeights.uniform(d))
    for n in (3, 5, 7):
        r = build_quadrature(m, n)
        for k in range(1, d ** (n - 1)):
            for sign in (1, -1):
                val = np.sum(r.node_weights * np.cos(2 * np.pi * sign * k * r.nodes))
                assert abs(val) <= 10 * d ** -n


def _re_zbar_phi1(theta):
    z = np.exp(2j * np.pi * theta)
    return (np.conj(z) * phi1_quadratic(z)).real


def test_integrate_phi1_examples():
    assert abs(integrate(_re_zbar_phi1, measure(0.5, 0.5)).value) < 1e-6
    val = integrate(_re_zbar_phi1, measure(1 - 1e-4, 1e-4)).value
    assert abs(val + 1) < 1e-2


def test_dirac_convergence_is_monotone():
    target = _re_zbar_phi1(np.array([dirac_limit_angle(measure(0.5, 0.5), 1)]))[0]
    gaps = [abs(integrate(_re_zbar_phi1, measure(1 - e, e)).value - target) for e in (1e-2, 1e-3, 1e-4)]
    assert gaps[0] > gaps[1] > gaps[2]


def test_no_convergence_carries_best_value():
    with pytest.raises(NoConvergence) as info:
        integrate(lambda t: np.sign(np.sin(40 * t)), measure(0.5, 0.5), tol=1e-15, max_level=6)
    assert info.value.value is not None and info.value.level == 6


def test_point_mass_integration():
    pm = PointMass.dirac(3, 2)
    assert pm.angle == 0.5
    assert integrate_measure(lambda t: np.cos(2 * np.pi * t), pm).value == pytest.approx(-1)


def test_dirac_limit_angle():
    assert dirac_limit_angle(measure(0.5, 0.5), 1) == 0
    assert dirac_limit_angle(measure(0.5, 0.5), 2) == 0
    assert dirac_limit_angle(measure(0.2, 0.3, 0.5), 2) == 0.5
    assert dirac_limit_angle(measure(0.2, 0.3, 0.5), 3) == 0
    with pytest.raises(InputError):
        dirac_limit_angle(measure(0.5, 0.5), 3)


def test_sample_angles_determinism_and_mean():
    m = measure(0.5, 0.5)
    a = sample_angles(m, 20000, 40, seed=11)
    assert np.array_equal(a, sample_angles(m, 20000, 40, seed=11))
    assert not np.array_equal(a, sample_angles(m, 20000, 40, seed=12))
    assert abs(a.mean() - 0.5) < 3 / math.sqrt(a.size)
    assert np.all((a >= 0) & (a < 1))
    with pytest.raises(InputError):
        sample_angles(m, 10, 20, seed=0)


@pytest.mark.parametrize("p", [(0.3, 0.7), (0.2, 0.5, 0.3)])
def test_sample_cylinder_frequencies(p):
    m = measure(*p)
    d, n = len(p), 50000
    a = sample_angles(m, n, 40, seed=5)
    idx = np.floor(a * d ** 3).astype(int)
    counts = np.bincount(idx, minlength=d ** 3)
    for j in range(d ** 3):
        q = cylinder_measure(Word.from_index(j, 3, d), m.weights)
        assert abs(counts[j] / n - q) <= 4 * math.sqrt(q * (1 - q) / n)
