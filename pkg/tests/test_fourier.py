import numpy as np
import pytest

from selfaffine import HomogeneousIFS, TransformQuery, bernoulli, mu_hat, mu_hat_batch, renormalize
from selfaffine.fourier import (decay_upper_bound, digit_decay_bound, dist_to_int, factor_bound,
                                one_step_factor, reduce_two_digit, truncation_terms,
                                verify_factorization, verify_renormalization)

from conftest import PHI

CANTOR_MU1 = 0.371437356708766  # mpmath, 200 factors
GOLDEN_BOUND_N5 = 0.220065524286902  # mpmath powers of phi


def sinc_modulus(xi):
    x = 2 * np.pi * np.asarray(xi)
    return np.abs(np.sin(x) / x)


@pytest.mark.parametrize("xi,expected", [(0.0, 1 + 0j), (0.5, 0j), (0.25, 0.5 - 0.5j)])
def test_one_step_factor(uniform, xi, expected):
    assert abs(one_step_factor(uniform, [xi]) - expected) < 1e-15


def test_uniform_quarter(uniform):
    res = mu_hat(uniform, TransformQuery([0.25]))
    assert abs(res.modulus - 2 / np.pi) < 1e-12
    assert res.converged and res.bound <= 1e-12


def test_zero_frequency(panel):
    for ifs in panel.values():
        res = mu_hat(ifs, TransformQuery(np.zeros(ifs.dim)))
        assert res.value == 1


def test_cantor_value(cantor):
    assert abs(mu_hat(cantor, TransformQuery([1.0])).modulus - CANTOR_MU1) < 1e-12


def test_sinc_envelope(uniform, rng):
    xi = rng.uniform(0.1, 1000, 200)
    vals, _, bounds = mu_hat_batch(uniform, xi)
    assert np.max(np.abs(np.abs(vals) - sinc_modulus(xi))) < 1e-10
    assert np.all(bounds <= 1e-12)


def test_hermitian_and_bounded(panel, rng):
    for ifs in panel.values():
        xi = rng.uniform(-50, 50, (40, ifs.dim))
        v, _, b = mu_hat_batch(ifs, xi)
        w, _, _ = mu_hat_batch(ifs, -xi)
        assert np.all(np.abs(v) <= 1 + 1e-12)
        assert np.max(np.abs(v - np.conj(w))) < 1e-10


def test_truncation_bound_is_honest(golden, rng):
    xi = rng.uniform(1, 1e4, (30, 1))
    coarse, _, bound = mu_hat_batch(golden, xi, tolerance=1e-4)
    fine, _, _ = mu_hat_batch(golden, xi, tolerance=1e-14)
    assert np.all(np.abs(coarse - fine) <= bound + 1e-14)


def test_max_terms_flag(golden):
    res = mu_hat(golden, TransformQuery([1e6], tolerance=1e-12, max_terms=5))
    assert not res.converged and res.terms == 5 and res.bound > 1e-12
    t, b = truncation_terms(golden, np.array([[1e6]]), 1e-12, 10_000)
    assert t[0] > 5 and b[0] <= 1e-12


@pytest.mark.parametrize("theta,xi,n,eta", [
    ([2.0], [5.0], 2, [1.25]),
    ([2.0, 3.0], [5.0, 9.0], 2, [1.25, 1.0]),
    ([2.0], [1.0], 0, [1.0]),
])
def test_renormalize_examples(theta, xi, n, eta):
    r = renormalize(theta, xi)
    assert r.n_steps == n
    np.testing.assert_array_equal(r.eta, eta)


def test_renormalize_rejects_small():
    with pytest.raises(ValueError):
        renormalize([2.0], [0.5])


def test_factor_bound():
    assert abs(factor_bound([0.5, 0.5], [0, 0.5], 2) - (1 - np.pi / 4)) < 1e-15
    assert factor_bound([0.5, 0.5], [0, 3.0], 2) == 1.0
    val = factor_bound([0.2, 0.8], [0, 0.3], 2)
    assert abs(val - 0.886902664) < 1e-9
    assert abs(0.2 + 0.8 * np.exp(-0.6j * np.pi)) <= val
    with pytest.raises(ValueError):
        factor_bound([0.5, 0.5], [0, 0.3], 1)


def test_decay_upper_bound_examples():
    assert decay_upper_bound([2.0], [1.0], 0.5, 0) == 1.0
    assert decay_upper_bound([2.0], [1.0], 0.5, 2) == 1.0
    assert abs(decay_upper_bound([PHI], [1.0], 0.5, 5) - GOLDEN_BOUND_N5) < 1e-12


def test_dist_to_int():
    np.testing.assert_allclose(dist_to_int(np.array([0.2, 0.7, -1.4, 3.0])), [0.2, 0.3, 0.4, 0.0])


def test_decay_bound_dominates(rng):
    ifs = HomogeneousIFS([1.7, 2.6], [[0.3, -0.2], [1.1, 0.5]], [0.3, 0.7])
    for xi in rng.uniform(-1e4, 1e4, (60, 2)):
        assert mu_hat(ifs, TransformQuery(xi)).modulus <= digit_decay_bound(ifs, xi) + 1e-8


def test_reduce_two_digit(rng):
    ifs = HomogeneousIFS([1.7, 2.6], [[0.3, -0.2], [1.1, 0.5]], [0.3, 0.7])
    red, scale = reduce_two_digit(ifs)
    xi = rng.uniform(-20, 20, (10, 2))
    a, _, _ = mu_hat_batch(ifs, xi)
    b, _, _ = mu_hat_batch(red, xi * scale)
    np.testing.assert_allclose(np.abs(a), np.abs(b), atol=1e-10)
    with pytest.raises(ValueError):
        reduce_two_digit(HomogeneousIFS([2.0, 3.0], [[0, 0], [1, 0]], [0.5, 0.5]))


def test_factorization(uniform, diag23, rng):
    assert verify_factorization(uniform, 2, [0.0]).residual == 0
    assert verify_factorization(uniform, 2, [0.25]).ok
    for xi in rng.uniform(1, 10, (5, 2)):
        assert verify_factorization(diag23, 3, xi).ok


def test_renormalization_identity_large(panel, rng):
    for ifs in panel.values():
        for _ in range(10):
            xi = rng.uniform(-1, 1, ifs.dim) * 10 ** rng.uniform(0, 6)
            xi[np.argmax(np.abs(xi))] = np.copysign(max(1.0, abs(xi).max()), xi[np.argmax(np.abs(xi))])
            chk = verify_renormalization(ifs, xi)
            assert chk.ok, (xi, chk.residual)
