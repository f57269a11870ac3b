import json

import numpy as np
import pytest

from selfaffine import (HomogeneousIFS, ParameterBox, bernoulli, is_affinely_irreducible, load_ifs,
                        normalize, power_factor_system, validate)
from selfaffine.ifs import dump_ifs, ifs_from_dict, renormalize_probs, require_valid


def test_valid_uniform(uniform):
    rep = validate(uniform)
    assert rep.ok and not rep.problems


def test_contraction_violation():
    rep = validate(HomogeneousIFS([0.5], [[0.0], [1.0]], [0.5, 0.5]))
    assert not rep.ok
    assert any("|theta_1| <= 1" in p for p in rep.problems)


def test_probability_sum():
    rep = validate(HomogeneousIFS([2.0], [[0.0], [1.0]], [0.7, 0.4]))
    assert any("probs sum != 1" in p for p in rep.problems)
    with pytest.raises(ValueError):
        require_valid(HomogeneousIFS([2.0], [[0.0], [1.0]], [0.7, 0.4]))


def test_zero_probability_and_duplicates():
    assert not validate(HomogeneousIFS([2.0], [[0.0], [1.0]], [1.0, 0.0])).ok
    assert not validate(HomogeneousIFS([2.0], [[1.0], [1.0]], [0.5, 0.5])).ok


def test_renormalize_probs():
    ifs = renormalize_probs(HomogeneousIFS([2.0], [[0.0], [1.0]], [0.7, 0.7]))
    np.testing.assert_allclose(ifs.probs, [0.5, 0.5])


def test_arrays_read_only(uniform):
    with pytest.raises(ValueError):
        uniform.theta[0] = 5.0


@pytest.mark.parametrize("digits,expected", [
    ([[3.0], [4.0]], [[0.0], [1.0]]),
    ([[0.0], [1.0]], [[0.0], [1.0]]),
    ([[1.0, 1.0], [2.0, 3.0]], [[0.0, 0.0], [1.0, 2.0]]),
])
def test_normalize(digits, expected):
    d = len(digits[0])
    ifs = HomogeneousIFS([2.0] * d if d == 1 else [2.0, 3.0], digits, [0.5, 0.5])
    out = normalize(ifs)
    np.testing.assert_array_equal(out.digits, expected)
    assert normalize(out) == out


def test_affine_irreducibility(diag23):
    assert is_affinely_irreducible(diag23)
    assert not is_affinely_irreducible(HomogeneousIFS([2.0, 3.0], [[0, 0], [1, 0]], [0.5, 0.5]))
    assert is_affinely_irreducible(bernoulli(2.0))
    perm = HomogeneousIFS(diag23.theta, diag23.digits[::-1], diag23.probs[::-1])
    assert is_affinely_irreducible(perm) == is_affinely_irreducible(normalize(perm))


def test_power_factor_system(uniform, diag23):
    a = power_factor_system(uniform, 2, 0)
    np.testing.assert_array_equal(a.theta, [4.0])
    np.testing.assert_array_equal(a.digits, [[0.0], [1.0]])
    b = power_factor_system(uniform, 2, 1)
    np.testing.assert_array_equal(b.digits, [[0.0], [0.5]])
    c = power_factor_system(diag23, 3, 2)
    np.testing.assert_allclose(c.theta, [8.0, 27.0])
    np.testing.assert_allclose(c.digits, [[0, 0], [0.25, 1 / 9]])
    assert is_affinely_irreducible(c)
    with pytest.raises(ValueError):
        power_factor_system(uniform, 2, 2)


def test_parameter_box():
    box = ParameterBox(1.5, 2.5, 0.3, 2)
    assert (1.8, 2.2) in box
    assert (1.8, 1.9) not in box  # too close
    assert (1.2, 2.0) not in box
    with pytest.raises(ValueError):
        ParameterBox(2.0, 1.5, 0.3)


def test_json_round_trip(tmp_path, diag23):
    path = tmp_path / "ifs.json"
    dump_ifs(diag23, path)
    assert load_ifs(path) == diag23
    data = json.loads(path.read_text())
    assert set(data) == {"theta", "digits", "probs"}
    assert ifs_from_dict(data) == diag23
