import math

import numpy as np
import pytest

from selfaffine.erdos_kahane import (BadSetQuery, CoverBudgetExceeded, HorizonTooDeep, PreAsymptoticIndex,
                                     build_tables, closed_form_tilde, compute_trace, enumerate_cover,
                                     eta_grid, predict_next, predictor_consistency_scan, rational_predictor,
                                     reconstruct_theta_d, sweep_bad_parameters, theta_components)
from selfaffine.ifs import ParameterBox

from conftest import PHI


def test_trace_integer_powers():
    tr = compute_trace([2.0], [1.0], 10)
    assert tr.K.tolist() == [2 ** n for n in range(11)]
    assert np.all(tr.eps == 0)
    tr = compute_trace([2.0, 3.0], [1.0, 1.0], 8)
    assert tr.K.tolist() == [2 ** n + 3 ** n for n in range(9)]


def test_trace_golden():
    tr = compute_trace([PHI], [1.0], 25)
    assert tr.K[4] == 7 and abs(tr.eps[4] + 0.1458980337503155) < 1e-12
    assert np.all(np.abs(tr.eps) <= 0.5)
    assert abs(tr.eps[25]) < 1e-5


def test_trace_ties_round_to_even():
    tr = compute_trace([3.0], [1.5], 3)
    assert tr.K[0] == 2 and tr.eps[0] == -0.5
    assert tr.K[1] == 4  # 4.5 -> 4


def test_trace_guards():
    with pytest.raises(HorizonTooDeep, match="horizon too deep"):
        compute_trace([2.0], [1.0], 60)
    with pytest.raises(ValueError):
        compute_trace([2.0, 3.0], [2.0, 1.0], 5)
    with pytest.raises(ValueError):
        compute_trace([2.0, 3.0], [0.2, 0.5], 5)


def test_tables_examples():
    exact, tilde = build_tables(compute_trace([2.0, 3.0], [1.0, 1.0], 10))
    np.testing.assert_array_equal(exact.rows[1], 3.0 ** np.arange(10))
    assert reconstruct_theta_d(exact, 4) == 3.0
    ex1, _ = build_tables(compute_trace([PHI], [1.0], 5))
    assert len(ex1.rows) == 1 and ex1.rows[0].tolist() == [1, 2, 3, 4, 7, 11]


def test_closed_form_table_d3(rng):
    theta = [1.7, 2.3, 3.1]
    eta = [rng.uniform(-1, 1), rng.uniform(-1, 1), 1.4]
    _, tilde = build_tables(compute_trace(theta, eta, 20))
    for j in range(3):
        for n in range(0, 21 - j):
            val, scale = closed_form_tilde(theta, eta, j, n)
            assert abs(tilde.rows[j][n] - val) <= 1e-9 * scale


def test_reconstruct_errors():
    exact, _ = build_tables(compute_trace([2.0, 3.0], [1.0, 1.0], 6))
    with pytest.raises(IndexError):
        reconstruct_theta_d(exact, 6)
    flat, _ = build_tables(compute_trace([2.0, 2.0], [1.0, 1.0], 6))
    with pytest.raises(PreAsymptoticIndex, match="pre-asymptotic"):
        reconstruct_theta_d(flat, 2)


def test_reconstruct_d2_rate():
    exact, _ = build_tables(compute_trace([2.0, 2.5], [1.0, 1.2], 17))
    assert abs(reconstruct_theta_d(exact, 15) - 2.5) < 1e3 * 2.0 ** -15


def test_predictor_examples():
    for n in range(1, 12):
        assert rational_predictor([2 ** n, 2 ** (n + 1)], []) == 2 ** (n + 2)
    K = compute_trace([PHI], [1.0], 25).K.tolist()
    # windows up to n = 4 still carry |eps| >= 0.146 and mispredict
    assert predict_next(K[4:6], []) == 17 and K[6] == 18
    for n in range(5, 24):
        assert predict_next(K[n:n + 2], []) == K[n + 2]
    K = compute_trace([2.0, 3.0], [1.0, 1.0], 15).K.tolist()
    for n in range(0, 12):
        assert rational_predictor(K[n:n + 3], [2.0]) == K[n + 3]
    with pytest.raises(ValueError):
        rational_predictor([1, 2, 3], [])


def test_consistency_scan():
    rep = predictor_consistency_scan([2.0], [[1.0]], 20)
    assert rep.branching == 0 and rep.rho_star == 0.5
    for th in (1.9, 2.0, 2.1):
        rep = predictor_consistency_scan([th], eta_grid(1, 2.0, 100), 20, rho=0.05)
        assert rep.rho_star > 0 and rep.exact_rate_below_rho == 1.0
    rep = predictor_consistency_scan([1.8, 2.7], eta_grid(2, 2.7, 20), 20)
    assert 0 < rep.branching < math.inf and rep.windows > 0


def test_eta_grid():
    g = eta_grid(2, 2.0, 5)
    assert g.shape == (25, 2)
    assert np.all(np.abs(g[:, 0]) <= g[:, 1]) and g[:, 1].min() == 1.0


def test_query_validation():
    box = ParameterBox(1.5, 2.0, 0.3, 1)
    with pytest.raises(ValueError):
        BadSetQuery(box, (), 10, 0.6, 0.05)
    with pytest.raises(ValueError):
        BadSetQuery(box, (), 10, 0.1, 0.0)
    with pytest.raises(ValueError):
        BadSetQuery(box, (1.7,), 10, 0.1, 0.05)
    assert BadSetQuery(box, (), 10, 0.1, 0.05).max_exceptions == 1


def test_theta_components():
    q = BadSetQuery(ParameterBox(1.5, 2.5, 0.3, 2), (1.9,), 6, 0.2, 0.05)
    comps = theta_components(q)
    assert len(comps) == 2
    np.testing.assert_allclose(comps, [(1.5, 1.6), (2.2, 2.5)])


def test_cover_contains_pisot_like():
    q = BadSetQuery(ParameterBox(1.5, 2.0, 0.3, 1), (), 10, 0.1, 0.05)
    rep = enumerate_cover(q)
    assert rep.covers([2.0, PHI]).all()
    bad = sweep_bad_parameters(q)
    assert bad.size > 0 and rep.covers(bad).all()
    assert rep.bound == pytest.approx(rep.sequence_count)


def test_cover_no_exceptions_is_small():
    q = BadSetQuery(ParameterBox(1.5, 2.0, 0.3, 1), (), 12, 0.05, 0.05)
    assert q.max_exceptions == 0
    rep = enumerate_cover(q)
    assert rep.sequence_count < enumerate_cover(BadSetQuery(q.box, (), 12, 0.125, 0.05)).sequence_count


def test_cover_d2_sound():
    q = BadSetQuery(ParameterBox(1.5, 2.5, 0.3, 2), (1.8,), 6, 0.2, 0.05)
    rep = enumerate_cover(q)
    bad = sweep_bad_parameters(q, eta_points=40)
    assert bad.size > 0 and rep.covers(bad).all()


def test_cover_budget():
    q = BadSetQuery(ParameterBox(1.5, 2.0, 0.3, 1), (), 12, 0.125, 0.05)
    with pytest.raises(CoverBudgetExceeded) as info:
        enumerate_cover(q, budget=20)
    assert info.value.partial_count >= 0


def test_cover_limits():
    with pytest.raises(ValueError):
        enumerate_cover(BadSetQuery(ParameterBox(1.5, 2.0, 0.3, 1), (), 31, 0.1, 0.05))


def test_lucas_reconstruction_rate():
    # L_{n+1}/L_n - phi = -sqrt(5) (-1)^n phi^(-2n) / (1 + (-1)^n phi^(-2n))
    exact, _ = build_tables(compute_trace([PHI], [1.0], 25))
    ns = np.arange(5, 21)
    err = np.array([abs(reconstruct_theta_d(exact, int(n)) - PHI) for n in ns])
    assert np.all(err <= 3 * PHI ** (-2.0 * ns))
    assert np.all(err <= PHI ** (-1.0 * ns))
    slope = np.polyfit(ns, np.log(err), 1)[0]
    assert abs(slope + 2 * np.log(PHI)) < 0.01
