
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import linprog

from afcmemory.benchmark import (
    classical_bound,
    classical_bound_distribution,
    estimation_fidelity,
    fidelity_curves,
    fock_bound,
    poisson_weights,
    quantum_crossing,
)
from afcmemory.qubit import MEASURED_FIDELITIES


def _linprog_bound(mu, eta):
    w = poisson_weights(mu)
    f = estimation_fidelity(np.arange(len(w)))
    res = linprog(-w * f, A_eq=[w], b_eq=[eta], bounds=[(0, 1)] * len(w), method="highs",
                  options={"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10})
    assert res.success
    # normalise by the acceptance the solver actually reached
    return float((w * f) @ res.x / (w @ res.x))


def _grid_bound(mu, eta, step=0.01):
    w = poisson_weights(mu)
    f = estimation_fidelity(np.arange(len(w)))
    g = np.arange(0, 1 + step / 2, step)
    q1, q2, q3 = np.meshgrid(g, g, g, indexing="ij")
    best = -np.inf
    for tail in (0.0, 1.0):
        w_tail = w[5:].sum() * tail
        f_tail = (w[5:] * f[5:]).sum() * tail
        for q4 in g:
            acc = w[1] * q1 + w[2] * q2 + w[3] * q3 + w[4] * q4 + w_tail
            num = w[1] * f[1] * q1 + w[2] * f[2] * q2 + w[3] * f[3] * q3 + w[4] * f[4] * q4 + f_tail
            q0 = (eta - acc) / w[0]
            ok = (q0 >= 0) & (q0 <= 1)
            if ok.any():
                best = max(best, float(np.max((num + 0.5 * w[0] * q0)[ok])) / eta)
    return best


@pytest.mark.parametrize(
    "mu, expect",
    [(row[0], row[7]) for row in MEASURED_FIDELITIES],
)
def test_reference_bounds(mu, expect):
    assert classical_bound(mu, 0.022).fc == pytest.approx(expect, abs=0.007)


def test_fock_bound():
    assert fock_bound() == pytest.approx(2 / 3, abs=1e-12)


def test_brute_force_grid_oracle():
    fc = classical_bound(0.6, 0.022).fc
    grid = _grid_bound(0.6, 0.022)
    # the grid cannot beat the optimum and gets close to it
    assert grid <= fc + 1e-12
    assert grid == pytest.approx(fc, abs=2e-3)


@given(mu=st.floats(0.05, 10), eta=st.floats(1e-3, 1))
def test_linear_program_oracle(mu, eta):
    r = classical_bound(mu, eta)
    assert r.fc == pytest.approx(_linprog_bound(mu, min(eta, r.accepted_probability)), abs=1e-7)


@given(mu=st.floats(0.05, 10), eta=st.floats(1e-3, 1), click=st.booleans())
def test_strategy_structure(mu, eta, click):
    r = classical_bound(mu, eta, "click" if click else "eta")
    q = r.strategy
    frac = np.flatnonzero((q > 0) & (q < 1))
    assert frac.size <= 1
    # everything above the threshold is accepted
    assert np.all(q[r.threshold + 1 :] == 1.0)
    target = eta if not click else -np.expm1(-mu * eta)
    assert abs(r.accepted_probability - min(target, r.weights.sum())) <= 1e-9
    assert 0.5 <= r.fc <= 1.0


def test_guards():
    for args in ((0.0, 0.5), (1.0, 0.0), (1.0, 1.5)):
        with pytest.raises(ValueError):
            classical_bound(*args)
    with pytest.raises(ValueError):
        classical_bound(1.0, 0.5, "other")
    with pytest.raises(ValueError):
        classical_bound_distribution([0.5, 0.5], 0.0)


def test_click_convention_differs():
    a = classical_bound(1.5, 0.022, "eta").fc
    b = classical_bound(1.5, 0.022, "click").fc
    assert a != b
    assert 0.5 <= b <= 1.0


def test_sign_pattern_at_measured_points():
    res = quantum_crossing(0.11, 2.5, 0.022)
    signs = [r["measured_minus_bound"] > 0 for r in res.table]
    mus = [r["mu_q"] for r in res.table]
    assert mus == sorted(mus)
    assert signs == [False, True, True, True, True]
    assert 0.6 < res.mu_star < 1.1


def test_crossing_reported_for_weak_noise():
    res = quantum_crossing(0.07, 1.0, 0.022)
    assert 0.01 < res.mu_star < 0.6
    assert not res.always_quantum


def test_vanishing_noise_always_quantum():
    res = quantum_crossing(1e-9, 1.0, 0.022)
    assert res.always_quantum
    assert res.mu_star == 0.01


def test_curves_columns():
    rows = fidelity_curves([0.5, 1.0], 0.11, 2.5, 0.022)
    assert set(rows[0]) == {"mu_q", "F_T", "F_C", "F_C_eta1", "F_fock"}
    assert all(r["F_fock"] == pytest.approx(2 / 3) for r in rows)


@pytest.mark.parametrize("mu", [0.1, 1.0, 5.0])
def test_poisson_tail(mu):
    w = poisson_weights(mu)
    assert 1 - w.sum() < 1e-11
