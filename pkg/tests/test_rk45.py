import numpy as np
import pytest
from scipy.integrate import solve_ivp

from sbdyn.errors import ContractViolationError
from sbdyn.rk45 import integrate_rk45


def test_exponential_decay_against_closed_form():
    res = integrate_rk45(
        lambda t, y: -y,
        (0.0, 5.0),
        np.array([1.0]),
        rtol=1e-8,
        atol=1e-10,
        first_step=1e-3,
        max_step=0.5,
    )
    assert res.ys[-1, 0] == pytest.approx(np.exp(-5.0), rel=1e-7)


def test_matches_scipy_on_oscillator():
    def rhs(t, y):
        return np.array([y[1], -y[0]])

    y0 = np.array([1.0, 0.0])
    res = integrate_rk45(rhs, (0.0, 10.0), y0, rtol=1e-7, atol=1e-9, first_step=1e-2, max_step=1.0)
    ref = solve_ivp(rhs, (0.0, 10.0), y0, method="RK45", rtol=1e-9, atol=1e-11)
    np.testing.assert_allclose(res.ys[-1], ref.y[:, -1], atol=1e-6)


def test_evaluation_accounting():
    calls = 0

    def rhs(t, y):
        nonlocal calls
        calls += 1
        return -10.0 * y

    res = integrate_rk45(
        rhs, (0.0, 2.0), np.array([1.0]), rtol=1e-6, atol=1e-9, first_step=0.5, max_step=2.0
    )
    assert res.nfev == calls
    assert res.nfev == 1 + 6 * (res.n_accepted + res.n_rejected)
    assert res.n_rejected > 0  # oversized first step must be rejected
    assert len(res.steps) == res.n_accepted + res.n_rejected


def test_callback_fires_on_accepted_steps_only():
    seen = []
    res = integrate_rk45(
        lambda t, y: -y,
        (0.0, 1.0),
        np.array([1.0]),
        rtol=1e-6,
        atol=1e-9,
        first_step=1e-2,
        max_step=0.2,
        callback=lambda t, y: seen.append(t),
    )
    assert len(seen) == res.n_accepted + 1  # initial point included
    assert seen[0] == 0.0
    assert seen[-1] == pytest.approx(1.0)
    np.testing.assert_allclose(seen, res.ts)


def test_max_step_respected():
    res = integrate_rk45(
        lambda t, y: np.zeros_like(y),
        (0.0, 1.0),
        np.array([1.0]),
        rtol=1e-6,
        atol=1e-9,
        first_step=1e-2,
        max_step=0.1,
    )
    assert np.max(np.diff(res.ts)) <= 0.1 + 1e-12


def test_invalid_spans_rejected():
    with pytest.raises(ContractViolationError):
        integrate_rk45(lambda t, y: y, (1.0, 0.0), np.array([1.0]), 1e-6, 1e-9, 1e-2, 0.1)
    with pytest.raises(ContractViolationError):
        integrate_rk45(lambda t, y: y, (0.0, 1.0), np.array([1.0]), 1e-6, 1e-9, -1e-2, 0.1)
