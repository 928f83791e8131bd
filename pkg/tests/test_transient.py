"""Implicit integrator: accuracy orders, conservation, scheme character."""

import math

import numpy as np
import pytest

import oscq
from oscq.dae import DaeSystem, ParameterSet
from oscq.errors import NewtonFailureError, SingularMatrixError
from oscq.transient import IntegratorConfig, integrate, run_fixed_grid


def linear_decay_model(tau=1.0):
    return DaeSystem(
        name="decay",
        n=1,
        q_eval=lambda x: x.copy(),
        f_eval=lambda x: x / tau,
        jq_eval=lambda x: np.eye(1),
        jf_eval=lambda x: np.eye(1) / tau,
        params=ParameterSet({"tau": tau}),
        state_names=("x",),
        sampling_box=((-2.0, 2.0),),
    )


def test_trapezoidal_linear_decay_hits_exp_minus_one():
    dae = linear_decay_model()
    cfg = IntegratorConfig(method="trapezoidal", step=1e-3)
    wf = integrate(dae, np.array([1.0]), 0.0, 1.0, cfg)
    assert abs(wf.states[-1, 0] - math.exp(-1.0)) < 1e-6


@pytest.mark.parametrize("method,expected_order", [("backward-euler", 1), ("trapezoidal", 2)])
def test_step_halving_shows_order_of_accuracy(method, expected_order):
    dae = linear_decay_model()
    exact = math.exp(-1.0)
    errs = []
    for n_steps in (200, 400):
        cfg = IntegratorConfig(method=method)
        wf = integrate(dae, np.array([1.0]), 0.0, 1.0, cfg, n_steps=n_steps)
        errs.append(abs(wf.states[-1, 0] - exact))
    ratio = errs[0] / errs[1]
    assert 2 ** expected_order * 0.8 < ratio < 2 ** expected_order * 1.25


@pytest.mark.parametrize("method", ["backward-euler", "trapezoidal"])
def test_chemical_sum_is_preserved_to_newton_tolerance(method):
    dae = oscq.build_chemical()
    cfg = IntegratorConfig(method=method, step=8.5 / 2000)
    x0 = np.array([0.9, 0.4, 0.25])
    wf = integrate(dae, x0, 0.0, 3 * 8.5, cfg)
    sums = wf.states.sum(axis=1)
    assert np.abs(sums - sums[0]).max() < 1e-9


def test_lossless_lc_trapezoidal_closes_backward_euler_decays():
    dae = oscq.build_lc(K=0.0)
    T = 2.0 * math.pi * math.sqrt(0.5e-9 * 0.5e-9)
    x0 = np.array([1.0, 0.0])
    # trapezoidal phase lag is (w*h)^3/12 per step; 6000 steps puts the
    # one-period closure under 1e-6 while the amplitude is exact
    trap = integrate(dae, x0, 0.0, T, IntegratorConfig(method="trapezoidal"), n_steps=6000)
    assert np.linalg.norm(trap.states[-1] - x0) / np.linalg.norm(x0) < 1e-6
    assert abs(np.linalg.norm(trap.states[-1]) - 1.0) < 1e-12
    be = integrate(dae, x0, 0.0, T, IntegratorConfig(method="backward-euler"), n_steps=6000)
    assert np.linalg.norm(be.states[-1]) < np.linalg.norm(x0) * (1.0 - 1e-4)


def test_accepted_steps_satisfy_discrete_residual():
    dae = oscq.build_lc(K=5.0)
    cfg = IntegratorConfig(method="trapezoidal", newton_tol=1e-10)
    h = 3.1416e-9 / 2000
    states, _, _ = run_fixed_grid(dae, np.array([0.3, 0.1]), 0.0, h, 400, cfg)
    worst = 0.0
    for m in range(400):
        x0, x1 = states[m], states[m + 1]
        R = (dae.q(x1) - dae.q(x0)) / h + 0.5 * (dae.f(x1) + dae.f(x0))
        scale = max(
            np.abs((dae.q(x1) - dae.q(x0)) / h).max(),
            np.abs(dae.f(x1)).max(),
            np.abs(dae.f(x0)).max(),
        )
        worst = max(worst, np.abs(R).max() / scale)
    assert worst <= cfg.newton_tol


def test_newton_failure_reports_time_and_residual():
    dae = oscq.build_lc(K=20.0)
    cfg = IntegratorConfig(method="trapezoidal", newton_max_iter=1, step=1.0)
    with pytest.raises(NewtonFailureError) as err:
        integrate(dae, np.array([1.0, 1.0]), 0.0, 3.0, cfg)
    assert err.value.time is not None
    assert err.value.residual is not None


def test_singular_mass_matrix_raises_degeneracy_error():
    # dq/dx = 0 and df/dx = 0 with a nonzero residual: the iteration
    # matrix C/h + theta*G vanishes identically
    dae_sing = DaeSystem(
        name="degenerate",
        n=1,
        q_eval=lambda x: np.zeros(1),
        f_eval=lambda x: np.ones(1),
        jq_eval=lambda x: np.zeros((1, 1)),
        jf_eval=lambda x: np.zeros((1, 1)),
        params=ParameterSet({}),
        state_names=("x",),
        sampling_box=((-1.0, 1.0),),
    )
    cfg = IntegratorConfig(method="backward-euler", step=0.1, newton_tol=1e-14)
    with pytest.raises(SingularMatrixError):
        integrate(dae_sing, np.array([2.0]), 0.0, 1.0, cfg)


def test_waveform_validates_monotone_times_and_finiteness():
    with pytest.raises(ValueError):
        oscq.Waveform(times=np.array([0.0, 0.0]), states=np.zeros((2, 1)), model_id="t")
    with pytest.raises(ValueError):
        oscq.Waveform(times=np.array([0.0, 1.0]), states=np.array([[0.0], [np.nan]]), model_id="t")


def test_integrate_requires_step_or_count():
    dae = linear_decay_model()
    with pytest.raises(ValueError):
        integrate(dae, np.array([1.0]), 0.0, 1.0, IntegratorConfig())
    with pytest.raises(ValueError):
        integrate(dae, np.array([1.0]), 1.0, 0.5, IntegratorConfig(step=0.1))
