"""Monodromy, multiplier spectrum, power iteration, Q classification."""

import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oscq
from oscq.errors import EigenFailureError, NonSeparatedSpectrumWarning
from oscq.floquet import eigen_spectrum, lambda2_power, q_factor, sort_spectrum
from oracles import assert_spectra_match, char_poly_coeffs, durand_kerner

PHI = (math.sqrt(5.0) + 1.0) / 2.0


# --- eigen_spectrum -------------------------------------------------------

def test_spectrum_of_diagonal_matrix():
    lam = eigen_spectrum(np.diag([1.0, 0.5, 0.1]))
    np.testing.assert_allclose(lam, [1.0, 0.5, 0.1], atol=1e-14)


def test_spectrum_of_rotation_is_unit_conjugate_pair():
    th = 0.7
    R = np.array([[math.cos(th), -math.sin(th)], [math.sin(th), math.cos(th)]])
    lam = eigen_spectrum(R)
    np.testing.assert_allclose(np.abs(lam), [1.0, 1.0], atol=1e-14)
    # deterministic order: positive imaginary part first
    assert lam[0].imag > 0 > lam[1].imag
    np.testing.assert_allclose(lam[0], np.exp(1j * th), atol=1e-14)


def test_spectrum_matches_characteristic_polynomial_oracle():
    rng = np.random.default_rng(11)
    for _ in range(20):
        n = int(rng.integers(2, 7))
        A = rng.standard_normal((n, n))
        lam = eigen_spectrum(A)
        roots = sort_spectrum(durand_kerner(char_poly_coeffs(A)))
        assert_spectra_match(lam, roots, 1e-8)


def test_spectrum_rejects_nonfinite_and_nonsquare():
    with pytest.raises(EigenFailureError):
        eigen_spectrum(np.array([[np.nan, 0.0], [0.0, 1.0]]))
    with pytest.raises(ValueError):
        eigen_spectrum(np.zeros((2, 3)))


# --- lambda2_power --------------------------------------------------------

def test_power_iteration_on_diagonal_case():
    lam2 = lambda2_power(np.diag([1.0, 0.5, 0.1]), np.array([1.0, 0.0, 0.0]))
    assert abs(lam2 - 0.5) < 1e-10


def test_power_iteration_matches_spectrum_on_ring(ring100):
    v1 = oscq.phase_velocity(ring100.dae, ring100.pss)
    lam2 = lambda2_power(ring100.xT, v1)
    assert abs(abs(lam2) - PHI ** -6) / PHI ** -6 < 0.1
    assert abs(abs(lam2) - abs(ring100.multipliers[1])) < 1e-6 * abs(ring100.multipliers[1])


def test_power_iteration_matches_spectrum_on_lc(lc_k20):
    v1 = oscq.phase_velocity(lc_k20.dae, lc_k20.pss)
    lam2 = lambda2_power(lc_k20.xT, v1)
    assert abs(abs(lam2) - abs(lc_k20.multipliers[1])) < 1e-6 * abs(lc_k20.multipliers[1])


def test_power_iteration_falls_back_on_complex_pair():
    th = 0.9
    A = np.diag([1.0, 1.0, 1.0])
    A[1:, 1:] = 0.8 * np.array([[math.cos(th), -math.sin(th)], [math.sin(th), math.cos(th)]])
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        lam2 = lambda2_power(A, np.array([1.0, 0.0, 0.0]), max_iter=300)
    assert any(issubclass(w.category, NonSeparatedSpectrumWarning) for w in caught)
    assert abs(abs(lam2) - 0.8) < 1e-8


# --- monodromy on shipped models -------------------------------------------

def test_phase_mode_is_unit_eigenvector(ring100, lc_k1, lc_k20, stno_sph):
    for pipe in (ring100, lc_k1, lc_k20, stno_sph):
        v = oscq.phase_velocity(pipe.dae, pipe.pss)
        v = v / np.linalg.norm(v)
        Xv = pipe.xT @ v
        assert np.linalg.norm(Xv - v) <= 1e-3
        cosang = np.clip((Xv / np.linalg.norm(Xv)) @ v, -1.0, 1.0)
        assert math.degrees(math.acos(cosang)) < 2.0
        assert min(abs(m - 1.0) for m in pipe.multipliers) <= 1e-3


def test_lossless_lc_multipliers_on_unit_circle():
    dae = oscq.build_lc(K=0.0)
    T = 2.0 * math.pi * math.sqrt(0.5e-9 * 0.5e-9)
    cfg = oscq.IntegratorConfig().with_step(T / 2000)
    pss = oscq.detect_period(
        dae, np.array([1.0, 0.0]), 0.0, oscq.PhaseCondition(0, 0.0), cfg, t_hint=T
    )
    lam = eigen_spectrum(oscq.fundamental_matrix(dae, pss))
    np.testing.assert_allclose(np.abs(lam), [1.0, 1.0], atol=1e-6)


def test_ring_multipliers_near_golden_ratio_powers(ring100):
    mods = np.abs(ring100.multipliers)
    assert abs(mods[0] - 1.0) < 1e-6
    assert abs(mods[1] - PHI ** -6) / PHI ** -6 < 0.02
    assert abs(mods[2] - PHI ** -12) / PHI ** -12 < 0.02


def test_monodromy_grid_convergence_of_lambda2(ring100, ring100_fine, lc_k1, lc_k1_fine):
    for coarse, fine in ((ring100, ring100_fine), (lc_k1, lc_k1_fine)):
        l2c = abs(coarse.multipliers[1])
        l2f = abs(fine.multipliers[1])
        assert abs(l2c - l2f) / l2f < 0.01


def test_fundamental_matrix_validates_model_identity(ring100, lc_k1):
    with pytest.raises(ValueError):
        oscq.fundamental_matrix(lc_k1.dae, ring100.pss)


# --- q_factor --------------------------------------------------------------

def test_q_factor_known_values():
    rep = q_factor([1.0, 0.0557], unit_tol=1e-4)
    assert rep.verdict == "Finite"
    assert abs(rep.q_value - math.log(0.05) / math.log(0.0557)) < 1e-12
    rep = q_factor([1.0, 0.54], unit_tol=1e-4)
    assert abs(rep.q_value - 4.8617) < 1e-3
    rep = q_factor([1.0, 0.94], unit_tol=1e-4)
    assert abs(rep.q_value - 48.42) < 0.02
    assert rep.q_rounded == 48


def test_q_factor_tight_definition_point():
    rep = q_factor([1.0, 0.05], unit_tol=1e-4)
    assert rep.q_value == 1.0


def test_q_factor_conservative_and_unstable_verdicts():
    assert q_factor([1.0, 1.0, 0.7], unit_tol=1e-4).verdict == "Infinite"
    assert q_factor([1.0, 1.2], unit_tol=1e-4).verdict == "Unstable"
    # growth wins over an extra unit multiplier
    assert q_factor([1.0, 1.0, 1.2], unit_tol=1e-4).verdict == "Unstable"
    assert q_factor([0.9, 0.5], unit_tol=1e-4).verdict == "NotOscillating"


def test_q_factor_reports_floquet_exponents():
    T = 2.0
    rep = q_factor([1.0, 0.5], unit_tol=1e-4, period=T)
    mu2 = rep.floquet_exponents[1]
    assert abs(mu2 - math.log(0.5) / T) < 1e-14
    assert abs(rep.floquet_exponents[0]) < 1e-12


def test_ring_floquet_exponents_match_rc_rates(ring100):
    # ideal-limit LPTV rates are -1/tau and -2/tau
    mu = ring100.report.floquet_exponents
    assert abs(mu[1].real + 1.0) < 0.01
    assert abs(mu[2].real + 2.0) < 0.01


@given(
    a=st.floats(min_value=1e-3, max_value=0.985),
    b=st.floats(min_value=1e-3, max_value=0.985),
)
@settings(max_examples=60, deadline=None)
def test_q_factor_strictly_decreasing_in_lambda2(a, b):
    lo, hi = sorted((a, b))
    if hi - lo < 1e-9:
        return
    q_lo = q_factor([1.0, lo], unit_tol=1e-4).q_value
    q_hi = q_factor([1.0, hi], unit_tol=1e-4).q_value
    assert q_hi > q_lo


def test_q_factor_empty_spectrum_rejected():
    with pytest.raises(ValueError):
        q_factor([])
