"""Independent oracles used by the tests.

These deliberately avoid the code paths they check: the characteristic
polynomial is built by Faddeev-LeVerrier and its roots found by
Durand-Kerner simultaneous iteration (no LAPACK eigensolver); the ideal
ring oscillator is simulated event-by-event with exact exponential arcs;
reference multipliers for smooth models come from a high-order adaptive
integrator on the variational equations (a different scheme family from
the fixed-step production code).
"""

from __future__ import annotations

import math

import numpy as np
from scipy.integrate import solve_ivp

GOLDEN_RATIO = (math.sqrt(5.0) + 1.0) / 2.0


def char_poly_coeffs(A: np.ndarray) -> np.ndarray:
    """Monic characteristic polynomial coefficients via Faddeev-LeVerrier.

    Returns [1, c1, ..., cn] with p(x) = x^n + c1 x^(n-1) + ... + cn.
    """
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    coeffs = np.empty(n + 1)
    coeffs[0] = 1.0
    M = np.eye(n)
    for k in range(1, n + 1):
        AM = A @ M
        ck = -np.trace(AM) / k
        coeffs[k] = ck
        M = AM + ck * np.eye(n)
    return coeffs


def durand_kerner(coeffs: np.ndarray, tol: float = 1e-14, max_iter: int = 5000) -> np.ndarray:
    """All roots of a monic polynomial by simultaneous iteration."""
    coeffs = np.asarray(coeffs, dtype=complex)
    n = coeffs.size - 1
    if n == 0:
        return np.array([], dtype=complex)

    def p(z):
        out = coeffs[0]
        for c in coeffs[1:]:
            out = out * z + c
        return out

    radius = 1.0 + np.abs(coeffs).max()
    # distinct, non-symmetric starting points
    z = radius * (0.4 + 0.9j) ** np.arange(1, n + 1)
    for _ in range(max_iter):
        delta = np.empty(n, dtype=complex)
        for k in range(n):
            denom = np.prod(z[k] - np.delete(z, k)) if n > 1 else 1.0
            delta[k] = p(z[k]) / denom
        z = z - delta
        if np.abs(delta).max() < tol * max(1.0, np.abs(z).max()):
            break
    return z


def ideal_ring_events(tau: float = 1.0, settle_events: int = 60):
    """Event-driven simulation of the ideal comparator ring oscillator.

    Each stage relaxes exponentially toward +-1 set by the sign of the
    previous stage; events are exact zero crossings.  Returns the settled
    (period, swing): period from six consecutive events, swing as the
    largest stage value at the events.
    """
    v = np.array([0.1, -0.5, 0.8])
    sgn = np.sign(v)
    t = 0.0
    event_times = []
    event_swings = []
    for _ in range(settle_events + 12):
        drive = -sgn[[2, 0, 1]]
        # earliest exact zero crossing among stages heading through zero
        t_hit, j_hit = np.inf, -1
        for j in range(3):
            if v[j] * drive[j] < 0:
                tj = tau * math.log((drive[j] - v[j]) / drive[j])
                if tj < t_hit:
                    t_hit, j_hit = tj, j
        if not np.isfinite(t_hit):
            raise RuntimeError("ring event simulation stalled")
        v = drive + (v - drive) * math.exp(-t_hit / tau)
        v[j_hit] = 0.0
        # the crossed stage's sign is its direction of motion from here on
        sgn = np.sign(v)
        sgn[j_hit] = np.sign(drive[j_hit])
        t += t_hit
        event_times.append(t)
        event_swings.append(np.abs(v).max())
    period = event_times[-1] - event_times[-7]
    swing = max(event_swings[-6:])
    return period, swing


def assert_spectra_match(got, expected, tol):
    """Greedy nearest-neighbour matching of two complex spectra."""
    got = list(np.asarray(got, dtype=complex))
    expected = list(np.asarray(expected, dtype=complex))
    assert len(got) == len(expected)
    for e in expected:
        dists = [abs(g - e) for g in got]
        k = int(np.argmin(dists))
        assert dists[k] <= tol, f"no match for {e} within {tol} (closest {got[k]})"
        got.pop(k)


def reference_multipliers(rhs, jac, x0, period, rtol=1e-11, atol=1e-13):
    """Monodromy eigenvalues from an adaptive high-order reference run.

    Integrates the state and variational equations together with DOP853,
    a path fully independent of the fixed-step implicit production
    scheme.
    """
    n = x0.size

    def aug(t, y):
        x = y[:n]
        X = y[n:].reshape(n, n)
        return np.concatenate([rhs(x), (jac(x) @ X).ravel()])

    y0 = np.concatenate([x0, np.eye(n).ravel()])
    sol = solve_ivp(aug, (0.0, period), y0, method="DOP853", rtol=rtol, atol=atol)
    XT = sol.y[n:, -1].reshape(n, n)
    lam = np.linalg.eigvals(XT)
    return lam[np.argsort(-np.abs(lam))]
