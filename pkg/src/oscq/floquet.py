"""Monodromy matrix, characteristic multipliers, and the settling Q factor.

The monodromy matrix X(T) is obtained by propagating the linearization of
the *same* discrete flow the transient scheme uses, over the cached C/G
tables of a converged periodic steady state.  Its eigenvalues (the
characteristic multipliers) classify the orbit: one multiplier sits at 1
for any self-sustained oscillation (the phase mode); the largest of the
remaining moduli, lambda2, is the per-cycle decay factor of amplitude
perturbations, and

    Q = log_{|lambda2|} 0.05

is the number of cycles for a perturbation to settle to 5% of its initial
size.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .dae import DaeSystem
from .errors import EigenFailureError, NonSeparatedSpectrumWarning
from .pss import PeriodicSteadyState
from .transient import lptv_propagate

# Classification tolerance for ||lambda| - 1|.  Sits above the observed
# unit-multiplier scatter of conservative (defective) monodromies at the
# default grid (~2e-3) and well below 1 - |lambda2| of every shipped
# dissipative model.
UNIT_TOL_DEFAULT = 5e-3

DECAY_TARGET = 0.05  # settled-amplitude fraction defining Q


@dataclass(frozen=True)
class QReport:
    """Stability verdict and settling figure of merit.

    verdict is one of Finite, Infinite (conservative: several unit
    multipliers), Unstable, NotOscillating.  ``q_value`` is present only
    for Finite.  ``floquet_exponents`` are ln(lambda)/T on the principal
    branch (None entries for zero multipliers), present when the period
    is known.
    """

    verdict: str
    q_value: float | None
    lambda2: complex
    lambda2_modulus: float
    multipliers: tuple[complex, ...]
    n_unit: int
    unit_tol: float
    period: float | None = None
    floquet_exponents: tuple[complex | None, ...] | None = None

    @property
    def q_rounded(self) -> int | None:
        """Display rounding of Q to the nearest integer cycle count."""
        return None if self.q_value is None else int(round(self.q_value))


@dataclass(frozen=True)
class MonodromyResult:
    """Monodromy matrix with its classified multiplier spectrum."""

    xT: np.ndarray
    multipliers: tuple[complex, ...]
    unit_tol: float
    n_unit: int
    lambda2: complex
    q_report: QReport

    def __post_init__(self):
        self.xT.setflags(write=False)


def fundamental_matrix(model: DaeSystem, pss: PeriodicSteadyState) -> np.ndarray:
    """X(T): the monodromy matrix of the linearized system along the PSS.

    Propagates X' with X(0) = I through the cached C/G tables using the
    same discretization (scheme and step) that produced the orbit, so the
    result is the exact Jacobian of the discrete period map.
    """
    if pss.model_id != model.name:
        raise ValueError(
            f"PSS belongs to model {pss.model_id!r}, not {model.name!r}"
        )
    if pss.c_table.shape[0] != pss.grid_points:
        raise ValueError("PSS tables are inconsistent with its grid")
    h = pss.period / (pss.grid_points - 1)
    return lptv_propagate(pss.c_table, pss.g_table, h, pss.cfg.theta)


def sort_spectrum(values: np.ndarray) -> np.ndarray:
    """Deterministic multiplier order: descending modulus, then real, then imag."""
    values = np.asarray(values, dtype=complex)
    order = np.lexsort((-values.imag, -values.real, -np.abs(values)))
    return values[order]


def eigen_spectrum(xT: np.ndarray) -> np.ndarray:
    """Full multiplier spectrum of the monodromy matrix.

    Balancing, Hessenberg reduction and shifted-QR iteration via LAPACK;
    non-convergence raises :class:`EigenFailureError` (never silent).
    """
    xT = np.asarray(xT, dtype=float)
    if xT.ndim != 2 or xT.shape[0] != xT.shape[1]:
        raise ValueError("xT must be a square matrix")
    if not np.all(np.isfinite(xT)):
        raise EigenFailureError("eigen_spectrum: matrix has non-finite entries")
    try:
        lam = np.linalg.eigvals(xT)
    except np.linalg.LinAlgError as exc:
        raise EigenFailureError(f"QR iteration failed to converge: {exc}") from exc
    return sort_spectrum(lam)


def _left_unit_vector(xT: np.ndarray) -> np.ndarray:
    """Left eigenvector of the multiplier nearest 1, by inverse iteration."""
    n = xT.shape[0]
    w = np.ones(n) / np.sqrt(n)
    shift = 1.0 + 1e-10
    B = xT.T - shift * np.eye(n)
    for attempt in range(4):
        try:
            for _ in range(3):
                w = np.linalg.solve(B, w)
                nrm = np.linalg.norm(w)
                if not np.isfinite(nrm) or nrm == 0.0:
                    raise np.linalg.LinAlgError
                w = w / nrm
            return w
        except np.linalg.LinAlgError:
            shift = 1.0 + 10.0 ** (-9 + attempt)
            B = xT.T - shift * np.eye(n)
            w = np.ones(n) / np.sqrt(n)
    raise EigenFailureError("inverse iteration for the phase left-eigenvector failed")


def lambda2_power(
    xT: np.ndarray,
    phase_vector: np.ndarray,
    tol: float = 1e-12,
    max_iter: int = 20000,
    seed: int = 0,
) -> complex:
    """lambda2 by power iteration with deflation of the phase mode.

    The phase direction (multiplier 1, right eigenvector ~ xdot_s(0)) is
    repeatedly projected out of the iterates using the left phase
    eigenvector from inverse iteration at shift 1.  When the remaining
    dominant eigenvalue is not separated in modulus (e.g. a complex
    pair), the iteration cannot settle: a warning is emitted and the full
    spectrum is used instead.
    """
    xT = np.asarray(xT, dtype=float)
    n = xT.shape[0]
    v1 = np.asarray(phase_vector, dtype=float)
    v1 = v1 / np.linalg.norm(v1)
    if n == 1:
        return complex(xT[0, 0])
    w1 = _left_unit_vector(xT)
    denom = w1 @ v1
    if abs(denom) < 1e-12:
        warnings.warn(
            "phase left/right eigenvectors are near-orthogonal; using full spectrum",
            NonSeparatedSpectrumWarning,
        )
        return _lambda2_from_spectrum(xT)

    def deflate(y):
        return y - v1 * ((w1 @ y) / denom)

    rng = np.random.default_rng(seed)
    y = deflate(rng.standard_normal(n))
    nrm = np.linalg.norm(y)
    if nrm == 0.0:
        return 0.0 + 0.0j
    y = y / nrm
    lam_prev = None
    for _ in range(max_iter):
        z = deflate(xT @ y)
        lam = float(y @ z)
        # a stagnant Rayleigh quotient is not enough (a rotating pair keeps
        # it constant); require an actual eigen-residual
        resid = np.linalg.norm(z - lam * y)
        nrm = np.linalg.norm(z)
        if nrm <= 1e-300:
            return 0.0 + 0.0j
        converged = (
            lam_prev is not None
            and abs(lam - lam_prev) <= tol * max(abs(lam), 1e-300)
            and resid <= 1e-9 * max(abs(lam), nrm)
        )
        if converged:
            return complex(lam)
        y = z / nrm
        lam_prev = lam
    warnings.warn(
        "power iteration did not separate lambda2 (|lambda2| ~ |lambda3|); "
        "falling back to the full spectrum",
        NonSeparatedSpectrumWarning,
    )
    return _lambda2_from_spectrum(xT)


def _lambda2_from_spectrum(xT: np.ndarray) -> complex:
    lam = eigen_spectrum(xT)
    k = int(np.argmin(np.abs(lam - 1.0)))
    rest = np.delete(lam, k)
    if rest.size == 0:
        return complex(lam[0])
    return complex(rest[np.argmax(np.abs(rest))])


def q_factor(
    multipliers,
    unit_tol: float = UNIT_TOL_DEFAULT,
    period: float | None = None,
) -> QReport:
    """Classify a multiplier spectrum and compute the settling Q factor.

    Exactly one unit multiplier with everything else inside the unit
    circle gives a Finite verdict and Q = ln(0.05)/ln|lambda2|.  Two or
    more unit multipliers mean a conservative orbit family (Infinite Q);
    any non-unit multiplier outside the circle wins an Unstable verdict
    (checked first); no unit multiplier at all means the input does not
    describe a self-sustained oscillation (NotOscillating).
    """
    lam = sort_spectrum(np.asarray(multipliers, dtype=complex))
    if lam.size == 0:
        raise ValueError("empty multiplier spectrum")
    mods = np.abs(lam)
    unit = np.abs(mods - 1.0) <= unit_tol
    n_unit = int(unit.sum())

    if n_unit == 0:
        verdict = "NotOscillating"
        lam2 = complex(lam[0])
    else:
        k_phase = int(np.argmin(np.abs(lam - 1.0)))
        rest = np.delete(lam, k_phase)
        lam2 = complex(rest[np.argmax(np.abs(rest))]) if rest.size else complex(lam[0])
        if np.any(mods[~unit] > 1.0 + unit_tol):
            verdict = "Unstable"
        elif n_unit >= 2:
            verdict = "Infinite"
        else:
            verdict = "Finite"

    lam2_mod = abs(lam2)
    q_value = None
    if verdict == "Finite":
        q_value = 0.0 if lam2_mod == 0.0 else float(np.log(DECAY_TARGET) / np.log(lam2_mod))

    exponents = None
    if period is not None:
        exponents = tuple(
            None if abs(l) == 0.0 else complex(np.log(l) / period) for l in lam
        )
    return QReport(
        verdict=verdict,
        q_value=q_value,
        lambda2=lam2,
        lambda2_modulus=float(lam2_mod),
        multipliers=tuple(complex(l) for l in lam),
        n_unit=n_unit,
        unit_tol=float(unit_tol),
        period=period,
        floquet_exponents=exponents,
    )


def monodromy_analysis(
    model: DaeSystem,
    pss: PeriodicSteadyState,
    unit_tol: float = UNIT_TOL_DEFAULT,
) -> MonodromyResult:
    """Full pipeline tail: X(T), spectrum, classification, Q report."""
    xT = fundamental_matrix(model, pss)
    lam = eigen_spectrum(xT)
    report = q_factor(lam, unit_tol=unit_tol, period=pss.period)
    return MonodromyResult(
        xT=xT,
        multipliers=report.multipliers,
        unit_tol=float(unit_tol),
        n_unit=report.n_unit,
        lambda2=report.lambda2,
        q_report=report,
    )
