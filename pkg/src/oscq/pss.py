"""Periodic steady state: Newton shooting and Poincare period detection.

``shoot`` solves the closed (n+1)-dimensional system

    phi_T(x0) - x0 = 0,      x0[j] - c = 0,

over (x0, T), where phi_T is the discrete time-T flow of the transient
scheme and the second equation is a fixed-component phase anchor that
removes the time-shift degeneracy.  Conservative systems make the
shooting Jacobian singular (a whole family of orbits exists); those are
detected through a condition estimate and routed to ``detect_period``,
which measures the period between consecutive same-direction section
crossings of a free-running trajectory.

Both paths finish identically: one clean re-integration of the orbit on
the uniform analysis grid, with the C(t), G(t) Jacobian tables cached at
every grid point so that monodromy propagation reuses the exact discrete
flow that produced the orbit.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .dae import DaeSystem, jacobians
from .errors import (
    ConservativeSystemError,
    ConstantSolutionError,
    NoOscillationError,
    PeriodDriftWarning,
    PssError,
    ShootingFailureError,
)
from .transient import IntegratorConfig, Waveform, lptv_propagate, run_fixed_grid

SHOOT_CLOSURE_TOL = 1e-8
DETECT_CLOSURE_TOL = 1e-5
COND_LIMIT = 1e12
DRIFT_TOL = 1e-3
WARMUP_PERIODS = 20
# Orbit swing below this fraction of the state scale counts as an equilibrium.
CONSTANT_ORBIT_TOL = 1e-6


@dataclass(frozen=True)
class PhaseCondition:
    """Fixed-component anchor: x[anchor_index] = anchor_value, rising."""

    anchor_index: int
    anchor_value: float


@dataclass(frozen=True)
class PeriodicSteadyState:
    """A converged periodic orbit with cached linearization tables.

    ``samples[i]`` is x_s(times[i]) on the uniform grid 0..T; ``c_table``
    and ``g_table`` hold dq/dx and df/dx at each grid state.  Instances
    are immutable (arrays are write-protected) and safe to share across
    threads for downstream analyses.
    """

    period: float
    times: np.ndarray
    samples: np.ndarray
    c_table: np.ndarray
    g_table: np.ndarray
    closure_residual: float
    phase: PhaseCondition
    model_id: str
    mode: str
    cfg: IntegratorConfig
    warnings: tuple[str, ...] = field(default=())

    def __post_init__(self):
        for arr in (self.times, self.samples, self.c_table, self.g_table):
            arr.setflags(write=False)

    @property
    def n(self) -> int:
        return self.samples.shape[1]

    @property
    def grid_points(self) -> int:
        return self.times.shape[0]

    @property
    def amplitude(self) -> float:
        """Orbit scale: max_i ||x_s(t_i) - x_s(0)||."""
        return float(np.linalg.norm(self.samples - self.samples[0], axis=1).max())

    def as_waveform(self) -> Waveform:
        return Waveform(times=self.times.copy(), states=self.samples.copy(), model_id=self.model_id)


def _rising_crossings(values: np.ndarray, level: float):
    """Indices m where values[m] < level <= values[m+1]."""
    below = values[:-1] < level
    at_or_above = values[1:] >= level
    return np.nonzero(below & at_or_above)[0]


def choose_phase(states: np.ndarray) -> PhaseCondition:
    """Auto-select the anchor: largest-swing component at its mean value.

    ``states`` should cover a few settled cycles.  Raises
    :class:`NoOscillationError` when nothing swings or the candidate
    anchor is never crossed rising.
    """
    swing = states.max(axis=0) - states.min(axis=0)
    j = int(np.argmax(swing))
    scale = np.abs(states).max()
    if swing[j] <= CONSTANT_ORBIT_TOL * max(scale, 1e-30):
        raise NoOscillationError("trajectory is constant: no oscillation detected")
    c = float(states[:, j].mean())
    if _rising_crossings(states[:, j], c).size == 0:
        raise NoOscillationError(f"anchor component {j} never crosses its mean rising")
    return PhaseCondition(anchor_index=j, anchor_value=c)


def _interp_crossing(times, states, m, j, c):
    """Linear interpolation of the crossing of component j in step m."""
    y0, y1 = states[m, j], states[m + 1, j]
    s = (c - y0) / (y1 - y0)
    t = times[m] + s * (times[m + 1] - times[m])
    x = states[m] * (1.0 - s) + states[m + 1] * s
    return t, x


def warmup_and_guess(
    model: DaeSystem,
    seed_state: np.ndarray,
    t_hint: float,
    cfg: IntegratorConfig,
    warmup_periods: float = WARMUP_PERIODS,
):
    """Run a warmup transient and extract (phase, x0_guess, T_guess).

    The phase condition is chosen from the final three hint-periods of
    the warmup; the initial guess is the last rising anchor crossing and
    the period guess the spacing of the last two.
    """
    steps = max(1, int(round(warmup_periods * cfg.steps_per_cycle)))
    h = t_hint / cfg.steps_per_cycle
    states, _, _ = run_fixed_grid(model, np.asarray(seed_state, float), 0.0, h, steps, cfg)
    tail_len = min(steps, 3 * cfg.steps_per_cycle)
    tail = states[-(tail_len + 1):]
    phase = choose_phase(tail)
    j, c = phase.anchor_index, phase.anchor_value
    idx = _rising_crossings(tail[:, j], c)
    times = h * np.arange(tail.shape[0])
    if idx.size >= 2:
        t1, x1 = _interp_crossing(times, tail, idx[-1], j, c)
        t0, _ = _interp_crossing(times, tail, idx[-2], j, c)
        return phase, x1, t1 - t0
    t1, x1 = _interp_crossing(times, tail, idx[-1], j, c)
    return phase, x1, t_hint


def _orbit_grid(model, x0, T, cfg):
    N = cfg.steps_per_cycle
    h = T / N
    states, c_table, g_table = run_fixed_grid(model, x0, 0.0, h, N, cfg, record_tables=True)
    return states, c_table, g_table, h


def _closure(states):
    amp = np.linalg.norm(states - states[0], axis=1).max()
    res = np.linalg.norm(states[-1] - states[0])
    return res / max(amp, 1e-300), amp


def _reject_equilibrium(model, states):
    amp = np.linalg.norm(states - states[0], axis=1).max()
    scale = max(np.abs(states).max(), 1e-30)
    if amp <= CONSTANT_ORBIT_TOL * scale:
        raise ConstantSolutionError(
            f"{model.name}: converged to a constant solution (equilibrium), not an orbit"
        )


def _build_pss(model, T, states, c_table, g_table, phase, mode, cfg, warns=()):
    closure, _ = _closure(states)
    h = T / (states.shape[0] - 1)
    times = h * np.arange(states.shape[0])
    return PeriodicSteadyState(
        period=float(T),
        times=times,
        samples=states,
        c_table=c_table,
        g_table=g_table,
        closure_residual=float(closure),
        phase=phase,
        model_id=model.name,
        mode=mode,
        cfg=cfg,
        warnings=tuple(warns),
    )


def shoot(
    model: DaeSystem,
    x0_guess: np.ndarray,
    T_guess: float,
    phase: PhaseCondition,
    cfg: IntegratorConfig,
    closure_tol: float = SHOOT_CLOSURE_TOL,
    max_iter: int = 25,
    cond_limit: float = COND_LIMIT,
) -> PeriodicSteadyState:
    """Newton shooting for the periodic steady state of a dissipative model.

    The n x n sensitivity block dphi_T/dx0 comes from the same discrete
    propagation the monodromy uses, and dphi_T/dT is the DAE velocity at
    the endpoint.  A condition estimate above ``cond_limit`` raises
    :class:`ConservativeSystemError` (a continuum of orbits exists, as in
    conservative systems): use :func:`detect_period` for those.
    """
    if T_guess <= 0:
        raise ValueError("T_guess must be positive")
    x0 = np.array(x0_guess, dtype=float)
    if x0.shape != (model.n,):
        raise ValueError(f"x0_guess must have shape ({model.n},)")
    T = float(T_guess)
    j, c = phase.anchor_index, phase.anchor_value
    n = model.n
    ej = np.zeros(n)
    ej[j] = 1.0

    res_norm = np.inf
    bad_iters = 0
    for _ in range(max_iter):
        states, c_table, g_table, h = _orbit_grid(model, x0, T, cfg)
        r = states[-1] - x0
        amp = np.linalg.norm(states - states[0], axis=1).max()
        scale = max(amp, 1e-30)
        res_norm = np.linalg.norm(r) / scale
        phase_res = x0[j] - c
        if res_norm <= closure_tol and abs(phase_res) <= closure_tol * scale:
            _reject_equilibrium(model, states)
            return _build_pss(model, T, states, c_table, g_table, phase, "shoot", cfg)

        X = lptv_propagate(c_table, g_table, h, cfg.theta)
        xdot_T = np.linalg.solve(c_table[-1], -model.f(states[-1]))
        # The period column is scaled by T so the condition estimate sees
        # dimensionless sensitivities; otherwise fast oscillators (large
        # |xdot|) would read as spuriously ill-conditioned.
        J = np.zeros((n + 1, n + 1))
        J[:n, :n] = X - np.eye(n)
        J[:n, n] = xdot_T * T
        J[n, j] = 1.0
        cond = np.linalg.cond(J)
        if not np.isfinite(cond) or cond > cond_limit:
            # a decaying trajectory also degrades the Jacobian (the period
            # column vanishes at an equilibrium); tell the two apart by
            # comparing the swing of the two trajectory halves
            half = states.shape[0] // 2
            swing_a = np.ptp(states[:half], axis=0).max()
            swing_b = np.ptp(states[half:], axis=0).max()
            if swing_b < 0.5 * swing_a:
                raise ConstantSolutionError(
                    f"{model.name}: trajectory is collapsing toward an equilibrium "
                    "(constant solution), not a periodic orbit"
                )
            raise ConservativeSystemError(
                f"{model.name}: shooting Jacobian condition {cond:.2e} exceeds "
                f"{cond_limit:.0e}; conservative or degenerate orbit family - "
                "use detect_period",
                condition=float(cond),
            )
        rhs = np.concatenate([-r, [-phase_res]])
        delta = np.linalg.solve(J, rhs)
        dx, dT = delta[:n], delta[n] * T

        if res_norm < 1e-4:
            # quadratic Newton zone: take the full step, no line search
            T_new = T + dT
            if not (0.2 * T_guess < T_new < 5.0 * T_guess):
                raise ShootingFailureError(
                    f"{model.name}: shooting left its trust region (T -> {T_new:.3e})",
                    residual=float(res_norm),
                )
            x0, T = x0 + dx, T_new
            bad_iters = 0
            continue

        # Backtrack on the raw closure norm; a diverging line search twice
        # in a row means the guess is outside the Newton basin.
        alpha = 1.0
        improved = False
        for _ in range(4):
            x_try = x0 + alpha * dx
            T_try = T + alpha * dT
            if not (0.2 * T_guess < T_try < 5.0 * T_guess):
                alpha *= 0.5
                continue
            states_try, _, _ = run_fixed_grid(
                model, x_try, 0.0, T_try / cfg.steps_per_cycle, cfg.steps_per_cycle, cfg
            )
            r_try = np.linalg.norm(states_try[-1] - x_try) + abs(x_try[j] - c)
            if r_try < np.linalg.norm(r) + abs(phase_res):
                x0, T = x_try, T_try
                improved = True
                break
            alpha *= 0.5
        if not improved:
            bad_iters += 1
            if bad_iters >= 2:
                raise ShootingFailureError(
                    f"{model.name}: shooting diverged (last scaled residual {res_norm:.3e})",
                    residual=float(res_norm),
                )
            x0 = x0 + alpha * dx
            T_new = T + alpha * dT
            if not (0.2 * T_guess < T_new < 5.0 * T_guess):
                raise ShootingFailureError(
                    f"{model.name}: shooting left its trust region (T -> {T_new:.3e})",
                    residual=float(res_norm),
                )
            T = T_new
        else:
            bad_iters = 0
    raise ShootingFailureError(
        f"{model.name}: shooting did not converge in {max_iter} iterations "
        f"(last scaled residual {res_norm:.3e})",
        residual=float(res_norm),
    )


def detect_period(
    model: DaeSystem,
    x0: np.ndarray,
    warmup: float,
    section: PhaseCondition | None,
    cfg: IntegratorConfig,
    t_hint: float | None = None,
    closure_tol: float = DETECT_CLOSURE_TOL,
    max_scan_periods: float = 40.0,
) -> PeriodicSteadyState:
    """Period detection through consecutive rising section crossings.

    Fallback PSS for conservative systems where shooting is singular.  No
    Newton polishing happens, so the closure residual is held to the
    looser ``closure_tol``.  A drifting period (successive inter-crossing
    times differing by more than 0.1%) attaches a warning to the result.
    """
    x0 = np.asarray(x0, dtype=float)
    if t_hint is None:
        if cfg.step is None:
            raise ValueError("detect_period needs t_hint or cfg.step")
        t_hint = cfg.step * cfg.steps_per_cycle
    h = t_hint / cfg.steps_per_cycle

    x = x0
    if warmup > 0:
        n_warm = max(1, int(round(warmup / h)))
        states, _, _ = run_fixed_grid(model, x, 0.0, h, n_warm, cfg)
        x = states[-1]

    scan_steps = max(2, int(round(max_scan_periods * cfg.steps_per_cycle)))
    states, _, _ = run_fixed_grid(model, x, 0.0, h, scan_steps, cfg)
    times = h * np.arange(scan_steps + 1)
    if section is None:
        section = choose_phase(states)
    j, c = section.anchor_index, section.anchor_value

    idx = _rising_crossings(states[:, j], c)
    if idx.size < 2:
        raise NoOscillationError(
            f"{model.name}: fewer than two rising crossings of x[{j}] = {c:.6g}; "
            "no oscillation detected"
        )
    cross = [_interp_crossing(times, states, m, j, c) for m in idx]
    t_cross = np.array([t for t, _ in cross])
    periods = np.diff(t_cross)
    T = float(periods[-1])
    warns = []
    if periods.size >= 2:
        drift = float(np.abs(np.diff(periods)).max() / T)
        if drift > DRIFT_TOL:
            msg = (
                f"{model.name}: inter-crossing times drift by {drift:.2e} "
                f"(> {DRIFT_TOL:.1e}); the detected period may not be settled"
            )
            warnings.warn(msg, PeriodDriftWarning)
            warns.append(msg)

    x_start = cross[-2][1]
    grid_states, c_table, g_table, h_grid = _orbit_grid(model, x_start, T, cfg)
    _reject_equilibrium(model, grid_states)
    closure, _ = _closure(grid_states)
    if closure > closure_tol:
        raise PssError(
            f"{model.name}: detected orbit does not close (residual {closure:.3e} "
            f"> {closure_tol:.1e})"
        )
    return _build_pss(model, T, grid_states, c_table, g_table, section, "detect", cfg, warns)


def auto_pss(
    model: DaeSystem,
    seed_state: np.ndarray,
    t_hint: float,
    cfg: IntegratorConfig,
    mode: str = "auto",
    warmup_periods: float = WARMUP_PERIODS,
    closure_tol: float = SHOOT_CLOSURE_TOL,
) -> PeriodicSteadyState:
    """Warmup, then shoot, falling back to period detection on singularity.

    ``mode`` is "auto", "shoot", or "detect".
    """
    if mode not in ("auto", "shoot", "detect"):
        raise ValueError(f"mode must be auto, shoot or detect, got {mode!r}")
    cfg = cfg.with_step(t_hint / cfg.steps_per_cycle)
    phase, x0_guess, T_guess = warmup_and_guess(model, seed_state, t_hint, cfg, warmup_periods)
    if mode in ("auto", "shoot"):
        try:
            return shoot(model, x0_guess, T_guess, phase, cfg, closure_tol=closure_tol)
        except ConservativeSystemError:
            if mode == "shoot":
                raise
    return detect_period(
        model, x0_guess, 0.0, phase, cfg, t_hint=T_guess, max_scan_periods=6.0
    )


def phase_velocity(model: DaeSystem, pss: PeriodicSteadyState) -> np.ndarray:
    """The phase-mode direction xdot_s(0) = C(x_s(0))^-1 (-f(x_s(0)))."""
    C, _ = jacobians(model, pss.samples[0])
    return np.linalg.solve(C, -model.f(pss.samples[0]))
