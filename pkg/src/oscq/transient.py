"""Implicit fixed-step time integration of the oscillator DAE.

Backward Euler and trapezoidal schemes, Newton iteration per step, dense
LU solves.  This is the workhorse beneath periodic-steady-state search,
monodromy propagation, and the perturbation experiment; everything
downstream reuses the exact discrete flow defined here.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .dae import DaeSystem, jacobians
from .errors import NewtonFailureError, SingularMatrixError

METHODS = ("backward-euler", "trapezoidal")


@dataclass(frozen=True)
class IntegratorConfig:
    """Fixed-step integrator settings.

    ``step`` is an absolute step size; when None, callers that know a
    period derive the step from ``steps_per_cycle``.  ``newton_tol`` is
    relative to the per-step residual scale.
    """

    method: str = "trapezoidal"
    step: float | None = None
    steps_per_cycle: int = 2000
    newton_tol: float = 1e-10
    newton_max_iter: int = 20

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.step is not None and self.step <= 0:
            raise ValueError("step must be positive")
        if self.steps_per_cycle <= 0:
            raise ValueError("steps_per_cycle must be positive")
        if self.newton_tol <= 0:
            raise ValueError("newton_tol must be positive")

    @property
    def theta(self) -> float:
        """Implicit weight of f(x_{m+1}): 1 for BE, 1/2 for trapezoidal."""
        return 1.0 if self.method == "backward-euler" else 0.5

    def with_step(self, step: float) -> "IntegratorConfig":
        return replace(self, step=step)


@dataclass(frozen=True)
class Waveform:
    """Time series produced by :func:`integrate`.

    times is strictly increasing and states has one row per time point.
    """

    times: np.ndarray
    states: np.ndarray
    model_id: str

    def __post_init__(self):
        if self.states.shape[0] != self.times.shape[0]:
            raise ValueError("states row count must equal times length")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")
        if not (np.all(np.isfinite(self.times)) and np.all(np.isfinite(self.states))):
            raise ValueError("waveform entries must be finite")
        self.times.setflags(write=False)
        self.states.setflags(write=False)


def _newton_step(model, x0, q0, f0, h, theta, tol, max_iter, t_next):
    """Solve one implicit step for x1 with initial guess x0.

    Residual: (q(x1) - q(x0))/h + theta*f(x1) + (1-theta)*f(x0) = 0,
    accepted when its max-norm falls below tol relative to the scale of
    its constituent terms.  Returns (x1, q1, f1).
    """
    x1 = x0.copy()
    q1, f1 = q0, f0
    explicit = (1.0 - theta) * f0
    for _ in range(max_iter + 1):
        dq = (q1 - q0) / h
        R = dq + theta * f1 + explicit
        scale = max(
            np.abs(dq).max(), np.abs(f1).max(), np.abs(f0).max(), 1e-300
        )
        if np.abs(R).max() <= tol * scale:
            return x1, q1, f1
        C1, G1 = jacobians(model, x1)
        A = C1 / h + theta * G1
        try:
            delta = np.linalg.solve(A, -R)
        except np.linalg.LinAlgError as exc:
            raise SingularMatrixError(
                f"{model.name}: singular iteration matrix at t={t_next:.6e}; "
                "the DAE is index-degenerate (dq/dx not invertible) along this trajectory"
            ) from exc
        if not np.all(np.isfinite(delta)):
            raise SingularMatrixError(
                f"{model.name}: iteration matrix numerically singular at t={t_next:.6e}"
            )
        x1 = x1 + delta
        q1 = model.q(x1)
        f1 = model.f(x1)
    raise NewtonFailureError(
        f"{model.name}: Newton did not converge at t={t_next:.6e} "
        f"after {max_iter} iterations (residual {np.abs(R).max():.3e})",
        time=t_next,
        iterate=x1,
        residual=float(np.abs(R).max()),
    )


def run_fixed_grid(
    model: DaeSystem,
    x0: np.ndarray,
    t0: float,
    h: float,
    n_steps: int,
    cfg: IntegratorConfig,
    record_tables: bool = False,
):
    """March n_steps of size h from (t0, x0).

    Returns (states, c_table, g_table); tables are None unless requested.
    Tables hold C and G evaluated at every accepted grid state, the exact
    inputs the monodromy propagation needs.
    """
    x0 = np.asarray(x0, dtype=float)
    n = model.n
    states = np.empty((n_steps + 1, n))
    states[0] = x0
    c_table = g_table = None
    if record_tables:
        c_table = np.empty((n_steps + 1, n, n))
        g_table = np.empty((n_steps + 1, n, n))
        c_table[0], g_table[0] = jacobians(model, x0)
    theta = cfg.theta
    tol = cfg.newton_tol
    max_iter = cfg.newton_max_iter
    q_prev = model.q(x0)
    f_prev = model.f(x0)
    x_prev = x0
    for m in range(n_steps):
        t_next = t0 + (m + 1) * h
        x_next, q_next, f_next = _newton_step(
            model, x_prev, q_prev, f_prev, h, theta, tol, max_iter, t_next
        )
        states[m + 1] = x_next
        if record_tables:
            c_table[m + 1], g_table[m + 1] = jacobians(model, x_next)
        x_prev, q_prev, f_prev = x_next, q_next, f_next
    return states, c_table, g_table


def lptv_propagate(
    c_table: np.ndarray,
    g_table: np.ndarray,
    h: float,
    theta: float,
    start: np.ndarray | None = None,
) -> np.ndarray:
    """Propagate the linearized discrete flow through one period.

    Applies the exact Jacobian of the implicit step map,

        X_{m+1} = (C_{m+1}/h + theta*G_{m+1})^-1 (C_m/h - (1-theta)*G_m) X_m,

    which reduces to the backward-Euler (theta=1) and trapezoidal
    (theta=1/2) propagations.  ``start`` defaults to the identity.
    """
    n = c_table.shape[1]
    X = np.eye(n) if start is None else np.array(start, dtype=float)
    explicit = 1.0 - theta
    for m in range(c_table.shape[0] - 1):
        lhs = c_table[m + 1] / h + theta * g_table[m + 1]
        rhs = (c_table[m] / h - explicit * g_table[m]) @ X
        try:
            X = np.linalg.solve(lhs, rhs)
        except np.linalg.LinAlgError as exc:
            raise SingularMatrixError(
                f"singular step matrix in LPTV propagation at step {m + 1}",
                step_index=m + 1,
            ) from exc
    return X


def integrate(
    model: DaeSystem,
    x0: np.ndarray,
    t0: float,
    t1: float,
    cfg: IntegratorConfig,
    n_steps: int | None = None,
) -> Waveform:
    """Integrate the DAE from t0 to t1 on a uniform grid.

    The step count comes from ``n_steps`` when given, otherwise from
    ``cfg.step`` (rounded to an integer number of uniform steps spanning
    [t0, t1] exactly).
    """
    x0 = np.asarray(x0, dtype=float)
    if t1 <= t0:
        raise ValueError("t1 must exceed t0")
    if x0.shape != (model.n,):
        raise ValueError(f"x0 must have shape ({model.n},)")
    if not np.all(np.isfinite(x0)):
        raise ValueError("x0 must be finite")
    if n_steps is None:
        if cfg.step is None:
            raise ValueError("either n_steps or cfg.step is required")
        n_steps = max(1, int(round((t1 - t0) / cfg.step)))
    h = (t1 - t0) / n_steps
    states, _, _ = run_fixed_grid(model, x0, t0, h, n_steps, cfg)
    times = t0 + h * np.arange(n_steps + 1)
    times[-1] = t1
    return Waveform(times=times, states=states, model_id=model.name)
