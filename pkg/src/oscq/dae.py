"""Oscillator model abstraction d/dt q(x) + f(x) = 0 and its linearization.

A model is held as a :class:`DaeSystem`: the pair of vector functions
``q`` (charge/flux-like) and ``f`` (resistive/reaction-like) together with
their Jacobians ``C = dq/dx`` and ``G = df/dx``.  Jacobians are analytic
when the model supplies them and central finite differences otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import ModelDomainError, ModelParameterError

# Central-difference step for component j: max(FD_ABS_STEP, FD_REL_STEP*|x_j|)
FD_ABS_STEP = 1e-8
FD_REL_STEP = 1e-7


@dataclass(frozen=True)
class ParameterSet:
    """Ordered name -> value map with validated overrides.

    Unknown names are rejected and every value must be finite.
    """

    values: dict[str, float]

    def __post_init__(self):
        for name, value in self.values.items():
            if not np.isfinite(value):
                raise ModelParameterError(f"parameter {name} is not finite: {value!r}")

    def with_overrides(self, overrides: dict[str, float]) -> "ParameterSet":
        unknown = set(overrides) - set(self.values)
        if unknown:
            known = ", ".join(self.values)
            raise ModelParameterError(
                f"unknown parameter {sorted(unknown)[0]} (known: {known})"
            )
        merged = dict(self.values)
        for name, value in overrides.items():
            merged[name] = float(value)
        return ParameterSet(merged)

    def __getitem__(self, name: str) -> float:
        return self.values[name]

    def items(self):
        return self.values.items()


@dataclass(frozen=True)
class DaeSystem:
    """An oscillator as d/dt q(x) + f(x) = 0 with n states.

    Evaluation functions are pure; instances are immutable and safe to
    share between threads.  Changing a parameter means building a new
    instance through the model registry.

    Attributes
    ----------
    name : str
        Registry-style identifier, carried into waveforms and reports.
    n : int
        State dimension.
    q_eval, f_eval : callable
        x -> R^n.
    jq_eval, jf_eval : callable or None
        x -> R^{n x n}; None means finite differences.
    params : ParameterSet
        The values the evaluation closures were built with.
    state_names : tuple of str
    jacobian_mode : str
        "analytic" or "finite-difference".
    sampling_box : tuple of (lo, hi)
        Per-state box from which Jacobian-verification states are drawn.
    """

    name: str
    n: int
    q_eval: Callable[[np.ndarray], np.ndarray]
    f_eval: Callable[[np.ndarray], np.ndarray]
    jq_eval: Optional[Callable[[np.ndarray], np.ndarray]]
    jf_eval: Optional[Callable[[np.ndarray], np.ndarray]]
    params: ParameterSet
    state_names: tuple[str, ...]
    jacobian_mode: str = "analytic"
    sampling_box: tuple[tuple[float, float], ...] = field(default=())

    def __post_init__(self):
        if self.n <= 0:
            raise ModelParameterError(f"state dimension must be positive, got {self.n}")
        if len(self.state_names) != self.n:
            raise ModelParameterError("state_names length must equal n")
        if self.jacobian_mode not in ("analytic", "finite-difference"):
            raise ModelParameterError(f"bad jacobian_mode {self.jacobian_mode!r}")

    def q(self, x: np.ndarray) -> np.ndarray:
        out = np.asarray(self.q_eval(x), dtype=float)
        if not np.all(np.isfinite(out)):
            raise ModelDomainError(f"{self.name}: q(x) not finite", state=np.array(x))
        return out

    def f(self, x: np.ndarray) -> np.ndarray:
        out = np.asarray(self.f_eval(x), dtype=float)
        if not np.all(np.isfinite(out)):
            raise ModelDomainError(f"{self.name}: f(x) not finite", state=np.array(x))
        return out

    def xdot(self, x: np.ndarray) -> np.ndarray:
        """Time derivative C(x)^-1 (-f(x)) of the states at x."""
        C, _ = jacobians(self, x)
        return np.linalg.solve(C, -self.f(x))


def _fd_jacobian(func: Callable[[np.ndarray], np.ndarray], x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    n = x.size
    base = np.asarray(func(x), dtype=float)
    J = np.empty((base.size, n))
    for j in range(n):
        h = max(FD_ABS_STEP, FD_REL_STEP * abs(x[j]))
        xp = x.copy()
        xm = x.copy()
        xp[j] += h
        xm[j] -= h
        J[:, j] = (np.asarray(func(xp), float) - np.asarray(func(xm), float)) / (2.0 * h)
    return J


def jacobians(model: DaeSystem, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Return (C, G) = (dq/dx, df/dx) at x.

    Analytic forms when the model carries them, central differences
    otherwise.  Raises :class:`ModelDomainError` when an evaluation is
    not finite.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (model.n,):
        raise ValueError(f"state must have shape ({model.n},), got {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ModelDomainError(f"{model.name}: state not finite", state=x)
    if model.jq_eval is not None:
        C = np.asarray(model.jq_eval(x), dtype=float)
    else:
        C = _fd_jacobian(model.q, x)
    if model.jf_eval is not None:
        G = np.asarray(model.jf_eval(x), dtype=float)
    else:
        G = _fd_jacobian(model.f, x)
    if C.shape != (model.n, model.n) or G.shape != (model.n, model.n):
        raise ModelDomainError(f"{model.name}: Jacobian shape mismatch", state=x)
    if not (np.all(np.isfinite(C)) and np.all(np.isfinite(G))):
        raise ModelDomainError(f"{model.name}: Jacobian not finite", state=x)
    return C, G


@dataclass(frozen=True)
class FdCheckReport:
    """Worst-case relative deviation between analytic and FD Jacobians."""

    model: str
    samples: int
    seed: int
    max_rel_error_q: float
    max_rel_error_f: float
    worst_state_q: np.ndarray
    worst_state_f: np.ndarray

    @property
    def max_rel_error(self) -> float:
        return max(self.max_rel_error_q, self.max_rel_error_f)


def fd_jacobian_check(model: DaeSystem, samples: int = 20, seed: int = 0) -> FdCheckReport:
    """Compare analytic Jacobians against central differences.

    States are drawn uniformly from the model's sampling box; the run is
    deterministic for a fixed seed.  Relative error is measured against
    the largest analytic entry of each matrix.
    """
    if model.jq_eval is None or model.jf_eval is None:
        raise ModelParameterError(f"{model.name}: model has no analytic Jacobians")
    if not model.sampling_box:
        raise ModelParameterError(f"{model.name}: model declares no sampling box")
    rng = np.random.default_rng(seed)
    lo = np.array([b[0] for b in model.sampling_box])
    hi = np.array([b[1] for b in model.sampling_box])
    worst_q = worst_f = 0.0
    state_q = state_f = np.zeros(model.n)
    for _ in range(samples):
        x = lo + (hi - lo) * rng.random(model.n)
        Ca = np.asarray(model.jq_eval(x), float)
        Ga = np.asarray(model.jf_eval(x), float)
        Cf = _fd_jacobian(model.q, x)
        Gf = _fd_jacobian(model.f, x)
        eq = np.abs(Ca - Cf).max() / (np.abs(Ca).max() + 1e-300)
        ef = np.abs(Ga - Gf).max() / (np.abs(Ga).max() + 1e-300)
        if eq > worst_q:
            worst_q, state_q = eq, x
        if ef > worst_f:
            worst_f, state_f = ef, x
    return FdCheckReport(
        model=model.name,
        samples=samples,
        seed=seed,
        max_rel_error_q=float(worst_q),
        max_rel_error_f=float(worst_f),
        worst_state_q=state_q,
        worst_state_f=state_f,
    )
