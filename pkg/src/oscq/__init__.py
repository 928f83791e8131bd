"""oscq: amplitude-stability characterization of nonlinear oscillators.

Pipeline: model (DAE) -> periodic steady state -> monodromy matrix ->
characteristic multipliers -> settling Q factor, with companion
perturbation-decay and power-balance analyses.
"""

from .analysis import (
    DecayMeasurement,
    PowerBalanceCurve,
    equivalence_gap,
    perturb_and_measure,
    power_balance_curve,
    ql1,
    ql2,
)
from .dae import DaeSystem, FdCheckReport, ParameterSet, fd_jacobian_check, jacobians
from .floquet import (
    UNIT_TOL_DEFAULT,
    MonodromyResult,
    QReport,
    eigen_spectrum,
    fundamental_matrix,
    lambda2_power,
    monodromy_analysis,
    q_factor,
)
from .models import REGISTRY, build_chemical, build_lc, build_ring, build_stno, get_model
from .pss import (
    PeriodicSteadyState,
    PhaseCondition,
    auto_pss,
    detect_period,
    phase_velocity,
    shoot,
    warmup_and_guess,
)
from .transient import IntegratorConfig, Waveform, integrate, lptv_propagate

__version__ = "0.1.0"

__all__ = [
    "DaeSystem",
    "ParameterSet",
    "FdCheckReport",
    "jacobians",
    "fd_jacobian_check",
    "IntegratorConfig",
    "Waveform",
    "integrate",
    "lptv_propagate",
    "PhaseCondition",
    "PeriodicSteadyState",
    "shoot",
    "detect_period",
    "auto_pss",
    "warmup_and_guess",
    "phase_velocity",
    "MonodromyResult",
    "QReport",
    "fundamental_matrix",
    "eigen_spectrum",
    "lambda2_power",
    "q_factor",
    "monodromy_analysis",
    "UNIT_TOL_DEFAULT",
    "REGISTRY",
    "get_model",
    "build_ring",
    "build_lc",
    "build_stno",
    "build_chemical",
    "DecayMeasurement",
    "PowerBalanceCurve",
    "perturb_and_measure",
    "power_balance_curve",
    "ql1",
    "ql2",
    "equivalence_gap",
    "__version__",
]
