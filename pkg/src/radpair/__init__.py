"""Radical-pair spin dynamics and magnetometric sensitivity audit."""
from .dynamics import (
    GAMMA_E,
    HyperfineCoupling,
    RadicalPairModel,
    Trajectory,
    build_hamiltonian,
    evolve_haberkorn,
    evolve_unitary,
    initial_radical_pair_state,
    mhz_to_angular,
    one_nucleus_model,
)
from .entanglement import (
    LifetimeResult,
    LifetimeSettings,
    concurrence,
    electron_concurrence_trajectory,
    entanglement_lifetime,
    model_lifetime,
)
from .exceptions import InvalidStateError, NumericalError, RadpairError, ValidationError
from .magnetometry import (
    LifetimeCurve,
    MagnetometryParams,
    SensitivityReport,
    bound_violation_scan,
    finite_difference_slope,
    fundamental_field_limit,
    lifetime_field_sensitivity,
    lifetime_measurement_precision,
    observable_field_sensitivity,
    sensitivity_ratio,
    shot_noise_precision,
    sweep_lifetime_vs_field,
    two_pass_sweep,
)
from .spin_core import (
    SystemLayout,
    partial_trace,
    singlet_projector,
    spin_operator,
    tensor_product,
)

__version__ = "0.1.0"

__all__ = [
    "InvalidStateError",
    "NumericalError",
    "RadpairError",
    "ValidationError",
    "bound_violation_scan",
    "build_hamiltonian",
    "concurrence",
    "electron_concurrence_trajectory",
    "entanglement_lifetime",
    "evolve_haberkorn",
    "evolve_unitary",
    "finite_difference_slope",
    "fundamental_field_limit",
    "GAMMA_E",
    "HyperfineCoupling",
    "initial_radical_pair_state",
    "lifetime_field_sensitivity",
    "lifetime_measurement_precision",
    "LifetimeCurve",
    "LifetimeResult",
    "LifetimeSettings",
    "MagnetometryParams",
    "mhz_to_angular",
    "model_lifetime",
    "observable_field_sensitivity",
    "one_nucleus_model",
    "partial_trace",
    "RadicalPairModel",
    "sensitivity_ratio",
    "SensitivityReport",
    "shot_noise_precision",
    "singlet_projector",
    "spin_operator",
    "sweep_lifetime_vs_field",
    "SystemLayout",
    "tensor_product",
    "Trajectory",
    "two_pass_sweep",
]
