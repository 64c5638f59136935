"""Self-similar blow-up profiles for the focusing NLS in hydrodynamic variables."""

from .core import (BarrierCondition, ProblemParams, RegimeVerdict, admissible_r_interval,
                   classify, new_params)
from .energy import EnergyReport, EnergySign, energy_sign, full_energy
from .integrate import (Termination, Trajectory, decay_fit, integrate, matching_consistency,
                        residual_norm)
from .phase import FieldValue, PhaseState, equilibria, field, jacobian_at_origin
from .profile import Profile, physical_fields, reconstruct, solve_profile
from .series import SeriesCoefficients, compute_coefficients, evaluate, majorant_check, tri_catalan

__all__ = [
    "BarrierCondition", "ProblemParams", "RegimeVerdict", "admissible_r_interval", "classify",
    "new_params", "EnergyReport", "EnergySign", "energy_sign", "full_energy", "Termination",
    "Trajectory", "decay_fit", "integrate", "matching_consistency", "residual_norm",
    "FieldValue", "PhaseState", "equilibria", "field", "jacobian_at_origin", "Profile",
    "physical_fields", "reconstruct", "solve_profile", "SeriesCoefficients",
    "compute_coefficients", "evaluate", "majorant_check", "tri_catalan",
]
__version__ = "0.1.0"
