"""Self-similar collapsing-cavity and converging-shock solutions for
generalized (non-ideal) equations of state."""

from .eos import (ConstraintSet, DensityScaledEos, EosModel, GeneralFEos,
                  IdealGammaEos, PowerLawScaledEos, PseudoMieGruneisenEos,
                  TabulatedEos, classify_constraints, invariance_residual)
from .eigensolver import (EigenResult, ShootReport, SolverSettings,
                          cross_sonic, find_eigenvalue, scan, shoot)
from .reconstruct import (PhysicalSample, SolutionProfile, jump_speed,
                          jump_trajectory, sample_grid, to_physical)
from .similarity import (Exponents, JumpState, ProblemSpec, SimilarityState,
                         conservation_residuals, jump_init_cavity,
                         jump_init_shock, numerator, rhs, sonic_discriminant)
from .verify import (VerificationReport, entropy_condition, entropy_indicator,
                     ivt_check, pde_residual, verify_profile)

__version__ = "0.1.0"

__all__ = [
    "ConstraintSet", "DensityScaledEos", "EosModel", "GeneralFEos",
    "IdealGammaEos", "PowerLawScaledEos", "PseudoMieGruneisenEos",
    "TabulatedEos", "classify_constraints", "invariance_residual",
    "EigenResult", "ShootReport", "SolverSettings", "cross_sonic",
    "find_eigenvalue", "scan", "shoot",
    "PhysicalSample", "SolutionProfile", "jump_speed", "jump_trajectory",
    "sample_grid", "to_physical",
    "Exponents", "JumpState", "ProblemSpec", "SimilarityState",
    "conservation_residuals", "jump_init_cavity", "jump_init_shock",
    "numerator", "rhs", "sonic_discriminant",
    "VerificationReport", "entropy_condition", "entropy_indicator",
    "ivt_check", "pde_residual", "verify_profile",
    "__version__",
]
