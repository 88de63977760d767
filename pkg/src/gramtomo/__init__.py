"""Maximum-likelihood homodyne tomography with Gram-operator bandwidth analysis.

Conventions throughout: hbar = 1, x = (a + a^dag)/sqrt(2), quadrature
overlaps <x_theta|n> = exp(-i n theta) psi_n(x), Wigner functions
normalized so the phase-space integral of W is 1.
"""

from __future__ import annotations

from .errors import (DegenerateStateError, EmptyDataError, EmptyMeasurementError,
                     InvalidInputError, NumericalConsistencyError)
from .fock import (PhaseSpaceGrid, cat_state, coherent_state, fidelity, fock_state,
                   hermite_functions, pure_density, quadrature_overlap, wigner,
                   wigner_points)
from .frames import (DualFrame, OperatorFrame, PartialInversionWarning,
                     clip_to_physical, dual_effect, dual_frame, frame_reconstruct,
                     hadamard_identity_check, hermitian_basis, linear_inversion,
                     modal_weighting, operator_frame, operator_frame_apply)
from .maxlik import (Dataset, ReconstructionResult, RescaledPovm, SolverConfig,
                     born_residual, expected_probabilities, extremal_residual,
                     log_likelihood, maxlik_solve, r_operator, rescale_to_support,
                     restrict_to_subspace)
from .povm import (Effect, GramAnalysis, HomodyneConfig, PovmSet, build_homodyne_povm,
                   effective_rank, gram_matrix_operator_space, gram_matrix_state_space,
                   gram_operator, gram_spectrum)
from .simulate import (NoiseModel, StabilityResult, SweepResult, dimension_sweep,
                       expected_probabilities, generate_counts, stability_study,
                       trial_generator)

__version__ = "0.1.0"

__all__ = [
    "DegenerateStateError", "EmptyDataError", "EmptyMeasurementError",
    "InvalidInputError", "NumericalConsistencyError",
    "PhaseSpaceGrid", "cat_state", "coherent_state", "fidelity", "fock_state",
    "hermite_functions", "pure_density", "quadrature_overlap", "wigner",
    "wigner_points",
    "DualFrame", "OperatorFrame", "PartialInversionWarning", "clip_to_physical",
    "dual_effect", "dual_frame", "frame_reconstruct", "hadamard_identity_check",
    "hermitian_basis", "linear_inversion", "modal_weighting", "operator_frame",
    "operator_frame_apply",
    "Dataset", "ReconstructionResult", "RescaledPovm", "SolverConfig",
    "born_residual", "expected_probabilities", "extremal_residual",
    "log_likelihood", "maxlik_solve", "r_operator", "rescale_to_support",
    "restrict_to_subspace",
    "Effect", "GramAnalysis", "HomodyneConfig", "PovmSet", "build_homodyne_povm",
    "effective_rank", "gram_matrix_operator_space", "gram_matrix_state_space",
    "gram_operator", "gram_spectrum",
    "NoiseModel", "StabilityResult", "SweepResult", "dimension_sweep",
    "generate_counts", "stability_study", "trial_generator",
    "__version__",
]
