"""
Strati limite in semispazio per sistemi di momenti di Grad linearizzati.

Gestisce:
- Costruzione dei sistemi di momenti (A, Q) e delle matrici di bordo
- Decomposizione dei sottospazi e fattorizzazione spettrale
- Criteri di buona posizione per le condizioni al bordo
- Soluzione in forma chiusa con sorgenti esponenziale-polinomio
- Condizioni al bordo di Maxwell (Grad e modificate)

Autore: Grad Halfspace Team
Versione: 1.0.0
"""

from .config import DEFAULT_CONFIG, NumericsConfig
from .error_handler import GradHalfspaceError, WellPosednessError
from .exp_poly import ExpPolyVec, SampledVec, VectorFunction
from .halfspace_solver import (
    HalfspaceSolution, bounded_trace_combination, empirical_constant, instability_witness,
    pure_zero_mode_source, solve, verify_estimate,
)
from .maxwell_bc import MaxwellBC, assemble_grad_bc, assemble_modified_bc, solve_layer_with_maxwell
from .moment_system_builder import (
    MomentSystem, MultiIndex, build_full3d, build_kramers3, build_reduced_couette, enumerate_indices,
)
from .subspace_transform import (
    SpectralFactorization, SubspaceDecomposition, build_decomposition, spectral_factorization,
)
from .wellposedness_checker import (
    BoundaryOperator, WellposednessVerdict, check_general_bc, check_square_bc, find_certificate_C,
    offdiag_signature, predicted_counts,
)

__version__ = "1.0.0"

__all__ = [
    'DEFAULT_CONFIG', 'NumericsConfig', 'GradHalfspaceError', 'WellPosednessError',
    'ExpPolyVec', 'SampledVec', 'VectorFunction',
    'HalfspaceSolution', 'solve', 'verify_estimate', 'empirical_constant', 'instability_witness',
    'bounded_trace_combination', 'pure_zero_mode_source',
    'MaxwellBC', 'assemble_grad_bc', 'assemble_modified_bc', 'solve_layer_with_maxwell',
    'MomentSystem', 'MultiIndex', 'enumerate_indices', 'build_full3d', 'build_kramers3',
    'build_reduced_couette',
    'SubspaceDecomposition', 'SpectralFactorization', 'build_decomposition', 'spectral_factorization',
    'BoundaryOperator', 'WellposednessVerdict', 'check_square_bc', 'check_general_bc',
    'find_certificate_C', 'predicted_counts', 'offdiag_signature',
]
