"""Single-shot distinguishability of von Neumann measurements."""

__version__ = "0.1.0"

from .classical import (  # noqa: E402
    classical_bound_povm,
    classical_bound_projective,
    has_rank_deficient_principal_submatrix,
)
from .entangled import (  # noqa: E402
    diamond_distance,
    evaluate_distance_at_state,
    perfect_check,
    reduce_pair,
    refute_perfect_by_numerical_range,
    saddle_structure_diagnostic,
    sandwich_bounds,
    trace_tests,
)
from .geometry import dist_zero_to_hull, numerical_range_test  # noqa: E402
from .kernels import BACKEND, COMPILED_AVAILABLE  # noqa: E402
from .objects import DensityMatrix, Povm, VonNeumannMeasurement, purify  # noqa: E402
from .protocol import build_protocol, simulate  # noqa: E402
from .solver import CertificatePair, SolverOptions, solve_nu  # noqa: E402
from .special import (  # noqa: E402
    ReflectionSpec,
    close_polygon_phases,
    fourier_discriminator,
    fourier_matrix,
    fourier_rank1_discriminator,
    reflection_diamond,
    reflection_matrix,
)

__all__ = [
    "BACKEND",
    "COMPILED_AVAILABLE",
    "CertificatePair",
    "DensityMatrix",
    "Povm",
    "ReflectionSpec",
    "SolverOptions",
    "VonNeumannMeasurement",
    "build_protocol",
    "classical_bound_povm",
    "classical_bound_projective",
    "close_polygon_phases",
    "diamond_distance",
    "dist_zero_to_hull",
    "evaluate_distance_at_state",
    "fourier_discriminator",
    "fourier_matrix",
    "fourier_rank1_discriminator",
    "has_rank_deficient_principal_submatrix",
    "numerical_range_test",
    "perfect_check",
    "purify",
    "reduce_pair",
    "reflection_diamond",
    "reflection_matrix",
    "refute_perfect_by_numerical_range",
    "saddle_structure_diagnostic",
    "sandwich_bounds",
    "simulate",
    "solve_nu",
    "trace_tests",
]
