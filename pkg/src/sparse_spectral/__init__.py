"""Sparse spectral solver for periodic, high-dimensional elliptic PDEs.

Pipeline: recover sparse spectra of the data with a lattice-based sparse
Fourier transform, predict the solution's support with a stamping set, then
solve the small Galerkin system on that set.
"""

from .exceptions import (DecodingFailure, DimensionMismatchError, InvalidStampError,
                         NotEllipticError, SizeGuardError, SolverFailure, SparseSpectralError,
                         StampOverflowError, UndefinedBoundError, UnsupportedConfiguration)
from .spectra import (SampledFunction, SparseSpectrum, best_s_term, evaluate_trig_poly,
                      spectrum_from_csv, spectrum_norms, spectrum_to_csv)
from .lattice import Rank1Lattice, generate_random_lattice, is_reconstructing, lattice_fft
from .sft import SftConfig, decode_frequency, sft, sft_error_bounds
from .stamping import (StampSet, cardinality_bound_combinatorial, cardinality_bound_simple,
                       stamp_set, stamp_set_adr)
from .galerkin import (AdrData, GalerkinSystem, apply_adr_operator, apply_operator, assemble,
                       assemble_adr, ellipticity_check, solve)
from .errors import proxy_error_exact, proxy_error_mc, reference_errors
from .pipeline import (EllipticityProfile, SolveReport, SolverConfig, convergence_bound,
                       sparse_spectral_solve, sparse_spectral_solve_adr, truncation_decay_bound)

__version__ = "0.1.0"

__all__ = [
    "DecodingFailure",
    "DimensionMismatchError",
    "InvalidStampError",
    "NotEllipticError",
    "SizeGuardError",
    "SolverFailure",
    "SparseSpectralError",
    "StampOverflowError",
    "UndefinedBoundError",
    "UnsupportedConfiguration",
    "SampledFunction",
    "SparseSpectrum",
    "best_s_term",
    "evaluate_trig_poly",
    "spectrum_from_csv",
    "spectrum_norms",
    "spectrum_to_csv",
    "Rank1Lattice",
    "generate_random_lattice",
    "is_reconstructing",
    "lattice_fft",
    "SftConfig",
    "decode_frequency",
    "sft",
    "sft_error_bounds",
    "StampSet",
    "cardinality_bound_combinatorial",
    "cardinality_bound_simple",
    "stamp_set",
    "stamp_set_adr",
    "AdrData",
    "GalerkinSystem",
    "apply_adr_operator",
    "apply_operator",
    "assemble",
    "assemble_adr",
    "ellipticity_check",
    "solve",
    "proxy_error_exact",
    "proxy_error_mc",
    "reference_errors",
    "EllipticityProfile",
    "SolveReport",
    "SolverConfig",
    "convergence_bound",
    "sparse_spectral_solve",
    "sparse_spectral_solve_adr",
    "truncation_decay_bound",
]
