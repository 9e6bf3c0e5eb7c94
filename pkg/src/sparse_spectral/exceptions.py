"""Exception types raised across the package."""


class SparseSpectralError(Exception):
    """Base class for all package errors."""


class DimensionMismatchError(SparseSpectralError, ValueError):
    pass


class DecodingFailure(SparseSpectralError):
    """Phase decoding produced a frequency outside the bandwidth cube.

    Usually means the random lattice collided on the realized support; retry
    with a fresh seed.
    """


class InvalidStampError(SparseSpectralError, ValueError):
    pass


class StampOverflowError(SparseSpectralError):
    pass


class SolverFailure(SparseSpectralError):
    """The Galerkin system is singular or too ill-conditioned to trust."""


class NotEllipticError(SparseSpectralError):
    """The recovered diffusion coefficient is not verifiably elliptic."""


class UndefinedBoundError(SparseSpectralError, ValueError):
    """A theoretical bound was requested outside its hypothesis."""


class UnsupportedConfiguration(SparseSpectralError):
    pass


class SizeGuardError(SparseSpectralError, ValueError):
    pass
