"""A-posteriori residual ("proxy") errors and reference comparisons.

Errors are relative throughout. The residual ``f - L u`` bounds the solution
error in the energy norm up to ``1/a_min``, so a small proxy certifies a good
solution even when no reference exists. It can, however, overstate the error
by a large factor when ``a`` has steep derivatives.
"""

from __future__ import annotations

import math
from typing import Optional, Sequence

import numpy as np

from .exceptions import DimensionMismatchError, UnsupportedConfiguration
from .galerkin import AdrData, apply_adr_operator, apply_operator
from .spectra import (TWO_PI, SampledFunction, SparseSpectrum,
                      evaluate_with_derivatives, l2_norm, spectrum_sub)

# Samples per vectorized batch.
_MC_BATCH = 1 << 14


def proxy_error_exact(a_hat: SparseSpectrum, u_approx: SparseSpectrum,
                      f_hat: SparseSpectrum) -> float:
    """``||f - L[a] u||_2 / ||f||_2`` computed exactly in frequency space."""
    fn = l2_norm(f_hat)
    if fn == 0:
        raise ValueError("forcing has zero norm")
    return l2_norm(spectrum_sub(f_hat, apply_operator(a_hat, u_approx))) / fn


def proxy_error_exact_adr(data: AdrData, u_approx: SparseSpectrum) -> float:
    fn = l2_norm(data.f_hat)
    if fn == 0:
        raise ValueError("forcing has zero norm")
    return l2_norm(spectrum_sub(data.f_hat, apply_adr_operator(data, u_approx))) / fn


def _pointwise_diffusion(a: SampledFunction, u: SparseSpectrum, x: np.ndarray,
                         a_hat: Optional[SparseSpectrum]) -> np.ndarray:
    # -div(a grad u) = a (-lap u) - grad a . grad u; with a known spectrum, a and
    # grad a come from it, which equals evaluating L[a]u without expanding it
    if a_hat is not None:
        av, ga, _ = evaluate_with_derivatives(a_hat, x)
    elif a.grad is not None:
        av, ga = a(x), a.gradient(x)
    else:
        raise UnsupportedConfiguration(
            "pointwise residual needs either the coefficient spectrum or a gradient oracle")
    _, gu, lu = evaluate_with_derivatives(u, x)
    return av * (-lu) - np.einsum("ij,ij->i", ga, gu)


def _mc_ratio(resid_fn, f: SampledFunction, d: int, n_samples: int,
              rng: np.random.Generator) -> float:
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    x = rng.random((n_samples, d))
    num = den = 0.0
    for lo in range(0, n_samples, _MC_BATCH):
        xb = x[lo:lo + _MC_BATCH]
        fx = np.asarray(f(xb))
        r = fx - resid_fn(xb)
        num += float(np.sum(np.abs(r) ** 2))
        den += float(np.sum(np.abs(fx) ** 2))
    if den == 0:
        raise ValueError("forcing vanishes at every sample point")
    return math.sqrt(num / den)


def proxy_error_mc(a: SampledFunction, f: SampledFunction, u_approx: SparseSpectrum,
                   n_samples: int, rng: np.random.Generator,
                   a_hat: Optional[SparseSpectrum] = None) -> float:
    """Monte-Carlo estimate of ``||f - L u||_{L2} / ||f||_{L2}``.

    ``L u`` at the sample points comes from ``a_hat`` when given (or attached
    to ``a`` as its spectrum), and otherwise from ``a (-lap u) - grad a . grad u``
    using the gradient oracle of ``a``.
    """
    if a.dim != u_approx.dim or f.dim != u_approx.dim:
        raise DimensionMismatchError("function and spectrum dimensions differ")
    if a_hat is None:
        a_hat = a.spectrum
    return _mc_ratio(lambda xb: _pointwise_diffusion(a, u_approx, xb, a_hat),
                     f, u_approx.dim, n_samples, rng)


def proxy_error_mc_adr(a: SampledFunction, b: Sequence[SampledFunction], c: SampledFunction,
                       f: SampledFunction, u_approx: SparseSpectrum, n_samples: int,
                       rng: np.random.Generator, data: Optional[AdrData] = None) -> float:
    """MC residual for ``-div(a grad u) + b.grad u + c u``; exact data used when given."""
    d = u_approx.dim
    if len(b) != d:
        raise DimensionMismatchError(f"need {d} advection components")
    if data is not None:
        a_hat = data.a_hat
        b = [SampledFunction.from_spectrum(bj) for bj in data.b_hats]
        c = SampledFunction.from_spectrum(data.c_hat)
    else:
        a_hat = a.spectrum

    def resid(xb):
        val, gu, _ = evaluate_with_derivatives(u_approx, xb)
        out = _pointwise_diffusion(a, u_approx, xb, a_hat)
        for j, bj in enumerate(b):
            out = out + bj(xb) * gu[:, j]
        return out + c(xb) * val

    return _mc_ratio(resid, f, d, n_samples, rng)


def h1_weights(freqs: np.ndarray) -> np.ndarray:
    k2 = np.sum(np.asarray(freqs, dtype=float) ** 2, axis=1)
    return np.sqrt(1 + TWO_PI**2 * k2)


def reference_errors(u_approx: SparseSpectrum, u_ref: SparseSpectrum):
    """Relative ``(l2, h1)`` distances, the H1 one weighted by ``sqrt(1 + (2 pi |k|)^2)``."""
    if u_approx.dim != u_ref.dim:
        raise DimensionMismatchError("spectra have different dimensions")
    if not len(u_ref):
        raise ValueError("reference spectrum is zero")
    diff = spectrum_sub(u_approx, u_ref)
    fd, cd = diff.arrays()
    fr, cr = u_ref.arrays()
    rel_l2 = np.linalg.norm(cd) / np.linalg.norm(cr)
    num = np.linalg.norm(cd * h1_weights(fd)) if len(cd) else 0.0
    rel_h1 = num / np.linalg.norm(cr * h1_weights(fr))
    return float(rel_l2), float(rel_h1)
