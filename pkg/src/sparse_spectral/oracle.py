"""Brute-force references for low dimension and small bandwidth.

All three carry hard size guards; they exist to check the sparse pipeline,
not to compete with it.
"""

from __future__ import annotations

import itertools

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .exceptions import SizeGuardError, SolverFailure
from .galerkin import assemble_on_index, solve
from .sft import cube_bounds
from .spectra import SampledFunction, SparseSpectrum

GRID_LIMIT = 2**24
GALERKIN_LIMIT = 2**14
COEFF_FLOOR = 1e-13
_GL_ORDER = 4


def _signed(idx: np.ndarray, K: int) -> np.ndarray:
    # FFT bin i holds frequency i for i <= K/2 and i - K above
    return np.where(idx > K // 2, idx - K, idx)


def dense_fourier_coeffs(g: SampledFunction, d: int, K: int) -> SparseSpectrum:
    """Tensor-grid DFT of ``g`` on ``K^d`` points; frequencies in the bandwidth cube."""
    if K**d > GRID_LIMIT:
        raise SizeGuardError(f"K^d = {K**d} exceeds the grid limit {GRID_LIMIT}")
    if g.dim != d:
        raise ValueError("function dimension does not match d")
    axes = [np.arange(K) / K] * d
    pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
    vals = np.asarray(g(pts), dtype=complex).reshape((K,) * d)
    coeffs = np.fft.fftn(vals) / K**d
    mask = np.abs(coeffs) > COEFF_FLOOR
    idx = np.argwhere(mask)
    freqs = _signed(idx, K)
    return SparseSpectrum.from_arrays(freqs, coeffs[mask], d)


def cube_frequencies(d: int, K: int):
    lo, hi = cube_bounds(K)
    return list(itertools.product(range(lo, hi + 1), repeat=d))


def dense_galerkin_solve(a_hat: SparseSpectrum, f_hat: SparseSpectrum, d: int, K: int) -> SparseSpectrum:
    """Galerkin solve on every mean-zero frequency of the bandwidth cube."""
    if K**d > GALERKIN_LIMIT:
        raise SizeGuardError(f"K^d = {K**d} unknowns exceeds {GALERKIN_LIMIT}")
    sys = assemble_on_index(a_hat, cube_frequencies(d, K))
    f_hat = f_hat.without([(0,) * d])
    return solve(sys, f_hat)


def _cell_harmonic_means(a: SampledFunction, n: int) -> np.ndarray:
    """``h / int 1/a`` over each cell ``[x_i, x_{i+1}]`` by Gauss-Legendre quadrature."""
    t, w = np.polynomial.legendre.leggauss(_GL_ORDER)
    h = 1.0 / n
    left = np.arange(n) * h
    pts = (left[:, None] + (t[None, :] + 1) * h / 2).reshape(-1, 1)
    inv = 1.0 / np.asarray(a(pts), dtype=float).reshape(n, _GL_ORDER)
    return 1.0 / ((inv * w).sum(axis=1) / 2)


def fine_mesh_ode_solve(a: SampledFunction, f: SampledFunction, n_mesh: int) -> SparseSpectrum:
    """Second-order finite-volume solve of ``-(a u')' = f`` on the periodic unit interval.

    Nodes sit at ``x_i = i/n``; the flux between nodes ``i`` and ``i+1`` uses the
    harmonic mean of ``a`` over that cell, which keeps second order when ``a``
    oscillates on a scale comparable to the mesh. The singular periodic
    system is bordered with the mean-zero constraint. Returns the DFT of the
    nodal solution.
    """
    if a.dim != 1 or f.dim != 1:
        raise ValueError("fine_mesh_ode_solve is univariate")
    n = int(n_mesh)
    if n < 4:
        raise ValueError("need at least 4 mesh points")
    h = 1.0 / n
    x = (np.arange(n) * h)[:, None]
    am = _cell_harmonic_means(a, n)  # flux coefficient between i and i+1
    if np.any(~np.isfinite(am)) or np.any(am <= 0):
        raise SolverFailure("coefficient is not positive on the mesh")
    ap = am
    aw = np.roll(am, 1)  # between i-1 and i
    i = np.arange(n)
    rows = np.concatenate([i, i, i])
    cols = np.concatenate([i, (i - 1) % n, (i + 1) % n])
    vals = np.concatenate([aw + ap, -aw, -ap]) / h**2
    A = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    ones = sp.csr_matrix(np.ones((n, 1)))
    B = sp.bmat([[A, ones], [ones.T, None]]).tocsc()
    rhs = np.asarray(f(x), dtype=float)
    rhs = rhs - rhs.mean()
    sol = spla.spsolve(B, np.append(rhs, 0.0))
    u = sol[:n]
    if not np.all(np.isfinite(u)):
        raise SolverFailure("fine-mesh system is singular")
    coeffs = np.fft.fft(u) / n
    freqs = _signed(np.arange(n), n)[:, None]
    mask = np.abs(coeffs) > COEFF_FLOOR
    mask[0] = False
    return SparseSpectrum.from_arrays(freqs[mask], coeffs[mask], 1)
