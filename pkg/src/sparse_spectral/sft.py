"""Reference high-dimensional sparse Fourier transform on random rank-1 lattices.

The transform samples ``g`` along a random lattice sized for ``2s``
frequencies, plus ``d`` copies of the lattice shifted by ``delta = 1/(2K)``
along each axis. The ``2s`` strongest bins of the unshifted transform give the
coefficients; the phase drift of each bin across the shifted copies gives its
frequency one coordinate at a time.

Sample cost is ``(d + 1) M``, not sublinear, but the interface (``g``, ``K``,
``s``, ``sigma``, seed in; ``2s``-sparse spectrum out) is the one a faster
algorithm would plug into.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .exceptions import DecodingFailure
from .lattice import Rank1Lattice, generate_random_lattice, lattice_fft, lattice_nodes
from .spectra import Frequency, SampledFunction, SparseSpectrum

# Bins weaker than this fraction of the strongest bin carry no usable phase.
SIGNIFICANCE = 1e-10


@dataclass(frozen=True)
class SftConfig:
    """Bandwidth ``K`` means frequencies in ``{-K/2+1, ..., K/2}`` per axis."""

    d: int
    K: int
    s: int
    sigma: float = 0.05
    seed: int = 0

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("d must be positive")
        if self.K < 2 or self.K % 2:
            raise ValueError("K must be an even integer >= 2")
        if self.s < 1:
            raise ValueError("s must be >= 1")
        if not 0 < self.sigma <= 1:
            raise ValueError("sigma must lie in (0, 1]")

    @property
    def delta(self) -> float:
        return 1.0 / (2 * self.K)


@dataclass(frozen=True)
class SftResult:
    spectrum: SparseSpectrum
    lattice: Rank1Lattice
    n_samples: int


def cube_bounds(K: int) -> Tuple[int, int]:
    return -K // 2 + 1, K // 2


def in_cube(k: Frequency, K: int) -> bool:
    lo, hi = cube_bounds(K)
    return all(lo <= c <= hi for c in k)


def decode_frequency(base_bin: complex, shifted_bins, delta: float,
                     K: Optional[int] = None) -> Frequency:
    """Recover ``k`` from the phase ratios ``shifted_i / base = exp(2 pi i k_i delta)``.

    ``K`` defaults to ``1 / (2 delta)``. Any component outside the cube raises
    :class:`DecodingFailure`.
    """
    if K is None:
        K = int(round(1.0 / (2.0 * delta)))
    if base_bin == 0:
        raise DecodingFailure("cannot decode a zero bin")
    ratios = np.asarray(shifted_bins, dtype=complex) / base_bin
    k = np.rint(np.angle(ratios) / (2 * np.pi * delta)).astype(np.int64)
    lo, hi = cube_bounds(K)
    bad = np.flatnonzero((k < lo) | (k > hi))
    if bad.size:
        raise DecodingFailure(
            f"decoded component {int(k[bad[0]])} on axis {int(bad[0])} lies outside [{lo}, {hi}]")
    return tuple(int(c) for c in k)


def _shifted_nodes(nodes: np.ndarray, axis: int, delta: float) -> np.ndarray:
    pts = nodes.copy()
    pts[:, axis] = np.mod(pts[:, axis] + delta, 1.0)
    return pts


def sft_with_info(g: SampledFunction, cfg: SftConfig) -> SftResult:
    if g.dim != cfg.d:
        raise ValueError(f"function has dimension {g.dim}, config says {cfg.d}")
    rng = np.random.default_rng(cfg.seed)
    lat = generate_random_lattice(cfg.d, cfg.K, 2 * cfg.s, cfg.sigma, rng)
    nodes = lattice_nodes(lat)
    base = lattice_fft(g(nodes))
    n_samples = lat.M * (cfg.d + 1)

    mags = np.abs(base)
    peak = mags.max() if mags.size else 0.0
    if peak == 0.0:
        return SftResult(SparseSpectrum(cfg.d), lat, n_samples)
    order = np.argsort(-mags, kind="stable")[: 2 * cfg.s]
    order = order[mags[order] >= SIGNIFICANCE * peak]

    shifted = np.empty((cfg.d, len(order)), dtype=complex)
    for i in range(cfg.d):
        shifted[i] = lattice_fft(g(_shifted_nodes(nodes, i, cfg.delta)))[order]

    out: dict = {}
    for col, m in enumerate(order):
        k = decode_frequency(base[m], shifted[:, col], cfg.delta, cfg.K)
        # bins arrive strongest first, so a collision keeps the larger one
        if k not in out:
            out[k] = base[m]
    return SftResult(SparseSpectrum(cfg.d, out), lat, n_samples)


def sft(g: SampledFunction, cfg: SftConfig) -> SparseSpectrum:
    """Return an at most ``2s``-sparse approximation of ``g``'s spectrum."""
    return sft_with_info(g, cfg).spectrum


def sft_error_bounds(cfg: SftConfig, tail_l1: float, opt_tail_l1: float) -> Tuple[float, float]:
    """Recovery guarantees ``(l2_bound, linf_bound)`` for a random-lattice SFT.

    ``opt_tail_l1`` is the l1 distance from the spectrum to its best s-term
    approximation inside the bandwidth cube. ``tail_l1`` is unused here; see
    :func:`sft_error_bounds_fixed_set`.
    """
    if tail_l1 < 0 or opt_tail_l1 < 0:
        raise ValueError("tails must be nonnegative")
    l2 = (25 + 3 * cfg.K) * math.sqrt(cfg.s) * opt_tail_l1
    linf = (33 + 4 * cfg.K) * opt_tail_l1
    return l2, linf


def sft_error_bounds_fixed_set(cfg: SftConfig, tail_l1: float,
                               opt_tail_l1: float) -> Tuple[float, float]:
    """Two-term bounds for a known frequency set: ``tail_l1`` is the mass off the set."""
    if tail_l1 < 0 or opt_tail_l1 < 0:
        raise ValueError("tails must be nonnegative")
    rs = math.sqrt(cfg.s)
    l2 = (25 + 3 * cfg.K) * (opt_tail_l1 / rs + rs * tail_l1)
    linf = (33 + 4 * cfg.K) * (opt_tail_l1 + tail_l1)
    return l2, linf
