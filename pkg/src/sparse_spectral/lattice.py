"""Random rank-1 lattices and the lattice FFT.

A rank-1 lattice ``Lambda(z, M)`` is the set of ``M`` points ``(j/M) z mod 1``.
Sampling a function along it turns a ``d``-variate Fourier analysis into a
univariate length-``M`` DFT, in which frequency ``k`` lands in bin
``k.z mod M``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Tuple

import numpy as np

from .spectra import Frequency

# Deterministic Miller-Rabin witnesses, valid for every n < 3.3e24.
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d, r = n - 1, 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = pow(x, 2, n)
            if x == n - 1:
                break
        else:
            return False
    return True


def smallest_prime_above(x: float) -> int:
    """Least prime strictly greater than ``x``."""
    if x < 1:
        raise ValueError("x must be >= 1")
    n = math.floor(x) + 1
    while not is_prime(n):
        n += 1
    return n


@dataclass(frozen=True)
class Rank1Lattice:
    z: Tuple[int, ...]
    M: int

    def __post_init__(self):
        if not is_prime(self.M):
            raise ValueError(f"lattice size {self.M} is not prime")
        if any(not 1 <= zi <= self.M - 1 for zi in self.z):
            raise ValueError("generating vector entries must lie in {1, ..., M-1}")

    @property
    def dim(self) -> int:
        return len(self.z)

    def residues(self, freqs: Iterable[Frequency]) -> np.ndarray:
        """``k.z mod M`` for each frequency, computed exactly."""
        return np.array([sum(k_i * z_i for k_i, z_i in zip(k, self.z)) % self.M
                         for k in freqs], dtype=np.int64)

    def nodes(self) -> np.ndarray:
        return lattice_nodes(self)


def generate_random_lattice(d: int, K: int, set_size: int, sigma: float,
                            rng: np.random.Generator) -> Rank1Lattice:
    """Draw ``z`` uniformly from ``{1..M-1}^d`` with ``M`` sized for ``set_size``.

    ``M`` is the smallest prime above ``max(K, set_size**2 / sigma)``, which makes
    the lattice reconstructing for any fixed set of ``set_size`` frequencies
    of expansion at most ``K`` with probability at least ``1 - sigma``.
    """
    if K < 1 or set_size < 1 or not 0 < sigma <= 1:
        raise ValueError("need K >= 1, set_size >= 1 and sigma in (0, 1]")
    M = smallest_prime_above(max(K, set_size ** 2 / sigma))
    z = rng.integers(1, M, size=d)
    return Rank1Lattice(tuple(int(v) for v in z), M)


def is_reconstructing(lat: Rank1Lattice, freqs: Iterable[Frequency]) -> bool:
    freqs = list(freqs)
    res = lat.residues(freqs)
    return len(np.unique(res)) == len(freqs)


def lattice_nodes(lat: Rank1Lattice) -> np.ndarray:
    """The ``M`` nodes ``(j/M) z mod 1`` as an ``(M, d)`` array in ``j`` order."""
    j = np.arange(lat.M, dtype=np.int64)[:, None]
    z = np.array(lat.z, dtype=np.int64)[None, :]
    # exact integer reduction first; j*z < M^2 fits int64 for M < 3e9
    return (j * z % lat.M) / lat.M


def lattice_fft(samples) -> np.ndarray:
    """Forward DFT with ``1/M`` scaling: ``c_m = (1/M) sum_j g_j exp(-2 pi i j m / M)``.

    numpy's pocketfft handles any length, prime lengths included (Bluestein).
    """
    samples = np.asarray(samples, dtype=complex)
    return np.fft.fft(samples, axis=-1) / samples.shape[-1]


def lattice_ifft(coeffs) -> np.ndarray:
    """Inverse of :func:`lattice_fft`."""
    coeffs = np.asarray(coeffs, dtype=complex)
    return np.fft.ifft(coeffs, axis=-1) * coeffs.shape[-1]


def naive_dft(samples) -> np.ndarray:
    """O(M^2) reference transform with the same scaling; small M only."""
    samples = np.asarray(samples, dtype=complex)
    M = len(samples)
    if M > 512:
        raise ValueError("naive_dft is limited to M <= 512")
    jm = np.outer(np.arange(M), np.arange(M)) % M
    return np.exp(-2j * np.pi * jm / M) @ samples / M


def bin_indices(lat: Rank1Lattice, freqs) -> np.ndarray:
    """Vectorized ``k.z mod M`` for an ``(n, d)`` integer array."""
    arr = np.asarray(freqs, dtype=np.int64).reshape(-1, lat.dim)
    z = np.array(lat.z, dtype=np.int64)
    # reduce each product before summing so nothing overflows
    return ((arr % lat.M) * z % lat.M).sum(axis=1) % lat.M
