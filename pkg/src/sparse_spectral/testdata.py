"""Seeded generators for the experiment families.

Exactly sparse problems return their spectra; the compressible ones return
:class:`SampledFunction` closures (with analytic gradients, so Monte-Carlo
residuals can use the true operator).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from .galerkin import AdrData, ellipticity_check
from .spectra import Frequency, SampledFunction, SparseSpectrum

TWO_PI = 2 * np.pi
MAX_RETRIES = 10
GAUSSIAN_IMAGES = 10  # periodization sum runs over m = -10..10


def _neg(k: Frequency) -> Frequency:
    return tuple(-c for c in k)


def _draw_freq(rng: np.random.Generator, d: int, lo: int, hi: int,
               nonzero: bool = True) -> Frequency:
    while True:
        k = tuple(int(v) for v in rng.integers(lo, hi + 1, size=d))
        if not nonzero or any(k):
            return k


def _add(entries: Dict[Frequency, complex], k: Frequency, v: complex) -> None:
    entries[k] = entries.get(k, 0) + v


def cos_terms(entries, k, c):
    """``c cos(2 pi k.x)`` contributes ``c/2`` at ``+-k``."""
    _add(entries, k, c / 2)
    _add(entries, _neg(k), c / 2)


def sin_terms(entries, k, c):
    """``c sin(2 pi k.x)`` contributes ``c/(2i)`` at ``k`` and ``-c/(2i)`` at ``-k``."""
    _add(entries, k, c / 2j)
    _add(entries, _neg(k), -c / 2j)


# ---------------------------------------------------------------- univariate

_DAUB_POINTS = 2**14


def _daub_a(x):
    g = (0.6 + 0.2 * np.cos(TWO_PI * x)) / (1 + 0.7 * np.sin(256 * np.pi * x))
    return 0.1 * np.exp(g)


def _daub_a_prime(x):
    num = 0.6 + 0.2 * np.cos(TWO_PI * x)
    den = 1 + 0.7 * np.sin(256 * np.pi * x)
    dnum = -0.4 * np.pi * np.sin(TWO_PI * x)
    dden = 0.7 * 256 * np.pi * np.cos(256 * np.pi * x)
    return _daub_a(x) * (dnum * den - num * dden) / den**2


def daubechies_1d() -> Tuple[SampledFunction, SampledFunction]:
    """Multiscale 1D coefficient and smooth forcing with its mean removed.

    ``a(x) = exp((0.6 + 0.2 cos 2 pi x) / (1 + 0.7 sin 256 pi x)) / 10`` and
    ``f(x) = exp(-cos 2 pi x) - mean``. The mean comes from a 2^14-point
    trapezoid rule, exact to machine precision for this periodic integrand.
    """
    grid = np.arange(_DAUB_POINTS) / _DAUB_POINTS
    mean = float(np.mean(np.exp(-np.cos(TWO_PI * grid))))

    a = SampledFunction(1, lambda x: _daub_a(x[:, 0]),
                        grad=lambda x: _daub_a_prime(x[:, 0])[:, None], name="daubechies-a")
    f = SampledFunction(1, lambda x: np.exp(-np.cos(TWO_PI * x[:, 0])) - mean,
                        grad=lambda x: (TWO_PI * np.sin(TWO_PI * x[:, 0])
                                        * np.exp(-np.cos(TWO_PI * x[:, 0])))[:, None],
                        name="daubechies-f")
    return a, f


# ----------------------------------------------------------- exactly sparse
# Default boxes are symmetric: a real function with a component at K/2 has
# its mirror at -K/2, which lies outside the recoverable cube.

def sine_forcing(k_f: Frequency) -> SparseSpectrum:
    entries: Dict[Frequency, complex] = {}
    sin_terms(entries, k_f, 1.0)
    return SparseSpectrum(len(k_f), entries)


def sparse_diffusion_problem(d: int, rng: np.random.Generator, a0: float = 4.0,
                             c_a: Optional[float] = None,
                             box: Tuple[int, int] = (-499, 499)):
    """``a = a0 + c_a cos(2 pi k_a.x)``, ``f = sin(2 pi k_f.x)``.

    ``c_a ~ U[-1, 1]`` unless given (pass the same value across dimensions to
    vary only the frequency locations). Frequencies are uniform in ``box^d``.
    """
    if c_a is None:
        c_a = float(rng.uniform(-1, 1))
    k_a = _draw_freq(rng, d, *box)
    k_f = _draw_freq(rng, d, *box)
    entries = {(0,) * d: a0}
    cos_terms(entries, k_a, c_a)
    return SparseSpectrum(d, entries), sine_forcing(k_f)


def high_sparsity_diffusion(d: int, rng: np.random.Generator, n_terms: int = 25,
                            coeffs: Optional[Sequence[float]] = None,
                            box: Tuple[int, int] = (-499, 499)):
    """``a = a0 + sum_k c_k cos(2 pi k.x)`` with ``a0 = 4 ceil(||c||_2)``.

    Draws are repeated (at most ten times) until the exact spectrum passes
    the l1 ellipticity check.
    """
    for _ in range(MAX_RETRIES):
        c = np.asarray(coeffs if coeffs is not None else rng.uniform(-1, 1, size=n_terms))
        a0 = 4 * math.ceil(np.linalg.norm(c))
        entries: Dict[Frequency, complex] = {(0,) * d: a0}
        for ck in c:
            cos_terms(entries, _draw_freq(rng, d, *box), float(ck))
        a_hat = SparseSpectrum(d, entries)
        if ellipticity_check(a_hat)[0]:
            k_f = _draw_freq(rng, d, *box)
            return a_hat, sine_forcing(k_f)
    raise RuntimeError("could not draw an elliptic coefficient in %d tries" % MAX_RETRIES)


# ------------------------------------------------------------- compressible

def _gauss_1d(r: float, x: np.ndarray) -> np.ndarray:
    m = np.arange(-GAUSSIAN_IMAGES, GAUSSIAN_IMAGES + 1)
    t = x[..., None] - m
    return math.sqrt(TWO_PI) / r * np.exp(-(TWO_PI**2) * t**2 / (2 * r * r)).sum(axis=-1)


def _gauss_1d_prime(r: float, x: np.ndarray) -> np.ndarray:
    m = np.arange(-GAUSSIAN_IMAGES, GAUSSIAN_IMAGES + 1)
    t = x[..., None] - m
    e = np.exp(-(TWO_PI**2) * t**2 / (2 * r * r))
    return math.sqrt(TWO_PI) / r * (-(TWO_PI**2) * t / (r * r) * e).sum(axis=-1)


def periodic_gaussian_1d(r: float) -> SampledFunction:
    """``G_r(x) = sqrt(2 pi)/r sum_m exp(-(2 pi)^2 (x - m)^2 / (2 r^2))``.

    Its Fourier coefficients are ``exp(-r^2 k^2 / 2)``.
    """
    if r <= 0:
        raise ValueError("r must be positive")
    return SampledFunction(1, lambda x: _gauss_1d(r, x[:, 0]),
                           grad=lambda x: _gauss_1d_prime(r, x[:, 0])[:, None],
                           name=f"G_{r}")


def periodized_gaussian(r: float, k: Sequence[int]) -> SampledFunction:
    """Modulated tensor Gaussian ``prod_j exp(2 pi i k_j x_j) G_r(x_j)`` (complex)."""
    if r <= 0:
        raise ValueError("r must be positive")
    kv = np.asarray(k, dtype=float)

    def func(x):
        return np.exp(1j * TWO_PI * np.mod(x @ kv, 1.0)) * np.prod(_gauss_1d(r, x), axis=1)

    def grad(x):
        G = _gauss_1d(r, x)
        dG = _gauss_1d_prime(r, x)
        mod = np.exp(1j * TWO_PI * np.mod(x @ kv, 1.0))
        prod = np.prod(G, axis=1)
        # d/dx_j of the product, written without dividing by G
        out = np.empty(x.shape, dtype=complex)
        for j in range(x.shape[1]):
            others = np.prod(np.delete(G, j, axis=1), axis=1)
            out[:, j] = mod * (1j * TWO_PI * kv[j] * prod + dG[:, j] * others)
        return out

    return SampledFunction(len(kv), func, grad=grad, name=f"G_{r},{tuple(k)}")


def _real_gaussian_term(r, k, c):
    """``c Re G_{r,k}(x) = c cos(2 pi k.x) prod_j G_r(x_j)``; bumps at ``+-k``."""
    kv = np.asarray(k, dtype=float)

    def value(x):
        return c * np.cos(TWO_PI * np.mod(x @ kv, 1.0)) * np.prod(_gauss_1d(r, x), axis=1)

    def grad(x):
        G = _gauss_1d(r, x)
        dG = _gauss_1d_prime(r, x)
        ph = TWO_PI * np.mod(x @ kv, 1.0)
        cs, sn = np.cos(ph), np.sin(ph)
        prod = np.prod(G, axis=1)
        out = np.empty(x.shape)
        for j in range(x.shape[1]):
            others = np.prod(np.delete(G, j, axis=1), axis=1)
            out[:, j] = c * (-TWO_PI * kv[j] * sn * prod + cs * dG[:, j] * others)
        return out

    return value, grad


def gaussian_series_spectrum(c0: float, terms, r: float, d: int, radius: int = 6) -> SparseSpectrum:
    """Truncated exact spectrum of ``c0 + sum c Re G_{r,k}`` (offsets up to ``radius``)."""
    entries: Dict[Frequency, complex] = {(0,) * d: c0}
    offs = np.arange(-radius, radius + 1)
    w1 = np.exp(-(r * r) * offs**2 / 2)
    grids = np.stack(np.meshgrid(*([offs] * d), indexing="ij"), axis=-1).reshape(-1, d)
    weights = np.prod(w1[grids + radius], axis=1)
    for k, c in terms:
        for off, w in zip(grids.tolist(), weights.tolist()):
            if w < 1e-16:
                continue
            p = tuple(ki + oi for ki, oi in zip(k, off))
            _add(entries, p, c * w / 2)
            _add(entries, _neg(p), c * w / 2)
    return SparseSpectrum(d, entries)


@dataclass
class GaussianSeries:
    a: SampledFunction
    f_hat: SparseSpectrum
    c0: float
    terms: list = field(default_factory=list)
    r: float = 1.0


def gaussian_series_problem(d: int, n_terms: int, r: float, bandwidth_box: Tuple[int, int],
                            c0_factor: float, rng: np.random.Generator,
                            coeffs: Optional[Sequence[float]] = None) -> GaussianSeries:
    """Diffusion ``a = c0 + sum_k c_k Re G_{r,k}`` with ``c0 = c0_factor ceil(||c||_2)``.

    Modulating frequencies and the sine forcing frequency are uniform in
    ``bandwidth_box^d``.
    """
    c = np.asarray(coeffs if coeffs is not None else rng.uniform(-1, 1, size=n_terms), dtype=float)
    c0 = float(c0_factor * math.ceil(np.linalg.norm(c))) if n_terms else float(c0_factor)
    ks = [_draw_freq(rng, d, *bandwidth_box, nonzero=False) for _ in range(n_terms)]
    parts = [_real_gaussian_term(r, k, float(ck)) for k, ck in zip(ks, c)]

    def value(x):
        out = np.full(len(x), c0)
        for v, _ in parts:
            out = out + v(x)
        return out

    def grad(x):
        out = np.zeros(x.shape)
        for _, g in parts:
            out = out + g(x)
        return out

    a = SampledFunction(d, value, grad=grad, name="gaussian-series")
    f_hat = sine_forcing(_draw_freq(rng, d, *bandwidth_box))
    return GaussianSeries(a, f_hat, c0, list(zip(ks, c.tolist())), r)


# ------------------------------------------------------------------- ADR

@dataclass(frozen=True)
class AdrTermCounts:
    """Trig terms drawn per field; counts exclude the constant means."""

    a: int = 4
    b_each: int = 10
    c: int = 10
    f: int = 5

    def operator_terms(self, d: int = 3) -> int:
        return self.a + d * self.b_each + self.c


ADR_COUNTS = AdrTermCounts()


def adr_problem(rng: np.random.Generator, d: int = 3,
                box: Tuple[int, int] = (-49, 49)) -> AdrData:
    """Exactly sparse advection-diffusion-reaction data.

    ``a``: 2 sine + 2 cosine terms, coefficients U[-1,1], mean
    ``4 ceil(||c_a||_2)``. Each ``b_j``: 5 sine + 5 cosine terms, U[0,1], no
    mean. ``c``: like ``b_j`` plus mean ``4 ceil(||c_c||_2)``. ``f``: 2 sine +
    3 cosine terms, U[-1,1]. Frequencies are uniform in ``box^d``. That is 44 non-constant operator terms plus the
    two means.
    """
    def field_(n_sin, n_cos, lo, hi):
        entries: Dict[Frequency, complex] = {}
        cs = rng.uniform(lo, hi, size=n_sin + n_cos)
        for i, coef in enumerate(cs):
            k = _draw_freq(rng, d, *box)
            (sin_terms if i < n_sin else cos_terms)(entries, k, float(coef))
        return entries, cs

    for _ in range(MAX_RETRIES):
        a_e, ca = field_(2, 2, -1, 1)
        a_e[(0,) * d] = a_e.get((0,) * d, 0) + 4 * math.ceil(np.linalg.norm(ca))
        b = tuple(SparseSpectrum(d, field_(5, 5, 0, 1)[0]) for _ in range(d))
        c_e, cc = field_(5, 5, 0, 1)
        c_e[(0,) * d] = c_e.get((0,) * d, 0) + 4 * math.ceil(np.linalg.norm(cc))
        f_e, _ = field_(2, 3, -1, 1)
        f_e.pop((0,) * d, None)
        a_hat = SparseSpectrum(d, a_e)
        if ellipticity_check(a_hat)[0]:
            return AdrData(a_hat, b, SparseSpectrum(d, c_e), SparseSpectrum(d, f_e))
    raise RuntimeError("could not draw an elliptic ADR coefficient")


# ---------------------------------------------------------------- presets

@dataclass
class Problem:
    """Sampled data for one solve; ``b``/``c`` are set for ADR problems only."""

    name: str
    d: int
    a: SampledFunction
    f: SampledFunction
    b: Optional[Tuple[SampledFunction, ...]] = None
    c: Optional[SampledFunction] = None

    @property
    def is_adr(self) -> bool:
        return self.b is not None


def _from_spectra(name, a_hat, f_hat) -> Problem:
    return Problem(name, a_hat.dim, SampledFunction.from_spectrum(a_hat, name + "-a"),
                   SampledFunction.from_spectrum(f_hat, name + "-f"))


def _gaussian(name, d, rng, box, r):
    g = gaussian_series_problem(d, 2, r, box, 10, rng)
    return Problem(name, d, g.a, SampledFunction.from_spectrum(g.f_hat, name + "-f"))


PRESETS = {
    "sparse-diffusion": lambda d, rng: _from_spectra("sparse-diffusion",
                                                     *sparse_diffusion_problem(d, rng)),
    "high-sparsity": lambda d, rng: _from_spectra("high-sparsity",
                                                  *high_sparsity_diffusion(d, rng)),
    "daubechies-1d": lambda d, rng: Problem("daubechies-1d", 1, *daubechies_1d()),
    "gaussian-low": lambda d, rng: _gaussian("gaussian-low", d, rng, (-24, 24), 1.1**2),
    "gaussian-high": lambda d, rng: _gaussian("gaussian-high", d, rng, (-249, 249), 1.1**d),
    "adr": lambda d, rng: _adr_problem_functions(adr_problem(rng, d)),
}


def _adr_problem_functions(data: AdrData) -> Problem:
    fs = SampledFunction.from_spectrum
    return Problem("adr", data.dim, fs(data.a_hat, "adr-a"), fs(data.f_hat, "adr-f"),
                   tuple(fs(bj, f"adr-b{j + 1}") for j, bj in enumerate(data.b_hats)),
                   fs(data.c_hat, "adr-c"))


def make_problem(preset: str, d: int, rng: np.random.Generator) -> Problem:
    if preset not in PRESETS:
        raise KeyError(f"unknown preset {preset!r}; choose from {sorted(PRESETS)}")
    if preset == "daubechies-1d" and d != 1:
        raise ValueError("daubechies-1d is univariate")
    return PRESETS[preset](d, rng)
