"""Sparse frequency-domain data model.

Frequencies are plain tuples of Python ints, so the natural tuple ordering is
the lexicographic order used everywhere for canonical output. A
:class:`SparseSpectrum` maps frequencies to complex coefficients and stores no
exact zeros.
"""

from __future__ import annotations

import csv
import io
from types import MappingProxyType
from typing import Callable, Iterable, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .exceptions import DimensionMismatchError

Frequency = Tuple[int, ...]

TWO_PI = 2.0 * np.pi

# Frequencies are converted to int64 for vectorized dot products.
_INT64_SAFE = 2**62

# Cap on the number of (point, frequency) pairs materialized at once.
_EVAL_BLOCK = 2**21


def as_frequency(k: Iterable[int]) -> Frequency:
    return tuple(int(c) for c in k)


def frequency_array(freqs: Sequence[Frequency], dim: int) -> np.ndarray:
    """Stack frequencies into an ``(n, dim)`` int64 array, checking range."""
    if len(freqs) == 0:
        return np.zeros((0, dim), dtype=np.int64)
    for k in freqs:
        for c in k:
            if not -_INT64_SAFE < c < _INT64_SAFE:
                raise OverflowError(f"frequency component {c} exceeds int64 range")
    return np.array(freqs, dtype=np.int64).reshape(len(freqs), dim)


class SparseSpectrum:
    """Finite map ``Z^d -> C`` with canonical (zero-free) storage.

    Instances are immutable. Arithmetic returns new spectra; entries that come
    out exactly zero are dropped, nothing else is pruned.
    """

    __slots__ = ("_dim", "_entries", "_arrays")

    def __init__(self, dim: int, entries: Optional[Mapping[Iterable[int], complex]] = None):
        if dim < 1:
            raise ValueError("dimension must be positive")
        self._dim = int(dim)
        clean = {}
        for k, v in (entries or {}).items():
            key = as_frequency(k)
            if len(key) != self._dim:
                raise DimensionMismatchError(
                    f"frequency {key} has length {len(key)}, expected {self._dim}")
            v = complex(v)
            if v != 0:
                clean[key] = v
        self._entries = dict(sorted(clean.items()))
        self._arrays = None

    @classmethod
    def from_arrays(cls, freqs, coeffs, dim: Optional[int] = None) -> "SparseSpectrum":
        freqs = np.asarray(freqs)
        if dim is None:
            dim = freqs.shape[1]
        entries: dict = {}
        for k, c in zip(freqs.reshape(-1, dim).tolist(), np.asarray(coeffs).ravel().tolist()):
            key = tuple(k)
            entries[key] = entries.get(key, 0) + c
        return cls(dim, entries)

    @classmethod
    def zero(cls, dim: int) -> "SparseSpectrum":
        return cls(dim)

    @property
    def dim(self) -> int:
        return self._dim

    @property
    def entries(self) -> Mapping[Frequency, complex]:
        return MappingProxyType(self._entries)

    def support(self) -> list:
        return list(self._entries)

    def items(self):
        return self._entries.items()

    def __getitem__(self, k) -> complex:
        return self._entries.get(as_frequency(k), 0j)

    def __contains__(self, k) -> bool:
        return as_frequency(k) in self._entries

    def __len__(self) -> int:
        return len(self._entries)

    def __iter__(self):
        return iter(self._entries)

    def __bool__(self) -> bool:
        return bool(self._entries)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SparseSpectrum):
            return NotImplemented
        return self._dim == other._dim and self._entries == other._entries

    def __hash__(self):
        return hash((self._dim, tuple(self._entries.items())))

    def __repr__(self) -> str:
        shown = ", ".join(f"{k}: {v:.6g}" for k, v in list(self._entries.items())[:6])
        more = ", ..." if len(self) > 6 else ""
        return f"SparseSpectrum(dim={self._dim}, {{{shown}{more}}})"

    def arrays(self) -> Tuple[np.ndarray, np.ndarray]:
        """Return ``(freqs, coeffs)`` as ``(n, d)`` int64 and ``(n,)`` complex arrays."""
        if self._arrays is None:
            freqs = frequency_array(list(self._entries), self._dim)
            coeffs = np.fromiter(self._entries.values(), dtype=complex, count=len(self))
            freqs.setflags(write=False)
            coeffs.setflags(write=False)
            self._arrays = (freqs, coeffs)
        return self._arrays

    def _check(self, other: "SparseSpectrum") -> None:
        if self._dim != other._dim:
            raise DimensionMismatchError(f"dimensions differ: {self._dim} vs {other._dim}")

    def __add__(self, other: "SparseSpectrum") -> "SparseSpectrum":
        self._check(other)
        out = dict(self._entries)
        for k, v in other._entries.items():
            out[k] = out.get(k, 0) + v
        return SparseSpectrum(self._dim, out)

    def __sub__(self, other: "SparseSpectrum") -> "SparseSpectrum":
        return spectrum_sub(self, other)

    def __neg__(self) -> "SparseSpectrum":
        return SparseSpectrum(self._dim, {k: -v for k, v in self._entries.items()})

    def __mul__(self, alpha) -> "SparseSpectrum":
        alpha = complex(alpha)
        return SparseSpectrum(self._dim, {k: alpha * v for k, v in self._entries.items()})

    __rmul__ = __mul__

    def restrict(self, keys: Iterable[Frequency]) -> "SparseSpectrum":
        keep = {as_frequency(k) for k in keys}
        return SparseSpectrum(self._dim, {k: v for k, v in self._entries.items() if k in keep})

    def without(self, keys: Iterable[Frequency]) -> "SparseSpectrum":
        drop = {as_frequency(k) for k in keys}
        return SparseSpectrum(self._dim, {k: v for k, v in self._entries.items() if k not in drop})

    def conj_reflect(self) -> "SparseSpectrum":
        """Spectrum of the complex conjugate function: ``k -> conj(s_{-k})``."""
        return SparseSpectrum(
            self._dim, {tuple(-c for c in k): v.conjugate() for k, v in self._entries.items()})

    def evaluate(self, x) -> Union[complex, np.ndarray]:
        return evaluate_trig_poly(self, x)

    def to_csv(self, path=None) -> str:
        return spectrum_to_csv(self, path)


def _points(x, dim: int) -> Tuple[np.ndarray, bool]:
    pts = np.asarray(x, dtype=float)
    single = pts.ndim == 1
    pts = pts.reshape(1, -1) if single else pts
    if pts.ndim != 2 or pts.shape[1] != dim:
        raise DimensionMismatchError(
            f"points have {pts.shape[-1]} coordinates, spectrum has dimension {dim}")
    return np.mod(pts, 1.0), single


def _phases(pts: np.ndarray, freqs: np.ndarray) -> np.ndarray:
    # reduce k.x mod 1 before scaling so large frequencies keep their phase accuracy
    return np.exp(1j * TWO_PI * np.mod(pts @ freqs.T.astype(float), 1.0))


def evaluate_trig_poly(spec: SparseSpectrum, x) -> Union[complex, np.ndarray]:
    """Evaluate ``sum_k s_k exp(2 pi i k.x)`` at one point or a ``(n, d)`` batch."""
    pts, single = _points(x, spec.dim)
    out = np.zeros(len(pts), dtype=complex)
    if len(spec):
        freqs, coeffs = spec.arrays()
        step = max(1, _EVAL_BLOCK // max(len(spec), spec.dim))
        for lo in range(0, len(pts), step):
            out[lo:lo + step] = _phases(pts[lo:lo + step], freqs) @ coeffs
    return complex(out[0]) if single else out


def evaluate_with_derivatives(spec: SparseSpectrum, x):
    """Return value, gradient ``(n, d)`` and Laplacian of the trig polynomial."""
    pts, _ = _points(x, spec.dim)
    n = len(pts)
    val = np.zeros(n, dtype=complex)
    grad = np.zeros((n, spec.dim), dtype=complex)
    lap = np.zeros(n, dtype=complex)
    if len(spec):
        freqs, coeffs = spec.arrays()
        kf = freqs.astype(float)
        lap_w = -(TWO_PI ** 2) * np.sum(kf * kf, axis=1) * coeffs
        step = max(1, _EVAL_BLOCK // max(len(spec), spec.dim))
        for lo in range(0, n, step):
            e = _phases(pts[lo:lo + step], freqs)
            val[lo:lo + step] = e @ coeffs
            grad[lo:lo + step] = (e * coeffs) @ (1j * TWO_PI * kf)
            lap[lo:lo + step] = e @ lap_w
    return val, grad, lap


def best_s_term(spec: SparseSpectrum, s: int) -> SparseSpectrum:
    """Keep the ``s`` largest-magnitude entries; ties keep the smaller frequency."""
    if s < 0:
        raise ValueError("s must be nonnegative")
    # entries are already in lexicographic order and sorted() is stable
    ranked = sorted(spec.items(), key=lambda kv: -abs(kv[1]))
    return SparseSpectrum(spec.dim, dict(ranked[:s]))


def spectrum_norms(spec: SparseSpectrum) -> Tuple[float, float, float]:
    """Return ``(l1, l2, h_semi)`` where ``h_semi`` weights by ``2 pi |k|``."""
    if not len(spec):
        return 0.0, 0.0, 0.0
    freqs, coeffs = spec.arrays()
    mag = np.abs(coeffs)
    ksq = np.sum(freqs.astype(float) ** 2, axis=1)
    l1 = float(np.sum(mag))
    l2 = float(np.sqrt(np.sum(mag ** 2)))
    h = float(np.sqrt(np.sum(TWO_PI ** 2 * ksq * mag ** 2)))
    return l1, l2, h


def h_seminorm(spec: SparseSpectrum) -> float:
    return spectrum_norms(spec)[2]


def l2_norm(spec: SparseSpectrum) -> float:
    return spectrum_norms(spec)[1]


def l1_norm(spec: SparseSpectrum) -> float:
    return spectrum_norms(spec)[0]


def spectrum_sub(a: SparseSpectrum, b: SparseSpectrum) -> SparseSpectrum:
    a._check(b)
    out = dict(a.entries)
    for k, v in b.items():
        out[k] = out.get(k, 0) - v
    return SparseSpectrum(a.dim, out)


def is_conjugate_symmetric(spec: SparseSpectrum, tol: float = 0.0) -> bool:
    for k, v in spec.items():
        mirror = spec[tuple(-c for c in k)]
        if abs(mirror - v.conjugate()) > tol:
            return False
    return True


def spectrum_to_csv(spec: SparseSpectrum, path=None) -> str:
    """Serialize as ``k_1,...,k_d,re,im`` rows in lexicographic key order.

    Floats are written with ``repr`` so a round trip is exact. Returns the
    text; also writes it to ``path`` when given.
    """
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f"k_{i + 1}" for i in range(spec.dim)] + ["re", "im"])
    for k, v in spec.items():
        w.writerow(list(k) + [repr(v.real), repr(v.imag)])
    text = buf.getvalue()
    if path is not None:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    return text


def spectrum_from_csv(source) -> SparseSpectrum:
    """Parse CSV text (or a path) written by :func:`spectrum_to_csv`."""
    if isinstance(source, str) and "\n" in source:
        text = source
    else:
        with open(source, newline="") as fh:
            text = fh.read()
    rows = list(csv.reader(io.StringIO(text)))
    header, body = rows[0], rows[1:]
    dim = len(header) - 2
    if dim < 1 or header[-2:] != ["re", "im"]:
        raise ValueError("not a spectrum CSV: bad header")
    entries = {}
    for row in body:
        if not row:
            continue
        k = tuple(int(c) for c in row[:dim])
        entries[k] = complex(float(row[dim]), float(row[dim + 1]))
    return SparseSpectrum(dim, entries)


class SampledFunction:
    """Black-box function on the torus ``T^d``.

    ``func`` takes an ``(n, d)`` array of points and returns ``n`` values. An
    optional ``grad`` oracle (same calling convention, returning ``(n, d)``)
    and, for exactly sparse test data, the known ``spectrum`` may be attached.
    Calling with a single point returns a scalar.
    """

    def __init__(self, dim: int, func: Callable[[np.ndarray], np.ndarray],
                 grad: Optional[Callable[[np.ndarray], np.ndarray]] = None,
                 spectrum: Optional[SparseSpectrum] = None, name: str = ""):
        self.dim = int(dim)
        self._func = func
        self.grad = grad
        self.spectrum = spectrum
        self.name = name

    @classmethod
    def from_spectrum(cls, spec: SparseSpectrum, name: str = "") -> "SampledFunction":
        def grad(x):
            return evaluate_with_derivatives(spec, x)[1]
        return cls(spec.dim, lambda x: evaluate_trig_poly(spec, x), grad=grad,
                   spectrum=spec, name=name)

    def __call__(self, x):
        pts, single = _points(x, self.dim)
        vals = np.asarray(self._func(pts))
        return vals[0] if single else vals

    def gradient(self, x) -> np.ndarray:
        if self.grad is None:
            raise AttributeError("no gradient oracle attached")
        pts, _ = _points(x, self.dim)
        return np.asarray(self.grad(pts))

    def __repr__(self) -> str:
        return f"SampledFunction(dim={self.dim}, name={self.name!r})"


def zero_function(dim: int) -> SampledFunction:
    return SampledFunction.from_spectrum(SparseSpectrum(dim), name="zero")


def mean_zero(spec: SparseSpectrum) -> SparseSpectrum:
    return spec.without([(0,) * spec.dim])


def isclose_spectra(a: SparseSpectrum, b: SparseSpectrum, atol: float) -> bool:
    diff = spectrum_sub(a, b)
    return all(abs(v) <= atol for _, v in diff.items())
