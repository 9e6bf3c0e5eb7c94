"""Truncated Fourier-Galerkin systems for ``-div(a grad u) (+ b.grad u + c u) = f``.

Row ``k`` and column ``l`` of the diffusion matrix hold
``(2 pi)^2 (l.k) a_{k-l}``; the advection and reaction terms add
``2 pi i sum_j l_j (b_j)_{k-l}`` and ``c_{k-l}``. Only offsets ``k - l`` in the
coefficient supports are nonzero, so rows are assembled by walking those
supports rather than all column pairs.

For pure diffusion the zero frequency row and column vanish identically; it
is dropped from the index and the solution is taken mean-zero.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .exceptions import DimensionMismatchError, NotEllipticError, SizeGuardError, SolverFailure
from .spectra import Frequency, SparseSpectrum, frequency_array
from .stamping import StampSet

FOUR_PI_SQ = (2 * np.pi) ** 2

# Systems up to this size are stored dense and LU-factored; larger ones are
# solved iteratively.
DENSE_MAX = 3000
# Stored entries allowed in one assembled matrix (about 0.6 GB with indices).
NNZ_MAX = 20_000_000
COND_LIMIT = 1e14
RESIDUAL_TOL = 1e-10
ITER_RTOL = 1e-13
ITER_MAX = 2000
GMRES_RESTART = 100


@dataclass(frozen=True)
class AdrData:
    a_hat: SparseSpectrum
    b_hats: Tuple[SparseSpectrum, ...]
    c_hat: SparseSpectrum
    f_hat: SparseSpectrum

    def __post_init__(self):
        d = self.a_hat.dim
        if len(self.b_hats) != d:
            raise DimensionMismatchError(f"need {d} advection components, got {len(self.b_hats)}")
        for s in (*self.b_hats, self.c_hat, self.f_hat):
            if s.dim != d:
                raise DimensionMismatchError("all ADR spectra must share one dimension")
        if (0,) * d in self.f_hat:
            raise ValueError("forcing must be mean-zero (no zero-frequency entry)")

    @property
    def dim(self) -> int:
        return self.a_hat.dim


@dataclass(frozen=True)
class GalerkinSystem:
    index: Tuple[Frequency, ...]
    matrix: object  # ndarray for small systems, scipy CSR otherwise
    hermitian: bool = True
    rhs: Optional[np.ndarray] = None

    @property
    def size(self) -> int:
        return len(self.index)

    @property
    def is_sparse(self) -> bool:
        return sp.issparse(self.matrix)

    def dense(self) -> np.ndarray:
        return self.matrix.toarray() if self.is_sparse else np.asarray(self.matrix)

    def matvec(self, x: np.ndarray) -> np.ndarray:
        return self.matrix @ x


def _row_lookup(freqs: np.ndarray) -> Dict[bytes, int]:
    return {r.tobytes(): i for i, r in enumerate(freqs)}


def _operator_terms(a_hat: SparseSpectrum, b_hats: Sequence[SparseSpectrum] = (),
                    c_hat: Optional[SparseSpectrum] = None):
    """Per offset ``m``: (diffusion coeff, advection coeff vector, reaction coeff)."""
    d = a_hat.dim
    offsets = set(a_hat.support())
    for b in b_hats:
        offsets.update(b.support())
    if c_hat is not None:
        offsets.update(c_hat.support())
    terms = []
    for m in sorted(offsets):
        bvec = np.array([b[m] for b in b_hats], dtype=complex) if b_hats else None
        terms.append((m, a_hat[m], bvec, c_hat[m] if c_hat is not None else 0j))
    return terms, d


def _assemble(index: List[Frequency], terms, d: int, dense_max: int,
              hermitian: bool) -> GalerkinSystem:
    n = len(index)
    K = frequency_array(index, d)
    Kf = K.astype(float)
    lookup = _row_lookup(K)
    rows, cols, vals = [], [], []
    nnz = 0
    for m, a_m, b_m, c_m in terms:
        L = K - np.array(m, dtype=np.int64)
        hit = [(i, lookup.get(r.tobytes())) for i, r in enumerate(L)]
        hit = [(i, j) for i, j in hit if j is not None]
        if not hit:
            continue
        ri = np.fromiter((i for i, _ in hit), dtype=np.int64, count=len(hit))
        ci = np.fromiter((j for _, j in hit), dtype=np.int64, count=len(hit))
        v = np.zeros(len(hit), dtype=complex)
        if a_m != 0:
            v += FOUR_PI_SQ * np.einsum("ij,ij->i", Kf[ci], Kf[ri]) * a_m
        if b_m is not None and np.any(b_m != 0):
            v += 2j * np.pi * (Kf[ci] @ b_m)
        if c_m != 0:
            v += c_m
        nnz += len(hit)
        if nnz > NNZ_MAX:
            raise SizeGuardError(f"Galerkin matrix on {n} unknowns exceeds {NNZ_MAX} entries; "
                                 "lower N or s")
        rows.append(ri)
        cols.append(ci)
        vals.append(v)
    if rows:
        rows, cols, vals = map(np.concatenate, (rows, cols, vals))
    else:
        rows = cols = np.zeros(0, dtype=np.int64)
        vals = np.zeros(0, dtype=complex)
    mat = sp.csr_matrix((vals, (rows, cols)), shape=(n, n), dtype=complex)
    if n <= dense_max:
        mat = mat.toarray()
    return GalerkinSystem(tuple(index), mat, hermitian=hermitian)


def assemble(a_hat: SparseSpectrum, stamp: StampSet, dense_max: int = DENSE_MAX) -> GalerkinSystem:
    """Diffusion matrix on the stamp set, zero frequency excluded."""
    zero = (0,) * a_hat.dim
    if zero not in a_hat:
        raise NotEllipticError("diffusion spectrum has no zero-frequency entry")
    if stamp.dim != a_hat.dim:
        raise DimensionMismatchError("stamp and coefficient dimensions differ")
    index = [k for k in stamp.frequencies() if k != zero]
    if not index:
        raise ValueError("stamp set is empty after removing the zero frequency")
    terms, d = _operator_terms(a_hat)
    return _assemble(index, terms, d, dense_max, hermitian=True)


def assemble_on_index(a_hat: SparseSpectrum, index, dense_max: int = DENSE_MAX) -> GalerkinSystem:
    """Diffusion matrix on an arbitrary frequency list (zero frequency removed)."""
    zero = (0,) * a_hat.dim
    if zero not in a_hat:
        raise NotEllipticError("diffusion spectrum has no zero-frequency entry")
    index = sorted({tuple(k) for k in index} - {zero})
    if not index:
        raise ValueError("index is empty after removing the zero frequency")
    terms, d = _operator_terms(a_hat)
    return _assemble(index, terms, d, dense_max, hermitian=True)


def assemble_adr(data: AdrData, stamp: StampSet, dense_max: int = DENSE_MAX) -> GalerkinSystem:
    """ADR matrix on the stamp set; keeps ``k = 0`` when the reaction has a mean."""
    zero = (0,) * data.dim
    keep_zero = data.c_hat[zero] != 0
    if zero not in data.a_hat and not keep_zero:
        raise NotEllipticError("neither diffusion nor reaction has a zero-frequency entry")
    index = [k for k in stamp.frequencies() if keep_zero or k != zero]
    if not index:
        raise ValueError("stamp set is empty after removing the zero frequency")
    terms, d = _operator_terms(data.a_hat, data.b_hats, data.c_hat)
    return _assemble(index, terms, d, dense_max, hermitian=False)


def _rhs(sys: GalerkinSystem, f_hat: SparseSpectrum) -> np.ndarray:
    pos = {k: i for i, k in enumerate(sys.index)}
    rhs = np.zeros(sys.size, dtype=complex)
    for k, v in f_hat.items():
        if k not in pos:
            raise ValueError(f"forcing frequency {k} lies outside the Galerkin index")
        rhs[pos[k]] = v
    return rhs


def _diag_scaling(sys: GalerkinSystem) -> np.ndarray:
    diag = sys.matrix.diagonal() if sys.is_sparse else np.diag(sys.matrix)
    mag = np.abs(diag)
    scale = np.ones(sys.size)
    ok = mag > 0
    scale[ok] = 1.0 / np.sqrt(mag[ok])
    return scale


def _factor_dense(A: np.ndarray):
    with warnings.catch_warnings():
        warnings.simplefilter("error", sla.LinAlgWarning)
        try:
            lu, piv = sla.lu_factor(A, check_finite=True)
        except sla.LinAlgWarning as exc:
            raise SolverFailure(f"LU factorization failed: {exc}") from exc
    anorm = np.linalg.norm(A, 1)
    rcond, info = sla.lapack.zgecon(lu, anorm, norm="1")
    if info != 0 or not np.all(np.isfinite(lu)):
        raise SolverFailure("LU factorization failed")
    cond = np.inf if rcond == 0 else 1.0 / rcond
    return (lambda b: sla.lu_solve((lu, piv), b)), cond


def _factor_sparse(A: sp.spmatrix):
    try:
        lu = spla.splu(A.tocsc())
    except RuntimeError as exc:
        raise SolverFailure(f"sparse LU failed: {exc}") from exc
    n = A.shape[0]
    inv = spla.LinearOperator((n, n), matvec=lu.solve, rmatvec=lambda b: lu.solve(b, trans="H"),
                              dtype=complex)
    cond = spla.onenormest(A) * spla.onenormest(inv)
    return lu.solve, cond


def _iterative(A: sp.spmatrix, b: np.ndarray, hermitian: bool) -> Optional[np.ndarray]:
    """Krylov solve of the equilibrated system; ``None`` if it stalls."""
    if hermitian:
        x, info = spla.cg(A, b, rtol=ITER_RTOL, atol=0.0, maxiter=ITER_MAX)
    else:
        x, info = spla.gmres(A, b, rtol=ITER_RTOL, atol=0.0, restart=GMRES_RESTART,
                             maxiter=ITER_MAX)
    return x if info == 0 else None


def _check_residual(sys: GalerkinSystem, u: np.ndarray, rhs: np.ndarray, fnorm: float) -> bool:
    return np.linalg.norm(sys.matvec(u) - rhs) <= RESIDUAL_TOL * fnorm


def solve(sys: GalerkinSystem, f_hat_s: SparseSpectrum) -> SparseSpectrum:
    """Solve ``L u = f`` on the system's index and return ``u`` as a spectrum.

    Small systems are LU-factored densely with a condition check. Large ones
    (stored sparse) go to CG, or GMRES when not Hermitian, falling back to a
    sparse LU if the Krylov method stalls.
    """
    dim = len(sys.index[0])
    if f_hat_s.dim != dim:
        raise DimensionMismatchError("forcing and system dimensions differ")
    rhs = _rhs(sys, f_hat_s)
    fnorm = np.linalg.norm(rhs)
    if fnorm == 0:
        return SparseSpectrum(dim)
    # symmetric diagonal equilibration: solve (D A D) y = D f, u = D y
    D = _diag_scaling(sys)
    b = D * rhs
    if sys.is_sparse:
        Dm = sp.diags(D)
        A = (Dm @ sys.matrix @ Dm).tocsr()
        y = _iterative(A, b, sys.hermitian)
        if y is not None and _check_residual(sys, D * y, rhs, fnorm):
            return SparseSpectrum(dim, dict(zip(sys.index, (D * y).tolist())))
        solver, cond = _factor_sparse(A)
    else:
        A = sys.matrix * D[:, None] * D[None, :]
        solver, cond = _factor_dense(A)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise SolverFailure(f"Galerkin matrix condition estimate {cond:.3e} exceeds {COND_LIMIT:.0e}")
    u = D * solver(b)
    if not _check_residual(sys, u, rhs, fnorm):
        # one step of iterative refinement
        u = u - D * solver(D * (sys.matvec(u) - rhs))
        if not _check_residual(sys, u, rhs, fnorm):
            res = np.linalg.norm(sys.matvec(u) - rhs) / fnorm
            raise SolverFailure(f"relative residual {res:.3e} above {RESIDUAL_TOL:.0e}")
    return SparseSpectrum(dim, dict(zip(sys.index, u.tolist())))


def _apply(u_hat: SparseSpectrum, terms, d: int) -> SparseSpectrum:
    if not len(u_hat) or not terms:
        return SparseSpectrum(d)
    if len(u_hat) * len(terms) > NNZ_MAX:
        raise SizeGuardError(f"operator image of {len(u_hat)} terms under {len(terms)} "
                             f"coefficient terms exceeds {NNZ_MAX} entries")
    U, coeffs = u_hat.arrays()
    Uf = U.astype(float)
    keys, vals = [], []
    for m, a_m, b_m, c_m in terms:
        Kout = U + np.array(m, dtype=np.int64)
        w = np.zeros(len(U), dtype=complex)
        if a_m != 0:
            w += FOUR_PI_SQ * np.einsum("ij,ij->i", Uf, Kout.astype(float)) * a_m
        if b_m is not None and np.any(b_m != 0):
            w += 2j * np.pi * (Uf @ b_m)
        if c_m != 0:
            w += c_m
        keys.append(Kout)
        vals.append(w * coeffs)
    keys = np.concatenate(keys)
    vals = np.concatenate(vals)
    uniq, inv = np.unique(keys, axis=0, return_inverse=True)
    summed = np.zeros(len(uniq), dtype=complex)
    np.add.at(summed, inv.ravel(), vals)
    return SparseSpectrum(d, dict(zip(map(tuple, uniq.tolist()), summed.tolist())))


def apply_operator(a_hat: SparseSpectrum, u_hat: SparseSpectrum) -> SparseSpectrum:
    """Exact ``L[a] u`` on the whole lattice ``Z^d`` (no truncation)."""
    if a_hat.dim != u_hat.dim:
        raise DimensionMismatchError("coefficient and argument dimensions differ")
    terms, d = _operator_terms(a_hat)
    return _apply(u_hat, terms, d)


def apply_adr_operator(data: AdrData, u_hat: SparseSpectrum) -> SparseSpectrum:
    if data.dim != u_hat.dim:
        raise DimensionMismatchError("coefficient and argument dimensions differ")
    terms, d = _operator_terms(data.a_hat, data.b_hats, data.c_hat)
    return _apply(u_hat, terms, d)


def ellipticity_check(a_hat_s: SparseSpectrum) -> Tuple[bool, float]:
    """Sufficient positivity test ``sum_{k != 0} |a_k| < |a_0|``.

    Returns ``(ok, a_min_lb)`` where ``a_min_lb = |a_0| - sum_{k != 0} |a_k|``
    lower-bounds the coefficient pointwise.
    """
    zero = (0,) * a_hat_s.dim
    if zero not in a_hat_s:
        raise NotEllipticError("coefficient spectrum has no zero-frequency entry")
    a0 = a_hat_s[zero]
    dev = sum(abs(v) for k, v in a_hat_s.items() if k != zero)
    lb = abs(a0) - dev
    return bool(dev < abs(a0) and a0.real > 0), float(lb)
