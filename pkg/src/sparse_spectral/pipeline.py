"""End-to-end solver: sparse transforms, stamping set, Galerkin solve, diagnostics.

Randomness flows from ``SolverConfig.seed``; each stage draws from its own
stream ``SeedSequence([seed, stage_id])`` so rerunning one stage does not
disturb the others.
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence

import numpy as np

from .errors import proxy_error_exact, proxy_error_exact_adr, proxy_error_mc, proxy_error_mc_adr
from .exceptions import NotEllipticError, SizeGuardError, UndefinedBoundError
from .galerkin import DENSE_MAX, AdrData, assemble, assemble_adr, ellipticity_check, solve
from .lattice import smallest_prime_above
from .sft import SftConfig, sft
from .spectra import SampledFunction, SparseSpectrum, l1_norm, l2_norm, spectrum_to_csv
from .stamping import DEFAULT_CAP, stamp_set, stamp_set_adr

STAGES = {"sft_a": 1, "sft_f": 2, "mc": 3, "sft_c": 4, "testdata": 5}
_SFT_B_BASE = 100  # stage id of b_j is 100 + j


def stage_seed(seed: int, stage: str) -> int:
    """Independent 63-bit seed for a named stage (``sft_b<j>`` for advection)."""
    sid = _SFT_B_BASE + int(stage[5:]) if stage.startswith("sft_b") else STAGES[stage]
    return int(np.random.SeedSequence([seed, sid]).generate_state(2, np.uint64)[0] >> 1)


@dataclass(frozen=True)
class SolverConfig:
    d: int
    K: int
    s: int
    N: int
    sigma: float = 0.05
    seed: int = 0
    mc_samples: int = 200
    adr_stamp: str = "union"
    stamp_cap: int = DEFAULT_CAP
    dense_max: int = DENSE_MAX
    ellipticity: str = "strict"  # "warn" solves anyway when the l1 test fails

    def __post_init__(self):
        SftConfig(self.d, self.K, self.s, self.sigma, 0)  # same checks
        if self.N < 0:
            raise ValueError("N must be nonnegative")
        if self.mc_samples < 1:
            raise ValueError("mc_samples must be >= 1")
        if self.adr_stamp not in ("sum", "union"):
            raise ValueError("adr_stamp must be 'sum' or 'union'")
        if self.ellipticity not in ("strict", "warn"):
            raise ValueError("ellipticity must be 'strict' or 'warn'")

    def sft_config(self, stage: str) -> SftConfig:
        return SftConfig(self.d, self.K, self.s, self.sigma, stage_seed(self.seed, stage))


@dataclass(frozen=True)
class EllipticityProfile:
    """Coercivity data read off a coefficient spectrum.

    ``deviation_l1 = sum_{k != 0} |a_k|`` upper-bounds ``||a - a_0||_inf``, and
    ``a_min_lb = a_0 - deviation_l1`` lower-bounds ``a``.
    """

    a0: float
    a_min_lb: float
    deviation_l1: float
    A: float
    decay_base: Optional[float]

    @property
    def a_l1(self) -> float:
        return abs(self.a0) + self.deviation_l1

    @classmethod
    def from_values(cls, a0: float, a_min_lb: float, deviation_l1: float) -> "EllipticityProfile":
        A = deviation_l1 / a_min_lb if a_min_lb > 0 else math.inf
        base = A / (1 - 2 * A) if 3 * deviation_l1 < a_min_lb else None
        return cls(float(a0), float(a_min_lb), float(deviation_l1), float(A), base)

    @classmethod
    def from_spectrum(cls, a_hat: SparseSpectrum) -> "EllipticityProfile":
        zero = (0,) * a_hat.dim
        a0 = a_hat[zero].real
        dev = sum(abs(v) for k, v in a_hat.items() if k != zero)
        return cls.from_values(a0, abs(a_hat[zero]) - dev, dev)


@dataclass(frozen=True)
class SolveReport:
    u_hat: SparseSpectrum
    stamp_size: int
    profile: Optional[EllipticityProfile]
    truncation_bound: float
    proxy_error_exact: Optional[float]
    proxy_error_mc: Optional[float]
    wall_times: Dict[str, float] = field(default_factory=dict)
    seed: int = 0
    a_hat_s: Optional[SparseSpectrum] = None
    f_hat_s: Optional[SparseSpectrum] = None
    n_samples: int = 0

    def to_text(self) -> str:
        """Key/value summary; spectra are written separately as CSV."""
        lines = [
            f"seed = {self.seed}",
            f"stamp_size = {self.stamp_size}",
            f"solution_terms = {len(self.u_hat)}",
            f"sft_samples = {self.n_samples}",
            f"truncation_bound = {self.truncation_bound!r}",
            f"proxy_error_exact = {self.proxy_error_exact!r}",
            f"proxy_error_mc = {self.proxy_error_mc!r}",
        ]
        if self.profile is not None:
            p = self.profile
            lines += [f"a0 = {p.a0!r}", f"a_min_lb = {p.a_min_lb!r}",
                      f"deviation_l1 = {p.deviation_l1!r}", f"A = {p.A!r}",
                      f"decay_base = {p.decay_base!r}"]
        lines += [f"time_{k} = {v:.6f}" for k, v in self.wall_times.items()]
        return "\n".join(lines) + "\n"

    def u_csv(self, path=None) -> str:
        return spectrum_to_csv(self.u_hat, path)


def symmetrize(spec: SparseSpectrum) -> SparseSpectrum:
    """Force ``c_{-k} = conj(c_k)``: pairs are averaged, lone entries get a conjugate mirror."""
    out = {}
    for k, v in spec.items():
        mk = tuple(-c for c in k)
        avg = (v + np.conj(spec[mk])) / 2 if mk in spec else v
        out[k] = avg
        out[mk] = np.conj(avg)
    return SparseSpectrum(spec.dim, out)


def truncation_decay_bound(profile: EllipticityProfile, N: int, f_l2: float) -> float:
    """``(A/(1-2A))^{N+1} ||f||_2 / a_min``; needs ``3 * deviation < a_min``."""
    if profile.decay_base is None or profile.a_min_lb <= 0:
        raise UndefinedBoundError(
            f"decay bound needs 3*deviation < a_min ({3 * profile.deviation_l1:.4g} "
            f">= {profile.a_min_lb:.4g})")
    return profile.decay_base ** (N + 1) * f_l2 / profile.a_min_lb


def convergence_bound(profile: EllipticityProfile, N: int, sft_f_err_l2: float,
                      sft_a_err_l1: float, f_l2: float, a_l1: float) -> float:
    """Estimated a-priori bound on the H-norm error of the sparse solution.

    ``(1 + a_l1/(a_min - e)) (f_l2/(a_min - e))
    (f_err/f_l2 + e + (dev/(a_min - 2 dev - e))^{N+1})`` with ``e`` the l1
    error of the recovered coefficient. ``a_l1`` should be the l1 norm of
    the true coefficient; when that is unknown pass ``||a_s||_1 + e``.
    """
    e, dev, amin = sft_a_err_l1, profile.deviation_l1, profile.a_min_lb
    if not 3 * dev + e < profile.a0 or amin - 2 * dev - e <= 0:
        raise UndefinedBoundError("need 3*deviation + coefficient error < a_0")
    if f_l2 == 0:
        return 0.0
    m = amin - e
    decay = (dev / (amin - 2 * dev - e)) ** (N + 1)
    return (1 + a_l1 / m) * (f_l2 / m) * (sft_f_err_l2 / f_l2 + e + decay)


def _recover(g: SampledFunction, cfg: SolverConfig, stage: str) -> SparseSpectrum:
    return symmetrize(sft(g, cfg.sft_config(stage)))


def _drop_mean(f_s: SparseSpectrum) -> SparseSpectrum:
    zero = (0,) * f_s.dim
    if zero in f_s:
        warnings.warn(f"dropping recovered forcing mean {f_s[zero]:.3e}", RuntimeWarning)
        f_s = f_s.without([zero])
    return f_s


def _check_elliptic(a_s: SparseSpectrum, cfg: SolverConfig) -> None:
    if (0,) * cfg.d not in a_s:
        raise NotEllipticError("coefficient not verifiably elliptic at this sparsity "
                               "(no mean recovered); raise s")
    if ellipticity_check(a_s)[0]:
        return
    msg = "coefficient not verifiably elliptic at this sparsity; raise s"
    if cfg.ellipticity == "strict":
        raise NotEllipticError(msg)
    warnings.warn(msg + " (continuing)", RuntimeWarning)


def _guarded_exact(fn, *args):
    # the exact residual expands L u on all of Z^d; skip it when that is too large
    try:
        return fn(*args)
    except SizeGuardError as exc:
        warnings.warn(f"exact proxy error skipped: {exc}", RuntimeWarning)
        return None


def _safe_bound(profile, N, f_l2):
    try:
        return truncation_decay_bound(profile, N, f_l2)
    except UndefinedBoundError:
        return math.nan


def _sample_count(cfg: SolverConfig, n_functions: int) -> int:
    lat_m = sft_lattice_size(cfg)
    return n_functions * lat_m * (cfg.d + 1)


def sft_lattice_size(cfg: SolverConfig) -> int:
    return smallest_prime_above(max(cfg.K, (2 * cfg.s) ** 2 / cfg.sigma))


def _empty_report(cfg, profile, a_s, f_s, times) -> SolveReport:
    warnings.warn("forcing has no nonzero frequencies; returning the zero solution",
                  RuntimeWarning)
    return SolveReport(SparseSpectrum(cfg.d), 0, profile, 0.0, None, None, times,
                       cfg.seed, a_s, f_s, _sample_count(cfg, 2))


def sparse_spectral_solve(a: SampledFunction, f: SampledFunction, cfg: SolverConfig) -> SolveReport:
    """Solve ``-div(a grad u) = f`` from samples of ``a`` and ``f``."""
    times: Dict[str, float] = {}
    t0 = time.perf_counter()
    a_s = _recover(a, cfg, "sft_a")
    f_s = _drop_mean(_recover(f, cfg, "sft_f"))
    times["sft"] = time.perf_counter() - t0

    _check_elliptic(a_s, cfg)
    profile = EllipticityProfile.from_spectrum(a_s)
    if not len(f_s):
        return _empty_report(cfg, profile, a_s, f_s, times)

    t0 = time.perf_counter()
    stamp = stamp_set(a_s.support(), f_s.support(), cfg.N, cfg.stamp_cap)
    times["stamp"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    system = assemble(a_s, stamp, cfg.dense_max)
    times["assemble"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    u = solve(system, f_s)
    times["solve"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    err_exact = None
    if a.spectrum is not None and f.spectrum is not None:
        err_exact = _guarded_exact(proxy_error_exact, a.spectrum, u,
                                   f.spectrum.without([(0,) * cfg.d]))
    rng = np.random.default_rng(stage_seed(cfg.seed, "mc"))
    # with neither the true spectrum nor a gradient, fall back to the recovered spectrum
    a_hat_mc = a.spectrum if a.spectrum is not None else (None if a.grad is not None else a_s)
    err_mc = proxy_error_mc(a, f, u, cfg.mc_samples, rng, a_hat=a_hat_mc)
    times["errors"] = time.perf_counter() - t0

    return SolveReport(u, len(stamp), profile, _safe_bound(profile, cfg.N, l2_norm(f_s)),
                       err_exact, err_mc, times, cfg.seed, a_s, f_s, _sample_count(cfg, 2))


def sparse_spectral_solve_adr(a: SampledFunction, b: Sequence[SampledFunction], c: SampledFunction,
                              f: SampledFunction, cfg: SolverConfig) -> SolveReport:
    """Solve ``-div(a grad u) + b.grad u + c u = f`` from samples.

    With ``b = c = 0`` this reproduces :func:`sparse_spectral_solve` exactly
    for equal seeds.
    """
    if len(b) != cfg.d:
        raise ValueError(f"need {cfg.d} advection components, got {len(b)}")
    times: Dict[str, float] = {}
    t0 = time.perf_counter()
    a_s = _recover(a, cfg, "sft_a")
    f_s = _drop_mean(_recover(f, cfg, "sft_f"))
    b_s = tuple(_recover(bj, cfg, f"sft_b{j}") for j, bj in enumerate(b))
    c_s = _recover(c, cfg, "sft_c")
    times["sft"] = time.perf_counter() - t0

    _check_elliptic(a_s, cfg)
    if c_s[(0,) * cfg.d].real < 0:
        warnings.warn("recovered reaction mean is negative; the system may be indefinite",
                      RuntimeWarning)
    profile = EllipticityProfile.from_spectrum(a_s)
    if not len(f_s):
        return _empty_report(cfg, profile, a_s, f_s, times)

    data_s = AdrData(a_s, b_s, c_s, f_s)
    t0 = time.perf_counter()
    stamp = stamp_set_adr(a_s.support(), [bj.support() for bj in b_s], c_s.support(),
                          f_s.support(), cfg.N, cfg.adr_stamp, cfg.stamp_cap)
    times["stamp"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    system = assemble_adr(data_s, stamp, cfg.dense_max)
    times["assemble"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    u = solve(system, f_s)
    times["solve"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    exact = None
    spectra = [a.spectrum, *(bj.spectrum for bj in b), c.spectrum, f.spectrum]
    if all(s is not None for s in spectra):
        exact = AdrData(a.spectrum, tuple(bj.spectrum for bj in b), c.spectrum,
                        f.spectrum.without([(0,) * cfg.d]))
    err_exact = _guarded_exact(proxy_error_exact_adr, exact, u) if exact is not None else None
    rng = np.random.default_rng(stage_seed(cfg.seed, "mc"))
    err_mc = proxy_error_mc_adr(a, b, c, f, u, cfg.mc_samples, rng)
    times["errors"] = time.perf_counter() - t0

    return SolveReport(u, len(stamp), profile, _safe_bound(profile, cfg.N, l2_norm(f_s)),
                       err_exact, err_mc, times, cfg.seed, a_s, f_s,
                       _sample_count(cfg, 3 + cfg.d))


def estimated_convergence_bound(report: SolveReport, N: int, sft_f_err_l2: float,
                                sft_a_err_l1: float) -> float:
    """Convergence bound using ``||a_s||_1 + e`` for the unknown true ``||a||_1``."""
    if report.a_hat_s is None or report.f_hat_s is None or report.profile is None:
        raise UndefinedBoundError("report carries no recovered data")
    return convergence_bound(report.profile, N, sft_f_err_l2, sft_a_err_l1,
                             l2_norm(report.f_hat_s), l1_norm(report.a_hat_s) + sft_a_err_l1)
