import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sparse_spectral.errors import (proxy_error_exact, proxy_error_exact_adr, proxy_error_mc,
                                    proxy_error_mc_adr, reference_errors)
from sparse_spectral.exceptions import DimensionMismatchError, UnsupportedConfiguration
from sparse_spectral.galerkin import AdrData, assemble, assemble_adr, solve
from sparse_spectral.spectra import SampledFunction, SparseSpectrum
from sparse_spectral.stamping import stamp_set, stamp_set_adr
from sparse_spectral.testdata import sparse_diffusion_problem

FOUR_PI_SQ = (2 * np.pi) ** 2


def poisson_1d():
    a = SparseSpectrum(1, {(0,): 2.0})
    f = SparseSpectrum(1, {(3,): 1.0, (-3,): 1.0})
    u = SparseSpectrum(1, {k: v / (FOUR_PI_SQ * 9 * 2.0) for k, v in f.items()})
    return a, f, u


def test_exact_proxy_examples():
    a, f, u = poisson_1d()
    assert proxy_error_exact(a, u, f) < 1e-12
    assert proxy_error_exact(a, SparseSpectrum(1), f) == 1.0
    assert proxy_error_exact(a, u * 0.5, f) == pytest.approx(0.5, abs=1e-12)
    with pytest.raises(ValueError):
        proxy_error_exact(a, u, SparseSpectrum(1))


def test_exact_proxy_zero_for_truncated_solution_constant_a(rng):
    a = SparseSpectrum(2, {(0, 0): 3.0})
    f = SparseSpectrum(2, {(1, 4): 0.5, (-1, -4): 0.5, (2, -1): 1j, (-2, 1): -1j})
    u = solve(assemble(a, stamp_set(a.support(), f.support(), 1)), f)
    assert proxy_error_exact(a, u, f) < 1e-12


def test_mc_proxy_examples(rng):
    a, f, u = poisson_1d()
    af, ff = SampledFunction.from_spectrum(a), SampledFunction.from_spectrum(f)
    for n in (1, 10, 1000):
        assert proxy_error_mc(af, ff, u, n, rng) < 1e-10
    const = SampledFunction(1, lambda x: np.full(len(x), 2.5))
    for n in (1, 7, 500):
        assert proxy_error_mc(af, const, SparseSpectrum(1), n, rng) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        proxy_error_mc(af, ff, u, 0, rng)


def test_mc_gradient_path_matches_spectrum_path(rng):
    a_hat, f_hat = sparse_diffusion_problem(3, rng, box=(-5, 5))
    u = solve(assemble(a_hat, stamp_set(a_hat.support(), f_hat.support(), 1)), f_hat)
    f = SampledFunction.from_spectrum(f_hat)
    full = SampledFunction.from_spectrum(a_hat)
    grad_only = SampledFunction(3, full, grad=full.grad)
    e1 = proxy_error_mc(full, f, u, 500, np.random.default_rng(1))
    e2 = proxy_error_mc(grad_only, f, u, 500, np.random.default_rng(1))
    assert e1 == pytest.approx(e2, rel=1e-10)


def test_mc_without_gradient_or_spectrum_is_unsupported(rng):
    a = SampledFunction(1, lambda x: np.full(len(x), 2.0))
    f = SampledFunction.from_spectrum(SparseSpectrum(1, {(1,): 1, (-1,): 1}))
    with pytest.raises(UnsupportedConfiguration):
        proxy_error_mc(a, f, SparseSpectrum(1, {(1,): 0.1}), 10, rng)
    with pytest.raises(DimensionMismatchError):
        proxy_error_mc(a, f, SparseSpectrum(2), 10, rng)


def test_mc_deterministic_for_seed():
    a, f, u = poisson_1d()
    af, ff = SampledFunction.from_spectrum(a), SampledFunction.from_spectrum(f)
    u = u * 0.9
    e = [proxy_error_mc(af, ff, u, 300, np.random.default_rng(5)) for _ in range(2)]
    assert e[0] == e[1]


def test_mc_converges_to_exact():
    rng = np.random.default_rng(11)
    a_hat, f_hat = sparse_diffusion_problem(4, rng, c_a=0.9, box=(-20, 20))
    u = solve(assemble(a_hat, stamp_set(a_hat.support(), f_hat.support(), 1)), f_hat)
    exact = proxy_error_exact(a_hat, u, f_hat)
    a, f = SampledFunction.from_spectrum(a_hat), SampledFunction.from_spectrum(f_hat)
    medians = []
    for n in (100, 1000, 10_000):
        devs = [abs(proxy_error_mc(a, f, u, n, np.random.default_rng(s)) - exact) for s in range(20)]
        medians.append(np.median(devs))
    assert medians[0] >= medians[1] >= medians[2]


def test_adr_proxies_agree():
    rng = np.random.default_rng(3)
    a_hat = SparseSpectrum(2, {(0, 0): 3.0, (1, 0): 0.2, (-1, 0): 0.2})
    b = (SparseSpectrum(2, {(0, 1): 0.3j, (0, -1): -0.3j}), SparseSpectrum(2, {(0, 0): 0.5}))
    c = SparseSpectrum(2, {(0, 0): 1.0, (1, 1): 0.1, (-1, -1): 0.1})
    f = SparseSpectrum(2, {(2, 1): 1.0, (-2, -1): 1.0})
    data = AdrData(a_hat, b, c, f)
    S = stamp_set_adr(a_hat.support(), [x.support() for x in b], c.support(), f.support(), 2)
    u = solve(assemble_adr(data, S), f)
    exact = proxy_error_exact_adr(data, u)
    funcs = [SampledFunction.from_spectrum(x) for x in (a_hat, *b, c, f)]
    mc = proxy_error_mc_adr(funcs[0], funcs[1:3], funcs[3], funcs[4], u, 20_000, rng)
    assert 0 < exact < 1
    assert mc == pytest.approx(exact, rel=0.1)
    # zero solution: both proxies are exactly one
    z = SparseSpectrum(2)
    assert proxy_error_exact_adr(data, z) == 1.0
    assert proxy_error_mc_adr(funcs[0], funcs[1:3], funcs[3], funcs[4], z, 50, rng) == pytest.approx(1.0)


def test_reference_errors_examples():
    u = SparseSpectrum(2, {(1, 0): 1.0, (-1, 0): 1.0, (2, 3): 0.5j})
    assert reference_errors(u, u) == (0.0, 0.0)
    l2, h1 = reference_errors(u * 2, u)
    assert l2 == pytest.approx(1.0) and h1 == pytest.approx(1.0)
    with pytest.raises(ValueError):
        reference_errors(u, SparseSpectrum(2))
    with pytest.raises(DimensionMismatchError):
        reference_errors(u, SparseSpectrum(1, {(1,): 1}))


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 200))
def test_single_mode_h1_over_l2_ratio(n):
    # difference only at k = (n,), reference a unit mean-free mode at (1,)
    ref = SparseSpectrum(1, {(1,): 1.0})
    u = SparseSpectrum(1, {(1,): 1.0, (n,): 1e-3}) if n != 1 else ref * 1.001
    l2, h1 = reference_errors(u, ref)
    w = lambda m: np.sqrt(1 + FOUR_PI_SQ * m * m)
    assert h1 / l2 == pytest.approx(w(n) / w(1), rel=1e-10)
