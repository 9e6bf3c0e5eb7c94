import math

import numpy as np
import pytest

from sparse_spectral.galerkin import ellipticity_check
from sparse_spectral.oracle import dense_fourier_coeffs
from sparse_spectral.spectra import evaluate_trig_poly, is_conjugate_symmetric
from sparse_spectral.testdata import (ADR_COUNTS, PRESETS, adr_problem, daubechies_1d,
                                      gaussian_series_problem, gaussian_series_spectrum,
                                      high_sparsity_diffusion, make_problem,
                                      periodic_gaussian_1d, periodized_gaussian,
                                      sparse_diffusion_problem)


def test_daubechies_values():
    a, f = daubechies_1d()
    assert a((0.0,)) == pytest.approx(0.1 * math.exp(0.8), rel=1e-12)
    assert a((0.0,)) == pytest.approx(0.22255, abs=1e-5)
    x = (np.arange(2**15) / 2**15)[:, None]
    assert abs(np.mean(f(x))) < 1e-12
    grid = np.linspace(0, 1, 10_000, endpoint=False)[:, None]
    assert np.all(a(grid) > 0)


def test_daubechies_gradient_matches_difference_quotient():
    a, f = daubechies_1d()
    x = np.random.default_rng(0).random((20, 1))
    h = 1e-7
    for g in (a, f):
        fd = (g(x + h) - g(x - h)) / (2 * h)
        np.testing.assert_allclose(g.gradient(x)[:, 0], fd, rtol=1e-5, atol=1e-5)


def test_sparse_diffusion_problem():
    rng = np.random.default_rng(4)
    a_hat, f_hat = sparse_diffusion_problem(5, rng)
    assert a_hat[(0,) * 5] == 4 and len(a_hat) == 3
    assert ellipticity_check(a_hat)[0]
    assert is_conjugate_symmetric(f_hat, 0) and (0,) * 5 not in f_hat
    (k_f,) = [k for k, v in f_hat.items() if v.imag < 0]
    x = rng.random((100, 5))
    np.testing.assert_allclose(evaluate_trig_poly(f_hat, x),
                               np.sin(2 * np.pi * x @ np.array(k_f, float)), atol=1e-12)
    assert all(-499 <= c <= 499 for k in a_hat for c in k)


def test_sparse_diffusion_fixed_amplitude_across_dims():
    vals = []
    for d in (1, 4, 16):
        a_hat, _ = sparse_diffusion_problem(d, np.random.default_rng(0), c_a=0.6)
        vals.append(sorted(abs(v) for k, v in a_hat.items() if any(k)))
    assert vals[0] == vals[1] == vals[2] == [0.3, 0.3]


def test_high_sparsity_diffusion():
    a_hat, f_hat = high_sparsity_diffusion(8, np.random.default_rng(2))
    assert len(a_hat) == 51
    zero = (0,) * 8
    assert a_hat[zero].real >= 4
    ok, margin = ellipticity_check(a_hat)
    assert ok and margin > 0
    x = np.random.default_rng(3).random((2000, 8))
    assert np.mean(evaluate_trig_poly(a_hat, x)).real == pytest.approx(a_hat[zero].real, rel=0.05)


def test_generators_are_deterministic():
    for gen in (sparse_diffusion_problem, high_sparsity_diffusion):
        assert gen(3, np.random.default_rng(9)) == gen(3, np.random.default_rng(9))
    assert adr_problem(np.random.default_rng(1)) == adr_problem(np.random.default_rng(1))


def test_periodic_gaussian_properties():
    g = periodic_gaussian_1d(1.3)
    assert g((0.3,)) == pytest.approx(g((1.3 % 1,)), abs=1e-12)
    x = np.linspace(0, 1, 1001)[:, None]
    assert np.all(g(x) > 0)
    # Fourier coefficients exp(-r^2 k^2 / 2)
    c = dense_fourier_coeffs(g, 1, 64)
    for k in range(4):
        assert c[(k,)].real == pytest.approx(math.exp(-1.3**2 * k * k / 2), abs=1e-12)


def test_periodized_gaussian_modulation():
    r, k = 1.21, (3, -2)
    g = periodized_gaussian(r, k)
    coeffs = dense_fourier_coeffs(g, 2, 32)
    peak = max(coeffs.items(), key=lambda kv: abs(kv[1]))[0]
    assert peak == k
    x = np.random.default_rng(0).random((5, 2))
    h = 1e-6
    fd = (g(x + [h, 0]) - g(x - [h, 0])) / (2 * h)
    np.testing.assert_allclose(g.gradient(x)[:, 0], fd, rtol=1e-6)


def test_gaussian_series_bumps_at_modulations():
    prob = gaussian_series_problem(2, 2, 1.1**2, (-10, 10), 10, np.random.default_rng(7))
    coeffs = dense_fourier_coeffs(prob.a, 2, 64)
    zero = (0, 0)
    assert coeffs[zero].real == pytest.approx(
        prob.c0 + sum(c * math.exp(-(1.21**2) * sum(x * x for x in k) / 2) for k, c in prob.terms),
        abs=1e-10)
    # neighbours of a bump keep exp(-r^2/2) of its height, so only the peak is checked
    peak = max((kv for kv in coeffs.items() if kv[0] != zero), key=lambda kv: abs(kv[1]))[0]
    centres = {k for k, _ in prob.terms} | {tuple(-c for c in k) for k, _ in prob.terms}
    assert peak in centres
    truncated = gaussian_series_spectrum(prob.c0, prob.terms, prob.r, 2)
    assert max(abs(coeffs[k] - v) for k, v in truncated.items()) < 1e-10


def test_gaussian_series_positive_and_degenerate():
    prob = gaussian_series_problem(2, 2, 1.21, (-24, 24), 10, np.random.default_rng(1))
    x = np.random.default_rng(2).random((10_000, 2))
    assert prob.a(x).min() > 0
    flat = gaussian_series_problem(3, 0, 1.0, (-5, 5), 10, np.random.default_rng(1))
    np.testing.assert_allclose(flat.a(x[:10].repeat(2, axis=1)[:, :3]), flat.c0)


def test_adr_problem_structure():
    data = adr_problem(np.random.default_rng(0))
    zero = (0, 0, 0)
    assert data.dim == 3 and len(data.b_hats) == 3
    assert data.a_hat[zero].real >= 4 and data.c_hat[zero].real >= 4
    assert zero not in data.f_hat
    assert ADR_COUNTS.operator_terms(3) == 44
    assert ADR_COUNTS.f == 5
    # generic draws: every term contributes a distinct +-k pair
    assert len(data.a_hat) <= 2 * 4 + 1
    for s in (*data.b_hats, data.c_hat, data.a_hat, data.f_hat):
        assert is_conjugate_symmetric(s, 1e-15)
        assert all(-49 <= c <= 49 for k in s for c in k)


def test_presets_build():
    rng = np.random.default_rng(0)
    for name in PRESETS:
        d = 1 if name == "daubechies-1d" else 3 if name == "adr" else 2
        prob = make_problem(name, d, rng)
        assert prob.d == d and prob.is_adr == (name == "adr")
    with pytest.raises(KeyError):
        make_problem("nope", 1, rng)
