import numpy as np
import pytest

from sparse_spectral.spectra import SparseSpectrum


def random_spectrum(rng, d, n, box=5, real=False):
    """Random spectrum with ``n`` draws in ``[-box, box]^d``; conjugate-symmetric if ``real``."""
    entries = {}
    for _ in range(n):
        k = tuple(int(v) for v in rng.integers(-box, box + 1, size=d))
        v = complex(rng.normal(), rng.normal())
        entries[k] = entries.get(k, 0) + v
        if real:
            mk = tuple(-c for c in k)
            entries[mk] = entries.get(mk, 0) + np.conj(v)
    return SparseSpectrum(d, entries)


def random_elliptic(rng, d, n_pairs, box=3, a0=4.0, scale=1.0):
    """Real, elliptic coefficient spectrum: ``a0`` plus ``n_pairs`` conjugate pairs."""
    entries = {(0,) * d: a0}
    budget = scale * a0 * 0.9
    for _ in range(n_pairs):
        while True:
            k = tuple(int(v) for v in rng.integers(-box, box + 1, size=d))
            if any(k):
                break
        v = complex(rng.uniform(-1, 1), rng.uniform(-1, 1))
        v *= budget / (2 * n_pairs * abs(v))
        mk = tuple(-c for c in k)
        entries[k] = entries.get(k, 0) + v
        entries[mk] = entries.get(mk, 0) + np.conj(v)
    return SparseSpectrum(d, entries)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def small_oracle_instance(seed, c_a=None):
    """d=2 diffusion with small frequencies so the K=32 dense solve is exact enough."""
    from sparse_spectral.testdata import _draw_freq, sine_forcing, sparse_diffusion_problem
    rng = np.random.default_rng(seed)
    a_hat, _ = sparse_diffusion_problem(2, rng, c_a=c_a, box=(-2, 2))
    f_hat = sine_forcing(_draw_freq(rng, 2, -3, 3))
    return a_hat, f_hat


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
