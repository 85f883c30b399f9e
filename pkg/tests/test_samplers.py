import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from qpcascade.cascade import (
    AL_GAP_K,
    sample_electron_emission,
    sample_electron_emission_energies,
    sample_pairbreak_energies,
    sample_pairbreak_split,
    sample_qp_emission,
    sample_qp_emission_energies,
)
from qpcascade.cascade import _backend
from qpcascade.errors import DomainError

G = AL_GAP_K
N = 1_000_000
# 99.9% KS critical value for n draws is about 1.95/sqrt(n); the grid CDFs
# add well under 1e-5.
KS_LIMIT = 1.95 / np.sqrt(N)


@pytest.mark.parametrize("w", [2.2, 4.0, 20.0])
def test_pairbreak_distribution_ks(w):
    s = sample_pairbreak_energies(w * G, G, N, np.random.default_rng(1)) / G
    assert oracles.ks_distance(s, oracles.pairbreak_cdf(w)) < KS_LIMIT


@pytest.mark.parametrize("w", [1.3, 5.0, 50.0])
def test_qp_emission_distribution_ks(w):
    s = sample_qp_emission_energies(w * G, G, N, np.random.default_rng(2)) / G
    assert oracles.ks_distance(s, oracles.qp_emission_cdf(w)) < KS_LIMIT


def test_ks_detects_a_wrong_distribution():
    s = sample_qp_emission_energies(5.0 * G, G, 100_000, np.random.default_rng(3)) / G
    assert oracles.ks_distance(s, oracles.qp_emission_cdf(5.5)) > 10 * KS_LIMIT


def test_pairbreak_support_and_symmetry():
    w = 6.0
    s = sample_pairbreak_energies(w * G, G, 200_000, np.random.default_rng(4)) / G
    assert s.min() >= 1.0 and s.max() <= w - 1.0
    assert s.mean() == pytest.approx(w / 2, abs=5e-3)
    assert np.median(s) == pytest.approx(w / 2, abs=2e-2)


def test_qp_emission_support():
    s = sample_qp_emission_energies(3.0 * G, G, 200_000, np.random.default_rng(5)) / G
    assert s.min() >= 1.0 and s.max() <= 3.0


def test_electron_emission_law():
    e = 30.0
    s = sample_electron_emission_energies(e, N, np.random.default_rng(6))
    assert s.min() >= 0.0 and s.max() <= e
    phonon = e - s  # phonon energy density ∝ Ω² on [0, E]
    assert phonon.mean() / e == pytest.approx(0.75, abs=1.5e-3)
    assert np.mean(phonon < 0.5 * e) == pytest.approx(0.125, abs=1.5e-3)
    assert s.mean() / e == pytest.approx(0.25, abs=1.5e-3)


@settings(max_examples=50, deadline=None)
@given(st.floats(2.0 + 1e-6, 1e4), st.integers(0, 2**32))
def test_pairbreak_split_conserves_energy(w, seed):
    a, b = sample_pairbreak_split(w * G, G, seed)
    assert a + b == pytest.approx(w * G, rel=1e-15)
    assert a >= G * (1 - 1e-12) and b >= G * (1 - 1e-9)


@settings(max_examples=50, deadline=None)
@given(st.floats(1.0 + 1e-6, 1e4), st.integers(0, 2**32))
def test_qp_emission_conserves_energy(w, seed):
    qp, ph = sample_qp_emission(w * G, G, seed)
    assert qp + ph == pytest.approx(w * G, rel=1e-15)
    assert ph >= 0 and qp >= G * (1 - 1e-12)


@settings(max_examples=50, deadline=None)
@given(st.floats(1e-3, 1e5), st.integers(0, 2**32))
def test_electron_emission_conserves_energy(e, seed):
    el, ph = sample_electron_emission(e, seed)
    assert el + ph == pytest.approx(e, rel=1e-15)
    assert 0 <= el <= e


def test_sampler_domains():
    rng = np.random.default_rng(0)
    with pytest.raises(DomainError):
        sample_pairbreak_split(2 * G, G, rng)
    with pytest.raises(DomainError):
        sample_qp_emission(G, G, rng)
    with pytest.raises(DomainError):
        sample_electron_emission(0.0, rng)
    with pytest.raises(DomainError):
        sample_pairbreak_energies(5.0, 0.0, 3, rng)


def test_samplers_deterministic_given_seed():
    a = sample_qp_emission_energies(7 * G, G, 1000, 42)
    b = sample_qp_emission_energies(7 * G, G, 1000, 42)
    np.testing.assert_array_equal(a, b)


@pytest.mark.skipif("cython" not in _backend.available_kernels(), reason="compiled kernel not built")
@pytest.mark.parametrize("kind,w", [(0, 7.0), (1, 7.0), (2, 7.0)])
def test_sampler_backends_bit_identical(kind, w):
    from numpy.random import Philox

    c = _backend.get_kernel("cython").sample_many(kind, w, 5000, Philox(9))
    p = _backend.get_kernel("python").sample_many(kind, w, 5000, Philox(9))
    np.testing.assert_array_equal(c, p)
