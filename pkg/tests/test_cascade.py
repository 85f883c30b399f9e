import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.random import Philox

from qpcascade.cascade import (
    AL_GAP_K,
    BLOCK_SIZE,
    CascadeConfig,
    efficiency_curve,
    normal_thickness_for,
    participation_ratio,
    participation_sweep,
    run_cascade,
    run_cascade_bilayer,
    run_trials,
)
from qpcascade.cascade import _backend
from qpcascade.cascade.rng import trial_stream
from qpcascade.errors import CascadeLimitError, ConfigError, DomainError

G = AL_GAP_K
HAVE_C = "cython" in _backend.available_kernels()


def cfg(**kw):
    kw.setdefault("trials", 2000)
    return CascadeConfig(**kw)


def test_subgap_phonon_makes_nothing():
    r = run_trials(1.5 * G, cfg(trials=10))
    assert r.n_qp_mean == 0
    assert r.energy_in_subgap_phonons_K == pytest.approx(1.5 * G)


def test_pair_just_above_two_gap():
    # Both quasiparticles sit below 3Δ and freeze at once.
    r = run_trials(2.5 * G, cfg(trials=200))
    assert np.all(r.per_trial_counts == 2)
    assert r.energy_in_qp_K == pytest.approx(2.5 * G)


def test_quasiparticle_count_is_even_without_normal_metal():
    r = run_trials(40 * G, cfg(trials=500))
    assert np.all(r.per_trial_counts % 2 == 0)


def test_normal_metal_only_makes_no_quasiparticles():
    r = run_trials(40 * G, cfg(trials=200, participation_s=0.0))
    assert r.n_qp_mean == 0
    _, sub, el = r.fractions()
    assert sub + el == pytest.approx(1.0, abs=1e-12)
    assert r.energy_in_electrons_K > 0


@settings(max_examples=25, deadline=None)
@given(
    st.floats(0.5, 300.0),
    st.floats(0.0, 1.0),
    st.sampled_from(["thickness", "participation"]),
    st.booleans(),
    st.integers(0, 2**40),
)
def test_energy_is_conserved(w, x, rule, rejoin, seed):
    c = cfg(trials=20, participation_s=x, medium_rule=rule, normal_phonons_rejoin=rejoin, seed=seed, workers=1)
    r = run_trials(w * G, c)
    assert r.conservation_residual < 1e-12
    assert sum(r.fractions()) == pytest.approx(1.0, abs=1e-12)
    per_trial = r.per_trial_energies_K.sum(axis=1)
    np.testing.assert_allclose(per_trial, w * G, rtol=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.floats(2.01, 300.0), st.integers(0, 2**40))
def test_counts_bounded_by_energy(w, seed):
    r = run_trials(w * G, cfg(trials=20, seed=seed, workers=1))
    assert np.all(r.per_trial_counts <= math.floor(w))
    assert np.all(r.per_trial_counts >= 2)


def test_single_trial_matches_ensemble_stream():
    c = cfg(trials=5)
    ens = run_trials(30 * G, c)
    for i in range(5):
        one = run_cascade(30 * G, c, trial_stream(c.seed, i))
        assert one.per_trial_counts[0] == ens.per_trial_counts[i]


def test_deterministic_across_workers():
    c = cfg(trials=3 * BLOCK_SIZE + 17)
    a = run_trials(60 * G, replace(c, workers=1))
    b = run_trials(60 * G, replace(c, workers=4))
    np.testing.assert_array_equal(a.per_trial_counts, b.per_trial_counts)
    np.testing.assert_array_equal(a.per_trial_energies_K, b.per_trial_energies_K)
    assert a.energy_in_qp_K == b.energy_in_qp_K


def test_seed_changes_results():
    a = run_trials(60 * G, cfg(seed=1))
    b = run_trials(60 * G, cfg(seed=2))
    assert not np.array_equal(a.per_trial_counts, b.per_trial_counts)


def test_trial_prefix_is_stable():
    a = run_trials(60 * G, cfg(trials=100))
    b = run_trials(60 * G, cfg(trials=1500))
    np.testing.assert_array_equal(a.per_trial_counts, b.per_trial_counts[:100])


@pytest.mark.skipif(not HAVE_C, reason="compiled kernel not built")
@pytest.mark.parametrize("x,rejoin", [(1.0, False), (0.4, False), (0.4, True)])
def test_backends_bit_identical(x, rejoin):
    c = cfg(trials=300, participation_s=x, normal_phonons_rejoin=rejoin)
    a = run_trials(80 * G, replace(c, kernel="cython"))
    b = run_trials(80 * G, replace(c, kernel="python"))
    assert a.backend == "cython" and b.backend == "python"
    np.testing.assert_array_equal(a.per_trial_counts, b.per_trial_counts)
    np.testing.assert_array_equal(a.per_trial_energies_K, b.per_trial_energies_K)


@pytest.mark.skipif(not HAVE_C, reason="compiled kernel not built")
def test_backends_identical_with_user_rng():
    c = cfg()
    a = run_cascade(200 * G, replace(c, kernel="cython"), np.random.default_rng(5))
    b = run_cascade(200 * G, replace(c, kernel="python"), np.random.default_rng(5))
    np.testing.assert_array_equal(a.per_trial_energies_K, b.per_trial_energies_K)


def test_efficiency_rises_from_threshold():
    curve = efficiency_curve([2.5, 4.0, 10.0, 40.0], cfg(trials=4000))
    values = [r.n_qp_normalized for r in curve]
    assert values[0] == pytest.approx(0.8)
    assert values[1] < values[2]
    assert 0.5 < values[3] < 0.7


def test_yield_decreases_with_normal_metal():
    res = participation_sweep(10 * G, [0.2, 0.5, 0.8, 1.0], cfg(trials=4000))
    y = [r.n_qp_normalized for r in res]
    assert y == sorted(y)
    assert res[0].participation == 0.2


def test_thickness_rule_probability():
    c = cfg(participation_s=0.5)
    assert c.event_probability == pytest.approx(1.65 / 2.65)
    assert replace(c, medium_rule="participation").event_probability == 0.5
    assert replace(c, participation_s=1.0).event_probability == 1.0


@given(st.floats(0.01, 10.0), st.floats(0.0, 10.0))
def test_thickness_rule_is_thickness_fraction(ts, tn):
    c = cfg().with_bilayer(ts, tn)
    assert c.event_probability == pytest.approx(ts / (ts + tn), rel=1e-12)


@given(st.floats(0.01, 1.0))
def test_normal_thickness_inverts_participation(x):
    tn = normal_thickness_for(x, 0.1)
    assert participation_ratio(0.1, tn) == pytest.approx(x, rel=1e-12)


def test_bilayer_limits():
    pure = run_trials(10 * G, cfg())
    thin = run_cascade_bilayer(10 * G, 0.1, 0.0, cfg())
    np.testing.assert_array_equal(pure.per_trial_counts, thin.per_trial_counts)
    one = run_cascade_bilayer(10 * G, 0.1, 1.0, cfg(), rng=3)
    assert one.trials == 1


def test_participation_ratio_values():
    assert participation_ratio(0.1, 6.0) == pytest.approx(0.1 / 10.0)
    with pytest.raises(DomainError):
        participation_ratio(0.0, 0.0)
    with pytest.raises(DomainError):
        normal_thickness_for(0.0, 0.1)


def test_thresholds_change_counts():
    low = run_trials(30 * G, cfg(qp_freeze_threshold_K=1.5 * G))
    high = run_trials(30 * G, cfg())
    assert low.n_qp_mean > high.n_qp_mean


def test_result_summary_row():
    r = run_trials(20 * G, cfg(trials=100))
    row = r.summary_row()
    assert row["trials"] == 100
    assert row["ep_over_gap"] == pytest.approx(20.0)
    assert row["n_qp_norm_stderr"] > 0
    assert row["e_qp_frac"] + row["e_subgap_frac"] + row["e_electron_frac"] == pytest.approx(1.0)


def test_iteration_cap_raises():
    kern = _backend.get_kernel("python")
    with pytest.raises(CascadeLimitError):
        kern.run_block([Philox(1)], 500.0, 1.0, 3.0, 2.0, False, 5)


@pytest.mark.skipif(not HAVE_C, reason="compiled kernel not built")
def test_iteration_cap_raises_compiled():
    kern = _backend.get_kernel("cython")
    with pytest.raises(CascadeLimitError):
        kern.run_block([Philox(1)], 500.0, 1.0, 3.0, 2.0, False, 5)


@pytest.mark.parametrize(
    "kw",
    [
        {"gap_K": 0.0},
        {"participation_s": 1.5},
        {"trials": 0},
        {"trials": 2.5},
        {"seed": -1},
        {"medium_rule": "volume"},
        {"workers": 0},
        {"qp_freeze_threshold_K": 1.0},
        {"electron_drop_threshold_K": -1.0},
        {"participation_constant": 0.0},
    ],
)
def test_config_validation(kw):
    with pytest.raises(ConfigError):
        CascadeConfig(**kw)


def test_bad_energy():
    with pytest.raises(DomainError):
        run_trials(-1.0, cfg())
    with pytest.raises(DomainError):
        efficiency_curve([], cfg())


def test_unknown_kernel():
    with pytest.raises(ValueError):
        run_trials(10 * G, cfg(kernel="fortran"))


@pytest.mark.parametrize("name", _backend.available_kernels())
def test_rekeyed_block_matches_fresh_streams(name):
    kern = _backend.get_kernel(name)
    args = (50.0, 0.7, 3.0, 2.0, True, 20_000)
    a = kern.run_seeded(11, 5, 25, *args)
    b = kern.run_block([trial_stream(11, i) for i in range(5, 25)], *args)
    for x, y in zip(a, b):
        np.testing.assert_array_equal(x, y)


@pytest.mark.parametrize("name", _backend.available_kernels())
def test_iteration_cap_raises_in_seeded_blocks(name):
    with pytest.raises(CascadeLimitError, match="trial 3"):
        _backend.get_kernel(name).run_seeded(1, 3, 6, 500.0, 1.0, 3.0, 2.0, False, 5)
