import math

import pytest
from hypothesis import given, strategies as st

from qpcascade.design import (
    BacksideCircuit,
    backside_estimate,
    backside_q_estimate,
    participation_ratio,
    suppression_factor,
    trap_estimates,
)
from qpcascade.errors import ConfigError, DomainError
from qpcascade.markers import UNBOUNDED


def test_participation_for_six_micron_layer():
    assert participation_ratio(0.1, 6.0) == pytest.approx(0.01, rel=1e-12)
    assert suppression_factor(0.1, 6.0) == pytest.approx(100.0, rel=1e-12)
    assert suppression_factor(0.1, 0.0) == 1.0
    assert math.isinf(suppression_factor(0.0, 1.0))


@given(st.floats(1e-3, 10.0), st.floats(0.0, 100.0))
def test_suppression_is_inverse_participation(ts, tn):
    assert suppression_factor(ts, tn) * participation_ratio(ts, tn) == pytest.approx(1.0, rel=1e-12)


@given(st.floats(1e-3, 10.0), st.floats(0.0, 50.0), st.floats(0.0, 50.0))
def test_participation_decreases_with_normal_thickness(ts, a, b):
    lo, hi = sorted((a, b))
    assert participation_ratio(ts, hi) <= participation_ratio(ts, lo)


def test_participation_domain():
    with pytest.raises(DomainError):
        participation_ratio(-0.1, 1.0)
    with pytest.raises(DomainError):
        participation_ratio(0.1, 1.0, constant=0.0)


def test_backside_q_oracle():
    q = backside_q_estimate(BacksideCircuit())
    oracle = 25.0 / (2 * math.pi * 5e9 * 6.0 * 100e-15)
    assert q == pytest.approx(oracle, rel=1e-12)
    assert q == pytest.approx(1326.3, rel=1e-4)
    assert backside_q_estimate(BacksideCircuit(r_eff_ohm=0.01)) == pytest.approx(7.96e5, rel=1e-3)


def test_backside_orders_of_magnitude():
    q6 = backside_q_estimate(BacksideCircuit())
    assert 1e2 < q6 < 1e4
    q_cu = backside_q_estimate(BacksideCircuit(r_eff_ohm=0.01))
    assert q_cu / q6 == pytest.approx(600.0)


def test_backside_lossless_and_inductor():
    assert backside_q_estimate(BacksideCircuit(r_eff_ohm=0.0)) is UNBOUNDED
    est = backside_estimate(BacksideCircuit())
    assert est.inductor_impedance_ohm == pytest.approx(9.42, rel=1e-3)


@given(st.floats(1e-4, 1e3))
def test_backside_q_inverse_in_resistance(r):
    a = backside_q_estimate(BacksideCircuit(r_eff_ohm=r))
    b = backside_q_estimate(BacksideCircuit(r_eff_ohm=2 * r))
    assert a == pytest.approx(2 * b, rel=1e-12)


@pytest.mark.parametrize("kw", [{"coupling_fraction": 1.0}, {"r_eff_ohm": -1.0}, {"qubit_c_fF": 0.0}, {"series_l_nH": -1}])
def test_backside_validation(kw):
    with pytest.raises(ConfigError):
        BacksideCircuit(**kw)


def test_trap_table_model():
    t = trap_estimates()
    assert t.scatter_time_us == pytest.approx(1.7, rel=1e-12)
    assert t.diffusion_constant_um2_per_ns == pytest.approx(2030 * 0.1 / 3)
    assert t.diffusion_length_um == pytest.approx(math.sqrt(2030 * 0.1 / 3 * 1700), rel=1e-12)


def test_trap_fit_model():
    t = trap_estimates(model="fit")
    gap = 1.76 * 0.5
    assert t.scatter_time_us == pytest.approx(440 * gap**3 / 1.8 * 1e-3, rel=1e-3)
    assert t.scatter_time_us == pytest.approx(0.1666, rel=1e-3)


@given(st.floats(0.05, 20.0))
def test_trap_time_cubic_in_offset(d):
    assert trap_estimates(energy_offset_K=d).scatter_time_us == pytest.approx(
        8 * trap_estimates(energy_offset_K=2 * d).scatter_time_us, rel=1e-12
    )


def test_trap_validation():
    with pytest.raises(DomainError):
        trap_estimates(energy_offset_K=0.0)
    with pytest.raises(ValueError):
        trap_estimates(model="guess")
