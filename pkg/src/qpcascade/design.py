"""Estimators for a radiation-hardened qubit chip.

Three independent estimates: how thick a normal-metal layer must be to
starve the superconductor of pair-breaking phonons, how strongly a
metallized backside damps the qubit, and how fast quasiparticles relax in
a low-gap trap.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .cascade.engine import PARTICIPATION_CONSTANT
from .cascade.engine import participation_ratio as _participation_ratio
from .errors import ConfigError, DomainError
from .markers import UNBOUNDED
from .materials import builtin_material
from .rates import ROUNDED_QP_SCATTER_NS, qp_scatter_rate_fit

__all__ = [
    "BacksideCircuit",
    "BacksideEstimate",
    "TrapEstimate",
    "backside_estimate",
    "backside_q_estimate",
    "participation_ratio",
    "suppression_factor",
    "trap_estimates",
]


def participation_ratio(ts_um: float, tn_um: float, constant: float = PARTICIPATION_CONSTANT) -> float:
    """Share of phonon down-conversion in the superconductor, t_s / (t_s + c·t_n)."""
    if not constant > 0:
        raise DomainError(f"constant must be positive, got {constant}")
    return _participation_ratio(ts_um, tn_um, constant)


def suppression_factor(ts_um: float, tn_um: float, constant: float = PARTICIPATION_CONSTANT) -> float:
    """Reduction of the initial quasiparticle density by a normal layer.

    The normalized quasiparticle yield is linear in the participation
    ratio, so the density drops by its inverse.
    """
    participation_ratio(ts_um, tn_um, constant)  # validates
    if ts_um == 0:
        return math.inf
    return (ts_um + constant * tn_um) / ts_um


@dataclass(frozen=True)
class BacksideCircuit:
    """Qubit capacitively coupled to a lossy backside transmission line."""

    r_eff_ohm: float = 6.0
    qubit_c_fF: float = 100.0
    coupling_fraction: float = 0.2
    f_GHz: float = 5.0
    series_l_nH: float = 0.3

    def __post_init__(self):
        if not 0.0 < self.coupling_fraction < 1.0:
            raise ConfigError(f"coupling_fraction must lie in (0, 1), got {self.coupling_fraction}")
        if self.r_eff_ohm < 0:
            raise ConfigError("r_eff_ohm must be non-negative")
        for name in ("qubit_c_fF", "f_GHz"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if self.series_l_nH < 0:
            raise ConfigError("series_l_nH must be non-negative")

    @property
    def omega_per_s(self) -> float:
        return 2.0 * math.pi * self.f_GHz * 1e9


@dataclass(frozen=True)
class BacksideEstimate:
    q: object  # float, or UNBOUNDED for a lossless line
    inductor_impedance_ohm: float


def backside_q_estimate(c: BacksideCircuit) -> object:
    """Order-of-magnitude Q of a qubit damped through a coupling capacitor.

    Q = (C_q/C_c)² / (ω R C_q). The series inductance of the coupling path
    is left out; see :func:`backside_estimate` for its impedance.
    """
    if c.r_eff_ohm == 0:
        return UNBOUNDED
    rc = c.r_eff_ohm * c.qubit_c_fF * 1e-15
    return (1.0 / c.coupling_fraction) ** 2 / (c.omega_per_s * rc)


def backside_estimate(c: BacksideCircuit) -> BacksideEstimate:
    """Q together with the ωL impedance of the series inductor."""
    return BacksideEstimate(backside_q_estimate(c), c.omega_per_s * c.series_l_nH * 1e-9)


@dataclass(frozen=True)
class TrapEstimate:
    scatter_time_us: float
    diffusion_length_um: float
    diffusion_constant_um2_per_ns: float


def trap_estimates(
    tc_trap_K: float = 0.5,
    energy_offset_K: float = 1.0,
    v_e_mm_per_ns: float = 2.03,
    mean_free_path_um: float = 0.1,
    model: str = "table",
) -> TrapEstimate:
    """Relaxation time and diffusion length of a quasiparticle in a trap.

    ``model="table"`` uses the rounded aluminum rate (1/1700 ns)(δ/K)³ with
    δ the energy above the trap gap, independent of the trap gap.
    ``model="fit"`` evaluates the cubic fit with a trap material whose
    critical temperature is ``tc_trap_K``. Diffusion uses D = v_e ℓ / 3.
    """
    for name, value in (
        ("tc_trap_K", tc_trap_K),
        ("energy_offset_K", energy_offset_K),
        ("v_e_mm_per_ns", v_e_mm_per_ns),
        ("mean_free_path_um", mean_free_path_um),
    ):
        if not (value > 0 and math.isfinite(value)):
            raise DomainError(f"{name} must be positive, got {value}")
    if model == "table":
        tau_ns = ROUNDED_QP_SCATTER_NS / energy_offset_K**3
    elif model == "fit":
        trap = builtin_material("trap-0.5K").replace(tc_K=tc_trap_K)
        tau_ns = qp_scatter_rate_fit(trap.gap_K + energy_offset_K, trap).time_ns
    else:
        raise ValueError(f"unknown model {model!r}")
    d = v_e_mm_per_ns * 1e3 * mean_free_path_um / 3.0
    return TrapEstimate(tau_ns * 1e-3, math.sqrt(d * tau_ns), d)
