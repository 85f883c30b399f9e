"""Material constants, unit conversions and the BCS density of states.

Internal units throughout the package:

=========  ==========================
energy     Kelvin (E / k_B)
time       ns
length     µm
rate       1/ns
=========  ==========================

Velocities keep the units they are usually quoted in (electrons in mm/ns,
phonons in µm/ns) and are converted where they are used.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, UnknownMaterialError

#: 1 eV / k_B in Kelvin (CODATA 2018).
K_PER_EV = 11604.51812

#: BCS ratio Δ / k_B T_c.
BCS_RATIO = 1.76

#: Relative floor on ε − Δ used to regularize the 1/√ singularity of ρ(ε).
DOS_FLOOR = 1e-9


@dataclass(frozen=True)
class MaterialParams:
    """Physical constants of one metal film.

    ``c_p_coeff`` and ``c_e_coeff`` are the heat-capacity integrals
    ``U_p = c_p T⁴/4`` and ``U_e = c_e T²/2`` in units of 1e-9 nJ/µm³.
    Normal metals have ``gap_K == 0`` and carry aluminum's Kaplan
    normalization (``tc_K``, ``tau0_ns``, ``tau0ph_ns``) so the gapless
    Kaplan formulas can still be evaluated for them.
    """

    name: str
    gap_K: float
    tc_K: float
    tau0_ns: float
    tau0ph_ns: float
    n_cp_per_um3: float
    v_e_mm_per_ns: float
    v_p_um_per_ns: float
    sigma_ep_nW_per_um3K5: float
    c_p_coeff: float
    c_e_coeff: float

    def __post_init__(self):
        if self.gap_K < 0:
            raise DomainError(f"{self.name}: gap_K must be >= 0, got {self.gap_K}")
        for field in dataclasses.fields(self):
            if field.name in ("name", "gap_K"):
                continue
            value = getattr(self, field.name)
            if not value > 0:
                raise DomainError(f"{self.name}: {field.name} must be > 0, got {value}")

    @property
    def is_superconductor(self) -> bool:
        return self.gap_K > 0

    @property
    def v_e_um_per_ns(self) -> float:
        return 1e3 * self.v_e_mm_per_ns

    def replace(self, **changes) -> "MaterialParams":
        """Return a copy with some fields overridden.

        Changing ``tc_K`` of a superconductor without also giving ``gap_K``
        rescales the gap by the BCS ratio.
        """
        if "tc_K" in changes and "gap_K" not in changes and self.is_superconductor:
            changes["gap_K"] = BCS_RATIO * changes["tc_K"]
        return dataclasses.replace(self, **changes)


def _superconductor(name, tc_K, **kw):
    return MaterialParams(name=name, gap_K=BCS_RATIO * tc_K, tc_K=tc_K, **kw)


# Shared aluminum numbers: Kaplan times, Cooper-pair density, velocities,
# and the normal-state heat capacities and coupling of Table-2 aluminum.
_AL_COMMON = dict(
    tau0_ns=440.0,
    tau0ph_ns=0.24,
    n_cp_per_um3=2.8e6,
    v_e_mm_per_ns=2.03,
    v_p_um_per_ns=6.4,
    sigma_ep_nW_per_um3K5=0.2,
    c_p_coeff=2.5,
    c_e_coeff=140.0,
)

BUILTIN_MATERIALS: dict[str, MaterialParams] = {
    "Al": _superconductor("Al", 1.2, **_AL_COMMON),
    "n-Al": MaterialParams(name="n-Al", gap_K=0.0, tc_K=1.2, **_AL_COMMON),
    "Cu": MaterialParams(
        name="Cu",
        gap_K=0.0,
        tc_K=1.2,
        tau0_ns=440.0,
        tau0ph_ns=0.24,
        n_cp_per_um3=2.8e6,
        v_e_mm_per_ns=1.57,
        v_p_um_per_ns=4.8,
        sigma_ep_nW_per_um3K5=2.0,
        c_p_coeff=6.6,
        c_e_coeff=97.0,
    ),
    # Only "slightly higher" than Al is known; 1.25 K is a placeholder.
    "AlSi-wirebond": _superconductor("AlSi-wirebond", 1.25, **_AL_COMMON),
    # Low-gap trap: aluminum kinetics with a 0.5 K transition.
    "trap-0.5K": _superconductor("trap-0.5K", 0.5, **_AL_COMMON),
}


def builtin_material(name: str) -> MaterialParams:
    """Look up one of the built-in materials by name."""
    try:
        return BUILTIN_MATERIALS[name]
    except KeyError:
        known = ", ".join(sorted(BUILTIN_MATERIALS))
        raise UnknownMaterialError(f"unknown material {name!r} (known: {known})") from None


def bcs_dos(eps_K, gap_K, floor=DOS_FLOOR):
    """Normalized BCS density of states ρ(ε) = ε / √(ε² − Δ²).

    Energies closer to the gap than ``gap_K * floor`` are evaluated at
    that distance, so the result stays finite. Accepts scalars or arrays.
    """
    eps = np.asarray(eps_K, dtype=float)
    if gap_K <= 0:
        raise DomainError(f"gap must be positive, got {gap_K}")
    if np.any(eps <= gap_K):
        raise DomainError(f"ε must exceed the gap Δ={gap_K} K")
    eps = np.maximum(eps, gap_K * (1.0 + floor))
    out = eps / np.sqrt((eps - gap_K) * (eps + gap_K))
    return float(out) if out.ndim == 0 else out


def kelvin_from_ev(e_eV):
    if np.any(np.asarray(e_eV) < 0):
        raise DomainError("energy must be non-negative")
    return e_eV * K_PER_EV


def ev_from_kelvin(e_K):
    if np.any(np.asarray(e_K) < 0):
        raise DomainError("energy must be non-negative")
    return e_K / K_PER_EV


def kelvin_from_mev(e_MeV):
    return kelvin_from_ev(e_MeV * 1e6)
