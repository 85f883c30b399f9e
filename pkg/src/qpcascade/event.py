"""Timeline of a radiation event on a qubit chip.

Deposited energy becomes quasiparticles (via the down-conversion
efficiency), the quasiparticle density sets the qubit Q and T₁, and the
density then relaxes by diffusion, recombination and phonon escape. The
timeline has five stages; stage durations and sizes are fixed reference
scales, while T₁ values are computed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Mapping, Optional, Sequence

from .design import suppression_factor, trap_estimates
from .errors import ConfigError, DomainError
from .markers import BASELINE, UNBOUNDED
from .materials import MaterialParams, builtin_material, kelvin_from_mev

#: Prefactor of 1/Q = c · n_qp/n_cp for a transmon near 5 GHz.
Q_DENSITY_COEFF = 1.2

#: Recombination law n_qp/n_cp = RECOMB_LAW_NS / (t + t₀).
RECOMB_LAW_NS = 400.0 / 43.6

DESIGNS = ("present", "improved")

MM2_TO_UM2 = 1e6


@dataclass(frozen=True)
class Wirebonds:
    count: int = 300
    wire_radius_um: float = 12.0
    wire_length_mm: float = 2.0
    mean_free_path_um: float = 25.0  # the wire diameter

    def __post_init__(self):
        if self.count < 1 or int(self.count) != self.count:
            raise ConfigError(f"wirebond count must be a positive integer, got {self.count}")
        for name in ("wire_radius_um", "wire_length_mm", "mean_free_path_um"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"wirebond {name} must be positive")


@dataclass(frozen=True)
class ChipGeometry:
    chip_area_mm2: float = 100.0
    substrate_thickness_mm: float = 0.4
    film_thickness_um: float = 0.1
    normal_thickness_um: float = 0.0
    hotspot_area_mm2: float = 10.0
    wirebonds: Wirebonds = field(default_factory=Wirebonds)

    def __post_init__(self):
        for name in ("chip_area_mm2", "substrate_thickness_mm", "film_thickness_um", "hotspot_area_mm2"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise ConfigError(f"{name} must be positive, got {value}")
        if self.normal_thickness_um < 0:
            raise ConfigError("normal_thickness_um must be non-negative")
        if self.hotspot_area_mm2 > self.chip_area_mm2:
            raise ConfigError("hotspot area exceeds chip area")

    @property
    def substrate_volume_um3(self) -> float:
        return self.chip_area_mm2 * MM2_TO_UM2 * self.substrate_thickness_mm * 1e3

    @classmethod
    def improved(cls, **kw) -> "ChipGeometry":
        """Present chip plus a 6 µm normal-metal layer."""
        kw.setdefault("normal_thickness_um", 6.0)
        return cls(**kw)


@dataclass(frozen=True)
class EventConfig:
    deposit_energy_MeV: float = 0.2
    qubit_frequency_GHz: float = 5.0
    design: str = "present"
    conversion_efficiency: float = 0.57
    #: Density suppression assumed for the improved design when the
    #: geometry has no normal layer to compute it from.
    improved_suppression: float = 100.0
    trap_offset_K: float = 1.0

    def __post_init__(self):
        if not (self.deposit_energy_MeV >= 0 and math.isfinite(self.deposit_energy_MeV)):
            raise ConfigError(f"deposit energy must be non-negative, got {self.deposit_energy_MeV}")
        if not self.qubit_frequency_GHz > 0:
            raise ConfigError("qubit frequency must be positive")
        if self.design not in DESIGNS:
            raise ConfigError(f"design must be one of {DESIGNS}, got {self.design!r}")
        if not 0.0 <= self.conversion_efficiency <= 1.0:
            raise ConfigError(f"conversion efficiency must lie in [0, 1], got {self.conversion_efficiency}")
        if not self.improved_suppression >= 1.0:
            raise ConfigError("improved_suppression must be at least 1")
        if not self.trap_offset_K > 0:
            raise ConfigError("trap_offset_K must be positive")


# --- elementary relations ---------------------------------------------------


def qp_count(energy_MeV: float, efficiency: float, gap_K: float) -> float:
    """Quasiparticles from a deposit: E·efficiency/Δ."""
    if energy_MeV < 0 or not 0 <= efficiency <= 1 or gap_K <= 0:
        raise DomainError("need energy >= 0, efficiency in [0, 1] and a positive gap")
    return kelvin_from_mev(energy_MeV) * efficiency / gap_K


def qp_density_ratio(n_qp: float, area_mm2: float, thickness_um: float, n_cp: float) -> float:
    """n_qp / n_cp for quasiparticles spread uniformly over a film."""
    if n_qp < 0:
        raise DomainError("quasiparticle number must be non-negative")
    if not (area_mm2 > 0 and thickness_um > 0 and n_cp > 0):
        raise DomainError("area, thickness and Cooper-pair density must be positive")
    return n_qp / (area_mm2 * MM2_TO_UM2 * thickness_um) / n_cp


def qubit_q_and_t1(n_ratio: float, f_GHz: float = 5.0):
    """(Q, T₁ in µs) from 1/Q = 1.2 n_qp/n_cp and T₁ = Q/ω.

    A zero density gives ``(UNBOUNDED, UNBOUNDED)``.
    """
    if n_ratio < 0 or not math.isfinite(n_ratio):
        raise DomainError(f"density ratio must be non-negative, got {n_ratio}")
    if not f_GHz > 0:
        raise DomainError("frequency must be positive")
    if n_ratio == 0:
        return UNBOUNDED, UNBOUNDED
    q = 1.0 / (Q_DENSITY_COEFF * n_ratio)
    t1_ns = q / (2.0 * math.pi * f_GHz)
    return q, t1_ns * 1e-3


def velocity_factor(energy_offset_K: float, gap_K: float) -> float:
    """Group velocity of a quasiparticle relative to v_e: √(1 - (Δ/E)²)."""
    if energy_offset_K < 0 or gap_K <= 0:
        raise DomainError("offset must be non-negative and gap positive")
    return math.sqrt(1.0 - (gap_K / (gap_K + energy_offset_K)) ** 2)


def qp_diffusion_radius(
    t_us: float,
    v_e_mm_per_ns: float = 2.03,
    thickness_um: float = 0.1,
    energy_offset_K: Optional[float] = None,
    gap_K: float = builtin_material("Al").gap_K,
) -> float:
    """Quasiparticle diffusion distance in mm, √(v_e t d) in a film of thickness d.

    With ``energy_offset_K`` the distance is reduced by the velocity factor
    √(1 - (Δ/E)²) at E = Δ + offset.
    """
    if t_us < 0:
        raise DomainError("time must be non-negative")
    if not (v_e_mm_per_ns > 0 and thickness_um > 0):
        raise DomainError("velocity and thickness must be positive")
    d_um = math.sqrt(v_e_mm_per_ns * 1e3 * t_us * 1e3 * thickness_um)
    if energy_offset_K is not None:
        d_um *= velocity_factor(energy_offset_K, gap_K)
    return d_um * 1e-3


def recombination_density(t_us: float, t0_us: float = 0.0) -> float:
    """n_qp/n_cp decaying as 1/(t + t₀) through pair recombination."""
    total_ns = (t_us + t0_us) * 1e3
    if not total_ns > 0:
        raise DomainError("t + t0 must be positive")
    return RECOMB_LAW_NS / total_ns


def recombination_ode_rhs(n_ratio: float, coeff_per_ns: float = 1.0 / RECOMB_LAW_NS) -> float:
    """d(n/n_cp)/dt in 1/ns for dn/dt = -k n²; the default k matches :func:`recombination_density`."""
    return -coeff_per_ns * n_ratio * n_ratio


def recombination_coefficient(mat: MaterialParams) -> float:
    """k = 2·22/τ₀ per ns: two quasiparticles are lost per recombination."""
    return 2.0 * 22.0 / mat.tau0_ns


def recombination_time_to(n_ratio: float) -> float:
    """t + t₀ in µs at which the recombination law reaches ``n_ratio``."""
    if not n_ratio > 0:
        raise DomainError("density ratio must be positive")
    return RECOMB_LAW_NS / n_ratio * 1e-3


def phonon_escape_rate(geom: ChipGeometry, v_p_um_per_ns: float = 6.4) -> float:
    """Rate in 1/ns of phonon escape through the wirebonds: (N_w A / V) v_p (ℓ / L)."""
    if not v_p_um_per_ns > 0:
        raise DomainError("phonon velocity must be positive")
    wb = geom.wirebonds
    area = math.pi * wb.wire_radius_um**2
    exit_probability = min(wb.mean_free_path_um / (wb.wire_length_mm * 1e3), 1.0)
    return wb.count * area / geom.substrate_volume_um3 * v_p_um_per_ns * exit_probability


# --- timeline ---------------------------------------------------------------


@dataclass(frozen=True)
class T1Value:
    """A T₁ entry: a number, a lower bound, the baseline, or no entry."""

    value_us: Optional[float]
    kind: str = "value"  # value | lower_bound | baseline | none | unbounded

    @classmethod
    def of(cls, t1, lower=False):
        if t1 is UNBOUNDED:
            return cls(None, "unbounded")
        return cls(float(t1), "lower_bound" if lower else "value")

    def text(self, fmt="{!r}") -> str:
        if self.kind in ("value", "lower_bound"):
            return fmt.format(self.value_us)
        if self.kind == "baseline":
            return str(BASELINE)
        if self.kind == "unbounded":
            return str(UNBOUNDED)
        return "n/a"

    @property
    def bound(self) -> str:
        return ">" if self.kind == "lower_bound" else ""

    def at_least(self) -> float:
        """Numeric lower bound used for ordering; baseline counts as infinite."""
        if self.kind in ("baseline", "unbounded"):
            return math.inf
        if self.kind == "none":
            return -math.inf
        return self.value_us


_BASELINE_T1 = T1Value(None, "baseline")
_NO_T1 = T1Value(None, "none")


@dataclass(frozen=True)
class Stage:
    index: int
    name: str
    t_start_us: float
    duration_us: float
    size_mm: object  # float, or the string "chip"
    t1: T1Value
    model_duration_us: Optional[float] = None
    density_ratio: Optional[float] = None
    note: str = ""

    @property
    def t1_us(self):
        return self.t1.value_us if self.t1.kind in ("value", "lower_bound") else self.t1.text()


@dataclass(frozen=True)
class EventTimeline:
    design: str
    deposit_energy_MeV: float
    n_qp: float
    density_ratio_chip: float
    density_ratio_hotspot: float
    q_chip: object
    t1_chip_us: object
    t1_hotspot_us: object
    suppression: float
    escape_time_us: float
    stages: Sequence[Stage]

    def rows(self):
        return [
            {
                "stage": s.name,
                "t_start_us": s.t_start_us,
                "duration_us": s.duration_us,
                "size_mm": s.size_mm,
                "t1_us": s.t1.text(),
                "t1_bound": s.t1.bound,
                "model_duration_us": "" if s.model_duration_us is None else s.model_duration_us,
                "density_ratio": "" if s.density_ratio is None else s.density_ratio,
            }
            for s in self.stages
        ]


STAGE_NAMES = ("fireball", "freeze-out", "qp diffusion", "recombination", "phonon escape")

#: Reference (duration µs, size) per stage and design.
STAGE_SCALES = {
    "present": ((0.01, 1.0), (0.3, 3.0), (100.0, 6.0), (1000.0, "chip"), (4000.0, "chip")),
    "improved": ((0.01, 1.0), (0.3, 3.0), (1.7, 3.0), (1000.0, "chip"), (4000.0, "chip")),
}


def _materials(mats: Optional[Mapping[str, MaterialParams]]):
    out = {"superconductor": builtin_material("Al"), "trap": builtin_material("trap-0.5K")}
    if mats:
        unknown = set(mats) - set(out)
        if unknown:
            raise ConfigError(f"unknown material roles: {sorted(unknown)}")
        out.update(mats)
    if not out["superconductor"].is_superconductor:
        raise ConfigError("the qubit film must be a superconductor")
    return out


def design_suppression(cfg: EventConfig, geom: ChipGeometry) -> float:
    """Initial-density suppression of the improved design.

    From the participation ratio when the geometry has a normal layer,
    otherwise the configured factor.
    """
    if geom.normal_thickness_um > 0:
        return suppression_factor(geom.film_thickness_um, geom.normal_thickness_um)
    return cfg.improved_suppression


def simulate_event(
    cfg: EventConfig,
    geom: Optional[ChipGeometry] = None,
    mats: Optional[Mapping[str, MaterialParams]] = None,
) -> EventTimeline:
    """Five-stage timeline with T₁ estimates.

    Present design:
      2. density over the hotspot area;
      3. the hotspot density diluted over a region of (stage size)²;
      4. quasiparticle number conserved by rebreaking, spread over the chip
         (a lower bound, since recombination continues);
      5. the recombination law evaluated at the start of the stage.

    Improved design:
      2. the present hotspot value times the density suppression;
      3. trap relaxation time as duration, T₁ bounded below by stage 2;
      4-5. baseline.
    """
    if geom is None:
        geom = ChipGeometry.improved() if cfg.design == "improved" else ChipGeometry()
    m = _materials(mats)
    sc = m["superconductor"]
    f = cfg.qubit_frequency_GHz

    n_qp = qp_count(cfg.deposit_energy_MeV, cfg.conversion_efficiency, sc.gap_K)
    ratio_chip = qp_density_ratio(n_qp, geom.chip_area_mm2, geom.film_thickness_um, sc.n_cp_per_um3)
    ratio_hot = qp_density_ratio(n_qp, geom.hotspot_area_mm2, geom.film_thickness_um, sc.n_cp_per_um3)
    q_chip, t1_chip = qubit_q_and_t1(ratio_chip, f)
    _, t1_hot = qubit_q_and_t1(ratio_hot, f)
    escape_us = 1e-3 / phonon_escape_rate(geom, sc.v_p_um_per_ns)
    suppression = design_suppression(cfg, geom) if cfg.design == "improved" else 1.0

    scales = STAGE_SCALES[cfg.design]
    empty = n_qp == 0
    t1s, densities, model_durations = [], [], []

    # 1. fireball: quasiparticles not yet formed
    t1s.append(_BASELINE_T1 if empty else _NO_T1)
    densities.append(None)
    model_durations.append(None)

    if cfg.design == "present":
        region_mm2 = min(scales[2][1] ** 2, geom.chip_area_mm2)
        ratio_diffused = ratio_hot * geom.hotspot_area_mm2 / max(region_mm2, geom.hotspot_area_mm2)
        t_stage5 = sum(d for d, _ in scales[:4])
        ratio_late = min(recombination_density(t_stage5), ratio_chip)
        for ratio, lower in ((ratio_hot, False), (ratio_diffused, False), (ratio_chip, True), (ratio_late, False)):
            densities.append(ratio)
            t1s.append(_BASELINE_T1 if empty else T1Value.of(qubit_q_and_t1(ratio, f)[1], lower))
        model_durations += [None, recombination_time_to(ratio_hot) if not empty else None, None, escape_us]
    else:
        ratio_frozen = ratio_hot / suppression
        trap = trap_estimates(
            tc_trap_K=m["trap"].tc_K,
            energy_offset_K=cfg.trap_offset_K,
            v_e_mm_per_ns=m["trap"].v_e_mm_per_ns,
            mean_free_path_um=geom.film_thickness_um,
        )
        if empty:
            t1s += [_BASELINE_T1] * 4
        else:
            t1_frozen = qubit_q_and_t1(ratio_frozen, f)[1]
            t1s += [T1Value.of(t1_frozen), T1Value.of(t1_frozen, lower=True), _BASELINE_T1, _BASELINE_T1]
        densities += [ratio_frozen, None, None, None]
        model_durations += [None, trap.scatter_time_us, None, escape_us]

    stages = []
    t = 0.0
    for i, ((duration, size), t1, ratio, model_d) in enumerate(zip(scales, t1s, densities, model_durations)):
        stages.append(
            Stage(
                index=i + 1,
                name=STAGE_NAMES[i],
                t_start_us=t,
                duration_us=duration,
                size_mm=size,
                t1=t1,
                model_duration_us=model_d,
                density_ratio=ratio,
            )
        )
        t += duration

    return EventTimeline(
        design=cfg.design,
        deposit_energy_MeV=cfg.deposit_energy_MeV,
        n_qp=n_qp,
        density_ratio_chip=ratio_chip,
        density_ratio_hotspot=ratio_hot,
        q_chip=q_chip,
        t1_chip_us=t1_chip,
        t1_hotspot_us=t1_hot,
        suppression=suppression,
        escape_time_us=escape_us,
        stages=tuple(stages),
    )


def with_geometry_overrides(geom: ChipGeometry, **changes) -> ChipGeometry:
    """Copy of ``geom`` with flat keys; ``wirebonds_<field>`` addresses the wirebond block."""
    wb = {k[len("wirebonds_"):]: v for k, v in changes.items() if k.startswith("wirebonds_")}
    top = {k: v for k, v in changes.items() if not k.startswith("wirebonds_")}
    if wb:
        top["wirebonds"] = replace(geom.wirebonds, **wb)
    return replace(geom, **top)
