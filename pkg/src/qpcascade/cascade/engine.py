"""Monte Carlo down-conversion of a high-energy phonon into quasiparticles.

A phonon above 2Δ breaks a Cooper pair when it is in the superconductor
and excites two electrons when it is in a normal metal. Quasiparticles
emit phonons until they fall below the freeze threshold; electrons emit
phonons until they fall to the drop threshold. Subgap phonons escape.
Energies are handled internally in units of Δ.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Iterable, List, Optional, Sequence

import numpy as np

from ..errors import ConfigError, DomainError
from ..materials import builtin_material
from . import _backend
from .rng import DEFAULT_SEED, as_bit_generator, check_seed

AL_GAP_K = builtin_material("Al").gap_K

#: Effective-thickness weight of the normal layer in the participation ratio.
PARTICIPATION_CONSTANT = 1.65

#: Trials handed to a worker at a time. Fixed so that reductions are
#: performed in the same order whatever the worker count.
BLOCK_SIZE = 1024

MEDIUM_RULES = ("thickness", "participation")


@dataclass(frozen=True)
class Excitation:
    kind: str  # "phonon", "qp" or "electron"
    energy_K: float


@dataclass(frozen=True)
class CascadeConfig:
    """Knobs of a cascade run.

    ``participation_s`` is the superconductor participation ratio
    t_s / (t_s + c·t_n) with c = ``participation_constant``. How a phonon
    above 2Δ chooses its film is set by ``medium_rule``:

    * ``"thickness"``: superconductor with probability t_s / (t_s + t_n),
      the thickness fraction implied by the participation ratio;
    * ``"participation"``: superconductor with probability ``participation_s``.

    Phonons emitted by hot electrons stay in the normal metal unless
    ``normal_phonons_rejoin`` is set.
    """

    gap_K: float = AL_GAP_K
    participation_s: float = 1.0
    trials: int = 10_000
    seed: int = DEFAULT_SEED
    qp_freeze_threshold_K: Optional[float] = None  # default 3Δ
    electron_drop_threshold_K: Optional[float] = None  # default 2Δ
    medium_rule: str = "thickness"
    normal_phonons_rejoin: bool = False
    participation_constant: float = PARTICIPATION_CONSTANT
    workers: Optional[int] = None
    kernel: Optional[str] = None  # None: default backend

    def __post_init__(self):
        if not (self.gap_K > 0 and math.isfinite(self.gap_K)):
            raise ConfigError(f"gap_K must be positive, got {self.gap_K}")
        if not 0.0 <= self.participation_s <= 1.0:
            raise ConfigError(f"participation_s must lie in [0, 1], got {self.participation_s}")
        if int(self.trials) != self.trials or self.trials < 1:
            raise ConfigError(f"trials must be a positive integer, got {self.trials}")
        try:
            check_seed(self.seed)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if self.medium_rule not in MEDIUM_RULES:
            raise ConfigError(f"medium_rule must be one of {MEDIUM_RULES}, got {self.medium_rule!r}")
        if not self.participation_constant > 0:
            raise ConfigError("participation_constant must be positive")
        if self.workers is not None and self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")
        if self.freeze_K < self.gap_K:
            raise ConfigError("qp_freeze_threshold_K must be at least the gap")
        if self.drop_K < 0:
            raise ConfigError("electron_drop_threshold_K must be non-negative")

    @property
    def freeze_K(self) -> float:
        if self.qp_freeze_threshold_K is None:
            return 3.0 * self.gap_K
        return float(self.qp_freeze_threshold_K)

    @property
    def drop_K(self) -> float:
        if self.electron_drop_threshold_K is None:
            return 2.0 * self.gap_K
        return float(self.electron_drop_threshold_K)

    @property
    def event_probability(self) -> float:
        """Probability that a pair-breaking phonon lands in the superconductor."""
        x = self.participation_s
        if self.medium_rule == "participation" or x in (0.0, 1.0):
            return x
        c = self.participation_constant
        return c * x / (1.0 + (c - 1.0) * x)

    def with_bilayer(self, ts_um: float, tn_um: float) -> "CascadeConfig":
        return replace(self, participation_s=participation_ratio(ts_um, tn_um, self.participation_constant))


def participation_ratio(ts_um: float, tn_um: float, constant: float = PARTICIPATION_CONSTANT) -> float:
    """t_s / (t_s + c·t_n) for superconductor and normal film thicknesses."""
    if ts_um < 0 or tn_um < 0 or ts_um + tn_um <= 0:
        raise DomainError(f"film thicknesses must be non-negative and not both zero: {ts_um}, {tn_um}")
    return ts_um / (ts_um + constant * tn_um)


def normal_thickness_for(participation: float, ts_um: float, constant: float = PARTICIPATION_CONSTANT) -> float:
    """Normal film thickness giving the requested participation ratio."""
    if not 0.0 < participation <= 1.0:
        raise DomainError(f"participation must lie in (0, 1], got {participation}")
    return ts_um * (1.0 - participation) / (constant * participation)


@dataclass
class CascadeResult:
    """Outcome of one or more cascades started by a phonon of energy ``ep_K``.

    Energy totals are per-trial means in kelvin. ``conservation_residual``
    is the largest relative error of the per-trial energy ledger.
    """

    ep_K: float
    gap_K: float
    participation: float
    trials: int
    per_trial_counts: np.ndarray
    energy_in_qp_K: float
    energy_in_subgap_phonons_K: float
    energy_in_electrons_K: float
    conservation_residual: float
    mean_steps: float
    backend: str
    per_trial_energies_K: np.ndarray = field(repr=False)

    @property
    def ep_over_gap(self) -> float:
        return self.ep_K / self.gap_K

    @property
    def n_qp_mean(self) -> float:
        return float(self.per_trial_counts.mean())

    @property
    def n_qp_normalized(self) -> float:
        """Mean quasiparticle number times Δ/E_p."""
        return self.n_qp_mean * self.gap_K / self.ep_K

    @property
    def n_qp_norm_stderr(self) -> float:
        if self.trials < 2:
            return float("nan")
        sd = float(self.per_trial_counts.std(ddof=1))
        return sd / math.sqrt(self.trials) * self.gap_K / self.ep_K

    def fractions(self):
        """(qp, subgap phonon, electron) shares of the deposited energy."""
        return (
            self.energy_in_qp_K / self.ep_K,
            self.energy_in_subgap_phonons_K / self.ep_K,
            self.energy_in_electrons_K / self.ep_K,
        )

    def summary_row(self) -> dict:
        qp, sub, el = self.fractions()
        return {
            "ep_over_gap": self.ep_over_gap,
            "participation": self.participation,
            "trials": self.trials,
            "n_qp_mean": self.n_qp_mean,
            "n_qp_norm_mean": self.n_qp_normalized,
            "n_qp_norm_stderr": self.n_qp_norm_stderr,
            "e_qp_frac": qp,
            "e_subgap_frac": sub,
            "e_electron_frac": el,
        }


# --- single-event samplers ------------------------------------------------


def _check_gap(gap_K):
    if not (gap_K > 0 and math.isfinite(gap_K)):
        raise DomainError(f"gap must be positive, got {gap_K}")


def _pairbreak_w(ep_K, gap_K):
    _check_gap(gap_K)
    w = ep_K / gap_K
    if not (w > 2.0 and math.isfinite(w)):
        raise DomainError(f"pair breaking needs E_p > 2Δ, got E_p/Δ = {w}")
    return w


def _emission_w(eps_K, gap_K):
    _check_gap(gap_K)
    w = eps_K / gap_K
    if not (w > 1.0 and math.isfinite(w)):
        raise DomainError(f"phonon emission needs ε > Δ, got ε/Δ = {w}")
    return w


def _draw(kind, w, n, rng):
    return _backend.kernel.sample_many(kind, w, n, as_bit_generator(rng))


def sample_pairbreak_split(ep_K: float, gap_K: float, rng) -> tuple:
    """Energies (ε, E_p - ε) of the two quasiparticles from one broken pair."""
    w = _pairbreak_w(ep_K, gap_K)
    e1 = float(_draw(_backend.kernel.SAMPLE_PAIRBREAK, w, 1, rng)[0]) * gap_K
    return e1, ep_K - e1


def sample_qp_emission(eps_K: float, gap_K: float, rng) -> tuple:
    """(ε', ε - ε'): quasiparticle energy after emitting one phonon, and the phonon."""
    w = _emission_w(eps_K, gap_K)
    e1 = float(_draw(_backend.kernel.SAMPLE_QP_EMISSION, w, 1, rng)[0]) * gap_K
    return e1, eps_K - e1


def sample_electron_emission(ee_K: float, rng) -> tuple:
    """(E', E - E'): electron energy after emitting one phonon, and the phonon."""
    if not (ee_K > 0 and math.isfinite(ee_K)):
        raise DomainError(f"electron energy must be positive, got {ee_K}")
    e1 = float(_draw(_backend.kernel.SAMPLE_ELECTRON_EMISSION, ee_K, 1, rng)[0])
    return e1, ee_K - e1


def sample_pairbreak_energies(ep_K: float, gap_K: float, n: int, rng) -> np.ndarray:
    """``n`` quasiparticle energies drawn from the pair-breaking distribution."""
    w = _pairbreak_w(ep_K, gap_K)
    return _draw(_backend.kernel.SAMPLE_PAIRBREAK, w, int(n), rng) * gap_K


def sample_qp_emission_energies(eps_K: float, gap_K: float, n: int, rng) -> np.ndarray:
    """``n`` final quasiparticle energies after one phonon emission."""
    w = _emission_w(eps_K, gap_K)
    return _draw(_backend.kernel.SAMPLE_QP_EMISSION, w, int(n), rng) * gap_K


def sample_electron_emission_energies(ee_K: float, n: int, rng) -> np.ndarray:
    if not (ee_K > 0 and math.isfinite(ee_K)):
        raise DomainError(f"electron energy must be positive, got {ee_K}")
    return _draw(_backend.kernel.SAMPLE_ELECTRON_EMISSION, ee_K, int(n), rng)


# --- cascades -------------------------------------------------------------


def _check_ep(ep_K):
    if not (ep_K > 0 and math.isfinite(ep_K)):
        raise DomainError(f"phonon energy must be positive, got {ep_K}")


def _max_steps(w):
    # Each step removes at least a fraction of Δ from the active pool in
    # practice; the cap only guards against runaway loops.
    return 10_000 + 200 * int(math.ceil(w))


def _kernel_args(ep_K, cfg):
    w = ep_K / cfg.gap_K
    return (
        w,
        cfg.event_probability,
        cfg.freeze_K / cfg.gap_K,
        cfg.drop_K / cfg.gap_K,
        bool(cfg.normal_phonons_rejoin),
        _max_steps(w),
    )


def _collect(ep_K, cfg, tallies, backend):
    n_qp, e_qp, e_sub, e_el, steps = tallies
    g = cfg.gap_K
    energies = np.column_stack([e_qp, e_sub, e_el]) * g
    w = ep_K / g
    residual = float(np.max(np.abs((e_qp + e_sub + e_el) - w)) / w) if len(n_qp) else 0.0
    return CascadeResult(
        ep_K=float(ep_K),
        gap_K=g,
        participation=cfg.participation_s,
        trials=len(n_qp),
        per_trial_counts=n_qp,
        energy_in_qp_K=float(energies[:, 0].mean()),
        energy_in_subgap_phonons_K=float(energies[:, 1].mean()),
        energy_in_electrons_K=float(energies[:, 2].mean()),
        conservation_residual=residual,
        mean_steps=float(steps.mean()),
        backend=backend,
        per_trial_energies_K=energies,
    )


def run_cascade(ep_K: float, cfg: CascadeConfig, rng) -> CascadeResult:
    """One cascade trial driven by ``rng`` (Generator, BitGenerator or int seed)."""
    _check_ep(ep_K)
    kern = _backend.get_kernel(cfg.kernel)
    tallies = kern.run_block([as_bit_generator(rng)], *_kernel_args(ep_K, cfg), owned=False)
    return _collect(ep_K, cfg, tallies, kern.BACKEND)


def run_trials(ep_K: float, cfg: CascadeConfig) -> CascadeResult:
    """``cfg.trials`` independent cascades, trial i on stream (cfg.seed, i).

    Blocks of trials run on a thread pool; the compiled kernel releases the
    GIL. Output does not depend on ``cfg.workers``.
    """
    _check_ep(ep_K)
    kern = _backend.get_kernel(cfg.kernel)
    args = _kernel_args(ep_K, cfg)
    starts = range(0, cfg.trials, BLOCK_SIZE)

    def block(start):
        return kern.run_seeded(cfg.seed, start, min(start + BLOCK_SIZE, cfg.trials), *args)

    workers = cfg.workers or os.cpu_count() or 1
    if workers == 1 or len(starts) == 1:
        parts = [block(s) for s in starts]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(block, starts))
    tallies = tuple(np.concatenate([p[k] for p in parts]) for k in range(5))
    return _collect(ep_K, cfg, tallies, kern.BACKEND)


def run_cascade_bilayer(ep_K: float, ts_um: float, tn_um: float, cfg: CascadeConfig, rng=None) -> CascadeResult:
    """Cascade in a superconductor/normal-metal bilayer.

    With ``rng`` a single trial is run; without it, ``cfg.trials`` trials.
    """
    bcfg = cfg.with_bilayer(ts_um, tn_um)
    if rng is None:
        return run_trials(ep_K, bcfg)
    return run_cascade(ep_K, bcfg, rng)


def efficiency_curve(ep_over_gap_grid: Iterable[float], cfg: CascadeConfig) -> List[CascadeResult]:
    """Ensemble results for each E_p/Δ in the grid."""
    grid = [float(x) for x in ep_over_gap_grid]
    if not grid:
        raise DomainError("empty energy grid")
    return [run_trials(x * cfg.gap_K, cfg) for x in grid]


def participation_sweep(
    ep_K: float, participations: Sequence[float], cfg: CascadeConfig
) -> List[CascadeResult]:
    """Ensemble results for each participation ratio at fixed E_p."""
    return [run_trials(ep_K, replace(cfg, participation_s=float(x))) for x in participations]
