"""Phonon to quasiparticle down-conversion cascade."""
from ._backend import BACKEND, available_kernels, get_kernel
from .engine import (
    AL_GAP_K,
    BLOCK_SIZE,
    PARTICIPATION_CONSTANT,
    CascadeConfig,
    CascadeResult,
    Excitation,
    efficiency_curve,
    normal_thickness_for,
    participation_ratio,
    participation_sweep,
    run_cascade,
    run_cascade_bilayer,
    run_trials,
    sample_electron_emission,
    sample_electron_emission_energies,
    sample_pairbreak_energies,
    sample_pairbreak_split,
    sample_qp_emission,
    sample_qp_emission_energies,
)
from .rng import DEFAULT_SEED, trial_stream

__all__ = [
    "AL_GAP_K",
    "BACKEND",
    "BLOCK_SIZE",
    "DEFAULT_SEED",
    "PARTICIPATION_CONSTANT",
    "CascadeConfig",
    "CascadeResult",
    "Excitation",
    "available_kernels",
    "efficiency_curve",
    "get_kernel",
    "normal_thickness_for",
    "participation_ratio",
    "participation_sweep",
    "run_cascade",
    "run_cascade_bilayer",
    "run_trials",
    "sample_electron_emission",
    "sample_electron_emission_energies",
    "sample_pairbreak_energies",
    "sample_pairbreak_split",
    "sample_qp_emission",
    "sample_qp_emission_energies",
    "trial_stream",
]
