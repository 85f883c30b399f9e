"""Monte Carlo model of radiation-induced quasiparticle bursts in superconducting qubits."""
__version__ = "0.1.0"

from .cascade import BACKEND, CascadeConfig, CascadeResult, efficiency_curve, run_cascade, run_cascade_bilayer, run_trials
from .event import ChipGeometry, EventConfig, EventTimeline, simulate_event
from .markers import BASELINE, UNBOUNDED
from .materials import MaterialParams, bcs_dos, builtin_material, kelvin_from_ev

__all__ = [
    "BACKEND",
    "BASELINE",
    "UNBOUNDED",
    "CascadeConfig",
    "CascadeResult",
    "ChipGeometry",
    "EventConfig",
    "EventTimeline",
    "MaterialParams",
    "bcs_dos",
    "builtin_material",
    "efficiency_curve",
    "kelvin_from_ev",
    "run_cascade",
    "run_cascade_bilayer",
    "run_trials",
    "simulate_event",
    "__version__",
]
