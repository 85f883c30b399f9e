"""Published numbers next to their computed counterparts.

Each entry carries its own tolerance. Entries whose published value is
known to disagree with the formulas it is derived from are reported as
``documented deviation`` and never count as failures.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import List, Optional

import numpy as np

from . import event, rates
from .cascade import DEFAULT_SEED, CascadeConfig, normal_thickness_for, run_cascade_bilayer, run_trials
from .design import BacksideCircuit, backside_q_estimate, participation_ratio, trap_estimates
from .materials import builtin_material, kelvin_from_ev

PASS = "pass"
FAIL = "FAIL"
DEVIATION = "documented deviation"


@dataclass(frozen=True)
class Entry:
    location: str
    quantity: str
    quoted: float
    computed: float
    tolerance: str  # "rel 0.1", "abs 0.02", "factor 1.6", "deviation"
    status: str
    note: str = ""

    @property
    def rel_diff(self) -> float:
        if self.quoted == 0:
            return abs(self.computed)
        return (self.computed - self.quoted) / abs(self.quoted)

    def row(self) -> dict:
        return {
            "location": self.location,
            "quantity": self.quantity,
            "quoted": self.quoted,
            "computed": self.computed,
            "rel_diff": self.rel_diff,
            "tolerance": self.tolerance,
            "status": self.status,
            "note": self.note,
        }


def _check(location, quantity, quoted, computed, kind, tol, note=""):
    computed = float(computed)
    if kind == "rel":
        ok = abs(computed - quoted) <= tol * abs(quoted)
    elif kind == "abs":
        ok = abs(computed - quoted) <= tol
    elif kind == "factor":
        ok = computed > 0 and max(computed / quoted, quoted / computed) <= tol
    else:
        raise ValueError(kind)
    return Entry(location, quantity, quoted, computed, f"{kind} {tol:g}", PASS if ok else FAIL, note)


def _deviation(location, quantity, quoted, computed, note):
    return Entry(location, quantity, quoted, float(computed), "deviation", DEVIATION, note)


def _linear_fit(x, y):
    slope, intercept = np.polyfit(x, y, 1)
    fitted = slope * x + intercept
    r2 = 1.0 - np.sum((y - fitted) ** 2) / np.sum((y - y.mean()) ** 2)
    return slope, intercept, r2


def conformance_report(trials: int = 20_000, seed: int = DEFAULT_SEED, workers: Optional[int] = None) -> List[Entry]:
    al = builtin_material("Al")
    nal = builtin_material("n-Al")
    cu = builtin_material("Cu")
    gap = al.gap_K
    out: List[Entry] = []
    add = out.append

    # materials
    add(_check("materials", "Al Cooper-pair density (1/um^3)", 2.8e6, al.n_cp_per_um3, "rel", 1e-12))
    add(_check("heat-capacity table", "Cu electron-phonon coupling (nW/um^3/K^5)", 2.0, cu.sigma_ep_nW_per_um3K5, "rel", 1e-12))
    add(_check("gap", "Al gap from 182 ueV (K)", 182e-6 * 11604.5, kelvin_from_ev(182e-6), "rel", 1e-4))

    # Kaplan rates
    slope = rates.phonon_pairbreak_rate_fit(1e3 * gap, al, asymptotic=True).rate_per_ns / (1e3 * gap)
    add(_check("rate table, Kaplan Al", "pair-break slope, 1/(1.0 ns) per K", 1.0, slope, "rel", 0.15,
               "linear form 1.4 E/(pi tau_ph Delta)"))
    fit_q = rates.qp_scatter_rate_fit(gap + 1.0, al).rate_per_ns
    add(_deviation("rate table, Kaplan Al", "qp scatter at 1 K above gap (1/ns)", 1 / 1700, fit_q,
                   "cubic fit with tau0=440 ns gives 1/2300 ns; tabulated constant is rounded differently"))
    pb20 = rates.phonon_pairbreak_rate_integral(20.0, al).rate_per_ns
    add(_deviation("length table, Al 20 K", "pair-break rate from integral (1/ns)", 20.0, pb20,
                   "tabulated value uses the rounded 1/(1.0 ns) per K constant"))
    for eps_over_gap in (2.0, 5.0):
        integ = rates.qp_scatter_rate_integral(eps_over_gap * gap, al).rate_per_ns
        fit = rates.qp_scatter_rate_fit(eps_over_gap * gap, al).rate_per_ns
        add(_check("qp scattering fit overlay", f"cubic fit vs integral at eps/Delta={eps_over_gap:g}", integ, fit, "rel", 0.20))
    for ep_over_gap in (2.1, 4.0, 10.0, 50.0):
        integ = rates.phonon_pairbreak_rate_integral(ep_over_gap * gap, al).rate_per_ns
        fit = rates.phonon_pairbreak_rate_fit(ep_over_gap * gap, al).rate_per_ns
        add(_check("pair-break fit overlay", f"fit vs integral at E_p/Delta={ep_over_gap:g}", integ, fit, "rel", 0.05))
    add(_check("rate table, recombination", "rate at n_qp/n_cp=2.4e-5 (1/ns)", 1.2e-6,
               rates.qp_recomb_rate(2.4e-5, al).rate_per_ns, "rel", 1e-9))

    # power balance
    p_nal = rates.power_rates(1.0, nal)
    p_cu = rates.power_rates(1.0, cu)
    add(_check("rate table, power n-Al", "phonon time at 1 K (ns)", 3.1, p_nal.phonon.time_ns, "rel", 0.10))
    add(_check("rate table, power n-Al", "electron time at 1 K (ns)", 350.0, p_nal.electron.time_ns, "rel", 0.10))
    add(_check("rate table, power Cu", "electron time at 1 K (ns)", 24.0, p_cu.electron.time_ns, "rel", 0.10))
    add(_deviation("rate table, power Cu", "phonon time at 1 K (ns)", 8.2, p_cu.phonon.time_ns,
                   "coupling and phonon heat capacity of the same table give 1/0.82 ns"))
    add(_check("heat-capacity table", "Cu power at T_e=1 K, T_p=0, 1 um^3 (nW)", 2.0, rates.power_ep(1, 0, cu, 1), "rel", 1e-12))
    add(_check("heat-capacity table", "n-Al power at T_e=1 K, T_p=0, 1 um^3 (nW)", 0.2, rates.power_ep(1, 0, nal, 1), "rel", 1e-12))

    # scattering lengths, rounded-constant model
    quoted_lengths = {
        ("Cu", 20.0): (330, 3.8, 2.4, 2.0),
        ("Al", 20.0): (3.5, 7.6, 20, 0.32),
        ("Cu", 4.0): (2.7, 42, 0.49, 9.8),
        ("Al", 4.0): (0.0052, 200, 4.0, 1.6),
    }
    for row in rates.length_table(model="table"):
        q_rate, q_diff, p_rate, p_len = quoted_lengths[(row.material, row.energy_K)]
        where = f"length table, {row.material} {row.energy_K:g} K"
        pairs = (
            (f"{row.carrier} rate (1/ns)", q_rate, row.carrier_rate_per_ns),
            (f"{row.carrier} diffusion length (um)", q_diff, row.diffusion_length_um),
            ("p rate (1/ns)", p_rate, row.phonon_rate_per_ns),
            ("p length (um)", p_len, row.phonon_length_um),
        )
        for quantity, quoted, computed in pairs:
            if row.material == "Al" and row.energy_K == 4.0 and row.carrier in quantity:
                add(_deviation(where, quantity, quoted, computed,
                               "energy offset behind the tabulated 0.0052/ns is not stated"))
            else:
                add(_check(where, quantity, quoted, computed, "rel", 0.10))

    # cascade
    cfg = CascadeConfig(trials=trials, seed=seed, workers=workers)
    plateau = float(np.mean([run_trials(x * gap, cfg).n_qp_normalized for x in (50.0, 100.0, 200.0)]))
    add(_check("down-conversion", "plateau efficiency, E_p/Delta in {50,100,200}", 0.57, plateau, "abs", 0.02))
    xs = np.arange(1, 11) / 10.0
    bcfg = replace(cfg, trials=max(trials // 2, 1))
    ys = np.array([
        run_cascade_bilayer(10 * gap, 0.1, normal_thickness_for(x, 0.1), bcfg).n_qp_normalized for x in xs
    ])
    _, intercept, r2 = _linear_fit(xs, ys)
    add(_check("bilayer", "linear-fit R^2 of yield vs participation", 1.0, r2, "abs", 0.01))
    add(_check("bilayer", "fit at participation 1 vs pure superconductor", ys[-1], slope_at_one(xs, ys), "abs", 0.03))

    # event pipeline
    tl = event.simulate_event(event.EventConfig())
    add(_check("down-conversion table", "quasiparticle number", 0.67e9, tl.n_qp, "rel", 0.10))
    add(_check("down-conversion table", "density over 1 cm^2 x 0.1 um (1/um^3)", 67.0,
               tl.n_qp / (100 * 1e6 * 0.1), "rel", 0.10))
    add(_check("down-conversion table", "n_qp/n_cp", 2.4e-5, tl.density_ratio_chip, "rel", 0.10))
    add(_deviation("down-conversion table", "qubit Q", 51e3, tl.q_chip, "1/Q = 1.2 n_qp/n_cp gives 35-37 k"))
    add(_check("down-conversion table", "T1 for 1 cm^2 (us)", 1.6, tl.t1_chip_us, "factor", 1.6))
    add(_check("down-conversion table", "T1 for 10 mm^2 (us)", 0.16, tl.t1_hotspot_us, "factor", 1.6))
    add(_check("phonon escape", "1/Gamma_p (ms)", 4.0, tl.escape_time_us * 1e-3, "rel", 0.10))
    add(_check("qp diffusion", "D_q at 1 us (mm)", 0.4, event.qp_diffusion_radius(1.0), "rel", 0.15))
    add(_check("qp diffusion", "velocity factor 0.25 K above gap", 0.46,
               event.velocity_factor(0.25, al.gap_K), "rel", 0.05))
    add(_check("recombination", "t + t0 for hotspot density (us)", 100.0,
               event.recombination_time_to(tl.density_ratio_hotspot), "factor", 3.0, "quoted as an order of magnitude"))
    improved = event.simulate_event(event.EventConfig(design="improved"))
    add(_check("improved design", "stage-2 T1 (us)", 16.0, improved.stages[1].t1.value_us, "factor", 1.6,
               "inherits the Q prefactor difference"))
    add(_check("improved design", "density suppression at t_n = 6 um", 100.0, improved.suppression, "rel", 1e-9))
    for design, timeline in (("present", tl), ("improved", improved)):
        quoted_t = event.STAGE_SCALES[design]
        for stage, (dur, _) in zip(timeline.stages, quoted_t):
            add(_check(f"event summary, {design}", f"{stage.name} time (us)", dur, stage.duration_us, "rel", 0.0))

    # design
    add(_check("backside damping", "Q for 6 ohm line", 1e3, backside_q_estimate(BacksideCircuit()), "factor", 10.0,
               "order of magnitude"))
    add(_check("backside damping", "Q for 0.01 ohm line", 3e6,
               backside_q_estimate(BacksideCircuit(r_eff_ohm=0.01)), "factor", 10.0, "order of magnitude"))
    add(_check("traps", "relaxation time 1 K above trap gap (us)", 1.7, trap_estimates().scatter_time_us, "rel", 1e-9))
    add(_check("normal-metal layer", "participation for 0.1 um / 6 um", 0.01, participation_ratio(0.1, 6.0), "rel", 1e-9))
    return out


def slope_at_one(xs, ys) -> float:
    """Value of the least-squares line through (xs, ys) at x = 1."""
    slope, intercept, _ = _linear_fit(np.asarray(xs, float), np.asarray(ys, float))
    return float(slope + intercept)


def summarize(entries: List[Entry]) -> dict:
    counts = {PASS: 0, FAIL: 0, DEVIATION: 0}
    for e in entries:
        counts[e.status] += 1
    return counts
