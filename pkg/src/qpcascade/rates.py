"""Electron-phonon scattering rates.

Three families are provided:

* Kaplan integrals for superconductors, evaluated by adaptive quadrature
  with the substitution ``u = sqrt(ε' - Δ)`` that removes the inverse
  square-root singularity of the density of states at the gap;
* the closed-form fits to those integrals;
* power-balance rates ``P_ep / U`` for normal metals.

All integrals are written in units of the gap, ``x = ε / Δ``, so the
prefactors reduce to ``(Δ / k T_c)³ / τ₀`` and ``1 / (π τ₀^ph)``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
from scipy import integrate
from scipy.special import expit

from .errors import DomainError, QuadratureError
from .materials import DOS_FLOOR, MaterialParams

#: Requested relative accuracy of every quadrature.
QUAD_RTOL = 1e-10
#: Largest acceptable relative error estimate reported by QUADPACK.
QUAD_MAX_REL_ERR = 1e-6
#: Occupation tail cut: integrate until f drops below this fraction of its peak.
OCCUPATION_CUTOFF = 1e-12

# Coefficients of the closed-form fits.
QP_SCATTER_FIT_COEFF = 1.8
PAIRBREAK_FIT_AMPLITUDE = 3.8
PAIRBREAK_FIT_OFFSET = 2.3
PAIRBREAK_FIT_POWER = 0.8
PAIRBREAK_ASYMPTOTE_SLOPE = 1.4  # rough linear form, not the E -> inf limit
RECOMB_NEAR_GAP_COEFF = 22.0

# Rounded rate constants as tabulated for aluminum (Kaplan column) and for
# normal aluminum / copper (power column). Units: ns, with energies in K.
ROUNDED_PAIRBREAK_NS = 1.0      # p -> q + q: (1/1.0 ns) (E_p/K)
ROUNDED_QP_SCATTER_NS = 1700.0  # q -> q + p: (1/1700 ns) ((E_q - Δ)/K)³
ROUNDED_POWER_NS = {
    # material: (p -> e + e time per K, e -> e + p time per K³)
    "n-Al": (3.1, 350.0),
    "Cu": (8.2, 24.0),
}


@dataclass(frozen=True)
class RateResult:
    rate_per_ns: float
    method: str
    rel_err_estimate: float = 0.0

    def __post_init__(self):
        if self.method not in ("integral", "fit", "power", "table"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.rate_per_ns < 0 or self.rel_err_estimate < 0:
            raise ValueError("rates and error estimates are non-negative")

    @property
    def time_ns(self) -> float:
        return math.inf if self.rate_per_ns == 0 else 1.0 / self.rate_per_ns


def _require_gap(mat: MaterialParams):
    if not mat.is_superconductor:
        raise DomainError(f"{mat.name} has no gap; Kaplan integrals need Δ > 0")


def _quad(func, a, b, points=None):
    """Adaptive quadrature returning (value, relative error estimate)."""
    if b <= a:
        return 0.0, 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            value, abserr = integrate.quad(
                func, a, b, epsabs=0.0, epsrel=QUAD_RTOL, limit=500, points=points
            )
        except integrate.IntegrationWarning as exc:
            raise QuadratureError(f"quadrature on [{a}, {b}] failed: {exc}") from None
    rel = abs(abserr / value) if value != 0 else abserr
    if rel > QUAD_MAX_REL_ERR:
        raise QuadratureError(f"quadrature on [{a}, {b}] reached only rel. err {rel:.2e}")
    return value, rel


def _quad_above_floor(func, lo, hi, points=None):
    """Quadrature of a function of u = sqrt(x - 1) that is bounded at u = 0.

    The integrand is evaluated only for u >= lo (the density-of-states
    floor); the sliver [0, lo] is added as lo * func(lo), which is exact
    to O(lo²) relative.
    """
    value, rel = _quad(func, lo, hi, points=points)
    if lo > 0 and hi > lo:
        value += lo * func(lo)
    return value, rel


# ---------------------------------------------------------------------------
# quasiparticle scattering  q -> q + p
# ---------------------------------------------------------------------------


def qp_scatter_integral_reduced(w: float, floor: float = DOS_FLOOR) -> tuple[float, float]:
    """Dimensionless scattering integral for a quasiparticle at ε = wΔ.

    ``∫_1^w (w - x)² ρ(x) (1 - 1/(w x)) dx``, computed with x = 1 + u².
    """
    if w <= 1:
        raise DomainError(f"quasiparticle energy must exceed the gap (w={w})")

    d = w - 1.0  # written out so that w - x keeps its precision near the gap

    def integrand(u):
        u2 = u * u
        return 2.0 * (d - u2) ** 2 * (u2 + d / w) / math.sqrt(2.0 + u2)

    return _quad_above_floor(integrand, math.sqrt(floor), math.sqrt(d))


def qp_scatter_rate_integral(eps_K: float, mat: MaterialParams, floor: float = DOS_FLOOR) -> RateResult:
    """Phonon-emission rate of a quasiparticle at energy ``eps_K``."""
    _require_gap(mat)
    if eps_K <= mat.gap_K:
        raise DomainError(f"ε={eps_K} K must exceed Δ={mat.gap_K} K")
    value, rel = qp_scatter_integral_reduced(eps_K / mat.gap_K, floor)
    scale = (mat.gap_K / mat.tc_K) ** 3 / mat.tau0_ns
    return RateResult(scale * value, "integral", rel)


def qp_scatter_rate_fit(eps_K: float, mat: MaterialParams) -> RateResult:
    """Cubic fit ``1.8 (ε - Δ)³ / (τ₀ Δ³)``."""
    _require_gap(mat)
    if eps_K < mat.gap_K:
        raise DomainError(f"ε={eps_K} K is below Δ={mat.gap_K} K")
    excess = eps_K - mat.gap_K
    rate = QP_SCATTER_FIT_COEFF * excess**3 / (mat.tau0_ns * mat.gap_K**3)
    return RateResult(rate, "fit")


# ---------------------------------------------------------------------------
# recombination  q + q -> p
# ---------------------------------------------------------------------------


def qp_recomb_rate(n_ratio: float, mat: MaterialParams) -> RateResult:
    """Near-gap recombination rate ``(22/τ₀) n_qp/n_cp``."""
    if not 0.0 <= n_ratio <= 1.0:
        raise DomainError(f"density ratio must lie in [0, 1], got {n_ratio}")
    return RateResult(RECOMB_NEAR_GAP_COEFF / mat.tau0_ns * n_ratio, "fit")


def _occupation_window(occupation, gap_K, floor):
    """Offsets (in units of Δ above the gap) bracketing the support of f."""
    offsets = np.geomspace(floor, 1e6, 721)
    f = np.array([occupation(gap_K * (1.0 + o)) for o in offsets], dtype=float)
    if np.any(~np.isfinite(f)) or np.any(f < 0):
        raise DomainError("occupation must be finite and non-negative")
    peak = f.max()
    if peak == 0.0:
        return None
    significant = np.nonzero(f >= OCCUPATION_CUTOFF * peak)[0]
    last = significant[-1]
    if last == len(offsets) - 1:
        raise QuadratureError("occupation does not decay; cannot truncate the integral")
    return offsets[: last + 2]


def qp_recomb_rate_integral(
    eps_K: float,
    occupation: Callable[[float], float],
    mat: MaterialParams,
    floor: float = DOS_FLOOR,
) -> RateResult:
    """Recombination rate of a quasiparticle at ``eps_K`` against partners
    distributed with occupation ``f(ε')`` (ε' in Kelvin).

    The upper limit is truncated where f falls below 1e-12 of its peak.
    """
    _require_gap(mat)
    gap = mat.gap_K
    if eps_K <= gap:
        raise DomainError(f"ε={eps_K} K must exceed Δ={gap} K")
    window = _occupation_window(occupation, gap, floor)
    if window is None:
        return RateResult(0.0, "integral", 0.0)
    w = eps_K / gap

    def integrand(u):
        x = 1.0 + u * u
        return 2.0 * (w + x) ** 2 * occupation(gap * x) * (x + 1.0 / w) / math.sqrt(x + 1.0)

    breaks = np.sqrt(window)
    value, rel = _quad_above_floor(integrand, breaks[0], breaks[-1], points=breaks[1:-1][::6])
    scale = (gap / mat.tc_K) ** 3 / mat.tau0_ns
    return RateResult(scale * value, "integral", rel)


def fermi_occupation(t_K: float) -> Callable[[float], float]:
    """Thermal occupation ``1/(exp(ε/T) + 1)`` as a callable of ε in Kelvin."""
    if t_K <= 0:
        raise DomainError(f"temperature must be positive, got {t_K}")
    return lambda eps_K: float(expit(-eps_K / t_K))


def occupation_density_ratio(
    occupation: Callable[[float], float], mat: MaterialParams, floor: float = DOS_FLOOR
) -> float:
    """Quasiparticle density ``n_qp/n_cp = (2/Δ) ∫ f ρ dε`` for an occupation."""
    _require_gap(mat)
    gap = mat.gap_K
    window = _occupation_window(occupation, gap, floor)
    if window is None:
        return 0.0

    def integrand(u):
        x = 1.0 + u * u
        return 2.0 * x * occupation(gap * x) / math.sqrt(x + 1.0)

    breaks = np.sqrt(window)
    value, _ = _quad_above_floor(integrand, breaks[0], breaks[-1], points=breaks[1:-1][::6])
    return 2.0 * value


# ---------------------------------------------------------------------------
# pair breaking  p -> q + q
# ---------------------------------------------------------------------------


def pairbreak_integral_reduced(w: float, floor: float = DOS_FLOOR) -> tuple[float, float]:
    """``∫_1^{w-1} ρ(x) ρ(w-x) (1 + 1/(x(w-x))) dx`` for a phonon of energy wΔ.

    The integrand is symmetric about w/2, so only the lower half is
    integrated (with x = 1 + u²) and doubled.
    """
    if w <= 2:
        return 0.0, 0.0
    half = 0.5 * w

    def integrand(u):
        x = 1.0 + u * u
        y = w - x
        rho_y = y / math.sqrt((y - 1.0) * (y + 1.0))
        return 2.0 * x / math.sqrt(x + 1.0) * rho_y * (1.0 + 1.0 / (x * y))

    lo = math.sqrt(min(floor, 0.5 * (half - 1.0)))
    value, rel = _quad_above_floor(integrand, lo, math.sqrt(half - 1.0))
    return 2.0 * value, rel


def phonon_pairbreak_rate_integral(ep_K: float, mat: MaterialParams, floor: float = DOS_FLOOR) -> RateResult:
    """Pair-breaking rate of a phonon of energy ``ep_K``; exactly 0 below 2Δ."""
    _require_gap(mat)
    if ep_K <= 2.0 * mat.gap_K:
        return RateResult(0.0, "integral", 0.0)
    value, rel = pairbreak_integral_reduced(ep_K / mat.gap_K, floor)
    return RateResult(value / (math.pi * mat.tau0ph_ns), "integral", rel)


def phonon_pairbreak_rate_fit(ep_K: float, mat: MaterialParams, asymptotic: bool = False) -> RateResult:
    """Closed-form pair-breaking rate.

    ``[E + 3.8Δ/(E/Δ + 2.3)^0.8] / (π τ₀^ph Δ)``; with ``asymptotic=True``
    the rough linear form ``1.4 E / (π τ₀^ph Δ)`` is returned instead. The
    linear form is a mid-range approximation: it exceeds the fit above
    about 3.2Δ, while the fit itself tends to ``E / (π τ₀^ph Δ)``.
    """
    _require_gap(mat)
    gap = mat.gap_K
    if ep_K <= 2.0 * gap:
        raise DomainError(f"E_p={ep_K} K is below the pair-breaking threshold 2Δ={2 * gap} K")
    prefactor = 1.0 / (math.pi * mat.tau0ph_ns * gap)
    if asymptotic:
        return RateResult(prefactor * PAIRBREAK_ASYMPTOTE_SLOPE * ep_K, "fit")
    correction = PAIRBREAK_FIT_AMPLITUDE * gap / (ep_K / gap + PAIRBREAK_FIT_OFFSET) ** PAIRBREAK_FIT_POWER
    return RateResult(prefactor * (ep_K + correction), "fit")


# ---------------------------------------------------------------------------
# power balance
# ---------------------------------------------------------------------------


class PowerRates(NamedTuple):
    phonon: RateResult
    electron: RateResult


def power_ep(te_K: float, tp_K: float, mat: MaterialParams, volume_um3: float) -> float:
    """Electron-to-phonon power in nW (negative when phonons heat electrons)."""
    if te_K < 0 or tp_K < 0:
        raise DomainError("temperatures must be non-negative")
    return mat.sigma_ep_nW_per_um3K5 * volume_um3 * (te_K**5 - tp_K**5)


def phonon_energy_density(t_K: float, mat: MaterialParams) -> float:
    """U_p in nJ/µm³."""
    return mat.c_p_coeff * 1e-9 * t_K**4 / 4.0


def electron_energy_density(t_K: float, mat: MaterialParams) -> float:
    """U_e in nJ/µm³."""
    return mat.c_e_coeff * 1e-9 * t_K**2 / 2.0


def power_rates(t_K: float, mat: MaterialParams) -> PowerRates:
    """Phonon and electron relaxation rates ``P_ep/U`` at temperature ``t_K``.

    The phonon rate uses ``P_ep(T_e=0, T_p=T)`` and the electron rate
    ``P_ep(T_e=T, T_p=0)``; they scale as T and T³.
    """
    if t_K <= 0:
        raise DomainError(f"temperature must be positive, got {t_K}")
    power = power_ep(t_K, 0.0, mat, 1.0)  # nW per µm³
    # nW / nJ = 1/s
    gamma_p = power / phonon_energy_density(t_K, mat) * 1e-9
    gamma_e = power / electron_energy_density(t_K, mat) * 1e-9
    return PowerRates(RateResult(gamma_p, "power"), RateResult(gamma_e, "power"))


# ---------------------------------------------------------------------------
# length scales
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LengthTable:
    """Rates and lengths at one energy for one film."""

    material: str
    energy_K: float
    film_thickness_um: float
    carrier: str  # "q" in a superconductor, "e" in a normal metal
    carrier_rate_per_ns: float
    diffusion_length_um: float
    phonon_rate_per_ns: float
    phonon_length_um: float
    model: str


def _length(numerator, rate):
    return math.inf if rate == 0 else numerator / rate


def scattering_lengths(
    energy_K: float, mat: MaterialParams, film_thickness_um: float, model: str = "canonical"
) -> LengthTable:
    """Phonon interaction length and electron/quasiparticle diffusion length.

    ``model="canonical"`` takes superconductor rates from the fits and
    normal-metal rates from power balance. ``model="table"`` uses the
    rounded rate constants tabulated for Al, n-Al and Cu, which is how the
    published length table was produced. The electron mean free path is
    the film thickness: ``L_diff = sqrt(v_e d / Γ_e)``.
    """
    if energy_K <= 0 or film_thickness_um <= 0:
        raise DomainError("energy and thickness must be positive")
    if model not in ("canonical", "table"):
        raise ValueError(f"unknown model {model!r}")
    gap = mat.gap_K
    if mat.is_superconductor:
        carrier = "q"
        excess = max(energy_K - gap, 0.0)
        if model == "canonical":
            gamma_c = qp_scatter_rate_fit(gap + excess, mat).rate_per_ns
            gamma_p = (
                phonon_pairbreak_rate_fit(energy_K, mat).rate_per_ns if energy_K > 2 * gap else 0.0
            )
        else:
            gamma_c = excess**3 / ROUNDED_QP_SCATTER_NS
            gamma_p = energy_K / ROUNDED_PAIRBREAK_NS
    else:
        carrier = "e"
        if model == "canonical":
            rates = power_rates(energy_K, mat)
            gamma_p, gamma_c = rates.phonon.rate_per_ns, rates.electron.rate_per_ns
        else:
            try:
                tau_p, tau_e = ROUNDED_POWER_NS[mat.name]
            except KeyError:
                raise DomainError(f"no tabulated power rates for {mat.name}") from None
            gamma_p, gamma_c = energy_K / tau_p, energy_K**3 / tau_e
    return LengthTable(
        material=mat.name,
        energy_K=energy_K,
        film_thickness_um=film_thickness_um,
        carrier=carrier,
        carrier_rate_per_ns=gamma_c,
        diffusion_length_um=math.sqrt(_length(mat.v_e_um_per_ns * film_thickness_um, gamma_c)),
        phonon_rate_per_ns=gamma_p,
        phonon_length_um=_length(mat.v_p_um_per_ns, gamma_p),
        model=model,
    )


def length_table(
    films: dict[str, tuple[MaterialParams, float]] | None = None,
    energies_K=(20.0, 4.0),
    model: str = "canonical",
) -> list[LengthTable]:
    """Rows of :func:`scattering_lengths` for several films and energies.

    Defaults to a 3 µm copper film and a 0.1 µm aluminum film at 20 K and 4 K.
    """
    from .materials import builtin_material

    if films is None:
        films = {"Cu": (builtin_material("Cu"), 3.0), "Al": (builtin_material("Al"), 0.1)}
    return [
        scattering_lengths(e, mat, d, model=model)
        for e in energies_K
        for mat, d in films.values()
    ]
