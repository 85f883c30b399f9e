"""Pure-Python cascade kernel.

Mirror of ``_ckernel.pyx``: same draw order and the same floating point
operations, so both backends produce bit-identical trials. Energies are
in units of the gap Δ.
"""
import math

import numpy as np

from ..errors import CascadeLimitError

PHONON = 0
QP = 1
ELECTRON = 2
PHONON_NORMAL = 3  # phonon confined to the normal metal

SAMPLE_PAIRBREAK = 0
SAMPLE_QP_EMISSION = 1
SAMPLE_ELECTRON_EMISSION = 2

_ONE_THIRD = 1.0 / 3.0
_EIGHT_FIFTEENTHS = 8.0 / 15.0
_SQRT2 = math.sqrt(2.0)

BACKEND = "python"


class _Uniform:
    """Uniform doubles from a numpy bit generator, in stream order."""

    def __init__(self, bitgen, buffered=False):
        self._gen = np.random.Generator(bitgen)
        self._buffered = buffered
        self._buf = []
        self._i = 0

    def __call__(self):
        if not self._buffered:
            return self._gen.random()
        if self._i == len(self._buf):
            self._buf = self._gen.random(256).tolist()
            self._i = 0
        u = self._buf[self._i]
        self._i += 1
        return u


def pairbreak_draw(w, uniform):
    """Energy of one quasiparticle from a phonon of energy w > 2.

    Rejection sampling in φ, with ε = 1 + L(1 - cos φ)/2: the two
    endpoint singularities cancel against the Jacobian and the remaining
    density h(φ) peaks at φ = π/2.
    """
    span = w - 2.0
    bound = (0.25 * w * w + 1.0) / (0.5 * w + 1.0)
    while True:
        c = math.cos(math.pi * uniform())
        s = 0.5 * span * (1.0 - c)
        sp = span - s
        h = ((1.0 + s) * (1.0 + sp) + 1.0) / math.sqrt((2.0 + s) * (2.0 + sp))
        if uniform() * bound <= h:
            return 1.0 + s


def qp_emission_draw(w, uniform):
    """Final energy of a quasiparticle at w > 1 after emitting one phonon.

    With ε' = 1 + t² the target density in t is (L - t²)² g(t) with
    g(t) = (w(1+t²) - 1)/√(2+t²) ≤ L/√2 + w t, which gives a two-part
    mixture envelope.
    """
    span = w - 1.0
    top = math.sqrt(span)
    a = span / _SQRT2
    b = w
    w1 = a * _EIGHT_FIFTEENTHS * span * span * top
    w2 = b * span * span * span / 6.0
    while True:
        if uniform() * (w1 + w2) < w1:
            while True:
                tau = uniform()
                q = 1.0 - tau * tau
                if uniform() <= q * q:
                    break
            t = tau * top
        else:
            t = math.sqrt(max(span - span * uniform() ** _ONE_THIRD, 0.0))
        t2 = t * t
        g = (w * (1.0 + t2) - 1.0) / math.sqrt(2.0 + t2)
        if uniform() * (a + b * t) <= g:
            return 1.0 + t2


def electron_emission_draw(e, uniform):
    """Electron energy after emitting a phonon with density ∝ x² on [0, e]."""
    return e - e * uniform() ** _ONE_THIRD


def _run_trial(ep, p_sc, freeze, drop, rejoin, max_steps, uniform):
    kinds = [PHONON]
    energies = [ep]
    n_qp = 0
    e_qp = 0.0
    e_subgap = 0.0
    e_electron = 0.0
    steps = 0
    electron_phonon = PHONON if rejoin else PHONON_NORMAL
    while kinds:
        steps += 1
        if steps > max_steps:
            raise _StepLimit()
        kind = kinds.pop()
        e = energies.pop()
        if kind == PHONON or kind == PHONON_NORMAL:
            if e <= 2.0:
                e_subgap += e
                continue
            if kind == PHONON_NORMAL:
                superconductor = False
            elif p_sc >= 1.0:
                superconductor = True
            elif p_sc <= 0.0:
                superconductor = False
            else:
                superconductor = uniform() < p_sc
            if superconductor:
                e1 = pairbreak_draw(e, uniform)
                kinds.append(QP)
                energies.append(e1)
                kinds.append(QP)
                energies.append(e - e1)
            else:
                e1 = e * uniform()
                kinds.append(ELECTRON)
                energies.append(e1)
                kinds.append(ELECTRON)
                energies.append(e - e1)
        elif kind == QP:
            if e < freeze:
                n_qp += 1
                e_qp += e
                continue
            e1 = qp_emission_draw(e, uniform)
            kinds.append(PHONON)
            energies.append(e - e1)
            kinds.append(QP)
            energies.append(e1)
        else:
            if e <= drop:
                e_electron += e
                continue
            e1 = electron_emission_draw(e, uniform)
            kinds.append(electron_phonon)
            energies.append(e - e1)
            kinds.append(ELECTRON)
            energies.append(e1)
    return n_qp, e_qp, e_subgap, e_electron, steps


class _StepLimit(Exception):
    pass


def _limit_error(max_steps, ep, p_sc, trial):
    # same wording as the compiled kernel
    return CascadeLimitError(f"cascade exceeded {max_steps} steps (E_p/Δ={ep}, participation={p_sc}, trial {trial})")


def run_block(bitgens, ep, p_sc, freeze, drop, rejoin, max_steps, owned=True):
    """Run one trial per bit generator; returns per-trial tally arrays.

    ``owned`` streams are discarded afterwards, so draws may be read ahead
    in batches; otherwise each stream is left exactly where the trial
    stopped.
    """
    n = len(bitgens)
    n_qp = np.zeros(n, dtype=np.int64)
    e_qp = np.zeros(n)
    e_subgap = np.zeros(n)
    e_electron = np.zeros(n)
    steps = np.zeros(n, dtype=np.int64)
    for i, bitgen in enumerate(bitgens):
        uniform = _Uniform(bitgen, buffered=owned)
        try:
            n_qp[i], e_qp[i], e_subgap[i], e_electron[i], steps[i] = _run_trial(
                ep, p_sc, freeze, drop, bool(rejoin), max_steps, uniform
            )
        except _StepLimit:
            raise _limit_error(max_steps, ep, p_sc, i) from None
    return n_qp, e_qp, e_subgap, e_electron, steps


def run_seeded(seed, start, stop, ep, p_sc, freeze, drop, rejoin, max_steps):
    """Trials ``start..stop-1`` on the streams keyed (seed, trial)."""
    n = max(stop - start, 0)
    n_qp = np.zeros(n, dtype=np.int64)
    e_qp = np.zeros(n)
    e_subgap = np.zeros(n)
    e_electron = np.zeros(n)
    steps = np.zeros(n, dtype=np.int64)
    bitgen = np.random.Philox(key=int(seed) + (int(start) << 64))
    state = bitgen.state
    key = state["state"]["key"]
    for i in range(n):
        key[1] = start + i
        bitgen.state = state  # same draws as a freshly keyed generator
        uniform = _Uniform(bitgen, buffered=True)
        try:
            n_qp[i], e_qp[i], e_subgap[i], e_electron[i], steps[i] = _run_trial(
                ep, p_sc, freeze, drop, bool(rejoin), max_steps, uniform
            )
        except _StepLimit:
            raise _limit_error(max_steps, ep, p_sc, start + i) from None
    return n_qp, e_qp, e_subgap, e_electron, steps


def sample_many(kind, w, n, bitgen):
    """``n`` successive draws of one sampler from a single stream."""
    uniform = _Uniform(bitgen)
    if kind == SAMPLE_PAIRBREAK:
        draw = pairbreak_draw
    elif kind == SAMPLE_QP_EMISSION:
        draw = qp_emission_draw
    elif kind == SAMPLE_ELECTRON_EMISSION:
        draw = electron_emission_draw
    else:
        raise ValueError(f"unknown sampler kind {kind}")
    return np.array([draw(w, uniform) for _ in range(n)], dtype=float)
