# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled cascade kernel.

Same algorithm, draw order and arithmetic as ``_pykernel.py``; the trial
loop runs without the GIL so blocks can execute on several threads.
"""
import numpy as np
cimport numpy as cnp
from cpython.pycapsule cimport PyCapsule_GetPointer, PyCapsule_IsValid
from libc.math cimport cos, sqrt, pow, M_PI
from libc.stdlib cimport malloc, realloc, free
from libc.stdint cimport int64_t
from numpy.random cimport bitgen_t

from ..errors import CascadeLimitError

cnp.import_array()

BACKEND = "cython"

cdef enum:
    PHONON = 0
    QP = 1
    ELECTRON = 2
    PHONON_NORMAL = 3

SAMPLE_PAIRBREAK = 0
SAMPLE_QP_EMISSION = 1
SAMPLE_ELECTRON_EMISSION = 2

cdef double ONE_THIRD = 1.0 / 3.0
cdef double EIGHT_FIFTEENTHS = 8.0 / 15.0
cdef double SQRT2 = sqrt(2.0)


cdef inline double next_uniform(bitgen_t *rng) noexcept nogil:
    return rng.next_double(rng.state)


cdef bitgen_t *_bitgen_ptr(object bitgen) except NULL:
    capsule = bitgen.capsule
    if not PyCapsule_IsValid(capsule, b"BitGenerator"):
        raise ValueError("not a numpy BitGenerator")
    return <bitgen_t *> PyCapsule_GetPointer(capsule, b"BitGenerator")


cdef double pairbreak_draw(double w, bitgen_t *rng) noexcept nogil:
    cdef double span = w - 2.0
    cdef double bound = (0.25 * w * w + 1.0) / (0.5 * w + 1.0)
    cdef double c, s, sp, h
    while True:
        c = cos(M_PI * next_uniform(rng))
        s = 0.5 * span * (1.0 - c)
        sp = span - s
        h = ((1.0 + s) * (1.0 + sp) + 1.0) / sqrt((2.0 + s) * (2.0 + sp))
        if next_uniform(rng) * bound <= h:
            return 1.0 + s


cdef double qp_emission_draw(double w, bitgen_t *rng) noexcept nogil:
    cdef double span = w - 1.0
    cdef double top = sqrt(span)
    cdef double a = span / SQRT2
    cdef double b = w
    cdef double w1 = a * EIGHT_FIFTEENTHS * span * span * top
    cdef double w2 = b * span * span * span / 6.0
    cdef double tau, q, t, t2, g, v
    while True:
        if next_uniform(rng) * (w1 + w2) < w1:
            while True:
                tau = next_uniform(rng)
                q = 1.0 - tau * tau
                if next_uniform(rng) <= q * q:
                    break
            t = tau * top
        else:
            v = span - span * pow(next_uniform(rng), ONE_THIRD)
            if v < 0.0:
                v = 0.0
            t = sqrt(v)
        t2 = t * t
        g = (w * (1.0 + t2) - 1.0) / sqrt(2.0 + t2)
        if next_uniform(rng) * (a + b * t) <= g:
            return 1.0 + t2


cdef inline double electron_emission_draw(double e, bitgen_t *rng) noexcept nogil:
    return e - e * pow(next_uniform(rng), ONE_THIRD)


cdef struct Stack:
    int *kinds
    double *energies
    Py_ssize_t size
    Py_ssize_t capacity


cdef int push(Stack *st, int kind, double e) noexcept nogil:
    cdef Py_ssize_t cap
    cdef int *k
    cdef double *en
    if st.size == st.capacity:
        cap = 2 * st.capacity
        k = <int *> realloc(st.kinds, cap * sizeof(int))
        if k == NULL:
            return -1
        st.kinds = k
        en = <double *> realloc(st.energies, cap * sizeof(double))
        if en == NULL:
            return -1
        st.energies = en
        st.capacity = cap
    st.kinds[st.size] = kind
    st.energies[st.size] = e
    st.size += 1
    return 0


cdef struct Tally:
    int64_t n_qp
    double e_qp
    double e_subgap
    double e_electron
    int64_t steps


# Returns 0 on success, 1 when the step cap is hit, -1 on allocation failure.
cdef int run_trial(double ep, double p_sc, double freeze, double drop, bint rejoin,
                   int64_t max_steps, bitgen_t *rng, Stack *st, Tally *out) noexcept nogil:
    cdef int kind
    cdef double e, e1
    cdef bint superconductor
    cdef int electron_phonon = PHONON if rejoin else PHONON_NORMAL
    out.n_qp = 0
    out.e_qp = 0.0
    out.e_subgap = 0.0
    out.e_electron = 0.0
    out.steps = 0
    st.size = 0
    if push(st, PHONON, ep) != 0:
        return -1
    while st.size > 0:
        out.steps += 1
        if out.steps > max_steps:
            return 1
        st.size -= 1
        kind = st.kinds[st.size]
        e = st.energies[st.size]
        if kind == PHONON or kind == PHONON_NORMAL:
            if e <= 2.0:
                out.e_subgap += e
                continue
            if kind == PHONON_NORMAL:
                superconductor = False
            elif p_sc >= 1.0:
                superconductor = True
            elif p_sc <= 0.0:
                superconductor = False
            else:
                superconductor = next_uniform(rng) < p_sc
            if superconductor:
                e1 = pairbreak_draw(e, rng)
                if push(st, QP, e1) != 0 or push(st, QP, e - e1) != 0:
                    return -1
            else:
                e1 = e * next_uniform(rng)
                if push(st, ELECTRON, e1) != 0 or push(st, ELECTRON, e - e1) != 0:
                    return -1
        elif kind == QP:
            if e < freeze:
                out.n_qp += 1
                out.e_qp += e
                continue
            e1 = qp_emission_draw(e, rng)
            if push(st, PHONON, e - e1) != 0 or push(st, QP, e1) != 0:
                return -1
        else:
            if e <= drop:
                out.e_electron += e
                continue
            e1 = electron_emission_draw(e, rng)
            if push(st, electron_phonon, e - e1) != 0 or push(st, ELECTRON, e1) != 0:
                return -1
    return 0


def run_block(list bitgens, double ep, double p_sc, double freeze, double drop,
              bint rejoin, int64_t max_steps, bint owned=True):
    """Run one trial per bit generator; returns per-trial tally arrays.

    ``owned`` is accepted for interface parity; draws are never read ahead.
    """
    cdef Py_ssize_t n = len(bitgens)
    cdef Py_ssize_t i, failed = -1
    cdef int status = 0
    cdef bitgen_t **rngs = <bitgen_t **> malloc(max(n, 1) * sizeof(bitgen_t *))
    cdef Stack st
    cdef Tally tally
    if rngs == NULL:
        raise MemoryError()
    n_qp_arr = np.zeros(n, dtype=np.int64)
    e_qp_arr = np.zeros(n)
    e_subgap_arr = np.zeros(n)
    e_electron_arr = np.zeros(n)
    steps_arr = np.zeros(n, dtype=np.int64)
    cdef int64_t[::1] n_qp = n_qp_arr
    cdef double[::1] e_qp = e_qp_arr
    cdef double[::1] e_subgap = e_subgap_arr
    cdef double[::1] e_electron = e_electron_arr
    cdef int64_t[::1] steps = steps_arr
    st.capacity = 64
    st.size = 0
    st.kinds = <int *> malloc(st.capacity * sizeof(int))
    st.energies = <double *> malloc(st.capacity * sizeof(double))
    try:
        if st.kinds == NULL or st.energies == NULL:
            raise MemoryError()
        for i in range(n):
            rngs[i] = _bitgen_ptr(bitgens[i])
        with nogil:
            for i in range(n):
                status = run_trial(ep, p_sc, freeze, drop, rejoin, max_steps, rngs[i], &st, &tally)
                if status != 0:
                    failed = i
                    break
                n_qp[i] = tally.n_qp
                e_qp[i] = tally.e_qp
                e_subgap[i] = tally.e_subgap
                e_electron[i] = tally.e_electron
                steps[i] = tally.steps
    finally:
        free(rngs)
        free(st.kinds)
        free(st.energies)
    if status == -1:
        raise MemoryError("cascade stack allocation failed")
    if status == 1:
        raise CascadeLimitError(
            f"cascade exceeded {max_steps} steps (E_p/Δ={ep}, participation={p_sc}, trial {failed})"
        )
    return n_qp_arr, e_qp_arr, e_subgap_arr, e_electron_arr, steps_arr


def run_seeded(seed, Py_ssize_t start, Py_ssize_t stop, double ep, double p_sc, double freeze,
               double drop, bint rejoin, int64_t max_steps):
    """Trials ``start..stop-1`` on the streams keyed (seed, trial).

    One Philox generator is re-keyed per trial, which is much cheaper than
    constructing a new one and yields the same draws.
    """
    cdef Py_ssize_t n = max(stop - start, 0)
    cdef Py_ssize_t i
    cdef int status = 0
    cdef Stack st
    cdef Tally tally
    bitgen = np.random.Philox(key=int(seed) + (int(start) << 64))
    state = bitgen.state
    key = state["state"]["key"]
    cdef bitgen_t *rng = _bitgen_ptr(bitgen)
    n_qp_arr = np.zeros(n, dtype=np.int64)
    e_qp_arr = np.zeros(n)
    e_subgap_arr = np.zeros(n)
    e_electron_arr = np.zeros(n)
    steps_arr = np.zeros(n, dtype=np.int64)
    cdef int64_t[::1] n_qp = n_qp_arr
    cdef double[::1] e_qp = e_qp_arr
    cdef double[::1] e_subgap = e_subgap_arr
    cdef double[::1] e_electron = e_electron_arr
    cdef int64_t[::1] steps = steps_arr
    st.capacity = 64
    st.size = 0
    st.kinds = <int *> malloc(st.capacity * sizeof(int))
    st.energies = <double *> malloc(st.capacity * sizeof(double))
    try:
        if st.kinds == NULL or st.energies == NULL:
            raise MemoryError()
        for i in range(n):
            key[1] = start + i
            bitgen.state = state
            with nogil:
                status = run_trial(ep, p_sc, freeze, drop, rejoin, max_steps, rng, &st, &tally)
            if status != 0:
                break
            n_qp[i] = tally.n_qp
            e_qp[i] = tally.e_qp
            e_subgap[i] = tally.e_subgap
            e_electron[i] = tally.e_electron
            steps[i] = tally.steps
    finally:
        free(st.kinds)
        free(st.energies)
    if status == -1:
        raise MemoryError("cascade stack allocation failed")
    if status == 1:
        raise CascadeLimitError(
            f"cascade exceeded {max_steps} steps (E_p/Δ={ep}, participation={p_sc}, trial {start + i})"
        )
    return n_qp_arr, e_qp_arr, e_subgap_arr, e_electron_arr, steps_arr


def sample_many(int kind, double w, Py_ssize_t n, object bitgen):
    """``n`` successive draws of one sampler from a single stream."""
    cdef bitgen_t *rng = _bitgen_ptr(bitgen)
    out = np.empty(n)
    cdef double[::1] view = out
    cdef Py_ssize_t i
    if kind not in (SAMPLE_PAIRBREAK, SAMPLE_QP_EMISSION, SAMPLE_ELECTRON_EMISSION):
        raise ValueError(f"unknown sampler kind {kind}")
    with bitgen.lock, nogil:
        for i in range(n):
            if kind == 0:
                view[i] = pairbreak_draw(w, rng)
            elif kind == 1:
                view[i] = qp_emission_draw(w, rng)
            else:
                view[i] = electron_emission_draw(w, rng)
    return out
