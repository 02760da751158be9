# cython: language_level=3
# cython: boundscheck=False
# cython: wraparound=False
# cython: initializedcheck=False
# cython: cdivision=True
"""Compiled twin of the pure-Python run loop in _kernels_py.

Bit-identical output is a hard requirement, not an aspiration. Every
floating-point expression here mirrors the Python modules operation for
operation: the max-normalized mixture, the sequential running sums, the
exponent layouts, libm transcendentals for exp/log/sqrt, and uniforms
pulled one at a time from the shared PCG64 stream in the documented order.
setup.py compiles with -ffp-contract=off so no FMA contraction can change
a rounding. Do not reorder arithmetic here without re-running the parity
tests.
"""

from cpython.pycapsule cimport PyCapsule_GetPointer
from libc.math cimport exp, log, sqrt

import numpy as np

from numpy.random cimport bitgen_t

cdef double E_CONST = 2.718281828459045
cdef double GAMMA_CAP = 0.5
cdef double RENORM_UPPER = 1e100
cdef double RENORM_LOWER = 1e-100

cdef int POLICY_REX3 = 0
cdef int POLICY_SPARRING = 1
cdef int POLICY_RANDOM = 2

cdef int ENV_MATRIX = 0
cdef int ENV_UTILITY = 1
cdef int ENV_ADVERSARIAL = 2
cdef int ENV_DRIFT = 3


cdef inline double next_u(bitgen_t *bg) noexcept nogil:
    return bg.next_double(bg.state)


cdef inline double max_weight(double *w, int k) noexcept nogil:
    cdef double m = w[0]
    cdef int i
    for i in range(1, k):
        if w[i] > m:
            m = w[i]
    return m


cdef inline void mixture(double *w, int k, double gamma, double *p) noexcept nogil:
    # p = (1-gamma) * (v/total) + gamma/k with v = w/max(w), total summed
    # left to right; identical roundings to the numpy elementwise version.
    cdef double m = max_weight(w, k)
    cdef double total = 0.0
    cdef double one_minus = 1.0 - gamma
    cdef double floor_term = gamma / k
    cdef int i
    for i in range(k):
        p[i] = w[i] / m
        total += p[i]
    for i in range(k):
        p[i] = one_minus * (p[i] / total) + floor_term


cdef inline int sample_arm(double *p, int k, double u) noexcept nogil:
    # First index whose running sum exceeds u; the partial sums equal
    # np.cumsum's, so this picks the same arm as the searchsorted path.
    cdef double acc = 0.0
    cdef int i
    for i in range(k):
        acc += p[i]
        if u < acc:
            return i
    return k - 1


cdef inline void renorm(double *w, int k) noexcept nogil:
    cdef double m = max_weight(w, k)
    cdef int i
    if m > RENORM_UPPER or m < RENORM_LOWER:
        for i in range(k):
            w[i] = w[i] / m


cdef inline void rex3_apply(double *w, double *p, int k, double gamma,
                            int a, int b, double psi) noexcept nogil:
    cdef double g_over_k = gamma / k
    if a != b:
        w[a] = w[a] * exp(g_over_k * psi / (2.0 * p[a]))
        w[b] = w[b] * exp(-(g_over_k * psi / (2.0 * p[b])))
        renorm(w, k)


cdef inline void exp3_apply(double *w, double *p, int k, double gamma_e,
                            int arm, double reward) noexcept nogil:
    w[arm] = w[arm] * exp(gamma_e * reward / (k * p[arm]))
    renorm(w, k)


cdef inline double adaptive_gamma(int k, long t, double gmax_div) noexcept nogil:
    cdef double tau_value = E_CONST * (t / gmax_div) - (4.0 - E_CONST) * 0.0
    cdef double g
    if tau_value <= 0.0:
        return GAMMA_CAP
    g = sqrt(k * log(<double> k) / tau_value)
    if g < GAMMA_CAP:
        return g
    return GAMMA_CAP


cdef inline double drift_amount(int k, long t) noexcept nogil:
    cdef double d = sqrt(k * log(<double> t) / t)
    if d < 0.5:
        return d
    return 0.5


def simulate(int policy_kind, double gamma0, int gamma_adaptive, double gmax_div,
             double gamma_e, int env_kind, int k, int istar,
             const double[:, ::1] matrix, const double[::1] mu,
             const double[:, ::1] rewards,
             long horizon, const long[::1] checkpoints, object bit_generator):
    """One full run; returns the checkpoint arrays and final state.

    Argument marshalling (kind codes, empty placeholder arrays) is owned by
    the dispatch wrapper; this function assumes validated inputs.
    """
    cdef bitgen_t *bg = <bitgen_t *> PyCapsule_GetPointer(
        bit_generator.capsule, "BitGenerator"
    )
    if bg == NULL:
        raise RuntimeError("bit generator capsule did not unwrap")

    w_arr = np.ones(k)
    wl_arr = np.ones(k)
    wr_arr = np.ones(k)
    cdef double[::1] w = w_arr
    cdef double[::1] wl = wl_arr
    cdef double[::1] wr = wr_arr
    cdef double[::1] p = np.empty(k)
    cdef double[::1] pl = np.empty(k)
    cdef double[::1] pr = np.empty(k)
    cdef double[::1] x = np.empty(k)

    cdef Py_ssize_t n_cp = checkpoints.shape[0]
    cp_regret = np.empty(n_cp)
    cp_a = np.empty(n_cp, dtype=np.int32)
    cp_b = np.empty(n_cp, dtype=np.int32)
    cp_hit = np.empty(n_cp, dtype=np.uint8)
    cp_hit_count = np.empty(n_cp, dtype=np.int64)
    cdef double[::1] creg_v = cp_regret
    cdef int[::1] a_v = cp_a
    cdef int[::1] b_v = cp_b
    cdef unsigned char[::1] hit_v = cp_hit
    cdef long[::1] hc_v = cp_hit_count

    cdef double *wp = &w[0]
    cdef double *wlp = &wl[0]
    cdef double *wrp = &wr[0]
    cdef double *pp = &p[0]
    cdef double *plp = &pl[0]
    cdef double *prp = &pr[0]
    cdef double *xp = &x[0]
    cdef const long *cps = &checkpoints[0]
    cdef const double *pm = NULL
    cdef const double *mup = NULL
    cdef const double *rp = NULL
    cdef const double *row
    if env_kind == ENV_MATRIX:
        pm = &matrix[0, 0]
    elif env_kind == ENV_UTILITY:
        mup = &mu[0]
    elif env_kind == ENV_ADVERSARIAL:
        rp = &rewards[0, 0]

    cdef long t, hits = 0
    cdef Py_ssize_t ci = 0
    cdef int a = 0, b = 0, i, hit
    cdef double gamma = gamma0
    cdef double creg = 0.0
    cdef double u, psi, regret, mu0, rl, rr

    with nogil:
        for t in range(1, horizon + 1):
            # 1. policy draws
            if policy_kind == POLICY_REX3:
                if gamma_adaptive:
                    gamma = adaptive_gamma(k, t, gmax_div)
                mixture(wp, k, gamma, pp)
                a = sample_arm(pp, k, next_u(bg))
                b = sample_arm(pp, k, next_u(bg))
            elif policy_kind == POLICY_SPARRING:
                mixture(wlp, k, gamma_e, plp)
                a = sample_arm(plp, k, next_u(bg))
                mixture(wrp, k, gamma_e, prp)
                b = sample_arm(prp, k, next_u(bg))
            else:
                u = next_u(bg)
                a = <int> (u * k)
                if a > k - 1:
                    a = k - 1
                u = next_u(bg)
                b = <int> (u * k)
                if b > k - 1:
                    b = k - 1

            # 2. environment draws and feedback
            if env_kind == ENV_MATRIX:
                u = next_u(bg)
                psi = 1.0 if u < pm[a * k + b] else -1.0
                regret = (pm[istar * k + a] + pm[istar * k + b] - 1.0) / 2.0
                hit = 1 if (a == istar and b == istar) else 0
            elif env_kind == ENV_ADVERSARIAL:
                row = rp + (t - 1) * k
                psi = row[a] - row[b]
                regret = (2.0 * row[istar] - row[a] - row[b]) / 2.0
                hit = 1 if (a == istar and b == istar) else 0
            else:
                if env_kind == ENV_DRIFT:
                    mu0 = 0.5 + drift_amount(k, t)
                    for i in range(k):
                        u = next_u(bg)
                        if i == 0:
                            xp[i] = 1.0 if u < mu0 else 0.0
                        else:
                            xp[i] = 1.0 if u < 0.5 else 0.0
                else:
                    for i in range(k):
                        u = next_u(bg)
                        xp[i] = 1.0 if u < mup[i] else 0.0
                psi = xp[a] - xp[b]
                regret = (2.0 * xp[istar] - xp[a] - xp[b]) / 2.0
                hit = 1 if (a == istar and b == istar) else 0

            # 3. update and bookkeeping, no draws
            if policy_kind == POLICY_REX3:
                rex3_apply(wp, pp, k, gamma, a, b, psi)
            elif policy_kind == POLICY_SPARRING:
                rl = (1.0 + psi) / 2.0
                rr = (1.0 - psi) / 2.0
                exp3_apply(wlp, plp, k, gamma_e, a, rl)
                exp3_apply(wrp, prp, k, gamma_e, b, rr)

            creg = creg + regret
            if hit:
                hits = hits + 1
            if ci < n_cp and t == cps[ci]:
                creg_v[ci] = creg
                a_v[ci] = a
                b_v[ci] = b
                hit_v[ci] = <unsigned char> hit
                hc_v[ci] = hits
                ci = ci + 1

    if policy_kind == POLICY_REX3:
        final_weights = w_arr
    elif policy_kind == POLICY_SPARRING:
        final_weights = np.concatenate([wl_arr, wr_arr])
    else:
        final_weights = None

    return {
        "cum_regret": cp_regret,
        "arm_a": cp_a,
        "arm_b": cp_b,
        "hits": cp_hit,
        "hit_counts": cp_hit_count,
        "final_regret": creg,
        "final_hits": int(hits),
        "final_weights": final_weights,
    }
