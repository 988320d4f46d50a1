# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernel backend: integer-exact strategy evaluation and
exhaustive Markov-encoder enumeration.

Mirrors ``_purepy`` but runs on int64 arrays; the Python wrapper in
``kernel/__init__`` guarantees the plan's integers fit.
"""

import numpy as np


cdef long long _eval_one(
    long long[::1] base,
    long long[:, ::1] enc_idx,
    long long[:, ::1] ych,
    long long[:, ::1] i1,
    long long[:, ::1] usym,
    long long[:, ::1] i2,
    long long[:, ::1] vsym,
    long long[::1] qys,
    long long[:, ::1] rho1s,
    long long[:, ::1] rho2s,
    long long[::1] n_i1,
    long long[::1] n_i2,
    long long[::1] off1,
    long long[::1] off2,
    long long[::1] digits,
    long long[::1] doffs,
    long long[::1] A1,
    long long[::1] A2,
    long long[::1] dec1,
    long long[::1] dec2,
    bint has_dec1,
    bint has_dec2,
    Py_ssize_t T,
    Py_ssize_t C,
    int nu,
    int nv,
    int ny,
    int nuh,
    int nvh,
) nogil:
    cdef Py_ssize_t j, t, g, u, v
    cdef long long w, cost, val, best
    cdef long long x
    cdef int uh, vh, cand
    cdef Py_ssize_t off

    for j in range(off1[T]):
        A1[j] = 0
    for j in range(off2[T]):
        A2[j] = 0

    for j in range(C):
        w = base[j]
        for t in range(T):
            x = digits[doffs[t] + enc_idx[t, j]]
            w *= qys[x * ny + ych[t, j]]
        for t in range(T):
            A1[off1[t] + i1[t, j] * nu + usym[t, j]] += w
            A2[off2[t] + i2[t, j] * nv + vsym[t, j]] += w

    cost = 0
    for t in range(T):
        for g in range(n_i1[t]):
            off = off1[t] + g * nu
            if has_dec1:
                uh = <int> dec1[off1[t] // nu + g]
            else:
                uh = 0
                best = -1
                for cand in range(nuh):
                    val = 0
                    for u in range(nu):
                        val += rho1s[t, u * nuh + cand] * A1[off + u]
                    if best < 0 or val < best:
                        best = val
                        uh = cand
            for u in range(nu):
                cost += rho1s[t, u * nuh + uh] * A1[off + u]
        for g in range(n_i2[t]):
            off = off2[t] + g * nv
            if has_dec2:
                vh = <int> dec2[off2[t] // nv + g]
            else:
                vh = 0
                best = -1
                for cand in range(nvh):
                    val = 0
                    for v in range(nv):
                        val += rho2s[t, v * nvh + cand] * A2[off + v]
                    if best < 0 or val < best:
                        best = val
                        vh = cand
            for v in range(nv):
                cost += rho2s[t, v * nvh + vh] * A2[off + v]
    return cost


def eval_cost_arrays(arrays, enc_idx_key, offs_key, digits, dec1=None, dec2=None):
    """Cost numerator for one strategy given plan arrays and flat digit
    tables (stage tables concatenated per the chosen offsets)."""
    base = arrays["base"]
    enc_idx = np.ascontiguousarray(arrays[enc_idx_key])
    T = enc_idx.shape[0]
    C = base.shape[0]
    dig = np.ascontiguousarray(digits, dtype=np.int64)
    A1 = np.zeros(int(arrays["off1"][T]), dtype=np.int64)
    A2 = np.zeros(int(arrays["off2"][T]), dtype=np.int64)
    empty = np.zeros(1, dtype=np.int64)
    d1 = np.ascontiguousarray(dec1, dtype=np.int64) if dec1 is not None else empty
    d2 = np.ascontiguousarray(dec2, dtype=np.int64) if dec2 is not None else empty
    return _eval_one(
        base,
        enc_idx,
        np.ascontiguousarray(arrays["ych"]),
        np.ascontiguousarray(arrays["i1"]),
        np.ascontiguousarray(arrays["usym"]),
        np.ascontiguousarray(arrays["i2"]),
        np.ascontiguousarray(arrays["vsym"]),
        arrays["qys"],
        np.ascontiguousarray(arrays["rho1s"]),
        np.ascontiguousarray(arrays["rho2s"]),
        arrays["n_i1"],
        arrays["n_i2"],
        arrays["off1"],
        arrays["off2"],
        dig,
        arrays[offs_key],
        A1,
        A2,
        d1,
        d2,
        dec1 is not None,
        dec2 is not None,
        T,
        C,
        int(arrays["nu"]),
        int(arrays["nv"]),
        int(arrays["ny"]),
        int(arrays["nuh"]),
        int(arrays["nvh"]),
    )


def enumerate_markov_arrays(arrays, prefix, int nx):
    """Exhaustive minimum over Markov encoder digit tables with MAP
    decoders; lexicographic iteration so the first minimizer is the
    lexicographically smallest.  Returns (best, best_digits, count)."""
    base = arrays["base"]
    cdef long long[::1] baseview = base
    enc_idx = np.ascontiguousarray(arrays["midx"])
    cdef long long[:, ::1] encview = enc_idx
    cdef long long[:, ::1] ych = np.ascontiguousarray(arrays["ych"])
    cdef long long[:, ::1] i1 = np.ascontiguousarray(arrays["i1"])
    cdef long long[:, ::1] usym = np.ascontiguousarray(arrays["usym"])
    cdef long long[:, ::1] i2 = np.ascontiguousarray(arrays["i2"])
    cdef long long[:, ::1] vsym = np.ascontiguousarray(arrays["vsym"])
    cdef long long[::1] qys = arrays["qys"]
    cdef long long[:, ::1] rho1s = np.ascontiguousarray(arrays["rho1s"])
    cdef long long[:, ::1] rho2s = np.ascontiguousarray(arrays["rho2s"])
    cdef long long[::1] n_i1 = arrays["n_i1"]
    cdef long long[::1] n_i2 = arrays["n_i2"]
    cdef long long[::1] off1 = arrays["off1"]
    cdef long long[::1] off2 = arrays["off2"]
    cdef long long[::1] doffs = arrays["doffs"]
    cdef Py_ssize_t T = enc_idx.shape[0]
    cdef Py_ssize_t C = base.shape[0]
    cdef int nu = <int> arrays["nu"]
    cdef int nv = <int> arrays["nv"]
    cdef int ny = <int> arrays["ny"]
    cdef int nuh = <int> arrays["nuh"]
    cdef int nvh = <int> arrays["nvh"]

    cdef Py_ssize_t D = doffs[T]
    cdef Py_ssize_t npre = len(prefix)
    digits_np = np.zeros(D, dtype=np.int64)
    digits_np[:npre] = np.asarray(prefix, dtype=np.int64)
    cdef long long[::1] digits = digits_np
    A1 = np.zeros(int(arrays["off1"][T]), dtype=np.int64)
    A2 = np.zeros(int(arrays["off2"][T]), dtype=np.int64)
    cdef long long[::1] a1view = A1
    cdef long long[::1] a2view = A2
    empty = np.zeros(1, dtype=np.int64)
    cdef long long[::1] eview = empty

    best_np = np.zeros(D, dtype=np.int64)
    cdef long long[::1] bestdig = best_np
    cdef long long best = -1
    cdef long long count = 0
    cdef long long cost
    cdef Py_ssize_t k, i

    with nogil:
        while True:
            cost = _eval_one(
                baseview, encview, ych, i1, usym, i2, vsym, qys,
                rho1s, rho2s, n_i1, n_i2, off1, off2,
                digits, doffs, a1view, a2view,
                eview, eview, False, False,
                T, C, nu, nv, ny, nuh, nvh,
            )
            count += 1
            if best < 0 or cost < best:
                best = cost
                for i in range(D):
                    bestdig[i] = digits[i]
            k = D - 1
            while k >= npre:
                digits[k] += 1
                if digits[k] < nx:
                    break
                digits[k] = 0
                k -= 1
            if k < npre:
                break

    return int(best), tuple(int(x) for x in best_np), int(count)
