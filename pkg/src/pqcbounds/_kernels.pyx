# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled batched Clifford-point kernels (see ``_kernels_py`` for the contract)."""
import numpy as np
cimport numpy as cnp
from libc.stdint cimport uint64_t, uint8_t, int64_t

cnp.import_array()

cdef extern from *:
    int __builtin_popcountll(unsigned long long) nogil

cdef enum:
    OP_H = 0
    OP_S = 1
    OP_CNOT = 2
    OP_CZ = 3
    OP_SWAP = 4
    OP_ROT = 5


cdef inline uint64_t getbit(const uint64_t* row, int q) noexcept nogil:
    return (row[q >> 6] >> (q & 63)) & 1


cdef inline void setbit(uint64_t* row, int q, uint64_t v) noexcept nogil:
    cdef uint64_t mask = (<uint64_t>1) << (q & 63)
    row[q >> 6] = (row[q >> 6] & ~mask) | (v << (q & 63))

cdef inline int _rot_phase(uint64_t gx, uint64_t gz, uint64_t px, uint64_t pz) noexcept nogil:
    """Exponent of i picked up by ``G * P`` beyond the Y factors (single word)."""
    return (__builtin_popcountll(((gx & ~gz) & (px & pz))
                                 | ((gx & gz) & (pz & ~px))
                                 | ((gz & ~gx) & (px & ~pz)))
            - __builtin_popcountll(((gx & gz) & (px & ~pz))
                                   | ((gz & ~gx) & (px & pz))
                                   | ((gx & ~gz) & (pz & ~px))))


cdef void _propagate_one_word(
    const int[::1] k_, const int[::1] a_, const int[::1] b_, const int[::1] p_,
    const uint64_t[:, ::1] gx_, const uint64_t[:, ::1] gz_, const uint8_t[:, ::1] t_,
    uint64_t x0, uint64_t z0, int phase0,
    uint64_t[:, ::1] X, uint64_t[:, ::1] Z, uint8_t[::1] P,
) noexcept nogil:
    """Specialisation for ``n <= 64``: the Pauli lives in two registers."""
    cdef Py_ssize_t B = t_.shape[0], G = k_.shape[0], s, i
    cdef uint64_t x, z, gx, gz, fmask, ba, bb, ma, mb
    cdef int t, anti, flip, kind
    cdef int64_t ph
    for s in range(B):
        x = x0
        z = z0
        ph = phase0
        for i in range(G):
            kind = k_[i]
            if kind == OP_ROT:
                t = t_[s, p_[i]] & 3
                gx = gx_[i, 0]
                gz = gz_[i, 0]
                anti = __builtin_popcountll((gx & z) ^ (gz & x)) & 1
                flip = anti & t & 1
                fmask = (<uint64_t>0) - <uint64_t>flip
                ph += flip * (_rot_phase(gx, gz, x, z) + t) + 2 * (anti & (t >> 1) & (~t & 1))
                x ^= gx & fmask
                z ^= gz & fmask
                continue
            ma = (<uint64_t>1) << a_[i]
            if kind == OP_H:
                ba = x & ma
                ph += 2 * ((ba & z) != 0)
                x = (x & ~ma) | (z & ma)
                z = (z & ~ma) | ba
            elif kind == OP_S:
                ph += 2 * ((x & ~z & ma) != 0)
                z ^= x & ma
            elif kind == OP_CNOT:
                mb = (<uint64_t>1) << b_[i]
                ph += 2 * (((x & ma) != 0) & ((z & mb) != 0) & (((x & mb) != 0) == ((z & ma) != 0)))
                if x & ma:
                    x ^= mb
                if z & mb:
                    z ^= ma
            elif kind == OP_CZ:
                mb = (<uint64_t>1) << b_[i]
                ba = (x & ma) != 0
                bb = (x & mb) != 0
                ph += 2 * (ba & bb & (((z & ma) != 0) ^ ((z & mb) != 0)))
                if bb:
                    z ^= ma
                if ba:
                    z ^= mb
            elif kind == OP_SWAP:
                mb = (<uint64_t>1) << b_[i]
                if ((x & ma) != 0) != ((x & mb) != 0):
                    x ^= ma | mb
                if ((z & ma) != 0) != ((z & mb) != 0):
                    z ^= ma | mb
        X[s, 0] = x
        Z[s, 0] = z
        P[s] = <uint8_t>(ph & 3)


def propagate_batch(kinds, q0, q1, pidx, gx, gz, x0, z0, int phase0, turns):
    cdef const int[::1] k_ = np.ascontiguousarray(kinds, dtype=np.int32)
    cdef const int[::1] a_ = np.ascontiguousarray(q0, dtype=np.int32)
    cdef const int[::1] b_ = np.ascontiguousarray(q1, dtype=np.int32)
    cdef const int[::1] p_ = np.ascontiguousarray(pidx, dtype=np.int32)
    cdef const uint64_t[:, ::1] gx_ = np.ascontiguousarray(gx, dtype=np.uint64)
    cdef const uint64_t[:, ::1] gz_ = np.ascontiguousarray(gz, dtype=np.uint64)
    cdef const uint8_t[:, ::1] t_ = np.ascontiguousarray(turns, dtype=np.uint8)
    cdef const uint64_t[::1] xin = np.ascontiguousarray(x0, dtype=np.uint64)
    cdef const uint64_t[::1] zin = np.ascontiguousarray(z0, dtype=np.uint64)
    cdef Py_ssize_t B = t_.shape[0]
    cdef Py_ssize_t W = xin.shape[0]
    cdef Py_ssize_t G = k_.shape[0]
    xo = np.empty((B, W), dtype=np.uint64)
    zo = np.empty((B, W), dtype=np.uint64)
    po = np.empty(B, dtype=np.uint8)
    cdef uint64_t[:, ::1] X = xo
    cdef uint64_t[:, ::1] Z = zo
    cdef uint8_t[::1] P = po
    cdef Py_ssize_t s, i, w
    cdef int kind, a, b, t, anti, plus, minus, flip
    cdef uint64_t fmask
    cdef int64_t ph
    cdef uint64_t xa, za, xb, zb, gxw, gzw, pxw, pzw
    cdef uint64_t* xr
    cdef uint64_t* zr
    if W == 1:
        with nogil:
            _propagate_one_word(k_, a_, b_, p_, gx_, gz_, t_, xin[0], zin[0], phase0, X, Z, P)
        return xo, zo, po
    with nogil:
        for s in range(B):
            xr = &X[s, 0]
            zr = &Z[s, 0]
            for w in range(W):
                xr[w] = xin[w]
                zr[w] = zin[w]
            ph = phase0
            for i in range(G):
                kind = k_[i]
                if kind == OP_ROT:
                    # branch-free: the quarter-turn count is random per sample
                    t = t_[s, p_[i]] & 3
                    anti = 0
                    plus = 0
                    minus = 0
                    for w in range(W):
                        gxw = gx_[i, w]
                        gzw = gz_[i, w]
                        pxw = xr[w]
                        pzw = zr[w]
                        anti += __builtin_popcountll((gxw & pzw) ^ (gzw & pxw))
                        plus += __builtin_popcountll(
                            ((gxw & ~gzw) & (pxw & pzw))
                            | ((gxw & gzw) & (pzw & ~pxw))
                            | ((gzw & ~gxw) & (pxw & ~pzw)))
                        minus += __builtin_popcountll(
                            ((gxw & gzw) & (pxw & ~pzw))
                            | ((gzw & ~gxw) & (pxw & pzw))
                            | ((gxw & ~gzw) & (pzw & ~pxw)))
                    anti &= 1
                    flip = anti & t & 1
                    fmask = (<uint64_t>0) - <uint64_t>flip
                    for w in range(W):
                        xr[w] ^= gx_[i, w] & fmask
                        zr[w] ^= gz_[i, w] & fmask
                    ph += flip * (plus - minus + t) + 2 * (anti & (t >> 1) & (~t & 1))
                elif kind == OP_H:
                    a = a_[i]
                    xa = getbit(xr, a)
                    za = getbit(zr, a)
                    ph += 2 * (xa & za)
                    setbit(xr, a, za)
                    setbit(zr, a, xa)
                elif kind == OP_S:
                    a = a_[i]
                    xa = getbit(xr, a)
                    za = getbit(zr, a)
                    ph += 2 * (xa & (za ^ 1))
                    setbit(zr, a, za ^ xa)
                elif kind == OP_CNOT:
                    a = a_[i]
                    b = b_[i]
                    xa = getbit(xr, a)
                    za = getbit(zr, a)
                    xb = getbit(xr, b)
                    zb = getbit(zr, b)
                    ph += 2 * (xa & zb & (xb ^ za ^ 1))
                    setbit(xr, b, xb ^ xa)
                    setbit(zr, a, za ^ zb)
                elif kind == OP_CZ:
                    a = a_[i]
                    b = b_[i]
                    xa = getbit(xr, a)
                    za = getbit(zr, a)
                    xb = getbit(xr, b)
                    zb = getbit(zr, b)
                    ph += 2 * (xa & xb & (za ^ zb))
                    setbit(zr, a, za ^ xb)
                    setbit(zr, b, zb ^ xa)
                elif kind == OP_SWAP:
                    a = a_[i]
                    b = b_[i]
                    xa = getbit(xr, a)
                    za = getbit(zr, a)
                    xb = getbit(xr, b)
                    zb = getbit(zr, b)
                    setbit(xr, a, xb)
                    setbit(xr, b, xa)
                    setbit(zr, a, zb)
                    setbit(zr, b, za)
            P[s] = <uint8_t>(ph & 3)
    return xo, zo, po


def loss_batch(x, z, phase, bloch):
    cdef const uint64_t[:, ::1] X = np.ascontiguousarray(x, dtype=np.uint64)
    cdef const uint64_t[:, ::1] Z = np.ascontiguousarray(z, dtype=np.uint64)
    cdef const uint8_t[::1] P = np.ascontiguousarray(phase, dtype=np.uint8)
    cdef const double[:, ::1] R = np.ascontiguousarray(bloch, dtype=np.float64)
    cdef Py_ssize_t B = X.shape[0], n = R.shape[0], s, q
    out = np.empty(B, dtype=np.float64)
    cdef double[::1] O = out
    cdef double v
    cdef uint64_t xb, zb
    with nogil:
        for s in range(B):
            v = -1.0 if P[s] == 2 else 1.0
            for q in range(n):
                xb = (X[s, q >> 6] >> (q & 63)) & 1
                zb = (Z[s, q >> 6] >> (q & 63)) & 1
                if xb and zb:
                    v *= R[q, 1]
                elif xb:
                    v *= R[q, 0]
                elif zb:
                    v *= R[q, 2]
                if v == 0.0:
                    break
            O[s] = v
    return out


def cone_batch(x, z):
    cdef const uint64_t[:, ::1] X = np.ascontiguousarray(x, dtype=np.uint64)
    cdef const uint64_t[:, ::1] Z = np.ascontiguousarray(z, dtype=np.uint64)
    cdef Py_ssize_t B = X.shape[0], W = X.shape[1], s, w
    out = np.zeros(B, dtype=np.int64)
    cdef int64_t[::1] O = out
    with nogil:
        for s in range(B):
            for w in range(W):
                O[s] += __builtin_popcountll(X[s, w] | Z[s, w])
    return out
