"""Vectorised numpy implementation of the batched Clifford-point kernels.

This module mirrors ``_kernels.pyx`` exactly and is used when the compiled
extension is unavailable. Pauli strings are stored as ``(B, W)`` arrays of
``uint64`` words (qubit ``q`` lives in word ``q // 64``, bit ``q % 64``) plus a
``(B,)`` phase array counting powers of ``i`` modulo 4.

Gate ops are given in *Heisenberg order* (last gate of the circuit first):

========  ====  ===========================================
code      kind  operands
========  ====  ===========================================
0         H     ``q0``
1         S     ``q0``
2         CNOT  ``q0`` control, ``q1`` target
3         CZ    ``q0``, ``q1``
4         SWAP  ``q0``, ``q1``
5         ROT   generator words ``gx[i], gz[i]``, ``pidx[i]``
========  ====  ===========================================
"""
from __future__ import annotations

import numpy as np

OP_H, OP_S, OP_CNOT, OP_CZ, OP_SWAP, OP_ROT = range(6)

_ONE = np.uint64(1)


def _bit(words: np.ndarray, q: int) -> np.ndarray:
    return (words[:, q >> 6] >> np.uint64(q & 63)) & _ONE


def _set(words: np.ndarray, q: int, value: np.ndarray) -> None:
    w, b = q >> 6, np.uint64(q & 63)
    words[:, w] = (words[:, w] & ~(_ONE << b)) | (value << b)


def _popcount_rows(words: np.ndarray) -> np.ndarray:
    return np.bitwise_count(words).sum(axis=1, dtype=np.int64)


def propagate_batch(kinds, q0, q1, pidx, gx, gz, x0, z0, phase0, turns):
    """Conjugate one Pauli through the op list for each row of ``turns``.

    Parameters
    ----------
    kinds, q0, q1, pidx : (G,) int arrays
    gx, gz : (G, W) uint64 arrays
        Rotation generator masks (ignored for Clifford ops).
    x0, z0 : (W,) uint64 arrays
        Input Pauli masks, shared by every sample.
    phase0 : int
    turns : (B, m) integer array of quarter turns.

    Returns
    -------
    x, z : (B, W) uint64 arrays
    phase : (B,) uint8 array
    """
    turns = np.asarray(turns)
    B = turns.shape[0]
    x = np.tile(np.asarray(x0, dtype=np.uint64), (B, 1))
    z = np.tile(np.asarray(z0, dtype=np.uint64), (B, 1))
    phase = np.full(B, phase0 % 4, dtype=np.int64)
    for i in range(len(kinds)):
        k = kinds[i]
        if k == OP_ROT:
            t = turns[:, pidx[i]].astype(np.int64) & 3
            gxi = gx[i]
            gzi = gz[i]
            anti = (_popcount_rows((gxi & z) ^ (gzi & x)) & 1).astype(bool)
            flip = anti & (t == 2)
            phase[flip] += 2
            act = anti & (t & 1).astype(bool)
            if act.any():
                ax, az = x[act], z[act]
                # product phase of G * p, with G = gx/gz and p = ax/az
                g_x = gxi & ~gzi
                g_y = gxi & gzi
                g_z = gzi & ~gxi
                p_x = ax & ~az
                p_y = ax & az
                p_z = az & ~ax
                plus = (g_x & p_y) | (g_y & p_z) | (g_z & p_x)
                minus = (g_y & p_x) | (g_z & p_y) | (g_x & p_z)
                pp = _popcount_rows(plus) - _popcount_rows(minus)
                # t == 1 gives i G p, t == 3 gives -i G p
                extra = np.where(t[act] == 1, 1, 3)
                phase[act] += pp + extra
                x[act] = ax ^ gxi
                z[act] = az ^ gzi
        elif k == OP_H:
            a = q0[i]
            xb, zb = _bit(x, a), _bit(z, a)
            phase += 2 * (xb & zb).astype(np.int64)
            _set(x, a, zb)
            _set(z, a, xb)
        elif k == OP_S:
            a = q0[i]
            xb, zb = _bit(x, a), _bit(z, a)
            phase += 2 * (xb & (zb ^ _ONE)).astype(np.int64)
            _set(z, a, zb ^ xb)
        elif k == OP_CNOT:
            c, tq = q0[i], q1[i]
            xc, zc, xt, zt = _bit(x, c), _bit(z, c), _bit(x, tq), _bit(z, tq)
            phase += 2 * (xc & zt & (xt ^ zc ^ _ONE)).astype(np.int64)
            _set(x, tq, xt ^ xc)
            _set(z, c, zc ^ zt)
        elif k == OP_CZ:
            a, b = q0[i], q1[i]
            xa, za, xb, zb = _bit(x, a), _bit(z, a), _bit(x, b), _bit(z, b)
            phase += 2 * (xa & xb & (za ^ zb)).astype(np.int64)
            _set(z, a, za ^ xb)
            _set(z, b, zb ^ xa)
        elif k == OP_SWAP:
            a, b = q0[i], q1[i]
            xa, za, xb, zb = _bit(x, a), _bit(z, a), _bit(x, b), _bit(z, b)
            _set(x, a, xb)
            _set(x, b, xa)
            _set(z, a, zb)
            _set(z, b, za)
        else:
            raise ValueError(f"unknown op code {k}")
    return x, z, (phase & 3).astype(np.uint8)


def loss_batch(x, z, phase, bloch):
    """``sign * prod_q r_{q, P_q}`` for each propagated row (identity sites give 1)."""
    x = np.asarray(x, dtype=np.uint64)
    z = np.asarray(z, dtype=np.uint64)
    bloch = np.asarray(bloch, dtype=float)
    out = np.where(np.asarray(phase) == 2, -1.0, 1.0)
    for q in range(bloch.shape[0]):
        xb = _bit(x, q).astype(bool)
        zb = _bit(z, q).astype(bool)
        fac = np.where(xb, np.where(zb, bloch[q, 1], bloch[q, 0]), np.where(zb, bloch[q, 2], 1.0))
        out *= fac
    return out


def cone_batch(x, z):
    return _popcount_rows(np.asarray(x, dtype=np.uint64) | np.asarray(z, dtype=np.uint64))
