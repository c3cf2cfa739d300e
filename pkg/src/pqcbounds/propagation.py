"""Heisenberg-picture propagation of Pauli strings at Clifford parameter points.

At every parameter value that is a multiple of pi/2 the circuit is Clifford, so
``U(theta)^dagger P U(theta)`` is again a signed Pauli string. Assignments are
integer arrays of *quarter turns* (``theta = turns * pi / 2``); the discrete
uniform distribution over ``{0, pi/2}^m`` uses only turns 0 and 1, while
parameter-shifted points also need 2 and 3.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from ._kernels_py import OP_CNOT, OP_CZ, OP_H, OP_ROT, OP_S, OP_SWAP
from .circuit import Gate, ParameterizedCircuit, ProductState
from .errors import DimensionError, DomainError
from .pauli import PauliString

__all__ = [
    "DomainError",
    "PropagatedFrame",
    "CompiledCircuit",
    "to_turns",
    "conjugate_gate",
    "propagate",
    "loss_value_at_clifford_point",
    "full_cone",
    "full_cone_formula",
    "depth_cone_bound",
    "local_cone_bound",
    "cone_lower_bound",
]

_OPCODES = {"H": OP_H, "S": OP_S, "CNOT": OP_CNOT, "CZ": OP_CZ, "SWAP": OP_SWAP}


def to_turns(theta, atol: float = 1e-12) -> np.ndarray:
    """Convert an assignment to quarter turns modulo 4.

    Integer arrays are taken as quarter turns already (so 0/1 bit vectors are
    points of ``{0, pi/2}^m``); float arrays are angles and must be multiples of
    ``pi/2`` within ``atol``.
    """
    arr = np.asarray(theta)
    if arr.dtype.kind in "iub":
        return (arr.astype(np.int64) % 4).astype(np.uint8)
    q = arr / (math.pi / 2)
    r = np.rint(q)
    if np.any(np.abs(q - r) > atol):
        raise DomainError(
            "rotation angles must be multiples of pi/2 for Clifford propagation; "
            "use the dense oracle for continuous angles"
        )
    return (r.astype(np.int64) % 4).astype(np.uint8)


def _turn(value) -> int:
    return int(to_turns(np.asarray([value]))[0])


@dataclass(frozen=True)
class PropagatedFrame:
    """The propagated Pauli ``U^dagger P U`` (sign included) and its light-cone."""

    pauli: PauliString

    def __post_init__(self) -> None:
        if not self.pauli.is_hermitian:
            raise AssertionError(f"propagated Pauli lost Hermiticity: {self.pauli}")

    @property
    def cone(self) -> int:
        return self.pauli.weight

    @property
    def sign(self) -> int:
        return self.pauli.sign


def conjugate_gate(p: PauliString, g: Gate, theta=None) -> PauliString:
    """Return ``g^dagger p g`` exactly.

    ``theta`` is required for rotations and must be a multiple of pi/2 (a
    float angle, or an integer number of quarter turns). For an anticommuting
    generator ``G`` a quarter turn gives ``i G p``, a half turn ``-p`` and three
    quarters ``-i G p``; commuting generators leave ``p`` unchanged.
    """
    if any(q >= p.n for q in g.qubits):
        raise DimensionError(f"gate on {g.qubits} does not fit {p.n} qubits")
    if g.is_rotation:
        if theta is None:
            raise DomainError("rotation gates need a parameter value")
        t = _turn(theta)
        gen = g.generator_pauli(p.n)
        if t == 0 or gen.commutes(p):
            return p
        if t == 2:
            return -p
        gp = gen * p
        return PauliString(p.n, gp.x, gp.z, gp.phase + (1 if t == 1 else 3))
    if g.kind not in _OPCODES:
        raise DomainError(f"{g.kind} is not a Clifford gate; Clifford propagation is undefined")
    x, z, ph = p.x, p.z, p.phase
    a = g.qubits[0]
    xa, za = x >> a & 1, z >> a & 1
    if g.kind == "H":
        ph += 2 * (xa & za)
        x = (x & ~(1 << a)) | (za << a)
        z = (z & ~(1 << a)) | (xa << a)
    elif g.kind == "S":
        ph += 2 * (xa & (za ^ 1))
        z ^= xa << a
    else:
        b = g.qubits[1]
        xb, zb = x >> b & 1, z >> b & 1
        if g.kind == "CNOT":
            ph += 2 * (xa & zb & (xb ^ za ^ 1))
            x ^= xa << b
            z ^= zb << a
        elif g.kind == "CZ":
            ph += 2 * (xa & xb & (za ^ zb))
            z ^= (xb << a) | (xa << b)
        else:  # SWAP
            x = (x & ~((1 << a) | (1 << b))) | (xa << b) | (xb << a)
            z = (z & ~((1 << a) | (1 << b))) | (za << b) | (zb << a)
    return PauliString(p.n, x, z, ph)


def propagate(
    c: ParameterizedCircuit, theta, p: PauliString, start: int = 0
) -> PropagatedFrame:
    """Propagate ``p`` backwards through ``c.gates[start:]`` at a Clifford point.

    ``start`` skips the first gates in time order; ``start = 2 * n`` propagates
    through everything after the two initial rotation layers only.
    """
    if p.n != c.n:
        raise DimensionError(f"observable on {p.n} qubits, circuit on {c.n}")
    turns = to_turns(theta)
    if turns.shape != (c.m,):
        raise ValueError(f"assignment has shape {turns.shape}, expected ({c.m},)")
    for g in reversed(c.gates[start:]):
        p = conjugate_gate(p, g, int(turns[g.param_index]) if g.is_rotation else None)
    return PropagatedFrame(p)


def loss_value_at_clifford_point(frame: PropagatedFrame, rho: ProductState) -> float:
    """``sign * prod_i Tr(sigma_i rho_i)`` over the support of the frame."""
    p = frame.pauli
    if p.n != rho.n:
        raise DimensionError(f"frame on {p.n} qubits, state on {rho.n}")
    val = float(p.sign)
    for q in p.support:
        val *= rho.component(q, p.site(q))
    return val


# batched path --------------------------------------------------------------

def _to_words(mask: int, n_words: int) -> np.ndarray:
    return np.array([(mask >> (64 * w)) & 0xFFFFFFFFFFFFFFFF for w in range(n_words)], dtype=np.uint64)


def _from_words(words: np.ndarray) -> int:
    return sum(int(v) << (64 * i) for i, v in enumerate(words))


class CompiledCircuit:
    """Circuit lowered to the flat op arrays used by the batched kernels."""

    def __init__(self, c: ParameterizedCircuit, start: int = 0):
        self.circuit = c
        self.start = start
        self.n_words = max(1, -(-c.n // 64))
        gates = list(reversed(c.gates[start:]))
        G, W = len(gates), self.n_words
        self.kinds = np.zeros(G, dtype=np.int32)
        self.q0 = np.zeros(G, dtype=np.int32)
        self.q1 = np.zeros(G, dtype=np.int32)
        self.pidx = np.zeros(G, dtype=np.int32)
        self.gx = np.zeros((G, W), dtype=np.uint64)
        self.gz = np.zeros((G, W), dtype=np.uint64)
        for i, g in enumerate(gates):
            if g.is_rotation:
                gen = g.generator_pauli(c.n)
                self.kinds[i] = OP_ROT
                self.pidx[i] = g.param_index
                self.gx[i] = _to_words(gen.x, W)
                self.gz[i] = _to_words(gen.z, W)
            elif g.kind in _OPCODES:
                self.kinds[i] = _OPCODES[g.kind]
                self.q0[i] = g.qubits[0]
                if len(g.qubits) > 1:
                    self.q1[i] = g.qubits[1]
            else:
                raise DomainError(f"{g.kind} is not a Clifford gate; Clifford propagation is undefined")

    def propagate(self, turns: np.ndarray, p: PauliString):
        """Return ``(x, z, phase)`` word arrays for every row of ``turns``."""
        if p.n != self.circuit.n:
            raise DimensionError(f"observable on {p.n} qubits, circuit on {self.circuit.n}")
        turns = np.asarray(turns)
        if turns.ndim != 2 or turns.shape[1] != self.circuit.m:
            raise ValueError(f"turns must have shape (B, {self.circuit.m})")
        turns = (turns.astype(np.int64) % 4).astype(np.uint8)
        W = self.n_words
        return kernels.propagate_batch(
            self.kinds, self.q0, self.q1, self.pidx, self.gx, self.gz,
            _to_words(p.x, W), _to_words(p.z, W), p.phase, turns,
        )

    def frames(self, turns: np.ndarray, p: PauliString) -> list[PropagatedFrame]:
        x, z, ph = self.propagate(turns, p)
        n = self.circuit.n
        return [
            PropagatedFrame(PauliString(n, _from_words(x[i]), _from_words(z[i]), int(ph[i])))
            for i in range(len(ph))
        ]

    def loss_and_cone(self, turns: np.ndarray, p: PauliString, rho: ProductState):
        """Per-sample Clifford-point loss and light-cone size."""
        x, z, ph = self.propagate(turns, p)
        if np.any(ph & 1):
            raise AssertionError("propagated Pauli lost Hermiticity")
        return kernels.loss_batch(x, z, ph, rho.bloch), kernels.cone_batch(x, z)


# light-cone utilities ------------------------------------------------------

def full_cone(c: ParameterizedCircuit, p: PauliString, n_probe: int = 256, seed=0) -> int:
    """Union of light-cone supports over probed assignments.

    Probes the all-0 and all-pi/2 corners plus ``n_probe`` random points of
    ``{0, pi/2}^m``; exhaustive when ``2**m <= n_probe``.
    """
    if c.m <= 20 and (1 << c.m) <= n_probe + 2:
        idx = np.arange(1 << c.m, dtype=np.int64)
        turns = ((idx[:, None] >> np.arange(c.m)) & 1).astype(np.uint8)
    else:
        rng = np.random.default_rng(seed)
        turns = np.vstack([
            np.zeros((1, c.m), dtype=np.uint8),
            np.ones((1, c.m), dtype=np.uint8),
            rng.integers(0, 2, size=(n_probe, c.m), dtype=np.uint8),
        ])
    x, z, _ = CompiledCircuit(c).propagate(turns, p)
    union = np.bitwise_or.reduce(x | z, axis=0)
    return bin(_from_words(union)).count("1")


def full_cone_formula(n: int, k: int, depth: int) -> int:
    """``min(n, 2*floor(k/2) + 2*depth)`` for a contiguous weight-``k`` string at the edge.

    Never smaller than ``k``: without entangling layers the cone is the string itself.
    """
    return min(n, max(k, 2 * (k // 2) + 2 * depth))


def depth_cone_bound(k: int, depth: int) -> int:
    """Light-cone bound ``k + 4 k d`` for weight-``k`` strings under pairwise entanglement."""
    return k + 4 * k * depth


def local_cone_bound(k: int, depth: int) -> int:
    """Light-cone bound ``k + 4 d`` for topologically local (contiguous) strings."""
    return k + 4 * depth


def cone_lower_bound(cone_bound: int, coeff: float = 1.0, omega: float = 1.0) -> float:
    """``coeff**2 * omega * (1/4)**cone_bound``: variance floor from a light-cone bound."""
    return coeff * coeff * omega * 0.25 ** cone_bound


def heisenberg_matrix(c: ParameterizedCircuit, theta: Sequence[float], p: PauliString) -> np.ndarray:
    """Dense ``U(theta)^dagger P U(theta)`` for small circuits (testing aid)."""
    from .oracle import circuit_unitary

    u = circuit_unitary(c, np.asarray(theta, dtype=float))
    return u.conj().T @ p.to_matrix() @ u

