"""Random instances shared by the test modules."""
from __future__ import annotations

import numpy as np

from pqcbounds.circuit import Gate, ParameterizedCircuit, ProductState
from pqcbounds.pauli import Observable, PauliString

AXES = ("X", "Y", "Z")
CLIFFORDS = ("H", "S", "CNOT", "CZ", "SWAP")


def random_clifford(rng: np.random.Generator, n: int) -> Gate:
    kind = CLIFFORDS[rng.integers(len(CLIFFORDS))] if n > 1 else CLIFFORDS[rng.integers(2)]
    if kind in ("H", "S"):
        return Gate(kind, (int(rng.integers(n)),))
    a, b = rng.choice(n, size=2, replace=False)
    return Gate(kind, (int(a), int(b)))


def random_rotation(rng: np.random.Generator, n: int, index: int, max_support: int = 2) -> Gate:
    k = int(rng.integers(1, min(max_support, n) + 1))
    qubits = sorted(int(q) for q in rng.choice(n, size=k, replace=False))
    axes = "".join(AXES[i] for i in rng.integers(3, size=k))
    return Gate.rotation(axes, qubits, index)


def random_class_circuit(rng: np.random.Generator, n: int, m_max: int = 10) -> ParameterizedCircuit:
    """Two orthogonal single-qubit layers followed by random Cliffords and rotations."""
    if 2 * n > m_max:
        raise ValueError("m_max too small for the two initial layers")
    nu = [AXES[i] for i in rng.integers(3, size=n)]
    mu = [AXES[(AXES.index(a) + 1 + int(rng.integers(2))) % 3] for a in nu]
    gates = [Gate.rotation(nu[q], q, q) for q in range(n)]
    gates += [Gate.rotation(mu[q], q, n + q) for q in range(n)]
    m = 2 * n
    for _ in range(int(rng.integers(0, m_max - 2 * n + 1))):
        for _ in range(int(rng.integers(0, 3))):
            gates.append(random_clifford(rng, n))
        gates.append(random_rotation(rng, n, m))
        m += 1
    for _ in range(int(rng.integers(0, 3))):
        gates.append(random_clifford(rng, n))
    return ParameterizedCircuit(n, tuple(gates), m)


def random_circuit(rng: np.random.Generator, n: int, n_gates: int = 12) -> ParameterizedCircuit:
    """Arbitrary mix of Cliffords and rotations (not necessarily in the class)."""
    gates, m = [], 0
    for _ in range(n_gates):
        if rng.random() < 0.5:
            gates.append(random_rotation(rng, n, m, max_support=3))
            m += 1
        else:
            gates.append(random_clifford(rng, n))
    return ParameterizedCircuit(n, tuple(gates), m)


def random_pauli(rng: np.random.Generator, n: int, allow_identity: bool = False) -> PauliString:
    while True:
        label = "".join("IXYZ"[i] for i in rng.integers(4, size=n))
        if allow_identity or set(label) != {"I"}:
            return PauliString.from_label(label)


def random_observable(rng: np.random.Generator, n: int, n_terms: int) -> Observable:
    seen: dict[str, float] = {}
    while len(seen) < min(n_terms, 4**n - 1):
        seen.setdefault(random_pauli(rng, n).label(), float(rng.normal()))
    return Observable.from_labels([(c, lab) for lab, c in seen.items()])


def random_product_state(rng: np.random.Generator, n: int, pure: bool = False) -> ProductState:
    v = rng.normal(size=(n, 3))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    if not pure:
        v *= rng.uniform(0.2, 1.0, size=(n, 1))
    return ProductState(v)
