"""Parameterized circuits of Clifford gates and Pauli rotations.

Gates are stored in time order (the first gate acts first on the input state).
Rotations follow ``R_P(theta) = exp(-i P theta / 2)``.

The circuit class targeted by the bound estimators starts with two adjacent
layers of single-qubit rotations whose axes differ on every qubit, uses each
parameter exactly once and has only Clifford fixed gates in between rotations.
:func:`validate_circuit_class` reports every way a circuit leaves that class.
"""
from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .pauli import PauliString

__all__ = [
    "Gate",
    "ParameterizedCircuit",
    "ProductState",
    "ValidationReport",
    "validate_circuit_class",
    "build_efficient_su2",
    "build_cartan",
    "zero_state",
    "plus_state",
    "mixed_state",
    "CircuitFormatError",
    "CLIFFORD_KINDS",
]

CLIFFORD_KINDS = ("H", "S", "CNOT", "CZ", "SWAP")
FIXED_NON_CLIFFORD = ("T",)
ROTATION = "ROT"
_ARITY = {"H": 1, "S": 1, "T": 1, "CNOT": 2, "CZ": 2, "SWAP": 2}
_ALIASES = {
    "HADAMARD": "H",
    "PHASE": "S",
    "PHASE-S": "S",
    "CX": "CNOT",
    "ROTATION": ROTATION,
    "PAULIROTATION": ROTATION,
}


class CircuitFormatError(ValueError):
    """A circuit description could not be parsed."""


@dataclass(frozen=True)
class Gate:
    """One gate. ``generator`` and ``param_index`` are set for rotations only.

    The rotation generator is a Pauli label over ``qubits`` (one character per
    listed qubit, in the listed order).
    """

    kind: str
    qubits: tuple[int, ...]
    generator: str | None = None
    param_index: int | None = None

    def __post_init__(self) -> None:
        kind = _ALIASES.get(self.kind.upper(), self.kind.upper())
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        if len(set(self.qubits)) != len(self.qubits):
            raise ValueError(f"{kind} gate repeats a qubit: {self.qubits}")
        if kind == ROTATION:
            if self.generator is None or self.param_index is None:
                raise ValueError("rotation gates need a generator and a param_index")
            gen = self.generator.upper()
            if len(gen) != len(self.qubits) or set(gen) - set("XYZ"):
                raise ValueError(
                    f"generator {self.generator!r} must be a non-identity label over {self.qubits}"
                )
            object.__setattr__(self, "generator", gen)
        elif kind in _ARITY:
            if self.generator is not None or self.param_index is not None:
                raise ValueError(f"{kind} gates carry no parameter")
            if len(self.qubits) != _ARITY[kind]:
                raise ValueError(f"{kind} acts on {_ARITY[kind]} qubit(s)")
        else:
            raise ValueError(f"unknown gate kind {self.kind!r}")

    @classmethod
    def rotation(cls, axes: str, qubits: Sequence[int] | int, param_index: int) -> "Gate":
        if isinstance(qubits, int):
            qubits = (qubits,)
        return cls(ROTATION, tuple(qubits), axes, param_index)

    @property
    def is_rotation(self) -> bool:
        return self.kind == ROTATION

    @property
    def is_clifford(self) -> bool:
        return self.kind in CLIFFORD_KINDS

    def generator_pauli(self, n: int) -> PauliString:
        if not self.is_rotation:
            raise ValueError(f"{self.kind} has no generator")
        sites = {q: a for q, a in zip(self.qubits, self.generator)}
        return PauliString.from_sites(n, sites)

    def to_dict(self) -> dict:
        d: dict = {"kind": self.kind, "qubits": list(self.qubits)}
        if self.is_rotation:
            d["generator"] = self.generator
            d["param_index"] = self.param_index
        return d


@dataclass(frozen=True)
class ParameterizedCircuit:
    n: int
    gates: tuple[Gate, ...]
    m: int = -1

    def __post_init__(self) -> None:
        object.__setattr__(self, "gates", tuple(self.gates))
        for g in self.gates:
            if any(not 0 <= q < self.n for q in g.qubits):
                raise ValueError(f"gate {g.to_dict()} acts outside {self.n} qubits")
        used = [g.param_index for g in self.gates if g.is_rotation]
        inferred = max(used) + 1 if used else 0
        if self.m < 0:
            object.__setattr__(self, "m", inferred)
        elif self.m < inferred:
            raise ValueError(f"m={self.m} but param_index {inferred - 1} is used")

    @property
    def rotations(self) -> list[Gate]:
        return [g for g in self.gates if g.is_rotation]

    def _layer_axes(self, start: int) -> tuple[str, ...] | None:
        layer = self.gates[start : start + self.n]
        if len(layer) < self.n or not all(g.is_rotation and len(g.qubits) == 1 for g in layer):
            return None
        axes = {g.qubits[0]: g.generator for g in layer}
        if len(axes) != self.n:
            return None
        return tuple(axes[q] for q in range(self.n))

    @property
    def first_layer_axes(self) -> tuple[str, ...] | None:
        """Per-qubit axis of the first rotation layer (acts first on the state)."""
        return self._layer_axes(0)

    @property
    def second_layer_axes(self) -> tuple[str, ...] | None:
        return self._layer_axes(self.n)

    def to_dict(self) -> dict:
        return {"n": self.n, "m": self.m, "gates": [g.to_dict() for g in self.gates]}

    def to_json(self, indent: int | None = 1) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    @classmethod
    def from_dict(cls, data: dict) -> "ParameterizedCircuit":
        try:
            n = int(data["n"])
            raw_gates = data["gates"]
        except (KeyError, TypeError) as exc:
            raise CircuitFormatError(f"missing field {exc}") from None
        gates = []
        for i, g in enumerate(raw_gates):
            try:
                gates.append(
                    Gate(g["kind"], tuple(g["qubits"]), g.get("generator"), g.get("param_index"))
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise CircuitFormatError(f"gate {i}: {exc}") from None
        try:
            return cls(n, tuple(gates), int(data.get("m", -1)))
        except ValueError as exc:
            raise CircuitFormatError(str(exc)) from None

    @classmethod
    def from_json(cls, text: str) -> "ParameterizedCircuit":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise CircuitFormatError(f"line {exc.lineno}: {exc.msg}") from None
        try:
            return cls.from_dict(data)
        except CircuitFormatError as exc:
            match = re.match(r"gate (\d+): ", str(exc))
            if match is None:
                raise
            line = _gate_line(text, int(match.group(1)))
            if line is None:
                raise
            raise CircuitFormatError(f"line {line}: {exc}") from None


def _gate_line(text: str, index: int) -> int | None:
    """1-based line of the ``index``-th ``"kind"`` key, i.e. where gate ``index`` starts."""
    hits = [m.start() for m in re.finditer(r'"kind"\s*:', text)]
    if index >= len(hits):
        return None
    return text.count("\n", 0, hits[index]) + 1


@dataclass
class ValidationReport:
    violations: list[str] = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.valid

    def __str__(self) -> str:
        return "valid" if self.valid else "; ".join(self.violations)


def _later_orthogonal_layer(c: ParameterizedCircuit, nu: tuple[str, ...]) -> bool:
    """Does some later run of single-qubit rotations cover every qubit orthogonally to ``nu``?"""
    seen: dict[int, str] = {}
    for g in c.gates[c.n :]:
        if g.is_rotation and len(g.qubits) == 1:
            q = g.qubits[0]
            if g.generator != nu[q]:
                seen.setdefault(q, g.generator)
            if len(seen) == c.n:
                return True
        else:
            seen.clear()
    return False


def validate_circuit_class(c: ParameterizedCircuit) -> ValidationReport:
    """List every assumption of the circuit class that ``c`` violates."""
    report = ValidationReport()
    nu = c.first_layer_axes
    mu = c.second_layer_axes
    if nu is None:
        report.violations.append("missing initial orthogonal rotation layers: circuit does not start with a full single-qubit rotation layer")
    elif mu is None:
        if _later_orthogonal_layer(c, nu):
            report.violations.append("orthogonal layers not adjacent: an orthogonal rotation layer appears only after other gates")
        else:
            report.violations.append("missing initial orthogonal rotation layers: no rotation layer orthogonal to the first")
    else:
        clash = [q for q in range(c.n) if nu[q] == mu[q]]
        if clash:
            report.violations.append(f"initial layers not orthogonal on qubits {clash}")
    counts: dict[int, int] = {}
    for g in c.rotations:
        counts[g.param_index] = counts.get(g.param_index, 0) + 1
    shared = sorted(k for k, v in counts.items() if v > 1)
    if shared:
        report.violations.append(f"dependent parameters: indices {shared} are reused")
    missing = sorted(set(range(c.m)) - set(counts))
    if missing:
        report.violations.append(f"unused parameter indices {missing}")
    bad = sorted({g.kind for g in c.gates if not (g.is_rotation or g.is_clifford)})
    if bad:
        report.violations.append(f"non-Clifford fixed gates: {bad}")
    return report


# builders ------------------------------------------------------------------

def _rotation_layer(n: int, axis: str, start: int) -> list[Gate]:
    return [Gate.rotation(axis, q, start + q) for q in range(n)]


def _entangling_pairs(n: int, entanglement: str) -> list[tuple[int, int]]:
    if entanglement == "pairwise":
        return [(i, i + 1) for i in range(0, n - 1, 2)] + [(i, i + 1) for i in range(1, n - 1, 2)]
    if entanglement == "linear":
        return [(i, i + 1) for i in range(n - 1)]
    if entanglement == "circular":
        pairs = [(i, i + 1) for i in range(n - 1)]
        return pairs + [(n - 1, 0)] if n > 2 else pairs
    raise ValueError(f"unknown entanglement {entanglement!r}")


def build_efficient_su2(
    n: int,
    depth: int,
    rotation_axes: tuple[str, str] = ("Y", "Z"),
    entanglement: str = "pairwise",
) -> ParameterizedCircuit:
    """EfficientSU2-style ansatz with ``2 n (depth + 1)`` parameters.

    Two rotation layers (``rotation_axes[0]`` first), then ``depth`` repetitions
    of a CNOT layer followed by the same two rotation layers.
    """
    if n < 2 or depth < 0:
        raise ValueError("need n >= 2 and depth >= 0")
    a, b = (s.upper() for s in rotation_axes)
    if a == b or not {a, b} <= set("XYZ"):
        raise ValueError(f"rotation axes {rotation_axes} must be two different Paulis")
    gates: list[Gate] = []
    p = 0
    for rep in range(depth + 1):
        if rep:
            gates += [Gate("CNOT", pair) for pair in _entangling_pairs(n, entanglement)]
        gates += _rotation_layer(n, a, p)
        gates += _rotation_layer(n, b, p + n)
        p += 2 * n
    return ParameterizedCircuit(n, tuple(gates), p)


def _cartan_block(q0: int, q1: int, p: int) -> list[Gate]:
    # XX, YY, ZZ interaction followed by local Y and Z rotations on both qubits
    return [
        Gate.rotation("XX", (q0, q1), p),
        Gate.rotation("YY", (q0, q1), p + 1),
        Gate.rotation("ZZ", (q0, q1), p + 2),
        Gate.rotation("Y", q0, p + 3),
        Gate.rotation("Y", q1, p + 4),
        Gate.rotation("Z", q0, p + 5),
        Gate.rotation("Z", q1, p + 6),
    ]


def build_cartan(n: int, depth: int, rotation_axes: tuple[str, str] = ("Y", "Z")) -> ParameterizedCircuit:
    """Two initial rotation layers, then ``depth`` layers of two-qubit blocks.

    Each layer places blocks on the even pairs ``(0,1), (2,3), ...`` and then on
    the odd pairs ``(1,2), (3,4), ...``. A block is ``exp`` of XX, YY and ZZ
    followed by Y and Z rotations on both qubits (seven parameters).
    """
    if n < 2 or n % 2:
        raise ValueError("the Cartan ansatz needs an even n >= 2")
    if depth < 0:
        raise ValueError("depth must be non-negative")
    a, b = (s.upper() for s in rotation_axes)
    if a == b:
        raise ValueError("initial rotation axes must differ")
    gates = _rotation_layer(n, a, 0) + _rotation_layer(n, b, n)
    p = 2 * n
    for _ in range(depth):
        for start in (0, 1):
            for q in range(start, n - 1, 2):
                gates += _cartan_block(q, q + 1, p)
                p += 7
    return ParameterizedCircuit(n, tuple(gates), p)


# product states ------------------------------------------------------------

@dataclass(frozen=True)
class ProductState:
    """Product state given by per-qubit Bloch vectors ``(Tr X rho, Tr Y rho, Tr Z rho)``."""

    bloch: np.ndarray

    def __post_init__(self) -> None:
        b = np.array(self.bloch, dtype=float).reshape(-1, 3)
        norms = np.einsum("ij,ij->i", b, b)
        if np.any(norms > 1 + 1e-12):
            bad = int(np.argmax(norms))
            raise ValueError(f"Bloch vector of qubit {bad} has norm^2 {norms[bad]:.6g} > 1")
        b.setflags(write=False)
        object.__setattr__(self, "bloch", b)

    @property
    def n(self) -> int:
        return self.bloch.shape[0]

    @property
    def is_pure(self) -> bool:
        return bool(np.allclose(np.einsum("ij,ij->i", self.bloch, self.bloch), 1.0, atol=1e-12))

    def component(self, qubit: int, axis: str) -> float:
        return float(self.bloch[qubit, "XYZ".index(axis)])

    def qubit_density(self, qubit: int) -> np.ndarray:
        rx, ry, rz = self.bloch[qubit]
        return 0.5 * np.array([[1 + rz, rx - 1j * ry], [rx + 1j * ry, 1 - rz]])

    def qubit_vector(self, qubit: int) -> np.ndarray:
        """Pure single-qubit state vector (global phase fixed so amplitude 0 is real)."""
        rx, ry, rz = self.bloch[qubit]
        theta = math.acos(max(-1.0, min(1.0, rz)))
        phi = math.atan2(ry, rx)
        return np.array([math.cos(theta / 2), np.exp(1j * phi) * math.sin(theta / 2)])

    def to_list(self) -> list[list[float]]:
        return self.bloch.tolist()

    def __eq__(self, other: object) -> bool:
        return isinstance(other, ProductState) and np.array_equal(self.bloch, other.bloch)

    def __hash__(self) -> int:
        return hash(self.bloch.tobytes())


def zero_state(n: int) -> ProductState:
    return ProductState(np.tile([0.0, 0.0, 1.0], (n, 1)))


def plus_state(n: int) -> ProductState:
    return ProductState(np.tile([1.0, 0.0, 0.0], (n, 1)))


def mixed_state(n: int, bloch: Iterable[Sequence[float]]) -> ProductState:
    b = np.array(list(bloch), dtype=float)
    if b.shape != (n, 3):
        raise ValueError(f"expected {n} Bloch triples, got shape {b.shape}")
    return ProductState(b)


def maximally_mixed(n: int) -> ProductState:
    return ProductState(np.zeros((n, 3)))


def parse_state(spec: str, n: int) -> ProductState:
    """``zero``, ``plus``, ``mixed`` (maximally mixed) or ``bloch:rx,ry,rz`` (same on every qubit)."""
    spec = spec.strip().lower()
    if spec == "zero":
        return zero_state(n)
    if spec == "plus":
        return plus_state(n)
    if spec in ("mixed", "maxmixed"):
        return maximally_mixed(n)
    if spec.startswith("bloch:"):
        vals = [float(v) for v in spec[6:].split(",")]
        if len(vals) != 3:
            raise ValueError("bloch state needs three components")
        return ProductState(np.tile(vals, (n, 1)))
    raise ValueError(f"unknown state {spec!r}")
