"""Symplectic Pauli strings and weighted Pauli-sum observables.

Bit convention: qubit ``i`` is bit ``i`` of the ``x``/``z`` masks (qubit 0 is the
least significant bit). Labels are written with qubit 0 as the leftmost
character, so ``"XIZ"`` is X on qubit 0 and Z on qubit 2.

A :class:`PauliString` represents ``i**phase * prod_j sigma(x_j, z_j)`` where
``sigma(1, 1)`` is the textbook ``Y`` matrix.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import DimensionError

__all__ = [
    "PauliString",
    "Observable",
    "Locality",
    "classify_observable",
    "pauli_mul",
    "commutes",
    "DimensionError",
]

_PREFIXES = {"": 0, "+": 0, "i": 1, "+i": 1, "-": 2, "-i": 3}
_PHASE_PREFIX = {0: "", 1: "i", 2: "-", 3: "-i"}

_I2 = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)
_SINGLE = {(0, 0): _I2, (1, 0): _X, (1, 1): _Y, (0, 1): _Z}


def _popcount(v: int) -> int:
    return v.bit_count()


def product_phase(ax: int, az: int, bx: int, bz: int) -> int:
    """Power of ``i`` picked up by the site-wise product ``sigma_a sigma_b``.

    Cyclic pairs (XY, YZ, ZX) contribute ``+1``; anticyclic pairs ``-1``.
    """
    a_x = ax & ~az
    a_y = ax & az
    a_z = az & ~ax
    b_x = bx & ~bz
    b_y = bx & bz
    b_z = bz & ~bx
    plus = (a_x & b_y) | (a_y & b_z) | (a_z & b_x)
    minus = (a_y & b_x) | (a_z & b_y) | (a_x & b_z)
    return (_popcount(plus) - _popcount(minus)) % 4


@dataclass(frozen=True, slots=True)
class PauliString:
    """An ``n``-qubit Pauli operator ``i**phase * P`` in symplectic form."""

    n: int
    x: int = 0
    z: int = 0
    phase: int = 0

    def __post_init__(self) -> None:
        if self.n < 0:
            raise ValueError("qubit count must be non-negative")
        full = (1 << self.n) - 1
        if (self.x | self.z) & ~full:
            raise ValueError(f"masks exceed {self.n} qubits")
        object.__setattr__(self, "phase", self.phase % 4)

    # construction ------------------------------------------------------
    @classmethod
    def identity(cls, n: int) -> "PauliString":
        return cls(n)

    @classmethod
    def from_label(cls, label: str) -> "PauliString":
        """Parse labels such as ``"XIZ"``, ``"-YY"`` or ``"iZ"``."""
        label = label.strip()
        body = label.lstrip("+-i")
        prefix = label[: len(label) - len(body)]
        if prefix not in _PREFIXES:
            raise ValueError(f"bad Pauli prefix {prefix!r} in {label!r}")
        x = z = 0
        for i, ch in enumerate(body.upper()):
            if ch == "X":
                x |= 1 << i
            elif ch == "Y":
                x |= 1 << i
                z |= 1 << i
            elif ch == "Z":
                z |= 1 << i
            elif ch != "I":
                raise ValueError(f"bad Pauli character {ch!r} in {label!r}")
        return cls(len(body), x, z, _PREFIXES[prefix])

    @classmethod
    def single(cls, n: int, qubit: int, kind: str) -> "PauliString":
        """Weight-one Pauli ``kind`` (one of ``"X"``, ``"Y"``, ``"Z"``) on ``qubit``."""
        if not 0 <= qubit < n:
            raise IndexError(f"qubit {qubit} out of range for n={n}")
        bit = 1 << qubit
        kind = kind.upper()
        x = bit if kind in "XY" else 0
        z = bit if kind in "YZ" else 0
        if kind not in ("X", "Y", "Z"):
            raise ValueError(f"unknown Pauli {kind!r}")
        return cls(n, x, z)

    @classmethod
    def from_sites(cls, n: int, sites: dict[int, str]) -> "PauliString":
        """Build from a ``{qubit: "X"|"Y"|"Z"}`` mapping."""
        x = z = 0
        for q, kind in sites.items():
            p = cls.single(n, q, kind)
            x |= p.x
            z |= p.z
        return cls(n, x, z)

    # properties ----------------------------------------------------------
    @property
    def weight(self) -> int:
        return _popcount(self.x | self.z)

    @property
    def support(self) -> tuple[int, ...]:
        s = self.x | self.z
        return tuple(i for i in range(self.n) if s >> i & 1)

    @property
    def is_identity(self) -> bool:
        return (self.x | self.z) == 0

    @property
    def is_diagonal(self) -> bool:
        return self.x == 0

    @property
    def is_hermitian(self) -> bool:
        return self.phase % 2 == 0

    @property
    def sign(self) -> int:
        """``+1`` or ``-1``; raises for anti-Hermitian strings."""
        if self.phase % 2:
            raise ValueError(f"{self.label()} is not Hermitian")
        return 1 if self.phase == 0 else -1

    def site(self, qubit: int) -> str:
        xb = self.x >> qubit & 1
        zb = self.z >> qubit & 1
        return "IZXY"[2 * xb + zb]

    def unsigned(self) -> "PauliString":
        return PauliString(self.n, self.x, self.z, 0)

    def label(self, with_phase: bool = True) -> str:
        body = "".join(self.site(i) for i in range(self.n))
        return (_PHASE_PREFIX[self.phase] if with_phase else "") + body

    def __str__(self) -> str:
        return self.label()

    def __repr__(self) -> str:
        return f"PauliString({self.label()!r})"

    # algebra -------------------------------------------------------------
    def __mul__(self, other: "PauliString") -> "PauliString":
        return pauli_mul(self, other)

    def __neg__(self) -> "PauliString":
        return PauliString(self.n, self.x, self.z, self.phase + 2)

    def commutes(self, other: "PauliString") -> bool:
        return commutes(self, other)

    def to_matrix(self) -> np.ndarray:
        """Dense ``2**n x 2**n`` matrix (qubit 0 = least significant index bit)."""
        mat = np.array([[1.0 + 0j]])
        # kron puts its first factor on the most significant bit
        for q in reversed(range(self.n)):
            mat = np.kron(mat, _SINGLE[(self.x >> q & 1, self.z >> q & 1)])
        return (1j**self.phase) * mat


def pauli_mul(a: PauliString, b: PauliString) -> PauliString:
    """Exact operator product ``a @ b`` including the phase."""
    if a.n != b.n:
        raise DimensionError(f"cannot multiply {a.n}-qubit and {b.n}-qubit Paulis")
    phase = a.phase + b.phase + product_phase(a.x, a.z, b.x, b.z)
    return PauliString(a.n, a.x ^ b.x, a.z ^ b.z, phase)


def commutes(a: PauliString, b: PauliString) -> bool:
    """True iff the symplectic product of ``a`` and ``b`` is even."""
    if a.n != b.n:
        raise DimensionError(f"cannot compare {a.n}-qubit and {b.n}-qubit Paulis")
    return _popcount((a.x & b.z) ^ (a.z & b.x)) % 2 == 0


class Observable:
    """Real-weighted sum of Hermitian Pauli strings.

    Signs of the input Paulis are folded into the coefficients, equal Paulis are
    summed and terms that cancel to exactly zero are dropped.
    """

    __slots__ = ("n", "_terms")

    def __init__(self, n: int, terms: Iterable[tuple[float, PauliString]] = ()):
        self.n = n
        acc: dict[tuple[int, int], float] = {}
        for coeff, p in terms:
            if p.n != n:
                raise DimensionError(f"term {p} does not act on {n} qubits")
            coeff = float(coeff)
            if not math.isfinite(coeff):
                raise ValueError(f"non-finite coefficient for {p}")
            key = (p.x, p.z)
            acc[key] = acc.get(key, 0.0) + coeff * p.sign
        self._terms: tuple[tuple[float, PauliString], ...] = tuple(
            (c, PauliString(n, x, z)) for (x, z), c in acc.items() if c != 0.0
        )

    @classmethod
    def from_labels(cls, pairs: Iterable[tuple[float, str]]) -> "Observable":
        parsed = [(c, PauliString.from_label(lbl)) for c, lbl in pairs]
        if not parsed:
            raise ValueError("cannot infer qubit count from an empty term list")
        return cls(parsed[0][1].n, parsed)

    @classmethod
    def from_pauli(cls, p: PauliString, coeff: float = 1.0) -> "Observable":
        return cls(p.n, [(coeff, p)])

    @property
    def terms(self) -> tuple[tuple[float, PauliString], ...]:
        return self._terms

    def __iter__(self) -> Iterator[tuple[float, PauliString]]:
        return iter(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Observable):
            return NotImplemented
        return self.n == other.n and self.as_dict() == other.as_dict()

    def __repr__(self) -> str:
        inner = " + ".join(f"{c:g}*{p.label()}" for c, p in self._terms) or "0"
        return f"Observable({inner})"

    def as_dict(self) -> dict[str, float]:
        return {p.label(): c for c, p in self._terms}

    def coefficient(self, p: PauliString) -> float:
        for c, q in self._terms:
            if q.x == p.x and q.z == p.z:
                return c * p.sign
        return 0.0

    def identity_coefficient(self) -> float:
        return self.coefficient(PauliString.identity(self.n))

    def non_identity(self) -> list[tuple[float, PauliString]]:
        return [(c, p) for c, p in self._terms if not p.is_identity]

    @property
    def is_diagonal(self) -> bool:
        return all(p.is_diagonal for _, p in self._terms)

    def max_weight(self) -> int:
        return max((p.weight for _, p in self._terms), default=0)

    def to_matrix(self) -> np.ndarray:
        dim = 1 << self.n
        out = np.zeros((dim, dim), dtype=complex)
        for c, p in self._terms:
            out += c * p.to_matrix()
        return out

    # text format -----------------------------------------------------------
    def to_text(self) -> str:
        """One ``<coeff> <label>`` line per term; coefficients printed with ``repr``."""
        return "".join(f"{c!r} {p.label()}\n" for c, p in self._terms)

    @classmethod
    def from_text(cls, text: str, n: int | None = None) -> "Observable":
        """Parse the line format produced by :meth:`to_text`.

        Blank lines and ``#`` comments are ignored. Errors carry the 1-based line
        number.
        """
        pairs: list[tuple[float, PauliString]] = []
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ValueError(f"line {lineno}: expected '<coeff> <label>', got {raw!r}")
            try:
                coeff = float(parts[0])
                p = PauliString.from_label(parts[1])
            except ValueError as exc:
                raise ValueError(f"line {lineno}: {exc}") from None
            if n is None:
                n = p.n
            elif p.n != n:
                raise ValueError(f"line {lineno}: label has {p.n} qubits, expected {n}")
            pairs.append((coeff, p))
        if n is None:
            raise ValueError("observable file contains no terms")
        return cls(n, pairs)


class Locality(enum.Enum):
    LOCAL = "local"
    MIXED = "mixed"
    GLOBAL = "global"


def classify_observable(
    h: Observable, locality_threshold: int, coeff_floor: float = 1e-9
) -> Locality:
    """Classify ``h`` as local, mixed or global. The identity term is ignored."""
    terms = h.non_identity()
    if all(p.weight <= locality_threshold for _, p in terms):
        return Locality.LOCAL
    if any(p.weight <= locality_threshold and abs(c) >= coeff_floor for c, p in terms):
        return Locality.MIXED
    return Locality.GLOBAL


def paulis_from_labels(labels: Sequence[str]) -> list[PauliString]:
    return [PauliString.from_label(s) for s in labels]
