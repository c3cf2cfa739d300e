"""Binary polynomials and their diagonal Z-basis observables.

A function ``f: {0,1}^n -> R`` corresponds to the diagonal operator
``sum_x f(x)|x><x|``, whose Z-string coefficients are the normalised Walsh
coefficients ``c_a = 2**-n sum_x (-1)**(a.x) f(x)``. A degree-``k`` polynomial
only produces Z-strings of weight ``<= k``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import CapExceededError, DomainError
from .pauli import Observable, PauliString

__all__ = [
    "BinaryPolynomial",
    "poly_to_observable",
    "observable_to_poly",
    "walsh_hadamard",
    "function_table",
    "table_to_observable",
    "estimate_blackbox_coefficients",
    "ENUMERATION_LIMIT",
]

ENUMERATION_LIMIT = 20


def _mask(support: Iterable[int]) -> int:
    m = 0
    for i in support:
        m |= 1 << i
    return m


def _bits(mask: int) -> list[int]:
    return [i for i in range(mask.bit_length()) if mask >> i & 1]


def _subsets(mask: int) -> Iterable[int]:
    """All sub-masks of ``mask`` (including 0 and ``mask``)."""
    sub = mask
    while True:
        yield sub
        if sub == 0:
            return
        sub = (sub - 1) & mask


@dataclass(frozen=True)
class BinaryPolynomial:
    """``f(x) = sum_S c_S prod_{i in S} x_i`` over 0-based variable indices."""

    n: int
    monomials: tuple[tuple[float, frozenset[int]], ...] = ()

    def __post_init__(self) -> None:
        acc: dict[frozenset[int], float] = {}
        for c, s in self.monomials:
            s = frozenset(s)
            if any(not 0 <= i < self.n for i in s):
                raise ValueError(f"monomial {sorted(s)} outside {self.n} variables")
            acc[s] = acc.get(s, 0.0) + float(c)
        merged = tuple(
            (c, s) for s, c in sorted(acc.items(), key=lambda kv: (len(kv[0]), sorted(kv[0])))
            if c != 0.0
        )
        object.__setattr__(self, "monomials", merged)

    @classmethod
    def from_dict(cls, n: int, coeffs: dict[Iterable[int], float]) -> "BinaryPolynomial":
        return cls(n, tuple((c, frozenset(s)) for s, c in coeffs.items()))

    @property
    def degree(self) -> int:
        return max((len(s) for _, s in self.monomials), default=0)

    def as_dict(self) -> dict[frozenset[int], float]:
        return {s: c for c, s in self.monomials}

    def __call__(self, x: Sequence[int] | int) -> float:
        xm = x if isinstance(x, int) else _mask(i for i, b in enumerate(x) if b)
        return float(sum(c for c, s in self.monomials if _mask(s) & xm == _mask(s)))

    def table(self) -> np.ndarray:
        """Values on all ``2**n`` bitstrings, indexed by ``sum_i x_i 2**i``."""
        idx = np.arange(1 << self.n, dtype=np.int64)
        out = np.zeros(1 << self.n)
        for c, s in self.monomials:
            m = _mask(s)
            out += c * ((idx & m) == m)
        return out


def walsh_hadamard(values: np.ndarray) -> np.ndarray:
    """Unnormalised fast Walsh-Hadamard transform along the last axis.

    ``out[..., a] = sum_x (-1)**popcount(a & x) values[..., x]``; the last axis
    length must be a power of two.
    """
    arr = np.array(values, dtype=float, copy=True)
    size = arr.shape[-1]
    if size & (size - 1):
        raise ValueError("transform length must be a power of two")
    lead = arr.shape[:-1]
    h = 1
    while h < size:
        view = arr.reshape(*lead, size // (2 * h), 2, h)
        a = view[..., 0, :].copy()
        b = view[..., 1, :]
        view[..., 0, :] += b
        view[..., 1, :] = a - b
        h *= 2
    return arr


def table_to_observable(table: np.ndarray, tol: float = 0.0) -> Observable:
    """Z-basis expansion of the diagonal operator with entries ``table``."""
    table = np.asarray(table, dtype=float)
    n = int(table.size).bit_length() - 1
    if table.size != 1 << n:
        raise ValueError("table length must be a power of two")
    coeffs = walsh_hadamard(table) / table.size
    terms = [
        (float(coeffs[a]), PauliString(n, 0, a))
        for a in range(table.size)
        if abs(coeffs[a]) > tol
    ]
    return Observable(n, terms)


def function_table(f: Callable[[np.ndarray], float], n: int) -> np.ndarray:
    """Evaluate ``f`` on every bitstring (as a length-``n`` 0/1 array)."""
    if n > ENUMERATION_LIMIT:
        raise CapExceededError(
            f"n={n} exceeds the enumeration limit {ENUMERATION_LIMIT}; "
            "use estimate_blackbox_coefficients instead"
        )
    bits = (np.arange(1 << n)[:, None] >> np.arange(n)) & 1
    return np.array([f(row) for row in bits], dtype=float)


def poly_to_observable(f: BinaryPolynomial, enumerate_: bool = False) -> Observable:
    """Map ``f`` to ``T(f) = sum_x f(x)|x><x|`` written in the Z basis.

    The default monomial path expands ``x_i = (1 - Z_i)/2`` symbolically and has
    no size limit; ``enumerate_=True`` goes through the full value table instead.
    """
    if enumerate_:
        if f.n > ENUMERATION_LIMIT:
            raise CapExceededError(f"n={f.n} exceeds the enumeration limit {ENUMERATION_LIMIT}")
        return table_to_observable(f.table())
    terms = []
    for c, s in f.monomials:
        m = _mask(s)
        scale = c / (1 << len(s))
        for sub in _subsets(m):
            sgn = -1.0 if sub.bit_count() % 2 else 1.0
            terms.append((sgn * scale, PauliString(f.n, 0, sub)))
    return Observable(f.n, terms)


def observable_to_poly(h: Observable) -> BinaryPolynomial:
    """Inverse of :func:`poly_to_observable` via ``Z_i = 1 - 2 x_i``."""
    coeffs: dict[frozenset[int], float] = {}
    for c, p in h:
        if not p.is_diagonal:
            raise DomainError(f"term {p.label()} is not diagonal in the Z basis")
        for sub in _subsets(p.z):
            key = frozenset(_bits(sub))
            coeffs[key] = coeffs.get(key, 0.0) + c * (-2.0) ** sub.bit_count()
    return BinaryPolynomial(h.n, tuple((c, s) for s, c in coeffs.items()))


def estimate_blackbox_coefficients(
    f: Callable[[np.ndarray], float],
    n: int,
    targets: Sequence[PauliString],
    n_samples: int,
    seed: int | None = None,
    vectorized: bool = False,
) -> list[tuple[float, float]]:
    """Monte Carlo estimates of Z-basis coefficients of a black-box function.

    All targets share the same uniformly drawn bitstrings. For non-identity
    targets each sample is centred by the leave-one-out mean of the other
    samples, which keeps the estimator unbiased (the character has zero mean and
    is independent of the other draws) and makes constant functions come out
    exactly zero.

    Parameters
    ----------
    f
        Maps a 0/1 array of length ``n`` to a real number, or a ``(N, n)`` array
        to ``N`` values when ``vectorized`` is set.
    targets
        Diagonal Pauli strings.

    Returns
    -------
    list of (estimate, standard error)
    """
    if n_samples < 2:
        raise ValueError("n_samples must be at least 2")
    for t in targets:
        if t.n != n or not t.is_diagonal:
            raise ValueError(f"target {t} must be a diagonal {n}-qubit Pauli")
    rng = np.random.default_rng(seed)
    xs = rng.integers(0, 2, size=(n_samples, n), dtype=np.int64)
    if vectorized:
        vals = np.asarray(f(xs), dtype=float)
    else:
        vals = np.array([f(row) for row in xs], dtype=float)
    loo_mean = (vals.sum() - vals) / (n_samples - 1)
    out = []
    for t in targets:
        if t.is_identity:
            samples = vals
        else:
            amask = np.array([t.z >> i & 1 for i in range(n)], dtype=np.int64)
            chi = 1.0 - 2.0 * ((xs @ amask) % 2)
            samples = chi * (vals - loo_mean)
        est = float(samples.mean()) * t.sign
        se = float(samples.std(ddof=1) / np.sqrt(n_samples))
        out.append((est, se))
    return out


def all_monomials(n: int, max_degree: int | None = None) -> list[frozenset[int]]:
    k = n if max_degree is None else max_degree
    return [
        frozenset(c) for d in range(k + 1) for c in itertools.combinations(range(n), d)
    ]
