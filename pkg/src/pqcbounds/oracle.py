"""Dense statevector / density-matrix reference simulator.

Used to check every identity the Clifford-point estimators rely on at
continuous parameter values. All routines are batched over parameter vectors:
``thetas`` has shape ``(B, m)`` and states have shape ``(B, 2**n)`` (pure) or
``(B, 2**n, 2**n)`` (mixed). Qubit ``q`` is bit ``q`` of the basis index.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from . import sampling
from .circuit import Gate, ParameterizedCircuit, ProductState
from .errors import CapExceededError, DimensionError
from .pauli import Observable, PauliString

__all__ = [
    "DEFAULT_QUBIT_CAP",
    "DenseSimulator",
    "circuit_unitary",
    "loss",
    "term_losses",
    "gradient",
    "finite_difference_gradient",
    "moment_suite",
    "MomentReport",
    "discrete_reduction_check",
    "ReductionCheck",
    "exact_discrete_moments",
    "exact_discrete_second_moment",
    "trig_moments",
]

DEFAULT_QUBIT_CAP = 12
# upper bound on complex entries held per batch chunk
_CHUNK_ENTRIES = 1 << 14


@dataclass(frozen=True)
class _PauliAction:
    """``P|k> = coef[k] |k ^ x>`` for a Pauli string ``P``."""

    flip: int
    coef: np.ndarray  # indexed by source basis state k

    @classmethod
    def of(cls, p: PauliString) -> "_PauliAction":
        idx = np.arange(1 << p.n, dtype=np.int64)
        parity = np.bitwise_count(idx & p.z) & 1
        ny = (p.x & p.z).bit_count()
        coef = (1j ** ((p.phase + ny) % 4)) * (1.0 - 2.0 * parity)
        return cls(p.x, coef)

    def apply(self, psi: np.ndarray) -> np.ndarray:
        """``P psi`` along the last axis."""
        dim = psi.shape[-1]
        src = np.arange(dim) ^ self.flip
        # (P psi)[j] = coef[j ^ x] psi[j ^ x]
        return psi[..., src] * self.coef[src]

    def expectation(self, psi: np.ndarray) -> np.ndarray:
        return np.einsum("...k,...k->...", psi.conj(), self.apply(psi)).real


class DenseSimulator:
    """Dense simulation of one circuit from one product state.

    Parameters
    ----------
    c
        Any circuit (class membership is not required; non-Clifford fixed gates
        such as ``T`` are allowed).
    rho
        Product initial state. A mixed qubit with Bloch vector ``r = |r| u`` is
        the exact mixture ``(1+|r|)/2 |u><u| + (1-|r|)/2 |-u><-u|``, so the
        state is evolved as a weighted ensemble of ``2**k`` product
        statevectors (``k`` = number of mixed qubits).
    qubit_cap
        Refuse circuits wider than this.
    """

    def __init__(self, c: ParameterizedCircuit, rho: ProductState, qubit_cap: int = DEFAULT_QUBIT_CAP):
        if c.n > qubit_cap:
            raise CapExceededError(f"dense simulation of {c.n} qubits exceeds the cap of {qubit_cap}")
        if rho.n != c.n:
            raise DimensionError(f"state on {rho.n} qubits, circuit on {c.n}")
        self.circuit = c
        self.rho = rho
        self.pure = rho.is_pure
        self.dim = 1 << c.n
        self._gens = {
            i: _PauliAction.of(g.generator_pauli(c.n))
            for i, g in enumerate(c.gates)
            if g.is_rotation
        }
        self._idx = np.arange(self.dim, dtype=np.int64)
        self._init, self._weights = self._initial_ensemble()

    # state preparation ---------------------------------------------------
    @staticmethod
    def _bloch_vector(r: np.ndarray) -> np.ndarray:
        rx, ry, rz = r
        theta = math.acos(max(-1.0, min(1.0, rz)))
        phi = math.atan2(ry, rx)
        return np.array([math.cos(theta / 2), np.exp(1j * phi) * math.sin(theta / 2)])

    def _initial_ensemble(self) -> tuple[np.ndarray, np.ndarray]:
        """``(K, D)`` product statevectors and their ``(K,)`` mixture weights."""
        states = np.ones((1, 1), dtype=complex)
        weights = np.ones(1)
        for q in reversed(range(self.circuit.n)):
            r = np.asarray(self.rho.bloch[q], dtype=float)
            norm = float(np.linalg.norm(r))
            if norm >= 1.0 - 1e-12:
                local, w = self._bloch_vector(r / norm)[None, :], np.ones(1)
            else:
                u = r / norm if norm > 0 else np.array([0.0, 0.0, 1.0])
                local = np.stack([self._bloch_vector(u), self._bloch_vector(-u)])
                w = np.array([(1 + norm) / 2, (1 - norm) / 2])
            states = np.einsum("ka,lb->klab", states, local).reshape(states.shape[0] * local.shape[0], -1)
            weights = np.outer(weights, w).ravel()
        return states, weights

    # gate application along the last axis ----------------------------------
    def _apply_gate(self, psi: np.ndarray, i: int, g: Gate, theta: np.ndarray | None) -> np.ndarray:
        idx = self._idx
        if g.is_rotation:
            c = np.cos(theta / 2)
            s = np.sin(theta / 2)
            shape = (-1,) + (1,) * (psi.ndim - 1)
            return c.reshape(shape) * psi - 1j * s.reshape(shape) * self._gens[i].apply(psi)
        a = 1 << g.qubits[0]
        if g.kind == "H":
            bit = (idx & a) != 0
            lo = psi[..., idx & ~a]
            hi = psi[..., idx | a]
            return (lo + np.where(bit, -1.0, 1.0) * hi) / math.sqrt(2)
        if g.kind == "S":
            return psi * np.where(idx & a, 1j, 1.0)
        if g.kind == "T":
            return psi * np.where(idx & a, np.exp(1j * math.pi / 4), 1.0)
        b = 1 << g.qubits[1]
        if g.kind == "CNOT":
            return psi[..., np.where(idx & a, idx ^ b, idx)]
        if g.kind == "CZ":
            return psi * np.where(((idx & a) != 0) & ((idx & b) != 0), -1.0, 1.0)
        if g.kind == "SWAP":
            ba = (idx & a) != 0
            bb = (idx & b) != 0
            return psi[..., np.where(ba != bb, idx ^ (a | b), idx)]
        raise ValueError(f"unsupported gate {g.kind}")

    def _evolve(self, thetas: np.ndarray) -> np.ndarray:
        """``(B, K, D)`` evolved ensemble members."""
        psi = np.broadcast_to(self._init, (thetas.shape[0],) + self._init.shape).copy()
        for i, g in enumerate(self.circuit.gates):
            th = thetas[:, g.param_index] if g.is_rotation else None
            psi = self._apply_gate(psi, i, g, th)
        return psi

    def _chunk(self) -> int:
        return max(1, _CHUNK_ENTRIES // (self.dim * len(self._weights)))

    def states(self, thetas: np.ndarray) -> np.ndarray:
        """Statevectors ``(B, D)`` for pure inputs, density matrices ``(B, D, D)`` otherwise."""
        psi = self._evolve(self._check(thetas))
        if self.pure:
            return psi[:, 0, :]
        return np.einsum("k,bki,bkj->bij", self._weights, psi, psi.conj())

    def _check(self, thetas) -> np.ndarray:
        thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
        if thetas.shape[1] != self.circuit.m:
            raise ValueError(f"expected {self.circuit.m} parameters, got {thetas.shape[1]}")
        return thetas

    def term_values(self, thetas, paulis: Sequence[PauliString]) -> np.ndarray:
        """``(B, T)`` array of ``Tr(U rho U^dagger P_t)``."""
        thetas = self._check(thetas)
        acts = [_PauliAction.of(p) for p in paulis]
        out = np.empty((thetas.shape[0], len(acts)))
        step = self._chunk()
        for start in range(0, thetas.shape[0], step):
            st = self._evolve(thetas[start : start + step])
            for j, act in enumerate(acts):
                out[start : start + step, j] = act.expectation(st) @ self._weights
        return out

    def loss(self, thetas, h: Observable) -> np.ndarray:
        if h.n != self.circuit.n:
            raise DimensionError(f"observable on {h.n} qubits, circuit on {self.circuit.n}")
        coeffs = np.array([c for c, _ in h])
        return self.term_values(thetas, [p for _, p in h]) @ coeffs


def circuit_unitary(c: ParameterizedCircuit, theta: Sequence[float], qubit_cap: int = 8) -> np.ndarray:
    """Dense ``U(theta)`` (columns are images of basis states)."""
    if c.n > qubit_cap:
        raise CapExceededError(f"unitary of {c.n} qubits exceeds the cap of {qubit_cap}")
    from .circuit import zero_state

    sim = DenseSimulator(c, zero_state(c.n), qubit_cap)
    theta = np.asarray(theta, dtype=float)
    # evolve every basis state as a batch sharing the same theta
    basis = np.eye(sim.dim, dtype=complex)
    psi = basis
    for i, g in enumerate(c.gates):
        th = np.full(sim.dim, theta[g.param_index]) if g.is_rotation else None
        psi = sim._apply_gate(psi, i, g, th)
    return psi.T


def loss(c, theta, h: Observable, rho: ProductState, qubit_cap: int = DEFAULT_QUBIT_CAP) -> float:
    """``Tr(U(theta) rho U(theta)^dagger H)`` by dense simulation."""
    return float(DenseSimulator(c, rho, qubit_cap).loss(np.asarray(theta, dtype=float)[None, :], h)[0])


def term_losses(c, thetas, paulis, rho, qubit_cap: int = DEFAULT_QUBIT_CAP) -> np.ndarray:
    return DenseSimulator(c, rho, qubit_cap).term_values(thetas, paulis)


def _shifted(theta: np.ndarray, m: int) -> np.ndarray:
    """Rows ``theta + e_t pi/2`` for t < m followed by ``theta - e_t pi/2``."""
    eye = np.eye(m) * (math.pi / 2)
    return np.vstack([theta + eye, theta - eye])


def gradient(c, theta, h: Observable, rho: ProductState, qubit_cap: int = DEFAULT_QUBIT_CAP) -> np.ndarray:
    """Exact gradient by the parameter-shift rule.

    Every parameter appears in exactly one rotation for circuits in the class;
    for reused parameters the shift rule is applied to each occurrence.
    """
    theta = np.asarray(theta, dtype=float)
    sim = DenseSimulator(c, rho, qubit_cap)
    counts = np.bincount([g.param_index for g in c.rotations], minlength=c.m)
    if np.all(counts <= 1):
        vals = sim.loss(_shifted(theta, c.m), h)
        return (vals[: c.m] - vals[c.m :]) / 2
    # dependent parameters: expand to one parameter per occurrence
    expanded, owner = _expand_parameters(c)
    sim_e = DenseSimulator(expanded, rho, qubit_cap)
    th_e = theta[owner]
    vals = sim_e.loss(_shifted(th_e, expanded.m), h)
    per_occ = (vals[: expanded.m] - vals[expanded.m :]) / 2
    return np.bincount(owner, weights=per_occ, minlength=c.m)


def _expand_parameters(c: ParameterizedCircuit) -> tuple[ParameterizedCircuit, np.ndarray]:
    gates, owner = [], []
    for g in c.gates:
        if g.is_rotation:
            gates.append(Gate.rotation(g.generator, g.qubits, len(owner)))
            owner.append(g.param_index)
        else:
            gates.append(g)
    return ParameterizedCircuit(c.n, tuple(gates), len(owner)), np.array(owner, dtype=np.int64)


def finite_difference_gradient(c, theta, h, rho, step: float = 1e-5, qubit_cap: int = DEFAULT_QUBIT_CAP) -> np.ndarray:
    """Central finite differences, for validating :func:`gradient`."""
    theta = np.asarray(theta, dtype=float)
    sim = DenseSimulator(c, rho, qubit_cap)
    eye = np.eye(c.m) * step
    vals = sim.loss(np.vstack([theta + eye, theta - eye]), h)
    return (vals[: c.m] - vals[c.m :]) / (2 * step)


# Monte Carlo moments ---------------------------------------------------------

def _mean_se(v: np.ndarray) -> tuple[float, float]:
    v = np.asarray(v, dtype=float)
    se = float(v.std(ddof=1) / math.sqrt(v.size)) if v.size > 1 else float("inf")
    return float(v.mean()), se


def _var_se(v: np.ndarray) -> tuple[float, float]:
    """Sample variance and its standard error from centred squares."""
    v = np.asarray(v, dtype=float)
    d = (v - v.mean()) ** 2
    return float(v.var(ddof=1)), float(d.std(ddof=1) / math.sqrt(v.size))


@dataclass
class MomentReport:
    """Monte Carlo moments of the loss and its Pauli terms over uniform angles.

    ``(estimate, standard error)`` pairs throughout; ``z`` fields are
    estimate / standard error against the predicted values (zero means,
    zero cross moments, additive variance).
    """

    labels: list[str]
    coeffs: list[float]
    n_samples: int
    range_scale: float
    seed: int
    term_means: list[tuple[float, float]]
    cross_moments: dict[str, tuple[float, float]]
    term_variances: list[tuple[float, float]]
    loss_variance: tuple[float, float]
    weighted_term_variance: tuple[float, float]
    additivity_gap: tuple[float, float]
    gradient_variances: list[tuple[float, float]] | None = None
    z_scores: dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    def max_abs_z(self) -> float:
        return max((abs(v) for v in self.z_scores.values()), default=0.0)


Z_ZERO_TOL = 1e-12


def _z(est: float, se: float) -> float:
    """``est / se``; deviations below ``Z_ZERO_TOL`` are rounding noise and score 0."""
    if abs(est) < Z_ZERO_TOL:
        return 0.0
    if se == 0:
        return math.copysign(math.inf, est)
    return est / se


def moment_suite(
    c: ParameterizedCircuit,
    h: Observable,
    rho: ProductState,
    n_samples: int,
    range_scale: float = 1.0,
    seed: int = 0,
    gradients: bool = False,
    qubit_cap: int = DEFAULT_QUBIT_CAP,
) -> MomentReport:
    """Moments of the Pauli-term losses for ``theta ~ U[-a pi, a pi]^m``.

    Parameters
    ----------
    gradients
        Also estimate ``Var[d_t L]`` for every parameter by parameter shift
        (``2 m`` extra simulations per sample).
    """
    if n_samples < 2:
        raise ValueError("n_samples must be at least 2")
    terms = h.non_identity()
    if not terms:
        raise ValueError("observable has no non-identity terms")
    paulis = [p for _, p in terms]
    coeffs = np.array([cf for cf, _ in terms])
    sim = DenseSimulator(c, rho, qubit_cap)
    vals, grads = [], []
    for block in sampling.uniform_angles(seed, n_samples, c.m, range_scale):
        vals.append(sim.term_values(block, paulis))
        if gradients:
            grads.append(_block_gradients(sim, block, h))
    L = np.vstack(vals)  # (N, T)
    T = L.shape[1]
    total = L @ coeffs
    means = [_mean_se(L[:, t]) for t in range(T)]
    cross = {}
    for a in range(T):
        for b in range(a + 1, T):
            cross[f"{paulis[a].label()}*{paulis[b].label()}"] = _mean_se(L[:, a] * L[:, b])
    term_vars = [_var_se(L[:, t]) for t in range(T)]
    loss_var = _var_se(total)
    centred = L - L.mean(axis=0)
    weighted = (centred**2) @ coeffs**2
    wvar = (float(weighted.sum() / (len(weighted) - 1)), float(weighted.std(ddof=1) / math.sqrt(len(weighted))))
    gap_samples = (total - total.mean()) ** 2 - weighted
    gap = (float(gap_samples.sum() / (len(gap_samples) - 1)), float(gap_samples.std(ddof=1) / math.sqrt(len(gap_samples))))
    z = {f"mean[{p.label()}]": _z(*ms) for p, ms in zip(paulis, means)}
    z.update({f"cross[{k}]": _z(*v) for k, v in cross.items()})
    z["additivity"] = _z(*gap)
    gvars = None
    if gradients:
        G = np.vstack(grads)
        gvars = [_var_se(G[:, t]) for t in range(c.m)]
    return MomentReport(
        labels=[p.label() for p in paulis],
        coeffs=coeffs.tolist(),
        n_samples=n_samples,
        range_scale=range_scale,
        seed=seed,
        term_means=means,
        cross_moments=cross,
        term_variances=term_vars,
        loss_variance=loss_var,
        weighted_term_variance=wvar,
        additivity_gap=gap,
        gradient_variances=gvars,
        z_scores=z,
    )


def _block_gradients(sim: DenseSimulator, block: np.ndarray, h: Observable) -> np.ndarray:
    m = block.shape[1]
    shift = np.eye(m) * (math.pi / 2)
    plus = (block[:, None, :] + shift).reshape(-1, m)
    minus = (block[:, None, :] - shift).reshape(-1, m)
    lp = sim.loss(plus, h).reshape(-1, m)
    lm = sim.loss(minus, h).reshape(-1, m)
    return (lp - lm) / 2


def gradient_variances(
    c: ParameterizedCircuit, h: Observable, rho: ProductState, n_samples: int, seed: int = 0,
    qubit_cap: int = DEFAULT_QUBIT_CAP,
) -> list[tuple[float, float]]:
    """``Var[d_t L]`` for every parameter over uniform angles, with standard errors."""
    sim = DenseSimulator(c, rho, qubit_cap)
    G = np.vstack([_block_gradients(sim, b, h) for b in sampling.uniform_angles(seed, n_samples, c.m)])
    return [_var_se(G[:, t]) for t in range(c.m)]


# discrete reduction ----------------------------------------------------------

def exact_discrete_moments(c: ParameterizedCircuit, p: PauliString, rho: ProductState, max_m: int = 20) -> tuple[float, float]:
    """Exact ``(E_theta[L_p], E_D[L_p^2])`` by enumerating ``2**m`` Clifford points twice.

    ``L_p`` is affine in ``cos`` and ``sin`` of every angle, so its uniform
    average equals the average over half turns ``{0, pi}^m``; the second moment
    is over ``D = {0, pi/2}^m``.
    """
    from .propagation import CompiledCircuit

    if c.m > max_m:
        raise CapExceededError(f"enumerating 2**{c.m} points exceeds the cap 2**{max_m}")
    comp = CompiledCircuit(c)
    first = second = 0.0
    pts = sampling.all_points(c.m)
    for start in range(0, len(pts), 1 << 16):
        block = pts[start : start + (1 << 16)]
        vals, _ = comp.loss_and_cone(block, p, rho)
        second += float(np.sum(vals**2))
        half, _ = comp.loss_and_cone(2 * block.astype(np.int64), p, rho)
        first += float(np.sum(half))
    return first / len(pts), second / len(pts)


def exact_discrete_second_moment(c: ParameterizedCircuit, p: PauliString, rho: ProductState, max_m: int = 20) -> float:
    """``E_D[L_p^2]`` by enumerating all ``2**m`` Clifford points."""
    return exact_discrete_moments(c, p, rho, max_m)[1]


@dataclass(frozen=True)
class ReductionCheck:
    continuous_variance: float
    continuous_se: float
    discrete_value: float
    discrete_se: float
    exact: bool
    z: float


def discrete_reduction_check(
    c: ParameterizedCircuit,
    p: PauliString,
    rho: ProductState,
    n_samples: int = 100_000,
    seed: int = 0,
    qubit_cap: int = 10,
) -> ReductionCheck:
    """Compare continuous Monte Carlo ``Var[L_p]`` with its Clifford-point counterpart.

    The discrete side is ``E_D[L_p^2] - E_theta[L_p]^2``; for circuits in the
    class the mean vanishes and this is ``E_D[L_p^2]``, while a string that
    commutes with the whole circuit gives a constant loss and zero on both
    sides. It is exact for ``m <= 20`` and sampled (with the same sample count)
    otherwise.
    """
    if c.n > qubit_cap:
        raise CapExceededError(f"{c.n} qubits exceeds the cap of {qubit_cap}")
    sim = DenseSimulator(c, rho, qubit_cap)
    L = np.concatenate([sim.term_values(b, [p])[:, 0] for b in sampling.uniform_angles(seed, n_samples, c.m)])
    var, se = _var_se(L)
    if c.m <= 20:
        mean, second = exact_discrete_moments(c, p, rho)
        disc, dse, exact = second - mean * mean, 0.0, True
    else:
        from .propagation import CompiledCircuit

        comp = CompiledCircuit(c)
        pts = list(sampling.discrete_points(seed, n_samples, c.m))
        sq = np.concatenate([comp.loss_and_cone(t, p, rho)[0] ** 2 for t in pts])
        half = np.concatenate([comp.loss_and_cone(2 * t.astype(np.int64), p, rho)[0] for t in pts])
        m2, m2_se = _mean_se(sq)
        m1, m1_se = _mean_se(half)
        disc, dse = m2 - m1 * m1, math.hypot(m2_se, 2 * abs(m1) * m1_se)
        exact = False
    joint = math.hypot(se, dse)
    return ReductionCheck(var, se, disc, dse, exact, _z(var - disc, joint))


def trig_moments(n_samples: int = 100_000, seed: int = 0) -> dict[str, tuple[float, float]]:
    """Empirical trigonometric moments of a uniform angle (sampler sanity check)."""
    th = np.concatenate(list(sampling.uniform_angles(seed, n_samples, 1)))[:, 0]
    s, c = np.sin(th), np.cos(th)
    return {
        "sin": _mean_se(s),
        "cos": _mean_se(c),
        "sin*cos": _mean_se(s * c),
        "sin^2": _mean_se(s * s),
        "cos^2": _mean_se(c * c),
    }
