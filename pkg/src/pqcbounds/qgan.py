"""Discriminator-induced observables of quantum GANs.

A discriminator ``D_phi: {0,1}^n -> R`` defines the diagonal observable
``H_phi = sum_x D_phi(x) |x><x|`` whose Z-string coefficients are the Walsh
coefficients ``c_a(phi) = 2^-n sum_x (-1)^(a.x) D_phi(x)``. For leaky-ReLU
networks with symmetric i.i.d. initialisation the one-local coefficients obey

    E_phi[c_a^2] >= (sigma_out^2 / 16) * prod_l m_l sigma_l^2 (1 + gamma_l)^2 / 4,

which no longer depends on ``n`` or on the depth once ``m_l sigma_l^2 >= 4``.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import sampling
from .circuit import ParameterizedCircuit, ProductState
from .errors import CapExceededError, DomainError
from .estimator import SampleSpec, estimate_observable
from .pauli import Observable, PauliString
from .polynomial import ENUMERATION_LIMIT, walsh_hadamard

__all__ = [
    "DiscriminatorSpec",
    "DiscriminatorParams",
    "init_discriminator",
    "forward",
    "extract_coefficients",
    "coefficient_table",
    "weight_bound",
    "reduced_weight_bound",
    "WeightBoundResult",
    "verify_weight_bound",
    "verify_weight_bound_outputs",
    "WEIGHT_BOUND_COLUMNS",
    "sample_one_local_coefficients",
    "locality_profile",
    "OUTPUTS",
]

OUTPUTS = ("wasserstein", "minmax")
_DRAW_CHUNK = 64


@dataclass(frozen=True)
class DiscriminatorSpec:
    """Architecture and initialisation law of a leaky-ReLU discriminator.

    Parameters
    ----------
    n
        Number of input bits.
    widths
        Hidden layer widths ``m_1..m_L`` (empty for a single affine layer).
    gammas
        Leaky-ReLU slopes, one per hidden layer, in ``(0, 1]``.
    sigmas
        Weight standard deviations for the ``L + 1`` weight matrices.
    output
        ``"wasserstein"`` (identity) or ``"minmax"`` (log-sigmoid).
    weight_law
        ``"uniform"`` on ``[-sqrt(3) s, sqrt(3) s]`` or ``"gaussian"``.
    bias_law, bias_scale
        ``"zero"`` or ``"uniform"`` on ``[-bias_scale, bias_scale]``.
    """

    n: int
    widths: tuple[int, ...] = ()
    gammas: tuple[float, ...] = ()
    sigmas: tuple[float, ...] = (2.0,)
    output: str = "wasserstein"
    weight_law: str = "uniform"
    bias_law: str = "zero"
    bias_scale: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "widths", tuple(int(w) for w in self.widths))
        object.__setattr__(self, "gammas", tuple(float(g) for g in self.gammas))
        object.__setattr__(self, "sigmas", tuple(float(s) for s in self.sigmas))
        object.__setattr__(self, "output", self.output.lower())
        if self.n < 1:
            raise ValueError("need at least one input bit")
        if any(w < 1 for w in self.widths):
            raise ValueError("layer widths must be positive")
        if len(self.gammas) != len(self.widths):
            raise ValueError("need one leaky slope per hidden layer")
        if any(not 0.0 < g <= 1.0 for g in self.gammas):
            raise ValueError("leaky slopes must lie in (0, 1]")
        if len(self.sigmas) != len(self.widths) + 1:
            raise ValueError("need one weight standard deviation per weight matrix (L + 1)")
        if any(s <= 0 for s in self.sigmas):
            raise ValueError("weight standard deviations must be positive")
        if self.output not in OUTPUTS:
            raise ValueError(f"output must be one of {OUTPUTS}")
        if self.weight_law not in ("uniform", "gaussian"):
            raise ValueError("weight_law must be 'uniform' or 'gaussian'")
        if self.bias_law not in ("zero", "uniform"):
            raise ValueError("bias_law must be 'zero' or 'uniform'")

    @property
    def depth(self) -> int:
        return len(self.widths)

    @property
    def layer_sizes(self) -> tuple[int, ...]:
        return (self.n, *self.widths, 1)

    @classmethod
    def standard(
        cls,
        n: int,
        layers: int,
        width: int,
        gamma: float,
        output: str = "wasserstein",
        sigma_out_sq: float | None = None,
        **kwargs,
    ) -> "DiscriminatorSpec":
        """Uniform-width network with ``sigma_l^2 = 4 / m_l`` for every layer.

        The output layer has ``m = 1`` so its default variance is 4;
        ``sigma_out_sq`` overrides it.
        """
        widths = (width,) * layers
        sig = [math.sqrt(4.0 / w) for w in widths]
        sig.append(math.sqrt(4.0 if sigma_out_sq is None else sigma_out_sq))
        return cls(n, widths, (gamma,) * layers, tuple(sig), output, **kwargs)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "DiscriminatorSpec":
        return cls(**d)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    @classmethod
    def from_json(cls, text: str) -> "DiscriminatorSpec":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class DiscriminatorParams:
    """Weights ``A[l]`` of shape ``(m_l, m_{l-1})`` and biases ``B[l]`` of shape ``(m_l,)``.

    A leading batch axis is allowed on every array (several draws at once).
    """

    weights: tuple[np.ndarray, ...]
    biases: tuple[np.ndarray, ...]

    def negated(self) -> "DiscriminatorParams":
        return DiscriminatorParams(tuple(-a for a in self.weights), tuple(-b for b in self.biases))


def _draw(rng: np.random.Generator, spec: DiscriminatorSpec, batch: tuple[int, ...]) -> DiscriminatorParams:
    sizes = spec.layer_sizes
    weights, biases = [], []
    for l in range(1, len(sizes)):
        shape = (*batch, sizes[l], sizes[l - 1])
        s = spec.sigmas[l - 1]
        if spec.weight_law == "uniform":
            a = rng.uniform(-math.sqrt(3) * s, math.sqrt(3) * s, size=shape)
        else:
            a = rng.normal(0.0, s, size=shape)
        if spec.bias_law == "zero":
            b = np.zeros((*batch, sizes[l]))
        else:
            b = rng.uniform(-spec.bias_scale, spec.bias_scale, size=(*batch, sizes[l]))
        weights.append(a)
        biases.append(b)
    return DiscriminatorParams(tuple(weights), tuple(biases))


def init_discriminator(spec: DiscriminatorSpec, seed: int = 0) -> DiscriminatorParams:
    """One draw of the initial parameters (deterministic in ``seed``)."""
    return _draw(sampling.chunk_rng(seed, 0, stream=20), spec, ())


def _leaky(v: np.ndarray, gamma: float) -> np.ndarray:
    return np.maximum(v, gamma * v)


def _log_sigmoid(v: np.ndarray) -> np.ndarray:
    # log(1 / (1 + e^-v)) = -log1p(e^-v) = min(v, 0) - log1p(e^-|v|)
    return np.minimum(v, 0.0) - np.log1p(np.exp(-np.abs(v)))


def _apply_output(pre: np.ndarray, output: str) -> np.ndarray:
    return pre if output == "wasserstein" else _log_sigmoid(pre)


def _pre_activation(params: DiscriminatorParams, spec: DiscriminatorSpec, x: np.ndarray) -> np.ndarray:
    """Output-layer pre-activation for inputs ``x`` of shape ``(N, n)``; batch axes broadcast."""
    h = np.asarray(x, dtype=float)
    L = spec.depth
    for l, (a, b) in enumerate(zip(params.weights, params.biases)):
        h = h @ np.swapaxes(a, -1, -2) + b[..., None, :]
        if l < L:
            h = _leaky(h, spec.gammas[l])
    return h[..., 0]


def forward(
    params: DiscriminatorParams, spec: DiscriminatorSpec, x, return_pre: bool = False
):
    """Discriminator output ``F(D^{L+1}(x))`` for one bitstring or a ``(N, n)`` batch."""
    xa = np.asarray(x, dtype=float)
    single = xa.ndim == 1
    if xa.shape[-1] != spec.n:
        raise ValueError(f"inputs must have {spec.n} bits")
    pre = _pre_activation(params, spec, np.atleast_2d(xa))
    out = _apply_output(pre, spec.output)
    if single:
        out, pre = out[..., 0], pre[..., 0]
    return (out, pre) if return_pre else out


def _all_inputs(n: int) -> np.ndarray:
    if n > ENUMERATION_LIMIT:
        raise CapExceededError(
            f"n={n} exceeds the enumeration limit {ENUMERATION_LIMIT}; "
            "use polynomial.estimate_blackbox_coefficients to sample coefficients instead"
        )
    return ((np.arange(1 << n)[:, None] >> np.arange(n)) & 1).astype(float)


def coefficient_table(params: DiscriminatorParams, spec: DiscriminatorSpec) -> np.ndarray:
    """All ``2**n`` Walsh coefficients; entry ``a`` belongs to the Z-string with mask ``a``."""
    values = forward(params, spec, _all_inputs(spec.n))
    return walsh_hadamard(values) / (1 << spec.n)


def extract_coefficients(
    params: DiscriminatorParams,
    spec: DiscriminatorSpec,
    targets: Sequence[PauliString] | None = None,
    max_weight: int | None = None,
    tol: float = 0.0,
) -> Observable:
    """The induced observable ``H_phi``, restricted to ``targets`` or to weight ``<= max_weight``."""
    table = coefficient_table(params, spec)
    n = spec.n
    if targets is not None:
        terms = []
        for t in targets:
            if t.n != n or not t.is_diagonal:
                raise ValueError(f"target {t} must be a diagonal {n}-qubit Pauli")
            terms.append((float(table[t.z]) * t.sign, t.unsigned()))
        return Observable(n, terms)
    w = n if max_weight is None else max_weight
    masks = np.arange(1 << n)
    keep = (np.bitwise_count(masks) <= w) & (np.abs(table) > tol)
    return Observable(n, [(float(table[a]), PauliString(n, 0, int(a))) for a in masks[keep]])


# weight bound -------------------------------------------------------------------

def weight_bound(spec: DiscriminatorSpec) -> float:
    """``(sigma_out^2 / 16) * prod_l m_l sigma_l^2 (1 + gamma_l)^2 / 4``."""
    out = spec.sigmas[-1] ** 2 / 16.0
    for m, s, g in zip(spec.widths, spec.sigmas[:-1], spec.gammas):
        out *= m * s * s * (1.0 + g) ** 2 / 4.0
    return out


def reduced_weight_bound(spec: DiscriminatorSpec) -> float:
    """``sigma_out^2 / 16``, valid whenever ``m_l sigma_l^2 >= 4`` for every hidden layer."""
    if any(m * s * s < 4.0 - 1e-12 for m, s in zip(spec.widths, spec.sigmas[:-1])):
        raise DomainError("the reduced bound needs m_l sigma_l^2 >= 4 on every hidden layer")
    return spec.sigmas[-1] ** 2 / 16.0


def sample_one_local_coefficients(
    spec: DiscriminatorSpec,
    n_draws: int,
    qubit: int = 0,
    seed: int = 0,
    outputs: Iterable[str] | None = None,
) -> dict[str, np.ndarray]:
    """``c_{Z_qubit}(phi)`` for ``n_draws`` independent initialisations.

    Several output activations can be evaluated on the same draws (one forward
    pass); the result maps each activation name to its coefficient samples.
    """
    if not 0 <= qubit < spec.n:
        raise IndexError(f"qubit {qubit} out of range")
    outputs = (spec.output,) if outputs is None else tuple(o.lower() for o in outputs)
    x = _all_inputs(spec.n)
    chi = 1.0 - 2.0 * x[:, qubit]
    scale = 1.0 / (1 << spec.n)
    res: dict[str, list[np.ndarray]] = {o: [] for o in outputs}
    for idx, start, stop in sampling.chunks(n_draws, _DRAW_CHUNK):
        params = _draw(sampling.chunk_rng(seed, idx, stream=21), spec, (stop - start,))
        pre = _pre_activation(params, spec, x)  # (draws, 2^n)
        for o in outputs:
            res[o].append(_apply_output(pre, o) @ chi * scale)
    return {o: np.concatenate(v) for o, v in res.items()}


@dataclass(frozen=True)
class WeightBoundResult:
    n: int
    L: int
    widths: tuple[int, ...]
    gamma: tuple[float, ...]
    sigma_out_sq: float
    output: str
    bound: float
    empirical: float
    stderr: float
    n_draws: int

    @property
    def passed(self) -> bool:
        return self.empirical >= self.bound - 4.0 * self.stderr

    def row(self) -> dict:
        return {
            "n": self.n,
            "L": self.L,
            "widths": " ".join(map(str, self.widths)),
            "gamma": " ".join(map(str, self.gamma)),
            "sigma_out_sq": self.sigma_out_sq,
            "bound": self.bound,
            "empirical": self.empirical,
            "stderr": self.stderr,
            "pass": self.passed,
        }


WEIGHT_BOUND_COLUMNS = ("n", "L", "widths", "gamma", "sigma_out_sq", "bound", "empirical", "stderr", "pass")


def _result(spec: DiscriminatorSpec, output: str, c: np.ndarray) -> WeightBoundResult:
    sq = c * c
    return WeightBoundResult(
        spec.n, spec.depth, spec.widths, spec.gammas, spec.sigmas[-1] ** 2, output,
        weight_bound(spec), float(sq.mean()), float(sq.std(ddof=1) / math.sqrt(sq.size)), sq.size,
    )


def verify_weight_bound(
    spec: DiscriminatorSpec,
    n_param_samples: int = 10_000,
    alpha: PauliString | int = 0,
    seed: int = 0,
) -> WeightBoundResult:
    """Monte Carlo ``E_phi[c_alpha^2]`` against :func:`weight_bound` for a one-local ``alpha``."""
    if isinstance(alpha, PauliString):
        if alpha.weight != 1 or not alpha.is_diagonal:
            raise DomainError("the weight bound covers one-local Z strings only")
        qubit = alpha.support[0]
    else:
        qubit = int(alpha)
    if n_param_samples < 2:
        raise ValueError("need at least two parameter draws")
    c = sample_one_local_coefficients(spec, n_param_samples, qubit, seed)[spec.output]
    return _result(spec, spec.output, c)


def verify_weight_bound_outputs(
    spec: DiscriminatorSpec, n_param_samples: int, qubit: int = 0, seed: int = 0
) -> dict[str, WeightBoundResult]:
    """:func:`verify_weight_bound` for both output activations from shared draws."""
    samples = sample_one_local_coefficients(spec, n_param_samples, qubit, seed, OUTPUTS)
    out = {}
    for o, c in samples.items():
        s = DiscriminatorSpec(spec.n, spec.widths, spec.gammas, spec.sigmas, o,
                              spec.weight_law, spec.bias_law, spec.bias_scale)
        out[o] = _result(s, o, c)
    return out


# locality profile ---------------------------------------------------------------

@dataclass
class LocalityGroup:
    k: int
    n_terms: int
    coeff_sq_sum: float
    variance: float
    variance_ci: tuple[float, float]
    lower: float
    upper: float


def locality_profile(
    params: DiscriminatorParams,
    spec: DiscriminatorSpec,
    generator: ParameterizedCircuit,
    rho: ProductState,
    k_groups: Iterable[int] | None = None,
    sample_spec: SampleSpec = SampleSpec(),
    allow_invalid: bool = False,
) -> list[LocalityGroup]:
    """Group the induced observable by Pauli weight and estimate each group's variance."""
    if generator.n != spec.n:
        raise ValueError("generator and discriminator must act on the same number of qubits")
    table = coefficient_table(params, spec)
    weights = np.bitwise_count(np.arange(1 << spec.n))
    ks = range(1, spec.n + 1) if k_groups is None else k_groups
    out = []
    for k in ks:
        masks = np.flatnonzero(weights == k)
        terms = [(float(table[a]), PauliString(spec.n, 0, int(a))) for a in masks if table[a] != 0.0]
        csq = float(np.sum(table[masks] ** 2))
        if not terms:
            out.append(LocalityGroup(k, 0, 0.0, 0.0, (0.0, 0.0), 0.0, 0.0))
            continue
        rep = estimate_observable(generator, Observable(spec.n, terms), rho, sample_spec, allow_invalid)
        out.append(LocalityGroup(
            k, len(terms), csq, rep.variance.estimate, (rep.variance.ci_lo, rep.variance.ci_hi),
            rep.lower.estimate, rep.upper.estimate,
        ))
    return out
