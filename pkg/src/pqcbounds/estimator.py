"""Monte Carlo estimation of loss variances and their light-cone bounds.

For a circuit in the supported class and a non-identity Pauli term ``P``, the
variance of ``L_P(theta)`` over uniform angles equals ``E_D[L_P^2]`` over the
discrete distribution ``D`` on ``{0, pi/2}^m``, and

    Omega(rho) * E_D[(1/4)^cone]  <=  Var[L_P]  <=  E_D[(1/2)^cone].

All three expectations are estimated from the same Clifford-point samples.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy import stats

from . import sampling
from .circuit import ParameterizedCircuit, ProductState, validate_circuit_class
from .errors import CircuitClassError, DimensionError, DomainError
from .pauli import Observable, PauliString
from .propagation import CompiledCircuit

__all__ = [
    "SampleSpec",
    "Estimate",
    "BoundReport",
    "ObservableReport",
    "orthogonality",
    "generalized_orthogonality",
    "bounds_from_cone_histogram",
    "estimate_term",
    "estimate_generalized_term",
    "estimate_observable",
    "estimate_gradient_variance",
    "estimate_gradient_variances",
    "estimate_observable_gradient_variance",
    "GradientReport",
    "GRADIENT_COLUMNS",
    "CSV_COLUMNS",
    "fit_log2_slope",
    "sweep_qubits",
    "estimator_variance_check",
    "VarianceCheck",
    "clopper_pearson",
    "normal_interval",
    "ENUMERATION_MAX_M",
]

ENUMERATION_MAX_M = 20


@dataclass(frozen=True)
class SampleSpec:
    """Sampling budget.

    ``threads`` caps the worker threads used to evaluate sample chunks; results
    are merged in chunk order, so they do not depend on it.
    """

    n_samples: int = 10_000
    seed: int = 0
    confidence_level: float = 0.95
    threads: int = 1

    def __post_init__(self) -> None:
        if self.n_samples < 1:
            raise ValueError("n_samples must be at least 1")
        if self.threads < 1:
            raise ValueError("threads must be at least 1")
        if not 0.0 < self.confidence_level < 1.0:
            raise ValueError("confidence_level must lie in (0, 1)")


@dataclass(frozen=True)
class Estimate:
    """A point estimate with a confidence interval and standard error."""

    estimate: float
    ci_lo: float
    ci_hi: float
    se: float = 0.0

    def __iter__(self):
        yield self.estimate
        yield (self.ci_lo, self.ci_hi)


def clopper_pearson(k: int, n: int, level: float = 0.95) -> tuple[float, float]:
    """Exact binomial interval for ``k`` successes out of ``n``."""
    a = 1.0 - level
    lo = 0.0 if k == 0 else float(stats.beta.ppf(a / 2, k, n - k + 1))
    hi = 1.0 if k == n else float(stats.beta.ppf(1 - a / 2, k + 1, n - k))
    return lo, hi


def normal_interval(mean: float, se: float, level: float = 0.95) -> tuple[float, float]:
    zq = float(stats.norm.ppf(0.5 + level / 2))
    return mean - zq * se, mean + zq * se


def _summarize(values: np.ndarray, level: float, exact: bool, allow_cp: bool = False) -> Estimate:
    """Mean of per-sample values, clipped to ``[0, 1]`` where they are probabilities."""
    v = np.asarray(values, dtype=float)
    mean = float(v.mean())
    if exact:
        return Estimate(mean, mean, mean, 0.0)
    se = float(v.std(ddof=1) / math.sqrt(v.size)) if v.size > 1 else float("inf")
    if allow_cp and np.all((v == 0.0) | (v == 1.0)):
        k = int(v.sum())
        lo, hi = clopper_pearson(k, v.size, level)
    else:
        lo, hi = normal_interval(mean, se, level)
    return Estimate(mean, lo, hi, se)


@dataclass(frozen=True)
class BoundReport:
    """Variance estimate of one Pauli term with its light-cone bounds."""

    alpha_label: str
    coeff: float
    lower: Estimate
    variance: Estimate
    upper: Estimate
    omega: float
    cone_histogram: dict[int, int]
    n_samples: int
    exact: bool

    def row(self, n: int) -> dict:
        return _row(n, self.alpha_label, self.coeff, self.n_samples, self.exact,
                    self.lower, self.variance, self.upper, self.omega)


@dataclass(frozen=True)
class ObservableReport:
    """Per-term reports plus the coefficient-weighted aggregate.

    Aggregate fields hold ``sum_a c_a^2 * (term quantity)``, estimated from
    per-sample sums so that the interval accounts for the shared samples.
    """

    terms: list[BoundReport]
    lower: Estimate
    variance: Estimate
    upper: Estimate
    n_samples: int
    exact: bool

    def rows(self, n: int) -> list[dict]:
        out = [t.row(n) for t in self.terms]
        out.append(_row(n, "aggregate", float("nan"), self.n_samples, self.exact,
                        self.lower, self.variance, self.upper, float("nan")))
        return out


CSV_COLUMNS = (
    "n", "alpha_label", "coeff", "n_samples", "exact",
    "lower", "lower_ci_lo", "lower_ci_hi",
    "variance", "var_ci_lo", "var_ci_hi",
    "upper", "upper_ci_lo", "upper_ci_hi",
    "omega",
)


def _row(n, label, coeff, n_samples, exact, lower, var, upper, omega) -> dict:
    return {
        "n": n, "alpha_label": label, "coeff": coeff, "n_samples": n_samples, "exact": exact,
        "lower": lower.estimate, "lower_ci_lo": lower.ci_lo, "lower_ci_hi": lower.ci_hi,
        "variance": var.estimate, "var_ci_lo": var.ci_lo, "var_ci_hi": var.ci_hi,
        "upper": upper.estimate, "upper_ci_lo": upper.ci_lo, "upper_ci_hi": upper.ci_hi,
        "omega": omega,
    }


# orthogonality measures -------------------------------------------------------

_AXIS = {"X": 0, "Y": 1, "Z": 2}


def orthogonality(rho: ProductState, nu: Sequence[str]) -> float:
    """``prod_i (|r_i|^2 - r_{i, nu_i}^2)``: weight of ``rho`` off the first-layer axes."""
    if len(nu) != rho.n:
        raise DimensionError(f"{len(nu)} axes for {rho.n} qubits")
    b = rho.bloch
    out = 1.0
    for i, axis in enumerate(nu):
        out *= float(b[i] @ b[i]) - float(b[i, _AXIS[axis]]) ** 2
    return out


def generalized_orthogonality(
    rho: ProductState, alpha: PauliString, nu: Sequence[str], mu: Sequence[str]
) -> float:
    """Factorised ``Omega(rho, alpha)`` over the qubits.

    Identity sites contribute 1, sites where ``alpha`` matches the second-layer
    axis contribute ``|r|^2 - r_nu^2`` and all other support sites ``|r|^2``.
    """
    if alpha.n != rho.n or len(nu) != rho.n or len(mu) != rho.n:
        raise DimensionError("alpha, axes and state must cover the same qubits")
    b = rho.bloch
    out = 1.0
    for q in alpha.support:
        norm2 = float(b[q] @ b[q])
        if alpha.site(q) == mu[q]:
            out *= norm2 - float(b[q, _AXIS[nu[q]]]) ** 2
        else:
            out *= norm2
    return out


def bounds_from_cone_histogram(hist: dict[int, float], omega: float = 1.0) -> tuple[float, float]:
    """Closed-form ``(Omega * E[(1/4)^C], E[(1/2)^C])`` for a cone-size distribution.

    ``hist`` maps cone size to probability mass or count; it is normalised.
    """
    total = float(sum(hist.values()))
    if total <= 0:
        raise ValueError("empty cone histogram")
    lower = sum(w * 0.25**c for c, w in hist.items()) / total
    upper = sum(w * 0.5**c for c, w in hist.items()) / total
    return omega * lower, upper


# sampling plumbing ------------------------------------------------------------

def _assignments(m: int, spec: SampleSpec) -> tuple[list[np.ndarray], bool]:
    """Chunks of Clifford points: exhaustive when cheap enough, else sampled."""
    if m <= ENUMERATION_MAX_M and (1 << m) <= spec.n_samples:
        pts = sampling.all_points(m)
        return [pts[i : i + sampling.CHUNK] for i in range(0, len(pts), sampling.CHUNK)], True
    return list(sampling.discrete_points(spec.seed, spec.n_samples, m)), False


def _check_inputs(c: ParameterizedCircuit, p: PauliString, rho: ProductState, allow_invalid: bool) -> None:
    if p.n != c.n or rho.n != c.n:
        raise DimensionError("circuit, Pauli and state must have the same qubit count")
    if p.is_identity:
        raise DomainError("the identity term has zero variance; pass a non-identity Pauli")
    if not allow_invalid:
        report = validate_circuit_class(c)
        if not report.valid:
            raise CircuitClassError(report)


def _omega(c: ParameterizedCircuit, rho: ProductState) -> float:
    nu = c.first_layer_axes
    return orthogonality(rho, nu) if nu is not None else 0.0


def _map_chunks(fn, chunks: list, threads: int) -> list:
    """``[fn(c) for c in chunks]``, optionally on a thread pool (order preserved)."""
    if threads <= 1 or len(chunks) <= 1:
        return [fn(c) for c in chunks]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, chunks))


def _term_samples(comp: CompiledCircuit, chunks: list[np.ndarray], p: PauliString, rho: ProductState, threads: int = 1):
    def one(t):
        v, cone = comp.loss_and_cone(t, p, rho)
        return v * v, cone

    parts = _map_chunks(one, chunks, threads)
    return np.concatenate([a for a, _ in parts]), np.concatenate([b for _, b in parts])


def _report(label, coeff, sq, cones, omega, spec, exact) -> BoundReport:
    level = spec.confidence_level
    lower = _summarize(omega * 0.25 ** cones.astype(float), level, exact)
    upper = _summarize(0.5 ** cones.astype(float), level, exact)
    var = _summarize(sq, level, exact, allow_cp=True)
    hist = dict(sorted(zip(*map(lambda a: a.tolist(), np.unique(cones, return_counts=True)))))
    return BoundReport(label, coeff, lower, var, upper, omega, hist, len(sq), exact)


def estimate_term(
    c: ParameterizedCircuit,
    p: PauliString,
    rho: ProductState,
    spec: SampleSpec = SampleSpec(),
    allow_invalid: bool = False,
) -> BoundReport:
    """Estimate ``Var[L_p]`` and its lower/upper light-cone bounds.

    The variance interval is Clopper-Pearson when every sampled ``L^2`` is 0 or
    1 and normal otherwise; bound intervals are normal. With ``m <= 20`` and
    ``2**m <= n_samples`` every point of ``D`` is enumerated and the report is
    exact (degenerate intervals).
    """
    _check_inputs(c, p, rho, allow_invalid)
    chunks, exact = _assignments(c.m, spec)
    sq, cones = _term_samples(CompiledCircuit(c), chunks, p, rho, spec.threads)
    return _report(p.label(), 1.0, sq, cones, _omega(c, rho), spec, exact)


@dataclass(frozen=True)
class GeneralizedReport:
    lower: Estimate
    variance: Estimate
    upper: Estimate
    n_samples: int
    exact: bool


def estimate_generalized_term(
    c: ParameterizedCircuit,
    p: PauliString,
    rho: ProductState,
    spec: SampleSpec = SampleSpec(),
) -> GeneralizedReport:
    """State-aware bounds ``E_D[Omega(rho, a) (1/4)^C] <= Var <= E_D[Omega(rho, a) (3/4)^C]``.

    ``a`` is ``p`` propagated through everything after the two initial
    rotation layers and ``C`` its weight; ``Omega(rho, a)`` is
    :func:`generalized_orthogonality`.
    """
    _check_inputs(c, p, rho, allow_invalid=False)
    nu, mu = c.first_layer_axes, c.second_layer_axes
    chunks, exact = _assignments(c.m, spec)
    full = CompiledCircuit(c)
    inner = CompiledCircuit(c, start=2 * c.n)
    sq, lo, hi = [], [], []
    for t in chunks:
        v, _ = full.loss_and_cone(t, p, rho)
        sq.append(v * v)
        for f in inner.frames(t, p):
            w = generalized_orthogonality(rho, f.pauli, nu, mu)
            lo.append(w * 0.25**f.cone)
            hi.append(w * 0.75**f.cone)
    level = spec.confidence_level
    sq = np.concatenate(sq)
    return GeneralizedReport(
        _summarize(np.array(lo), level, exact),
        _summarize(sq, level, exact, allow_cp=True),
        _summarize(np.array(hi), level, exact),
        len(sq),
        exact,
    )


def estimate_observable(
    c: ParameterizedCircuit,
    h: Observable,
    rho: ProductState,
    spec: SampleSpec = SampleSpec(),
    allow_invalid: bool = False,
) -> ObservableReport:
    """Per-term bound reports and their ``c^2``-weighted aggregate.

    All terms share the same Clifford points, so the per-term estimates are
    correlated but individually unbiased; the aggregate interval is computed
    from per-sample weighted sums and is therefore valid despite the sharing.
    The identity term contributes nothing.
    """
    if h.n != c.n:
        raise DimensionError(f"observable on {h.n} qubits, circuit on {c.n}")
    if len(h) == 0:
        raise ValueError("empty observable")
    if not allow_invalid:
        report = validate_circuit_class(c)
        if not report.valid:
            raise CircuitClassError(report)
    terms = h.non_identity()
    chunks, exact = _assignments(c.m, spec)
    n_pts = sum(len(t) for t in chunks)
    comp = CompiledCircuit(c)
    omega = _omega(c, rho)
    agg_var = np.zeros(n_pts)
    agg_lo = np.zeros(n_pts)
    agg_hi = np.zeros(n_pts)
    reports = []
    for coeff, p in terms:
        sq, cones = _term_samples(comp, chunks, p, rho, spec.threads)
        reports.append(_report(p.label(), coeff, sq, cones, omega, spec, exact))
        w = coeff * coeff
        agg_var += w * sq
        agg_lo += w * omega * 0.25 ** cones.astype(float)
        agg_hi += w * 0.5 ** cones.astype(float)
    level = spec.confidence_level
    return ObservableReport(
        reports,
        _summarize(agg_lo, level, exact),
        _summarize(agg_var, level, exact),
        _summarize(agg_hi, level, exact),
        n_pts,
        exact,
    )


# gradients ----------------------------------------------------------------------

def _gradient_samples(comp, chunks, p, rho, taus, threads: int = 1) -> np.ndarray:
    def one(t):
        out = np.empty((len(t), len(taus)))
        for j, tau in enumerate(taus):
            plus = t.astype(np.int64)
            minus = plus.copy()
            plus[:, tau] += 1
            minus[:, tau] -= 1
            lp, _ = comp.loss_and_cone(plus, p, rho)
            lm, _ = comp.loss_and_cone(minus, p, rho)
            out[:, j] = ((lp - lm) / 2) ** 2
        return out

    return np.vstack(_map_chunks(one, chunks, threads))


def estimate_gradient_variance(
    c: ParameterizedCircuit,
    p: PauliString,
    rho: ProductState,
    tau: int,
    spec: SampleSpec = SampleSpec(),
    allow_invalid: bool = False,
) -> Estimate:
    """``Var[d_tau L_p]`` as ``E_D[((L(theta + e pi/2) - L(theta - e pi/2)) / 2)^2]``.

    Shifted points stay at multiples of pi/2, so they are evaluated by Clifford
    propagation as well.
    """
    if not 0 <= tau < c.m:
        raise IndexError(f"parameter index {tau} out of range for m={c.m}")
    return estimate_gradient_variances(c, p, rho, spec, [tau], allow_invalid)[0]


def estimate_gradient_variances(
    c: ParameterizedCircuit,
    p: PauliString,
    rho: ProductState,
    spec: SampleSpec = SampleSpec(),
    taus: Sequence[int] | None = None,
    allow_invalid: bool = False,
) -> list[Estimate]:
    """Gradient variances for several parameters from shared samples."""
    _check_inputs(c, p, rho, allow_invalid)
    taus = list(range(c.m)) if taus is None else list(taus)
    if any(not 0 <= t < c.m for t in taus):
        raise IndexError(f"parameter index out of range for m={c.m}")
    chunks, exact = _assignments(c.m, spec)
    g = _gradient_samples(CompiledCircuit(c), chunks, p, rho, taus, spec.threads)
    return [_summarize(g[:, j], spec.confidence_level, exact, allow_cp=True) for j in range(len(taus))]


@dataclass(frozen=True)
class GradientReport:
    """``Var[d_tau L]`` per Pauli term and the ``c^2``-weighted aggregate."""

    param: int
    labels: list[str]
    coeffs: list[float]
    terms: list[Estimate]
    aggregate: Estimate
    n_samples: int
    exact: bool

    def rows(self, n: int) -> list[dict]:
        out = [_grad_row(n, lab, c, self.param, self.n_samples, self.exact, e)
               for lab, c, e in zip(self.labels, self.coeffs, self.terms)]
        out.append(_grad_row(n, "aggregate", float("nan"), self.param, self.n_samples,
                             self.exact, self.aggregate))
        return out


GRADIENT_COLUMNS = (
    "n", "alpha_label", "coeff", "param", "n_samples", "exact",
    "grad_variance", "grad_ci_lo", "grad_ci_hi",
)


def _grad_row(n, label, coeff, param, n_samples, exact, e: Estimate) -> dict:
    return {
        "n": n, "alpha_label": label, "coeff": coeff, "param": param, "n_samples": n_samples,
        "exact": exact, "grad_variance": e.estimate, "grad_ci_lo": e.ci_lo, "grad_ci_hi": e.ci_hi,
    }


def estimate_observable_gradient_variance(
    c: ParameterizedCircuit,
    h: Observable,
    rho: ProductState,
    tau: int,
    spec: SampleSpec = SampleSpec(),
    allow_invalid: bool = False,
) -> GradientReport:
    """Gradient variance of every term of ``h`` with respect to parameter ``tau``.

    Terms share the Clifford points; the aggregate is the mean of per-sample
    ``sum_a c_a^2 g_a`` so its interval accounts for the sharing.
    """
    if h.n != c.n:
        raise DimensionError(f"observable on {h.n} qubits, circuit on {c.n}")
    terms = h.non_identity()
    if not terms:
        raise ValueError("observable has no non-identity terms")
    if not 0 <= tau < c.m:
        raise IndexError(f"parameter index {tau} out of range for m={c.m}")
    for _, p in terms:
        _check_inputs(c, p, rho, allow_invalid)
        allow_invalid = True  # validated once
    chunks, exact = _assignments(c.m, spec)
    comp = CompiledCircuit(c)
    level = spec.confidence_level
    ests, agg = [], None
    for coeff, p in terms:
        g = _gradient_samples(comp, chunks, p, rho, [tau], spec.threads)[:, 0]
        ests.append(_summarize(g, level, exact, allow_cp=True))
        agg = coeff * coeff * g if agg is None else agg + coeff * coeff * g
    return GradientReport(
        tau, [p.label() for _, p in terms], [c_ for c_, _ in terms], ests,
        _summarize(agg, level, exact), len(agg), exact,
    )


# sweeps ---------------------------------------------------------------------------

def sweep_qubits(
    builder: Callable[[int], ParameterizedCircuit],
    h_rule: Callable[[int], Observable],
    rho_rule: Callable[[int], ProductState],
    n_list: Iterable[int],
    spec: SampleSpec = SampleSpec(),
    allow_invalid: bool = False,
) -> list[dict]:
    """One :func:`estimate_observable` run per qubit count, flattened to rows."""
    n_list = list(n_list)
    if not n_list:
        raise ValueError("n_list must not be empty")
    rows: list[dict] = []
    for n in n_list:
        rep = estimate_observable(builder(n), h_rule(n), rho_rule(n), spec, allow_invalid)
        rows.extend(rep.rows(n))
    return rows


def fit_log2_slope(ns: Sequence[int], values: Sequence[float]) -> float:
    """Least-squares slope of ``log2(value)`` against ``n`` (bits per qubit)."""
    ns = np.asarray(ns, dtype=float)
    vals = np.asarray(values, dtype=float)
    if np.any(vals <= 0):
        raise ValueError("values must be positive to fit an exponential")
    return float(np.polyfit(ns, np.log2(vals), 1)[0])


# estimator variance -------------------------------------------------------------

@dataclass(frozen=True)
class VarianceCheck:
    """Per-sample variance of a Bernoulli(g) variable versus ``(1/4)^X``.

    ``X ~ Binomial(n, p_g)`` with ``p_g = (4/3)(1 - g^(1/n))`` so that
    ``E[(1/4)^X] = g``.
    """

    g: float
    n: int
    n_samples: int
    p_g: float
    bernoulli_variance: float
    bernoulli_analytic: float
    cone_variance: float
    cone_cap: float

    @property
    def bernoulli_rel_error(self) -> float:
        if self.bernoulli_analytic == 0:
            return 0.0 if self.bernoulli_variance == 0 else math.inf
        return abs(self.bernoulli_variance - self.bernoulli_analytic) / self.bernoulli_analytic

    @property
    def cone_within_cap(self) -> bool:
        return self.cone_variance <= self.cone_cap

    def to_dict(self) -> dict:
        d = asdict(self)
        d["bernoulli_rel_error"] = self.bernoulli_rel_error
        d["cone_within_cap"] = self.cone_within_cap
        return d


def estimator_variance_check(g: float, n: int = 30, n_samples: int = 1_000_000, seed: int = 0) -> VarianceCheck:
    """Compare the spread of a direct Bernoulli estimator with the cone-bound estimator."""
    if not 0.0 <= g < 1.0:
        raise ValueError("g must lie in [0, 1)")
    if n < 1 or n_samples < 2:
        raise ValueError("need n >= 1 and n_samples >= 2")
    if g == 0.0:
        return VarianceCheck(0.0, n, n_samples, 4 / 3, 0.0, 0.0, 0.0, 0.0)
    p_g = (4.0 / 3.0) * (1.0 - g ** (1.0 / n))
    if p_g > 1.0:
        raise ValueError(f"g={g} is too small for n={n}: p_g={p_g:.4g} > 1")
    ys = np.concatenate(list(sampling.stream(seed, n_samples, lambda r, k: r.random(k) < g, stream_id=2)))
    xs = np.concatenate(list(sampling.stream(seed, n_samples, lambda r, k: r.binomial(n, p_g, k), stream_id=3)))
    cone = 0.25 ** xs.astype(float)
    return VarianceCheck(
        g=g,
        n=n,
        n_samples=n_samples,
        p_g=p_g,
        bernoulli_variance=float(ys.astype(float).var(ddof=1)),
        bernoulli_analytic=g - g * g,
        cone_variance=float(cone.var(ddof=1)),
        cone_cap=g**1.25 - g * g,
    )
