import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _builders import random_class_circuit, random_observable, random_pauli, random_product_state
from pqcbounds import oracle
from pqcbounds.circuit import (
    Gate,
    ParameterizedCircuit,
    build_efficient_su2,
    maximally_mixed,
    mixed_state,
    zero_state,
)
from pqcbounds.errors import CircuitClassError, DimensionError, DomainError
from pqcbounds.estimator import (
    CSV_COLUMNS,
    GRADIENT_COLUMNS,
    SampleSpec,
    bounds_from_cone_histogram,
    clopper_pearson,
    estimate_generalized_term,
    estimate_gradient_variance,
    estimate_gradient_variances,
    estimate_observable,
    estimate_observable_gradient_variance,
    estimate_term,
    estimator_variance_check,
    fit_log2_slope,
    generalized_orthogonality,
    orthogonality,
    sweep_qubits,
)
from pqcbounds.fixtures import get_fixture
from pqcbounds.pauli import Observable, PauliString

P = PauliString.from_label
EXACT = SampleSpec(n_samples=1 << 20)


def ry_rz() -> ParameterizedCircuit:
    return ParameterizedCircuit(1, (Gate.rotation("Y", 0, 0), Gate.rotation("Z", 0, 1)))


def two_layers(n: int) -> ParameterizedCircuit:
    """``R_Y`` then ``R_Z`` on every qubit and nothing else."""
    gates = [Gate.rotation("Y", q, q) for q in range(n)] + [Gate.rotation("Z", q, n + q) for q in range(n)]
    return ParameterizedCircuit(n, tuple(gates))


# orthogonality ----------------------------------------------------------------------

def test_orthogonality_examples():
    assert orthogonality(zero_state(3), "YYY") == 1.0
    assert orthogonality(maximally_mixed(3), "XYZ") == 0.0
    assert orthogonality(zero_state(2), "ZZ") == 0.0
    with pytest.raises(DimensionError):
        orthogonality(zero_state(2), "Y")


def test_orthogonality_is_product_of_off_axis_weight():
    rho = mixed_state(2, [(0.3, 0.4, 0.5), (0.0, 0.6, 0.0)])
    assert orthogonality(rho, "YX") == pytest.approx((0.09 + 0.25) * 0.36)


def test_generalized_orthogonality_examples():
    rho = zero_state(3)
    assert generalized_orthogonality(rho, P("III"), "YYY", "ZZZ") == 1.0
    assert generalized_orthogonality(rho, P("ZII"), "YYY", "ZZZ") == 1.0
    assert generalized_orthogonality(rho, P("IXI"), "YYY", "ZZZ") == 1.0
    mixed = mixed_state(1, [(0.0, 0.6, 0.0)])
    assert generalized_orthogonality(mixed, P("Z"), "Y", "Z") == 0.0
    assert generalized_orthogonality(mixed, P("X"), "Y", "Z") == pytest.approx(0.36)


# closed-form bounds -----------------------------------------------------------------

def test_bounds_from_cone_histogram():
    assert bounds_from_cone_histogram({1: 0.5, 3: 0.5}) == (0.1328125, 0.3125)
    assert bounds_from_cone_histogram({1: 10, 3: 10}, omega=0.5) == (0.06640625, 0.3125)
    with pytest.raises(ValueError):
        bounds_from_cone_histogram({})


def test_light_cone_demo_enumeration_matches_histogram():
    f = get_fixture("light_cone_demo")
    rep = estimate_term(f.circuit, f.observable.terms[0][1], f.rho, EXACT)
    total = sum(rep.cone_histogram.values())
    hist = {k: v / total for k, v in rep.cone_histogram.items()}
    assert hist == {1: 0.5, 3: 0.5}
    assert (rep.lower.estimate, rep.upper.estimate) == bounds_from_cone_histogram(hist, rep.omega)


def test_clopper_pearson():
    assert clopper_pearson(0, 10) == (0.0, pytest.approx(0.30849, abs=1e-5))
    lo, hi = clopper_pearson(5, 10)
    assert lo == pytest.approx(0.18709, abs=1e-5) and hi == pytest.approx(0.81291, abs=1e-5)
    assert clopper_pearson(10, 10)[1] == 1.0


# single terms -----------------------------------------------------------------------

def test_single_qubit_example_is_exact():
    rep = estimate_term(ry_rz(), P("Z"), zero_state(1))
    assert rep.exact and rep.n_samples == 4
    assert rep.variance.estimate == 0.5
    assert rep.upper.estimate == 0.5
    assert rep.lower.estimate == 0.25
    assert rep.cone_histogram == {1: 4}


def test_maximally_mixed_has_zero_lower_bound():
    c = build_efficient_su2(3, 1)
    rep = estimate_term(c, P("ZII"), maximally_mixed(3), SampleSpec(2000))
    assert rep.omega == 0.0 and rep.lower.estimate == 0.0
    assert rep.variance.estimate == 0.0


def test_sampled_report_uses_clopper_pearson_for_stabilizer_values():
    c = build_efficient_su2(6, 2)
    rep = estimate_term(c, P("ZIIIII"), zero_state(6), SampleSpec(5000, seed=1))
    assert not rep.exact and rep.n_samples == 5000
    k = round(rep.variance.estimate * 5000)
    assert (rep.variance.ci_lo, rep.variance.ci_hi) == clopper_pearson(k, 5000)
    assert rep.lower.ci_lo < rep.lower.estimate < rep.lower.ci_hi
    assert sum(rep.cone_histogram.values()) == 5000
    assert 0.0 <= rep.lower.estimate <= rep.upper.estimate <= 1.0


def test_input_errors():
    c = build_efficient_su2(2, 1)
    with pytest.raises(DomainError):
        estimate_term(c, P("II"), zero_state(2))
    with pytest.raises(DimensionError):
        estimate_term(c, P("ZII"), zero_state(2))
    bad = get_fixture("non_adjacent_layers")
    p = bad.observable.terms[0][1]
    with pytest.raises(CircuitClassError):
        estimate_term(bad.circuit, p, bad.rho)
    estimate_term(bad.circuit, p, bad.rho, allow_invalid=True)
    with pytest.raises(ValueError):
        SampleSpec(0)
    with pytest.raises(ValueError):
        SampleSpec(threads=0)
    with pytest.raises(ValueError):
        SampleSpec(confidence_level=1.0)


def test_determinism_and_thread_invariance():
    c = build_efficient_su2(8, 2)
    h = Observable.from_labels([(1.0, "Z" + "I" * 7), (0.5, "X" * 8)])
    a = estimate_observable(c, h, zero_state(8), SampleSpec(20_000, seed=5))
    b = estimate_observable(c, h, zero_state(8), SampleSpec(20_000, seed=5))
    t = estimate_observable(c, h, zero_state(8), SampleSpec(20_000, seed=5, threads=4))
    assert a == b == t
    other = estimate_observable(c, h, zero_state(8), SampleSpec(20_000, seed=6))
    assert other != a


# observables ------------------------------------------------------------------------

def test_single_term_aggregate_is_scaled_term_variance():
    c = build_efficient_su2(3, 1)
    rep = estimate_observable(c, Observable.from_labels([(3.0, "ZXI")]), zero_state(3), SampleSpec(3000))
    assert rep.variance.estimate == pytest.approx(9.0 * rep.terms[0].variance.estimate)
    assert rep.upper.estimate == pytest.approx(9.0 * rep.terms[0].upper.estimate)


def test_identity_only_observable_has_zero_aggregate():
    c = build_efficient_su2(2, 1)
    rep = estimate_observable(c, Observable.from_labels([(2.0, "II")]), zero_state(2), SampleSpec(100))
    assert rep.terms == [] and rep.variance.estimate == 0.0
    with pytest.raises(ValueError):
        estimate_observable(c, Observable(2, []), zero_state(2))


def test_aggregate_equals_weighted_term_sum():
    rng = np.random.default_rng(0)
    c = build_efficient_su2(4, 1)
    h = random_observable(rng, 4, 4)
    rep = estimate_observable(c, h, zero_state(4), SampleSpec(4000, seed=2))
    expected = sum(t.coeff**2 * t.variance.estimate for t in rep.terms)
    assert rep.variance.estimate == pytest.approx(expected)
    rows = rep.rows(4)
    assert all(tuple(r) == CSV_COLUMNS for r in rows)
    assert rows[-1]["alpha_label"] == "aggregate"


def test_log_depth_aggregate_exceeds_local_floor():
    n, d = 8, 3
    c = build_efficient_su2(n, d)
    h = Observable.from_labels([(1.0, "Z" + "I" * (n - 1)), (1.0, "X" * n)])
    rep = estimate_observable(c, h, zero_state(n), SampleSpec(5000))
    assert rep.variance.estimate >= 0.25 ** (1 + 4 * d)


@given(st.integers(0, 2**32 - 1), st.integers(1, 4))
@settings(max_examples=50)
def test_sandwich_holds_exactly(seed, n):
    rng = np.random.default_rng(seed)
    c = random_class_circuit(rng, n, m_max=12)
    h = random_observable(rng, n, 3)
    rho = random_product_state(rng, n)
    rep = estimate_observable(c, h, rho, EXACT)
    assert rep.exact
    assert rep.lower.estimate <= rep.variance.estimate + 1e-12
    assert rep.variance.estimate <= rep.upper.estimate + 1e-12
    for t in rep.terms:
        assert t.lower.estimate <= t.variance.estimate + 1e-12 <= t.upper.estimate + 2e-12


@given(st.integers(0, 2**32 - 1), st.integers(1, 3))
@settings(max_examples=30)
def test_generalized_sandwich(seed, n):
    rng = np.random.default_rng(seed)
    c = random_class_circuit(rng, n, m_max=10)
    p = random_pauli(rng, n)
    rho = random_product_state(rng, n)
    rep = estimate_generalized_term(c, p, rho, EXACT)
    assert rep.lower.estimate <= rep.variance.estimate + 1e-12 <= rep.upper.estimate + 2e-12
    # the state-aware bounds sit inside the plain ones
    plain = estimate_term(c, p, rho, EXACT)
    assert rep.lower.estimate >= plain.lower.estimate - 1e-12
    assert rep.variance.estimate == pytest.approx(plain.variance.estimate)


# tightness --------------------------------------------------------------------------

@pytest.mark.parametrize("n", [1, 2, 3])
def test_upper_bound_attained_when_alpha_matches_second_layer(n):
    c = two_layers(n)
    for sites in itertools.product("IZ", repeat=n):
        label = "".join(sites)
        if set(label) == {"I"}:
            continue
        rep = estimate_term(c, P(label), zero_state(n), EXACT)
        assert rep.variance.estimate == 0.5 ** P(label).weight == rep.upper.estimate


@pytest.mark.parametrize("n", [1, 2, 3])
def test_lower_bound_attained_for_pure_state_off_second_layer(n):
    c = two_layers(n)
    rho = mixed_state(n, [(math.sin(0.3 + q), 0.0, math.cos(0.3 + q)) for q in range(n)])
    omega = orthogonality(rho, c.first_layer_axes)
    assert omega == pytest.approx(1.0)
    for sites in itertools.product("IXY", repeat=n):
        label = "".join(sites)
        if set(label) == {"I"}:
            continue
        rep = estimate_term(c, P(label), rho, EXACT)
        assert rep.variance.estimate == pytest.approx(omega * 0.25 ** P(label).weight, abs=1e-12)
        assert rep.variance.estimate == pytest.approx(rep.lower.estimate, abs=1e-12)


# gradients --------------------------------------------------------------------------

def test_commuting_final_rotation_gradient_is_zero():
    e = estimate_gradient_variance(ry_rz(), P("Z"), zero_state(1), 1)
    assert e.estimate == 0.0
    with pytest.raises(IndexError):
        estimate_gradient_variance(ry_rz(), P("Z"), zero_state(1), 2)


def test_gradient_maximum_equals_variance_efficient_su2():
    c = build_efficient_su2(3, 1)
    p = P("ZII")
    var = estimate_term(c, p, zero_state(3), EXACT).variance.estimate
    grads = [e.estimate for e in estimate_gradient_variances(c, p, zero_state(3), EXACT)]
    assert max(grads) == pytest.approx(var)
    assert all(g <= var + 1e-12 for g in grads)


@given(st.integers(0, 2**32 - 1), st.integers(1, 3))
@settings(max_examples=20)
def test_clifford_gradients_match_dense_gradient_variance(seed, n):
    rng = np.random.default_rng(seed)
    c = random_class_circuit(rng, n, m_max=8)
    p = random_pauli(rng, n)
    rho = random_product_state(rng, n)
    h = Observable(n, [(1.0, p)])
    points = np.array(list(itertools.product((0.0, math.pi / 2), repeat=c.m)))
    dense = np.array([oracle.gradient(c, th, h, rho) for th in points])
    ests = estimate_gradient_variances(c, p, rho, EXACT)
    assert np.allclose([e.estimate for e in ests], (dense**2).mean(axis=0), atol=1e-12)


def test_observable_gradient_report():
    c = build_efficient_su2(3, 1)
    h = Observable.from_labels([(2.0, "ZII"), (1.0, "XXX")])
    rep = estimate_observable_gradient_variance(c, h, zero_state(3), 0, EXACT)
    singles = [estimate_gradient_variance(c, P(lab), zero_state(3), 0, EXACT).estimate for lab in ("ZII", "XXX")]
    assert [t.estimate for t in rep.terms] == singles
    assert rep.aggregate.estimate == pytest.approx(4 * singles[0] + singles[1])
    rows = rep.rows(3)
    assert all(tuple(r) == GRADIENT_COLUMNS for r in rows)


# sweeps -----------------------------------------------------------------------------

def test_sweep_rows_and_slope():
    rows = sweep_qubits(
        lambda n: build_efficient_su2(n, 2),
        lambda n: Observable.from_labels([(1.0, "X" * n)]),
        zero_state,
        [2, 4, 6],
        SampleSpec(4000),
    )
    assert [r["n"] for r in rows] == [2, 2, 4, 4, 6, 6]
    agg = [r["variance"] for r in rows if r["alpha_label"] == "aggregate"]
    assert agg[0] > agg[1] > agg[2]
    with pytest.raises(ValueError):
        sweep_qubits(lambda n: build_efficient_su2(n, 1), None, zero_state, [])


def test_fit_log2_slope():
    ns = [2, 4, 6]
    assert fit_log2_slope(ns, [2.0**-n for n in ns]) == pytest.approx(-1.0)
    with pytest.raises(ValueError):
        fit_log2_slope(ns, [0.1, 0.0, 0.1])


# estimator variance -----------------------------------------------------------------

def test_estimator_variance_g_zero():
    r = estimator_variance_check(0.0)
    assert r.bernoulli_variance == r.cone_variance == 0.0


@pytest.mark.parametrize("g", [0.1, 0.53])
def test_estimator_variance_cap(g):
    r = estimator_variance_check(g, n_samples=200_000)
    assert r.cone_within_cap
    assert r.bernoulli_rel_error < 0.05
    assert r.to_dict()["cone_within_cap"] is True


def test_estimator_variance_arguments():
    with pytest.raises(ValueError):
        estimator_variance_check(1.0)
    with pytest.raises(ValueError):
        estimator_variance_check(1e-30, n=1)
