import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from _builders import random_circuit, random_class_circuit, random_pauli, random_product_state
from pqcbounds.circuit import Gate, ParameterizedCircuit, build_cartan, build_efficient_su2, zero_state, mixed_state
from pqcbounds.errors import DomainError
from pqcbounds.fixtures import get_fixture
from pqcbounds.pauli import PauliString
from pqcbounds.propagation import (
    CompiledCircuit,
    PropagatedFrame,
    conjugate_gate,
    full_cone,
    full_cone_formula,
    heisenberg_matrix,
    loss_value_at_clifford_point,
    propagate,
    to_turns,
)

P = PauliString.from_label
HALF_PI = math.pi / 2


# single gates ------------------------------------------------------------------------

def test_x_through_quarter_z_rotation_is_minus_y():
    assert conjugate_gate(P("X"), Gate.rotation("Z", 0, 0), HALF_PI) == P("-Y")


def test_z_on_control_passes_cnot():
    assert conjugate_gate(P("ZI"), Gate("CNOT", (0, 1))) == P("ZI")


def test_x_on_control_spreads_through_cnot():
    assert conjugate_gate(P("XI"), Gate("CNOT", (0, 1))) == P("XX")


def test_commuting_generator_is_identity_map():
    for t in range(4):
        assert conjugate_gate(P("ZX"), Gate.rotation("Z", 0, 0), t) == P("ZX")


def test_half_and_three_quarter_turns():
    g = Gate.rotation("Z", 0, 0)
    assert conjugate_gate(P("X"), g, 2) == P("-X")
    assert conjugate_gate(P("X"), g, 3) == P("Y")
    assert conjugate_gate(P("X"), g, math.pi) == P("-X")


def test_continuous_angle_is_a_domain_error():
    with pytest.raises(DomainError):
        conjugate_gate(P("X"), Gate.rotation("Z", 0, 0), 0.3)
    with pytest.raises(DomainError):
        to_turns([math.pi / 3])


def test_t_gate_has_no_clifford_conjugation():
    with pytest.raises(DomainError):
        conjugate_gate(P("X"), Gate("T", (0,)))


ALL_GATES = [Gate("H", (0,)), Gate("S", (1,)), Gate("CNOT", (0, 1)), Gate("CNOT", (1, 0)),
             Gate("CZ", (0, 1)), Gate("SWAP", (0, 1))]


@pytest.mark.parametrize("g", ALL_GATES, ids=lambda g: f"{g.kind}{g.qubits}")
def test_clifford_tables_match_dense_conjugation(g):
    from pqcbounds.oracle import circuit_unitary

    c = ParameterizedCircuit(2, (g,), 0)
    u = circuit_unitary(c, [])
    for label in ("".join(t) for t in itertools.product("IXYZ", repeat=2)):
        p = P(label)
        assert np.allclose(conjugate_gate(p, g).to_matrix(), u.conj().T @ p.to_matrix() @ u)


@pytest.mark.parametrize("gen", ["X", "Y", "Z", "XZ", "YY", "ZX"])
@pytest.mark.parametrize("turns", [0, 1, 2, 3])
def test_rotation_matches_dense_conjugation(gen, turns):
    qubits = (0,) if len(gen) == 1 else (0, 1)
    g = Gate.rotation(gen, qubits, 0)
    c = ParameterizedCircuit(2, (g,), 1)
    for label in ("".join(t) for t in itertools.product("IXYZ", repeat=2)):
        p = P(label)
        dense = heisenberg_matrix(c, [turns * HALF_PI], p)
        assert np.allclose(conjugate_gate(p, g, turns).to_matrix(), dense)


# whole circuits -----------------------------------------------------------------------

@given(st.integers(0, 2**32 - 1), st.integers(1, 3))
def test_propagation_matches_dense_matrices(seed, n):
    rng = np.random.default_rng(seed)
    c = random_circuit(rng, n, n_gates=10)
    p = random_pauli(rng, n, allow_identity=True)
    points = itertools.product(range(2), repeat=c.m) if c.m <= 6 else rng.integers(0, 4, (20, c.m))
    for t in points:
        t = np.asarray(t, dtype=np.int64)
        frame = propagate(c, t, p)
        assert np.allclose(frame.pauli.to_matrix(), heisenberg_matrix(c, t * HALF_PI, p), atol=1e-10)


@given(st.integers(0, 2**32 - 1), st.integers(1, 5))
def test_batched_propagation_matches_scalar(seed, n):
    rng = np.random.default_rng(seed)
    c = random_circuit(rng, n, n_gates=15)
    p = random_pauli(rng, n)
    turns = rng.integers(0, 4, size=(16, c.m))
    frames = CompiledCircuit(c).frames(turns, p)
    for row, f in zip(turns, frames):
        assert f == propagate(c, row, p)


def test_float_and_integer_assignments_agree():
    c = build_efficient_su2(3, 1)
    p = P("ZIX")
    bits = np.random.default_rng(0).integers(0, 2, c.m)
    assert propagate(c, bits, p) == propagate(c, bits * HALF_PI, p)


def test_zero_assignment_cone_only_grows_through_entanglers():
    p = P("ZIII")
    assert propagate(build_efficient_su2(4, 0), np.zeros(8, dtype=int), p).cone == 1


def test_light_cone_demo_cones():
    f = get_fixture("light_cone_demo")
    p = f.observable.terms[0][1]
    t = np.zeros(7, dtype=int)
    assert propagate(f.circuit, t, p).cone == 1
    t[6] = 1
    assert propagate(f.circuit, t, p).cone == 3
    assert full_cone(f.circuit, p) == 3


def test_global_string_collapses_through_cnot():
    c = ParameterizedCircuit(2, (Gate("CNOT", (0, 1)),), 0)
    frame = propagate(c, np.zeros(0, dtype=int), P("XX"))
    assert frame.pauli == P("XI") and frame.cone == 1


def test_propagated_frames_stay_hermitian():
    rng = np.random.default_rng(1)
    for _ in range(50):
        c = random_circuit(rng, 4, 20)
        f = propagate(c, rng.integers(0, 4, c.m), random_pauli(rng, 4))
        assert f.sign in (1, -1)
        assert f.cone == f.pauli.weight


def test_frame_rejects_non_hermitian_pauli():
    with pytest.raises(AssertionError):
        PropagatedFrame(P("iX"))


# loss at Clifford points ---------------------------------------------------------------

def test_loss_examples():
    assert loss_value_at_clifford_point(PropagatedFrame(P("ZI")), zero_state(2)) == 1.0
    assert loss_value_at_clifford_point(PropagatedFrame(P("IX")), zero_state(2)) == 0.0
    rho = mixed_state(2, [(0, 0, 0.5), (0, 0, 0.5)])
    assert loss_value_at_clifford_point(PropagatedFrame(P("-ZZ")), rho) == -0.25


@given(st.integers(0, 2**32 - 1), st.integers(1, 3))
def test_clifford_point_loss_matches_density_matrix(seed, n):
    from pqcbounds.oracle import DenseSimulator

    rng = np.random.default_rng(seed)
    c = random_class_circuit(rng, n, m_max=2 * n + 3)
    p = random_pauli(rng, n)
    rho = random_product_state(rng, n)
    turns = rng.integers(0, 2, (8, c.m))
    vals, cones = CompiledCircuit(c).loss_and_cone(turns, p, rho)
    dense = DenseSimulator(c, rho).term_values(turns * HALF_PI, [p])[:, 0]
    assert np.allclose(vals, dense, atol=1e-10)
    for row, v, k in zip(turns, vals, cones):
        f = propagate(c, row, p)
        assert v == loss_value_at_clifford_point(f, rho)
        assert k == f.cone


# full light-cone -----------------------------------------------------------------------

def test_full_cone_examples():
    assert full_cone(build_efficient_su2(8, 2), P("ZIIIIIII")) == 4 == full_cone_formula(8, 1, 2)
    assert full_cone(build_cartan(6, 3), P("ZIIIII")) == 6 == full_cone_formula(6, 1, 3)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_full_cone_without_entanglers_is_k(k):
    n = 6
    p = P("X" * k + "I" * (n - k))
    assert full_cone(build_efficient_su2(n, 0), p) == k == full_cone_formula(n, k, 0)
    assert full_cone(build_cartan(n, 0), p) == k


@pytest.mark.parametrize("n,k,d", [(8, 1, 1), (8, 2, 1), (8, 2, 2), (10, 3, 2), (12, 1, 3), (6, 2, 4)])
def test_full_cone_formula_for_edge_strings(n, k, d):
    p = P("Z" * k + "I" * (n - k))
    assert full_cone(build_efficient_su2(n, d), p, n_probe=512) == full_cone_formula(n, k, d)


def test_support_never_exceeds_full_cone():
    rng = np.random.default_rng(2)
    c = build_efficient_su2(6, 2)
    p = P("IIZIII")
    union = full_cone(c, p, n_probe=2000)
    for _ in range(200):
        assert propagate(c, rng.integers(0, 2, c.m), p).cone <= union
