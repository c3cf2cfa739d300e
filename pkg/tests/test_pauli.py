import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pqcbounds.errors import DimensionError
from pqcbounds.pauli import (
    Locality,
    Observable,
    PauliString,
    classify_observable,
    commutes,
    pauli_mul,
)

labels = st.integers(1, 3).flatmap(lambda n: st.text("IXYZ", min_size=n, max_size=n))
phases = st.sampled_from(["", "-", "i", "-i"])


def P(label):
    return PauliString.from_label(label)


# multiplication ------------------------------------------------------------------

def test_x_times_y_is_i_z():
    r = pauli_mul(P("X"), P("Y"))
    assert r == P("iZ")
    assert r.phase == 1 and r.z == 1 and r.x == 0


def test_z_squared_is_identity():
    r = P("Z") * P("Z")
    assert r.is_identity and r.phase == 0


def test_xz_times_zx_is_yy():
    r = P("XZ") * P("ZX")
    assert r == P("YY")
    assert np.allclose(r.to_matrix(), P("XZ").to_matrix() @ P("ZX").to_matrix())


@given(phases, labels, phases, st.data())
def test_product_matches_dense_matrices(pa, la, pb, data):
    lb = data.draw(st.text("IXYZ", min_size=len(la), max_size=len(la)))
    a, b = P(pa + la), P(pb + lb)
    assert np.allclose((a * b).to_matrix(), a.to_matrix() @ b.to_matrix())


def test_mismatched_sizes_raise():
    with pytest.raises(DimensionError):
        P("X") * P("XX")
    with pytest.raises(DimensionError):
        commutes(P("X"), P("XX"))


# commutation ---------------------------------------------------------------------

def test_commutation_examples():
    assert not commutes(P("X"), P("Y"))
    assert commutes(P("XI"), P("IZ"))
    assert commutes(P("XY"), P("YX"))


@given(labels, st.data())
def test_commutes_iff_products_agree(la, data):
    lb = data.draw(st.text("IXYZ", min_size=len(la), max_size=len(la)))
    a, b = P(la), P(lb)
    assert commutes(a, b) == ((a * b) == (b * a))
    ma, mb = a.to_matrix(), b.to_matrix()
    assert commutes(a, b) == np.allclose(ma @ mb, mb @ ma)


# labels and properties -------------------------------------------------------------

def test_label_convention_qubit_zero_leftmost():
    p = P("XIZ")
    assert p.x == 0b001 and p.z == 0b100
    assert p.site(0) == "X" and p.site(2) == "Z"
    assert p.support == (0, 2) and p.weight == 2


@given(phases, labels)
def test_label_round_trip(prefix, body):
    p = P(prefix + body)
    assert P(p.label()) == p


def test_y_is_textbook_y():
    assert np.allclose(P("Y").to_matrix(), [[0, -1j], [1j, 0]])


def test_qubit_zero_is_least_significant_index():
    # Z on qubit 0 flips the sign of odd basis indices
    assert np.allclose(np.diag(P("ZI").to_matrix()), [1, -1, 1, -1])


def test_single_and_from_sites():
    assert PauliString.single(3, 1, "Y") == P("IYI")
    assert PauliString.from_sites(3, {0: "X", 2: "Z"}) == P("XIZ")
    with pytest.raises(IndexError):
        PauliString.single(2, 2, "X")
    with pytest.raises(ValueError):
        PauliString.from_label("XQ")


# observables -----------------------------------------------------------------------

def test_duplicate_terms_sum_and_zeros_drop():
    h = Observable.from_labels([(1.0, "XZ"), (0.5, "XZ"), (2.0, "ZZ"), (-2.0, "ZZ")])
    assert h.as_dict() == {"XZ": 1.5}


def test_signs_fold_into_coefficients():
    h = Observable.from_labels([(2.0, "-XY")])
    assert h.as_dict() == {"XY": -2.0}


def test_text_round_trip_is_exact():
    h = Observable.from_labels([(0.1, "XIZ"), (-1 / 3, "YYY"), (1e-17, "IIZ")])
    text = h.to_text()
    assert Observable.from_text(text) == h
    assert Observable.from_text(text).to_text() == text


def test_text_errors_report_line_numbers():
    with pytest.raises(ValueError, match="line 2"):
        Observable.from_text("1.0 XX\n1.0 XQ\n")
    with pytest.raises(ValueError, match="line 2"):
        Observable.from_text("1.0 XX\n1.0 XXX\n")


def test_observable_matrix_is_weighted_sum():
    h = Observable.from_labels([(0.5, "XI"), (-2.0, "ZZ")])
    expected = 0.5 * P("XI").to_matrix() - 2.0 * P("ZZ").to_matrix()
    assert np.allclose(h.to_matrix(), expected)


def test_classification_examples():
    n = 8
    z1 = "Z" + "I" * (n - 1)
    assert classify_observable(Observable.from_labels([(1.0, z1)]), 1) is Locality.LOCAL
    mixed = Observable.from_labels([(1.0, z1), (1.0, "Z" * n)])
    assert classify_observable(mixed, 2) is Locality.MIXED
    assert classify_observable(Observable.from_labels([(1.0, "X" * n)]), 2) is Locality.GLOBAL


def test_classification_coefficient_floor():
    h = Observable.from_labels([(1e-12, "ZIII"), (1.0, "XXXX")])
    assert classify_observable(h, 2) is Locality.GLOBAL
    assert classify_observable(h, 2, coeff_floor=1e-13) is Locality.MIXED
