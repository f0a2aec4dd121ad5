import numpy as np
import pytest
from hypothesis import given, strategies as st

from sbdyn.errors import StructuralError
from sbdyn.pauli import (
    PauliSum,
    PauliTerm,
    apply_pauli_sum,
    apply_pauli_term,
    pauli_to_matrix,
    single_pauli,
)

axes_strings = st.text(alphabet="IXYZ", min_size=1, max_size=4)


@given(axes_strings, axes_strings.filter(lambda s: len(s) <= 4))
def test_product_matches_dense(a, b):
    if len(a) != len(b):
        b = (b * len(a))[: len(a)]
    ta, tb = PauliTerm(1.0, a), PauliTerm(1.0, b)
    np.testing.assert_allclose((ta * tb).matrix(), ta.matrix() @ tb.matrix(), atol=1e-12)


@given(axes_strings)
def test_pauli_involution(axes):
    t = PauliTerm(1.0, axes)
    sq = t * t
    assert sq.axes == "I" * len(axes)
    assert sq.coefficient == 1.0


@given(axes_strings, st.complex_numbers(max_magnitude=10, allow_nan=False))
def test_apply_term_matches_matrix(axes, coeff):
    t = PauliTerm(coeff, axes)
    rng = np.random.default_rng(0)
    vec = rng.normal(size=2 ** len(axes)) + 1j * rng.normal(size=2 ** len(axes))
    np.testing.assert_allclose(apply_pauli_term(t, vec), t.matrix() @ vec, atol=1e-9)


def test_sign_conventions():
    # sigma_z |0> = +|0>
    z = PauliTerm(1.0, "Z")
    assert apply_pauli_term(z, np.array([1.0, 0j]))[0] == 1.0
    assert apply_pauli_term(z, np.array([0j, 1.0]))[1] == -1.0
    # Y|0> = i|1>
    y = PauliTerm(1.0, "Y")
    np.testing.assert_allclose(apply_pauli_term(y, np.array([1.0, 0j])), [0, 1j])


def test_axes_indexed_by_qubit():
    # axes[q] acts on qubit q = index bit q; "XI" is X on qubit 0
    t = PauliTerm(1.0, "XI")
    psi = np.zeros(4, dtype=complex)
    psi[0] = 1.0
    out = apply_pauli_term(t, psi)
    assert out[1] == 1.0  # |00> -> |01> (qubit 0 flipped)


def test_sum_merges_terms_and_identity():
    n = 2
    s = PauliSum(
        [single_pauli("X", 0, n, 0.5), single_pauli("X", 0, n, 0.25), PauliTerm(2.0, "II")]
    )
    assert s.n_stored_terms == 1
    assert s.terms[0].coefficient == 0.75
    assert s.identity_offset == 2.0


def test_sum_arithmetic_vs_dense():
    n = 2
    a = PauliSum([single_pauli("X", 0, n, 1.0), single_pauli("Z", 1, n, -0.5)], 0.3)
    b = PauliSum([single_pauli("Y", 1, n, 2.0)], -1.0)
    for op, ref in [
        (a + b, pauli_to_matrix(a, n) + pauli_to_matrix(b, n)),
        (a - b, pauli_to_matrix(a, n) - pauli_to_matrix(b, n)),
        (a @ b, pauli_to_matrix(a, n) @ pauli_to_matrix(b, n)),
        (2.5 * a, 2.5 * pauli_to_matrix(a, n)),
    ]:
        np.testing.assert_allclose(pauli_to_matrix(op, n), ref, atol=1e-12)


def test_apply_sum_matches_dense():
    n = 3
    s = PauliSum(
        [single_pauli("X", 0, n, 0.3), single_pauli("Y", 2, n, 1j), PauliTerm(0.5, "ZZI")],
        0.7,
    )
    rng = np.random.default_rng(1)
    vec = rng.normal(size=8) + 1j * rng.normal(size=8)
    np.testing.assert_allclose(apply_pauli_sum(s, vec), pauli_to_matrix(s, n) @ vec, atol=1e-12)


def test_adjoint_and_hermiticity():
    n = 1
    h = PauliSum([single_pauli("X", 0, n, 0.5)], 1.0)
    assert h.is_hermitian()
    nh = PauliSum([single_pauli("X", 0, n, 0.5j)])
    assert not nh.is_hermitian()
    np.testing.assert_allclose(
        pauli_to_matrix(nh.adjoint(), n), pauli_to_matrix(nh, n).conj().T, atol=1e-12
    )


def test_commutes_with():
    n = 2
    xx = PauliSum([PauliTerm(1.0, "XX")])
    yy = PauliSum([PauliTerm(1.0, "YY")])
    zi = PauliSum([single_pauli("Z", 0, n)])
    assert xx.commutes_with(yy)
    assert not xx.commutes_with(zi)


def test_mixed_register_sizes_rejected():
    with pytest.raises(StructuralError):
        PauliSum([PauliTerm(1.0, "X"), PauliTerm(1.0, "XX")])
    with pytest.raises(StructuralError):
        PauliTerm(1.0, "Q")
