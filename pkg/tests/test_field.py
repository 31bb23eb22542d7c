from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from skyhn import field as fieldmod
from skyhn.field import (DenseMatrix, PrimeField, ext_field_build, embed_phi,
                         kron)

F2 = PrimeField(2)
F3 = PrimeField(3)
F5 = PrimeField(5)


def test_prime_field_rejects_composite():
    with pytest.raises(ValueError):
        PrimeField(4)
    with pytest.raises(ValueError):
        PrimeField(1)


@given(st.integers(0, 4), st.integers(0, 4))
def test_f5_ring_axioms(a, b):
    assert F5.add(a, b) == (a + b) % 5
    assert F5.mul(a, b) == (a * b) % 5
    assert F5.sub(F5.add(a, b), b) == a


@given(st.integers(1, 4))
def test_f5_inverse(a):
    assert F5.mul(a, F5.inv(a)) == F5.one


def test_elements_enumeration():
    assert sorted(F3.elements()) == [0, 1, 2]


def test_ext_field_build_f4():
    E = ext_field_build(2, 2)
    # modulus x^2 + x + 1
    assert E.modulus == [1, 1, 1]
    els = list(E.elements())
    assert len(els) == 4
    for a in els:
        if a != E.zero:
            assert E.mul(a, E.inv(a)) == E.one


def test_ext_field_build_f9():
    E = ext_field_build(3, 2)
    # modulus x^2 + 1
    assert E.modulus == [1, 0, 1]
    assert len(list(E.elements())) == 9


def test_embed_phi_is_multiplicative():
    E = ext_field_build(2, 3)
    els = list(E.elements())
    for a in els[:4]:
        for b in els[:4]:
            pa, pb = embed_phi(a, E), embed_phi(b, E)
            assert pa.matmul(pb).data == embed_phi(E.mul(a, b), E).data


def test_reduce_rank_and_kernel():
    # columns: c0, c1 independent, c2 = c0 + c1 over F_2
    cols = [[1, 0, 1], [0, 1, 1], [1, 1, 0]]
    M = DenseMatrix.from_columns(cols, 3, F2)
    rank, basis, ker = fieldmod.reduce(M)
    assert rank == 2
    assert ker.cols == 1
    combo = ker.column(0)
    # kernel combo really kills the columns
    for r in range(3):
        acc = F2.zero
        for j in range(3):
            acc = F2.add(acc, F2.mul(combo[j], cols[j][r]))
        assert acc == F2.zero


def test_reduce_zero_matrix():
    M = DenseMatrix.zero(3, 2, F2)
    rank, basis, ker = fieldmod.reduce(M)
    assert rank == 0
    assert ker.cols == 2


def test_kron_shapes_and_values():
    X = DenseMatrix.from_columns([[1, 0], [1, 1]], 2, F2)
    A = DenseMatrix.from_columns([[1], [1]], 1, F2)
    K = kron(X, A)
    assert (K.rows, K.cols) == (2, 4)


def test_matvec_matches_matmul():
    cols = [[1, 2], [0, 1]]
    M = DenseMatrix.from_columns(cols, 2, F3)
    v = [2, 1]
    direct = M.matvec(v)
    via = M.matmul(DenseMatrix.from_columns([v], 2, F3)).column(0)
    assert direct == via
