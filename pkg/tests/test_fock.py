import numpy as np
import pytest
from scipy import sparse

from fwmsim.fock import FockBasis, annihilation, build_basis, creation, number_operator


def test_dimensions():
    assert build_basis(1).dim == 8
    assert build_basis(10).dim == 1331


def test_rejects_zero_cutoff():
    with pytest.raises(ValueError):
        build_basis(0)


def test_canonical_index():
    basis = FockBasis(10)
    assert basis.index((1, 1, 0)) == 132
    assert basis.index((0, 0, 0)) == 0
    assert basis.index((10, 10, 10)) == basis.dim - 1


def test_index_roundtrip_whole_basis():
    basis = FockBasis(3)
    for i in range(basis.dim):
        assert basis.index(basis.occupations(i)) == i


def test_index_rejects_out_of_range():
    basis = FockBasis(2)
    with pytest.raises(ValueError):
        basis.index((0, 0, 3))
    with pytest.raises(ValueError):
        basis.index((-1, 0, 0))
    with pytest.raises(ValueError):
        basis.occupations(basis.dim)


def test_annihilation_ladder_rule():
    basis = FockBasis(3)
    a0 = annihilation(basis, 0)
    vec = np.zeros(basis.dim)
    vec[basis.index((0, 0, 2))] = 1.0
    out = a0 @ vec
    expected = np.zeros(basis.dim, dtype=complex)
    expected[basis.index((0, 0, 1))] = np.sqrt(2)
    np.testing.assert_allclose(out, expected)


def test_annihilation_kills_vacuum():
    basis = FockBasis(2)
    vac = np.zeros(basis.dim)
    vac[0] = 1.0
    for mode in range(3):
        assert np.all(annihilation(basis, mode) @ vac == 0)


def test_annihilation_one_entry_per_column():
    basis = FockBasis(4)
    for mode in range(3):
        a = annihilation(basis, mode).tocsc()
        per_col = np.diff(a.indptr)
        assert per_col.max() <= 1


def test_number_operator_diagonal():
    basis = FockBasis(3)
    n0 = number_operator(basis, 0)
    i = basis.index((0, 0, 2))
    assert n0[i, i] == 2
    assert (n0 - sparse.diags(n0.diagonal())).nnz == 0


def test_number_trace_small_basis():
    basis = FockBasis(1)
    for mode in range(3):
        assert number_operator(basis, mode).diagonal().sum() == 4


def test_number_expectation_on_pair_state():
    basis = FockBasis(2)
    vec = np.zeros(basis.dim)
    vec[basis.index((1, 1, 0))] = 1.0
    for mode, expected in ((0, 0.0), (1, 1.0), (2, 1.0)):
        n = number_operator(basis, mode)
        assert vec @ (n @ vec) == expected


def test_adjoint_relation():
    basis = FockBasis(3)
    for mode in range(3):
        a = annihilation(basis, mode)
        adag = creation(basis, mode)
        assert (a.conj().T - adag).nnz == 0


def test_creation_annihilation_gives_number():
    # sqrt(m)*sqrt(m) reproduces m to one ulp, and the sparsity pattern exactly
    basis = FockBasis(4)
    for mode in range(3):
        a = annihilation(basis, mode)
        n = creation(basis, mode) @ a
        diff = n - number_operator(basis, mode)
        assert np.abs(diff.toarray()).max() < 1e-14


def test_commutator_below_cutoff_is_identity():
    basis = FockBasis(3)
    for mode in range(3):
        a = annihilation(basis, mode)
        comm = (a @ a.conj().T - a.conj().T @ a).toarray()
        below = basis.mode_occupations(mode) < basis.n_max
        np.testing.assert_allclose(comm[np.ix_(below, below)], np.eye(below.sum()), atol=1e-14)


def test_distinct_modes_commute():
    basis = FockBasis(2)
    a1 = annihilation(basis, 1)
    a2 = annihilation(basis, 2)
    assert np.abs((a1 @ a2 - a2 @ a1).toarray()).max() == 0
    assert np.abs((a1 @ a2.conj().T - a2.conj().T @ a1).toarray()).max() == 0


def test_invalid_mode_rejected():
    basis = FockBasis(2)
    for bad in (3, -1, "x"):
        with pytest.raises(ValueError):
            annihilation(basis, bad)
        with pytest.raises(ValueError):
            number_operator(basis, bad)
