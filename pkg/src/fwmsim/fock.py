"""Truncated three-mode Fock space and the sparse ladder operators on it.

Modes are labelled 0, 1 and 2: mode 0 carries the photon pairs that the
four-wave-mixing nonlinearity converts into one photon each in modes 1 and 2.
A basis state is the occupation triple (m1, m2, m0) and its canonical index is

    index(m1, m2, m0) = m1*(n_max + 1)**2 + m2*(n_max + 1) + m0

so the mode-0 occupation varies fastest.  Every CSV column and frozen test
vector in this package relies on this ordering.

Raising above the cutoff maps to zero (hard truncation); convergence in the
cutoff is checked downstream, not compensated here.
"""

from __future__ import annotations

import numpy as np
from scipy import sparse

N_MODES = 3

# position of each physical mode inside the canonical (m1, m2, m0) triple
_MODE_SLOT = {1: 0, 2: 1, 0: 2}


class FockBasis:
    """Occupation-number basis |m1, m2, m0> with a hard per-mode cutoff.

    Immutable after construction; safe to share across threads.
    """

    def __init__(self, n_max: int):
        n_max = int(n_max)
        if n_max < 1:
            raise ValueError(
                "n_max must be >= 1 (pair dynamics needs at least |2> in one mode)"
            )
        self.n_max = n_max
        self.dim = (n_max + 1) ** N_MODES
        side = n_max + 1
        self._strides = (side * side, side, 1)
        # occupation triples in canonical order, shape (dim, 3) = (m1, m2, m0)
        grids = np.indices((side, side, side)).reshape(N_MODES, self.dim)
        self._triples = grids.T.copy()
        self._triples.setflags(write=False)

    def __repr__(self) -> str:
        return f"FockBasis(n_max={self.n_max})"

    def __eq__(self, other) -> bool:
        return isinstance(other, FockBasis) and other.n_max == self.n_max

    def __hash__(self) -> int:
        return hash((type(self).__name__, self.n_max))

    def index(self, occupations) -> int:
        """Canonical index of the state |m1, m2, m0>."""
        m1, m2, m0 = occupations
        for m in (m1, m2, m0):
            if not 0 <= m <= self.n_max:
                raise ValueError(
                    f"occupation {tuple(occupations)} outside cutoff n_max={self.n_max}"
                )
        return m1 * self._strides[0] + m2 * self._strides[1] + m0

    def occupations(self, index: int) -> tuple[int, int, int]:
        """Occupation triple (m1, m2, m0) of a canonical index."""
        if not 0 <= index < self.dim:
            raise ValueError(f"index {index} outside basis of dim {self.dim}")
        m1, m2, m0 = self._triples[index]
        return int(m1), int(m2), int(m0)

    def mode_occupations(self, mode: int) -> np.ndarray:
        """Per-state photon number of one physical mode, over the whole basis."""
        return self._triples[:, _mode_slot(mode)]

    def total_occupations(self) -> np.ndarray:
        """Per-state total photon number m0 + m1 + m2."""
        return self._triples.sum(axis=1)


def _mode_slot(mode: int) -> int:
    try:
        return _MODE_SLOT[mode]
    except (KeyError, TypeError):
        raise ValueError(f"mode must be 0, 1 or 2, got {mode!r}") from None


def build_basis(n_max: int) -> FockBasis:
    """Enumerate the truncated three-mode Fock space."""
    return FockBasis(n_max)


def annihilation(basis: FockBasis, mode: int) -> sparse.csr_matrix:
    """Sparse lowering operator a_i: <..., m_i - 1, ...| a_i |..., m_i, ...> = sqrt(m_i)."""
    slot = _mode_slot(mode)
    stride = basis._strides[slot]
    occ = basis.mode_occupations(mode)
    cols = np.nonzero(occ > 0)[0]
    rows = cols - stride
    vals = np.sqrt(occ[cols]).astype(np.complex128)
    return sparse.csr_matrix((vals, (rows, cols)), shape=(basis.dim, basis.dim))


def creation(basis: FockBasis, mode: int) -> sparse.csr_matrix:
    """Sparse raising operator, the adjoint of annihilation; the cutoff level maps to zero."""
    return annihilation(basis, mode).conj().T.tocsr()


def number_operator(basis: FockBasis, mode: int) -> sparse.csr_matrix:
    """Diagonal photon-number operator of one mode."""
    occ = basis.mode_occupations(mode).astype(np.complex128)
    return sparse.diags(occ, format="csr")
