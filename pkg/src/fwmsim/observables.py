"""Read-only extraction of physical quantities from density-matrix snapshots."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .evolve import DensityMatrix

#: occupations below this leave g2 undefined instead of an ill-conditioned ratio
G2_THRESHOLD = 1e-10

_IMAG_TOL = 1e-8


class CorruptStateError(RuntimeError):
    """An expectation value came out with a non-negligible imaginary part."""


def _real_expectation(value: complex, what: str) -> float:
    if abs(value.imag) > _IMAG_TOL:
        raise CorruptStateError(f"{what} has imaginary part {value.imag:.3e} (state corrupted?)")
    return value.real


def occupation(rho: DensityMatrix, mode: int) -> float:
    """Mean photon number Tr(a_i^+ a_i rho) of one mode."""
    occ = rho.basis.mode_occupations(mode)
    val = complex(np.dot(occ, np.diagonal(rho.data)))
    return _real_expectation(val, f"occupation of mode {mode}")


def g2_zero_delay(rho: DensityMatrix, mode: int, n_threshold: float = G2_THRESHOLD):
    """Zero-delay pair correlation Tr[(a_i^+)^2 a_i^2 rho] / N_i^2, or None.

    Returns None when N_i < n_threshold: at vanishing occupation the ratio is
    numerically meaningless (CSV output leaves the field empty).
    """
    n = occupation(rho, mode)
    if n < n_threshold:
        return None
    occ = rho.basis.mode_occupations(mode)
    num = complex(np.dot(occ * (occ - 1), np.diagonal(rho.data)))
    return _real_expectation(num, f"pair moment of mode {mode}") / (n * n)


def fock_probability(rho: DensityMatrix, occupations) -> float:
    """Diagonal element <m1, m2, m0| rho |m1, m2, m0>."""
    i = rho.basis.index(occupations)
    return _real_expectation(complex(rho.data[i, i]), f"probability of {tuple(occupations)}")


@dataclass
class ObservableRecord:
    """Everything the CSV trajectory format knows about one instant."""

    t: float
    n: tuple[float, float, float]
    g2: tuple  # one float-or-None per mode
    probs: dict = field(default_factory=dict)
    trace_error: float = 0.0
    min_eigenvalue: float | None = None


def observe(
    t: float,
    rho: DensityMatrix,
    prob_states=(),
    audit_positivity: bool = False,
    n_threshold: float = G2_THRESHOLD,
) -> ObservableRecord:
    """Extract occupations, pair correlations and requested Fock probabilities."""
    return ObservableRecord(
        t=float(t),
        n=tuple(occupation(rho, m) for m in range(3)),
        g2=tuple(g2_zero_delay(rho, m, n_threshold) for m in range(3)),
        probs={tuple(s): fock_probability(rho, s) for s in prob_states},
        trace_error=abs(rho.trace() - 1.0),
        min_eigenvalue=rho.min_eigenvalue() if audit_positivity else None,
    )
