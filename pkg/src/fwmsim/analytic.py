"""Closed-form solutions for the undriven photon pair and the weak-pump limit.

These expressions are independent of the numerical engine and serve as its
oracles: the pair prepared in mode 0 lives in a two-state manifold
{|2_0>, |1_1 1_2>} coupled with strength sqrt(2) u and split by delta, giving
the two-photon Rabi frequency

    Omega = sqrt(delta^2 + 8 u^2)

with uniform damping e^{-4 gamma t} on the pair sector and one-photon states
fed by single decays.  All functions broadcast over t.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_OMEGA_FLOOR = 1e-12


def rabi_frequency(delta: float, u: float) -> float:
    """Two-photon Rabi frequency sqrt(delta^2 + 8 u^2)."""
    if u < 0:
        raise ValueError("coupling u must be >= 0")
    return float(np.sqrt(delta * delta + 8.0 * u * u))


@dataclass(frozen=True)
class TwoPhotonEigensystem:
    """Eigenpairs of the pair manifold, |2_0> taken as the energy reference.

    ``amp_20`` / ``amp_11`` hold the (plus, minus) eigenstate amplitudes on
    |2_0> and |1_1 1_2>; each pair is normalized.
    """

    e_plus: float
    e_minus: float
    amp_20: np.ndarray
    amp_11: np.ndarray
    omega: float


def two_photon_eigensystem(delta: float, u: float) -> TwoPhotonEigensystem:
    """Diagonalize the 2x2 pair Hamiltonian [[0, sqrt(2) u], [sqrt(2) u, delta]]."""
    if not u > 0:
        raise ValueError("coupling u must be > 0 for a coupled pair manifold")
    omega = rabi_frequency(delta, u)
    root = 2.0 * np.sqrt(omega)
    amp_20 = np.array(
        [np.sqrt(2.0 * (omega - delta)) / root, -np.sqrt(2.0 * (omega + delta)) / root],
        dtype=np.complex128,
    )
    amp_11 = np.array(
        [
            4.0 * u / (root * np.sqrt(omega - delta)),
            4.0 * u / (root * np.sqrt(omega + delta)),
        ],
        dtype=np.complex128,
    )
    return TwoPhotonEigensystem(
        e_plus=0.5 * (delta + omega),
        e_minus=0.5 * (delta - omega),
        amp_20=amp_20,
        amp_11=amp_11,
        omega=omega,
    )


def closed_form_probabilities(t, u: float = 1.0, gamma: float = 0.0, delta: float = 0.0):
    """Fock probabilities of the damped pair started in |2_0>.

    Keys: P_2w0 (both photons in mode 0), P_1w1_1w2 (one in each side mode),
    P_1w0 (a single mode-0 photon), P_1w1 (a single photon in mode 1, equal to
    mode 2 by symmetry).
    """
    t = np.asarray(t, dtype=float)
    omega = rabi_frequency(delta, u)
    damp = np.exp(-4.0 * gamma * t)
    grow = np.expm1(2.0 * gamma * t)  # e^{2 gamma t} - 1
    if omega < _OMEGA_FLOOR:
        # decoupled pair (u = 0, delta = 0): pure photon loss
        zero = np.zeros_like(t)
        return {
            "P_2w0": damp,
            "P_1w1_1w2": zero,
            "P_1w0": 2.0 * damp * grow,
            "P_1w1": zero.copy(),
        }
    half = 0.5 * omega * t
    s, c = np.sin(half), np.cos(half)
    o2, g2 = omega * omega, 4.0 * gamma * gamma
    mix = s * (omega * c + 2.0 * gamma * s)
    p_20 = damp * (c * c + (delta * delta / o2) * s * s)
    p_11 = damp * (8.0 * u * u / o2) * s * s
    p_10 = (2.0 * damp / (o2 * (o2 + g2))) * (
        grow * (o2 - 4.0 * u * u + g2) * o2 + 16.0 * gamma * u * u * mix
    )
    p_1side = (4.0 * damp * u * u / (o2 * (o2 + g2))) * (o2 * grow - 4.0 * gamma * mix)
    return {"P_2w0": p_20, "P_1w1_1w2": p_11, "P_1w0": p_10, "P_1w1": p_1side}


def closed_form_occupations(t, u: float = 1.0, gamma: float = 0.0, delta: float = 0.0):
    """Mode occupations of the damped pair started in |2_0>; N_2 equals N_1."""
    t = np.asarray(t, dtype=float)
    omega = rabi_frequency(delta, u)
    damp = np.exp(-4.0 * gamma * t)
    if omega < _OMEGA_FLOOR:
        return {"N_0": 2.0 * np.exp(-2.0 * gamma * t), "N_1": np.zeros_like(t)}
    o2, g2 = omega * omega, 4.0 * gamma * gamma
    e2 = np.exp(2.0 * gamma * t)
    osc = omega * np.cos(omega * t) + 2.0 * gamma * np.sin(omega * t)
    pref = damp / ((g2 + o2) * omega)
    n_0 = 2.0 * pref * (e2 * omega * (g2 + o2 - 4.0 * u * u) + 4.0 * u * u * osc)
    n_1 = 4.0 * u * u * pref * (e2 * omega - osc)
    return {"N_0": n_0, "N_1": n_1}


def perturbative_occupation(t, f: float, u: float = 1.0, scheme: str = "pump0"):
    """Weak-drive transfer at resonance: the side-mode (or pair-mode) occupation.

    For ``pump0`` (drive on mode 0) this is N_1 = N_2; for ``pump12`` (drive on
    modes 1 and 2) it is N_0, exactly four times larger at equal arguments.
    Valid for f << u and f*t << 1; the caller owns that regime.
    """
    if not u > 0:
        raise ValueError("coupling u must be > 0")
    if scheme not in ("pump0", "pump12"):
        raise ValueError(f"scheme must be 'pump0' or 'pump12', got {scheme!r}")
    t = np.asarray(t, dtype=float)
    # sin(Omega t / 2) / (sqrt(2) u t) with Omega = 2 sqrt(2) u; sinc handles t = 0
    bracket = 1.0 - np.sinc(np.sqrt(2.0) * u * t / np.pi)
    value = (f ** 4) * t * t / (u * u) * bracket * bracket
    return 4.0 * value if scheme == "pump12" else value
