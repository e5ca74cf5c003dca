"""Rotating-frame model: Hamiltonian pieces, pump envelopes, master-equation RHS.

Everything is expressed in units of the pair coupling u (rates in u, times in
1/u).  Simulations run in the frame rotating at the pump frequencies (or the
mode frequencies when undriven), so absolute mode frequencies never enter;
only the per-mode pump detunings and the four-wave-mixing mismatch

    delta = omega_1 + omega_2 - 2*omega_0

survive.  A nonzero delta is carried as a static +delta/2 shift on modes 1
and 2, which keeps the Hamiltonian time independent for undriven runs and
reproduces the two-photon splitting sqrt(delta^2 + 8 u^2).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from ._rhs import build_engine
from .fock import FockBasis, annihilation, creation

PULSE_SHAPES = ("constant_step", "rect", "half_gaussian", "centered_gaussian")
SCHEMES = ("none", "pump0", "pump12")

# modes driven by f(t)*(a_i + a_i^dag) under each pump scheme
_PUMPED_MODES = {"none": (), "pump0": (0,), "pump12": (1, 2)}


@dataclass(frozen=True)
class PulseEnvelope:
    """Pump amplitude profile f(t)."""

    shape: str = "constant_step"
    f0: float = 0.0
    tau: float = 0.0

    def __post_init__(self):
        if self.shape not in PULSE_SHAPES:
            raise ValueError(f"unknown pulse shape {self.shape!r}; choose from {PULSE_SHAPES}")
        if self.f0 < 0:
            raise ValueError("pulse amplitude f0 must be >= 0")
        if self.shape != "constant_step" and not self.tau > 0:
            raise ValueError(f"pulse shape {self.shape!r} needs tau > 0")


@dataclass(frozen=True)
class ModelSpec:
    """Physical parameters of one scenario, in units of u."""

    u: float = 1.0
    gamma: float = 0.0
    delta: float = 0.0
    pump_detunings: tuple[float, float, float] = (0.0, 0.0, 0.0)
    scheme: str = "none"
    envelope: PulseEnvelope = field(default_factory=PulseEnvelope)
    n_max: int = 10

    def __post_init__(self):
        if self.u < 0:
            raise ValueError("coupling u must be >= 0")
        if self.gamma < 0:
            raise ValueError("decay rate gamma must be >= 0")
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown pump scheme {self.scheme!r}; choose from {SCHEMES}")
        if len(self.pump_detunings) != 3:
            raise ValueError("pump_detunings must give one detuning per mode (0, 1, 2)")
        if self.n_max < 1:
            raise ValueError("n_max must be >= 1")


def envelope_value(env: PulseEnvelope, t):
    """Evaluate f(t) for t >= 0 (scalar or array)."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise ValueError("pump envelope is defined for t >= 0 only")
    if env.shape == "constant_step":
        out = np.full_like(t_arr, env.f0)
    elif env.shape == "rect":
        out = np.where(t_arr <= env.tau, env.f0, 0.0)
    elif env.shape == "half_gaussian":
        out = env.f0 * np.exp(-(t_arr / env.tau) ** 2)
    else:  # centered_gaussian
        out = env.f0 * np.exp(-4.0 * ((t_arr - env.tau) / env.tau) ** 2)
    return out if out.ndim else float(out)


def envelope_breakpoints(env: PulseEnvelope) -> tuple[float, ...]:
    """Times where f(t) is discontinuous (the integrator lands on them exactly)."""
    return (env.tau,) if env.shape == "rect" else ()


@dataclass(frozen=True, eq=False)
class HamiltonianParts:
    """Time-independent sparse pieces of H(t) = h_detune + h_nl + f(t)*sum(pump_ops),

    plus the lowering operators and number diagonals the dissipator needs.
    ``engine`` holds the fused-kernel tables (None without numba); it computes
    the same products and is cross-checked against the sparse path in tests.
    """

    basis: FockBasis
    h_detune: sparse.csr_matrix
    h_nl: sparse.csr_matrix
    pump_ops: tuple
    lowering: tuple
    h_static: sparse.csr_matrix
    pump_total: object  # csr_matrix or None when undriven
    n_total: np.ndarray
    occupancy_weight: np.ndarray  # n_total[i] + n_total[j], for the anticommutator
    engine: object = None


def build_hamiltonian_parts(spec: ModelSpec, basis: FockBasis) -> HamiltonianParts:
    """Assemble rotating-frame Hamiltonian pieces on the given basis."""
    if basis.n_max != spec.n_max:
        raise ValueError(f"basis cutoff {basis.n_max} differs from spec n_max {spec.n_max}")

    # static detuning diagonal: pump detunings plus the delta/2 allocation
    eff = (
        spec.pump_detunings[0],
        spec.pump_detunings[1] + 0.5 * spec.delta,
        spec.pump_detunings[2] + 0.5 * spec.delta,
    )
    diag = sum(eff[m] * basis.mode_occupations(m) for m in range(3)).astype(np.complex128)
    h_detune = sparse.diags(diag, format="csr")

    a = tuple(annihilation(basis, m) for m in range(3))
    conv = (creation(basis, 1) @ creation(basis, 2) @ (a[0] @ a[0])).tocsr()
    h_nl = (spec.u * (conv + conv.conj().T)).tocsr()

    pump_ops = tuple((a[m] + a[m].conj().T).tocsr() for m in _PUMPED_MODES[spec.scheme])
    pump_total = None
    if pump_ops:
        total = pump_ops[0]
        for op in pump_ops[1:]:
            total = total + op
        pump_total = total.tocsr()

    n_total = basis.total_occupations().astype(float)
    return HamiltonianParts(
        basis=basis,
        h_detune=h_detune,
        h_nl=h_nl,
        pump_ops=pump_ops,
        lowering=a,
        h_static=(h_detune + h_nl).tocsr(),
        pump_total=pump_total,
        n_total=n_total,
        occupancy_weight=n_total[:, None] + n_total[None, :],
        engine=build_engine(spec, basis),
    )


def lindblad_rhs(
    rho: np.ndarray,
    t: float,
    spec: ModelSpec,
    parts: HamiltonianParts,
    assume_hermitian: bool = False,
    out: np.ndarray | None = None,
) -> np.ndarray:
    """d(rho)/dt = -i[H(t), rho] + gamma * sum_i (2 a_i rho a_i^+ - a_i^+ a_i rho - rho a_i^+ a_i).

    Evaluated term by term with direct sparse-times-dense products; no
    superoperator is ever built.  When the fused kernel is available it
    computes the identical products in one pass.  ``assume_hermitian`` only
    matters on the sparse path, where it saves one product for Hermitian
    input (the integrator enforces Hermiticity after every accepted step).
    """
    dim = parts.basis.dim
    if rho.shape != (dim, dim):
        raise ValueError(f"density matrix shape {rho.shape} does not match basis dim {dim}")

    if parts.engine is not None:
        f = envelope_value(spec.envelope, t) if parts.pump_total is not None else 0.0
        return parts.engine.apply(rho, f, out=out, hermitian=assume_hermitian)

    h = parts.h_static
    if parts.pump_total is not None:
        f = envelope_value(spec.envelope, t)
        if f != 0.0:
            h = h + f * parts.pump_total

    g = spec.gamma
    h_rho = h @ rho
    if assume_hermitian:
        # -i[H, rho] - gamma*(N rho + rho N) == S + S^+ for S = -i H rho - gamma N rho
        s = -1j * h_rho
        if g:
            s -= g * (parts.n_total[:, None] * rho)
        drho = s + s.conj().T
    else:
        rho_h = (h @ rho.conj().T).conj().T  # rho H, via a left product (H is Hermitian)
        drho = -1j * (h_rho - rho_h)
        if g:
            drho -= g * (parts.occupancy_weight * rho)
    if g:
        tg = 2.0 * g
        for a in parts.lowering:
            b = a @ rho
            if assume_hermitian:
                # (a rho)^+ = rho a^+, so a (a rho)^+ is already a rho a^+
                drho += tg * (a @ b.conj().T)
            else:
                # a rho a^+ == (a (a rho)^+)^+ for any rho; left csr products only
                drho += tg * (a @ b.conj().T).conj().T
    if out is not None:
        np.copyto(out, drho)
        return out
    return drho
