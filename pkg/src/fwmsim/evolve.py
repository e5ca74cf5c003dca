"""Time integration of the master equation.

The integrator is an explicit embedded Dormand-Prince 5(4) pair with
proportional step control on the max-norm of the local error estimate,
targeting an error per unit time of ``tol``.  After every accepted step the
state is projected back onto the Hermitian subspace, rho <- (rho + rho^+)/2,
and the trace is checked against 1.  Output is produced by stepping exactly
onto the requested grid times (no dense interpolation), which together with
the fixed evaluation order makes runs bit-for-bit reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._rhs import combine_stage, error_norm, hermitize, max_abs
from .fock import FockBasis
from .model import ModelSpec, build_hamiltonian_parts, envelope_breakpoints, lindblad_rhs

TRACE_TOL = 1e-8
HERMITICITY_TOL = 1e-10


class IntegrationError(RuntimeError):
    """Step-size underflow or another unrecoverable integrator failure."""

    def __init__(self, message: str, t: float):
        super().__init__(f"{message} (at t={t:.6g})")
        self.t = t


class InvariantViolation(RuntimeError):
    """A density-matrix invariant drifted beyond 10x its tolerance; run aborted."""

    def __init__(self, message: str, t: float):
        super().__init__(f"{message} (at t={t:.6g})")
        self.t = t


class DensityMatrix:
    """Complex dim x dim matrix over a Fock basis, trace ~ 1, Hermitian."""

    def __init__(self, basis: FockBasis, data: np.ndarray):
        data = np.asarray(data, dtype=np.complex128)
        if data.shape != (basis.dim, basis.dim):
            raise ValueError(f"data shape {data.shape} does not match basis dim {basis.dim}")
        self.basis = basis
        self.data = data

    def copy(self) -> "DensityMatrix":
        return DensityMatrix(self.basis, self.data.copy())

    def trace(self) -> complex:
        return complex(np.trace(self.data))

    def hermiticity_error(self) -> float:
        return float(np.abs(self.data - self.data.conj().T).max())

    def min_eigenvalue(self) -> float:
        """Smallest eigenvalue (positivity audit; costs a full eigendecomposition)."""
        return float(np.linalg.eigvalsh(self.data)[0])


def make_fock_state(basis: FockBasis, occupations) -> DensityMatrix:
    """Pure-state projector |m1, m2, m0><m1, m2, m0|."""
    i = basis.index(occupations)
    data = np.zeros((basis.dim, basis.dim), dtype=np.complex128)
    data[i, i] = 1.0
    return DensityMatrix(basis, data)


@dataclass
class Trajectory:
    """Output times plus one record per time (snapshots or reduced records)."""

    times: np.ndarray
    states: list


# Dormand-Prince 5(4) tableau (FSAL: the last stage is the next step's first)
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = (
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
)
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84])
_ERR = np.array(
    [
        35 / 384 - 5179 / 57600,
        0.0,
        500 / 1113 - 7571 / 16695,
        125 / 192 - 393 / 640,
        -2187 / 6784 + 92097 / 339200,
        11 / 84 - 187 / 2100,
        -1 / 40,
    ]
)

_MIN_FACTOR = 0.2
_MAX_FACTOR = 5.0
_SAFETY = 0.9


def evolve(
    rho0: DensityMatrix,
    spec: ModelSpec,
    t_grid,
    tol: float = 1e-9,
    record=None,
) -> Trajectory:
    """Integrate the master equation, producing one record per grid time.

    ``record(t, rho)``, when given, is called at each output instant and its
    return value is stored instead of a full DensityMatrix snapshot (large
    cutoffs would otherwise hold dim^2 complex numbers per instant).  The
    DensityMatrix handed to ``record`` is a live view into integrator storage:
    consume it immediately or ``.copy()`` it.
    """
    basis = rho0.basis
    if spec.n_max != basis.n_max:
        raise ValueError(f"spec n_max {spec.n_max} does not match basis cutoff {basis.n_max}")
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or t_grid.size < 1:
        raise ValueError("t_grid must be a non-empty 1-d sequence of times")
    if t_grid[0] != 0.0:
        raise ValueError("t_grid must start at 0")
    if t_grid.size > 1 and not np.all(np.diff(t_grid) > 0):
        raise ValueError("t_grid must be strictly increasing")
    if not tol > 0:
        raise ValueError("tol must be positive")
    if rho0.hermiticity_error() > HERMITICITY_TOL:
        raise ValueError("initial state is not Hermitian within tolerance")
    if abs(rho0.trace() - 1.0) > TRACE_TOL:
        raise ValueError("initial state trace differs from 1 beyond tolerance")

    parts = build_hamiltonian_parts(spec, basis)

    def emit(t: float, y: np.ndarray):
        state = DensityMatrix(basis, y)
        return record(t, state) if record is not None else DensityMatrix(basis, y.copy())

    # stop at every output time and at pump discontinuities
    t_end = float(t_grid[-1])
    grid_set = set(float(t) for t in t_grid)
    break_set = set(b for b in envelope_breakpoints(spec.envelope) if 0.0 < b < t_end)
    stops = sorted(grid_set.union(break_set))

    stepper = _Stepper(spec, parts, basis.dim)
    stepper.load(rho0.data)
    t = 0.0
    outputs = [emit(t, stepper.y2d())]
    h = min(1e-2, stops[1] - stops[0]) if len(stops) > 1 else 1e-2

    for target in stops[1:]:
        while t < target:
            clamped = h >= target - t
            h_try = target - t if clamped else h
            if h_try < 1e-14 * max(1.0, abs(t)):
                raise IntegrationError("step size underflow", t)
            err, y_scale = stepper.attempt(t, h_try)
            err_budget = tol * h_try * y_scale
            if err <= err_budget:
                t = target if clamped else t + h_try
                stepper.accept()
                tr_dev = stepper.trace_deviation()
                if tr_dev > 10.0 * TRACE_TOL:
                    raise InvariantViolation(
                        f"trace drifted by {tr_dev:.3e} (> {10.0 * TRACE_TOL:.0e})", t
                    )
                factor = _MAX_FACTOR if err == 0.0 else min(
                    _MAX_FACTOR, max(_MIN_FACTOR, _SAFETY * (err_budget / err) ** 0.25)
                )
                # a grid-clamped step must not shrink the natural step it interrupted
                h = max(h, h_try * factor) if (clamped and factor >= 1.0) else h_try * factor
            else:
                h = h_try * max(_MIN_FACTOR, _SAFETY * (err_budget / err) ** 0.25)
        if target in grid_set:
            outputs.append(emit(t, stepper.y2d()))
        if target in break_set:
            # the cached first stage holds f(t-): reseed with the right limit
            stepper.reseed(np.nextafter(target, np.inf))

    return Trajectory(times=t_grid.copy(), states=outputs)


class _Stepper:
    """Embedded Dormand-Prince step on flattened state with reused buffers.

    Stage combinations run as BLAS matrix-vector products over the stacked
    stage array; the right-hand side writes straight into its stage row.
    """

    def __init__(self, spec: ModelSpec, parts, dim: int):
        self.spec = spec
        self.parts = parts
        self.dim = dim
        size = dim * dim
        self.k = np.empty((7, size), dtype=np.complex128)
        self.y = np.empty(size, dtype=np.complex128)
        self.y5 = np.empty(size, dtype=np.complex128)
        self.stage = np.empty(size, dtype=np.complex128)
        self._fresh = True

    def y2d(self) -> np.ndarray:
        return self.y.reshape(self.dim, self.dim)

    def load(self, rho: np.ndarray) -> None:
        np.copyto(self.y, rho.reshape(-1))
        self._fresh = True
        self._y_norm = max_abs(self.y)

    def reseed(self, t_eval: float) -> None:
        """Recompute the first stage at t_eval (used just past pump discontinuities)."""
        self._rhs(t_eval, self.y, self.k[0])
        self._fresh = False

    def _rhs(self, t: float, y_flat: np.ndarray, out_row: np.ndarray) -> None:
        lindblad_rhs(
            y_flat.reshape(self.dim, self.dim), t, self.spec, self.parts,
            assume_hermitian=True, out=out_row.reshape(self.dim, self.dim),
        )

    def attempt(self, t: float, h: float) -> tuple[float, float]:
        """Trial step of size h from t; returns (max-abs error, state scale)."""
        if self._fresh:
            self._rhs(t, self.y, self.k[0])  # FSAL seed (recomputed after load only)
            self._fresh = False
        for i in range(1, 6):
            combine_stage(self.y, self.k, _A[i - 1], i, h, self.stage)
            self._rhs(t + _C[i] * h, self.stage, self.k[i])
        combine_stage(self.y, self.k, _B5, 6, h, self.y5)
        hermitize(self.y5.reshape(self.dim, self.dim))  # guard before the FSAL stage
        self._rhs(t + h, self.y5, self.k[6])
        err = error_norm(self.k, _ERR, h)
        self._y5_norm = max_abs(self.y5)
        scale = max(1.0, self._y_norm, self._y5_norm)
        return err, scale

    def accept(self) -> None:
        self.y, self.y5 = self.y5, self.y
        self._y_norm = self._y5_norm
        np.copyto(self.k[0], self.k[6])

    def trace_deviation(self) -> float:
        tr = complex(np.trace(self.y2d()))
        return abs(tr.real - 1.0) + abs(tr.imag)
