"""Fused single-pass evaluation of the master-equation right-hand side.

Every operator in the model is a shifted weighted diagonal in the canonical
basis (ladder operators shift one occupation digit, the four-wave-mixing term
shifts three at once), so the whole right-hand side reduces to a handful of
row- and column-shifted scaled adds per output row.  The generic sparse-matrix
route materializes several dim^2 temporaries per call and is memory bound; the
fused kernel below (numba, when importable) computes the identical products in
one pass over the density matrix and is what makes large-cutoff runs cheap.

The kernel writes each output row exactly once in a fixed arithmetic order,
so parallel execution stays bit-reproducible.  ``build_engine`` returns None
when numba is unavailable and callers fall back to the sparse-matrix path.
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    _HAVE_NUMBA = False

    def njit(*args, **kwargs):  # type: ignore[misc]
        def wrap(fn):
            return fn

        return wrap


# The kernels run single threaded on purpose: the integrator interleaves them
# with numpy calls, and on small machines re-waking a parallel worker pool at
# every right-hand-side evaluation costs more than the evaluation itself.

if _HAVE_NUMBA:

    @njit(cache=True)
    def _rhs_kernel(y, q, qc, st_d, st_w, pu_d, pu_w, f, j_d, j_w, out, hermitian):
        # hermitian=True computes rows only up to the diagonal and mirrors,
        # which halves the work; valid whenever y is Hermitian.
        dim = y.shape[0]
        n_static = st_d.size
        n_pump = pu_d.size
        n_jump = j_d.size
        for i in range(dim):
            top = i + 1 if hermitian else dim
            qi = q[i]
            for j in range(top):
                out[i, j] = (qi + qc[j]) * y[i, j]
            for k in range(n_static):
                d = st_d[k]
                isrc = i - d
                if 0 <= isrc < dim:
                    w = st_w[k, isrc]
                    if w != 0.0:
                        c = w * -1j
                        for j in range(top):
                            out[i, j] += c * y[isrc, j]
                lo = -d if d < 0 else 0
                hi = dim - d if d > 0 else dim
                if hi > top:
                    hi = top
                for j in range(lo, hi):
                    w = st_w[k, j]
                    if w != 0.0:
                        out[i, j] += (w * 1j) * y[i, j + d]
            if f != 0.0:
                for k in range(n_pump):
                    d = pu_d[k]
                    isrc = i - d
                    if 0 <= isrc < dim:
                        w = pu_w[k, isrc]
                        if w != 0.0:
                            c = (f * w) * -1j
                            for j in range(top):
                                out[i, j] += c * y[isrc, j]
                    lo = -d if d < 0 else 0
                    hi = dim - d if d > 0 else dim
                    if hi > top:
                        hi = top
                    for j in range(lo, hi):
                        w = pu_w[k, j]
                        if w != 0.0:
                            out[i, j] += (f * w * 1j) * y[i, j + d]
            for m in range(n_jump):
                d = j_d[m]
                if i + d < dim:
                    wi = j_w[m, i]
                    if wi != 0.0:
                        hi = dim - d
                        if hi > top:
                            hi = top
                        for j in range(hi):
                            wj = j_w[m, j]
                            if wj != 0.0:
                                out[i, j] += (wi * wj) * y[i + d, j + d]
        if hermitian:
            # mirror the strict lower triangle, tiled for cache locality
            block = 64
            for ib in range(0, dim, block):
                ihi = min(ib + block, dim)
                for jb in range(0, ib + 1, block):
                    jhi = min(jb + block, dim)
                    for i in range(ib, ihi):
                        jtop = min(jhi, i)
                        for j in range(jb, jtop):
                            out[j, i] = np.conj(out[i, j])
        return out

    @njit(cache=True)
    def _hermitize_kernel(y):
        # tiled so the transposed block stays cache resident
        dim = y.shape[0]
        block = 64
        for ib in range(0, dim, block):
            ihi = min(ib + block, dim)
            for jb in range(0, ib + 1, block):
                jhi = min(jb + block, dim)
                if jb == ib:
                    for i in range(ib, ihi):
                        y[i, i] = complex(y[i, i].real, 0.0)
                        for j in range(jb, i):
                            v = 0.5 * (y[i, j] + np.conj(y[j, i]))
                            y[i, j] = v
                            y[j, i] = np.conj(v)
                else:
                    for i in range(ib, ihi):
                        for j in range(jb, jhi):
                            v = 0.5 * (y[i, j] + np.conj(y[j, i]))
                            y[i, j] = v
                            y[j, i] = np.conj(v)
        return y

    @njit(cache=True)
    def _axpy_kernel(y, acc, h, out):
        for i in range(y.size):
            out[i] = y[i] + h * acc[i]

    @njit(cache=True)
    def _max_abs_kernel(v):
        # max-norm on the realified vector: no sqrt, equivalent up to sqrt(2)
        m = 0.0
        for i in range(v.size):
            a = abs(v[i].real)
            b = abs(v[i].imag)
            if a > m:
                m = a
            if b > m:
                m = b
        return m

    @njit(cache=True)
    def _stage_kernel(y, k, coefs, n_rows, h, out):
        # out = y + h * sum_j coefs[j] * k[j], one pass over the stage rows
        size = y.size
        for i in range(size):
            acc = coefs[0] * k[0, i]
            for j in range(1, n_rows):
                acc += coefs[j] * k[j, i]
            out[i] = y[i] + h * acc
        return out

    @njit(cache=True)
    def _error_norm_kernel(k, coefs, h):
        # max-norm of h * sum_j coefs[j] * k[j] without materializing it
        size = k.shape[1]
        m = 0.0
        for i in range(size):
            acc = coefs[0] * k[0, i]
            for j in range(2, 7):
                acc += coefs[j] * k[j, i]
            a = abs(acc.real)
            b = abs(acc.imag)
            if a > m:
                m = a
            if b > m:
                m = b
        return m * h


class RhsEngine:
    """Precompiled shift/weight tables for one (spec, basis) pair."""

    def __init__(self, q, st_d, st_w, pu_d, pu_w, j_d, j_w):
        self.q = q
        self.qc = np.conj(q)
        self.st_d = st_d
        self.st_w = st_w
        self.pu_d = pu_d
        self.pu_w = pu_w
        self.j_d = j_d
        self.j_w = j_w
        self.dim = q.size

    def apply(
        self,
        y: np.ndarray,
        f: float,
        out: np.ndarray | None = None,
        hermitian: bool = False,
    ) -> np.ndarray:
        if out is None:
            out = np.empty_like(y)
        return _rhs_kernel(
            y, self.q, self.qc,
            self.st_d, self.st_w,
            self.pu_d, self.pu_w, float(f),
            self.j_d, self.j_w, out, hermitian,
        )


def build_engine(spec, basis) -> RhsEngine | None:
    """Shift/weight tables for the fused kernel; None when numba is absent."""
    if not _HAVE_NUMBA:
        return None
    dim = basis.dim
    side = basis.n_max + 1
    strides = {1: side * side, 2: side, 0: 1}
    m = {mode: basis.mode_occupations(mode).astype(np.float64) for mode in range(3)}

    eff = (
        spec.pump_detunings[0],
        spec.pump_detunings[1] + 0.5 * spec.delta,
        spec.pump_detunings[2] + 0.5 * spec.delta,
    )
    detune = sum(eff[mode] * m[mode] for mode in range(3))
    n_tot = m[0] + m[1] + m[2]
    q = (-1j * detune - spec.gamma * n_tot).astype(np.complex128)

    st_d, st_w = [], []
    if spec.u != 0.0:
        # pair conversion a1^+ a2^+ a0^2: shift (m1+1, m2+1, m0-2)
        delta_up = strides[1] + strides[2] - 2 * strides[0]
        w_up = spec.u * np.sqrt(
            np.maximum(m[0] * (m[0] - 1.0), 0.0)
            * np.where(m[1] < basis.n_max, m[1] + 1.0, 0.0)
            * np.where(m[2] < basis.n_max, m[2] + 1.0, 0.0)
        )
        st_d.append(delta_up)
        st_w.append(w_up)
        # adjoint: weight indexed by its own source states
        w_down = np.zeros(dim)
        src = np.nonzero(w_up)[0]
        w_down[src + delta_up] = w_up[src]
        st_d.append(-delta_up)
        st_w.append(w_down)

    pu_d, pu_w = [], []
    pumped = {"none": (), "pump0": (0,), "pump12": (1, 2)}[spec.scheme]
    for mode in pumped:
        stride = strides[mode]
        w_low = np.sqrt(m[mode])  # a: shift -stride
        w_raise = np.sqrt(np.where(m[mode] < basis.n_max, m[mode] + 1.0, 0.0))
        pu_d.extend([-stride, stride])
        pu_w.extend([w_low, w_raise])

    j_d, j_w = [], []
    if spec.gamma > 0.0:
        scale = np.sqrt(2.0 * spec.gamma)
        for mode in range(3):
            j_d.append(strides[mode])
            j_w.append(scale * np.sqrt(np.where(m[mode] < basis.n_max, m[mode] + 1.0, 0.0)))

    def pack(deltas, weights):
        if not deltas:
            return np.zeros(0, dtype=np.int64), np.zeros((0, dim), dtype=np.float64)
        return np.asarray(deltas, dtype=np.int64), np.ascontiguousarray(weights, dtype=np.float64)

    return RhsEngine(q, *pack(st_d, st_w), *pack(pu_d, pu_w), *pack(j_d, j_w))


def hermitize(y: np.ndarray) -> np.ndarray:
    """In-place projection y <- (y + y^+)/2."""
    if _HAVE_NUMBA:
        return _hermitize_kernel(y)
    y[:] = 0.5 * (y + y.conj().T)
    return y


def axpy(y: np.ndarray, acc: np.ndarray, h: float, out: np.ndarray) -> np.ndarray:
    """out <- y + h*acc in one pass over flat complex arrays."""
    if _HAVE_NUMBA:
        _axpy_kernel(y, acc, h, out)
        return out
    np.multiply(acc, h, out=out)
    out += y
    return out


def max_abs(v: np.ndarray) -> float:
    """Max-norm over real and imaginary parts (no temporaries, no sqrt)."""
    if _HAVE_NUMBA:
        return float(_max_abs_kernel(v.reshape(-1)))
    return max(float(np.abs(v.real).max()), float(np.abs(v.imag).max()))


def combine_stage(y, k, coefs, n_rows, h, out):
    """out <- y + h * (coefs[:n_rows] @ k[:n_rows]) in one pass."""
    if _HAVE_NUMBA:
        return _stage_kernel(y, k, coefs, n_rows, h, out)
    np.dot(coefs[:n_rows], k[:n_rows], out=out)
    out *= h
    out += y
    return out


def error_norm(k, coefs, h) -> float:
    """Max-norm of h * (coefs @ k) with the zero second coefficient skipped."""
    if _HAVE_NUMBA:
        return float(_error_norm_kernel(k, coefs, h))
    return max_abs(np.dot(coefs, k)) * h
