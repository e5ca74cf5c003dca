"""Two-harmonic damped fitting of occupation time series.

Driven occupations oscillate around a slow envelope F(t) with two damped
harmonics at half and full the two-photon Rabi frequency:

    N(t) = F(t) * [1 + b1 e^{-alpha1 t} cos(Omega t / 2 + phi1)
                     + b2 e^{-alpha2 t} cos(Omega t + phi2)]

``detrend`` estimates F(t) locally (the model only requires it to be
non-oscillating, so no global parameterization is attempted) and returns the
oscillating ratio; ``fit_two_harmonics`` then runs a damped least-squares fit
of the bracket with a deterministic multi-start over initial phases.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

_PHASE_GRID = (0.0, 0.5 * np.pi, -0.5 * np.pi, np.pi)
_FLAT_INPUT = 1e-14


class FitConvergenceError(RuntimeError):
    """No multi-start converged; carries the best residual reached."""

    def __init__(self, residual_rms: float):
        super().__init__(f"two-harmonic fit did not converge (best residual rms {residual_rms:.3e})")
        self.residual_rms = residual_rms


@dataclass
class Detrended:
    """Interior time grid with the slow envelope and the oscillating ratio."""

    t: np.ndarray
    trend: np.ndarray
    ratio: np.ndarray


def detrend(t, values, period_hint: float) -> Detrended:
    """Split a positive series into a slow envelope and series/envelope - 1.

    The envelope is a centered moving average over one ``period_hint`` window,
    taken in log space so that a pure exponential has exactly zero ratio.
    Half a window is trimmed at each end (the average is only evaluated where
    the full window fits).
    """
    t = np.asarray(t, dtype=float)
    values = np.asarray(values, dtype=float)
    if t.shape != values.shape or t.ndim != 1:
        raise ValueError("t and values must be 1-d arrays of equal length")
    if not period_hint > 0:
        raise ValueError("period_hint must be positive")
    if t.size < 4 or t[-1] - t[0] < 3.0 * period_hint:
        raise ValueError("series must cover at least 3 oscillation periods")
    if np.any(values <= 0):
        raise ValueError("detrend needs positive values (slice the series after onset)")

    dt = float(np.median(np.diff(t)))
    n_win = max(3, int(round(period_hint / dt)))
    if n_win % 2 == 0:
        n_win += 1
    if n_win >= t.size:
        raise ValueError("period_hint window does not fit inside the series")
    half = n_win // 2
    smoothed = np.convolve(np.log(values), np.full(n_win, 1.0 / n_win), mode="valid")
    trend = np.exp(smoothed)
    mid = slice(half, t.size - half)
    return Detrended(t=t[mid].copy(), trend=trend, ratio=values[mid] / trend - 1.0)


@dataclass
class FitResult:
    """Parameters of the two-harmonic damped model, phases in (-pi, pi]."""

    b1: float
    b2: float
    alpha1: float
    alpha2: float
    phi1: float
    phi2: float
    omega_fit: float
    trend: np.ndarray | None
    residual_rms: float
    dominant: str  # "half_omega" or "omega"


def _model_and_jacobian(t: np.ndarray, p: np.ndarray, free_omega: bool, t0: float = 0.0):
    # amplitudes are referenced at t0 (the window start) for conditioning;
    # phases stay absolute
    b1, a1, p1, b2, a2, p2, omega = p
    e1 = np.exp(-a1 * (t - t0))
    e2 = np.exp(-a2 * (t - t0))
    arg1 = 0.5 * omega * t + p1
    arg2 = omega * t + p2
    c1, s1 = np.cos(arg1), np.sin(arg1)
    c2, s2 = np.cos(arg2), np.sin(arg2)
    y = b1 * e1 * c1 + b2 * e2 * c2
    cols = [
        e1 * c1,
        -(t - t0) * b1 * e1 * c1,
        -b1 * e1 * s1,
        e2 * c2,
        -(t - t0) * b2 * e2 * c2,
        -b2 * e2 * s2,
    ]
    if free_omega:
        cols.append(-0.5 * t * b1 * e1 * s1 - t * b2 * e2 * s2)
    return y, np.stack(cols, axis=1)


def _project(p: np.ndarray, free_omega: bool, alpha_max: float | None = None) -> np.ndarray:
    p = p.copy()
    p[1] = max(p[1], 0.0)  # decay rates stay non-negative
    p[4] = max(p[4], 0.0)
    if alpha_max is not None:
        p[1] = min(p[1], alpha_max)
        p[4] = min(p[4], alpha_max)
    if free_omega:
        p[6] = max(p[6], 1e-9)
    return p


def _levenberg_marquardt(t, ratio, p0, free_omega, max_iter,
                         t0: float = 0.0, alpha_max: float | None = None,
                         mask=None):
    """Damped least squares with analytic Jacobian; returns (params, cost, converged).

    ``mask`` lists the free parameter indices (subsets select single-harmonic
    sub-models); omitted parameters stay at their ``p0`` values.
    """
    if mask is None:
        mask = list(range(6))
    mask = list(mask) + ([6] if free_omega else [])
    p = _project(p0.copy(), free_omega, alpha_max)

    def evaluate(params):
        y, jac = _model_and_jacobian(t, params, free_omega, t0)
        r = y - ratio
        return r, jac[:, mask], 0.5 * float(r @ r)

    r, jac, cost = evaluate(p)
    lam = 1e-3
    converged = False
    for _ in range(max_iter):
        grad = jac.T @ r
        if np.abs(grad).max() < 1e-14 * (1.0 + cost):
            converged = True
            break
        jtj = jac.T @ jac
        diag = np.maximum(np.diag(jtj), 1e-12)
        accepted = False
        for _ in range(40):
            try:
                step = np.linalg.solve(jtj + lam * np.diag(diag), -grad)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            p_try = p.copy()
            p_try[mask] += step
            p_try = _project(p_try, free_omega, alpha_max)
            r_try, jac_try, cost_try = evaluate(p_try)
            if cost_try <= cost:
                rel_drop = (cost - cost_try) / max(cost, 1e-300)
                step_small = np.abs(step).max() < 1e-11 * (1.0 + np.abs(p[mask]).max())
                p, r, jac, cost = p_try, r_try, jac_try, cost_try
                lam = max(lam / 3.0, 1e-12)
                accepted = True
                if rel_drop < 1e-14 or step_small:
                    converged = True
                break
            lam *= 10.0
            if lam > 1e14:
                break
        if not accepted or converged:
            converged = converged or accepted
            break
    return p, cost, converged


def _normalize(p: np.ndarray) -> np.ndarray:
    """Fold negative amplitudes into the phase and wrap phases to (-pi, pi]."""
    p = p.copy()
    for b_i, phi_i in ((0, 2), (3, 5)):
        if p[b_i] < 0:
            p[b_i] = -p[b_i]
            p[phi_i] += np.pi
        w = (p[phi_i] + np.pi) % (2.0 * np.pi) - np.pi
        p[phi_i] = np.pi if w == -np.pi else w
    return p


def fit_two_harmonics(
    t,
    ratio,
    omega: float,
    gamma_scale: float = 0.1,
    free_omega: bool = False,
    trend: np.ndarray | None = None,
    max_iter: int = 200,
    alpha_max: float | None = None,
) -> FitResult:
    """Fit b1 e^{-a1 t} cos(w t/2 + p1) + b2 e^{-a2 t} cos(w t + p2) to a ratio series.

    ``omega`` is held fixed (the physically known case) unless ``free_omega``,
    where it becomes a seventh parameter, seeded at the given value, at the
    spectral peak of the series and its double, and at the converged fixed-
    frequency solution (a lone oscillation line fits either harmonic slot
    equally well; near-equal costs resolve toward the larger base frequency,
    i.e. the line is read as the half harmonic).  ``gamma_scale`` seeds the
    decay rates and ``alpha_max``, when given, bounds them.

    Internally the amplitudes are referenced at the window start (that keeps
    the problem conditioned when the series starts late); the reported b1, b2
    are at t = 0 as the model is written.  Multi-start runs over the phase
    grid {0, +-pi/2, pi} for both phases; the best sane converged start wins,
    ties broken by start order.  Starts whose window-start amplitude exceeds
    4x the data scale are discarded (flat directions of the model, not
    descriptions of the data) and a harmonic below 1e-3 of the data scale
    across the window is reported as absent (all zeros).  ``dominant``
    compares the harmonic amplitudes where the data lives, at the window
    start.
    """
    t = np.asarray(t, dtype=float)
    ratio = np.asarray(ratio, dtype=float)
    if t.shape != ratio.shape or t.ndim != 1 or t.size < 8:
        raise ValueError("t and ratio must be matching 1-d arrays with several samples")
    if not omega > 0:
        raise ValueError("omega must be positive")

    if np.abs(ratio).max() < _FLAT_INPUT:
        return FitResult(
            b1=0.0, b2=0.0, alpha1=0.0, alpha2=0.0, phi1=0.0, phi2=0.0,
            omega_fit=omega, trend=trend, residual_rms=0.0, dominant="half_omega",
        )

    scale = float(np.abs(ratio).max())
    amp0 = float(np.sqrt(2.0) * np.sqrt(np.mean(ratio * ratio)))
    alpha0 = max(float(gamma_scale), 0.0)
    t0 = float(t[0])

    seeds = [float(omega)]
    if free_omega:
        peak = spectral_peak_frequency(t, ratio)
        for cand in (peak, 2.0 * peak):
            if cand > 0 and all(abs(cand - s) > 1e-9 for s in seeds):
                seeds.append(float(cand))

    # sub-models: either harmonic alone or both together; a structured slow
    # residue otherwise gets soaked up by the unused slot of the full model
    n = t.size
    sub_models = (
        ((0, 1, 2), np.array([amp0, alpha0, 0.0, 0.0, 1.0, 0.0, omega])),
        ((3, 4, 5), np.array([0.0, 1.0, 0.0, amp0, alpha0, 0.0, omega])),
        ((0, 1, 2, 3, 4, 5), np.array([amp0, alpha0, 0.0, amp0, alpha0, 0.0, omega])),
    )

    candidates = []
    idx = 0
    for mask, template in sub_models:
        phase_slots = [i for i in (2, 5) if i in mask]
        phase_grids = [_PHASE_GRID] * len(phase_slots)
        for omega0 in seeds:
            for phases in product(*phase_grids):
                p0 = template.copy()
                p0[6] = omega0
                for slot, phase in zip(phase_slots, phases):
                    p0[slot] = phase
                p, cost, converged = _levenberg_marquardt(
                    t, ratio, p0, free_omega, max_iter, t0=t0, alpha_max=alpha_max,
                    mask=mask,
                )
                sane = max(abs(p[0]), abs(p[3])) <= 4.0 * scale
                k_par = len(mask) + (1 if free_omega else 0)
                bic = n * np.log(max(2.0 * cost / n, 1e-300)) + k_par * np.log(n)
                candidates.append(
                    ((not (converged and sane), bic, idx), p, cost, converged and sane)
                )
                idx += 1
    if free_omega:
        # measurement mode: release the frequency from the converged fixed
        # fit.  When one harmonic dominates (3x at the window start) the
        # release stays inside that sub-model, so the other slot cannot wander
        # off to absorb unrelated slow structure while omega follows it.
        fixed = fit_two_harmonics(t, ratio, omega=omega, gamma_scale=gamma_scale,
                                  max_iter=max_iter, alpha_max=alpha_max)
        anch1 = fixed.b1 * np.exp(-fixed.alpha1 * t0)
        anch2 = fixed.b2 * np.exp(-fixed.alpha2 * t0)
        p0 = np.array([
            anch1, fixed.alpha1, fixed.phi1,
            anch2, fixed.alpha2, fixed.phi2, omega,
        ])
        if anch1 >= 3.0 * anch2:
            release, p0[3] = (0, 1, 2), 0.0
        elif anch2 >= 3.0 * anch1:
            release, p0[0] = (3, 4, 5), 0.0
        else:
            release = (0, 1, 2, 3, 4, 5)
        p, cost, converged = _levenberg_marquardt(
            t, ratio, p0, True, max_iter, t0=t0, alpha_max=alpha_max, mask=release,
        )
        sane = max(abs(p[0]), abs(p[3])) <= 4.0 * scale
        if converged and sane:
            candidates = [((False, 0.0, -1), p, cost, True)]
    candidates.sort(key=lambda c: c[0])
    best_key, p, best_cost, ok = candidates[0]
    if free_omega and ok:
        # lone-line degeneracy: among near-equal costs take the larger base
        for key, q, q_cost, q_ok in candidates[1:]:
            if q_ok and q_cost <= best_cost * (1.0 + 1e-3) and q[6] > p[6] * (1.0 + 1e-6):
                p = q
    residual_rms = float(np.sqrt(2.0 * _cost(t, ratio, p, free_omega, t0) / t.size))
    if not ok:
        raise FitConvergenceError(residual_rms)

    p = _normalize(p.copy())
    anchored = [p[0], p[3]]
    for slot, (b_i, a_i, f_i) in enumerate(((0, 1, 2), (3, 4, 5))):
        if p[b_i] < 1e-3 * scale:
            p[b_i] = 0.0
            p[a_i] = 0.0
            p[f_i] = 0.0
            anchored[slot] = 0.0
        else:
            p[b_i] = p[b_i] * np.exp(p[a_i] * t0)  # back to the t = 0 reference
    return FitResult(
        b1=float(p[0]),
        b2=float(p[3]),
        alpha1=float(p[1]),
        alpha2=float(p[4]),
        phi1=float(p[2]),
        phi2=float(p[5]),
        omega_fit=float(p[6]),
        trend=trend,
        residual_rms=residual_rms,
        dominant="half_omega" if anchored[0] >= anchored[1] else "omega",
    )


def _cost(t, ratio, p, free_omega, t0: float = 0.0) -> float:
    y, _ = _model_and_jacobian(t, p, free_omega, t0)
    r = y - ratio
    return 0.5 * float(r @ r)


def spectral_peak_frequency(t, values) -> float:
    """Angular frequency of the dominant FFT peak, parabolically refined.

    Used as the initial guess for free-frequency fits; assumes a uniform grid.
    """
    t = np.asarray(t, dtype=float)
    values = np.asarray(values, dtype=float)
    if t.size < 8:
        raise ValueError("need several samples for a spectral estimate")
    dt = float(np.median(np.diff(t)))
    x = values - values.mean()
    spec = np.abs(np.fft.rfft(x * np.hanning(x.size)))
    freqs = np.fft.rfftfreq(x.size, d=dt)
    k = int(np.argmax(spec[1:]) + 1)
    if 1 <= k < spec.size - 1:
        s_m, s_0, s_p = spec[k - 1], spec[k], spec[k + 1]
        denom = s_m - 2.0 * s_0 + s_p
        shift = 0.0 if denom == 0 else 0.5 * (s_m - s_p) / denom
    else:
        shift = 0.0
    return 2.0 * np.pi * float(freqs[k] + shift * (freqs[1] - freqs[0]))
