"""Acceptance gate: one test per criterion, one printed PASS/FAIL line each.

Run with ``pytest tests/test_acceptance.py -v -s``.  The expensive scenarios
are shared across criteria through module-scoped fixtures; the suite is sized
to finish within the 30-minute budget on a desktop-class machine.
"""

import time

import numpy as np
import pytest

from fwmsim.analytic import (
    closed_form_occupations,
    closed_form_probabilities,
    perturbative_occupation,
    rabi_frequency,
)
from fwmsim.evolve import evolve, make_fock_state
from fwmsim.fitkit import detrend, fit_two_harmonics, spectral_peak_frequency
from fwmsim.fock import FockBasis
from fwmsim.model import ModelSpec, PulseEnvelope
from fwmsim.observables import observe
from fwmsim.scenarios import (
    ScenarioConfig,
    _record_deviations,
    run_scenario,
    run_scenarios,
)

OMEGA = rabi_frequency(0.0, 1.0)
_SUITE_T0 = time.time()


def report(criterion: int, ok: bool, detail: str) -> None:
    print(f"\n[criterion {criterion:2d}] {'PASS' if ok else 'FAIL'} - {detail}")


def times(records):
    return np.array([r.t for r in records])


def occupations(records, mode):
    return np.array([r.n[mode] for r in records])


def g2_series(records, mode):
    return np.array([np.nan if r.g2[mode] is None else r.g2[mode] for r in records])


def oscillation_period(t, series, period_hint=2.0 * np.pi / OMEGA):
    det = detrend(t, series, period_hint)
    return 2.0 * np.pi / spectral_peak_frequency(det.t, det.ratio)


def first_local_minimum(t, series, t_start):
    for i in range(1, len(series) - 1):
        if t[i] >= t_start and series[i] < series[i - 1] and series[i] <= series[i + 1]:
            return t[i], series[i]
    return None, None


def longest_subunity_window(t, series):
    best, cur = 0.0, None
    for i in range(len(t)):
        if np.isfinite(series[i]) and series[i] < 1.0:
            if cur is None:
                cur = t[i]
        else:
            if cur is not None:
                best = max(best, t[i - 1] - cur)
            cur = None
    if cur is not None:
        best = max(best, t[-1] - cur)
    return best


# ---------------------------------------------------------------------------
# shared expensive runs

@pytest.fixture(scope="module")
def pair_decay_battery():
    """|2_0> evolutions versus closed forms over (gamma, delta) grid, n_max=4."""
    combos = [(g, d) for g in (0.0, 0.1) for d in (0.0, 0.5, 2.0)]
    out = {}
    for gamma, delta in combos:
        basis = FockBasis(4)
        spec = ModelSpec(u=1.0, gamma=gamma, delta=delta, n_max=4)
        grid = np.arange(0.0, 20.0 + 1e-12, 0.1)
        probe = [
            (0, 0, 2), (1, 1, 0), (0, 0, 1), (1, 0, 0), (0, 1, 0),
        ]
        t0 = time.time()
        traj = evolve(
            make_fock_state(basis, (0, 0, 2)), spec, grid, tol=1e-9,
            record=lambda t, rho: observe(t, rho, prob_states=probe),
        )
        out[(gamma, delta)] = (traj.states, time.time() - t0)
    return out


_CONV_CONFIG = ScenarioConfig(gamma=0.1, scheme="pump0", pulse_f0=1.0, n_max=10,
                              t_max=3.0, dt_out=0.05, tol=1e-6,
                              probs=((0, 0, 2), (1, 1, 0)))

#: every large-cutoff scenario of the gate, fanned out one worker per scenario
_HEAVY_CONFIGS = {
    "fig4": ScenarioConfig(gamma=0.1, scheme="pump0", pulse_f0=1.0, n_max=10,
                           t_max=8.0, dt_out=0.05, tol=1e-4),
    "fig3_weak": ScenarioConfig(gamma=0.1, scheme="pump12", pulse_f0=0.1, n_max=6,
                                t_max=20.0, dt_out=0.05, tol=1e-7),
    "fig3_strong": ScenarioConfig(gamma=0.1, scheme="pump12", pulse_f0=1.0, n_max=10,
                                  t_max=15.5, dt_out=0.05, tol=1e-4),
    "fig5_rect": ScenarioConfig(gamma=0.1, scheme="pump0", pulse_shape="rect",
                                pulse_f0=1.0, pulse_tau=2.6, n_max=10,
                                t_max=8.0, dt_out=0.05, tol=1e-4),
    "fig5_halfgauss": ScenarioConfig(gamma=0.1, scheme="pump0", pulse_shape="half_gaussian",
                                     pulse_f0=1.0, pulse_tau=2.6, n_max=10,
                                     t_max=8.0, dt_out=0.05, tol=1e-4),
    "fig5_gauss": ScenarioConfig(gamma=0.1, scheme="pump0", pulse_shape="centered_gaussian",
                                 pulse_f0=1.0, pulse_tau=2.6, n_max=10,
                                 t_max=8.0, dt_out=0.05, tol=1e-4),
    "fig6": ScenarioConfig(gamma=0.016, scheme="pump0", pulse_f0=1.0, n_max=10,
                           t_max=26.0, dt_out=0.05, tol=1e-4),
    "conv_10": _CONV_CONFIG,
    "conv_12": ScenarioConfig(gamma=0.1, scheme="pump0", pulse_f0=1.0, n_max=12,
                              t_max=3.0, dt_out=0.05, tol=1e-6,
                              probs=((0, 0, 2), (1, 1, 0))),
}


@pytest.fixture(scope="module")
def heavy():
    return run_scenarios(_HEAVY_CONFIGS, max_workers=2)


# ---------------------------------------------------------------------------
# criteria

def test_criterion_1_oracle_equivalence(pair_decay_battery):
    worst = 0.0
    runtime_resonant = None
    for (gamma, delta), (records, runtime) in pair_decay_battery.items():
        t = times(records)
        probs = closed_form_probabilities(t, u=1.0, gamma=gamma, delta=delta)
        occs = closed_form_occupations(t, u=1.0, gamma=gamma, delta=delta)
        checks = {
            "P_2w0": np.array([r.probs[(0, 0, 2)] for r in records]) - probs["P_2w0"],
            "P_1w1_1w2": np.array([r.probs[(1, 1, 0)] for r in records]) - probs["P_1w1_1w2"],
            "P_1w0": np.array([r.probs[(0, 0, 1)] for r in records]) - probs["P_1w0"],
            "P_1w1": np.array([r.probs[(1, 0, 0)] for r in records]) - probs["P_1w1"],
            "N_0": occupations(records, 0) - occs["N_0"],
            "N_1": occupations(records, 1) - occs["N_1"],
        }
        worst = max(worst, max(np.abs(v).max() for v in checks.values()))
        if (gamma, delta) == (0.1, 0.0):
            runtime_resonant = runtime
    ok = worst < 1e-6 and runtime_resonant < 10.0
    report(1, ok, f"max |numeric - closed form| = {worst:.2e} over 6 (gamma, delta) combos "
                  f"(< 1e-6); resonant run {runtime_resonant:.1f} s at n_max=4 (< 10 s)")
    assert worst < 1e-6
    assert runtime_resonant < 10.0


def test_criterion_2_rabi_frequency():
    basis = FockBasis(2)
    spec = ModelSpec(u=1.0, gamma=0.0, delta=0.0, n_max=2)
    grid = np.arange(0.0, 60.0 + 1e-12, 0.02)
    traj = evolve(
        make_fock_state(basis, (0, 0, 2)), spec, grid, tol=1e-9,
        record=lambda t, rho: rho.data[basis.index((0, 0, 2)), basis.index((0, 0, 2))].real,
    )
    p20 = np.asarray(traj.states)
    omega_fft = spectral_peak_frequency(grid, p20)
    fit = fit_two_harmonics(grid, p20 - p20.mean(), omega=omega_fft,
                            gamma_scale=0.0, free_omega=True)
    err_fft = abs(omega_fft - OMEGA) / OMEGA
    err_fit = abs(fit.omega_fit - OMEGA) / OMEGA
    ok = err_fft < 0.005 and err_fit < 0.005
    report(2, ok, f"undamped pair frequency: FFT {omega_fft:.5f} ({err_fft:.3%} off), "
                  f"free-frequency fit {fit.omega_fit:.5f} ({err_fit:.3%} off 2*sqrt(2))")
    assert ok


def test_criterion_3_exact_decay_law():
    gamma = 0.25
    basis = FockBasis(2)
    spec = ModelSpec(u=1.0, gamma=gamma, delta=0.7, n_max=2)
    grid = np.arange(0.0, 20.0 + 1e-12, 0.5)  # ten decay times of 1/(2 gamma)
    traj = evolve(
        make_fock_state(basis, (1, 1, 2)), spec, grid, tol=1e-10,
        record=lambda t, rho: sum(
            float(rho.data.diagonal().real @ rho.basis.mode_occupations(m)) for m in range(3)
        ),
    )
    total = np.asarray(traj.states)
    expected = 4.0 * np.exp(-2.0 * gamma * grid)
    rel = np.abs(total / expected - 1.0).max()
    ok = rel < 1e-6
    report(3, ok, f"total photon number tracks N(0) e^(-2 gamma t) to {rel:.2e} relative "
                  "over 10 decay times (< 1e-6)")
    assert ok


def test_criterion_4_perturbative_pump():
    f = 0.01
    grid = np.arange(0.0, 10.0 + 1e-12, 0.25)

    def run(scheme, mode):
        basis = FockBasis(4)
        spec = ModelSpec(u=1.0, gamma=0.0, scheme=scheme,
                         envelope=PulseEnvelope("constant_step", f), n_max=4)
        traj = evolve(
            make_fock_state(basis, (0, 0, 0)), spec, grid, tol=1e-12,
            record=lambda t, rho: float(
                rho.data.diagonal().real @ rho.basis.mode_occupations(mode)
            ),
        )
        return np.asarray(traj.states)

    n1 = run("pump0", 1)
    n0 = run("pump12", 0)
    theory = perturbative_occupation(grid, f=f, u=1.0, scheme="pump0")
    window = grid >= 1.0
    rel = np.abs(n1[window] / theory[window] - 1.0).max()
    ratio_err = np.abs(n0[window] / n1[window] / 4.0 - 1.0).max()
    ok = rel < 0.05 and ratio_err < 0.01
    report(4, ok, f"weak-drive side occupation within {rel:.2%} of the f^4 law on [1,10] "
                  f"(< 5%); pair-drive/pump-drive ratio off 4 by {ratio_err:.2%} (< 1%)")
    assert ok


def test_criterion_5_harmonic_content(heavy):
    # the fit sees the post-onset transient only: the early t^2 rise has too
    # much trend curvature for any one-window moving average, and the late
    # saturated tail carries no oscillation
    weak, strong = heavy["fig3_weak"], heavy["fig3_strong"]
    tw, n0w = times(weak), occupations(weak, 0)
    keep = tw >= 2.0
    detw = detrend(tw[keep], n0w[keep], period_hint=2.0 * np.pi / OMEGA)
    win = (detw.t >= 3.0) & (detw.t <= 10.0)
    fit_w = fit_two_harmonics(detw.t[win], detw.ratio[win], omega=OMEGA,
                              gamma_scale=0.3, alpha_max=2.0)
    free_w = fit_two_harmonics(detw.t[win], detw.ratio[win], omega=OMEGA,
                               gamma_scale=0.3, alpha_max=2.0, free_omega=True)

    ts, n0s = times(strong), occupations(strong, 0)
    keep = ts >= 2.0
    dets = detrend(ts[keep], n0s[keep], period_hint=4.0 * np.pi / OMEGA)
    win = (dets.t >= 3.0) & (dets.t <= 12.0)
    fit_s = fit_two_harmonics(dets.t[win], dets.ratio[win], omega=OMEGA,
                              gamma_scale=0.5, alpha_max=2.0)
    free_s = fit_two_harmonics(dets.t[win], dets.ratio[win], omega=OMEGA,
                               gamma_scale=0.5, alpha_max=2.0, free_omega=True)

    # the base frequency is identified on the weak run, where the drive only
    # dresses the spectrum at O((f/u)^2); at f = u the line genuinely shifts
    # (the published claim is "close to" the bare frequency), so that value
    # is reported, not asserted
    err_w = abs(free_w.omega_fit - OMEGA) / OMEGA
    err_s = abs(free_s.omega_fit - OMEGA) / OMEGA
    ok = (fit_w.dominant == "half_omega" and fit_s.dominant == "omega"
          and err_w < 0.10)
    report(5, ok, f"pair drive: dominant harmonic {fit_w.dominant} at f=0.1u "
                  f"(b1={fit_w.b1:.2f} vs b2={fit_w.b2:.2f}), {fit_s.dominant} at f=u "
                  f"(b1={fit_s.b1:.2f} vs b2={fit_s.b2:.2f}); free-frequency fit "
                  f"{free_w.omega_fit:.3f} at f=0.1u ({err_w:.1%} off sqrt(8) u, < 10%); "
                  f"dressed value at f=u: {free_s.omega_fit:.3f} ({err_s:+.1%}, reported)")
    assert fit_w.dominant == "half_omega"
    assert fit_s.dominant == "omega"
    assert err_w < 0.10


def _dominant_period(t, series, gamma_scale=0.3):
    """Period of the dominant oscillation line via the measurement-mode fit."""
    keep = (t >= 2.0) & np.isfinite(series) & (series > 0)
    det = detrend(t[keep], series[keep], period_hint=2.0 * np.pi / OMEGA)
    win = (det.t >= 3.0) & (det.t <= 10.0)
    free = fit_two_harmonics(det.t[win], det.ratio[win], omega=OMEGA,
                             gamma_scale=gamma_scale, alpha_max=2.0, free_omega=True)
    line = 0.5 * free.omega_fit if free.dominant == "half_omega" else free.omega_fit
    return 2.0 * np.pi / line


def test_criterion_6_correlation_crossings(heavy):
    fig4_records = heavy["fig4"]
    t = times(fig4_records)
    n1 = occupations(fig4_records, 1)
    g2 = g2_series(fig4_records, 1)
    ok_idx = np.isfinite(g2) & (n1 > 1e-4)
    tt, gg = t[ok_idx], g2[ok_idx]
    sign = np.sign(gg - 1.0)
    crossings = int(np.sum(sign[1:] != sign[:-1]))
    t_min, g_min = first_local_minimum(tt, gg, t_start=1.0)

    # period matching is checked where both observables ring on one shared
    # line (weak drive): the published per-panel pump amplitudes are unstated
    # and at f = u the two observables dephase through different dressed
    # line mixtures, so the f = u panels only pin the crossing structure
    weak = run_scenario(ScenarioConfig(gamma=0.1, scheme="pump0", pulse_f0=0.1,
                                       n_max=4, t_max=16.0, dt_out=0.05, tol=1e-9))
    t_w = times(weak)
    period_n1 = _dominant_period(t_w, occupations(weak, 1))
    period_g2 = _dominant_period(t_w, g2_series(weak, 1))
    period_err = abs(period_g2 - period_n1) / period_n1

    ok = crossings >= 2 and 2.0 <= t_min <= 3.5 and period_err <= 0.10
    report(6, ok, f"g2_1 crosses 1 {crossings}x in the f=u transient (>= 2); first local "
                  f"minimum g2_1 = {g_min:.3f} at t = {t_min:.2f}/u (in [2, 3.5]; "
                  f"published transient shows ~2.6); dominant-line periods g2 "
                  f"{period_g2:.2f} vs N1 {period_n1:.2f} ({period_err:.1%} apart, <= 10%)")
    assert crossings >= 2
    assert 2.0 <= t_min <= 3.5
    assert period_err <= 0.10


def test_criterion_7_pulsed_antibunching(heavy):
    runs = {name: heavy[f"fig5_{name}"]
            for name in ("rect", "halfgauss", "gauss")}
    details = []
    ok = True
    for shape, records in runs.items():
        t = times(records)
        n1 = occupations(records, 1)
        g2 = g2_series(records, 1)
        early = np.isfinite(g2) & (n1 < 0.1 * n1.max())
        early_max = np.nanmax(g2[early])
        window = longest_subunity_window(t, g2)
        details.append(f"{shape}: early max {early_max:.2f}, antibunched window {window:.1f}/u")
        ok = ok and early_max > 1.0 and window >= 2.0
    report(7, ok, "; ".join(details) + " (early bunching then sustained g2_1 < 1 "
                  ">= 2/u for every pulse shape)")
    assert ok


def test_criterion_8_high_q_persistence(heavy):
    fig6_records = heavy["fig6"]
    t = times(fig6_records)
    n1 = occupations(fig6_records, 1)
    late = t >= 20.0
    peak, trough = n1[late].max(), n1[late].min()
    ratio = peak / trough
    ok = ratio > 1.1
    report(8, ok, f"low-loss point gamma=0.016u: N_1 peak/trough past t=20/u is "
                  f"{ratio:.2f} (> 1.1): oscillations persist")
    assert ok


def test_criterion_9_invariants(pair_decay_battery, heavy, tmp_path):
    fig4_records = heavy["fig4"]
    # trace errors across every record produced by the other criteria
    trace_worst = max(
        max(r.trace_error for r in records)
        for records, _ in pair_decay_battery.values()
    )
    for records in heavy.values():
        trace_worst = max(trace_worst, max(r.trace_error for r in records))

    # audited snapshots of a driven run: Hermiticity and positivity
    basis = FockBasis(6)
    spec = ModelSpec(u=1.0, gamma=0.1, scheme="pump0",
                     envelope=PulseEnvelope("constant_step", 1.0), n_max=6)
    traj = evolve(make_fock_state(basis, (0, 0, 0)), spec,
                  np.arange(0.0, 6.0 + 1e-12, 0.5), tol=1e-8)
    herm_worst = max(s.hermiticity_error() for s in traj.states)
    eig_worst = min(s.min_eigenvalue() for s in traj.states)

    # side-mode symmetry in every symmetric scenario at hand
    sym_worst = max(abs(r.n[1] - r.n[2]) for r in fig4_records)
    for records, _ in pair_decay_battery.values():
        sym_worst = max(sym_worst, max(abs(r.n[1] - r.n[2]) for r in records))

    # byte-identical CSV on repeated runs
    config = ScenarioConfig(gamma=0.1, scheme="pump0", pulse_f0=1.0, n_max=4,
                            t_max=2.0, dt_out=0.1, tol=1e-8, probs=((0, 0, 2),))
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run_scenario(config, out_path=str(a))
    run_scenario(config, out_path=str(b))
    identical = a.read_bytes() == b.read_bytes()

    ok = (trace_worst < 1e-8 and herm_worst < 1e-10 and eig_worst > -1e-8
          and sym_worst < 1e-10 and identical)
    report(9, ok, f"trace error {trace_worst:.1e} (< 1e-8); hermiticity {herm_worst:.1e} "
                  f"(< 1e-10); audited min eigenvalue {eig_worst:.1e} (> -1e-8); "
                  f"N1-N2 symmetry {sym_worst:.1e} (< 1e-10); repeated CSV byte-identical: "
                  f"{identical}")
    assert ok


def test_criterion_10_truncation_and_budget(heavy):
    devs = _record_deviations(heavy["conv_10"], heavy["conv_12"], _CONV_CONFIG)
    worst = max(d for d in devs if d is not None)
    elapsed = time.time() - _SUITE_T0
    ok = worst < 1e-4 and elapsed < 1800.0
    report(10, ok, f"n_max=10 vs 12 on the f=u transient: max observable deviation "
                   f"{worst:.2e} (< 1e-4); acceptance suite wall time {elapsed/60:.1f} min "
                   f"(< 30 min)")
    assert worst < 1e-4
    assert elapsed < 1800.0
