"""Acceptance criteria, one verdict line each in the terminal summary.

Run ``pytest tests/test_acceptance.py -q`` and read the "acceptance criteria"
section at the bottom.
"""
import math
import subprocess
import sys
import time

import numpy as np
import pytest

from qsync.bath import BathParams
from qsync.dynamics import (
    DEFAULT_ORACLE_CASES,
    POSITIVITY_TOL,
    InitialState,
    detect_backflow,
    evolve,
    h_values,
    verify_oracle,
)
from qsync.phasespace import husimi_q, phase_summary, shifted_phase_distribution, wrap_angle
from qsync.sweep import PRESETS, band_widths, figure_preset, run_sweep

rng = np.random.default_rng(20240601)


def _random_states(n):
    states = []
    while len(states) < n:
        rho11 = rng.uniform(0, 1)
        r = rng.uniform(0, math.sqrt(rho11 * (1 - rho11)))
        states.append(evolve(InitialState(rho11, r * np.exp(1j * rng.uniform(-math.pi, math.pi))), 1.0))
    return states


def test_01_oracle_equivalence(report):
    start = time.perf_counter()
    checks = verify_oracle(DEFAULT_ORACLE_CASES, t_max=50.0, dt=1e-3)
    elapsed = time.perf_counter() - start
    worst = max(c.max_error for c in checks)
    ratio = min(c.ratio for c in checks)
    ok = worst < 1e-5 and ratio >= 3.5 and elapsed < 30
    report("1 oracle equivalence", ok, f"max err {worst:.2e}, min ratio {ratio:.2f}, {elapsed:.2f} s")
    assert ok


def test_02_state_validity(report):
    margin, peak = math.inf, 0.0
    for preset_id in PRESETS:
        meta = run_sweep(figure_preset(preset_id)).metadata
        margin = min(margin, meta["min_positivity_margin"])
        peak = max(peak, meta["max_abs_h"])
    # trace and Hermiticity hold by construction: rho00 = 1 - rho11, rho01 = conj(rho10)
    ok = margin >= -POSITIVITY_TOL and peak <= 1.0
    report("2 state validity", ok, f"{len(PRESETS)} presets, min margin {margin:.3e}, max |h| {peak:.15f}")
    assert ok


def _gauss_theta(n=256):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * math.pi * (x + 1), 0.5 * math.pi * w


def test_03_husimi_normalisation(report):
    theta, wt = _gauss_theta()
    phi = np.linspace(-math.pi, math.pi, 64, endpoint=False)
    worst = 0.0
    for state in _random_states(20):
        q = husimi_q(state, theta[:, None], phi[None, :])
        total = (wt * np.sin(theta)) @ q.sum(axis=1) * (2 * math.pi / len(phi))
        worst = max(worst, abs(total - 1))
    report("3 Husimi normalisation", worst < 1e-9, f"max |norm - 1| {worst:.2e}")
    assert worst < 1e-9


def test_04_marginal_equivalence(report):
    theta, wt = _gauss_theta()
    phi = rng.uniform(-math.pi, math.pi, 32)
    worst = 0.0
    for state in _random_states(20):
        marginal = (wt * np.sin(theta)) @ husimi_q(state, theta[:, None], phi[None, :])
        worst = max(worst, np.max(np.abs(marginal - 1 / (2 * math.pi) - shifted_phase_distribution(state, phi))))
    report("4 phase marginal equals S", worst < 1e-9, f"max diff {worst:.2e}")
    assert worst < 1e-9


def test_05_s_max_formula(report):
    phi = np.linspace(-math.pi, math.pi, 10_000, endpoint=False)
    step = phi[1] - phi[0]
    worst_s, worst_phi = 0.0, 0.0
    for state in _random_states(50):
        s = shifted_phase_distribution(state, phi)
        k = int(np.argmax(s))
        summary = phase_summary(state)
        worst_s = max(worst_s, abs(s[k] - abs(state.rho10) / 4))
        worst_phi = max(worst_phi, abs(float(wrap_angle(phi[k] - summary.phi_star))))
    plus = phase_summary(evolve(InitialState(0.5, 0.5), 1.0)).s_max
    ok = worst_s < 1e-7 and worst_phi <= step and plus == 0.125
    report("5 S_m = |rho10|/4", ok, f"max value gap {worst_s:.1e}, max phase gap {worst_phi:.1e} (grid {step:.1e}), "
           f"plus state {plus}")
    assert ok


def _phase_marginal(result):
    theta_ax, phi_ax = result.axes
    theta = theta_ax.values()
    q = result.as_array()
    # composite Simpson over the 91 uniform theta nodes
    w = np.ones(len(theta))
    w[1:-1:2], w[2:-1:2] = 4, 2
    w *= (theta[1] - theta[0]) / 3
    return phi_ax.values(), (w * np.sin(theta)) @ q


def test_06_fig1(report):
    start = time.perf_counter()
    _, p_markov = _phase_marginal(run_sweep(figure_preset("fig1b")))
    variation = np.max(np.abs(p_markov - 1 / (2 * math.pi)))
    phi, p_nm = _phase_marginal(run_sweep(figure_preset("fig1d")))
    s = (p_nm - 1 / (2 * math.pi))[:-1]  # drop the duplicated +pi node
    peaks = int(np.sum((s > np.roll(s, 1)) & (s > np.roll(s, -1))))
    elapsed = time.perf_counter() - start
    ok = variation < 1e-3 and peaks == 1 and s.max() > 0.0125 and elapsed < 10
    report("6 phase preference (fig1b, fig1d)", ok, f"fig1b max|P - 1/2pi| {variation:.2e}; fig1d peaks {peaks}, "
           f"s_max {s.max():.4f}; {elapsed:.2f} s")
    assert ok


def _rows(result):
    field = result.as_array()
    return result.axes[0].values(), result.axes[1].values(), field


def test_07_fig2(report):
    deltas, t, markov = _rows(run_sweep(figure_preset("fig2a")))
    markov_ok = all(np.all(np.diff(row) < 0) and detect_backflow(t, row).count == 0 for row in markov)
    deltas_nm, t_nm, nm = _rows(run_sweep(figure_preset("fig2b")))
    detuned = nm[list(deltas_nm).index(1.0)]
    resonant = nm[list(deltas_nm).index(0.0)]
    revivals = detect_backflow(t_nm, detuned).count
    ratio = detuned[-1] / resonant[-1]
    ok = markov_ok and revivals >= 1 and ratio > 10
    report("7 coherence trajectories (fig2a, fig2b)", ok, f"Markov monotone {markov_ok}; non-Markov revivals {revivals}, "
           f"|rho10(500)| ratio {ratio:.1f}")
    assert ok


def test_08_inverted_tongue(report):
    start = time.perf_counter()
    gammas, deltas, field = _rows(run_sweep(figure_preset("fig5a")))
    centre = int(np.argmin(np.abs(deltas)))
    side = [int(np.argmin(np.abs(deltas - d))) for d in (-1.0, 1.0)]
    centre_ratio = np.max(field[:, centre] / np.min(field[:, side], axis=1))

    widths = []
    for preset_id in ("sfig3a", "sfig3b", "sfig3c", "sfig3d"):
        result = run_sweep(figure_preset(preset_id))
        widths.append(np.array(list(band_widths(result, 0.5 * result.as_array().max()).values())))
    widths = np.array(widths)
    edge = deltas[-1] - deltas[0]
    steps = np.diff(widths, axis=0)
    # a band censored at the window edge can only stay put
    lam_ok = np.all((steps > 0) | ((steps == 0) & (widths[1:] == edge)))

    short, long_ = (run_sweep(figure_preset(p)) for p in ("fig6a", "fig6b"))
    w_short = np.array(list(band_widths(short, 0.5 * short.as_array().max()).values()))
    w_long = np.array(list(band_widths(long_, 0.5 * long_.as_array().max()).values()))
    time_ok = np.all(w_long >= w_short) and np.any(w_long > w_short)
    elapsed = time.perf_counter() - start
    ok = centre_ratio < 0.1 and lam_ok and time_ok and elapsed < 120
    report("8 inverted Arnold tongue (fig5a, sfig3, fig6)", ok,
           f"max s_max(0)/s_max(1) {centre_ratio:.3f}; widths at gamma={gammas[0]:g}: "
           f"{', '.join(f'{w:.3f}' for w in widths[:, 0])}; monotone in lambda {bool(lam_ok)}; "
           f"t=10 -> t=100 widening {bool(time_ok)}; {elapsed:.2f} s")
    assert ok


def test_09_determinism(tmp_path, report):
    outputs = []
    for run, jobs in enumerate(("1", "1", "8")):
        out = tmp_path / f"run{run}"
        proc = subprocess.run([sys.executable, "-m", "qsync", "figure", "--id", "fig5a", "--out", str(out),
                               "--jobs", jobs], capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
        outputs.append(((out / "fig5a.csv").read_bytes(), proc.stderr.split()[-1]))
    ok = len(set(outputs)) == 1
    report("9 determinism", ok, f"3 runs (jobs 1, 1, 8), grid hash {outputs[0][1]}")
    assert ok


def test_10_markov_limit(report):
    t = np.linspace(0, 5, 501)
    p = BathParams(gamma=1.0, lam=100.0, delta=0.0)
    rel = np.max(np.abs(np.abs(h_values(p.lam, p.delta, p.gamma, t)) ** 2 / np.exp(-t) - 1))
    report("10 Markov flat-spectrum limit", rel < 0.02, f"max relative deviation {rel:.4f}")
    assert rel < 0.02
