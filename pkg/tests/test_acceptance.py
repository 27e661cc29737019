"""Acceptance criteria, each evaluated at its stated tolerance.

One PASS/FAIL line per criterion is printed in the terminal summary.
"""

import math
import warnings

import numpy as np
import pytest
from scipy.optimize import brentq

from conftest import record
from cpb_cavity import (
    ExcitedFock,
    GroundFock,
    HilbertSpace,
    TwoQubitState,
    UnknownQubit,
    analyze,
    channel_from_rho,
    closed_form_rho,
    concurrence,
    figure_params,
    negativity,
    project_two_qubit,
    pt_spectrum,
    sweep,
    teleport_protocol,
)
from cpb_cavity.entanglement import first_local_max, refine_max, separable_times, zero_runs
from cpb_cavity.figures import FIGURE_IDS, PRESETS, read_csv, run_figure
from cpb_cavity.teleport import paper_average_fidelity

TAUS_500 = np.linspace(0.0, 10.0, 500)


def conc_at(params, tau, mu_mode="standard", n=1):
    return analyze(closed_form_rho(params, GroundFock(n), float(tau), mu_mode), "paper_pair", n).concurrence


def first_peak(f, taus):
    vals = np.array([f(t) for t in taus])
    i = first_local_max(vals)
    assert i is not None, "no interior maximum on the grid"
    return refine_max(f, taus, vals, i)


@pytest.fixture(scope="module")
def acc1_sweeps():
    out = []
    for cjg in (2.5, 0.4, 5.0):
        for delta in (0.0, 0.5, 1.0):
            p = figure_params(cjg, delta)
            sp = HilbertSpace.for_photons(1)
            for init in (GroundFock(1), ExcitedFock(1)):
                out.append((p, sp, sweep(p, init, TAUS_500, "closed_form", space=sp),
                            sweep(p, init, TAUS_500, "oracle", space=sp)))
    return out


def test_acc01_oracle_agreement(acc1_sweeps):
    worst = max(np.max(np.abs(a.matrix - b.matrix))
                for _, _, closed, oracle in acc1_sweeps for a, b in zip(closed, oracle))
    ok = record(1, worst < 1e-8, f"closed form vs propagator max elementwise deviation {worst:.2e} (< 1e-8), "
                                 "18 sweeps x 500 points")
    assert ok


def test_acc02_unitarity_suite(acc1_sweeps):
    dev = dict(trace=0.0, herm=0.0, neg=0.0, purity=0.0, exc=0.0, pt=0.0)
    for _, sp, closed, oracle in acc1_sweeps:
        nexc = sp.excitation_number()
        for rhos in (closed, oracle):
            e0 = rhos[0].expectation(nexc).real
            for r in rhos:
                m = r.matrix
                dev["trace"] = max(dev["trace"], abs(np.trace(m).real - 1))
                dev["herm"] = max(dev["herm"], np.max(np.abs(m - m.conj().T)))
                dev["neg"] = max(dev["neg"], -r.eigenvalues()[0])
                dev["purity"] = max(dev["purity"], 1 - r.purity())
                dev["exc"] = max(dev["exc"], abs(r.expectation(nexc).real - e0))
                dev["pt"] = max(dev["pt"], abs(pt_spectrum(r).sum() - 1))
    limits = dict(trace=1e-10, herm=1e-10, neg=1e-10, purity=1e-9, exc=1e-10, pt=1e-10)
    ok = all(dev[k] <= limits[k] for k in dev)
    record(2, ok, " ".join(f"{k}={v:.1e}" for k, v in dev.items()))
    assert ok


def test_acc03_maximal_entanglement_at_resonance():
    p = figure_params(2.5, 0.0)
    taus = np.linspace(0, 10, 1000)
    tau_star, c_star = first_peak(lambda t: conc_at(p, t), taus)
    rep = analyze(closed_form_rho(p, GroundFock(1), tau_star), "paper_pair", 1)
    pop_dev = max(abs(rep.pop_g_n - 0.5), abs(rep.pop_e_nm1 - 0.5))
    tau_lit, c_lit = first_peak(lambda t: conc_at(p, t, "paper_literal"), taus)
    ok = c_star >= 0.999999 and pop_dev <= 1e-6
    record(3, ok, f"C(tau*={tau_star:.4f}) = {c_star:.9f}, population deviation {pop_dev:.1e}; "
                  f"paper-literal mode peak at tau={tau_lit:.3f} (published ~2.5, reported only)")
    assert ok


def test_acc04_detuning_tradeoff():
    p0, p1 = figure_params(2.5, 0.0), figure_params(2.5, 1.0)
    taus = np.linspace(0, 10, 2001)
    c0 = max(conc_at(p0, t) for t in taus)
    c1 = max(conc_at(p1, t) for t in taus)
    t0 = [t for t in separable_times(lambda t: conc_at(p0, t), taus[1:]) if t > 1e-3][0]
    t1 = [t for t in separable_times(lambda t: conc_at(p1, t), taus[1:]) if t > 1e-3][0]
    lower = c1 < c0 and c1 <= 0.99
    later = t1 > t0 + 1e-3
    ok = lower and later
    record(4, ok, f"max C: delta=0 {c0:.6f}, delta=1 {c1:.6f} (required <= 0.99); "
                  f"first separable tau: {t0:.4f} -> {t1:.4f} (later: {later})")
    assert c1 < c0
    assert later
    assert c1 <= 0.99, "exact maximum 2 sqrt(p(1-p)) = 0.99487 with p = 0.4496 exceeds 0.99"


def test_acc05_capacitance_ratio():
    p_ref = figure_params(2.5, 0.0)
    g_half = p_ref.gamma / 2
    cjg_half = brentq(lambda x: math.sqrt(x) / (1 + x) - g_half, 1e-6, 1.0)
    p_half = figure_params(cjg_half, 0.0)
    taus = np.linspace(0, 20, 2000)
    t_ref, c_ref = first_peak(lambda t: conc_at(p_ref, t), taus)
    t_half, c_half = first_peak(lambda t: conc_at(p_half, t), taus)
    p_fig2 = figure_params(0.4, 0.0)
    t_fig2, c_fig2 = first_peak(lambda t: conc_at(p_fig2, t), taus)
    ok = t_half > t_ref and abs(c_half - 1) <= 1e-6 and abs(c_ref - 1) <= 1e-6
    record(5, ok, f"C_jg=5/2: peak tau {t_ref:.4f} C={c_ref:.8f}; C_jg={cjg_half:.4f} (gamma/2): "
                  f"peak tau {t_half:.4f} C={c_half:.8f}; C_jg=2/5: tau {t_fig2:.4f} C={c_fig2:.8f}")
    assert ok


def test_acc06_ppt_concurrence_consistency():
    mismatches, points = 0, 0
    for fig_id in FIGURE_IDS:
        preset = PRESETS[fig_id]
        for curve in preset.curves:
            spec = preset.spec(curve, 1000, preset.tau_max)
            rhos = sweep(spec.params(), spec.initial_state(), spec.grid(), "oracle", space=spec.space())
            for rho in rhos:
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore", RuntimeWarning)
                    two = project_two_qubit(rho, "paper_pair", curve.n)
                if (negativity(two.matrix) > 1e-8) != (concurrence(two) > 1e-6):
                    mismatches += 1
                points += 1
    ok = mismatches == 0
    record(6, ok, f"{mismatches} mismatches over {points} grid points of all presets")
    assert ok


def test_acc07_sudden_death(tmp_path):
    cols, data, _ = read_csv(run_figure("3b", tmp_path / "fig3b.csv"))
    runs = zero_runs(data[:, cols.index("concurrence")])
    where = ", ".join(f"tau {data[a, 0]:.3f}..{data[b - 1, 0]:.3f}" for a, b in runs)
    ok = len(runs) >= 2
    record(7, ok, f"{len(runs)} zero-concurrence interval(s) in [0,15] ({where}); "
                  "closed dynamics keep the global state pure, so the two-level reduction "
                  "only vanishes at isolated instants")
    assert ok


def test_acc08_teleportation_limits():
    rng = np.random.default_rng(8)
    bell = TwoQubitState.from_ket([0, 1, 1, 0])
    dev = 0.0
    for _ in range(20):
        v = rng.normal(size=2) + 1j * rng.normal(size=2)
        v /= np.linalg.norm(v)
        dev = max(dev, np.max(np.abs(teleport_protocol(bell, UnknownQubit(v[0], v[1])).fidelities - 1)))
    prod = 0.0
    for _ in range(20):
        a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        b = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        ra, rb = a @ a.conj().T, b @ b.conj().T
        ch = np.kron(ra / np.trace(ra), rb / np.trace(rb))
        prod = max(prod, teleport_protocol(ch, UnknownQubit(1, 0)).avg_over_inputs)
    p = figure_params(2.5, 0.0)
    tau = math.pi / (4 * p.gamma)
    ch = channel_from_rho(sweep(p, GroundFock(1), [tau])[0], "paper_pair", 1)
    mean = teleport_protocol(ch, UnknownQubit(math.cos(0.4), math.sin(0.4))).mean_fidelity
    ok = dev <= 1e-9 and prod <= 2 / 3 + 1e-9 and abs(mean - 1) <= 1e-6
    record(8, ok, f"Bell max |F-1| {dev:.1e}; product-channel max avg F {prod:.6f} (<= 2/3); "
                  f"peak-channel mean F {mean:.9f}")
    assert ok


def test_acc09_directional_fidelity():
    taus = np.linspace(0, 10, 1000)
    maxima = {}
    for d in (0.1, 0.5, 1.0):
        p = figure_params(5.0, d)
        maxima[d] = max(paper_average_fidelity(p, 1, t) for t in taus)
    peaks = {}
    for n in (1, 2, 3):
        p = figure_params(5.0, 0.1, n)
        peaks[n] = first_peak(lambda t, p=p, n=n: paper_average_fidelity(p, n, t), taus)[0]
    proto = {}
    for d in (0.1, 0.5, 1.0):
        p = figure_params(5.0, d)
        rhos = sweep(p, GroundFock(1), taus[::4])
        proto[d] = max(teleport_protocol(channel_from_rho(r, "paper_pair", 1), UnknownQubit(1, 0)).avg_over_inputs
                       for r in rhos)
    delta_order = maxima[0.1] > maxima[0.5] + 1e-6 > maxima[1.0] + 2e-6
    n_order = peaks[1] > peaks[2] + 1e-6 > peaks[3] + 2e-6
    ok = delta_order and n_order
    record(9, ok, "published-fidelity input average: max over tau "
                  + ", ".join(f"delta={d}: {v:.4f}" for d, v in maxima.items())
                  + "; first peak tau " + ", ".join(f"n={n}: {t:.3f}" for n, t in peaks.items())
                  + "; protocol avg F max " + ", ".join(f"{v:.4f}" for v in proto.values()))
    assert ok


def test_acc10_determinism(tmp_path):
    differing = []
    for fig_id in FIGURE_IDS:
        a = run_figure(fig_id, tmp_path / f"a{fig_id}.csv", workers=1).read_bytes()
        b = run_figure(fig_id, tmp_path / f"b{fig_id}.csv", workers=1).read_bytes()
        c = run_figure(fig_id, tmp_path / f"c{fig_id}.csv", workers=4).read_bytes()
        if not (a == b == c):
            differing.append(fig_id)
    ok = not differing
    record(10, ok, f"{len(FIGURE_IDS)} presets byte-identical across two runs and workers 1/4"
               if ok else f"presets differ: {differing}")
    assert ok
