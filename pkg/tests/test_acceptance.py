"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line
with its measured value and wall time.  Run with ``pytest tests/test_acceptance.py -v -s``.
"""

import time

import numpy as np

from mmopp import analysis, birthdeath, cli, normalform, sde, slowfast
from mmopp.model import NoiseParams, baseline_params

from test_sde import em_strong_order

MASTER_SEED = 20240811


def report(tag: str, ok: bool, detail: str, t0: float, budget: float):
    elapsed = time.perf_counter() - t0
    print(f"\n[{'PASS' if ok and elapsed < budget else 'FAIL'}] {tag}: {detail} "
          f"({elapsed:.1f}s, budget {budget:.0f}s)")
    assert ok, f"{tag}: {detail}"
    assert elapsed < budget, f"{tag}: runtime {elapsed:.1f}s exceeds {budget:.0f}s"


def test_a01_hopf_value(tmp_path):
    t0 = time.perf_counter()
    out = tmp_path / "scan.csv"
    code = cli.main(["scan", "--what", "hopf", "--h-range", "2.5:2.8",
                     "--out", str(out)])
    h = float(out.read_text().splitlines()[1].split(",")[1])
    ok = code == 0 and abs(h - 2.6413) <= 0.002
    report("A01 Hopf value", ok, f"h_H = {h:.5f} vs 2.6413 +/- 0.002", t0, 10.0)


def test_a02_fsn2_value(tmp_path):
    t0 = time.perf_counter()
    out = tmp_path / "scan.csv"
    code = cli.main(["scan", "--what", "fsn2", "--h-range", "2.6:2.8",
                     "--out", str(out)])
    h = float(out.read_text().splitlines()[1].split(",")[1])
    ok = code == 0 and abs(h - 2.722) <= 0.005
    report("A02 FSN II value", ok, f"h_FSN = {h:.5f} vs 2.722 +/- 0.005", t0, 10.0)


def test_a03_fold_curve_identity():
    t0 = time.perf_counter()
    p = baseline_params()
    fc = slowfast.fold_curve(p)
    rng = np.random.default_rng(MASTER_SEED)
    worst = 0.0
    for s in rng.uniform(fc.a, fc.b, 1000):
        u, ux = slowfast.manifold_residual(p, slowfast.fold_curve_point(fc, s))
        worst = max(worst, abs(u), abs(ux))
    endpoints = (fc.a == 0.25 and fc.b == 0.375
                 and abs(fc.phi(fc.b)) < 1e-15 and abs(fc.psi(fc.a)) < 1e-15)
    ok = worst < 1e-10 and endpoints
    report("A03 fold-curve identity", ok,
           f"max residual {worst:.2e}, a={fc.a}, b={fc.b}", t0, 1.0)


def test_a04_diffusion_approximation_oracle():
    t0 = time.perf_counter()
    p = baseline_params(h=2.4)
    state = [0.3, slowfast.graph_y(p, 0.3, 0.1), 0.1]
    rep = birthdeath.compare_to_diffusion(
        p, state, [1e6, 1e6, 1e6], delta_s=1e-3, replicas=10_000, seed=MASTER_SEED)
    zmax = float(max(np.max(np.abs(rep.z_mean)), np.max(np.abs(rep.z_var))))
    report("A04 diffusion oracle", rep.passed, f"max |z| = {zmax:.2f} < 3", t0, 120.0)


def test_a05_integrator_orders():
    t0 = time.perf_counter()
    p = baseline_params(h=2.4)
    ref = {}
    for dt in (4e-4, 2e-4, 1e-4):
        cfg = sde.SimConfig(dt=dt, t_end=1.0, scheme="rk4_deterministic",
                            initial=np.array([0.3, 0.3, 0.1]),
                            save_every=int(round(1.0 / dt)))
        ref[dt] = sde.integrate_deterministic(p, cfg).states[-1]
    rk4_order = float(np.log2(np.linalg.norm(ref[4e-4] - ref[2e-4])
                              / np.linalg.norm(ref[2e-4] - ref[1e-4])))
    em_order = em_strong_order(p)
    ok = 3.5 <= rk4_order <= 4.5 and 0.3 <= em_order <= 0.7
    report("A05 integrator orders", ok,
           f"RK4 {rk4_order:.2f} in [3.5,4.5], EM {em_order:.2f} in [0.3,0.7]", t0, 60.0)


def test_a06_normal_form_certification():
    t0 = time.perf_counter()
    p = baseline_params(h=2.3)
    fc = slowfast.fold_curve(p)
    fs = slowfast.find_folded_singularity(p, 0.5 * (fc.a + fc.b))
    nfc = normalform.compute_constants(p, fs, NoiseParams(1e-6, 3e-3, 3e-3))
    rep = normalform.verify_normal_form(nfc, p, fs, delta=1e-3)
    slack = 1e-3 + 5.0 * p.zeta
    ok = (rep.dev_y <= slack and rep.dev_xx <= slack and rep.dev_xy <= slack
          and rep.dev_g1sq < 1e-10 and rep.roundtrip_error < 1e-12)
    report("A06 normal form", ok,
           f"coef devs ({rep.dev_y:.1e}, {rep.dev_xx:.1e}, {rep.dev_xy:.1e}) "
           f"<= {slack:.3f}, G1^2 dev {rep.dev_g1sq:.1e}, "
           f"roundtrip {rep.roundtrip_error:.1e}", t0, 10.0)


def test_a07_mmo_statistics():
    t0 = time.perf_counter()
    n = NoiseParams(1e-6, 3e-3, 3e-3)
    samples = {}
    for h in (2.4, 2.66):
        per_path = analysis.sao_count_ensemble(
            baseline_params(h=h), n, count=200, seed=MASTER_SEED, t_end=2000.0)
        samples[h] = np.array([c for counts in per_path for c in counts])
    a = samples[2.4]
    bins = np.array(sorted(set(a)))
    freq = np.array([(a == v).sum() for v in bins])
    first5 = freq[:5]
    reverse_j = (bins[np.argmax(freq)] == bins[0]
                 and np.all(first5[:-1] >= first5[1:]))
    iqr = np.percentile(a, 75) - np.percentile(a, 25)
    span = samples[2.66].max() - samples[2.66].min()
    wide = span >= 3.0 * iqr
    ok = reverse_j and wide
    report("A07 MMO statistics", ok,
           f"h=2.4 first-5 freqs {[int(v) for v in first5]} "
           f"(mode {int(bins[np.argmax(freq)])}), "
           f"h=2.66 span {int(span)} >= 3*IQR {3 * iqr:.1f}", t0, 900.0)


def test_a08_return_map_plateau():
    t0 = time.perf_counter()
    p = baseline_params(h=2.3)
    med = {}
    for s3 in (1e-4, 1e-2):
        samples = analysis.return_map(p, NoiseParams(1e-6, 1e-3, s3),
                                      seed=MASTER_SEED, grid_size=1000)
        med[s3] = analysis.plateau_indicator(samples)
    ok = med[1e-2] < med[1e-4]
    report("A08 return-map plateau", ok,
           f"median |D2 z1|: {med[1e-2]:.2e} (sigma3=1e-2) < "
           f"{med[1e-4]:.2e} (sigma3=1e-4)", t0, 900.0)


def test_a09_chi_suite():
    t0 = time.perf_counter()
    mono = all(slowfast.chi_k(mu, k) > slowfast.chi_k(mu, k + 1)
               for mu in (1e-4, 1e-2, 0.1, 0.5, 0.9) for k in range(5))
    argmax_ok = True
    for k in range(5):
        mu_star = 1.0 / (4.0 * (2 * k + 1) ** 2)
        c = slowfast.chi_k(mu_star, k)
        argmax_ok &= (c > slowfast.chi_k(mu_star * 1.001, k)
                      and c > slowfast.chi_k(mu_star * 0.999, k))
    h_fsn = 2.7226375446117371
    p = baseline_params()
    chis = []
    for eps in (0.1, 0.01, 0.001):
        fs = slowfast.find_folded_singularity(p.with_h(h_fsn - eps), 0.3066,
                                              enforce_side_conditions=False)
        chis.append(slowfast.chi_k(fs.mu, 0))
    vanishing = chis[0] > chis[1] > chis[2] and chis[2] < 0.1
    ok = mono and argmax_ok and vanishing
    report("A09 chi_k suite", ok,
           f"monotone {mono}, argmax {argmax_ok}, "
           f"chi0 near FSN {chis[2]:.3f} -> 0", t0, 1.0)


def test_a10_extinction_positivity():
    t0 = time.perf_counter()
    p = baseline_params(h=2.4)
    n = NoiseParams(1e-5, 1e-4, 1e-4)
    cfg = sde.SimConfig(dt=1e-4, t_end=200.0, scheme="euler_maruyama",
                        seed=MASTER_SEED, initial=np.array([0.3, 0.3, 0.1]),
                        save_every=10)
    worst = min(sde.map_ensemble(lambda tr: float(np.min(tr.states)),
                                 p, n, cfg, 100))
    ds = birthdeath.DiscreteState(9, 12, 3, 30.0, 30.0, 30.0)
    tr = birthdeath.simulate_chain(p, ds, horizon=30.0, seed=MASTER_SEED,
                                   max_events=2_000_000)
    absorbing = True
    hit_zero = False
    for i in range(3):
        zeros = np.nonzero(tr.counts[:, i] == 0)[0]
        if len(zeros):
            hit_zero = True
            absorbing &= bool(np.all(tr.counts[zeros[0]:, i] == 0))
    ok = worst >= 0.0 and hit_zero and absorbing
    report("A10 extinction/positivity", ok,
           f"min component {worst:.1e} >= 0, chain zeros absorbing {absorbing}",
           t0, 300.0)
