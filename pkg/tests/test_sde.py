import os

import numpy as np
import pytest

from mmopp import model, sde
from mmopp.errors import IntegrationError
from mmopp.model import NoiseParams, baseline_params


def test_config_validation():
    with pytest.raises(ValueError):
        sde.SimConfig(dt=0.0)
    with pytest.raises(ValueError):
        sde.SimConfig(dt=1.0, t_end=0.5)
    with pytest.raises(ValueError):
        sde.SimConfig(save_every=0)
    with pytest.raises(ValueError):
        sde.SimConfig(initial=np.array([-0.1, 0.2, 0.1]))


def test_scheme_mismatch(p24, noise_default):
    cfg = sde.SimConfig(dt=1e-3, t_end=0.1, scheme="euler_maruyama")
    with pytest.raises(ValueError):
        sde.integrate_deterministic(p24, cfg)
    cfg = sde.SimConfig(dt=1e-3, t_end=0.1, scheme="rk4_deterministic")
    with pytest.raises(ValueError):
        sde.integrate_em(p24, noise_default, cfg)


def test_equilibrium_stays_constant():
    p = baseline_params(h=2.5)
    eq = model.coexistence_equilibrium(p)
    cfg = sde.SimConfig(dt=1e-3, t_end=10.0, scheme="rk4_deterministic",
                        initial=eq, save_every=100)
    traj = sde.integrate_deterministic(p, cfg)
    assert np.max(np.abs(traj.states - eq)) < 1e-9
    assert np.all(np.diff(traj.times) > 0)


def test_rk4_self_convergence_order(p24):
    t_end = 1.0
    ref = {}
    for dt in (4e-4, 2e-4, 1e-4):
        cfg = sde.SimConfig(dt=dt, t_end=t_end, scheme="rk4_deterministic",
                            initial=np.array([0.3, 0.3, 0.1]),
                            save_every=int(round(t_end / dt)))
        ref[dt] = sde.integrate_deterministic(p24, cfg).states[-1]
    e1 = np.linalg.norm(ref[4e-4] - ref[2e-4])
    e2 = np.linalg.norm(ref[2e-4] - ref[1e-4])
    assert 3.5 <= np.log2(e1 / e2) <= 4.5


def test_em_zero_noise_is_explicit_euler(p24):
    n0 = NoiseParams(0.0, 0.0, 0.0)
    cfg = sde.SimConfig(dt=1e-4, t_end=0.02, scheme="euler_maruyama",
                        seed=5, initial=np.array([0.3, 0.3, 0.1]))
    traj = sde.integrate_em(p24, n0, cfg)
    st = np.array([0.3, 0.3, 0.1])
    for k in range(1, len(traj.times)):
        st = st + cfg.dt * model.drift(p24, st, "slow")
        assert np.array_equal(traj.states[k], st)


def em_strong_order(p, seed=7, n_paths=32):
    """Coupled-refinement strong-convergence exponent for the EM scheme.

    Shared Brownian increments couple each coarse level to a fine reference
    path; the noise level is chosen so the multiplicative-noise error term
    dominates the deterministic Euler error on the measured dt range.
    """
    n = NoiseParams(0.05, 0.05, 0.05)
    ic = np.array([0.3, 0.41454545454545455, 0.1])
    t_end = 0.05
    n_ref = 2**15
    dt_ref = t_end / n_ref
    level_pows = (10, 11, 12, 13)
    errs = {lp: [] for lp in level_pows}
    rng = np.random.default_rng(seed)
    for _ in range(n_paths):
        dW = np.sqrt(dt_ref) * rng.standard_normal((n_ref, 3))
        cfg = sde.SimConfig(dt=dt_ref, t_end=t_end, scheme="euler_maruyama",
                            initial=ic, save_every=n_ref)
        x_ref = sde.integrate_em(p, n, cfg, increments=dW).states[-1]
        for lp in level_pows:
            lv = 2**lp
            dW_c = dW.reshape(lv, n_ref // lv, 3).sum(axis=1)
            cfg_c = sde.SimConfig(dt=t_end / lv, t_end=t_end, scheme="euler_maruyama",
                                  initial=ic, save_every=lv)
            x_c = sde.integrate_em(p, n, cfg_c, increments=dW_c).states[-1]
            errs[lp].append(np.linalg.norm(x_c - x_ref))
    e = np.array([np.mean(errs[lp]) for lp in level_pows])
    dts = np.array([t_end / 2**lp for lp in level_pows])
    return float(np.polyfit(np.log2(dts), np.log2(e), 1)[0])


def test_em_strong_convergence_order(p24):
    assert 0.3 <= em_strong_order(p24) <= 0.7


def test_em_bit_determinism(p24, noise_default):
    cfg = sde.SimConfig(dt=1e-4, t_end=1.0, scheme="euler_maruyama", seed=42,
                        initial=np.array([0.3, 0.3, 0.1]), save_every=10)
    a = sde.integrate_em(p24, noise_default, cfg)
    b = sde.integrate_em(p24, noise_default, cfg)
    assert np.array_equal(a.states, b.states)
    assert np.array_equal(a.times, b.times)


def test_ensemble_reproducible_and_stream_keyed(p24, noise_default):
    cfg = sde.SimConfig(dt=1e-4, t_end=0.5, scheme="euler_maruyama", seed=9,
                        initial=np.array([0.3, 0.3, 0.1]), save_every=10)
    one = sde.run_ensemble(p24, noise_default, cfg, count=1)
    assert np.array_equal(one[0].states, sde.integrate_em(p24, noise_default, cfg).states)
    e1 = sde.run_ensemble(p24, noise_default, cfg, count=6)
    e2 = sde.run_ensemble(p24, noise_default, cfg, count=6)
    for a, b in zip(e1, e2):
        assert np.array_equal(a.states, b.states)
    # paths differ from each other
    assert not np.array_equal(e1[0].states, e1[1].states)


def test_ensemble_independent_of_worker_count(p24, noise_default):
    cfg = sde.SimConfig(dt=1e-4, t_end=0.3, scheme="euler_maruyama", seed=11,
                        initial=np.array([0.3, 0.3, 0.1]), save_every=10)
    old = os.environ.get("MMO_THREADS")
    try:
        os.environ["MMO_THREADS"] = "1"
        serial = sde.run_ensemble(p24, noise_default, cfg, count=4)
        os.environ["MMO_THREADS"] = "2"
        threaded = sde.run_ensemble(p24, noise_default, cfg, count=4)
    finally:
        if old is None:
            os.environ.pop("MMO_THREADS", None)
        else:
            os.environ["MMO_THREADS"] = old
    for a, b in zip(serial, threaded):
        assert np.array_equal(a.states, b.states)


def test_timescale_equivalence_coupled(p24, noise_default):
    # a slow path with step ds equals the fast path with dt = ds/zeta when
    # the Brownian increments are rescaled by the BM scaling law
    ds = 1e-4
    n_steps = 2000
    rng = np.random.default_rng(3)
    dW_slow = np.sqrt(ds) * rng.standard_normal((n_steps, 3))
    cfg_s = sde.SimConfig(dt=ds, t_end=n_steps * ds, scheme="euler_maruyama",
                          timescale="slow", initial=np.array([0.3, 0.3, 0.1]))
    traj_s = sde.integrate_em(p24, noise_default, cfg_s, increments=dW_slow)
    dt = ds / p24.zeta
    cfg_f = sde.SimConfig(dt=dt, t_end=n_steps * dt, scheme="euler_maruyama",
                          timescale="fast", initial=np.array([0.3, 0.3, 0.1]))
    traj_f = sde.integrate_em(p24, noise_default, cfg_f, increments=dW_slow / np.sqrt(p24.zeta))
    assert np.allclose(traj_s.states, traj_f.states, rtol=1e-9, atol=1e-12)


def test_timescale_equivalence_moments(p24, noise_default):
    # independent draws on each scale: matched-interval increment moments
    ds, n_steps, n_paths = 1e-4, 500, 64
    a = sde.run_ensemble(p24, noise_default,
                         sde.SimConfig(dt=ds, t_end=n_steps * ds, scheme="euler_maruyama",
                                       timescale="slow", seed=100,
                                       initial=np.array([0.3, 0.3, 0.1]),
                                       save_every=n_steps), n_paths)
    b = sde.run_ensemble(p24, noise_default,
                         sde.SimConfig(dt=ds / p24.zeta, t_end=n_steps * ds / p24.zeta,
                                       scheme="euler_maruyama", timescale="fast", seed=200,
                                       initial=np.array([0.3, 0.3, 0.1]),
                                       save_every=n_steps), n_paths)
    da = np.array([t.states[-1] - t.states[0] for t in a])
    db = np.array([t.states[-1] - t.states[0] for t in b])
    se = np.sqrt(da.var(axis=0, ddof=1) / n_paths + db.var(axis=0, ddof=1) / n_paths)
    z = (da.mean(axis=0) - db.mean(axis=0)) / se
    assert np.all(np.abs(z) < 3.0)


def test_boundary_reflect_never_negative(p24):
    n = NoiseParams(0.5, 0.5, 0.5)
    cfg = sde.SimConfig(dt=1e-4, t_end=2.0, scheme="euler_maruyama", seed=1,
                        initial=np.array([0.05, 0.05, 0.05]), save_every=1)
    traj = sde.integrate_em(p24, n, cfg)
    assert np.min(traj.states) >= 0.0


def test_boundary_absorb_truncates(p24):
    n = NoiseParams(0.5, 0.5, 0.5)
    cfg = sde.SimConfig(dt=1e-4, t_end=2.0, scheme="euler_maruyama", seed=1,
                        initial=np.array([0.05, 0.05, 0.05]),
                        boundary_policy="absorb", save_every=1)
    traj = sde.integrate_em(p24, n, cfg)
    assert traj.times[-1] < 2.0
    assert np.min(traj.states) >= 0.0


def test_step_size_guard(p24, noise_default):
    cfg = sde.SimConfig(dt=1.0, t_end=5.0, scheme="euler_maruyama",
                        initial=np.array([0.3, 0.3, 0.1]))
    with pytest.raises(IntegrationError):
        sde.integrate_em(p24, noise_default, cfg)


def test_rk4_blowup_aborts(p24):
    cfg = sde.SimConfig(dt=20.0, t_end=2000.0, scheme="rk4_deterministic",
                        initial=np.array([0.9, 0.1, 0.1]))
    with pytest.raises(IntegrationError):
        sde.integrate_deterministic(p24, cfg)


def test_trajectory_csv_roundtrip(tmp_path, p24, noise_default):
    cfg = sde.SimConfig(dt=1e-4, t_end=0.05, scheme="euler_maruyama", seed=2,
                        initial=np.array([0.3, 0.3, 0.1]), save_every=10)
    traj = sde.integrate_em(p24, noise_default, cfg)
    path = tmp_path / "traj.csv"
    traj.to_csv(path)
    data = np.genfromtxt(path, delimiter=",", names=True)
    assert data.dtype.names == ("t", "x", "y", "z")
    assert len(data) == len(traj.times)
    assert np.allclose(data["x"], traj.x, rtol=0, atol=0)
