import json

import numpy as np
import pytest

from mmopp import birthdeath, model
from mmopp.birthdeath import DiscreteState
from mmopp.errors import BudgetError

from conftest import random_interior_states

ON_MANIFOLD = np.array([0.3, 0.41454545454545455, 0.1])


def test_discrete_state_validation():
    with pytest.raises(ValueError):
        DiscreteState(-1, 0, 0, 100.0, 100.0, 100.0)
    with pytest.raises(ValueError):
        DiscreteState(1, 1, 1, 0.0, 100.0, 100.0)
    ds = DiscreteState.from_densities([0.3, 0.3, 0.1], [100, 100, 100])
    assert (ds.n_x, ds.n_y, ds.n_z) == (30, 30, 10)
    assert ds.densities == pytest.approx([0.3, 0.3, 0.1])


def test_probability_triples_normalized(p24, rng):
    for s in random_interior_states(rng, 10_000, lo=0.0, hi=2.0):
        triples = birthdeath.event_probabilities(p24, s)
        assert np.all(triples >= 0.0) and np.all(triples <= 1.0)
        assert triples.sum(axis=1) == pytest.approx([1.0, 1.0, 1.0], abs=1e-15)


def test_probabilities_at_prey_extinction(p24):
    triples = birthdeath.event_probabilities(p24, [0.0, 0.4, 0.2])
    assert triples[0] == pytest.approx([0.0, 0.0, 1.0], abs=0)


def test_probabilities_frozen_values(p24):
    triples = birthdeath.event_probabilities(p24, [0.3, 0.3, 0.1])
    want = [
        [0.19267260253977522, 0.1650853889943074, 0.6422420084659174],
        [0.09172441907867917, 0.09294741133306156, 0.8153281695882593],
        [0.04978839930296241, 0.037424280142726745, 0.9127873205543108],
    ]
    np.testing.assert_allclose(triples, want, rtol=1e-13)


def test_chain_reproducible(p24):
    ds = DiscreteState(30, 30, 10, 100.0, 100.0, 100.0)
    a = birthdeath.simulate_chain(p24, ds, horizon=2.0, seed=5)
    b = birthdeath.simulate_chain(p24, ds, horizon=2.0, seed=5)
    assert np.array_equal(a.times, b.times)
    assert np.array_equal(a.counts, b.counts)
    c = birthdeath.simulate_chain(p24, ds, horizon=2.0, seed=6)
    assert not np.array_equal(a.counts, c.counts)
    assert np.all(np.diff(a.times) >= 0.0)


def test_extinction_is_absorbing(p24):
    ds = DiscreteState(9, 12, 3, 30.0, 30.0, 30.0)
    tr = birthdeath.simulate_chain(p24, ds, horizon=30.0, seed=3, max_events=2_000_000)
    for i in range(3):
        zeros = np.nonzero(tr.counts[:, i] == 0)[0]
        assert len(zeros) > 0
        assert np.all(tr.counts[zeros[0]:, i] == 0)


def test_zero_count_never_revives(p24):
    ds = DiscreteState(0, 20, 10, 50.0, 50.0, 50.0)
    tr = birthdeath.simulate_chain(p24, ds, horizon=10.0, seed=1)
    assert np.all(tr.counts[:, 0] == 0)


def test_chain_budget_guards(p24):
    ds = DiscreteState(10, 10, 10, 1e9, 1e9, 1e9)
    with pytest.raises(BudgetError):
        birthdeath.simulate_chain(p24, ds, horizon=100.0, seed=0)
    small = DiscreteState(9, 12, 3, 30.0, 30.0, 30.0)
    with pytest.raises(BudgetError):
        birthdeath.simulate_chain(p24, small, horizon=30.0, seed=3, max_events=100)
    with pytest.raises(ValueError):
        birthdeath.simulate_chain(p24, small, horizon=-1.0, seed=0)
    with pytest.raises(ValueError):
        birthdeath.simulate_chain(
            p24, DiscreteState(1, 1, 1, 5.0, 50.0, 50.0), horizon=1.0, seed=0)


def test_analytic_moments_zero_at_origin(p24):
    mean, var = birthdeath.increment_moments_analytic(
        p24, [0.0, 0.0, 0.0], 1e-3, [1e4, 1e4, 1e4])
    assert np.all(mean == 0.0) and np.all(var == 0.0)


def test_analytic_moments_match_sde_coefficients(p24, rng):
    # variance formula is exactly the squared slow-scale diffusion with
    # sigma_i = 1/sqrt(omega_i), mean the slow drift, per unit delta_s
    w = np.array([1e4, 4e4, 2.5e5])
    n = model.NoiseParams.from_omegas(*w)
    ds = 1e-3
    for s in random_interior_states(rng, 100):
        mean, var = birthdeath.increment_moments_analytic(p24, s, ds, w)
        assert mean == pytest.approx(model.drift(p24, s, "slow") * ds, rel=1e-13)
        assert var == pytest.approx(model.diffusion(p24, n, s, "slow") ** 2 * ds, rel=1e-12)


def test_analytic_moments_frozen_value(p24):
    mean, var = birthdeath.increment_moments_analytic(
        p24, [0.3, 0.3, 0.1], 1e-3, [1e4, 1e4, 1e4])
    assert mean[0] == pytest.approx(4.295454545454545e-3, rel=1e-12)
    assert var[0] == pytest.approx(5.558604583272515e-6, rel=1e-12)
    with pytest.raises(ValueError):
        birthdeath.increment_moments_analytic(p24, [0.3, 0.3, 0.1], 0.0, [1e4] * 3)
    with pytest.raises(ValueError):
        birthdeath.increment_moments_analytic(p24, [0.3, 0.3, 0.1], 0.1, [1e4] * 3)


def test_compare_to_diffusion_passes_at_large_omega(p24):
    report = birthdeath.compare_to_diffusion(
        p24, ON_MANIFOLD, [1e5, 1e5, 1e5], delta_s=1e-3, replicas=2000, seed=42)
    assert report.passed
    assert not report.small_omega
    assert np.all(np.abs(report.z_mean) < 3.0) and np.all(np.abs(report.z_var) < 3.0)
    payload = json.loads(report.to_json())
    assert payload["passed"] is True and len(payload["z_mean"]) == 3


def test_increment_mean_matches_drift_at_moderate_omega(p24):
    # short-horizon chain increments track drift * delta_s within 3 SE
    report = birthdeath.compare_to_diffusion(
        p24, ON_MANIFOLD, [1e4, 1e4, 1e4], delta_s=1e-3, replicas=10_000, seed=7)
    assert np.all(np.abs(report.z_mean) < 3.0)


def test_compare_to_diffusion_flags_small_omega(p24):
    report = birthdeath.compare_to_diffusion(
        p24, ON_MANIFOLD, [10.0, 10.0, 10.0], delta_s=1e-3, replicas=2000, seed=42)
    assert report.small_omega
    assert not report.passed


def test_compare_to_diffusion_input_validation(p24):
    with pytest.raises(ValueError):
        birthdeath.compare_to_diffusion(p24, ON_MANIFOLD, [1e5] * 3,
                                        delta_s=1e-3, replicas=10, seed=0)
    with pytest.raises(ValueError):
        birthdeath.compare_to_diffusion(p24, ON_MANIFOLD, [1e5] * 3,
                                        delta_s=0.0, replicas=2000, seed=0)
