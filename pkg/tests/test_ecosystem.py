"""Food-web dynamics tests: scalar-vs-vectorized agreement, noise-free hand
recurrences, latent-herring initialization, and the structural guarantee that
only (B, C) ever reaches a candidate model."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from ftlab.ecosystem import (
    CandidateEcoModel,
    EffortPolicy,
    FoodWeb,
    UtilitySpec,
    _discounted_utility,
    _simulate,
    _stream,
    candidate_forecast,
    candidate_latent_init,
    candidate_step,
    default_candidates,
    default_utility_spec,
    default_web,
    eco_step,
    evaluate_regime,
    forecast_rmse,
    interior_equilibrium,
    optimize_fixed_effort,
    simulate_truth,
    utility_per_step,
)
from ftlab.errors import ConfigError, NumericalError


class ReplayRng:
    """Hands out prerecorded shock rows so scalar and batch paths share draws."""

    def __init__(self, rows):
        self.rows = [np.asarray(r, dtype=float) for r in rows]
        self.k = 0

    def standard_normal(self, n):
        row = self.rows[self.k]
        self.k += 1
        assert row.shape == (n,)
        return row


def test_batch_rollout_matches_scalar_steps():
    web = default_web()
    efforts = EffortPolicy(0.3, 0.2)
    T = 12
    Z = np.random.default_rng(5).standard_normal((T, 5))
    e = np.zeros(5)
    e[0], e[2:] = 0.3, 0.2
    traj, hb, hh = _simulate(web.r, web.A, web.sigma, web.x0, e, Z)

    rng = ReplayRng(Z)
    x = web.x0.copy()
    for t in range(T):
        x_next, h = eco_step(web, x, efforts, rng)
        assert_allclose(traj[t + 1], x_next, rtol=0, atol=1e-14)
        assert hb[t] == pytest.approx(h["bass"], abs=1e-15)
        assert hh[t] == pytest.approx(h["herring"], abs=1e-15)
        x = x_next
    assert_allclose(traj[0], web.x0, rtol=0, atol=0)


def test_candidate_batch_rollout_matches_scalar_steps():
    model, _ = default_candidates()
    efforts = EffortPolicy(0.15, 0.4)
    T = 8
    Z = np.random.default_rng(6).standard_normal((T, 3))
    e = np.array([0.15, 0.0, 0.4])
    x0 = np.array([0.5, 0.4, 0.6])
    traj, hb, hh = _simulate(model.r, model.A, model.sigma, x0, e, Z)

    rng = ReplayRng(Z)
    x = x0.copy()
    for t in range(T):
        x_next, h = candidate_step(model, x, efforts, rng)
        assert_allclose(traj[t + 1], x_next, rtol=0, atol=1e-14)
        assert hh[t] == pytest.approx(h["herring"], abs=1e-15)
        x = x_next


def test_noise_free_recurrence_hand_loop():
    web = default_web()
    quiet = FoodWeb(web.r, web.A, np.zeros(5), web.x0)
    efforts = EffortPolicy(0.25, 0.1)
    e = np.zeros(5)
    e[0], e[2:] = 0.25, 0.1
    rng = np.random.default_rng(0)

    x_hand = web.x0.copy()
    x_code = web.x0.copy()
    for _ in range(10):
        res = x_hand - e * x_hand
        x_hand = res * np.exp(quiet.r + quiet.A @ res)
        x_code, _ = eco_step(quiet, x_code, efforts, rng)
        assert_allclose(x_code, x_hand, rtol=0, atol=1e-12)


def test_harvest_comes_before_growth():
    web = default_web()
    rng = np.random.default_rng(1)
    nxt, h = eco_step(web, web.x0, EffortPolicy(1.0, 0.0), rng)
    # full bass effort removes the stock before growth can act
    assert nxt[0] == 0.0
    assert h["bass"] == web.x0[0]
    nxt, h = eco_step(web, web.x0, EffortPolicy(0.0, 1.0), rng)
    assert np.all(nxt[2:] == 0.0)
    assert h["herring"] == pytest.approx(web.x0[2:].sum(), rel=1e-15)


def test_default_web_rests_at_interior_equilibrium():
    web = default_web()
    eq = interior_equilibrium(web.r, web.A)
    assert_allclose(eq, [0.5, 0.4, 0.55, 0.50, 0.45], rtol=0, atol=1e-9)
    assert_allclose(web.r + web.A @ eq, np.zeros(5), rtol=0, atol=1e-12)
    quiet = FoodWeb(web.r, web.A, np.zeros(5), web.x0)
    nxt, _ = eco_step(quiet, web.x0, EffortPolicy(0.0, 0.0), np.random.default_rng(0))
    assert_allclose(nxt, web.x0, rtol=0, atol=1e-12)


def test_interior_equilibrium_rejects_nonpositive():
    with pytest.raises(NumericalError):
        interior_equilibrium(np.array([-1.0, -1.0, -1.0]), -np.eye(3))


def test_foodweb_sign_constraints():
    web = default_web()
    A = web.A.copy()
    A[0, 2] = 0.0
    with pytest.raises(ConfigError):
        FoodWeb(web.r, A, web.sigma, web.x0)
    A = web.A.copy()
    A[2, 2] = 0.5
    with pytest.raises(ConfigError):
        FoodWeb(web.r, A, web.sigma, web.x0)
    with pytest.raises(ConfigError):
        FoodWeb(web.r[:3], web.A, web.sigma, web.x0)


def test_candidate_sign_constraints():
    a, b = default_candidates()
    assert a.label == "model_A" and b.label == "model_B"
    bad = a.A.copy()
    bad[0, 2] = 0.0
    with pytest.raises(ConfigError):
        CandidateEcoModel("A", a.r, bad, a.sigma)
    bad = b.A.copy()
    bad[0, 2] = 0.1
    with pytest.raises(ConfigError):
        CandidateEcoModel("B", b.r, bad, b.sigma)
    with pytest.raises(ConfigError):
        CandidateEcoModel("C", a.r, a.A, a.sigma)
    bad = a.A.copy()
    bad[1, 1] = 0.2
    with pytest.raises(ConfigError):
        CandidateEcoModel("A", a.r, bad, a.sigma)


def test_effort_policy_bounds():
    with pytest.raises(ConfigError):
        EffortPolicy(1.2, 0.0)
    with pytest.raises(ConfigError):
        EffortPolicy(0.0, -0.1)


def test_latent_init_hand_value_and_floor():
    a, _ = default_candidates()
    # -(1.03 - 0.30*0.5 - 0.20*0.4) / -1.333333
    assert candidate_latent_init(a, 0.5, 0.4) == pytest.approx(
        0.80 / 1.333333, rel=1e-12
    )
    assert candidate_latent_init(a, 50.0, 50.0) == 0.0


def test_utility_hand_values():
    web = default_web()
    spec = default_utility_spec(web)
    eq = interior_equilibrium(web.r, web.A)
    assert spec.C_base == pytest.approx(eq[1], rel=1e-12)
    assert spec.B_base == pytest.approx(0.1 * eq[0], rel=1e-12)
    assert spec.H_base == pytest.approx(0.1 * eq[2:].sum(), rel=1e-12)
    # every term exactly at its baseline scores 1
    assert utility_per_step(spec.C_base, spec.B_base, spec.H_base, spec) == pytest.approx(
        1.0, rel=1e-12
    )
    assert utility_per_step(0.0, 0.0, 0.0, spec) == 0.0
    # far above baseline every term pins at the cap
    u = utility_per_step(100 * spec.C_base, 100 * spec.B_base, 100 * spec.H_base, spec)
    assert u == pytest.approx(spec.cap, rel=1e-12)
    with pytest.raises(ValueError):
        utility_per_step(-0.1, 0.0, 0.0, spec)
    with pytest.raises(ConfigError):
        UtilitySpec(1.0, 1.0, 1.0, weight_conservation=0.9, weight_bass_harvest=0.9)
    with pytest.raises(ConfigError):
        UtilitySpec(0.0, 1.0, 1.0)


def test_candidate_forecast_sees_only_last_observation():
    a, _ = default_candidates()
    efforts = EffortPolicy(0.2, 0.2)
    last = np.array([0.48, 0.41])
    hist1 = np.vstack([np.full((6, 2), 9.9), last])
    hist2 = np.vstack([np.zeros((2, 2)), last])
    f1 = candidate_forecast(a, hist1, efforts, 10, 30, 123)
    f2 = candidate_forecast(a, hist2, efforts, 10, 30, 123)
    assert np.array_equal(f1["trajectories"], f2["trajectories"])
    assert np.array_equal(f1["B_med"], f2["B_med"])
    assert f1["trajectories"].shape == (30, 11, 3)
    assert f1["trajectories"][0, 0, 2] == candidate_latent_init(a, 0.48, 0.41)


def test_candidate_forecast_rejects_bad_history():
    a, _ = default_candidates()
    with pytest.raises(ConfigError):
        candidate_forecast(a, np.zeros((4, 3)), EffortPolicy(0, 0), 5, 5, 1)
    with pytest.raises(ConfigError):
        candidate_forecast(a, np.zeros((0, 2)), EffortPolicy(0, 0), 5, 5, 1)


def test_effort_grid_refinement_never_hurts():
    # the coarse grid is a subset of the fine one and both searches share the
    # same shock tensor, so the fine optimum dominates in the paired mean
    web = default_web()
    spec = default_utility_spec(web)
    seed, horizon, reps, delta = 77, 15, 20, 0.99
    coarse = optimize_fixed_effort(web, spec, horizon, reps, delta, seed, effort_points=11)
    fine = optimize_fixed_effort(web, spec, horizon, reps, delta, seed, effort_points=21)
    Z = _stream(seed, 3).standard_normal((reps, horizon, 5))

    def mean_value(eff):
        e = np.zeros(5)
        e[0], e[2:] = eff.effort_bass, eff.effort_herring
        traj, hb, hh = _simulate(web.r, web.A, web.sigma, web.x0, e, Z)
        return float(np.mean(_discounted_utility(traj[..., 1], hb, hh, spec, delta)))

    assert mean_value(fine) >= mean_value(coarse)


def test_candidate_optimize_requires_a_start():
    a, _ = default_candidates()
    spec = default_utility_spec(default_web())
    with pytest.raises(ConfigError):
        optimize_fixed_effort(a, spec, 5, 5, 0.99, 1, effort_points=3)


def test_evaluate_regime_is_paired_and_self_consistent():
    web = default_web()
    spec = default_utility_spec(web)
    opt = EffortPolicy(0.2, 0.2)
    out = evaluate_regime(web, opt, spec, opt, 20, 30, 0.99, 9)
    # same efforts as the optimum on the same shocks: ratio exactly 1
    assert out["utility_ratio_vs_truth_optimum"] == pytest.approx(1.0, rel=1e-14)
    assert out["trajectories"].shape == (30, 21, 5)
    assert out["mean_utility"] == pytest.approx(out["mean_utility_optimum"], rel=1e-14)


def test_simulate_truth_shapes_and_determinism():
    web = default_web()
    t1 = simulate_truth(web, web.x0, EffortPolicy(0.1, 0.1), 7, 4, 13, tag=2)
    t2 = simulate_truth(web, web.x0, EffortPolicy(0.1, 0.1), 7, 4, 13, tag=2)
    assert np.array_equal(t1[0], t2[0])
    assert t1[0].shape == (4, 8, 5)
    t3 = simulate_truth(web, web.x0, EffortPolicy(0.1, 0.1), 7, 4, 13, tag=3)
    assert not np.array_equal(t1[0], t3[0])


def test_forecast_rmse_hand_value():
    got = forecast_rmse([0.0, 3.0], [4.0, 0.0], [0.0, 0.0], [0.0, 0.0])
    assert got == pytest.approx(2.5, rel=1e-15)
