"""Solver and discretization tests against independent oracles: quadrature
for kernel rows, exhaustive policy enumeration for the optimizer, and the
analytic escapement conditions for the policy structure."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose
from scipy.integrate import quad

from ftlab.errors import ConfigError, NumericalError
from ftlab.growth import GrowthCurve, StochasticModel, growth, growth_slope, reference_trio
from ftlab.mdp import (
    ActionGrid,
    Policy,
    RewardSpec,
    StateGrid,
    TransitionKernel,
    discretize_kernel,
    escapement_profile,
    greedy_policy,
    kernel_row,
    policy_csv_rows,
    reed_escapement,
    reward_matrix,
    uniform_action_grid,
    uniform_state_grid,
    value_iterate,
)

N_RANDOM_MDPS = 100
ENUM_TOL = 1e-8


def lognormal_row_oracle(model, escapement, states):
    """Quadrature oracle: integrate the shock density over each cell.

    next_x = m * exp(sigma*Z - sigma^2/2) with m = growth(escapement); the
    density of next_x is lognormal with log-mean log(m) - sigma^2/2.  Each
    cell probability is integrated numerically, independent of the CDF
    differencing used by the implementation.
    """
    m = growth(model.curve, escapement)
    n = len(states)
    row = np.zeros(n)
    if m <= 0:
        row[0] = 1.0
        return row
    if model.sigma == 0.0:
        row[states.bin_of(m)] = 1.0
        return row
    mu = np.log(m) - model.sigma**2 / 2.0
    sig = model.sigma

    def pdf(y):
        return np.exp(-((np.log(y) - mu) ** 2) / (2 * sig**2)) / (
            y * sig * np.sqrt(2 * np.pi)
        )

    edges = states.edges
    for j in range(n):
        lo = edges[j]
        hi = edges[j + 1]
        if np.isinf(hi):
            # integrate the complement for the absorbing top cell
            row[j] = 1.0 - quad(pdf, 1e-300, lo, limit=200)[0]
        else:
            row[j] = quad(pdf, max(lo, 1e-300), hi, limit=200)[0]
    return row / row.sum()


def enumerate_optimal_values(P, R, delta):
    """Exact optimal values by exhaustive policy enumeration.

    Every stationary deterministic policy is evaluated by a linear solve;
    the optimum is the elementwise max.  Feasible only for tiny MDPs.
    """
    import itertools

    nA, nS = R.shape
    idx = np.arange(nS)
    best = np.full(nS, -np.inf)
    for assignment in itertools.product(range(nA), repeat=nS):
        a = np.array(assignment)
        v = np.linalg.solve(np.eye(nS) - delta * P[a, idx], R[a, idx])
        best = np.maximum(best, v)
    return best


def random_small_mdp(rng):
    nS = rng.integers(3, 5)
    nA = rng.integers(2, 4)
    x_max = float(rng.uniform(0.5, 2.0))
    states = StateGrid(np.concatenate(([0.0], np.sort(rng.uniform(0.05, x_max, nS - 1)))))
    a_max = float(rng.uniform(0.3, 1.5))
    actions = ActionGrid(np.concatenate(([0.0], np.sort(rng.uniform(0.05, a_max, nA - 1)))))
    P = rng.dirichlet(np.ones(nS) * rng.uniform(0.3, 3.0), size=(nA, nS))
    delta = float(rng.uniform(0.6, 0.98))
    return states, actions, TransitionKernel(P), delta


def test_uniform_grids_defaults():
    states = uniform_state_grid()
    actions = uniform_action_grid()
    assert len(states) == 121 and len(actions) == 101
    assert states.values[0] == 0.0 and states.values[-1] == pytest.approx(2.4)
    assert actions.values[0] == 0.0 and actions.values[-1] == pytest.approx(1.28)
    assert_allclose(np.diff(states.values), 0.02, rtol=0, atol=1e-12)
    # midpoint edges: first at 0, last absorbing
    assert states.edges[0] == 0.0 and np.isinf(states.edges[-1])
    assert states.edges[1] == pytest.approx(0.01)


def test_bin_of_midpoint_convention():
    states = uniform_state_grid(6, 1.0)  # values 0, 0.2, ..., 1.0
    assert states.bin_of(0.0) == 0
    assert states.bin_of(0.09) == 0
    assert states.bin_of(0.11) == 1
    assert states.bin_of(0.95) == 5
    assert states.bin_of(7.3) == 5  # absorbing top
    with pytest.raises(ValueError):
        states.bin_of(-0.1)


def test_grid_validation():
    with pytest.raises(ConfigError):
        StateGrid(np.array([0.1, 0.2, 0.3]))  # must start at 0
    with pytest.raises(ConfigError):
        StateGrid(np.array([0.0, 0.2, 0.2]))  # strictly increasing
    with pytest.raises(ConfigError):
        ActionGrid(np.array([0.1, 0.2]))  # must contain 0


def test_kernel_rows_match_quadrature_oracle():
    m1, m2, truth = reference_trio()
    states = uniform_state_grid(41, 2.4)
    for model in (m1, m2, truth):
        for esc in (0.1, 0.45, 0.9, 1.3):
            got = kernel_row(model, esc, states)
            want = lognormal_row_oracle(model, esc, states)
            assert_allclose(got, want, atol=1e-6)


def test_kernel_row_zero_growth_point_mass():
    # logistic with small K: large escapement drives expected growth to 0
    model = StochasticModel(GrowthCurve("gordon_schaefer", r=1.0, K=0.4), 0.05)
    row = kernel_row(model, 1.2, uniform_state_grid(31, 2.4))
    assert row[0] == 1.0 and np.all(row[1:] == 0.0)


def test_kernel_row_sigma_zero_point_mass():
    model = StochasticModel(GrowthCurve("gordon_schaefer", r=0.5, K=1.0), 0.0)
    states = uniform_state_grid(31, 2.4)
    row = kernel_row(model, 0.5, states)
    j = states.bin_of(growth(model.curve, 0.5))
    assert row[j] == 1.0 and row.sum() == 1.0


@given(esc=st.floats(0.0, 2.0))
@settings(max_examples=40, deadline=None)
def test_kernel_rows_are_distributions(esc):
    _, _, truth = reference_trio()
    row = kernel_row(truth, esc, uniform_state_grid(31, 2.4))
    assert np.all(row >= 0)
    assert row.sum() == pytest.approx(1.0, abs=1e-12)


def test_discretize_kernel_shape_and_consistency():
    _, _, truth = reference_trio()
    states = uniform_state_grid(31, 2.4)
    actions = uniform_action_grid(11, 1.28)
    K = discretize_kernel(truth, states, actions)
    assert K.probabilities.shape == (11, 31, 31)
    # each (action, state) row equals the single-row routine on the escapement
    for ia in (0, 4, 10):
        for i in (0, 7, 30):
            esc = max(states.values[i] - actions.values[ia], 0.0)
            assert_allclose(
                K.probabilities[ia, i], kernel_row(truth, esc, states), atol=0, rtol=0
            )


def test_kernel_validation():
    bad = np.full((2, 3, 3), 1.0 / 3.0)
    bad[0, 0, 0] = 0.9  # row sum off
    with pytest.raises(NumericalError):
        TransitionKernel(bad)
    with pytest.raises(ConfigError):
        TransitionKernel(np.ones((2, 3)))


def test_value_iteration_matches_policy_enumeration():
    rng = np.random.default_rng(1234)
    reward_price = 1.0
    for _ in range(N_RANDOM_MDPS):
        states, actions, kernel, delta = random_small_mdp(rng)
        spec = RewardSpec(price=reward_price, delta=delta)
        vf, pol = value_iterate(kernel, spec, states, actions, tol=1e-12)
        R = reward_matrix(spec, states, actions)
        best = enumerate_optimal_values(kernel.probabilities, R, delta)
        assert_allclose(vf.values, best, atol=ENUM_TOL)
        # returned policy must attain the optimum exactly
        idx = np.arange(len(states))
        P = kernel.probabilities
        v_pol = np.linalg.solve(
            np.eye(len(states)) - delta * P[pol.actions, idx], R[pol.actions, idx]
        )
        assert_allclose(v_pol, best, atol=ENUM_TOL)


def test_plain_iteration_residuals_decrease():
    _, _, truth = reference_trio()
    states = uniform_state_grid(41, 2.4)
    actions = uniform_action_grid(21, 1.28)
    kernel = discretize_kernel(truth, states, actions)
    vf, _ = value_iterate(
        kernel, RewardSpec(delta=0.95), states, actions, accelerate=False
    )
    hist = np.array(vf.residual_history)
    assert vf.converged
    # plain value iteration residuals are monotone for a contraction
    assert np.all(np.diff(hist) <= 1e-12)


def test_accelerated_equals_plain():
    _, _, truth = reference_trio()
    states = uniform_state_grid(41, 2.4)
    actions = uniform_action_grid(21, 1.28)
    kernel = discretize_kernel(truth, states, actions)
    spec = RewardSpec(delta=0.95)
    vf_a, pol_a = value_iterate(kernel, spec, states, actions, tol=1e-10)
    vf_p, pol_p = value_iterate(kernel, spec, states, actions, tol=1e-10, accelerate=False)
    assert np.array_equal(pol_a.actions, pol_p.actions)
    assert_allclose(vf_a.values, vf_p.values, atol=1e-7)
    assert vf_a.iterations < vf_p.iterations


def test_residual_certificate_is_true_bellman_gap():
    _, _, truth = reference_trio()
    states = uniform_state_grid(31, 2.4)
    actions = uniform_action_grid(11, 1.28)
    kernel = discretize_kernel(truth, states, actions)
    spec = RewardSpec(delta=0.9)
    vf, _ = value_iterate(kernel, spec, states, actions, tol=1e-9)
    R = reward_matrix(spec, states, actions)
    P2 = kernel.probabilities.reshape(-1, len(states))
    Q = R + spec.delta * (P2 @ vf.values).reshape(len(actions), len(states))
    assert vf.residual == pytest.approx(np.max(np.abs(Q.max(axis=0) - vf.values)), abs=1e-15)
    assert vf.residual < 1e-9


def test_reward_scaling_invariance():
    _, _, truth = reference_trio()
    states = uniform_state_grid(31, 2.4)
    actions = uniform_action_grid(11, 1.28)
    kernel = discretize_kernel(truth, states, actions)
    vf1, pol1 = value_iterate(kernel, RewardSpec(price=1.0, delta=0.95), states, actions)
    vf2, pol2 = value_iterate(kernel, RewardSpec(price=2.0, delta=0.95), states, actions)
    assert np.array_equal(pol1.actions, pol2.actions)
    assert_allclose(vf2.values, 2.0 * vf1.values, rtol=1e-9)


def test_finite_horizon_matches_backward_induction():
    _, _, truth = reference_trio()
    states = uniform_state_grid(21, 2.4)
    actions = uniform_action_grid(7, 1.28)
    kernel = discretize_kernel(truth, states, actions)
    spec = RewardSpec(delta=1.0)
    vf, pol = value_iterate(kernel, spec, states, actions, horizon=3)
    # independent backward induction: three sweeps from zero, then the
    # greedy first action against the remaining-horizon value
    R = reward_matrix(spec, states, actions)
    P2 = kernel.probabilities.reshape(-1, len(states))
    V = np.zeros(len(states))
    for _ in range(3):
        V = (R + spec.delta * (P2 @ V).reshape(len(actions), -1)).max(axis=0)
    Q = R + spec.delta * (P2 @ V).reshape(len(actions), -1)
    assert_allclose(vf.values, V, atol=1e-12)
    assert np.array_equal(pol.actions, np.argmax(Q, axis=0))


def test_finite_horizon_values_grow_with_horizon():
    _, _, truth = reference_trio()
    states = uniform_state_grid(21, 2.4)
    actions = uniform_action_grid(7, 1.28)
    kernel = discretize_kernel(truth, states, actions)
    spec = RewardSpec(delta=1.0)
    v3 = value_iterate(kernel, spec, states, actions, horizon=3)[0].values
    v6 = value_iterate(kernel, spec, states, actions, horizon=6)[0].values
    assert np.all(v6 >= v3 - 1e-12)


def test_delta_one_requires_finite_horizon():
    _, _, truth = reference_trio()
    states = uniform_state_grid(11, 2.4)
    actions = uniform_action_grid(5, 1.28)
    kernel = discretize_kernel(truth, states, actions)
    with pytest.raises(ConfigError):
        value_iterate(kernel, RewardSpec(delta=1.0), states, actions)


def test_greedy_ties_break_to_smallest_quota():
    Q = np.array([[1.0, 2.0], [1.0, 3.0], [1.0, 3.0]])
    assert np.array_equal(greedy_policy(Q), [0, 1])


def test_reward_spec_validation():
    with pytest.raises(ConfigError):
        RewardSpec(delta=0.0)
    with pytest.raises(ConfigError):
        RewardSpec(delta=1.0001)
    with pytest.raises(ConfigError):
        RewardSpec(price=-1.0)


def test_reed_logistic_undiscounted_peak():
    curve = GrowthCurve("gordon_schaefer", r=0.8, K=1.2)
    # net growth r*x*(1 - x/K) peaks at K/2
    assert reed_escapement(curve, 1.0) == pytest.approx(0.6, abs=1e-6)


def test_reed_logistic_discounted_closed_form():
    curve = GrowthCurve("gordon_schaefer", r=0.8, K=1.2)
    delta = 0.95
    # growth_slope = 1 + r - 2 r x / K = 1/delta
    expect = curve.K * (1 + curve.r - 1 / delta) / (2 * curve.r)
    assert reed_escapement(curve, delta) == pytest.approx(expect, abs=1e-8)


def test_reed_truth_undiscounted_matches_dense_scan():
    _, _, truth = reference_trio()
    xs = np.linspace(0.0, 1.5 * truth.curve.K, 200001)
    peak = xs[np.argmax(growth(truth.curve, xs) - xs)]
    assert reed_escapement(truth.curve, 1.0) == pytest.approx(peak, abs=1e-4)


def test_reed_discounted_satisfies_marginal_condition():
    _, _, truth = reference_trio()
    s = reed_escapement(truth.curve, 0.99)
    assert growth_slope(truth.curve, s) == pytest.approx(1.0 / 0.99, abs=1e-8)
    assert s < reed_escapement(truth.curve, 1.0)


def test_reed_unreachable_slope_raises():
    # slope at 0 is 1 + r; 1/delta above that has no interior root
    curve = GrowthCurve("gordon_schaefer", r=0.5, K=1.0)
    with pytest.raises(NumericalError):
        reed_escapement(curve, 0.5)


def test_escapement_profile_bang_bang_detection():
    states = uniform_state_grid(11, 1.0)  # spacing 0.1
    actions = ActionGrid(np.linspace(0.0, 0.8, 9))  # spacing 0.1
    # harvest everything above 0.4: quota = x - 0.4 for x > 0.4
    acts = np.array([0, 0, 0, 0, 0, 1, 2, 3, 4, 5, 6])
    prof = escapement_profile(Policy(acts), states, actions)
    assert prof.bang_bang
    assert prof.threshold_index == 5
    assert prof.plateau == pytest.approx(0.4)
    assert not prof.rail_mask[:8].any()


def test_escapement_profile_never_harvesting():
    states = uniform_state_grid(5, 1.0)
    actions = uniform_action_grid(3, 0.5)
    prof = escapement_profile(Policy(np.zeros(5, dtype=int)), states, actions)
    assert prof.threshold_index is None
    assert not prof.bang_bang


def test_escapement_profile_excludes_railed_states():
    states = uniform_state_grid(11, 1.0)
    actions = ActionGrid(np.array([0.0, 0.1, 0.2]))  # rail at 0.2
    # wants escapement 0.3 but the action grid caps the quota at 0.2
    acts = np.array([0, 0, 0, 0, 1, 2, 2, 2, 2, 2, 2])
    prof = escapement_profile(Policy(acts), states, actions)
    assert prof.rail_mask[5:].all()
    assert prof.plateau == pytest.approx(0.3)
    assert prof.bang_bang


def test_policy_csv_rows_contract():
    _, _, truth = reference_trio()
    states = uniform_state_grid(11, 2.4)
    actions = uniform_action_grid(5, 1.28)
    kernel = discretize_kernel(truth, states, actions)
    vf, pol = value_iterate(kernel, RewardSpec(delta=0.95), states, actions)
    rows = policy_csv_rows(pol, vf, states, actions, "truth")
    assert len(rows) == len(states)
    for row in rows:
        assert row["model"] == "truth"
        assert row["quota"] == actions.values[row["action_index"]]
        assert row["escapement"] == pytest.approx(
            max(row["state"] - row["quota"], 0.0)
        )
