"""Belief updating over model ensembles, re-planning, and value of information.

Each season the manager plans against the belief-weighted mixture of member
transition kernels (certainty-equivalent planning), acts, observes, and in
learning mode applies a Bayes update to the belief from the members'
one-step-ahead likelihoods.  Planning mode freezes the belief at the prior,
so the policy is solved once.  The value of information is the mean
discounted return difference between the two modes under common random
numbers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .growth import ModelEnsemble, StochasticModel, step
from .mdp import (
    ActionGrid,
    Policy,
    RewardSpec,
    StateGrid,
    TransitionKernel,
    discretize_kernel,
    value_iterate,
)

ADAPTIVE_MODES = ("learning", "planning")


@dataclass(frozen=True, eq=False)
class Belief:
    """Simplex weights over ensemble members."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "weights", w)
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
            raise ConfigError("belief weights must be nonnegative and sum to 1 within 1e-12")

    def top(self, ensemble: ModelEnsemble):
        i = int(np.argmax(self.weights))
        return ensemble.labels[i], float(self.weights[i])


def member_kernels(
    ensemble: ModelEnsemble, states: StateGrid, actions: ActionGrid
) -> np.ndarray:
    """Stacked member transition tensors, shape (members, actions, states, states)."""
    return np.stack(
        [discretize_kernel(m, states, actions).probabilities for m in ensemble.members]
    )


def update_belief(
    belief: Belief,
    ensemble: ModelEnsemble,
    x_prev: float,
    quota: float,
    x_obs: float,
    states: StateGrid,
    actions: ActionGrid | None = None,
    stacked: np.ndarray | None = None,
):
    """Bayes update from each member's one-step forecast probability of x_obs.

    Weights multiply likelihoods in log space and renormalize, so tiny
    posteriors underflow gracefully instead of poisoning the simplex.  If
    every member assigns probability zero to the observation the prior is
    returned unchanged with degenerate=True.  Returns (belief, degenerate).
    """
    from .scoring import one_step_forecast

    if stacked is not None:
        if actions is None:
            raise ConfigError("stacked kernels require the action grid")
        ia = int(np.argmin(np.abs(actions.values - quota)))
        lik = stacked[:, ia, states.bin_of(x_prev), states.bin_of(x_obs)]
    else:
        j = states.bin_of(x_obs)
        lik = np.array(
            [
                one_step_forecast(m, x_prev, quota, states).probabilities[j]
                for m in ensemble.members
            ]
        )
    pos = (belief.weights > 0) & (lik > 0)
    if not np.any(pos):
        return belief, True
    logpost = np.full(len(lik), -np.inf)
    logpost[pos] = np.log(belief.weights[pos]) + np.log(lik[pos])
    logpost -= logpost[pos].max()
    post = np.exp(logpost)
    post /= post.sum()
    return Belief(post), False


def mixture_kernel(
    ensemble: ModelEnsemble,
    belief: Belief,
    states: StateGrid,
    actions: ActionGrid,
    stacked: np.ndarray | None = None,
) -> TransitionKernel:
    """Belief-weighted convex combination of member kernels."""
    if len(belief.weights) != len(ensemble):
        raise ConfigError("belief size does not match ensemble size")
    if stacked is None:
        stacked = member_kernels(ensemble, states, actions)
    flat = stacked.reshape(len(ensemble), -1)
    mix = (belief.weights @ flat).reshape(stacked.shape[1:])
    # tiny negative dust from the matmul is impossible (nonneg inputs); row
    # sums hold to 1e-15 because each member row sums to 1
    return TransitionKernel(mix)


def plan_with_belief(
    ensemble: ModelEnsemble,
    belief: Belief,
    reward: RewardSpec,
    states: StateGrid,
    actions: ActionGrid,
    stacked: np.ndarray | None = None,
    v0: np.ndarray | None = None,
):
    """Solve the mixture-kernel control problem; returns (ValueFunction, Policy)."""
    mix = mixture_kernel(ensemble, belief, states, actions, stacked=stacked)
    return value_iterate(mix, reward, states, actions, v0=v0)


@dataclass(frozen=True, eq=False)
class AdaptiveRun:
    """Season-by-season record of one adaptive-management trajectory."""

    mode: str
    replicate: int
    state: np.ndarray
    quota: np.ndarray
    harvest: np.ndarray
    reward: np.ndarray
    beliefs: np.ndarray
    likelihoods: np.ndarray
    npv: float
    degenerate_events: int


def run_adaptive(
    truth: StochasticModel,
    ensemble: ModelEnsemble,
    prior: Belief,
    mode: str,
    horizon: int,
    reward: RewardSpec,
    seed,
    states: StateGrid,
    actions: ActionGrid,
    stacked: np.ndarray | None = None,
    replicate: int = 0,
    x0: float | None = None,
    planning_policy: Policy | None = None,
) -> AdaptiveRun:
    """One adaptive-management trajectory under truth dynamics.

    Each season the current belief's mixture policy sets the quota, truth
    advances the stock, and in learning mode the belief is updated from the
    members' likelihoods before the next season's re-plan.  Re-planning is
    skipped when the belief did not move at all (bitwise), which becomes the
    common case once the posterior has concentrated.
    """
    if mode not in ADAPTIVE_MODES:
        raise ConfigError(f"mode must be one of {ADAPTIVE_MODES}")
    if horizon < 1:
        raise ConfigError("horizon must be >= 1")
    if stacked is None:
        stacked = member_kernels(ensemble, states, actions)
    if x0 is None:
        x0 = truth.curve.K
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), int(replicate)]))

    belief = prior
    if mode == "planning" and planning_policy is not None:
        pol = planning_policy
        vf = None
    else:
        vf, pol = plan_with_belief(ensemble, belief, reward, states, actions, stacked=stacked)

    n = len(ensemble)
    st = np.empty(horizon)
    qt = np.empty(horizon)
    hv = np.empty(horizon)
    rw = np.empty(horizon)
    bel = np.empty((horizon, n))
    lik = np.empty((horizon, n))
    degenerate = 0
    x = float(x0)
    npv = 0.0
    last_solved = belief.weights
    for t in range(horizon):
        i = states.bin_of(x)
        ia = int(pol.actions[i])
        quota = float(actions.values[ia])
        x_next, harvest = step(truth, x, quota, rng)
        r = reward.price * harvest
        npv += (reward.delta**t) * r
        j = states.bin_of(x_next)
        lik[t] = stacked[:, ia, i, j]
        st[t], qt[t], hv[t], rw[t] = x, quota, harvest, r
        if mode == "learning":
            belief, degen = update_belief(
                belief, ensemble, x, quota, x_next, states, actions, stacked=stacked
            )
            degenerate += int(degen)
            bel[t] = belief.weights
            if not np.array_equal(belief.weights, last_solved):
                warm = vf.values if vf is not None else None
                vf, pol = plan_with_belief(
                    ensemble, belief, reward, states, actions, stacked=stacked, v0=warm
                )
                last_solved = belief.weights
        else:
            bel[t] = belief.weights
        x = x_next
    return AdaptiveRun(mode, replicate, st, qt, hv, rw, bel, lik, float(npv), degenerate)


def value_of_information(
    truth: StochasticModel,
    ensemble: ModelEnsemble,
    prior: Belief,
    reps: int,
    horizon: int,
    reward: RewardSpec,
    seed,
    states: StateGrid,
    actions: ActionGrid,
    stacked: np.ndarray | None = None,
    n_boot: int = 2000,
):
    """Learning-minus-planning return difference under common random numbers.

    Replicate pairs share a shock stream keyed by (seed, replicate), so the
    difference isolates the effect of belief updating.  Returns a dict with
    the VOI, its value relative to the planning baseline, a paired bootstrap
    95% interval, and both runs per replicate.
    """
    if reps < 2:
        raise ConfigError("need reps >= 2 for a bootstrap interval")
    if stacked is None:
        stacked = member_kernels(ensemble, states, actions)
    # prior never changes in planning mode, so its policy is shared across reps
    _, plan_pol = plan_with_belief(ensemble, prior, reward, states, actions, stacked=stacked)
    learn_runs = []
    plan_runs = []
    for rep in range(reps):
        learn_runs.append(
            run_adaptive(
                truth, ensemble, prior, "learning", horizon, reward, seed, states,
                actions, stacked=stacked, replicate=rep,
            )
        )
        plan_runs.append(
            run_adaptive(
                truth, ensemble, prior, "planning", horizon, reward, seed, states,
                actions, stacked=stacked, replicate=rep, planning_policy=plan_pol,
            )
        )
    learn_npv = np.array([r.npv for r in learn_runs])
    plan_npv = np.array([r.npv for r in plan_runs])
    diffs = learn_npv - plan_npv
    voi = float(np.mean(diffs))
    base = float(np.mean(plan_npv))
    boot_rng = np.random.default_rng(np.random.SeedSequence([int(seed), 0xB007]))
    means = np.empty(n_boot)
    for b in range(n_boot):
        means[b] = np.mean(boot_rng.choice(diffs, size=len(diffs), replace=True))
    lo, hi = np.percentile(means, [2.5, 97.5])
    return {
        "voi": voi,
        "relative_voi": voi / base if base != 0 else float("nan"),
        "ci_low": float(lo),
        "ci_high": float(hi),
        "reps": int(reps),
        "horizon": int(horizon),
        "learning_runs": learn_runs,
        "planning_runs": plan_runs,
    }
