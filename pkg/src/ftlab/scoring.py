"""One-step-ahead probabilistic forecasts and strictly proper log scoring.

A forecast is exactly a transition-kernel row: the probability vector over
next-season cells given the current cell and the quota.  The log score is the
log forecast probability of the cell containing the realized observation; it
is strictly proper, so in expectation no model can outscore the process that
generated the data.  Zero-probability observations score -inf and are counted
rather than clamped, since clamping would quietly distort model comparisons.
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
    kernel_row,
    value_iterate,
)

POLICY_MODES = ("unfished", "managed")


@dataclass(frozen=True, eq=False)
class Forecast:
    """Probability vector over state cells with central 95% interval endpoints."""

    probabilities: np.ndarray
    lo95: float
    hi95: float

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=float)
        object.__setattr__(self, "probabilities", p)
        if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-10:
            raise ConfigError("forecast must be a probability vector")

    def mean(self, states: StateGrid) -> float:
        return float(self.probabilities @ states.values)

    def quantile(self, states: StateGrid, q: float) -> float:
        cdf = np.cumsum(self.probabilities)
        j = int(np.searchsorted(cdf, q, side="left"))
        return float(states.values[min(j, len(states.values) - 1)])


def _interval(p: np.ndarray, states: StateGrid):
    cdf = np.cumsum(p)
    lo = states.values[min(int(np.searchsorted(cdf, 0.025, side="left")), len(p) - 1)]
    hi = states.values[min(int(np.searchsorted(cdf, 0.975, side="left")), len(p) - 1)]
    return float(lo), float(hi)


def one_step_forecast(
    model: StochasticModel, x: float, quota: float, states: StateGrid
) -> Forecast:
    """Forecast of next-season biomass given a quota, from the snapped state.

    The current stock is snapped to its containing cell so the forecast
    matches the corresponding kernel row bit for bit when the quota lies on
    the action grid.
    """
    if x < 0 or quota < 0:
        raise ValueError("negative biomass or quota")
    x_cell = states.values[states.bin_of(x)]
    esc = max(x_cell - quota, 0.0)
    p = kernel_row(model, esc, states)
    lo, hi = _interval(p, states)
    return Forecast(p, lo, hi)


def log_score(forecast: Forecast, observed: float, states: StateGrid):
    """Log forecast probability of the observed cell; higher is better.

    Returns (score, clipped) where clipped flags an observation above the
    grid top that was assigned to the last (absorbing) cell.  A zero forecast
    probability yields -inf, never an exception.
    """
    if observed < 0:
        raise ValueError("negative biomass")
    clipped = observed > states.edges[-2]
    j = states.bin_of(observed)
    p = forecast.probabilities[j]
    if p <= 0.0:
        return float("-inf"), clipped
    return float(np.log(p)), clipped


@dataclass(frozen=True, eq=False)
class ScoreSeries:
    """Per-timestep log scores for one model on one replicate trajectory."""

    scenario: str
    model: str
    replicate: int
    t: np.ndarray
    state: np.ndarray
    action: np.ndarray
    observed_next: np.ndarray
    score: np.ndarray

    @property
    def n_neg_inf(self) -> int:
        return int(np.sum(np.isneginf(self.score)))

    def mean_score(self) -> float:
        """Plain mean; -inf events propagate so they can never hide."""
        return float(np.mean(self.score))


def _replicate_stream(seed: int, mode_id: int, replicate: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, mode_id, replicate]))


def score_campaign(
    candidates: ModelEnsemble,
    truth: StochasticModel,
    policy_mode: str,
    reps: int,
    horizon: int,
    seed: int,
    states: StateGrid,
    actions: ActionGrid,
    reward: RewardSpec | None = None,
    x0: float | None = None,
    kernels: dict | None = None,
):
    """Score every candidate on truth-generated trajectories.

    unfished mode: quota 0 every season, one shared truth trajectory per
    replicate that all candidates score.  managed mode: each candidate's own
    optimal policy sets the quota on its own truth trajectory (candidates
    share shock streams within a replicate), and each candidate scores the
    trajectory its policy produced.  Forecasts are registered before each
    observation arrives; nothing is ever fit to the scored data.
    """
    if policy_mode not in POLICY_MODES:
        raise ConfigError(f"policy_mode must be one of {POLICY_MODES}")
    if reps < 1 or horizon < 1:
        raise ConfigError("reps and horizon must be >= 1")
    if x0 is None:
        x0 = truth.curve.K
    mode_id = POLICY_MODES.index(policy_mode)

    kernels = {} if kernels is None else kernels

    def kernel_for(m: StochasticModel) -> TransitionKernel:
        if m.label not in kernels:
            kernels[m.label] = discretize_kernel(m, states, actions)
        return kernels[m.label]

    policies: dict[str, Policy] = {}
    if policy_mode == "managed":
        if reward is None:
            reward = RewardSpec()
        for m in candidates.members:
            _, policies[m.label] = value_iterate(kernel_for(m), reward, states, actions)

    out: list[ScoreSeries] = []
    for rep in range(reps):
        if policy_mode == "unfished":
            rng = _replicate_stream(seed, mode_id, rep)
            xs = np.empty(horizon + 1)
            xs[0] = x0
            for t in range(horizon):
                xs[t + 1], _ = step(truth, xs[t], 0.0, rng)
            for m in candidates.members:
                K = kernel_for(m).probabilities
                sc = np.empty(horizon)
                ts = np.arange(horizon)
                cells = states.bins_of(xs)
                for t in range(horizon):
                    p = K[0, cells[t], cells[t + 1]]
                    sc[t] = np.log(p) if p > 0 else -np.inf
                out.append(
                    ScoreSeries(
                        "unfished", m.label, rep, ts, xs[:-1].copy(),
                        np.zeros(horizon), xs[1:].copy(), sc,
                    )
                )
        else:
            for m in candidates.members:
                rng = _replicate_stream(seed, mode_id, rep)
                K = kernel_for(m).probabilities
                pol = policies[m.label].actions
                x = x0
                ts = np.arange(horizon)
                st = np.empty(horizon)
                act = np.empty(horizon)
                obs = np.empty(horizon)
                sc = np.empty(horizon)
                for t in range(horizon):
                    i = states.bin_of(x)
                    ia = int(pol[i])
                    quota = float(actions.values[ia])
                    x_next, _ = step(truth, x, quota, rng)
                    p = K[ia, i, states.bin_of(x_next)]
                    st[t], act[t], obs[t] = x, quota, x_next
                    sc[t] = np.log(p) if p > 0 else -np.inf
                    x = x_next
                out.append(ScoreSeries("managed", m.label, rep, ts, st, act, obs, sc))
    return out


def campaign_means(series: list[ScoreSeries]) -> dict:
    """Mean score and -inf count per model label."""
    by_model: dict[str, list] = {}
    for s in series:
        by_model.setdefault(s.model, []).append(s)
    out = {}
    for label, group in by_model.items():
        allscores = np.concatenate([s.score for s in group])
        out[label] = {
            "mean_score": float(np.mean(allscores)),
            "n_neg_inf": int(np.sum(np.isneginf(allscores))),
            "per_replicate_mean": [float(np.mean(s.score)) for s in group],
        }
    return out
