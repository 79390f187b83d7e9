"""Grid discretization and stochastic dynamic programming for harvest control.

The continuous stock is discretized onto a state grid whose cells are bounded
by midpoints between grid values; the top cell absorbs all mass above the
grid.  Quotas live on an action grid.  Transition rows are lognormal CDF
differences across the cell edges.  The solver is value iteration with an
exact policy-evaluation step between sweeps, which cuts iteration counts from
thousands to a handful while certifying convergence with the true Bellman
residual.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.stats import norm

from .errors import ConfigError, NumericalError
from .growth import GrowthCurve, StochasticModel, growth, growth_slope, K_MAX

DEFAULT_STATE_POINTS = 121
DEFAULT_ACTION_POINTS = 101
DEFAULT_STATE_MAX = 1.5 * K_MAX
DEFAULT_ACTION_MAX = 0.8 * K_MAX
DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITER = 100_000


@dataclass(frozen=True, eq=False)
class StateGrid:
    """Strictly increasing biomass levels starting at 0, with midpoint edges."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", v)
        if v.ndim != 1 or len(v) < 3:
            raise ConfigError("state grid needs at least 3 points")
        if v[0] != 0.0:
            raise ConfigError("state grid must start at 0")
        if np.any(np.diff(v) <= 0):
            raise ConfigError("state grid must strictly increase")
        edges = np.concatenate(([0.0], 0.5 * (v[1:] + v[:-1]), [np.inf]))
        object.__setattr__(self, "edges", edges)

    def __len__(self):
        return len(self.values)

    def bin_of(self, x: float) -> int:
        """Index of the cell containing x; mass above the top edge goes to the last cell."""
        if x < 0:
            raise ValueError("negative biomass")
        return int(np.clip(np.searchsorted(self.edges, x, side="right") - 1, 0, len(self.values) - 1))

    def bins_of(self, xs) -> np.ndarray:
        xs = np.asarray(xs, dtype=float)
        if np.any(xs < 0):
            raise ValueError("negative biomass")
        return np.clip(np.searchsorted(self.edges, xs, side="right") - 1, 0, len(self.values) - 1)


@dataclass(frozen=True, eq=False)
class ActionGrid:
    """Sorted nonnegative quota levels; must contain 0."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", v)
        if v.ndim != 1 or len(v) < 1:
            raise ConfigError("action grid needs at least 1 point")
        if v[0] != 0.0:
            raise ConfigError("action grid must contain 0 as its first value")
        if np.any(np.diff(v) <= 0):
            raise ConfigError("action grid must strictly increase")

    def __len__(self):
        return len(self.values)


def uniform_state_grid(n: int = DEFAULT_STATE_POINTS, x_max: float = DEFAULT_STATE_MAX) -> StateGrid:
    return StateGrid(np.linspace(0.0, x_max, n))


def uniform_action_grid(n: int = DEFAULT_ACTION_POINTS, a_max: float = DEFAULT_ACTION_MAX) -> ActionGrid:
    return ActionGrid(np.linspace(0.0, a_max, n))


@dataclass(frozen=True, eq=False)
class TransitionKernel:
    """P[next | state, action] as a tensor indexed [action, state, next]."""

    probabilities: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=float)
        object.__setattr__(self, "probabilities", p)
        if p.ndim != 3 or p.shape[1] != p.shape[2]:
            raise ConfigError("kernel must have shape (actions, states, states)")
        if np.any(p < 0):
            raise NumericalError("kernel has negative entries")
        rowsum = p.sum(axis=2)
        if np.max(np.abs(rowsum - 1.0)) > 1e-10:
            raise NumericalError("kernel rows must sum to 1 within 1e-10")


def _rows_for_escapement(model: StochasticModel, escapement: np.ndarray, states: StateGrid) -> np.ndarray:
    """Transition rows for a vector of escapements; the single shared row routine.

    Zero expected growth sends all mass to state 0.  sigma = 0 puts a point
    mass on the cell containing the deterministic recruitment.  Otherwise each
    row is the lognormal CDF differenced across the cell edges, renormalized.
    """
    s = np.asarray(escapement, dtype=float)
    g = np.asarray(growth(model.curve, s), dtype=float)
    if not np.all(np.isfinite(g)):
        bad = int(np.flatnonzero(~np.isfinite(g))[0])
        raise NumericalError(f"non-finite expected growth at escapement {s[bad]!r}")
    n = len(states)
    rows = np.zeros((len(g), n))
    pos = g > 0
    rows[~pos, 0] = 1.0
    if not np.any(pos):
        return rows
    if model.sigma == 0.0:
        rows[pos, states.bins_of(g[pos])] = 1.0
        return rows
    # interior log-edges; the 0 and inf edges are pinned to CDF 0 and 1 below
    log_edges = np.log(states.edges[1:-1])
    mu = np.log(g[pos]) - model.sigma**2 / 2.0
    z = (log_edges[None, :] - mu[:, None]) / model.sigma
    cdf = np.empty((len(mu), n + 1))
    cdf[:, 1:-1] = norm.cdf(z)
    cdf[:, 0] = 0.0
    cdf[:, -1] = 1.0
    r = np.diff(cdf, axis=1)
    rows[pos] = r / r.sum(axis=1, keepdims=True)
    return rows


def kernel_row(model: StochasticModel, escapement: float, states: StateGrid) -> np.ndarray:
    """Single transition row for one escapement level."""
    return _rows_for_escapement(model, np.array([escapement]), states)[0]


def discretize_kernel(model: StochasticModel, states: StateGrid, actions: ActionGrid) -> TransitionKernel:
    """Transition tensor over (action, state) with harvest-before-growth timing."""
    nA, nS = len(actions), len(states)
    P = np.empty((nA, nS, nS))
    for ia, a in enumerate(actions.values):
        esc = np.maximum(states.values - a, 0.0)
        try:
            P[ia] = _rows_for_escapement(model, esc, states)
        except NumericalError as e:
            raise NumericalError(f"kernel row failed at action {a!r}: {e}") from e
    return TransitionKernel(P)


@dataclass(frozen=True)
class RewardSpec:
    """Linear harvest reward price*min(quota, stock) discounted by delta per season."""

    price: float = 1.0
    delta: float = 0.99

    def __post_init__(self):
        if self.price < 0:
            raise ConfigError(f"price must be >= 0, got {self.price}")
        if not (0.0 < self.delta <= 1.0):
            raise ConfigError(f"delta must be in (0, 1], got {self.delta}")


@dataclass(frozen=True, eq=False)
class Policy:
    """Per-state index into the action grid."""

    actions: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "actions", np.asarray(self.actions, dtype=int))


@dataclass(frozen=True, eq=False)
class ValueFunction:
    """Per-state expected discounted value plus solver diagnostics."""

    values: np.ndarray
    residual: float
    iterations: int
    converged: bool
    residual_history: tuple = ()


def reward_matrix(reward: RewardSpec, states: StateGrid, actions: ActionGrid) -> np.ndarray:
    return reward.price * np.minimum(actions.values[:, None], states.values[None, :])


def greedy_policy(Q: np.ndarray) -> np.ndarray:
    """Argmax over actions per state; np.argmax takes the first maximal index,
    which is the smallest quota, so ties break conservatively."""
    return np.argmax(Q, axis=0)


def value_iterate(
    kernel: TransitionKernel,
    reward: RewardSpec,
    states: StateGrid,
    actions: ActionGrid,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    horizon: int | None = None,
    v0: np.ndarray | None = None,
    accelerate: bool = True,
):
    """Solve for the optimal stationary policy; returns (ValueFunction, Policy).

    Infinite-horizon mode (horizon=None) requires delta < 1 and iterates until
    the Bellman residual sup-norm drops below tol or max_iter is hit; the
    accelerated path interleaves an exact linear-solve evaluation of the
    current greedy policy between sweeps.  With a finite horizon the function
    runs exactly `horizon` backward sweeps from v0 (or zeros), which is the
    only mode where delta = 1 is meaningful.
    """
    P = kernel.probabilities
    nA, nS = P.shape[0], P.shape[1]
    if len(states) != nS or len(actions) != nA:
        raise ConfigError("kernel shape does not match grids")
    R = reward_matrix(reward, states, actions)
    P2 = P.reshape(nA * nS, nS)
    V = np.zeros(nS) if v0 is None else np.array(v0, dtype=float)

    def bellman(V):
        return R + reward.delta * (P2 @ V).reshape(nA, nS)

    if horizon is not None:
        if horizon < 1:
            raise ConfigError("horizon must be >= 1")
        for _ in range(horizon):
            V = bellman(V).max(axis=0)
        Q = bellman(V)
        pol = greedy_policy(Q)
        resid = float(np.max(np.abs(Q.max(axis=0) - V)))
        return ValueFunction(V, resid, horizon, True), Policy(pol)

    if reward.delta >= 1.0:
        raise ConfigError("delta = 1 requires a finite horizon")

    idx = np.arange(nS)
    history = []
    converged = False
    it = 0
    while it < max_iter:
        Q = bellman(V)
        Vn = Q.max(axis=0)
        resid = float(np.max(np.abs(Vn - V)))
        history.append(resid)
        it += 1
        if resid < tol:
            V = Vn
            converged = True
            break
        if accelerate:
            pol = greedy_policy(Q)
            # exact value of the greedy policy: (I - delta*P_pi) V = R_pi
            V = np.linalg.solve(np.eye(nS) - reward.delta * P[pol, idx], R[pol, idx])
        else:
            V = Vn
    Q = bellman(V)
    pol = greedy_policy(Q)
    final_resid = float(np.max(np.abs(Q.max(axis=0) - V)))
    vf = ValueFunction(V, final_resid, it, converged, tuple(history))
    return vf, Policy(pol)


@dataclass(frozen=True, eq=False)
class EscapementProfile:
    """Escapement per state plus the constant-escapement diagnostic.

    threshold_index is one past the last zero-quota state; None when the
    policy never harvests.  States whose quota sits at the top of the action
    grid cannot express the target escapement and are excluded from the
    constancy check (rail_mask marks them).  bang_bang is True when every
    non-railed escapement above the threshold lies within one state cell.
    """

    escapement: np.ndarray
    threshold_index: int | None
    bang_bang: bool
    plateau: float
    rail_mask: np.ndarray


def escapement_profile(policy: Policy, states: StateGrid, actions: ActionGrid) -> EscapementProfile:
    quotas = actions.values[policy.actions]
    esc = np.maximum(states.values - quotas, 0.0)
    positive = np.flatnonzero(policy.actions > 0)
    rail = policy.actions == (len(actions) - 1)
    if len(positive) == 0:
        return EscapementProfile(esc, None, False, float("nan"), rail)
    zeros = np.flatnonzero(policy.actions == 0)
    thr = int(zeros[-1]) + 1 if len(zeros) else 0
    if thr >= len(states):
        return EscapementProfile(esc, None, False, float("nan"), rail)
    cell = float(np.max(np.diff(states.values)))
    region = np.arange(thr, len(states))
    keep = region[~rail[region]]
    if len(keep) == 0:
        return EscapementProfile(esc, thr, False, float("nan"), rail)
    spread = float(esc[keep].max() - esc[keep].min())
    plateau = float(np.median(esc[keep]))
    return EscapementProfile(esc, thr, spread <= cell, plateau, rail)


def _golden_max(f, lo: float, hi: float, tol: float = 1e-8) -> float:
    """Golden-section maximizer on [lo, hi]; assumes unimodality inside."""
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def reed_escapement(curve: GrowthCurve, delta: float) -> float:
    """Analytic constant-escapement target for a given discount.

    delta = 1: the stock size maximizing net growth, located by a dense scan
    (so curves with a low-biomass dip cannot mislead the search) refined by
    golden-section to 1e-8.  delta < 1: the root of growth_slope(x) = 1/delta
    on the branch where the slope falls through that level just left of the
    undiscounted optimum; found by bisection.  The discounted target sits
    below the undiscounted one and converges to it as delta -> 1.
    """
    if not (0.0 < delta <= 1.0):
        raise ConfigError(f"delta must be in (0, 1], got {delta}")
    hi = 1.5 * curve.K
    xs = np.linspace(0.0, hi, 20001)
    net = np.asarray(growth(curve, xs)) - xs
    k = int(np.argmax(net))
    lo_b = xs[max(k - 1, 0)]
    hi_b = xs[min(k + 1, len(xs) - 1)]
    peak = _golden_max(lambda x: growth(curve, x) - x, lo_b, hi_b)
    if delta == 1.0:
        return float(peak)
    target = 1.0 / delta

    def h(x):
        return growth_slope(curve, x) - target

    # walk left from the undiscounted peak until the slope exceeds 1/delta
    step_w = peak / 200.0 if peak > 0 else 1e-3
    x_hi = peak
    x_lo = peak - step_w
    while x_lo > 0 and h(x_lo) < 0:
        x_hi = x_lo
        x_lo -= step_w
    x_lo = max(x_lo, 0.0)
    if h(x_lo) < 0 or h(x_hi) > 0:
        raise NumericalError(
            f"no sign change for slope = 1/delta in bracket [{x_lo}, {x_hi}]"
        )
    for _ in range(200):
        mid = 0.5 * (x_lo + x_hi)
        if h(mid) >= 0:
            x_lo = mid
        else:
            x_hi = mid
        if x_hi - x_lo < 1e-12:
            break
    return float(0.5 * (x_lo + x_hi))


def policy_csv_rows(
    policy: Policy,
    vf: ValueFunction,
    states: StateGrid,
    actions: ActionGrid,
    label: str,
):
    """Rows of the policy/value serialization: indices plus values."""
    prof = escapement_profile(policy, states, actions)
    rows = []
    for i, x in enumerate(states.values):
        ia = int(policy.actions[i])
        rows.append(
            {
                "model": label,
                "state_index": i,
                "state": float(x),
                "action_index": ia,
                "quota": float(actions.values[ia]),
                "escapement": float(prof.escapement[i]),
                "value": float(vf.values[i]),
            }
        )
    return rows
