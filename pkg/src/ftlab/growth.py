"""Single-species stochastic growth models and parameter-grid ensembles.

A model is a deterministic growth curve plus a multiplicative lognormal
recruitment shock.  Harvesting happens before growth: the quota is removed
first and the survivors reproduce.  The shock carries the mean-one
correction exp(sigma*Z - sigma^2/2) so that sigma widens the spread of
recruitment without moving its expectation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError

FAMILIES = ("gordon_schaefer", "skewed_true", "tabulated")

# Default parameter grid for the 6 x 7 = 42 member logistic ensemble.
R_VALUES = (0.1, 0.2, 0.4, 0.6, 0.8, 1.0)
K_VALUES = (0.4, 0.6, 0.8, 1.0, 1.2, 1.4, 1.6)
K_MAX = max(K_VALUES)

DEFAULT_SIGMA = 0.05


@dataclass(frozen=True)
class GrowthCurve:
    """Deterministic map from escapement to expected next-season biomass."""

    family: str
    r: float = 0.0
    K: float = 1.0
    c: float = 0.0
    label: str = ""
    # tabulated family only: breakpoints and values for linear interpolation
    x_tab: tuple = ()
    y_tab: tuple = ()

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ConfigError(f"unknown growth family {self.family!r}")
        if self.family == "tabulated":
            if len(self.x_tab) != len(self.y_tab) or len(self.x_tab) < 2:
                raise ConfigError("tabulated curve needs matching x/y tables, length >= 2")
            if self.x_tab[0] != 0.0 or self.y_tab[0] != 0.0:
                raise ConfigError("tabulated curve must start at (0, 0)")
            if any(b <= a for a, b in zip(self.x_tab, self.x_tab[1:])):
                raise ConfigError("tabulated x breakpoints must increase")
            if any(y < 0 for y in self.y_tab):
                raise ConfigError("tabulated growth values must be nonnegative")
        else:
            if not (self.K > 0 and self.r > 0):
                raise ConfigError(f"need r > 0 and K > 0, got r={self.r} K={self.K}")
            if self.family == "skewed_true" and not (0 < self.c < self.K):
                raise ConfigError(f"need 0 < c < K, got c={self.c} K={self.K}")


def growth(curve: GrowthCurve, x):
    """Expected next-season biomass before noise; accepts scalars or arrays.

    gordon_schaefer: x + r*x*(1 - x/K), floored at 0 so very large stocks
    cannot produce negative biomass.  skewed_true: x*exp(r*(1 - x/K)*(x - c)/K),
    a curve with depressed growth below c and a peak displaced from K/2.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("negative biomass")
    if curve.family == "gordon_schaefer":
        out = np.maximum(0.0, x + curve.r * x * (1.0 - x / curve.K))
    elif curve.family == "skewed_true":
        out = x * np.exp(curve.r * (1.0 - x / curve.K) * (x - curve.c) / curve.K)
    else:
        out = np.interp(x, curve.x_tab, curve.y_tab)
    return out if out.ndim else float(out)


def growth_slope(curve: GrowthCurve, x):
    """Derivative of growth with respect to escapement.

    Analytic for the closed-form families (on the unclamped branch of
    gordon_schaefer); central difference for tabulated curves.
    """
    x = np.asarray(x, dtype=float)
    if curve.family == "gordon_schaefer":
        raw = x + curve.r * x * (1.0 - x / curve.K)
        slope = 1.0 + curve.r - 2.0 * curve.r * x / curve.K
        out = np.where(raw > 0, slope, 0.0)
    elif curve.family == "skewed_true":
        q = curve.r * (1.0 - x / curve.K) * (x - curve.c) / curve.K
        dq = curve.r * (curve.K + curve.c - 2.0 * x) / curve.K**2
        out = np.exp(q) * (1.0 + x * dq)
    else:
        h = 1e-6
        lo = np.maximum(x - h, 0.0)
        out = (growth(curve, x + h) - growth(curve, lo)) / (x + h - lo)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class StochasticModel:
    """A growth curve with a lognormal recruitment shock of log-sd sigma."""

    curve: GrowthCurve
    sigma: float = DEFAULT_SIGMA

    def __post_init__(self):
        if self.sigma < 0:
            raise ConfigError(f"sigma must be >= 0, got {self.sigma}")

    @property
    def label(self) -> str:
        return self.curve.label


def step(model: StochasticModel, x: float, quota: float, rng: np.random.Generator):
    """Advance one season: harvest up to the quota, then grow with noise.

    Returns (next_x, realized_harvest).  The harvest realizes min(quota, x);
    recruitment applies to the escapement.  sigma = 0 is exactly deterministic.
    """
    if x < 0 or quota < 0:
        raise ValueError("negative biomass or quota")
    harvest = min(quota, x)
    g = growth(model.curve, x - harvest)
    if model.sigma == 0.0:
        return g, harvest
    z = rng.standard_normal()
    return g * np.exp(model.sigma * z - model.sigma**2 / 2.0), harvest


@dataclass(frozen=True)
class ModelEnsemble:
    """Ordered collection of candidate models with distinct labels."""

    members: tuple

    def __post_init__(self):
        if not self.members:
            raise ConfigError("ensemble must be nonempty")
        labels = [m.label for m in self.members]
        if len(set(labels)) != len(labels):
            raise ConfigError("ensemble labels must be pairwise distinct")

    def __len__(self):
        return len(self.members)

    @property
    def labels(self):
        return tuple(m.label for m in self.members)

    def index_of(self, label: str) -> int:
        return self.labels.index(label)


def gordon_schaefer_ensemble(r_values, K_values, sigma: float = DEFAULT_SIGMA) -> ModelEnsemble:
    """One logistic member per (r, K) pair, row-major over r then K."""
    if not r_values or not K_values:
        raise ConfigError("parameter lists must be nonempty")
    pairs = [(float(r), float(K)) for r in r_values for K in K_values]
    if len(set(pairs)) != len(pairs):
        raise ConfigError("duplicate (r, K) pairs in ensemble request")
    members = []
    for r, K in pairs:
        curve = GrowthCurve("gordon_schaefer", r=r, K=K, label=f"gs_r{r}_K{K}")
        members.append(StochasticModel(curve, sigma))
    return ModelEnsemble(tuple(members))


# Reference configuration used throughout the default experiments.  The truth
# is a skewed curve; the two logistic candidates were fit by grid search over
# the 42-member ensemble (scripts/fit_reference_models.py): model2 minimizes
# sup-norm distance to the truth curve on [0, 1.2*K], model1 has the largest r
# among members whose net-growth peak lands within one state cell of the
# truth's peak.  Model1 is the worse curve approximation but the better proxy
# for the stock size that maximizes net growth.
TRUTH_PARAMS = dict(r=1.2, K=1.0, c=0.25)
MODEL1_PARAMS = dict(r=1.0, K=1.4)
MODEL2_PARAMS = dict(r=0.6, K=1.0)


def reference_trio(sigma: float = DEFAULT_SIGMA):
    """Return (model1, model2, truth) for the default experiments."""
    m1 = StochasticModel(
        GrowthCurve("gordon_schaefer", label="model1", **MODEL1_PARAMS), sigma
    )
    m2 = StochasticModel(
        GrowthCurve("gordon_schaefer", label="model2", **MODEL2_PARAMS), sigma
    )
    truth = StochasticModel(
        GrowthCurve("skewed_true", label="truth", **TRUTH_PARAMS), sigma
    )
    return m1, m2, truth


def default_grid_ensemble(sigma: float = DEFAULT_SIGMA) -> ModelEnsemble:
    """The 42-member logistic grid over R_VALUES x K_VALUES."""
    return gordon_schaefer_ensemble(R_VALUES, K_VALUES, sigma)
