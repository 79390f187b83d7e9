"""Configuration-driven experiment runner and result-directory tooling.

A TOML config names one scenario (or "all"), a master seed, and optional
overrides for models, grids, reward, adaptive settings, and the multispecies
defaults.  Each scenario writes its CSVs, a summary JSON of headline
statistics, and a manifest with per-file checksums into its own subdirectory
of the output directory, so running "all" produces byte-for-byte the same
files as running the five scenarios one at a time.

Seed discipline: the scenario seed is the first 8 bytes, big-endian, of
sha256("<master>/<scenario-name>") - a fixed, platform-independent 64-bit
hash.  Modules then derive per-replicate streams from it through
numpy SeedSequence spawns keyed by (scenario seed, mode id, replicate), so
every simulated number is reproducible from the config alone.  The manifest's
wall-clock field is the only output byte that may differ between identical
runs.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
import os
import shutil
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import __version__
from .adaptive import Belief, member_kernels, value_of_information
from .ecosystem import (
    CAND_A_A,
    CAND_A_R,
    CAND_B_A,
    CAND_B_R,
    TRUTH_A,
    TRUTH_R,
    CandidateEcoModel,
    EffortPolicy,
    FoodWeb,
    candidate_forecast,
    evaluate_regime,
    forecast_rmse,
    interior_equilibrium,
    optimize_fixed_effort,
    simulate_truth,
    utility_per_step,
)
from .errors import ConfigError, IntegrityError
from .growth import (
    GrowthCurve,
    ModelEnsemble,
    StochasticModel,
    default_grid_ensemble,
    growth,
    reference_trio,
)
from .mdp import (
    RewardSpec,
    discretize_kernel,
    escapement_profile,
    policy_csv_rows,
    reed_escapement,
    uniform_action_grid,
    uniform_state_grid,
    value_iterate,
)
from .scoring import campaign_means, one_step_forecast, score_campaign

SCENARIOS = (
    "ecosystem_fig1",
    "scores_fig2",
    "outcomes_fig3",
    "adaptive_fig4",
    "curves_fig5",
)

DELTA1_HORIZON = 400
CURVE_POINTS = 1000
N_BOOT = 2000

# numeric leaves accept ints where floats are declared; bools are rejected
_SCHEMA = {
    "scenario": str,
    "seed": int,
    "out": str,
    "reps": int,
    "horizon": int,
    "models": {
        "source": str,
        "sigma": float,
        "custom": [{"family": str, "r": float, "K": float, "c": float, "label": str}],
    },
    "grids": {"n_states": int, "x_max": float, "n_actions": int, "quota_max": float},
    "reward": {"price": float, "delta": float},
    "adaptive": {
        "voi_reps": int,
        "voi_horizon": int,
        "prior_weight": float,
        "n_boot": int,
    },
    "ecosystem": {
        "horizon": int,
        "reps": int,
        "effort_points": int,
        "history_steps": int,
        "sigma": float,
        "truth_r": list,
        "truth_A": list,
        "cand_a_r": list,
        "cand_a_A": list,
        "cand_b_r": list,
        "cand_b_A": list,
    },
}


@dataclass(frozen=True)
class CustomModel:
    family: str
    r: float = 0.0
    K: float = 1.0
    c: float = 0.0
    label: str = ""


@dataclass(frozen=True)
class ModelsConfig:
    source: str = "default"
    sigma: float = 0.05
    custom: tuple = ()


@dataclass(frozen=True)
class GridsConfig:
    n_states: int = 121
    x_max: float = 2.4
    n_actions: int = 101
    quota_max: float = 1.28


@dataclass(frozen=True)
class RewardConfig:
    price: float = 1.0
    delta: float = 0.99


@dataclass(frozen=True)
class AdaptiveConfig:
    voi_reps: int = 25
    voi_horizon: int = 80
    prior_weight: float = 0.99
    n_boot: int = N_BOOT


@dataclass(frozen=True)
class EcoConfig:
    horizon: int = 50
    reps: int = 100
    effort_points: int = 21
    history_steps: int = 10
    sigma: float = 0.05
    truth_r: tuple | None = None
    truth_A: tuple | None = None
    cand_a_r: tuple | None = None
    cand_a_A: tuple | None = None
    cand_b_r: tuple | None = None
    cand_b_A: tuple | None = None


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str
    seed: int
    out: str = "ftlab_runs"
    reps: int = 100
    horizon: int = 100
    models: ModelsConfig = field(default_factory=ModelsConfig)
    grids: GridsConfig = field(default_factory=GridsConfig)
    reward: RewardConfig = field(default_factory=RewardConfig)
    adaptive: AdaptiveConfig = field(default_factory=AdaptiveConfig)
    ecosystem: EcoConfig = field(default_factory=EcoConfig)


def _check_keys(data: dict, schema: dict, prefix: str = ""):
    for key, value in data.items():
        dotted = f"{prefix}{key}"
        if key not in schema:
            raise ConfigError(f"unknown config key {dotted!r}")
        want = schema[key]
        if isinstance(want, dict):
            if not isinstance(value, dict):
                raise ConfigError(f"config key {dotted!r} must be a table")
            _check_keys(value, want, dotted + ".")
        elif isinstance(want, list):
            if want and isinstance(want[0], dict):
                if not isinstance(value, list):
                    raise ConfigError(f"config key {dotted!r} must be an array of tables")
                for i, item in enumerate(value):
                    if not isinstance(item, dict):
                        raise ConfigError(f"config key {dotted!r}[{i}] must be a table")
                    _check_keys(item, want[0], f"{dotted}[{i}].")
            elif not isinstance(value, list):
                raise ConfigError(f"config key {dotted!r} must be an array")
        elif want is int:
            if isinstance(value, bool) or not isinstance(value, int):
                raise ConfigError(f"config key {dotted!r} must be an integer")
        elif want is float:
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigError(f"config key {dotted!r} must be a number")
        elif want is str and not isinstance(value, str):
            raise ConfigError(f"config key {dotted!r} must be a string")


def _tuplify(value):
    if isinstance(value, list):
        return tuple(_tuplify(v) for v in value)
    return float(value)


def _config_from_dict(data: dict) -> ScenarioConfig:
    if not isinstance(data, dict):
        raise ConfigError("config root must be a table")
    _check_keys(data, _SCHEMA)
    if "scenario" not in data:
        raise ConfigError("config key 'scenario' is required")
    if "seed" not in data:
        raise ConfigError("config key 'seed' is required")
    scenario = data["scenario"]
    if scenario != "all" and scenario not in SCENARIOS:
        raise ConfigError(
            f"unknown scenario {scenario!r}; expected one of {('all',) + SCENARIOS}"
        )
    seed = data["seed"]
    if seed < 0:
        raise ConfigError("config key 'seed' must be >= 0")

    md = data.get("models", {})
    custom = tuple(
        CustomModel(
            family=str(item.get("family", "gordon_schaefer")),
            r=float(item.get("r", 0.0)),
            K=float(item.get("K", 1.0)),
            c=float(item.get("c", 0.0)),
            label=str(item.get("label", "")),
        )
        for item in md.get("custom", [])
    )
    models = ModelsConfig(
        source=md.get("source", "default"),
        sigma=float(md.get("sigma", 0.05)),
        custom=custom,
    )
    if models.source not in ("default", "custom"):
        raise ConfigError("config key 'models.source' must be 'default' or 'custom'")
    if models.source == "custom" and len(custom) < 3:
        raise ConfigError(
            "custom models need at least three entries (candidates..., truth last)"
        )
    if models.sigma < 0:
        raise ConfigError("config key 'models.sigma' must be >= 0")

    gd = data.get("grids", {})
    grids = GridsConfig(
        n_states=gd.get("n_states", 121),
        x_max=float(gd.get("x_max", 2.4)),
        n_actions=gd.get("n_actions", 101),
        quota_max=float(gd.get("quota_max", 1.28)),
    )
    if grids.n_states < 2 or grids.n_actions < 2:
        raise ConfigError("grids need at least two states and two actions")
    if grids.x_max <= 0 or grids.quota_max <= 0:
        raise ConfigError("grid extents must be positive")

    rd = data.get("reward", {})
    reward = RewardConfig(price=float(rd.get("price", 1.0)), delta=float(rd.get("delta", 0.99)))
    if reward.price < 0:
        raise ConfigError("config key 'reward.price' must be >= 0")
    if not (0.0 < reward.delta <= 1.0):
        raise ConfigError("config key 'reward.delta' must be in (0, 1]")

    ad = data.get("adaptive", {})
    adaptive = AdaptiveConfig(
        voi_reps=ad.get("voi_reps", 25),
        voi_horizon=ad.get("voi_horizon", 80),
        prior_weight=float(ad.get("prior_weight", 0.99)),
        n_boot=ad.get("n_boot", N_BOOT),
    )
    if adaptive.voi_reps < 2:
        raise ConfigError("config key 'adaptive.voi_reps' must be >= 2")
    if adaptive.voi_horizon < 1:
        raise ConfigError("config key 'adaptive.voi_horizon' must be >= 1")
    if not (0.0 < adaptive.prior_weight < 1.0):
        raise ConfigError("config key 'adaptive.prior_weight' must be in (0, 1)")
    if adaptive.n_boot < 1:
        raise ConfigError("config key 'adaptive.n_boot' must be >= 1")

    ed = data.get("ecosystem", {})
    eco_kwargs = dict(
        horizon=ed.get("horizon", 50),
        reps=ed.get("reps", 100),
        effort_points=ed.get("effort_points", 21),
        history_steps=ed.get("history_steps", 10),
        sigma=float(ed.get("sigma", 0.05)),
    )
    for name in ("truth_r", "truth_A", "cand_a_r", "cand_a_A", "cand_b_r", "cand_b_A"):
        eco_kwargs[name] = _tuplify(ed[name]) if name in ed else None
    eco = EcoConfig(**eco_kwargs)
    if eco.horizon < 1 or eco.reps < 1 or eco.history_steps < 1:
        raise ConfigError("ecosystem horizon, reps, and history_steps must be >= 1")
    if eco.effort_points < 2:
        raise ConfigError("config key 'ecosystem.effort_points' must be >= 2")
    if eco.sigma < 0:
        raise ConfigError("config key 'ecosystem.sigma' must be >= 0")

    reps = data.get("reps", 100)
    horizon = data.get("horizon", 100)
    if reps < 1 or horizon < 1:
        raise ConfigError("reps and horizon must be >= 1")
    return ScenarioConfig(
        scenario=scenario,
        seed=int(seed),
        out=str(data.get("out", "ftlab_runs")),
        reps=int(reps),
        horizon=int(horizon),
        models=models,
        grids=grids,
        reward=reward,
        adaptive=adaptive,
        ecosystem=eco,
    )


def loads_config(text: str) -> ScenarioConfig:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"config is not valid TOML: {e}") from e
    return _config_from_dict(data)


def parse_config(path: str | Path) -> ScenarioConfig:
    """Load, validate, and fully resolve a scenario config file."""
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    return loads_config(p.read_text(encoding="utf-8"))


def _toml_scalar(value) -> str:
    if isinstance(value, str):
        escaped = value.replace("\\", "\\\\").replace('"', '\\"')
        return f'"{escaped}"'
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return "[" + ", ".join(_toml_scalar(v) for v in value) + "]"
    raise ConfigError(f"cannot serialize config value {value!r}")


def serialize_config(cfg: ScenarioConfig) -> str:
    """Emit the resolved config as TOML; parse(serialize(x)) == x."""
    lines = [
        f"scenario = {_toml_scalar(cfg.scenario)}",
        f"seed = {cfg.seed}",
        f"out = {_toml_scalar(cfg.out)}",
        f"reps = {cfg.reps}",
        f"horizon = {cfg.horizon}",
        "",
        "[models]",
        f"source = {_toml_scalar(cfg.models.source)}",
        f"sigma = {_toml_scalar(cfg.models.sigma)}",
    ]
    for m in cfg.models.custom:
        lines += [
            "",
            "[[models.custom]]",
            f"family = {_toml_scalar(m.family)}",
            f"r = {_toml_scalar(m.r)}",
            f"K = {_toml_scalar(m.K)}",
            f"c = {_toml_scalar(m.c)}",
            f"label = {_toml_scalar(m.label)}",
        ]
    lines += [
        "",
        "[grids]",
        f"n_states = {cfg.grids.n_states}",
        f"x_max = {_toml_scalar(cfg.grids.x_max)}",
        f"n_actions = {cfg.grids.n_actions}",
        f"quota_max = {_toml_scalar(cfg.grids.quota_max)}",
        "",
        "[reward]",
        f"price = {_toml_scalar(cfg.reward.price)}",
        f"delta = {_toml_scalar(cfg.reward.delta)}",
        "",
        "[adaptive]",
        f"voi_reps = {cfg.adaptive.voi_reps}",
        f"voi_horizon = {cfg.adaptive.voi_horizon}",
        f"prior_weight = {_toml_scalar(cfg.adaptive.prior_weight)}",
        f"n_boot = {cfg.adaptive.n_boot}",
        "",
        "[ecosystem]",
        f"horizon = {cfg.ecosystem.horizon}",
        f"reps = {cfg.ecosystem.reps}",
        f"effort_points = {cfg.ecosystem.effort_points}",
        f"history_steps = {cfg.ecosystem.history_steps}",
        f"sigma = {_toml_scalar(cfg.ecosystem.sigma)}",
    ]
    for name in ("truth_r", "truth_A", "cand_a_r", "cand_a_A", "cand_b_r", "cand_b_A"):
        value = getattr(cfg.ecosystem, name)
        if value is not None:
            lines.append(f"{name} = {_toml_scalar(value)}")
    return "\n".join(lines) + "\n"


def config_as_dict(cfg: ScenarioConfig) -> dict:
    """Plain-dict echo of the resolved config (for the manifest)."""
    out = dataclasses.asdict(cfg)
    eco = out["ecosystem"]
    for name in list(eco):
        if eco[name] is None:
            del eco[name]
    out["models"]["custom"] = [dataclasses.asdict(m) for m in cfg.models.custom]
    return out


def scenario_seed(master_seed: int, scenario: str) -> int:
    """Stable 64-bit per-scenario seed: sha256("<master>/<name>"), first 8 bytes."""
    digest = hashlib.sha256(f"{master_seed}/{scenario}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


def thread_cap() -> int:
    """Parallelism cap from FTLAB_THREADS; defaults to 1 (fully sequential)."""
    raw = os.environ.get("FTLAB_THREADS", "").strip()
    if not raw:
        return 1
    try:
        cap = int(raw)
    except ValueError as e:
        raise ConfigError(f"FTLAB_THREADS must be an integer, got {raw!r}") from e
    if cap < 1:
        raise ConfigError(f"FTLAB_THREADS must be >= 1, got {cap}")
    return cap


def parallel_map(fn, items):
    """Order-preserving map over independent tasks, threaded when allowed."""
    items = list(items)
    cap = thread_cap()
    if cap == 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=min(cap, len(items))) as pool:
        return list(pool.map(fn, items))


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def write_csv(path: Path, fieldnames, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(fieldnames)
        for row in rows:
            writer.writerow([_fmt(row[name]) for name in fieldnames])


def write_json(path: Path, obj):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def sha256_file(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _bootstrap_ci(diffs: np.ndarray, seed: int, n_boot: int = N_BOOT):
    """Percentile bootstrap 95% interval for the mean of paired differences."""
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 0xB007]))
    diffs = np.asarray(diffs, dtype=float)
    means = np.empty(n_boot)
    for b in range(n_boot):
        means[b] = np.mean(rng.choice(diffs, size=len(diffs), replace=True))
    lo, hi = np.percentile(means, [2.5, 97.5])
    return float(lo), float(hi)


def resolve_models(cfg: ScenarioConfig):
    """(model1, model2, truth): the reference trio or the custom list.

    Custom lists read candidates first and the truth last; the first two
    candidates play the model1/model2 roles in the named scenarios.
    """
    if cfg.models.source == "default":
        return reference_trio(cfg.models.sigma)
    members = []
    for i, m in enumerate(cfg.models.custom):
        label = m.label or f"custom{i}"
        curve = GrowthCurve(m.family, r=m.r, K=m.K, c=m.c, label=label)
        members.append(StochasticModel(curve, cfg.models.sigma))
    return members[0], members[1], members[-1]


def _grids(cfg: ScenarioConfig):
    states = uniform_state_grid(cfg.grids.n_states, cfg.grids.x_max)
    actions = uniform_action_grid(cfg.grids.n_actions, cfg.grids.quota_max)
    return states, actions


def _reward(cfg: ScenarioConfig) -> RewardSpec:
    return RewardSpec(price=cfg.reward.price, delta=cfg.reward.delta)


# ---------------------------------------------------------------------------
# scenario bodies


def _run_curves_fig5(cfg: ScenarioConfig, seed: int, outdir: Path) -> dict:
    m1, m2, truth = resolve_models(cfg)
    states, actions = _grids(cfg)
    reward = _reward(cfg)
    xs = np.linspace(0.0, cfg.grids.x_max, CURVE_POINTS)

    curve_rows = []
    for m in (m1, m2, truth):
        g = growth(m.curve, xs)
        for x, gx in zip(xs, g):
            curve_rows.append(
                {
                    "model": m.label,
                    "family": m.curve.family,
                    "r": m.curve.r,
                    "K": m.curve.K,
                    "c": m.curve.c,
                    "x": x,
                    "growth": gx,
                    "net_growth": gx - x,
                }
            )
    write_csv(
        outdir / "growth_curves.csv",
        ["model", "family", "r", "K", "c", "x", "growth", "net_growth"],
        curve_rows,
    )

    policy_rows = []
    profiles = {}
    delta1 = {}
    for m in (m1, m2, truth):
        kernel = discretize_kernel(m, states, actions)
        vf, pol = value_iterate(kernel, reward, states, actions)
        policy_rows.extend(policy_csv_rows(pol, vf, states, actions, m.label))
        profiles[m.label] = (pol, escapement_profile(pol, states, actions))
        vf1, pol1 = value_iterate(
            kernel, RewardSpec(cfg.reward.price, 1.0), states, actions,
            horizon=DELTA1_HORIZON,
        )
        prof1 = escapement_profile(pol1, states, actions)
        delta1[m.label] = {
            "sdp_escapement": prof1.plateau,
            "reed_escapement": reed_escapement(m.curve, 1.0),
        }
    write_csv(
        outdir / "policies.csv",
        ["model", "state_index", "state", "action_index", "quota", "escapement", "value"],
        policy_rows,
    )

    cell = float(states.values[1] - states.values[0])
    action_cell = float(actions.values[1] - actions.values[0])
    pol1, prof_m1 = profiles[m1.label]
    pol2, prof_m2 = profiles[m2.label]
    polt, prof_t = profiles[truth.label]
    summary = {
        "model1_label": m1.label,
        "model2_label": m2.label,
        "truth_label": truth.label,
        "state_cell": cell,
        "action_cell": action_cell,
        "per_model": {
            label: {
                "escapement": prof.plateau,
                "bang_bang": bool(prof.bang_bang),
                "threshold_index": prof.threshold_index,
                "threshold_state": (
                    float(states.values[prof.threshold_index])
                    if prof.threshold_index is not None
                    else None
                ),
            }
            for label, (_, prof) in profiles.items()
        },
        "delta1": {
            label: {
                **vals,
                "gap": abs(vals["sdp_escapement"] - vals["reed_escapement"]),
            }
            for label, vals in delta1.items()
        },
        "max_action_gap_model1_vs_truth": float(
            np.max(np.abs(actions.values[pol1.actions] - actions.values[polt.actions]))
        ),
        "escapement_drop_model2_vs_truth": float(prof_t.plateau - prof_m2.plateau),
        "reed_escapement_truth_delta": reed_escapement(truth.curve, cfg.reward.delta),
    }
    return summary


def _run_scores_fig2(cfg: ScenarioConfig, seed: int, outdir: Path) -> dict:
    m1, m2, truth = resolve_models(cfg)
    states, actions = _grids(cfg)
    reward = _reward(cfg)
    candidates = ModelEnsemble((m1, m2))
    kernels: dict = {}

    def campaign(mode: str):
        return score_campaign(
            candidates, truth, mode, cfg.reps, cfg.horizon, seed, states, actions,
            reward=reward, kernels=kernels,
        )

    unfished, managed = parallel_map(campaign, ["unfished", "managed"])

    score_rows = []
    interval_rows = []
    models = {m.label: m for m in (m1, m2)}
    for series in unfished + managed:
        for k in range(len(series.t)):
            score_rows.append(
                {
                    "scenario": series.scenario,
                    "model": series.model,
                    "replicate": series.replicate,
                    "t": int(series.t[k]),
                    "state": series.state[k],
                    "action": series.action[k],
                    "observed_next": series.observed_next[k],
                    "score": series.score[k],
                }
            )
        if series.replicate == 0:
            m = models[series.model]
            for k in range(len(series.t)):
                fc = one_step_forecast(m, float(series.state[k]), float(series.action[k]), states)
                interval_rows.append(
                    {
                        "scenario": series.scenario,
                        "model": series.model,
                        "replicate": series.replicate,
                        "t": int(series.t[k]),
                        "state": series.state[k],
                        "action": series.action[k],
                        "pred_mean": fc.mean(states),
                        "lo95": fc.lo95,
                        "hi95": fc.hi95,
                        "observed_next": series.observed_next[k],
                    }
                )
    write_csv(
        outdir / "scores.csv",
        ["scenario", "model", "replicate", "t", "state", "action", "observed_next", "score"],
        score_rows,
    )
    write_csv(
        outdir / "forecast_intervals.csv",
        ["scenario", "model", "replicate", "t", "state", "action",
         "pred_mean", "lo95", "hi95", "observed_next"],
        interval_rows,
    )

    summary = {"model1_label": m1.label, "model2_label": m2.label}
    for mode, series_list in (("unfished", unfished), ("managed", managed)):
        means = campaign_means(series_list)
        rep1 = np.array(means[m1.label]["per_replicate_mean"])
        rep2 = np.array(means[m2.label]["per_replicate_mean"])
        lo, hi = _bootstrap_ci(rep2 - rep1, seed)
        summary[mode] = {
            "mean_scores": {
                label: means[label]["mean_score"] for label in (m1.label, m2.label)
            },
            "n_neg_inf": {
                label: means[label]["n_neg_inf"] for label in (m1.label, m2.label)
            },
            "diff_mean_score_m2_minus_m1": float(np.mean(rep2) - np.mean(rep1)),
            "ci_low": lo,
            "ci_high": hi,
        }
    return summary


def _run_outcomes_fig3(cfg: ScenarioConfig, seed: int, outdir: Path) -> dict:
    m1, m2, truth = resolve_models(cfg)
    states, actions = _grids(cfg)
    reward = _reward(cfg)
    candidates = ModelEnsemble((m1, m2))
    series_list = score_campaign(
        candidates, truth, "managed", cfg.reps, cfg.horizon, seed, states, actions,
        reward=reward,
    )

    rows = []
    per_rep: dict[str, dict[int, dict]] = {m1.label: {}, m2.label: {}}
    disc = cfg.reward.delta ** np.arange(cfg.horizon)
    for series in series_list:
        harvest = np.minimum(series.action, series.state)
        reward_t = cfg.reward.price * harvest
        per_rep[series.model][series.replicate] = {
            "mean_stock": float(np.mean(series.state)),
            "npv": float(np.sum(reward_t * disc)),
        }
        for k in range(len(series.t)):
            rows.append(
                {
                    "scenario": "outcomes_fig3",
                    "model": series.model,
                    "replicate": series.replicate,
                    "t": int(series.t[k]),
                    "state": series.state[k],
                    "quota": series.action[k],
                    "harvest": harvest[k],
                    "reward": reward_t[k],
                }
            )
    write_csv(
        outdir / "outcomes.csv",
        ["scenario", "model", "replicate", "t", "state", "quota", "harvest", "reward"],
        rows,
    )

    stock = {
        label: np.array([per_rep[label][r]["mean_stock"] for r in range(cfg.reps)])
        for label in per_rep
    }
    npv = {
        label: np.array([per_rep[label][r]["npv"] for r in range(cfg.reps)])
        for label in per_rep
    }
    stock_lo, stock_hi = _bootstrap_ci(stock[m1.label] - stock[m2.label], seed)
    npv_lo, npv_hi = _bootstrap_ci(npv[m1.label] - npv[m2.label], seed + 1)
    return {
        "model1_label": m1.label,
        "model2_label": m2.label,
        "mean_stock": {label: float(np.mean(stock[label])) for label in stock},
        "mean_npv": {label: float(np.mean(npv[label])) for label in npv},
        "diff_stock_m1_minus_m2": float(np.mean(stock[m1.label]) - np.mean(stock[m2.label])),
        "stock_ci_low": stock_lo,
        "stock_ci_high": stock_hi,
        "diff_npv_m1_minus_m2": float(np.mean(npv[m1.label]) - np.mean(npv[m2.label])),
        "npv_ci_low": npv_lo,
        "npv_ci_high": npv_hi,
    }


def _closest_member_index(ensemble: ModelEnsemble, target: StochasticModel) -> int:
    gaps = [
        (m.curve.r - target.curve.r) ** 2 + (m.curve.K - target.curve.K) ** 2
        for m in ensemble.members
    ]
    return int(np.argmin(gaps))


def _run_adaptive_fig4(cfg: ScenarioConfig, seed: int, outdir: Path) -> dict:
    m1, m2, truth = resolve_models(cfg)
    states, actions = _grids(cfg)
    reward = _reward(cfg)
    pw = cfg.adaptive.prior_weight

    ens2 = ModelEnsemble((m1, m2))
    prior2 = Belief(np.array([pw, 1.0 - pw]))
    ens42 = default_grid_ensemble(cfg.models.sigma)
    anchor = _closest_member_index(ens42, m1)
    w42 = np.full(len(ens42), (1.0 - pw) / (len(ens42) - 1))
    w42[anchor] = pw
    prior42 = Belief(w42)

    def run_voi(case):
        name, ens, prior = case
        stacked = member_kernels(ens, states, actions)
        return value_of_information(
            truth, ens, prior, cfg.adaptive.voi_reps, cfg.adaptive.voi_horizon,
            reward, seed, states, actions, stacked=stacked,
            n_boot=cfg.adaptive.n_boot,
        )

    voi2, voi42 = parallel_map(
        run_voi,
        [("2model", ens2, prior2), ("42model", ens42, prior42)],
    )

    def run_rows(voi, ens, tracked_index):
        rows = []
        for run in voi["learning_runs"] + voi["planning_runs"]:
            top_idx = np.argmax(run.beliefs, axis=1)
            for t in range(len(run.state)):
                k = int(top_idx[t])
                rows.append(
                    {
                        "mode": run.mode,
                        "replicate": run.replicate,
                        "t": t,
                        "state": run.state[t],
                        "quota": run.quota[t],
                        "harvest": run.harvest[t],
                        "reward": run.reward[t],
                        "belief_model1": run.beliefs[t, tracked_index],
                        "belief_top_label": ens.labels[k],
                        "belief_top_weight": run.beliefs[t, k],
                    }
                )
        return rows

    fields = ["mode", "replicate", "t", "state", "quota", "harvest", "reward",
              "belief_model1", "belief_top_label", "belief_top_weight"]
    write_csv(outdir / "adaptive_runs_2model.csv", fields, run_rows(voi2, ens2, 0))
    write_csv(outdir / "adaptive_runs_42model.csv", fields, run_rows(voi42, ens42, anchor))

    json_keys = ("voi", "relative_voi", "ci_low", "ci_high", "reps", "horizon")
    write_json(outdir / "voi_2model.json", {k: voi2[k] for k in json_keys})
    write_json(outdir / "voi_42model.json", {k: voi42[k] for k in json_keys})

    idx_m2 = ens2.index_of(m2.label)
    switched = [
        bool(run.beliefs[0, idx_m2] > 0.5) for run in voi2["learning_runs"]
    ]
    degenerate = sum(run.degenerate_events for run in voi2["learning_runs"])
    return {
        "model1_label": m1.label,
        "model2_label": m2.label,
        "anchor_member_42model": ens42.labels[anchor],
        "voi_2model": {k: voi2[k] for k in json_keys},
        "voi_42model": {k: voi42[k] for k in json_keys},
        "belief_switch_fraction": float(np.mean(switched)),
        "degenerate_updates_2model": int(degenerate),
    }


def _eco_defaults(cfg: ScenarioConfig):
    eco = cfg.ecosystem
    r = np.array(eco.truth_r if eco.truth_r is not None else TRUTH_R)
    A = np.array(eco.truth_A if eco.truth_A is not None else TRUTH_A)
    web = FoodWeb(r, A, np.full(5, eco.sigma), interior_equilibrium(r, A))
    ra = np.array(eco.cand_a_r if eco.cand_a_r is not None else CAND_A_R)
    Aa = np.array(eco.cand_a_A if eco.cand_a_A is not None else CAND_A_A)
    rb = np.array(eco.cand_b_r if eco.cand_b_r is not None else CAND_B_R)
    Ab = np.array(eco.cand_b_A if eco.cand_b_A is not None else CAND_B_A)
    cand_a = CandidateEcoModel("A", ra, Aa, np.full(3, eco.sigma))
    cand_b = CandidateEcoModel("B", rb, Ab, np.full(3, eco.sigma))
    from .ecosystem import default_utility_spec

    return web, cand_a, cand_b, default_utility_spec(web)


def _run_ecosystem_fig1(cfg: ScenarioConfig, seed: int, outdir: Path) -> dict:
    eco = cfg.ecosystem
    web, cand_a, cand_b, spec = _eco_defaults(cfg)
    delta = cfg.reward.delta
    horizon, reps = eco.horizon, eco.reps

    hist, _, _ = simulate_truth(
        web, web.x0, EffortPolicy(0.0, 0.0), eco.history_steps, 1, seed, tag=1
    )
    obs_hist = hist[0, :, :2]
    x_start = hist[0, -1, :]

    opt_truth = optimize_fixed_effort(
        web, spec, horizon, reps, delta, seed, effort_points=eco.effort_points,
        x0=x_start,
    )

    def run_candidate(model):
        eff = optimize_fixed_effort(
            model, spec, horizon, reps, delta, seed,
            effort_points=eco.effort_points, observed=obs_hist[-1],
        )
        ev = evaluate_regime(web, eff, spec, opt_truth, horizon, reps, delta, seed, x0=x_start)
        fc = candidate_forecast(model, obs_hist, eff, horizon, reps, seed)
        realized = ev["trajectories"]
        rmse = forecast_rmse(
            fc["B_med"], fc["C_med"],
            realized[:, :, 0].mean(axis=0), realized[:, :, 1].mean(axis=0),
        )
        return {"efforts": eff, "ev": ev, "fc": fc, "rmse": rmse}

    res_a, res_b = parallel_map(run_candidate, [cand_a, cand_b])
    ev_opt = evaluate_regime(web, opt_truth, spec, opt_truth, horizon, reps, delta, seed, x0=x_start)

    rows = []

    def truth_rows(label, ev):
        traj, hb, hh = ev["trajectories"], ev["harvest_bass"], ev["harvest_herring"]
        for rep in range(traj.shape[0]):
            for t in range(traj.shape[1]):
                last = t == traj.shape[1] - 1
                util = None if last else float(
                    utility_per_step(traj[rep, t, 1], hb[rep, t], hh[rep, t], spec)
                )
                rows.append(
                    {
                        "scenario": "ecosystem_fig1",
                        "model": label,
                        "replicate": rep,
                        "t": t,
                        "B": traj[rep, t, 0],
                        "C": traj[rep, t, 1],
                        "H1": traj[rep, t, 2],
                        "H2": traj[rep, t, 3],
                        "H3": traj[rep, t, 4],
                        "harvest_B": None if last else hb[rep, t],
                        "harvest_H": None if last else hh[rep, t],
                        "utility": util,
                    }
                )

    def forecast_rows(label, fc):
        traj, hb, hh = fc["trajectories"], fc["harvest_bass"], fc["harvest_herring"]
        for rep in range(traj.shape[0]):
            for t in range(traj.shape[1]):
                last = t == traj.shape[1] - 1
                util = None if last else float(
                    utility_per_step(traj[rep, t, 1], hb[rep, t], hh[rep, t], spec)
                )
                rows.append(
                    {
                        "scenario": "ecosystem_fig1",
                        "model": label,
                        "replicate": rep,
                        "t": t,
                        "B": traj[rep, t, 0],
                        "C": traj[rep, t, 1],
                        "H1": None,
                        "H2": None,
                        "H3": None,
                        "harvest_B": None if last else hb[rep, t],
                        "harvest_H": None if last else hh[rep, t],
                        "utility": util,
                    }
                )

    for t in range(obs_hist.shape[0]):
        rows.append(
            {
                "scenario": "ecosystem_fig1",
                "model": "observed_history",
                "replicate": 0,
                "t": t - (obs_hist.shape[0] - 1),
                "B": obs_hist[t, 0],
                "C": obs_hist[t, 1],
                "H1": None, "H2": None, "H3": None,
                "harvest_B": None, "harvest_H": None, "utility": None,
            }
        )
    truth_rows("truth_under_model_A", res_a["ev"])
    truth_rows("truth_under_model_B", res_b["ev"])
    truth_rows("truth_optimal", ev_opt)
    forecast_rows(cand_a.label, res_a["fc"])
    forecast_rows(cand_b.label, res_b["fc"])
    write_csv(
        outdir / "eco_trajectories.csv",
        ["scenario", "model", "replicate", "t", "B", "C", "H1", "H2", "H3",
         "harvest_B", "harvest_H", "utility"],
        rows,
    )

    band_rows = []
    for label, res in ((cand_a.label, res_a), (cand_b.label, res_b)):
        fc = res["fc"]
        for t in range(len(fc["B_med"])):
            band_rows.append(
                {
                    "model": label,
                    "t": t,
                    "B_med": fc["B_med"][t],
                    "B_lo": fc["B_lo"][t],
                    "B_hi": fc["B_hi"][t],
                    "C_med": fc["C_med"][t],
                    "C_lo": fc["C_lo"][t],
                    "C_hi": fc["C_hi"][t],
                }
            )
    write_csv(
        outdir / "forecast_bands.csv",
        ["model", "t", "B_med", "B_lo", "B_hi", "C_med", "C_lo", "C_hi"],
        band_rows,
    )

    return {
        "efforts": {
            cand_a.label: dataclasses.asdict(res_a["efforts"]),
            cand_b.label: dataclasses.asdict(res_b["efforts"]),
            "truth_optimal": dataclasses.asdict(opt_truth),
        },
        "rmse": {cand_a.label: res_a["rmse"], cand_b.label: res_b["rmse"]},
        "utility_ratio": {
            cand_a.label: res_a["ev"]["utility_ratio_vs_truth_optimum"],
            cand_b.label: res_b["ev"]["utility_ratio_vs_truth_optimum"],
        },
        "mean_utility": {
            cand_a.label: res_a["ev"]["mean_utility"],
            cand_b.label: res_b["ev"]["mean_utility"],
            "truth_optimal": ev_opt["mean_utility"],
        },
        "baselines": {
            "C_base": spec.C_base, "B_base": spec.B_base, "H_base": spec.H_base,
        },
    }


_RUNNERS = {
    "ecosystem_fig1": _run_ecosystem_fig1,
    "scores_fig2": _run_scores_fig2,
    "outcomes_fig3": _run_outcomes_fig3,
    "adaptive_fig4": _run_adaptive_fig4,
    "curves_fig5": _run_curves_fig5,
}


def run_scenario(cfg: ScenarioConfig) -> list[Path]:
    """Run the configured scenario(s); returns the scenario directories written.

    Each scenario writes into <out>/<scenario-name>/ so that "all" and
    one-at-a-time invocations produce identical trees.  On any failure the
    partially written scenario directory is removed before the error
    propagates.
    """
    names = SCENARIOS if cfg.scenario == "all" else (cfg.scenario,)
    out_root = Path(cfg.out)
    out_root.mkdir(parents=True, exist_ok=True)
    written = []
    for name in names:
        subdir = out_root / name
        if subdir.exists():
            shutil.rmtree(subdir)
        subdir.mkdir()
        t0 = time.time()
        try:
            sub_cfg = dataclasses.replace(cfg, scenario=name)
            summary = _RUNNERS[name](sub_cfg, scenario_seed(cfg.seed, name), subdir)
            write_json(subdir / "summary.json", summary)
            files = sorted(p.name for p in subdir.iterdir() if p.name != "manifest.json")
            manifest = {
                "tool_version": __version__,
                "scenario": name,
                "scenario_seed": scenario_seed(cfg.seed, name),
                "wall_clock_seconds": round(time.time() - t0, 3),
                "config": config_as_dict(sub_cfg),
                "files": {f: sha256_file(subdir / f) for f in files},
            }
            write_json(subdir / "manifest.json", manifest)
        except Exception:
            shutil.rmtree(subdir, ignore_errors=True)
            raise
        print(
            f"[{name}] wrote {len(files) + 1} files in {time.time() - t0:.1f}s",
            flush=True,
        )
        written.append(subdir)
    return written


# ---------------------------------------------------------------------------
# summarize: integrity checks plus independent re-derivation of the headline
# statistics.  Bootstrap intervals and solver diagnostics are not re-derived
# (they are protected by the checksums); every re-derivable point statistic
# must match the stored summary within 1e-9.

_TOL = 1e-9


def _read_csv(path: Path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def _close(a: float, b: float) -> bool:
    if np.isnan(a) and np.isnan(b):
        return True
    return abs(a - b) <= _TOL * max(1.0, abs(a), abs(b))


def _check_stat(name: str, stored, derived, problems: list):
    if isinstance(stored, bool) or isinstance(derived, bool):
        if bool(stored) != bool(derived):
            problems.append(f"{name}: stored {stored} != derived {derived}")
        return
    if stored is None or derived is None:
        if stored != derived:
            problems.append(f"{name}: stored {stored} != derived {derived}")
        return
    if not _close(float(stored), float(derived)):
        problems.append(f"{name}: stored {stored} != derived {derived}")


def _rederive_scores_fig2(subdir: Path, summary: dict, config: dict, problems: list):
    rows = _read_csv(subdir / "scores.csv")
    m1 = summary["model1_label"]
    m2 = summary["model2_label"]
    for mode in ("unfished", "managed"):
        by_model: dict[str, list[float]] = {m1: [], m2: []}
        for row in rows:
            if row["scenario"] == mode:
                by_model[row["model"]].append(float(row["score"]))
        for label in (m1, m2):
            _check_stat(
                f"{mode}.mean_scores.{label}",
                summary[mode]["mean_scores"][label],
                float(np.mean(by_model[label])),
                problems,
            )
        _check_stat(
            f"{mode}.diff_mean_score_m2_minus_m1",
            summary[mode]["diff_mean_score_m2_minus_m1"],
            float(np.mean(by_model[m2]) - np.mean(by_model[m1])),
            problems,
        )


def _rederive_outcomes_fig3(subdir: Path, summary: dict, config: dict, problems: list):
    rows = _read_csv(subdir / "outcomes.csv")
    delta = config["reward"]["delta"]
    stock: dict[str, dict[int, list]] = {}
    npv: dict[str, dict[int, float]] = {}
    for row in rows:
        label, rep = row["model"], int(row["replicate"])
        stock.setdefault(label, {}).setdefault(rep, []).append(float(row["state"]))
        npv.setdefault(label, {}).setdefault(rep, 0.0)
        npv[label][rep] += float(row["reward"]) * delta ** int(row["t"])
    for label in summary["mean_stock"]:
        reps = sorted(stock[label])
        _check_stat(
            f"mean_stock.{label}",
            summary["mean_stock"][label],
            float(np.mean([np.mean(stock[label][r]) for r in reps])),
            problems,
        )
        _check_stat(
            f"mean_npv.{label}",
            summary["mean_npv"][label],
            float(np.mean([npv[label][r] for r in reps])),
            problems,
        )
    m1, m2 = summary["model1_label"], summary["model2_label"]
    _check_stat(
        "diff_npv_m1_minus_m2",
        summary["diff_npv_m1_minus_m2"],
        summary["mean_npv"][m1] - summary["mean_npv"][m2],
        problems,
    )
    _check_stat(
        "diff_stock_m1_minus_m2",
        summary["diff_stock_m1_minus_m2"],
        summary["mean_stock"][m1] - summary["mean_stock"][m2],
        problems,
    )


def _rederive_adaptive_fig4(subdir: Path, summary: dict, config: dict, problems: list):
    delta = config["reward"]["delta"]
    for tag in ("2model", "42model"):
        rows = _read_csv(subdir / f"adaptive_runs_{tag}.csv")
        npv: dict[tuple, float] = {}
        for row in rows:
            key = (row["mode"], int(row["replicate"]))
            npv.setdefault(key, 0.0)
            npv[key] += float(row["reward"]) * delta ** int(row["t"])
        learn = [npv[k] for k in sorted(npv) if k[0] == "learning"]
        plan = [npv[k] for k in sorted(npv) if k[0] == "planning"]
        voi = float(np.mean(learn) - np.mean(plan))
        stored = summary[f"voi_{tag}"]
        _check_stat(f"voi_{tag}.voi", stored["voi"], voi, problems)
        _check_stat(
            f"voi_{tag}.relative_voi",
            stored["relative_voi"],
            voi / float(np.mean(plan)),
            problems,
        )
        with open(subdir / f"voi_{tag}.json", encoding="utf-8") as fh:
            voi_json = json.load(fh)
        _check_stat(f"voi_{tag}.json.voi", voi_json["voi"], stored["voi"], problems)
    rows = _read_csv(subdir / "adaptive_runs_2model.csv")
    first = [
        float(row["belief_model1"]) < 0.5
        for row in rows
        if row["mode"] == "learning" and int(row["t"]) == 0
    ]
    _check_stat(
        "belief_switch_fraction",
        summary["belief_switch_fraction"],
        float(np.mean(first)),
        problems,
    )


def _rederive_ecosystem_fig1(subdir: Path, summary: dict, config: dict, problems: list):
    rows = _read_csv(subdir / "eco_trajectories.csv")
    bands = _read_csv(subdir / "forecast_bands.csv")
    delta = config["reward"]["delta"]
    regimes = {
        "model_A": "truth_under_model_A",
        "model_B": "truth_under_model_B",
        "truth_optimal": "truth_optimal",
    }
    npv: dict[str, dict[int, float]] = {}
    realized: dict[str, dict[int, dict[int, tuple]]] = {}
    for row in rows:
        label = row["model"]
        if label in regimes.values():
            rep, t = int(row["replicate"]), int(row["t"])
            if row["utility"] != "":
                npv.setdefault(label, {}).setdefault(rep, 0.0)
                npv[label][rep] += float(row["utility"]) * delta ** t
            realized.setdefault(label, {}).setdefault(rep, {})[t] = (
                float(row["B"]), float(row["C"])
            )
    mean_npv = {
        label: float(np.mean([npv[label][r] for r in sorted(npv[label])]))
        for label in npv
    }
    for cand in ("model_A", "model_B"):
        _check_stat(
            f"mean_utility.{cand}",
            summary["mean_utility"][cand],
            mean_npv[regimes[cand]],
            problems,
        )
        _check_stat(
            f"utility_ratio.{cand}",
            summary["utility_ratio"][cand],
            mean_npv[regimes[cand]] / mean_npv["truth_optimal"],
            problems,
        )
        med_b = {}
        med_c = {}
        for row in bands:
            if row["model"] == cand:
                med_b[int(row["t"])] = float(row["B_med"])
                med_c[int(row["t"])] = float(row["C_med"])
        ts = sorted(med_b)
        traj = realized[regimes[cand]]
        reps = sorted(traj)
        mean_b = [float(np.mean([traj[r][t][0] for r in reps])) for t in ts]
        mean_c = [float(np.mean([traj[r][t][1] for r in reps])) for t in ts]
        rmse = forecast_rmse(
            [med_b[t] for t in ts], [med_c[t] for t in ts], mean_b, mean_c
        )
        _check_stat(f"rmse.{cand}", summary["rmse"][cand], rmse, problems)


def _rederive_curves_fig5(subdir: Path, summary: dict, config: dict, problems: list):
    rows = _read_csv(subdir / "policies.csv")
    n_actions = config["grids"]["n_actions"]
    by_model: dict[str, list[dict]] = {}
    for row in rows:
        by_model.setdefault(row["model"], []).append(row)
    for label, recs in by_model.items():
        recs.sort(key=lambda r: int(r["state_index"]))
        quotas = np.array([float(r["quota"]) for r in recs])
        states = np.array([float(r["state"]) for r in recs])
        actions = np.array([int(r["action_index"]) for r in recs])
        # mirror of the escapement-plateau extraction used at run time
        esc = np.maximum(states - quotas, 0.0)
        rail = actions == n_actions - 1
        thr = None
        plateau = float("nan")
        if len(np.flatnonzero(actions > 0)):
            zeros = np.flatnonzero(actions == 0)
            t = int(zeros[-1]) + 1 if len(zeros) else 0
            if t < len(states):
                thr = t
                region = np.arange(t, len(states))
                keep = region[~rail[region]]
                if len(keep):
                    plateau = float(np.median(esc[keep]))
        stored = summary["per_model"][label]
        _check_stat(f"per_model.{label}.escapement", stored["escapement"], plateau, problems)
        _check_stat(
            f"per_model.{label}.threshold_index", stored["threshold_index"], thr, problems
        )
    m1 = summary["model1_label"]
    truth = summary["truth_label"]
    q1 = np.array([float(r["quota"]) for r in by_model[m1]])
    qt = np.array([float(r["quota"]) for r in by_model[truth]])
    _check_stat(
        "max_action_gap_model1_vs_truth",
        summary["max_action_gap_model1_vs_truth"],
        float(np.max(np.abs(q1 - qt))),
        problems,
    )


_REDERIVE = {
    "scores_fig2": _rederive_scores_fig2,
    "outcomes_fig3": _rederive_outcomes_fig3,
    "adaptive_fig4": _rederive_adaptive_fig4,
    "ecosystem_fig1": _rederive_ecosystem_fig1,
    "curves_fig5": _rederive_curves_fig5,
}


def summarize(out_dir: str | Path) -> dict:
    """Verify checksums and re-derive headline statistics for a run directory.

    Accepts either a directory containing scenario subdirectories or a single
    scenario directory.  Raises IntegrityError on any checksum mismatch or
    any re-derived statistic differing from the stored summary beyond 1e-9.
    """
    root = Path(out_dir)
    if not root.is_dir():
        raise ConfigError(f"not a directory: {root}")
    if (root / "manifest.json").is_file():
        scenario_dirs = [root]
    else:
        scenario_dirs = sorted(
            p for p in root.iterdir() if p.is_dir() and (p / "manifest.json").is_file()
        )
    if not scenario_dirs:
        raise ConfigError(f"no run manifest found under {root}")

    combined = {}
    problems: list[str] = []
    for subdir in scenario_dirs:
        with open(subdir / "manifest.json", encoding="utf-8") as fh:
            manifest = json.load(fh)
        for name, checksum in manifest["files"].items():
            path = subdir / name
            if not path.is_file():
                problems.append(f"{subdir.name}/{name}: listed in manifest but missing")
            elif sha256_file(path) != checksum:
                problems.append(f"{subdir.name}/{name}: checksum mismatch")
        if problems:
            raise IntegrityError("; ".join(problems))
        with open(subdir / "summary.json", encoding="utf-8") as fh:
            summary = json.load(fh)
        scenario = manifest["scenario"]
        rederive = _REDERIVE.get(scenario)
        if rederive is not None:
            scoped: list[str] = []
            rederive(subdir, summary, manifest["config"], scoped)
            problems.extend(f"{subdir.name}: {p}" for p in scoped)
        if problems:
            raise IntegrityError("; ".join(problems))
        combined[scenario] = summary
    return combined
