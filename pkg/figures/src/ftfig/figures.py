"""The five figure renderers.

Each renderer maps one scenario directory to one matplotlib Figure:

    fig1  ecosystem_fig1   forecast bands vs realized outcomes
    fig2  scores_fig2      one-step forecast intervals with observed stars
    fig3  outcomes_fig3    mean stock and NPV under each model's policy
    fig4  adaptive_fig4    learning vs planning trajectories, belief-colored
    fig5  curves_fig5      net-growth curves and optimal quota schedules

All data comes from the run's CSV/JSON artifacts.  `replicates` limits
which per-replicate marks are drawn (spaghetti lines, scatter points);
empty or None draws every replicate.  Aggregates (means, bars, bands) are
always computed by the producing run, never re-derived here, so the filter
cannot change them.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from matplotlib.collections import LineCollection
from matplotlib.cm import ScalarMappable
from matplotlib.colors import Normalize

from .errors import FigureInputError
from .io import pick_replicates, read_json, read_table, scenario_dir
from .style import OBSERVED, Colors, new_figure

FIGURE_IDS = ("fig1", "fig2", "fig3", "fig4", "fig5")

BELIEF_CMAP = "viridis"


def _ordered_labels(values: np.ndarray) -> list:
    return list(dict.fromkeys(values.tolist()))


def _mean_by_t(t: np.ndarray, vals: np.ndarray):
    """Per-timestep mean across replicates; nan rows are dropped first."""
    keep = np.isfinite(vals)
    t, vals = t[keep], vals[keep]
    ts = np.unique(t)
    means = np.array([vals[t == tt].mean() for tt in ts])
    return ts, means


# ---------------------------------------------------------------------------
# fig1: ecosystem forecasts and realized outcomes


def render_fig1(indir: Path, replicates=None):
    sub = scenario_dir(indir, "ecosystem_fig1")
    traj = read_table(
        sub / "eco_trajectories.csv",
        ("scenario", "model", "replicate", "t", "B", "C", "utility"),
    )
    bands = read_table(
        sub / "forecast_bands.csv",
        ("model", "t", "B_med", "B_lo", "B_hi", "C_med", "C_lo", "C_hi"),
    )
    summ = read_json(sub / "summary.json", ("rmse", "utility_ratio"))
    colors = Colors()

    fig = new_figure((8.6, 6.0))
    (ax_b, ax_c), (ax_r, ax_u) = fig.subplots(2, 2)

    model = traj.strings("model")
    rep = traj.ints("replicate")
    t = traj.floats("t")
    hist = model == "observed_history"
    if not np.any(hist):
        raise FigureInputError("eco_trajectories.csv has no observed_history rows")
    for ax, col in ((ax_b, "B"), (ax_c, "C")):
        ax.plot(
            t[hist], traj.floats(col)[hist],
            color=OBSERVED, marker="*", ms=5, lw=1.0, label="observed",
        )
        ax.axvline(0.0, color="0.75", lw=0.7)

    bt = bands.floats("t")
    for label in _ordered_labels(bands.strings("model")):
        m = bands.strings("model") == label
        c = colors(label)
        for ax, med, lo, hi in (
            (ax_b, "B_med", "B_lo", "B_hi"),
            (ax_c, "C_med", "C_lo", "C_hi"),
        ):
            ax.fill_between(
                bt[m], bands.floats(lo)[m], bands.floats(hi)[m],
                color=c, alpha=0.22, linewidth=0,
            )
            ax.plot(bt[m], bands.floats(med)[m], color=c, label=f"{label} forecast")

    rmse_txt = ", ".join(f"{k} {v:.3f}" for k, v in sorted(summ["rmse"].items()))
    ax_b.set_title(f"bass forecast (RMSE {rmse_txt})")
    ax_c.set_title("cormorant forecast")
    ax_b.set_ylabel("bass")
    ax_c.set_ylabel("cormorant")
    ax_b.legend(loc="best")

    regimes = [
        lab for lab in _ordered_labels(model)
        if lab.startswith("truth_under_") or lab == "truth_optimal"
    ]
    if not regimes:
        raise FigureInputError("eco_trajectories.csv has no realized-regime rows")
    B = traj.floats("B")
    util = traj.floats("utility")
    for label in regimes:
        m = model == label
        c = colors(label)
        for r in pick_replicates(rep[m], replicates):
            mr = m & (rep == r)
            ax_r.plot(t[mr], B[mr], color=c, lw=0.5, alpha=0.12)
        ts, mean_b = _mean_by_t(t[m], B[m])
        ax_r.plot(ts, mean_b, color=c, lw=1.6, label=label)
        ts, mean_u = _mean_by_t(t[m], util[m])
        ax_u.plot(ts, mean_u, color=c, lw=1.6, label=label)

    ratio_txt = ", ".join(
        f"{k} {v:.2f}" for k, v in sorted(summ["utility_ratio"].items())
    )
    ax_r.set_title("realized bass under each effort regime")
    ax_u.set_title(f"mean utility per season (vs optimum: {ratio_txt})")
    ax_r.set_ylabel("bass")
    ax_u.set_ylabel("utility")
    for ax in (ax_r, ax_u):
        ax.set_xlabel("season")
    ax_r.legend(loc="best")
    return fig


# ---------------------------------------------------------------------------
# fig2: one-step forecast intervals with observed stars


def render_fig2(indir: Path, replicates=None):
    sub = scenario_dir(indir, "scores_fig2")
    tab = read_table(
        sub / "forecast_intervals.csv",
        ("scenario", "model", "replicate", "t",
         "pred_mean", "lo95", "hi95", "observed_next"),
    )
    summ = read_json(
        sub / "summary.json",
        ("model1_label", "model2_label", "unfished", "managed"),
    )
    colors = Colors()

    modes = ("unfished", "managed")
    labels = (summ["model1_label"], summ["model2_label"])
    mode_col = tab.strings("scenario")
    model_col = tab.strings("model")
    rep = tab.ints("replicate")
    t = tab.floats("t")
    mean = tab.floats("pred_mean")
    lo = tab.floats("lo95")
    hi = tab.floats("hi95")
    obs = tab.floats("observed_next")

    fig = new_figure((8.6, 5.6))
    axes = fig.subplots(2, 2, sharex=True, sharey="row")
    for i, mode in enumerate(modes):
        for j, label in enumerate(labels):
            ax = axes[i, j]
            m = (mode_col == mode) & (model_col == label)
            m &= np.isin(rep, pick_replicates(rep[m], replicates))
            if not np.any(m):
                raise FigureInputError(
                    f"forecast_intervals.csv has no rows for {mode}/{label}"
                )
            # interval endpoints bracket >= 95% of forecast mass; the mean
            # is clipped into the bar purely for drawing
            yerr = np.vstack(
                [np.maximum(mean[m] - lo[m], 0.0), np.maximum(hi[m] - mean[m], 0.0)]
            )
            ax.errorbar(
                t[m], mean[m], yerr=yerr,
                fmt="o", ms=2.4, color=colors(label), ecolor=colors(label),
                elinewidth=0.9, alpha=0.85, label="forecast mean, 95% interval",
            )
            ax.plot(
                t[m], obs[m], linestyle="none", marker="*", ms=5,
                color=OBSERVED, label="observed",
            )
            score = summ[mode]["mean_scores"][label]
            ax.set_title(f"{mode}: {label} (mean log score {score:.2f})")
    for ax in axes[-1]:
        ax.set_xlabel("season")
    for ax in axes[:, 0]:
        ax.set_ylabel("next-season stock")
    axes[0, 0].legend(loc="best")
    return fig


# ---------------------------------------------------------------------------
# fig3: outcomes under each model's policy


def render_fig3(indir: Path, replicates=None):
    sub = scenario_dir(indir, "outcomes_fig3")
    tab = read_table(
        sub / "outcomes.csv", ("model", "replicate", "t", "state", "reward")
    )
    summ = read_json(
        sub / "summary.json",
        ("model1_label", "model2_label", "mean_stock", "mean_npv",
         "diff_stock_m1_minus_m2", "stock_ci_low", "stock_ci_high",
         "diff_npv_m1_minus_m2", "npv_ci_low", "npv_ci_high"),
    )
    colors = Colors()
    labels = (summ["model1_label"], summ["model2_label"])

    model = tab.strings("model")
    rep = tab.ints("replicate")
    state = tab.floats("state")

    fig = new_figure((8.2, 3.6))
    ax_s, ax_v = fig.subplots(1, 2)
    xs = np.arange(len(labels))
    for ax, key in ((ax_s, "mean_stock"), (ax_v, "mean_npv")):
        heights = [summ[key][label] for label in labels]
        ax.bar(xs, heights, width=0.6, color=[colors(l) for l in labels], alpha=0.8)
        ax.set_xticks(xs)
        ax.set_xticklabels([f"policy({l})" for l in labels])

    # per-replicate season-mean stock, spread deterministically inside the bar
    for j, label in enumerate(labels):
        m = model == label
        if not np.any(m):
            raise FigureInputError(f"outcomes.csv has no rows for model {label!r}")
        reps = pick_replicates(rep[m], replicates)
        means = [state[m & (rep == r)].mean() for r in reps]
        offs = np.linspace(-0.18, 0.18, len(reps)) if len(reps) > 1 else [0.0]
        ax_s.plot(
            j + np.asarray(offs), means,
            linestyle="none", marker="o", ms=1.8, color="0.25", alpha=0.55,
        )

    ax_s.set_ylabel("mean stock over the run")
    ax_v.set_ylabel("net present value")
    ax_s.set_title(
        "stock: m1 - m2 = "
        f"{summ['diff_stock_m1_minus_m2']:.3f} "
        f"[{summ['stock_ci_low']:.3f}, {summ['stock_ci_high']:.3f}]"
    )
    ax_v.set_title(
        "NPV: m1 - m2 = "
        f"{summ['diff_npv_m1_minus_m2']:.3f} "
        f"[{summ['npv_ci_low']:.3f}, {summ['npv_ci_high']:.3f}]"
    )
    return fig


# ---------------------------------------------------------------------------
# fig4: belief-colored learning vs planning trajectories


def render_fig4(indir: Path, replicates=None):
    sub = scenario_dir(indir, "adaptive_fig4")
    cases = (
        ("adaptive_runs_2model.csv", "voi_2model.json", "2-model ensemble"),
        ("adaptive_runs_42model.csv", "voi_42model.json", "42-model ensemble"),
    )
    cmap = ScalarMappable(norm=Normalize(0.0, 1.0), cmap=BELIEF_CMAP)

    fig = new_figure((8.8, 3.8))
    axes = fig.subplots(1, 2, sharey=True)
    for ax, (csv_name, json_name, title) in zip(axes, cases):
        tab = read_table(
            sub / csv_name, ("mode", "replicate", "t", "state", "belief_model1")
        )
        mode = tab.strings("mode")
        rep = tab.ints("replicate")
        t = tab.floats("t")
        state = tab.floats("state")
        belief = tab.floats("belief_model1")
        for mode_name, ls in (("learning", "solid"), ("planning", "dotted")):
            m = mode == mode_name
            if not np.any(m):
                raise FigureInputError(f"{csv_name} has no {mode_name} rows")
            for r in pick_replicates(rep[m], replicates):
                mr = m & (rep == r)
                pts = np.column_stack([t[mr], state[mr]])
                segs = np.stack([pts[:-1], pts[1:]], axis=1)
                ax.add_collection(LineCollection(
                    segs, colors=cmap.to_rgba(belief[mr][:-1]),
                    linestyles=ls, linewidths=0.9, alpha=0.7,
                ))
        ax.autoscale_view()
        voi = read_json(sub / json_name, ("relative_voi",))
        ax.set_title(f"{title}: relative VOI {voi['relative_voi']:+.2f}")
        ax.set_xlabel("season")
    axes[0].set_ylabel("stock")
    fig.colorbar(cmap, ax=list(axes), label="posterior weight on model 1", shrink=0.9)
    return fig


# ---------------------------------------------------------------------------
# fig5: growth curves and quota schedules


def render_fig5(indir: Path, replicates=None):
    """Net-growth curves (A) and optimal quota schedules (B).

    This scenario has no replicate dimension, so `replicates` is ignored.
    """
    sub = scenario_dir(indir, "curves_fig5")
    curves = read_table(
        sub / "growth_curves.csv", ("model", "family", "r", "K", "c", "x", "net_growth")
    )
    pol = read_table(sub / "policies.csv", ("model", "state", "quota"))
    summ = read_json(sub / "summary.json", ("per_model",))
    colors = Colors()

    fig = new_figure((8.4, 3.6))
    ax_a, ax_b = fig.subplots(1, 2)
    ax_a.axhline(0.0, color="0.55", lw=0.8)

    cm = curves.strings("model")
    x = curves.floats("x")
    net = curves.floats("net_growth")
    for label in _ordered_labels(cm):
        m = cm == label
        lw = 2.0 if label == "truth" else 1.4
        ax_a.plot(x[m], net[m], color=colors(label), lw=lw, label=label)

    pm = pol.strings("model")
    ps = pol.floats("state")
    pq = pol.floats("quota")
    for label in _ordered_labels(pm):
        m = pm == label
        ax_b.plot(ps[m], pq[m], color=colors(label), lw=1.4, label=label)
        esc = summ["per_model"].get(label, {}).get("escapement")
        if esc is not None:
            ax_b.axvline(esc, color=colors(label), lw=0.7, alpha=0.45, ls=":")

    ax_a.set_title("A  net growth (equilibria at the zero crossings)")
    ax_a.set_xlabel("stock")
    ax_a.set_ylabel("net growth")
    ax_a.legend(loc="best")
    ax_b.set_title("B  optimal quota (escapement marked)")
    ax_b.set_xlabel("stock")
    ax_b.set_ylabel("quota")
    return fig


_RENDERERS = {
    "fig1": render_fig1,
    "fig2": render_fig2,
    "fig3": render_fig3,
    "fig4": render_fig4,
    "fig5": render_fig5,
}


def render(figure_id: str, indir: Path, replicates=None):
    """Render one figure from a run directory; returns the Figure."""
    if figure_id not in _RENDERERS:
        raise FigureInputError(
            f"unknown figure id {figure_id!r}; expected one of {FIGURE_IDS}"
        )
    indir = Path(indir)
    if not indir.is_dir():
        raise FigureInputError(f"input directory {indir} does not exist")
    return _RENDERERS[figure_id](indir, replicates=replicates)
