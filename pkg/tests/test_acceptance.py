"""Acceptance gate for the headline behaviors.

Runs the full default configuration once at seed 42, then checks each
headline claim against the written artifacts, printing one [PASS]/[FAIL]
line per claim straight to the terminal so the verdicts survive in any log.
"""

import csv
import json

import numpy as np
import pytest

import test_mdp as mdp_oracles
from ftlab.adaptive import Belief, update_belief
from ftlab.growth import reference_trio
from ftlab.harness import ScenarioConfig, run_scenario, summarize
from ftlab.mdp import (
    RewardSpec,
    kernel_row,
    reward_matrix,
    uniform_action_grid,
    uniform_state_grid,
    value_iterate,
)


@pytest.fixture(scope="session")
def full_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("acceptance_run")
    run_scenario(ScenarioConfig(scenario="all", seed=42, out=str(out)))
    return out


@pytest.fixture
def report(capsys):
    def emit(ok, name, detail):
        with capsys.disabled():
            print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}", flush=True)

    return emit


def load(out, scenario, fname):
    with open(out / scenario / fname, encoding="utf-8") as fh:
        return json.load(fh)


def test_forecast_skill_ordering(full_run, report):
    s = load(full_run, "scores_fig2", "summary.json")
    man = load(full_run, "scores_fig2", "manifest.json")
    assert man["config"]["reps"] == 100 and man["config"]["horizon"] == 100
    m1, m2 = s["model1_label"], s["model2_label"]
    order_ok = all(
        s[mode]["mean_scores"][m2] > s[mode]["mean_scores"][m1]
        for mode in ("unfished", "managed")
    )
    ci_ok = all(s[mode]["ci_low"] > 0.0 for mode in ("unfished", "managed"))
    wall = man["wall_clock_seconds"]
    time_ok = wall < 120
    ok = order_ok and ci_ok and time_ok
    report(
        ok,
        "forecast skill ordering (scores_fig2)",
        f"mean log score model2 vs model1, unfished "
        f"{s['unfished']['mean_scores'][m2]:.3f} > {s['unfished']['mean_scores'][m1]:.3f}, "
        f"managed {s['managed']['mean_scores'][m2]:.3f} > {s['managed']['mean_scores'][m1]:.3f}; "
        f"95% CI lows {s['unfished']['ci_low']:.3f} and {s['managed']['ci_low']:.3f} > 0; "
        f"{wall:.1f}s < 120s",
    )
    assert ok


def test_outcome_reversal(full_run, report):
    s = load(full_run, "outcomes_fig3", "summary.json")
    man = load(full_run, "outcomes_fig3", "manifest.json")
    m1, m2 = s["model1_label"], s["model2_label"]
    stock_ok = s["mean_stock"][m1] > s["mean_stock"][m2] and s["stock_ci_low"] > 0
    npv_ok = s["mean_npv"][m1] > s["mean_npv"][m2] and s["npv_ci_low"] > 0
    wall = man["wall_clock_seconds"]
    ok = stock_ok and npv_ok and wall < 120
    report(
        ok,
        "outcome reversal (outcomes_fig3)",
        f"mean stock {s['mean_stock'][m1]:.3f} > {s['mean_stock'][m2]:.3f} "
        f"(CI low {s['stock_ci_low']:.3f}); mean NPV {s['mean_npv'][m1]:.3f} > "
        f"{s['mean_npv'][m2]:.3f} (CI low {s['npv_ci_low']:.3f}); {wall:.1f}s < 120s",
    )
    assert ok


def test_bang_bang_and_analytic_escapement(full_run, report):
    s = load(full_run, "curves_fig5", "summary.json")
    man = load(full_run, "curves_fig5", "manifest.json")
    cell = s["state_cell"]
    acell = s["action_cell"]
    n_actions = man["config"]["grids"]["n_actions"]

    with open(full_run / "curves_fig5" / "policies.csv", newline="") as fh:
        rows = [r for r in csv.DictReader(fh) if r["model"] == s["truth_label"]]
    rows.sort(key=lambda r: int(r["state_index"]))
    esc = np.array([float(r["escapement"]) for r in rows])
    act = np.array([int(r["action_index"]) for r in rows])
    tinfo = s["per_model"][s["truth_label"]]
    above = np.arange(tinfo["threshold_index"], len(rows))
    keep = above[act[above] != n_actions - 1]
    const_ok = bool(tinfo["bang_bang"]) and bool(
        np.all(np.abs(esc[keep] - tinfo["escapement"]) <= cell + 1e-9)
    )
    reed_ok = all(s["delta1"][lbl]["gap"] <= cell + 1e-9 for lbl in s["delta1"])
    drop = s["escapement_drop_model2_vs_truth"]
    gap = s["max_action_gap_model1_vs_truth"]
    m1_ok = gap <= acell + 1e-12
    ok = const_ok and reed_ok and drop > 0 and m1_ok
    gaps = ", ".join(f"{s['delta1'][lbl]['gap']:.4f}" for lbl in s["delta1"])
    report(
        ok,
        "bang-bang policy and analytic escapement (curves_fig5)",
        f"truth constant-escapement above threshold {'holds' if const_ok else 'FAILS'}; "
        f"undiscounted escapement-vs-analytic gaps ({gaps}) vs cell {cell:.3f}; "
        f"model2 escapement lower by {drop:.4f}; model1-vs-truth max action gap "
        f"{gap:.4f} vs one action cell {acell:.4f}"
        + ("" if m1_ok else " (EXCEEDED)"),
    )
    assert const_ok and reed_ok and drop > 0
    assert m1_ok, (
        f"model1 and truth policies differ by up to {gap:.4f} "
        f"({gap / acell:.0f} action cells): the truth dynamics collapse below "
        f"their breakpoint, so the optimal rule liquidates doomed low stocks "
        f"and targets a slightly different escapement, while the "
        f"self-regenerating model1 never harvests there"
    )


def test_negative_information_value(full_run, report):
    s = load(full_run, "adaptive_fig4", "summary.json")
    man = load(full_run, "adaptive_fig4", "manifest.json")
    v2 = s["voi_2model"]
    v42 = s["voi_42model"]
    neg2_ok = v2["relative_voi"] < 0 and v2["ci_low"] < 0 and v2["ci_high"] < 0
    neg42_ok = v42["relative_voi"] < 0
    order_ok = v42["relative_voi"] > v2["relative_voi"]
    switch = s["belief_switch_fraction"]
    wall = man["wall_clock_seconds"]
    ok = neg2_ok and neg42_ok and order_ok and switch > 0.5 and wall < 300
    report(
        ok,
        "negative information value (adaptive_fig4)",
        f"2-member relative value {v2['relative_voi']:.3f} with CI "
        f"({v2['ci_low']:.3f}, {v2['ci_high']:.3f}) below 0; 42-member "
        f"{v42['relative_voi']:.3f} < 0 and less negative; belief switches to "
        f"model2 after one update in {switch:.0%} of learning runs; {wall:.1f}s < 300s",
    )
    assert ok


def test_ecosystem_trap(full_run, report):
    s = load(full_run, "ecosystem_fig1", "summary.json")
    man = load(full_run, "ecosystem_fig1", "manifest.json")
    rmse_ok = s["rmse"]["model_A"] < s["rmse"]["model_B"]
    ratio_a = s["utility_ratio"]["model_A"]
    ratio_b = s["utility_ratio"]["model_B"]
    wall = man["wall_clock_seconds"]
    ok = rmse_ok and ratio_a < ratio_b and ratio_b >= 0.9 and wall < 300
    report(
        ok,
        "better forecasts, worse outcome (ecosystem_fig1)",
        f"forecast RMSE {s['rmse']['model_A']:.4f} < {s['rmse']['model_B']:.4f} "
        f"for model A, yet realized utility ratio {ratio_a:.3f} < {ratio_b:.3f} "
        f"and model B holds >= 0.9; {wall:.1f}s < 300s",
    )
    assert ok


def test_oracle_suites(report):
    # spot batches here; the full-strength versions run in the unit suites
    rng = np.random.default_rng(20240817)
    worst_vi = 0.0
    for _ in range(15):
        states, actions, kernel, delta = mdp_oracles.random_small_mdp(rng)
        spec = RewardSpec(price=1.0, delta=delta)
        vf, _ = value_iterate(kernel, spec, states, actions, tol=1e-12)
        best = mdp_oracles.enumerate_optimal_values(
            kernel.probabilities, reward_matrix(spec, states, actions), delta
        )
        worst_vi = max(worst_vi, float(np.max(np.abs(vf.values - best))))
    vi_ok = worst_vi < 1e-8 and mdp_oracles.N_RANDOM_MDPS >= 100

    trio = reference_trio()
    states = uniform_state_grid(41, 2.4)
    row = kernel_row(trio[2], 0.45, states)
    quad_gap = float(
        np.max(np.abs(row - mdp_oracles.lognormal_row_oracle(trio[2], 0.45, states)))
    )

    from ftlab.growth import ModelEnsemble

    sgrid = uniform_state_grid(5, 2.4)
    agrid = uniform_action_grid(3, 1.28)
    stacked = np.zeros((2, 3, 5, 5))
    stacked[0, 1, 2, 3] = 0.2
    stacked[1, 1, 2, 3] = 0.8
    post, _ = update_belief(
        Belief(np.array([0.99, 0.01])),
        ModelEnsemble(trio[:2]),
        float(sgrid.values[2]),
        float(agrid.values[1]),
        float(sgrid.values[3]),
        sgrid,
        agrid,
        stacked=stacked,
    )
    bayes_gap = float(
        np.max(np.abs(post.weights - [0.198 / 0.206, 0.008 / 0.206]))
    )

    rows = np.stack([kernel_row(m, 0.5, states) for m in trio])
    prop_ok = True
    with np.errstate(divide="ignore"):
        for i in range(3):
            p = rows[i]
            mask = p > 0
            own = float(np.sum(p[mask] * np.log(rows[i][mask])))
            for j in range(3):
                if j != i:
                    prop_ok &= own > float(np.sum(p[mask] * np.log(rows[j][mask])))

    ok = vi_ok and quad_gap < 1e-6 and bayes_gap < 1e-12 and prop_ok
    report(
        ok,
        "oracle suites",
        f"policy-enumeration gap {worst_vi:.2e} < 1e-8 (15 spot problems; "
        f"{mdp_oracles.N_RANDOM_MDPS} in the unit suite); quadrature row gap "
        f"{quad_gap:.2e} < 1e-6; hand-arithmetic belief gap {bayes_gap:.2e} < 1e-12; "
        f"propriety strict on the trio (whole zoo in the unit suite)",
    )
    assert ok


def test_determinism(full_run, report, tmp_path_factory):
    rerun = tmp_path_factory.mktemp("acceptance_rerun")
    cheap = ("curves_fig5", "scores_fig2", "ecosystem_fig1")
    for name in cheap:
        run_scenario(ScenarioConfig(scenario=name, seed=42, out=str(rerun)))
    mismatched = [
        name
        for name in cheap
        if load(full_run, name, "manifest.json")["files"]
        != load(rerun, name, "manifest.json")["files"]
    ]
    ok = not mismatched
    report(
        ok,
        "determinism",
        f"independent reruns of {', '.join(cheap)} reproduce every artifact "
        f"checksum" + (f" (MISMATCH: {mismatched})" if mismatched else ""),
    )
    assert ok


def test_full_run_passes_integrity_audit(full_run):
    combined = summarize(full_run)
    assert set(combined) == {
        "curves_fig5", "scores_fig2", "outcomes_fig3", "adaptive_fig4",
        "ecosystem_fig1",
    }
