"""Direct-search tuning of the default multispecies parameterization.

The shipped constants in ftlab.ecosystem were chosen by running this script.
It builds a truth web from equilibrium targets (rates derived from the
interaction matrix so the target state is an exact fixed point), sweeps a
small set of structural knobs, and keeps parameterizations for which, over
many replicate seeds, all four default orderings hold:

  1. candidate A's forecast RMSE on (B, C) under its own recommended efforts
     is smaller than candidate B's under B's efforts;
  2. realized utility ratio of A's efforts is below B's;
  3. B's ratio is at least 0.9 of the truth-optimal regime;
  4. A's ratio is below 0.55 (the ruin actually bites).

Run:  python3 scripts/calibrate_ecosystem.py [--quick]
"""

import argparse
import itertools
import sys

import numpy as np

from ftlab.ecosystem import (
    CandidateEcoModel,
    EffortPolicy,
    FoodWeb,
    UtilitySpec,
    candidate_forecast,
    candidate_latent_init,
    evaluate_regime,
    forecast_rmse,
    interior_equilibrium,
    optimize_fixed_effort,
    simulate_truth,
)

HERRING_TARGETS = (0.55, 0.50, 0.45)
BASS_TARGET = 0.5
CORM_TARGET = 0.4


def build_truth(r_h_pull: float, c_link: float, pred_b: float, pred_c: float,
                self_h: float, comp_h: float, bass_self: float, corm_self: float,
                bass_link: float, sigma: float) -> FoodWeb:
    """Truth web with rates derived so the target state is an exact equilibrium.

    r_h_pull rescales the derived herring rates (productivity), which moves
    the equilibrium off the target; the web keeps the exact equilibrium as x0
    by re-deriving rates only for predators and letting herring rates float.
    """
    A = np.array([
        [bass_self, 0.0, bass_link, bass_link, bass_link],
        [0.0, corm_self, c_link, c_link, c_link],
        [pred_b, pred_c, self_h, comp_h, comp_h],
        [pred_b, pred_c, comp_h, self_h, comp_h],
        [pred_b, pred_c, comp_h, comp_h, self_h],
    ])
    x_eq = np.array([BASS_TARGET, CORM_TARGET, *HERRING_TARGETS])
    r = -(A @ x_eq)
    r[2:] *= r_h_pull
    # herring rates moved, so recompute the exact joint equilibrium
    eq = interior_equilibrium(r, A)
    return FoodWeb(r, A, np.full(5, sigma), eq)


def build_candidates(web: FoodWeb, pessimism: float, pess_r: float,
                     b_eh_selflimit: float, sigma: float):
    """Lumped candidates consistent with the observed equilibrium.

    Candidate A copies the per-unit trophic links; its lumped herring
    self-limitation is the true effective value times `pessimism` and its
    herring growth rate is the true mean times `pess_r`, so its latent
    herring base shrinks and the observed predators look unsupportable.
    Candidate B severs the bass links, keeps a token cormorant link, gives
    bass and cormorant self-supporting rates that hold the observed levels,
    and models herring close to the true aggregate.
    """
    eq = interior_equilibrium(web.r, web.A)
    B0, C0, H_tot = eq[0], eq[1], float(eq[2:].sum())
    # effective lumped self-limitation: mean per-unit effect of total herring
    # biomass on one herring stock (exact for a symmetric block at even split)
    a_hh_true = float(web.A[2:, 2:].sum() / 9.0)
    a_hb = float(web.A[2, 0])
    a_hc = float(web.A[2, 1])
    r_h_true = float(web.r[2:].mean()) * pess_r

    bass_link = float(web.A[0, 2])
    c_link = float(web.A[1, 2])
    bass_self = float(web.A[0, 0])
    corm_self = float(web.A[1, 1])

    A_a = np.array([
        [bass_self, 0.0, bass_link],
        [0.0, corm_self, c_link],
        [a_hb, a_hc, a_hh_true * pessimism],
    ])
    r_a = np.array([float(web.r[0]), float(web.r[1]), r_h_true])
    cand_a = CandidateEcoModel("A", r_a, A_a, np.full(3, sigma))

    r_b_bass = -bass_self * B0
    A_b = np.array([
        [bass_self, 0.0, 0.0],
        [0.0, corm_self, 0.02],
        [0.0, -0.10, b_eh_selflimit],
    ])
    r_b_herr = -b_eh_selflimit * H_tot - (-0.10) * C0
    r_b_corm = -corm_self * C0 - 0.02 * H_tot
    cand_b = CandidateEcoModel(
        "B", np.array([r_b_bass, r_b_corm, r_b_herr]), A_b, np.full(3, sigma)
    )
    return cand_a, cand_b


def run_pipeline(web, cand_a, cand_b, seed, horizon=50, reps=60, delta=0.99,
                 effort_points=21):
    spec = UtilitySpec(
        C_base=float(web.x0[1]),
        B_base=float(0.1 * web.x0[0]),
        H_base=float(0.1 * web.x0[2:].sum()),
    )
    obs = web.x0[:2]
    opt_truth = optimize_fixed_effort(web, spec, horizon, reps, delta, seed,
                                      effort_points=effort_points)
    out = {"opt": opt_truth}
    for m in (cand_a, cand_b):
        eff = optimize_fixed_effort(m, spec, horizon, reps, delta, seed,
                                    effort_points=effort_points, observed=obs)
        ev = evaluate_regime(web, eff, spec, opt_truth, horizon, reps, delta, seed)
        fc = candidate_forecast(m, obs[None, :], eff, horizon, 100, seed)
        traj, _, _ = simulate_truth(web, web.x0, eff, horizon, 100, seed, tag=9)
        rmse = forecast_rmse(fc["B_med"], fc["C_med"],
                             traj[:, :, 0].mean(axis=0), traj[:, :, 1].mean(axis=0))
        out[m.structure] = {
            "efforts": eff,
            "ratio": ev["utility_ratio_vs_truth_optimum"],
            "rmse": rmse,
        }
    return out


def orderings_hold(res):
    """(required, vivid): the three default orderings, plus a ruin depth bar."""
    a, b = res["A"], res["B"]
    required = (a["rmse"] < b["rmse"] and a["ratio"] < b["ratio"]
                and b["ratio"] >= 0.9)
    return required, required and a["ratio"] < 0.55


def verify_shipped_defaults(n_seeds: int = 30) -> int:
    """Run the production pipeline on the shipped constants over many seeds.

    Mirrors the scenario semantics: a 10-step unfished history from the
    equilibrium, candidates initialized from the last observation, management
    evaluated from the realized end state.  Prints ordering fractions.
    """
    import time

    from ftlab.ecosystem import (
        DEFAULT_HISTORY_STEPS,
        default_candidates,
        default_utility_spec,
        default_web,
    )

    web = default_web()
    cand_a, cand_b = default_candidates()
    spec = default_utility_spec(web)
    rows = []
    t0 = time.time()
    for s in range(n_seeds):
        seed = 5000 + s
        hist, _, _ = simulate_truth(web, web.x0, EffortPolicy(0.0, 0.0),
                                    DEFAULT_HISTORY_STEPS, 1, seed, tag=1)
        obs_hist = hist[0, :, :2]
        x_start = hist[0, -1, :]
        opt_truth = optimize_fixed_effort(web, spec, 50, 100, 0.99, seed,
                                          x0=x_start)
        res = {}
        for m in (cand_a, cand_b):
            eff = optimize_fixed_effort(m, spec, 50, 100, 0.99, seed,
                                        observed=obs_hist[-1])
            ev = evaluate_regime(web, eff, spec, opt_truth, 50, 100, 0.99,
                                 seed, x0=x_start)
            fc = candidate_forecast(m, obs_hist, eff, 50, 100, seed)
            traj, _, _ = simulate_truth(web, x_start, eff, 50, 100, seed, tag=9)
            rmse = forecast_rmse(fc["B_med"], fc["C_med"],
                                 traj[:, :, 0].mean(axis=0),
                                 traj[:, :, 1].mean(axis=0))
            res[m.structure] = {"efforts": eff,
                                "ratio": ev["utility_ratio_vs_truth_optimum"],
                                "rmse": rmse}
        rows.append(res)
    dt = (time.time() - t0) / n_seeds
    req = [orderings_hold(r)[0] for r in rows]
    print(f"seeds={n_seeds}  required orderings hold: {np.mean(req):.3f}  "
          f"({dt:.2f} s/seed)")
    print("  rmse_A  in", (min(r['A']['rmse'] for r in rows),
                           max(r['A']['rmse'] for r in rows)))
    print("  rmse_B  in", (min(r['B']['rmse'] for r in rows),
                           max(r['B']['rmse'] for r in rows)))
    print("  ratio_A in", (min(r['A']['ratio'] for r in rows),
                           max(r['A']['ratio'] for r in rows)))
    print("  ratio_B in", (min(r['B']['ratio'] for r in rows),
                           max(r['B']['ratio'] for r in rows)))
    effs_a = {(r['A']['efforts'].effort_bass, r['A']['efforts'].effort_herring)
              for r in rows}
    effs_b = {(r['B']['efforts'].effort_bass, r['B']['efforts'].effort_herring)
              for r in rows}
    print("  efforts_A:", sorted(effs_a))
    print("  efforts_B:", sorted(effs_b))
    return 0 if np.mean(req) == 1.0 else 1


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--quick", action="store_true", help="single knob point, few seeds")
    ap.add_argument("--verify", action="store_true",
                    help="check the shipped defaults across 30 seeds")
    args = ap.parse_args(argv)
    if args.verify:
        return verify_shipped_defaults()

    knob_grid = {
        "r_h_pull": [1.0, 1.15],
        "pessimism": [2.5, 3.5],
        "pess_r": [1.0, 0.65, 0.5],
    }
    fixed = dict(c_link=0.2333, pred_b=-0.30, pred_c=-0.20, self_h=-1.0,
                 comp_h=-0.30, bass_self=-0.70, corm_self=-0.50,
                 bass_link=0.35, sigma=0.05)
    b_eh_selflimit = -0.65
    if args.quick:
        knob_grid = {k: v[:1] for k, v in knob_grid.items()}
    seeds = range(3) if args.quick else range(4)

    best = None
    for combo in itertools.product(*knob_grid.values()):
        knobs = dict(zip(knob_grid.keys(), combo))
        try:
            web = build_truth(r_h_pull=knobs["r_h_pull"], **fixed)
            cand_a, cand_b = build_candidates(web, knobs["pessimism"],
                                              knobs["pess_r"], b_eh_selflimit,
                                              fixed["sigma"])
        except Exception as e:
            print(f"{knobs}: build failed: {e}")
            continue
        req, viv = [], []
        detail = None
        for s in seeds:
            res = run_pipeline(web, cand_a, cand_b, seed=1000 + s)
            r_ok, v_ok = orderings_hold(res)
            req.append(r_ok)
            viv.append(v_ok)
            detail = res
        score = np.mean(req) + 0.5 * np.mean(viv)
        print(f"{knobs}: req={np.mean(req):.2f} vivid={np.mean(viv):.2f}  "
              f"A={detail['A']}  B={detail['B']}  opt={detail['opt']}")
        if best is None or score > best[0]:
            best = (score, knobs, web, cand_a, cand_b)

    score, knobs, web, cand_a, cand_b = best
    print("\nbest knobs:", knobs, "score:", score)
    np.set_printoptions(precision=6, suppress=False)
    print("TRUTH_R =", tuple(round(v, 6) for v in web.r))
    print("TRUTH_A =", tuple(tuple(round(v, 6) for v in row) for row in web.A))
    print("CAND_A_R =", tuple(round(v, 6) for v in cand_a.r))
    print("CAND_A_A =", tuple(tuple(round(v, 6) for v in row) for row in cand_a.A))
    print("CAND_B_R =", tuple(round(v, 6) for v in cand_b.r))
    print("CAND_B_A =", tuple(tuple(round(v, 6) for v in row) for row in cand_b.A))
    return 0


if __name__ == "__main__":
    sys.exit(main())
