"""Grid-search fit of the two reference logistic models.

Reproduces the shipped MODEL1_PARAMS / MODEL2_PARAMS in ftlab.growth from
the 42-member logistic grid:

  model2: minimizes the sup-norm gap to the truth curve on [0, 1.2*K_truth];
  model1: largest r among members whose net-growth peak falls within one
          default state cell of the truth's net-growth peak.

Run:  python3 scripts/fit_reference_models.py
"""

import sys

import numpy as np

from ftlab.growth import (
    MODEL1_PARAMS,
    MODEL2_PARAMS,
    TRUTH_PARAMS,
    GrowthCurve,
    default_grid_ensemble,
    growth,
)
from ftlab.mdp import uniform_state_grid


def truth_net_growth_peak(curve: GrowthCurve) -> float:
    xs = np.linspace(0.0, curve.K, 200001)
    net = growth(curve, xs) - xs
    return float(xs[int(np.argmax(net))])


def main() -> int:
    truth = GrowthCurve("skewed_true", label="truth", **TRUTH_PARAMS)
    ensemble = default_grid_ensemble()
    cell = uniform_state_grid().values[1] - uniform_state_grid().values[0]

    xs = np.linspace(0.0, 1.2 * truth.K, 1201)
    gt = growth(truth, xs)
    sup_gaps = {
        m.label: float(np.max(np.abs(growth(m.curve, xs) - gt)))
        for m in ensemble.members
    }
    model2_label = min(sup_gaps, key=sup_gaps.get)

    x_peak = truth_net_growth_peak(truth)
    near_peak = [
        m for m in ensemble.members if abs(m.curve.K / 2.0 - x_peak) <= cell
    ]
    if not near_peak:
        print(f"no member peaks within {cell} of the truth peak {x_peak:.4f}")
        return 1
    model1 = max(near_peak, key=lambda m: m.curve.r)

    print(f"truth net-growth peak: {x_peak:.6f} (state cell {cell:.4f})")
    print(f"model1 (peak-matched, largest r): {model1.label}"
          f"  [{len(near_peak)} candidate(s) near the peak]")
    print(f"model2 (sup-norm fit): {model2_label}"
          f"  gap {sup_gaps[model2_label]:.4f}")

    want1 = f"gs_r{MODEL1_PARAMS['r']}_K{MODEL1_PARAMS['K']}"
    want2 = f"gs_r{MODEL2_PARAMS['r']}_K{MODEL2_PARAMS['K']}"
    ok = model1.label == want1 and model2_label == want2
    print("matches shipped constants" if ok else
          f"MISMATCH: shipped model1={want1} model2={want2}")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
