"""Regenerate tests/data/oracle.json from the independent references.

Run from the repository root:  python scripts/build_oracles.py
Takes a few minutes; the JSON is committed so the tests do not rerun it.
"""
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "tests"))

from oracles import GAMMA, ExpmModel, dense_first_death, zero_field_lifetime  # noqa: E402

EPS = 1e-6


def unitary_curve(B_grid, dt=0.002, horizon=60.0):
    return [dense_first_death(ExpmModel(B), dt, horizon, EPS) for B in B_grid]


def slopes(B, T):
    B, T = np.asarray(B), np.asarray(T, dtype=float)
    return np.gradient(T, B)


def main():
    t0 = time.time()
    out = {"eps": EPS}

    out["T_star_B0_dense"] = dense_first_death(ExpmModel(0.0), 0.05, 2000.0, EPS)
    out["T_star_B0_closed_form"] = zero_field_lifetime()
    out["T_E_B3p5_dense"] = dense_first_death(ExpmModel(3.5), 0.01, 200.0, EPS)
    out["T_E_B0_doubleA"] = zero_field_lifetime(A=2 * 2 * math.pi * 0.02)

    coarse_B = [round(0.02 * k, 10) for k in range(501)]
    coarse_T = unitary_curve(coarse_B)
    assert all(t is not None for t in coarse_T)
    s = slopes(coarse_B, coarse_T)
    k = int(np.argmax(np.abs(s)))
    diffs = np.abs(np.diff(coarse_T))
    r = GAMMA * np.asarray(coarse_T) ** 2 / np.abs(s)
    out["coarse"] = {
        "B": coarse_B,
        "T_E": coarse_T,
        "max_abs_step_ns": float(diffs.max()),
        "max_abs_step_B": coarse_B[int(np.argmax(diffs))],
        "steepest_B": coarse_B[k],
        "max_abs_slope": float(abs(s[k])),
        "min_r": float(r.min()),
        "argmin_r_B": coarse_B[int(np.argmin(r))],
    }
    print("coarse done", time.time() - t0, flush=True)

    center = coarse_B[k]
    fine_B = [round(center + 0.001 * j, 10) for j in range(-250, 251)]
    fine_T = unitary_curve(fine_B)
    fs = slopes(fine_B, fine_T)
    fr = GAMMA * np.asarray(fine_T) ** 2 / np.abs(fs)
    out["zoom"] = {
        "center": center,
        "B": fine_B,
        "T_E": fine_T,
        "max_abs_step_ns": float(np.abs(np.diff(fine_T)).max()),
        "max_abs_slope": float(np.abs(fs).max()),
        "min_r": float(fr.min()),
        "argmin_r_B": fine_B[int(np.argmin(fr))],
    }
    print("zoom done", time.time() - t0, flush=True)

    # window around B ~ 3 mT where the death window at t = pi/A pinches shut
    near3_B = [round(2.5 + 0.001 * j, 10) for j in range(1001)]
    near3_T = unitary_curve(near3_B)
    d3 = np.abs(np.diff(near3_T))
    s3 = slopes(near3_B, near3_T)
    out["near3"] = {
        "B": near3_B,
        "T_E": [float(t) for t in near3_T],
        "max_abs_step_ns": float(d3.max()),
        "max_abs_slope": float(np.abs(s3).max()),
        "T_E_max": float(max(near3_T)),
        "argmax_T_E_B": near3_B[int(np.argmax(near3_T))],
    }
    print("near-3 done", time.time() - t0, flush=True)

    demo_B = [0.0, 1.0, 3.0, 5.0]
    demo_T = [dense_first_death(ExpmModel(B, k_S=0.01), 0.01, 2000.0, EPS)
              for B in demo_B]
    ds = slopes(demo_B, demo_T)
    out["recombination_demo"] = {
        "k_S": 0.01,
        "B": demo_B,
        "T_E": demo_T,
        "max_abs_slope": float(np.abs(ds).max()),
    }
    print("demo done", time.time() - t0, flush=True)

    path = ROOT / "tests" / "data" / "oracle.json"
    path.write_text(json.dumps(out, indent=1) + "\n")
    print("wrote", path)


if __name__ == "__main__":
    main()
