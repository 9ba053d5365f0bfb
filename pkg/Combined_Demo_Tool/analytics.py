"""
Analytics tools:
- load_run: one row of headline numbers from a run directory's summary.json
- compare_runs: comparison table over several run directories (e.g. viscous vs
  inviscid from the same w0, or the q2 sweep) written to analytics.csv
"""

import json
import os
import sys

import pandas as pd


def load_run(run_dir: str) -> dict:
    with open(os.path.join(run_dir, "summary.json"), encoding="utf-8") as f:
        summary = json.load(f)
    with open(os.path.join(run_dir, "scenario.json"), encoding="utf-8") as f:
        scenario = json.load(f)
    ctrl = scenario["controller"]
    conv = summary["convergence"]
    return {
        "run": os.path.basename(os.path.normpath(run_dir)),
        "controller": f"{ctrl['family']}_{'viscous' if ctrl['viscous'] else 'inviscid'}",
        "q2": scenario["potentials"]["q2"] if ctrl["viscous"] else 0.0,
        "seed": scenario["init"].get("seed"),
        "passed": summary["passed"],
        "H0": summary["H0"],
        "final_clf": summary["metrics"]["final_clf"],
        "min_gap": summary["metrics"]["min_gap"],
        "max_control": summary["max_control"],
        "max_steering_offset": summary["metrics"]["max_steering_offset"],
        "angular_error_end": conv["sup_angular_error"]["end"],
        "accel_end": conv["sup_accel"]["end"],
        "orientation_end": conv["sup_orientation"]["end"],
        "converged": conv["converged"],
    }


def compare_runs(run_dirs, out_csv="analytics.csv") -> pd.DataFrame:
    """Side-by-side table; no ordering between runs is asserted."""
    df = pd.DataFrame([load_run(d) for d in run_dirs])
    df.to_csv(out_csv, index=False, lineterminator="\n")
    print(f"Wrote {out_csv}")
    return df


if __name__ == "__main__":
    if len(sys.argv) < 2:
        print("Usage: python Combined_Demo_Tool/analytics.py <run-dir> [<run-dir> ...]")
        sys.exit(1)
    print(compare_runs(sys.argv[1:]).to_string(index=False))
