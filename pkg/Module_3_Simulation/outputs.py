"""
Run outputs: trajectory.csv, metrics.csv, scenario.json (echo), summary.json
and the generated plot scripts. CSV files are UTF-8 with '\n' line endings
and full float precision, so identical runs give byte-identical files.
"""

from typing import Dict, Iterable, Optional
import json
import os

import numpy as np
import pandas as pd

from .runner import RunResult
from .scenario import scenario_json
from . import events as ev

FLOAT_FORMAT = "%.17g"

# (file stem, metrics column, y label, log scale)
FIGURES = [
    ("angular_error", "sup_angular_error", "max_i |v_i/r_i - omega*|", True),
    ("accel", "sup_accel", "max_i |F_i|", True),
    ("clf", "clf", "CLF", True),
    ("min_gap", "min_gap", "min_{i != j} d_ij", False),
    ("orientation", "sup_orientation", "max_i |s_i|", True),
    ("steering_offset", "steering_offset", "max_i |delta_i - atan(sigma_i/r_i)|", False),
    ("equilibrium_residual", "equilibrium_residual", "distance to E", True),
]

PLOT_SCRIPT = '''"""Renders the figures of one run from metrics.csv (generated file)."""
import json
import os

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd

HERE = os.path.dirname(os.path.abspath(__file__))
FIGURES = {figures!r}


def main():
    metrics = pd.read_csv(os.path.join(HERE, "metrics.csv"))
    with open(os.path.join(HERE, "scenario.json"), encoding="utf-8") as f:
        scenario = json.load(f)
    ctrl = scenario["controller"]
    # titles follow the controller that produced the run
    label = ctrl["family"].upper() + (" viscous" if ctrl["viscous"] else " inviscid")
    for stem, column, ylabel, logy in FIGURES:
        fig, ax = plt.subplots(figsize=(7, 4))
        ax.plot(metrics["t"], metrics[column])
        if logy and (metrics[column] > 0).all():
            ax.set_yscale("log")
        if column == "min_gap":
            ax.axhline(min(scenario["ring"]["L"]) if isinstance(scenario["ring"]["L"], list)
                       else scenario["ring"]["L"], color="red", linestyle="--", label="L")
            ax.legend()
        ax.set_xlabel("t [s]")
        ax.set_ylabel(ylabel)
        ax.set_title(label + ": " + ylabel)
        fig.tight_layout()
        fig.savefig(os.path.join(HERE, "fig_" + stem + ".png"), dpi=120)
        plt.close(fig)


if __name__ == "__main__":
    main()
'''

COMPARISON_SCRIPT = '''"""Overlays one metrics column of several runs (generated file)."""
import os
import sys

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd

HERE = os.path.dirname(os.path.abspath(__file__))
RUNS = {runs!r}


def main(column="clf"):
    fig, ax = plt.subplots(figsize=(7, 4))
    for label, run_dir in RUNS:
        metrics = pd.read_csv(os.path.join(HERE, run_dir, "metrics.csv"))
        ax.plot(metrics["t"], metrics[column], label=label)
    ax.set_xlabel("t [s]")
    ax.set_ylabel(column)
    if column != "min_gap":
        ax.set_yscale("log")
    ax.legend()
    fig.tight_layout()
    fig.savefig(os.path.join(HERE, "compare_" + column + ".png"), dpi=120)
    plt.close(fig)


if __name__ == "__main__":
    main(*sys.argv[1:])
'''


def _write_text(path: str, text: str) -> str:
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path


def _write_csv(frame: pd.DataFrame, path: str) -> str:
    try:
        frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n", encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path


def trajectory_frame(result: RunResult) -> pd.DataFrame:
    """t, then r_i, phi_i, s_i, v_i, F_i, delta_i for each vehicle i."""
    rec = result.record
    n = rec.F.shape[1]
    cols: Dict[str, np.ndarray] = {"t": rec.t}
    for i in range(n):
        cols[f"r_{i}"] = rec.states[:, i]
        cols[f"phi_{i}"] = rec.states[:, n + i]
        cols[f"s_{i}"] = rec.states[:, 2 * n + i]
        cols[f"v_{i}"] = rec.states[:, 3 * n + i]
        cols[f"F_{i}"] = rec.F[:, i]
        cols[f"delta_{i}"] = rec.delta[:, i]
    return pd.DataFrame(cols)


def write_plot_scripts(run_dir: str) -> str:
    """Writes plot_figures.py next to the run's metrics.csv."""
    if not os.path.isfile(os.path.join(run_dir, "metrics.csv")):
        raise FileNotFoundError(f"{os.path.join(run_dir, 'metrics.csv')} not found; is {run_dir} a run directory?")
    return _write_text(os.path.join(run_dir, "plot_figures.py"), PLOT_SCRIPT.format(figures=FIGURES))


def write_comparison_script(out_dir: str, runs: Iterable[tuple]) -> str:
    """runs: (label, run directory relative to out_dir) pairs."""
    return _write_text(os.path.join(out_dir, "plot_comparison.py"),
                       COMPARISON_SCRIPT.format(runs=[tuple(r) for r in runs]))


def emit_outputs(result: RunResult, out_dir: Optional[str] = None) -> Dict[str, str]:
    """Write every output file of a run; returns {kind: path}."""
    sc = result.scenario
    out_dir = out_dir or sc.outputs.directory
    try:
        os.makedirs(out_dir, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out_dir}: {exc.strerror or exc}") from exc
    files = {
        "trajectory": _write_csv(trajectory_frame(result), os.path.join(out_dir, "trajectory.csv")),
        "metrics": _write_csv(result.metrics.to_frame(), os.path.join(out_dir, "metrics.csv")),
        "scenario": _write_text(os.path.join(out_dir, "scenario.json"), scenario_json(sc)),
        "summary": _write_text(os.path.join(out_dir, "summary.json"),
                               json.dumps(result.summary(), indent=2, sort_keys=True, default=float) + "\n"),
    }
    if sc.outputs.write_plots:
        files["plots"] = write_plot_scripts(out_dir)
    ev.emit_outputs_written(out_dir, files)
    return files

