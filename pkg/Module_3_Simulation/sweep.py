"""
Parameter sweeps: the cartesian grid of `--vary key=v1,v2,...` overrides,
each run in its own process with its own output directory and events log.
"""

from concurrent.futures import ProcessPoolExecutor
from typing import Any, Dict, List, Optional, Sequence, Tuple
import itertools
import os

import pandas as pd

from Module_1_Ring_Model.ring_geometry import ConfigError, ConfigIssue, StateSpaceError
from Module_1_Ring_Model import utils
from .scenario import Scenario, scenario_from_dict, parse_value, with_override
from .runner import run_scenario
from .sampler import SamplingError
from .outputs import emit_outputs, write_comparison_script
from . import events as ev

EXIT_PASS, EXIT_VIOLATION, EXIT_CONFIG = 0, 1, 2


def parse_vary(items: Sequence[str]) -> Dict[str, List[Any]]:
    """['potentials.q2=0,0.05,0.1'] -> {'potentials.q2': [0, 0.05, 0.1]}"""
    out: Dict[str, List[Any]] = {}
    for item in items:
        key, sep, values = item.partition("=")
        if not sep or not key or not values:
            raise ConfigError([ConfigIssue(f"--vary expects key=v1,v2,... (got '{item}')", 0, "==", 1)])
        out[key.strip()] = [parse_value(v.strip()) for v in values.split(",")]
    return out


def sweep_grid(vary: Dict[str, List[Any]]) -> List[Dict[str, Any]]:
    keys = list(vary)
    return [dict(zip(keys, combo)) for combo in itertools.product(*(vary[k] for k in keys))]


def _run_one(job: Tuple[int, Dict[str, Any], Dict[str, Any], str]) -> Dict[str, Any]:
    index, data, overrides, run_dir = job
    os.makedirs(run_dir, exist_ok=True)
    utils.reset_events(os.path.join(run_dir, "events.log"))
    utils.set_echo(False)
    row: Dict[str, Any] = {"index": index, **overrides, "directory": run_dir}
    try:
        sc = scenario_from_dict(data)
        result = run_scenario(sc)
    except (ConfigError, SamplingError, StateSpaceError) as exc:
        row.update(exit_code=EXIT_CONFIG, detail=str(exc))
        return row
    emit_outputs(result, run_dir)
    summary = result.metrics.summary()
    row.update(exit_code=EXIT_PASS if result.passed else EXIT_VIOLATION,
               detail="" if result.passed else str(result.violation),
               H0=result.H0, max_control=result.max_control, **summary)
    return row


def run_sweep(sc: Scenario, vary: Dict[str, List[Any]], out_root: str,
              workers: Optional[int] = None) -> pd.DataFrame:
    """
    Run every grid point; returns one row per run and writes sweep.csv and
    plot_comparison.py under out_root. workers=1 runs in-process.
    """
    base = sc.to_dict()
    jobs = []
    for index, overrides in enumerate(sweep_grid(vary)):
        data = base
        for key, value in overrides.items():
            data = with_override(data, key, value)
        run_dir = os.path.join(out_root, f"run_{index:03d}")
        data = with_override(data, "outputs.directory", run_dir)
        data = with_override(data, "name", f"{sc.name}_{index:03d}")
        jobs.append((index, data, overrides, run_dir))
    os.makedirs(out_root, exist_ok=True)
    if workers == 1 or len(jobs) <= 1:
        log = utils.events_log_path()
        rows = [_run_one(job) for job in jobs]
        utils.set_events_log(log)
        utils.set_echo(True)
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_run_one, jobs))
    for row in rows:
        overrides = {k: row[k] for k in vary}
        ev.emit_sweep_run(row["index"], overrides, row["directory"], row["exit_code"])
    table = pd.DataFrame(rows).sort_values("index").reset_index(drop=True)
    table.to_csv(os.path.join(out_root, "sweep.csv"), index=False, float_format="%.17g", lineterminator="\n")
    labels = [(", ".join(f"{k}={row[k]}" for k in vary), os.path.basename(row["directory"]))
              for row in rows if row["exit_code"] != EXIT_CONFIG]
    write_comparison_script(out_root, labels)
    return table
