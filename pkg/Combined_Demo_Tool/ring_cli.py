"""
Ring-road simulator CLI:
- run <scenario.json>                     single closed-loop run, writes outputs
- sweep <scenario.json> --vary k=v1,v2    grid of runs in parallel, one directory each
- verify <scenario.json>                  axioms, derivative and dissipation oracles, no long run
- plots <run-dir>                         (re)writes the plot script of a run

Exit codes: 0 pass, 1 monitor violation or failed check, 2 configuration error.
"""

from pathlib import Path
import argparse
import os
import sys

PROJECT_ROOT = Path(__file__).resolve().parent.parent
if str(PROJECT_ROOT) not in sys.path:
    sys.path.insert(0, str(PROJECT_ROOT))

from Module_1_Ring_Model.ring_geometry import ConfigError, StateSpaceError  # noqa: E402
from Module_1_Ring_Model import utils  # noqa: E402
from Module_3_Simulation.scenario import load_scenario  # noqa: E402
from Module_3_Simulation.sampler import SamplingError  # noqa: E402
from Module_3_Simulation.runner import run_scenario  # noqa: E402
from Module_3_Simulation.outputs import emit_outputs, write_plot_scripts  # noqa: E402
from Module_3_Simulation.sweep import run_sweep, parse_vary, EXIT_PASS, EXIT_VIOLATION, EXIT_CONFIG  # noqa: E402
from Module_3_Simulation.verification import verify_scenario  # noqa: E402


def cmd_run(args) -> int:
    sc = load_scenario(args.scenario)
    if args.t_end is not None:
        sc.integrator.t_end = args.t_end
    out_dir = args.out or sc.outputs.directory
    sc.outputs.directory = out_dir
    os.makedirs(out_dir, exist_ok=True)
    utils.reset_events(os.path.join(out_dir, "events.log"))
    result = run_scenario(sc)
    emit_outputs(result, out_dir)
    m = result.margins
    print(f"{sc.name}: {'PASS' if result.passed else 'FAIL'} after {result.steps_taken} steps; "
          f"H0={result.H0:.6g}, max|F|+|delta|={result.max_control:.6g}")
    print("  minimum margins: " + ", ".join(f"{k}={v:.6g}" for k, v in sorted(m.items())))
    print(f"  dissipation checks: {len(result.record.checks)}, unresolved {result.unresolved_checks}")
    conv = result.convergence()
    for key in ("sup_angular_error", "sup_accel", "sup_orientation"):
        c = conv[key]
        print(f"  {key}: t_end {c['end']:.3g} (t_end/2 {c['half']:.3g}), tolerance {conv['tolerance']:g}")
    if not result.passed:
        print(f"  monitor violation: {result.violation}")
        return EXIT_VIOLATION
    return EXIT_PASS


def cmd_sweep(args) -> int:
    sc = load_scenario(args.scenario)
    vary = parse_vary(args.vary)
    out_root = args.out or os.path.join("runs", f"sweep_{sc.name}")
    os.makedirs(out_root, exist_ok=True)
    utils.reset_events(os.path.join(out_root, "events.log"))
    table = run_sweep(sc, vary, out_root, workers=args.workers)
    print(table[["index", *vary.keys(), "exit_code"]].to_string(index=False))
    codes = set(table["exit_code"])
    if EXIT_CONFIG in codes:
        return EXIT_CONFIG
    return EXIT_VIOLATION if EXIT_VIOLATION in codes else EXIT_PASS


def cmd_verify(args) -> int:
    sc = load_scenario(args.scenario)
    report = verify_scenario(sc, samples=args.samples, oracle_horizon=args.horizon)
    for item in report.items:
        print(f"[{'ok' if item.passed else 'FAIL'}] {item.name}: {item.detail}")
    return EXIT_PASS if report.passed else EXIT_VIOLATION


def cmd_plots(args) -> int:
    try:
        path = write_plot_scripts(args.run_dir)
    except FileNotFoundError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_CONFIG
    print(f"Wrote {path}; render with: python {path}")
    return EXIT_PASS


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Lane-free ring-road cruise-controller simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="simulate one scenario")
    p.add_argument("scenario", help="path to a JSON scenario file")
    p.add_argument("--out", default=None, help="output directory (default: scenario outputs.directory)")
    p.add_argument("--t-end", type=float, default=None, help="override integrator.t_end")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="run a parameter grid")
    p.add_argument("scenario")
    p.add_argument("--vary", action="append", required=True, help="dotted.key=v1,v2,... (repeatable)")
    p.add_argument("--out", default=None)
    p.add_argument("--workers", type=int, default=None, help="parallel processes (1 = in-process)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="oracle checks without a long simulation")
    p.add_argument("scenario")
    p.add_argument("--samples", type=int, default=10, help="seeded states for the dissipation oracle")
    p.add_argument("--horizon", type=float, default=10.0, help="cross-model oracle horizon [s]")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("plots", help="write the plot script of a run directory")
    p.add_argument("run_dir")
    p.set_defaults(func=cmd_plots)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, SamplingError, StateSpaceError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
