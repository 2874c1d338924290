"""Command-line front end.

    sensormgr run <scenario> [--out DIR] [--mode none|optimal|cgd] [--seed N]
    sensormgr compare <scenario> [--out DIR]
    sensormgr validate <scenario>

``<scenario>`` is a YAML file or the name of a bundled scenario. Output
goes to ``--out``, else ``$SENSORMGR_OUT``, else ``./sensormgr_out``.
Exit status: 0 on success, 2 on a parse or validation failure, 1 on a
runtime error.
"""

import argparse
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path

from .config import GUIDANCE_MODES, MODE_ALIASES, bundled_scenarios, load_bundled, parse_scenario
from .errors import ParseError, SensorMgrError, ValidationError
from .report import compare_guidance, emit_traces
from .sim import run_scenario

OUT_ENV = "SENSORMGR_OUT"
DEFAULT_OUT = "sensormgr_out"


def load_scenario(ref):
    path = Path(ref)
    if path.is_file():
        return parse_scenario(path)
    if ref in bundled_scenarios():
        return load_bundled(ref)
    raise ParseError(f"no scenario file or bundled scenario named {ref!r}")


def _out_dir(arg):
    return Path(arg or os.environ.get(OUT_ENV) or DEFAULT_OUT)


def _cmd_run(args):
    cfg = load_scenario(args.scenario)
    if args.mode:
        cfg = cfg.with_mode(args.mode)
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    report = emit_traces(run_scenario(cfg), _out_dir(args.out))
    print(f"scenario {report.scenario}  mode {report.mode}")
    for t, detail in report.deployments:
        print(f"  deploy t={t:g}s  {detail}")
    for n, s in report.mean_perf.items():
        print(f"  sensor {n}: mean perf score {s:.6g}")
    worst = max(report.max_info.items(), key=lambda kv: kv[1], default=None)
    if worst:
        print(f"  highest info score {worst[1]:.6g} (target {worst[0]})")
    print(f"  median guidance time per step {report.median_step_micros:.1f} us")
    print(f"  traces written to {Path(report.files['events.csv']).parent}")


def _cmd_compare(args):
    cfg = load_scenario(args.scenario)
    cmp = compare_guidance(cfg, _out_dir(args.out))
    print(f"scenario {cmp.scenario}")
    for mode in GUIDANCE_MODES:
        print(f"  {mode:<22} mean perf {cmp.mean_perf[mode]:.6g}  "
              f"median step guidance {cmp.median_step_micros[mode]:.1f} us")
    print(f"  timing ratio optimal:conditional_gradient {cmp.timing_ratio:.3g}")
    print(f"  summary written to {cmp.files['comparison_summary.json']}")


def _cmd_validate(args):
    cfg = load_scenario(args.scenario)
    print(f"{cfg.name}: ok ({cfg.n_targets} targets, {len(cfg.sensors)} initial sensors, "
          f"{cfg.n_steps} steps, mode {cfg.guidance_mode})")


def build_parser():
    p = argparse.ArgumentParser(prog="sensormgr", description="Airborne multisensor management simulator")
    p.add_argument("-v", "--verbose", action="store_true", help="log skipped measurements")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="simulate one scenario and write CSV traces")
    run.add_argument("scenario")
    run.add_argument("--out")
    run.add_argument("--mode", choices=("none", "optimal", "cgd", "conditional_gradient"))
    run.add_argument("--seed", type=int)
    run.set_defaults(func=_cmd_run)

    cmp = sub.add_parser("compare", help="run all three guidance modes and compare")
    cmp.add_argument("scenario")
    cmp.add_argument("--out")
    cmp.set_defaults(func=_cmd_compare)

    val = sub.add_parser("validate", help="parse and validate a scenario file")
    val.add_argument("scenario")
    val.set_defaults(func=_cmd_validate)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    if getattr(args, "mode", None):
        args.mode = MODE_ALIASES.get(args.mode, args.mode)
    try:
        args.func(args)
    except ValidationError as exc:
        print("invalid scenario:", file=sys.stderr)
        for problem in exc.problems:
            print(f"  - {problem}", file=sys.stderr)
        return 2
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 2
    except (SensorMgrError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
