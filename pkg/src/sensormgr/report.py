"""CSV traces of a run, their summary statistics, and the three-way
guidance comparison."""

import csv
import json
import math
import statistics
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .config import GUIDANCE_MODES
from .sim import run_scenario

HEADERS = {
    "info_scores.csv": ("time", "target_id", "score"),
    "perf_scores.csv": ("time", "sensor_id", "score"),
    "sensors.csv": ("time", "sensor_id", "x", "y", "z", "cmd_x", "cmd_y", "cmd_z"),
    "events.csv": ("time", "event", "detail"),
    "timing.csv": ("time", "sensor_id", "guidance_micros"),
}
COMPARISON_HEADER = ("time", "sensor_id", "mode", "perf_score", "x", "y", "z", "guidance_micros")


def fmt(x):
    """Nine significant digits; ``inf``/``nan`` spelled the way float() reads
    them, negative zero written as ``0``."""
    return format(float(x) + 0.0, ".9g")


@dataclass
class RunReport:
    scenario: str
    mode: str
    mean_info: dict = field(default_factory=dict)
    max_info: dict = field(default_factory=dict)
    mean_perf: dict = field(default_factory=dict)
    deployments: list = field(default_factory=list)
    median_step_micros: float = math.nan
    files: dict = field(default_factory=dict)


def _mean(values):
    return math.fsum(values) / len(values) if values else math.nan


def _step_totals(timing_rows):
    per_step = {}
    for t, _, micros in timing_rows:
        per_step[t] = per_step.get(t, 0.0) + micros
    return list(per_step.values())


def summarize(info_rows, perf_rows, timing_rows, event_rows):
    """Statistics from parsed CSV rows; the same code serves the writer and
    anyone re-reading the files."""
    by_target, by_sensor = {}, {}
    for _, l, s in info_rows:
        by_target.setdefault(l, []).append(s)
    for _, n, s in perf_rows:
        by_sensor.setdefault(n, []).append(s)
    totals = _step_totals(timing_rows)
    return dict(
        mean_info={l: _mean(v) for l, v in sorted(by_target.items())},
        max_info={l: max(v) for l, v in sorted(by_target.items())},
        mean_perf={n: _mean(v) for n, v in sorted(by_sensor.items())},
        deployments=[(t, d) for t, e, d in event_rows if e == "deploy"],
        median_step_micros=statistics.median(totals) if totals else math.nan,
    )


def _rows(log):
    info, perf, sensors, events, timing = [], [], [], [], []
    for r in log.records:
        t = fmt(r.time)
        info += [(t, str(l), fmt(s)) for l, s in enumerate(r.info_scores)]
        perf += [(t, str(n), fmt(s)) for n, s in sorted(r.perf_scores.items())]
        for n, p in sorted(r.sensor_positions.items()):
            c = r.commands[n]
            sensors.append((t, str(n), *map(fmt, p), *map(fmt, c)))
        events += [(t, e, d) for e, d in r.events]
        timing += [(t, str(n), fmt(m)) for n, m in sorted(r.guidance_micros.items())]
    return {
        "info_scores.csv": info,
        "perf_scores.csv": perf,
        "sensors.csv": sensors,
        "events.csv": events,
        "timing.csv": timing,
    }


def _write(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _numeric(rows):
    return [(float(t), int(i), float(v)) for t, i, v in rows]


def emit_traces(log, out_dir):
    """Write the five CSV traces of ``log`` under ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    tables = _rows(log)
    files = {}
    for name, header in HEADERS.items():
        files[name] = str(out / name)
        _write(out / name, header, tables[name])
    stats = summarize(
        _numeric(tables["info_scores.csv"]),
        _numeric(tables["perf_scores.csv"]),
        _numeric(tables["timing.csv"]),
        [(float(t), e, d) for t, e, d in tables["events.csv"]],
    )
    return RunReport(log.scenario, log.mode, files=files, **stats)


def read_traces(out_dir):
    """Parse the CSVs written by :func:`emit_traces` back into rows."""
    out = Path(out_dir)
    tables = {}
    for name, header in HEADERS.items():
        with open(out / name, newline="") as fh:
            reader = csv.reader(fh)
            got = tuple(next(reader))
            if got != header:
                raise ValueError(f"{name}: unexpected header {got}")
            tables[name] = list(reader)
    return tables


def summarize_dir(out_dir):
    t = read_traces(out_dir)
    return summarize(
        _numeric(t["info_scores.csv"]),
        _numeric(t["perf_scores.csv"]),
        _numeric(t["timing.csv"]),
        [(float(a), e, d) for a, e, d in t["events.csv"]],
    )


@dataclass
class Comparison:
    scenario: str
    mean_perf: dict
    median_step_micros: dict
    timing_ratio: float
    reports: dict
    logs: dict = field(repr=False)
    files: dict = field(default_factory=dict)


def compare_guidance(cfg, out_dir):
    """Run ``cfg`` once per guidance mode with the same seed.

    Modes run one after another so their wall-clock timings do not compete
    for the CPU. Writes each mode's traces under ``out_dir/<mode>``, a
    merged ``comparison.csv`` and ``comparison_summary.json``.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    logs, reports = {}, {}
    for mode in GUIDANCE_MODES:
        logs[mode] = run_scenario(cfg.with_mode(mode))
        reports[mode] = emit_traces(logs[mode], out / mode)

    merged = []
    for mode in GUIDANCE_MODES:
        for r in logs[mode].records:
            for n, s in sorted(r.perf_scores.items()):
                p = r.sensor_positions[n]
                merged.append((r.time, n, mode, s, *p, r.guidance_micros.get(n, 0.0)))
    merged.sort(key=lambda row: (row[0], row[1], GUIDANCE_MODES.index(row[2])))
    _write(out / "comparison.csv", COMPARISON_HEADER,
           [(fmt(t), str(n), m, *map(fmt, rest)) for t, n, m, *rest in merged])

    mean_perf = {m: _pooled_perf(out / m) for m in GUIDANCE_MODES}
    micros = {m: reports[m].median_step_micros for m in GUIDANCE_MODES}
    cgd = micros["conditional_gradient"]
    ratio = micros["optimal"] / cgd if cgd > 0 else math.inf
    summary = {
        "scenario": cfg.name,
        "seed": cfg.seed,
        "mean_perf_score": mean_perf,
        "median_step_guidance_micros": micros,
        "timing_ratio_optimal_to_conditional_gradient": ratio,
    }
    with open(out / "comparison_summary.json", "w") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")
    files = {"comparison.csv": str(out / "comparison.csv"),
             "comparison_summary.json": str(out / "comparison_summary.json")}
    return Comparison(cfg.name, mean_perf, micros, ratio, reports, logs, files)


def _pooled_perf(mode_dir):
    """Mean performance score over every (step, sensor) row of a run."""
    rows = _numeric(read_traces(mode_dir)["perf_scores.csv"])
    return _mean([s for _, _, s in rows])


def report_dict(report):
    return asdict(report)
