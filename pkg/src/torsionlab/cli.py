"""Command-line entry point: ``torsionlab <scenario> [--config ...] [--out ...]``.

Each run writes ``<out>/<scenario>.csv`` and ``<out>/<scenario>.json`` and
prints a verdict table. Exit status is 0 iff every verdict passes, 1 when a
verdict fails and 2 for usage errors (unknown scenario, bad config).
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import experiments

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
SIG = 12
COMMON_KEYS = {"scenario", "seed", "output_dir", "threads"}


class ConfigError(ValueError):
    pass


# key -> (kind, default); kinds are checked by _coerce
SCHEMA: dict[str, dict[str, tuple[str, object]]] = {
    "eigencon": {
        "T_list": ("pos_list", [4, 8, 16, 32]),
        "k_max": ("pos_int", 10),
        "levels": ("int_list", [1000, 2000, 4000]),
    },
    "supertrace": {
        "T_list": ("nonneg_list", [0, 4, 16]),
        "t_list": ("pos_list", [0.1, 1.0, 10.0]),
        "n": ("pos_int", 2000),
        "n_discrete": ("pos_int", 200),
    },
    "circle-metric": {
        "T_list": ("nonneg_list", [0, 6]),
        "alpha_T": ("nonneg", 8.0),
        "tol": ("pos", 0.05),
    },
    "interval-metric": {
        "T_list": ("nonneg_list", [0, 6]),
        "tol": ("pos", 0.05),
    },
    "gluing": {
        "L": ("pos", 8.0),
        "cuts": ("cuts", [[4, 4], [3, 5]]),
        "ranks": ("int_list", [1, 2]),
        "n_bruteforce": ("pos_int", 64),
        "tol": ("pos", 1e-3),
    },
    "coupled-trace": {
        "T_list": ("pos_list", [4, 16, 64]),
        "t_list": ("unit_list", [0.2, 0.4, 0.6, 0.8, 1.0]),
        "plateau_T": ("pos", 16.0),
        "plateau_t": ("unit", 1.0),
        "zeta_T": ("pos_or_null", 4.0),
        "zeta_n_t": ("pos_int", 40),
        "cap": ("pos", 1e6),
    },
    "product": {
        "y_model": ("y_model", "points"),
        "y_points": ("pos_int", 2),
        "y_length": ("pos", 2.0 * math.pi),
        "y_kmax": ("pos_int", 200),
        "rank": ("pos_int", 1),
        "T": ("nonneg", 8.0),
        "t_list": ("pos_list", [0.1, 0.5, 1.0, 5.0]),
        "n": ("pos_int", 2000),
    },
}
THREADED = {"eigencon", "supertrace", "coupled-trace"}


@dataclass
class RunConfig:
    scenario: str
    params: dict = field(default_factory=dict)
    seed: int = 0
    output_dir: str = "out"
    threads: int = 1


def _num(x, path):
    if isinstance(x, bool) or not isinstance(x, (int, float)) or not math.isfinite(x):
        raise ConfigError(f"{path}: expected a finite number, got {x!r}")
    return x


def _coerce(kind: str, value, path: str):
    if kind.endswith("_list") or kind == "cuts":
        if not isinstance(value, list) or not value:
            raise ConfigError(f"{path}: expected a non-empty list")
        if kind == "cuts":
            out = []
            for i, c in enumerate(value):
                if not isinstance(c, list) or len(c) != 2:
                    raise ConfigError(f"{path}[{i}]: expected [L1, L2]")
                out.append([_coerce("pos", c[0], f"{path}[{i}][0]"), _coerce("pos", c[1], f"{path}[{i}][1]")])
            return out
        base = {"pos_list": "pos", "nonneg_list": "nonneg", "unit_list": "unit", "int_list": "pos_int"}[kind]
        return [_coerce(base, v, f"{path}[{i}]") for i, v in enumerate(value)]
    if kind == "pos_or_null":
        return None if value is None else _coerce("pos", value, path)
    if kind == "y_model":
        if value not in ("points", "circle"):
            raise ConfigError(f"{path}: expected 'points' or 'circle', got {value!r}")
        return value
    if kind == "pos_int":
        if isinstance(value, bool) or not isinstance(value, int) or value <= 0:
            raise ConfigError(f"{path}: expected a positive integer, got {value!r}")
        return value
    x = _num(value, path)
    if kind == "pos" and x <= 0:
        raise ConfigError(f"{path}: must be > 0")
    if kind == "nonneg" and x < 0:
        raise ConfigError(f"{path}: must be >= 0")
    if kind == "unit" and not (0 < x <= 1):
        raise ConfigError(f"{path}: must lie in (0, 1]")
    return x


def validate_config(data: dict, scenario: str | None = None) -> RunConfig:
    """Apply defaults and reject unknown keys or out-of-range values."""
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    name = data.get("scenario", scenario)
    if scenario is not None and name != scenario:
        raise ConfigError(f"scenario: config names {name!r} but the command is {scenario!r}")
    if name not in SCHEMA:
        raise ConfigError(f"scenario: unknown scenario {name!r}")
    schema = SCHEMA[name]
    for key in data:
        if key not in schema and key not in COMMON_KEYS:
            raise ConfigError(f"unknown key {key!r} for scenario {name!r}")
    params = {k: _coerce(kind, data.get(k, default), k) for k, (kind, default) in schema.items()}
    seed = data.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or not (0 <= seed < 2**64):
        raise ConfigError(f"seed: expected an unsigned 64-bit integer, got {seed!r}")
    threads = _coerce("pos_int", data.get("threads", 1), "threads")
    out = data.get("output_dir", "out")
    if not isinstance(out, str):
        raise ConfigError("output_dir: expected a string")
    return RunConfig(name, params, seed, out, threads)


def parse_config(path: str | os.PathLike, scenario: str | None = None) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return validate_config(data, scenario)


def _build_kwargs(cfg: RunConfig) -> dict:
    p = dict(cfg.params)
    if cfg.scenario == "product":
        if p.pop("y_model") == "circle":
            y = experiments.YModel.circle(p.pop("y_length"), p.pop("y_kmax"), p.pop("rank"))
            p.pop("y_points")
        else:
            y = experiments.YModel.points(p.pop("y_points"), p.pop("rank"))
            p.pop("y_length"), p.pop("y_kmax")
        p["y"] = y
    if cfg.scenario in THREADED:
        p["threads"] = cfg.threads
    return p


def run_scenario(cfg: RunConfig) -> experiments.ExperimentReport:
    report = experiments.SCENARIOS[cfg.scenario](**_build_kwargs(cfg))
    report.config = {"scenario": cfg.scenario, "seed": cfg.seed, **cfg.params}
    return report


# ---------------------------------------------------------------------------
# output


def fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if x is None:
        return ""
    if isinstance(x, (int, float)):
        if isinstance(x, float) and not math.isfinite(x):
            return repr(x)
        return f"{x:.{SIG}g}"
    return str(x)


def _round(obj):
    if isinstance(obj, bool) or obj is None:
        return obj
    if isinstance(obj, float):
        return float(f"{obj:.{SIG}g}") if math.isfinite(obj) else repr(obj)
    if isinstance(obj, dict):
        return {k: _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    return obj


def write_report(report: experiments.ExperimentReport, out_dir: str | os.PathLike) -> tuple[Path, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    keys: list[str] = []
    for r in report.rows:
        for k in r.params:
            if k not in keys:
                keys.append(k)
    csv_path = out / f"{report.scenario}.csv"
    with open(csv_path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["scenario", "check", *keys, "measured", "target", "residual", "error_estimate"])
        for r in report.rows:
            w.writerow(
                [report.scenario, r.check, *(fmt(r.params.get(k)) for k in keys), fmt(r.measured), fmt(r.target), fmt(r.residual), fmt(r.error)]
            )
    json_path = out / f"{report.scenario}.json"
    with open(json_path, "w", newline="\n") as fh:
        json.dump(_round(report.to_dict()), fh, indent=2, sort_keys=False)
        fh.write("\n")
    return csv_path, json_path


def print_verdicts(report: experiments.ExperimentReport, stream=None) -> None:
    stream = stream or sys.stdout
    width = max([len(k) for k in report.verdicts] + [8])
    print(f"{report.scenario}", file=stream)
    for name, ok in report.verdicts.items():
        print(f"  {name:<{width}}  {'PASS' if ok else 'FAIL'}", file=stream)
    for r in report.failing_rows():
        params = ", ".join(f"{k}={fmt(v)}" for k, v in r.params.items())
        print(f"  failing {r.check} [{params}] measured={fmt(r.measured)} target={fmt(r.target)} tol={fmt(r.tolerance)}", file=stream)
    for note in report.notes:
        print(f"  note: {note}", file=stream)


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="torsionlab", description="Witten-deformation torsion experiments")
    parser.add_argument("scenario", help="one of: " + ", ".join([*SCHEMA, "golden"]))
    parser.add_argument("--config", help="JSON config file")
    parser.add_argument("--out", help="output directory (overrides the config)")
    parser.add_argument("--threads", type=int, help="worker threads for parameter sweeps")
    parser.add_argument("--seed", type=int, help="seed for randomized checks")
    return parser


def _golden(args) -> int:
    from .acceptance import run_all

    seed = args.seed if args.seed is not None else 0
    out = Path(args.out or "out")
    results = run_all(seed=seed)
    rows = [experiments.Row(r.name, {"elapsed_s": r.elapsed}, float(r.passed), 1.0, passed=r.passed) for r in results]
    verdicts = {r.name: r.passed for r in results}
    report = experiments.ExperimentReport("golden", rows, verdicts, [f"{r.name}: {r.summary}" for r in results], {"seed": seed})
    write_report(report, out)
    for r in results:
        print(r.line())
    return EXIT_OK if report.passed else EXIT_FAIL


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads is not None and args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    if args.seed is not None and not (0 <= args.seed < 2**64):
        print("error: --seed must be an unsigned 64-bit integer", file=sys.stderr)
        return EXIT_USAGE
    if args.scenario == "golden":
        return _golden(args)
    if args.scenario not in SCHEMA:
        print(f"error: unknown scenario {args.scenario!r}", file=sys.stderr)
        return EXIT_USAGE
    try:
        if args.config:
            cfg = parse_config(args.config, args.scenario)
        else:
            cfg = validate_config({"scenario": args.scenario})
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.out:
        cfg.output_dir = args.out
    if args.threads is not None:
        cfg.threads = args.threads
    if args.seed is not None:
        cfg.seed = args.seed
    report = run_scenario(cfg)
    csv_path, json_path = write_report(report, cfg.output_dir)
    print_verdicts(report)
    print(f"wrote {csv_path} and {json_path}")
    return EXIT_OK if report.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
