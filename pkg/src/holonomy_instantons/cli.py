"""Command-line runner: configuration, report serialisation and exit codes.

Exit codes: 0 when every case passes, 1 when any case fails, 2 for usage or
configuration errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import fields
from typing import Sequence

from .suites import SUITES, ConfigError, SuiteConfig, SuiteReport, run_suite

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
CSV_HEADER = ("suite", "case_id", "params", "samples", "max_residual", "tol", "pass", "notes")

# command-line flag -> SuiteConfig field
_FLAGS = {
    "suite": "suite", "kappa": "kappa", "c": "c_list", "d": "d_list", "samples": "samples",
    "seed": "seed", "tol": "tol", "r-min": "r_min", "r-max": "r_max", "rho-max": "rho_max",
    "out": "out", "format": "format",
}


# ---------------------------------------------------------------------------
# serialisation


def _json_value(x) -> str:
    if isinstance(x, bool) or x is None:
        return json.dumps(x)
    if isinstance(x, float):
        if math.isnan(x):
            return '"nan"'
        if math.isinf(x):
            return '"inf"' if x > 0 else '"-inf"'
        return format(x, ".17g")
    if isinstance(x, int):
        return str(x)
    if isinstance(x, str):
        return json.dumps(x)
    if isinstance(x, dict):
        items = sorted((str(k), v) for k, v in x.items())
        return "{" + ",".join(json.dumps(k) + ":" + _json_value(v) for k, v in items) + "}"
    if isinstance(x, (list, tuple)):
        return "[" + ",".join(_json_value(v) for v in x) + "]"
    if hasattr(x, "item"):
        return _json_value(x.item())
    raise TypeError(f"cannot serialise {type(x).__name__}")


def dumps_json(obj) -> str:
    """Compact JSON with sorted keys and 17 significant digits for every float."""
    return _json_value(obj)


def report_dict(report: SuiteReport, include_wall_time: bool = True) -> dict:
    out = {"cases": [c.as_dict() for c in report.cases], "seed": report.seed, "version": report.version}
    if include_wall_time:
        out["wall_time"] = report.wall_time
    return out


def emit_report(report: SuiteReport, fmt: str = "json", include_wall_time: bool = True) -> bytes:
    if fmt == "json":
        return (dumps_json(report_dict(report, include_wall_time)) + "\n").encode("utf-8")
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for c in report.cases:
            writer.writerow([c.suite, c.case_id, dumps_json(c.params), c.samples, format(c.max_residual, ".17g"),
                             format(c.tol, ".17g"), "true" if c.passed else "false", c.notes])
        return buf.getvalue().encode("utf-8")
    if fmt == "text":
        return _text(report).encode("utf-8")
    raise ConfigError(f"unknown format {fmt!r}")


def _text(report: SuiteReport) -> str:
    color = sys.stdout.isatty() and "NO_COLOR" not in os.environ
    ok, bad, reset = ("\033[32m", "\033[31m", "\033[0m") if color else ("", "", "")
    width = max([len(f"{c.suite}/{c.case_id}") for c in report.cases] + [4])
    lines = [f"holonomy-instantons {report.version}  seed {report.seed}", ""]
    lines.append(f"{'case':<{width}}  {'residual':>10}  {'tol':>8}  result")
    for c in report.cases:
        mark = f"{ok}PASS{reset}" if c.passed else f"{bad}FAIL{reset}"
        lines.append(f"{c.suite + '/' + c.case_id:<{width}}  {c.max_residual:>10.3e}  {c.tol:>8.1e}  {mark}"
                     + (f"  {c.notes}" if c.notes and not c.passed else ""))
    n_fail = len(report.failures())
    lines += ["", f"{len(report.cases) - n_fail} passed, {n_fail} failed in {report.wall_time:.2f} s", ""]
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# configuration


def _floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.replace(" ", "").strip("[]").split(",") if x)
    except ValueError as exc:
        raise ConfigError(f"expected a comma-separated list of numbers, got {text!r}") from exc


_CONVERTERS = {
    "suite": str, "kappa": float, "c_list": _floats, "d_list": _floats, "samples": int, "seed": int,
    "tol": float, "r_min": float, "r_max": float, "rho_max": float, "out": str, "format": str,
}


def _convert(name: str, value: str):
    try:
        return _CONVERTERS[name](value)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"bad value for {name}: {value!r}") from exc


def read_config_file(path: str) -> dict:
    """key=value lines; keys are flag names (dashes or underscores); '#' starts a comment."""
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from exc
    out = {}
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.lstrip("-").replace("_", "-")
        if key not in _FLAGS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        out[_FLAGS[key]] = _convert(_FLAGS[key], value)
    return out


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="holonomy-instantons", description="Run numerical verification suites.")
    p.add_argument("--suite", choices=SUITES + ("all",), default=None)
    p.add_argument("--kappa", type=float)
    p.add_argument("--c", help="comma-separated C values")
    p.add_argument("--d", help="comma-separated D values")
    p.add_argument("--samples", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--tol", type=float, help="override residual tolerances (not exponent or lower-bound checks)")
    p.add_argument("--r-min", type=float, dest="r_min")
    p.add_argument("--r-max", type=float, dest="r_max")
    p.add_argument("--rho-max", type=float, dest="rho_max")
    p.add_argument("--out", help="output path (default: stdout)")
    p.add_argument("--format", choices=("json", "csv", "text"))
    p.add_argument("--config", help="key=value file; command-line flags take precedence")
    return p


def config_from_args(argv: Sequence[str] | None = None) -> SuiteConfig:
    args = build_parser().parse_args(argv)
    values = read_config_file(args.config) if args.config else {}
    given = vars(args)
    for flag, name in _FLAGS.items():
        key = flag.replace("-", "_")
        if given.get(key) is not None:
            v = given[key]
            values[name] = _floats(v) if name in ("c_list", "d_list") else v
    known = {f.name for f in fields(SuiteConfig)}
    return SuiteConfig(**{k: v for k, v in values.items() if k in known}).validate()


def main(argv: Sequence[str] | None = None) -> int:
    try:
        config = config_from_args(argv)
    except ConfigError as exc:
        print(f"holonomy-instantons: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    report = run_suite(config)
    data = emit_report(report, config.format)
    if config.out:
        try:
            with open(config.out, "wb") as fh:
                fh.write(data)
        except OSError as exc:
            print(f"holonomy-instantons: cannot write report: {exc}", file=sys.stderr)
            return EXIT_USAGE
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    return EXIT_OK if report.passed else EXIT_FAIL


if __name__ == "__main__":
    raise SystemExit(main())
