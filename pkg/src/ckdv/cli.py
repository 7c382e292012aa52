"""Command-line entry point: ``ckdv {verify,simulate,dirac-check,sweep,report}``.

Exit status: 0 when every gated check passes, 1 when one fails, 2 for an
invalid configuration, 3 when a simulation is aborted by the blow-up
detector.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import json
import logging
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__
from .dirac import VARIANT_IDS, ConstraintVariant, casimir_of_constraints_check, dirac_bracket_matrix, \
    kernel_comparison
from .dynamics import IntegratorConfig, integrate_with_monitor, miura_trajectory_defect, soliton_initial
from .errors import BlowUpError, ParameterError
from .functionals import FunctionalSpec
from .grid import GridSpec, SystemParams, random_band_limited, write_snapshots
from .pencil import DENOMINATOR_TOL, excluded_k, pencil_denominator
from .verify import DEFAULT_TOLERANCES, SCHEMA_VERSION, run_identity_suite, summarize

log = logging.getLogger("ckdv")

COMMANDS = ("verify", "simulate", "dirac-check", "sweep", "report")
EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_BLOWUP = 0, 1, 2, 3
DEFAULT_DIRAC_K = 0.5


@dataclass
class RunConfig:
    command: str
    lam: float = -1.0
    k: float | None = None
    n: int = 256
    length: float = 40.0
    seeds: list = field(default_factory=lambda: list(range(1, 11)))
    tolerances: dict = field(default_factory=dict)
    output_dir: Path | None = None
    jobs: int = 1
    # integrator
    dt: float = 1e-3
    t_end: float = 1.0
    scheme: str = "if-rk4"
    dealias: bool = True
    stride: int | None = None
    # simulate
    flow: str = "kdv"
    initial: str = "soliton"
    speed: float = 1.0
    x0: float = 0.0
    amplitude: float = 0.5
    snapshot_format: str = "csv"
    # dirac-check
    variants: list = field(default_factory=lambda: list(VARIANT_IDS))
    sizes: list = field(default_factory=lambda: [64, 128, 256])
    # sweep
    lambdas: list = field(default_factory=list)
    ks: list = field(default_factory=list)
    mode: str = "verify"
    # report
    inputs: list = field(default_factory=list)

    @property
    def grid(self) -> GridSpec:
        return GridSpec(self.n, self.length)

    @property
    def integrator(self) -> IntegratorConfig:
        return IntegratorConfig(self.dt, self.t_end, self.scheme, self.dealias, self.stride)

    def tolerance(self, name: str) -> float:
        return self.tolerances.get(name, DEFAULT_TOLERANCES[name])


def check_params(lam: float, k: float | None, needs_nonzero_lambda: bool = False) -> None:
    """Reject invalid couplings and pencil weights with a message naming the constraint."""
    if not math.isfinite(lam):
        raise ParameterError(f"lambda must be finite, got {lam!r}")
    if needs_nonzero_lambda and lam == 0:
        raise ParameterError("lambda=0 invalid for J1: bracket not well defined at lambda=0")
    if k is None:
        return
    if not math.isfinite(k):
        raise ParameterError(f"k must be finite, got {k!r}")
    if lam == 0 and k == 1:
        raise ParameterError("lambda=0 with k=1 is invalid: the pencil requires k != 1 when lambda=0")
    if abs(pencil_denominator(lam, k)) <= DENOMINATOR_TOL:
        raise ParameterError(
            f"pencil denominator zero: k={k!r} is in the excluded set {excluded_k(lam)} for lambda={lam!r}")


def validate(config: RunConfig) -> None:
    if config.command not in COMMANDS:
        raise ParameterError(f"unknown command {config.command!r}")
    GridSpec(config.n, config.length)
    if config.jobs < 1:
        raise ParameterError("--jobs must be >= 1")
    unknown = set(config.tolerances) - set(DEFAULT_TOLERANCES)
    if unknown:
        raise ParameterError(f"unknown tolerance names {sorted(unknown)}; known: {sorted(DEFAULT_TOLERANCES)}")
    if config.command == "sweep":
        if not config.lambdas:
            raise ParameterError("sweep needs a non-empty lambda list")
        if config.mode not in ("verify", "simulate"):
            raise ParameterError("sweep mode must be verify or simulate")
        return
    if config.command == "report":
        if not config.inputs:
            raise ParameterError("report needs at least one input report")
        return
    check_params(config.lam, config.k)
    if config.command == "simulate":
        config.integrator
        if config.flow not in ("kdv", "mkdv"):
            raise ParameterError(f"unknown flow {config.flow!r}")
        if config.initial not in ("soliton", "random"):
            raise ParameterError(f"unknown initial data {config.initial!r}")
        if config.snapshot_format not in ("csv", "binary"):
            raise ParameterError("snapshot format must be csv or binary")
    if config.command == "dirac-check":
        bad = [v for v in config.variants if v not in VARIANT_IDS]
        if bad:
            raise ParameterError(f"unknown constraint variants {bad}")
        if config.lam == 0 and any(v in ("L1", "L1M") for v in config.variants):
            raise ParameterError("lambda=0 invalid for L1/L1M: constraints are first class at lambda=0")
        if len(config.sizes) < 3:
            raise ParameterError("dirac-check needs at least three grid sizes")


# -- output helpers ------------------------------------------------------------------

def _jsonable(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return "inf" if obj > 0 else ("-inf" if obj < 0 else "nan")
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return _jsonable(obj.item())
    if isinstance(obj, Path):
        return str(obj)
    return obj


def dump_json(data) -> str:
    return json.dumps(_jsonable(data), indent=2, sort_keys=True) + "\n"


def _write(config: RunConfig, name: str, text: str) -> Path | None:
    if config.output_dir is None:
        return None
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / name
    path.write_text(text)
    return path


def _config_block(config: RunConfig) -> dict:
    return {"lambda": config.lam, "k": config.k, "n": config.n, "length": config.length,
            "seeds": list(config.seeds)}


# -- commands ------------------------------------------------------------------------

def run_verify(config: RunConfig) -> tuple[int, dict]:
    recs = run_identity_suite(config.lam, config.k, config.grid, config.seeds, config.tolerances)
    summary = summarize(recs)
    report = {"schema_version": SCHEMA_VERSION, "command": "verify", "config": _config_block(config),
              "summary": summary, "records": [r.as_dict() for r in recs]}
    _write(config, "verify.json", dump_json(report))
    return (EXIT_OK if summary["passed"] else EXIT_FAIL), report


def _monitors(config: RunConfig):
    lam = config.lam
    ids = ["H1", "H2", "H1M", "H2M"] if lam != 0 else ["H2", "H2M"]
    specs = [FunctionalSpec(i, lam) for i in ids]
    if config.k is not None:
        specs.append(FunctionalSpec("Hk", lam, config.k))
    specs += [FunctionalSpec("MassU", lam), FunctionalSpec("MassV", lam)]
    return specs


def _initial(config: RunConfig):
    grid = config.grid
    if config.initial == "soliton":
        return soliton_initial(config.speed, config.x0, grid)
    return random_band_limited(config.seeds[0], grid, max(1, min(10, grid.n // 8)), config.amplitude)


def _trajectory_rows(traj, observed):
    x = traj.grid.x
    yield ["t", "x", "u", "v"]
    for t, pair in zip(traj.times, observed):
        u, v = pair.arrays()
        for xi, ui, vi in zip(x, u, v):
            yield [repr(float(t)), repr(float(xi)), repr(float(ui)), repr(float(vi))]


def _csv_text(rows) -> str:
    import io
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for row in rows:
        w.writerow(row)
    return buf.getvalue()


def run_simulate(config: RunConfig) -> tuple[int, dict]:
    params = SystemParams(config.lam)
    cfg = config.integrator
    initial = _initial(config)
    start = time.perf_counter()
    base = {"schema_version": SCHEMA_VERSION, "command": "simulate", "config": _config_block(config),
            "integrator": {"dt": cfg.dt, "t_end": cfg.t_end, "scheme": cfg.scheme, "dealias": cfg.dealias,
                           "steps": cfg.steps, "stride": cfg.snapshot_stride},
            "flow": config.flow, "initial": config.initial}
    try:
        traj, report = integrate_with_monitor(cfg, params, initial, config.flow, _monitors(config),
                                              seed=config.seeds[0])
    except BlowUpError as exc:
        summary = dict(base, status="blow-up", passed=False,
                       diagnostic={"message": str(exc), "step": exc.step, "time": exc.time,
                                   "max_abs": exc.max_abs},
                       wall_time=time.perf_counter() - start)
        _write(config, "summary.json", dump_json(summary))
        return EXIT_BLOWUP, summary
    drifts = report.drifts
    tol = config.tolerance("conservation")
    summary = dict(base, status="completed", snapshots=len(traj.times),
                   drifts=drifts, max_drift=report.max_drift, tolerance=tol,
                   passed=report.max_drift <= tol)
    if config.flow == "mkdv":
        summary["miura_trajectory_defect"] = miura_trajectory_defect(cfg, params, initial)
        summary["passed"] = summary["passed"] and summary["miura_trajectory_defect"] <= config.tolerance(
            "trajectory")
    summary["wall_time"] = time.perf_counter() - start
    observed = traj.snapshots
    if config.output_dir is not None:
        if config.snapshot_format == "binary":
            path = Path(config.output_dir)
            path.mkdir(parents=True, exist_ok=True)
            # records alternate u, v per snapshot; times go to a side table
            rows = [a for pair in observed for a in pair.arrays()]
            write_snapshots(path / "trajectory.bin", traj.grid, rows)
            _write(config, "snapshot_times.csv", _csv_text([["t"]] + [[repr(float(t))] for t in traj.times]))
        else:
            _write(config, "trajectory.csv", _csv_text(_trajectory_rows(traj, observed)))
        _write(config, "conservation.csv", _csv_text(
            [[c if isinstance(c, str) else repr(c) for c in row] for row in report.rows()]))
        _write(config, "summary.json", dump_json(summary))
    return (EXIT_OK if summary["passed"] else EXIT_FAIL), summary


def run_dirac_check(config: RunConfig) -> tuple[int, dict]:
    results, skipped = [], []
    ok = True
    rng = np.random.default_rng(config.seeds[0])
    pencil_k = config.k
    if pencil_k is None:
        pencil_k = DEFAULT_DIRAC_K if _cell_reason(config.lam, DEFAULT_DIRAC_K) is None else None
    for vid in config.variants:
        k = pencil_k if vid in ("Lk", "LkM") else None
        if vid in ("Lk", "LkM") and k is None:
            skipped.append({"variant": vid, "reason": f"default k={DEFAULT_DIRAC_K} excluded at this lambda"})
            continue
        variant = ConstraintVariant(vid, config.lam, k)
        tol = config.tolerance("dirac-modified" if variant.modified else "dirac")
        comp = kernel_comparison(variant, config.sizes, config.length, config.seeds[0], tol)
        grid = GridSpec(min(config.sizes), config.length)
        probes = [rng.standard_normal(4 * grid.n) for _ in range(10)]
        cas = casimir_of_constraints_check(variant, grid, probes)
        a = dirac_bracket_matrix(variant, grid, convention="pinv").full()
        b = dirac_bracket_matrix(variant, grid, convention="regularized").full()
        conv = float(np.max(np.abs(a - b)) / max(np.max(np.abs(a)), 1e-300))
        antisym = float(np.max(np.abs(a + a.T)) / max(np.max(np.abs(a)), 1e-300))
        rec = comp.as_dict()
        rec.update(casimir_defect=cas, casimir_tolerance=config.tolerance("dirac-casimir"),
                   convention_defect=conv, antisymmetry_defect=antisym,
                   convention_tolerance=config.tolerance("dirac-convention"))
        rec["passed"] = bool(comp.passed and cas <= rec["casimir_tolerance"]
                             and conv <= rec["convention_tolerance"]
                             and antisym <= rec["convention_tolerance"])
        ok = ok and rec["passed"]
        results.append(rec)
    report = {"schema_version": SCHEMA_VERSION, "command": "dirac-check", "config": _config_block(config),
              "results": results, "skipped": skipped, "passed": ok}
    _write(config, "dirac.json", dump_json(report))
    return (EXIT_OK if ok else EXIT_FAIL), report


def _cell_reason(lam, k):
    try:
        check_params(lam, k)
    except ParameterError as exc:
        msg = str(exc)
        return "pencil denominator zero" if "denominator" in msg else msg
    return None


def _run_cell(cell):
    config, lam, k, seed = cell
    sub = replace(config, command=config.mode, lam=lam, k=k, seeds=[seed], output_dir=None)
    try:
        if config.mode == "verify":
            code, rep = run_verify(sub)
            recs = [r for r in rep["records"] if not r["informational"]]
            worst = max((r["defect"] / r["tolerance"] for r in recs
                         if r["comparison"] == "le" and r["tolerance"] > 0), default=0.0)
            return {"status": "pass" if code == 0 else "fail", "records": rep["summary"]["records"],
                    "failed": rep["summary"]["failed"], "worst_ratio": worst, "max_drift": "",
                    "reason": ""}
        code, rep = run_simulate(sub)
        if code == EXIT_BLOWUP:
            return {"status": "blow-up", "records": "", "failed": "", "worst_ratio": "", "max_drift": "",
                    "reason": rep["diagnostic"]["message"]}
        return {"status": "pass" if code == 0 else "fail", "records": "", "failed": "", "worst_ratio": "",
                "max_drift": rep["max_drift"], "reason": ""}
    except ParameterError as exc:
        return {"status": "skipped", "records": "", "failed": "", "worst_ratio": "", "max_drift": "",
                "reason": str(exc)}


def run_sweep(config: RunConfig) -> tuple[int, dict]:
    ks = config.ks or [config.k]
    cells, rows = [], []
    for lam in config.lambdas:
        for k in ks:
            for seed in config.seeds:
                reason = _cell_reason(lam, k)
                base = {"lambda": lam, "k": "" if k is None else k, "seed": seed}
                if reason:
                    log.warning("skipping cell lambda=%s k=%s: %s", lam, k, reason)
                    rows.append(dict(base, status="skipped", records="", failed="", worst_ratio="",
                                     max_drift="", reason=reason))
                    continue
                rows.append(base)
                cells.append((len(rows) - 1, (config, lam, k, seed)))
    if config.jobs > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            outs = list(pool.map(_run_cell, [c for _, c in cells]))
    else:
        outs = [_run_cell(c) for _, c in cells]
    for (idx, _), res in zip(cells, outs):
        rows[idx].update(res)
    cols = ["lambda", "k", "seed", "status", "records", "failed", "worst_ratio", "max_drift", "reason"]
    table = [cols] + [[row[c] if not isinstance(row[c], float) else repr(row[c]) for c in cols] for row in rows]
    _write(config, "sweep.csv", _csv_text(table))
    failed = any(r["status"] in ("fail", "blow-up") for r in rows)
    report = {"schema_version": SCHEMA_VERSION, "command": "sweep", "mode": config.mode, "cells": rows,
              "passed": not failed}
    return (EXIT_FAIL if failed else EXIT_OK), report


def _report_rows(path: Path):
    data = json.loads(path.read_text())
    cmd = data.get("command")
    if cmd == "verify":
        for r in data["records"]:
            yield [str(path), cmd, r["identity"], r["structure"] or "", r["lambda"], r["k"], r["seed"],
                   r["defect"], r["tolerance"], r["passed"], r["informational"]]
    elif cmd == "dirac-check":
        for r in data["results"]:
            worst = max(max(v) for v in r["defects"].values())
            yield [str(path), cmd, "dirac-kernel", r["variant"], r["lambda"], r["k"], "", worst,
                   r["tolerance"], r["passed"], False]
    elif cmd == "simulate":
        for name, d in (data.get("drifts") or {}).items():
            yield [str(path), cmd, f"drift-{name}", "", data["config"]["lambda"], data["config"]["k"], "",
                   d, data.get("tolerance", ""), d <= data.get("tolerance", math.inf), False]
        if data.get("status") == "blow-up":
            yield [str(path), cmd, "blow-up", "", data["config"]["lambda"], data["config"]["k"], "",
                   data["diagnostic"]["max_abs"], "", False, False]
    else:
        raise ParameterError(f"{path}: not a recognized report (command={cmd!r})")


def run_report(config: RunConfig) -> tuple[int, dict]:
    """Flatten one or more JSON reports (files or directories) into a CSV table."""
    paths = []
    for item in config.inputs:
        p = Path(item)
        if p.is_dir():
            paths += sorted(p.glob("*.json"))
        elif p.exists():
            paths.append(p)
        else:
            raise ParameterError(f"report input {item} does not exist")
    cols = ["source", "command", "identity", "structure", "lambda", "k", "seed", "defect", "tolerance",
            "passed", "informational"]
    rows = [cols]
    for p in paths:
        rows.extend(_report_rows(p))
    text = _csv_text(rows)
    _write(config, "report.csv", text)
    gated = [r for r in rows[1:] if r[10] in (False, "False")]
    failed = [r for r in gated if r[9] in (False, "False")]
    summary = {"sources": [str(p) for p in paths], "rows": len(rows) - 1, "failed": len(failed),
               "csv": text}
    return (EXIT_FAIL if failed else EXIT_OK), summary


RUNNERS = {"verify": run_verify, "simulate": run_simulate, "dirac-check": run_dirac_check,
           "sweep": run_sweep, "report": run_report}


# -- argument parsing ----------------------------------------------------------------

def _floats(text):
    return [_number(t) for t in str(text).replace(",", " ").split()]


def _ints(text):
    return [int(t) for t in str(text).replace(",", " ").split()]


def _number(text):
    text = str(text).strip()
    if "/" in text:
        num, den = text.split("/", 1)
        return float(num) / float(den)
    return float(text)


def _tol_pair(text):
    if "=" not in text:
        raise argparse.ArgumentTypeError(f"expected name=value, got {text!r}")
    name, value = text.split("=", 1)
    return name.strip(), float(value)


def _bool(text):
    v = str(text).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ParameterError(f"not a boolean: {text!r}")


# key -> (RunConfig attribute, converter)
_KEYS = {
    "lambda": ("lam", _number), "k": ("k", _number), "n": ("n", int), "length": ("length", float),
    "seeds": ("seeds", _ints), "seed": ("seeds", lambda s: [int(s)]), "output_dir": ("output_dir", Path),
    "out": ("output_dir", Path), "jobs": ("jobs", int), "dt": ("dt", float), "t_end": ("t_end", float),
    "scheme": ("scheme", str), "dealias": ("dealias", _bool), "stride": ("stride", int),
    "flow": ("flow", str), "initial": ("initial", str), "speed": ("speed", float), "x0": ("x0", float),
    "amplitude": ("amplitude", float), "format": ("snapshot_format", str),
    "variants": ("variants", lambda s: str(s).replace(",", " ").split()), "sizes": ("sizes", _ints),
    "lambdas": ("lambdas", _floats), "ks": ("ks", _floats), "mode": ("mode", str),
}


def load_config_file(path) -> dict:
    """Read ``key = value`` lines grouped under section headers.

    Keys from every section are merged; ``[tolerances]`` entries become the
    per-identity tolerance map.
    """
    parser = configparser.ConfigParser()
    path = Path(path)
    if not path.exists():
        raise ParameterError(f"config file {path} does not exist")
    parser.read(path)
    values, tols = {}, {}
    for section in parser.sections():
        for key, raw in parser.items(section):
            if section == "tolerances":
                tols[key] = float(raw)
                continue
            if key not in _KEYS:
                raise ParameterError(f"unknown config key {key!r} in [{section}]")
            attr, conv = _KEYS[key]
            values[attr] = conv(raw)
    if tols:
        values["tolerances"] = tols
    return values


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--lambda", dest="lam", type=_number, help="coupling constant (default -1)")
    common.add_argument("--k", type=_number, help="pencil weight; fractions like 1/3 are accepted")
    common.add_argument("--n", type=int, help="grid points (default 256)")
    common.add_argument("--length", type=float, help="box length (default 40)")
    common.add_argument("--seed", type=int, action="append", dest="seeds", help="repeatable")
    common.add_argument("--tol", type=_tol_pair, action="append", default=[], metavar="NAME=VALUE")
    common.add_argument("--out", type=Path, help="output directory")
    common.add_argument("--jobs", type=int, help="worker processes for sweeps")
    common.add_argument("--config", type=Path, help="INI-style configuration file")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="ckdv", description="coupled KdV Hamiltonian structure toolkit")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("verify", parents=[common], help="run the algebraic identity suites")
    sim = sub.add_parser("simulate", parents=[common], help="integrate a flow with conservation monitors")
    sim.add_argument("--dt", type=float)
    sim.add_argument("--t-end", dest="t_end", type=float)
    sim.add_argument("--scheme", choices=["if-rk4", "rk4"])
    sim.add_argument("--no-dealias", dest="dealias", action="store_false", default=None)
    sim.add_argument("--stride", type=int)
    sim.add_argument("--flow", choices=["kdv", "mkdv"])
    sim.add_argument("--initial", choices=["soliton", "random"])
    sim.add_argument("--speed", type=float)
    sim.add_argument("--x0", type=float)
    sim.add_argument("--amplitude", type=float)
    sim.add_argument("--format", dest="snapshot_format", choices=["csv", "binary"])
    dc = sub.add_parser("dirac-check", parents=[common], help="rebuild brackets from constraints")
    dc.add_argument("--variant", dest="variants", action="append")
    dc.add_argument("--sizes", type=_ints)
    sw = sub.add_parser("sweep", parents=[common], help="Cartesian sweep over lambda, k and seeds")
    sw.add_argument("--lambdas", type=_floats)
    sw.add_argument("--ks", type=_floats)
    sw.add_argument("--mode", choices=["verify", "simulate"])
    for opt, dest, typ in (("--dt", "dt", float), ("--t-end", "t_end", float)):
        sw.add_argument(opt, dest=dest, type=typ)
    rp = sub.add_parser("report", parents=[common], help="tabulate JSON reports as CSV")
    rp.add_argument("inputs", nargs="+", type=Path)
    return p


def config_from_args(args) -> RunConfig:
    values = {}
    if getattr(args, "config", None) is not None:
        values.update(load_config_file(args.config))
    for attr in ("lam", "k", "n", "length", "seeds", "jobs", "dt", "t_end", "scheme", "dealias", "stride",
                 "flow", "initial", "speed", "x0", "amplitude", "snapshot_format", "variants", "sizes",
                 "lambdas", "ks", "mode", "inputs"):
        val = getattr(args, attr, None)
        if val is not None:
            values[attr] = val
    if args.out is not None:
        values["output_dir"] = args.out
    tols = dict(values.pop("tolerances", {}))
    tols.update(dict(args.tol))
    return RunConfig(command=args.command, tolerances=tols, **values)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        config = config_from_args(args)
        validate(config)
        code, report = RUNNERS[config.command](config)
    except ParameterError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    _print_summary(config, code, report)
    return code


def _print_summary(config, code, report):
    cmd = config.command
    if cmd == "verify":
        s = report["summary"]
        for r in report["records"]:
            if not r["informational"] and not r["passed"]:
                print(f"FAIL {r['identity']} {r['structure']} lambda={r['lambda']} k={r['k']} "
                      f"seed={r['seed']} defect={r['defect']} tol={r['tolerance']}")
        for r in report["records"]:
            if r["informational"] and r["seed"] in (None, config.seeds[0]):
                print(f"INFO {r['identity']} {r['structure']} k={r['k']} value={r['defect']:.3e}: {r['note']}")
        print(f"verify: {s['gated']} gated records, {s['failed']} failed, {s['informational']} informational")
    elif cmd == "simulate":
        if report["status"] == "blow-up":
            print(f"simulate aborted: {report['diagnostic']['message']}", file=sys.stderr)
        else:
            drift = ", ".join(f"{k}={v:.2e}" for k, v in report["drifts"].items())
            print(f"simulate: {report['snapshots']} snapshots, drifts {drift}")
    elif cmd == "dirac-check":
        for r in report["results"]:
            worst = max(max(v) for v in r["defects"].values())
            print(f"{r['variant']}: kernel defect {worst:.2e}, casimir {r['casimir_defect']:.2e}, "
                  f"convention {r['convention_defect']:.2e} -> {'pass' if r['passed'] else 'FAIL'}")
    elif cmd == "sweep":
        for c in report["cells"]:
            print(f"lambda={c['lambda']} k={c['k']} seed={c['seed']}: {c['status']} {c.get('reason', '')}".rstrip())
    elif cmd == "report":
        if config.output_dir is None:
            sys.stdout.write(report["csv"])
        else:
            print(f"report: {report['rows']} rows from {len(report['sources'])} files, {report['failed']} failed")
    if code == EXIT_FAIL:
        print(f"{cmd}: at least one gated check failed", file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
