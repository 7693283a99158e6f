"""Run configuration, execution, artifact writing and solver comparison."""

from __future__ import annotations

import configparser
import csv
import io
import json
import os
import tempfile
import time
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np

from .diagnostics import AuditReport, audit_trace
from .errors import ConfigurationError
from .problems import Problem, get_problem
from .solver import Baseline, SolverParams, Status, Trace, solve, solve_baseline

CSV_COLUMNS = (
    "k",
    "f",
    "grad_norm",
    "eps",
    "i_k",
    "lambda",
    "step_norm",
    "dir_dot_grad",
    "fevals_cum",
    "gevals_cum",
)

SOLVERS = ("ASDM", "FixedStep", "ClassicArmijo")
FORMATS = ("csv", "json")

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_SOLVER = 2
EXIT_AUDIT = 3

# keys accepted in config files; CLI flags use the dashed spelling
PARAM_KEYS = ("beta", "eps0", "v", "rule", "grad_tol", "max_iters", "i_cap")
LIST_OPTIONS = ("spectrum", "b", "center")


@dataclass
class RunConfig:
    problem_id: str
    solver: str = "ASDM"
    params: Dict[str, object] = field(default_factory=dict)
    x0: Optional[Sequence[float]] = None
    seed: int = 0
    output_path: Optional[str] = None
    format: str = "csv"
    problem_options: Dict[str, object] = field(default_factory=dict)
    name: str = ""

    def __post_init__(self):
        if self.solver not in SOLVERS:
            raise ConfigurationError(f"solver must be one of {SOLVERS}, got {self.solver!r}")
        if self.format not in FORMATS:
            raise ConfigurationError(f"format must be csv or json, got {self.format!r}")
        unknown = set(self.params) - set(PARAM_KEYS)
        if unknown:
            raise ConfigurationError(f"unknown solver parameters: {sorted(unknown)}")

    @property
    def label(self) -> str:
        if self.name:
            return self.name
        if self.solver == "ASDM":
            return f"ASDM-rule{int(self.params.get('rule', 1))}"
        return self.solver

    def problem(self) -> Problem:
        return get_problem(self.problem_id, **self.problem_options)

    def solver_params(self, problem: Problem) -> SolverParams:
        start = problem.start if self.x0 is None else self.x0
        if len(np.atleast_1d(start)) != problem.objective.dimension:
            raise ConfigurationError(
                f"x0 has {len(np.atleast_1d(start))} entries, problem {self.problem_id!r} "
                f"has dimension {problem.objective.dimension}"
            )
        try:
            return SolverParams(start=start, **self.params)
        except ValueError as exc:
            if isinstance(exc, ConfigurationError):
                raise
            raise ConfigurationError(str(exc)) from None


@dataclass
class RunReport:
    config: RunConfig
    trace: Trace
    audit: AuditReport
    elapsed: float

    @property
    def exit_code(self) -> int:
        if self.trace.status is Status.BACKTRACK_EXHAUSTED:
            return EXIT_SOLVER
        if not self.audit.passed:
            return EXIT_AUDIT
        return EXIT_OK

    def summary(self, include_records: bool = True) -> dict:
        tr = self.trace
        p = tr.params
        out = {
            "problem_id": tr.problem_id,
            "solver": tr.solver,
            "label": self.config.label,
            "seed": tr.seed,
            "status": tr.status.value,
            "params": {
                "beta": p.beta,
                "eps0": p.eps0,
                "v": p.v,
                "rule": int(p.rule),
                "grad_tol": p.grad_tol,
                "max_iters": p.max_iters,
                "i_cap": p.i_cap,
                "x0": [float(c) for c in p.start],
            },
            "problem_options": {k: _jsonable(v) for k, v in self.config.problem_options.items()},
            "final_x": [float(c) for c in tr.final_x],
            "final_f": tr.final_f,
            "iterations": tr.iterations,
            "fevals": tr.fevals,
            "gevals": tr.gevals,
            "thinned": tr.thinned,
            "elapsed_seconds": self.elapsed,
            "exit_code": self.exit_code,
            "audit": self.audit.to_dict(),
            "notes": list(tr.notes),
            "columns": list(CSV_COLUMNS),
        }
        if include_records:
            out["records"] = [dict(zip(CSV_COLUMNS, row), x=[float(c) for c in r.x]) for r, row in zip(tr.records, _rows(tr))]
        return out


def _jsonable(v):
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, tuple):
        return list(v)
    return v


def _rows(trace: Trace):
    for r in trace.records:
        yield (r.k, r.f, r.grad_norm, r.eps, r.i_k, r.lam, r.step_norm, r.dir_dot_grad, r.fevals_cum, r.gevals_cum)


def _fmt(v) -> str:
    # repr of a float is the shortest string that round-trips
    return repr(float(v)) if isinstance(v, float) else str(v)


def trace_to_csv(trace: Trace) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for row in _rows(trace):
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def read_trace_csv(text: str) -> List[dict]:
    """Parse CSV written by :func:`trace_to_csv` back into typed rows."""
    rows = []
    for raw in csv.DictReader(io.StringIO(text)):
        rows.append({k: (int(raw[k]) if k in ("k", "i_k", "fevals_cum", "gevals_cum") else float(raw[k])) for k in CSV_COLUMNS})
    return rows


def write_atomic(path: str, text: str) -> None:
    """Write via a temporary file in the target directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def execute(config: RunConfig) -> RunReport:
    """Solve and audit without writing anything."""
    problem = config.problem()
    params = config.solver_params(problem)
    t0 = time.perf_counter()
    if config.solver == "ASDM":
        trace = solve(problem.objective, params, problem.problem_id, config.seed)
    else:
        trace = solve_baseline(problem.objective, Baseline(config.solver), params, problem.problem_id, config.seed)
    elapsed = time.perf_counter() - t0
    audit = audit_trace(trace, problem.objective, problem.half_width, config.seed)
    return RunReport(config, trace, audit, elapsed)


def write_report(report: RunReport, path: str, fmt: str) -> List[str]:
    """Write the run artifacts; returns the written paths.

    JSON format writes one file with records, audit and metadata. CSV format
    writes the trace table plus ``<path>.audit.json`` without records.
    """
    if fmt == "json":
        write_atomic(path, json.dumps(report.summary(), indent=1) + "\n")
        return [path]
    write_atomic(path, trace_to_csv(report.trace))
    side = path + ".audit.json"
    write_atomic(side, json.dumps(report.summary(include_records=False), indent=1) + "\n")
    return [path, side]


def run_config(config: RunConfig) -> RunReport:
    """Execute one configured run, audit it and write its artifacts.

    Raises:
        ConfigurationError: unknown problem, bad parameters or an unwritable
            output path.
    """
    report = execute(config)
    if config.output_path:
        try:
            write_report(report, config.output_path, config.format)
        except OSError as exc:
            raise ConfigurationError(f"cannot write {config.output_path!r}: {exc}") from None
    return report


@dataclass
class ComparisonRow:
    label: str
    solver: str
    status: str
    iterations: int
    fevals: int
    gevals: int
    final_f: float
    final_gap: Optional[float]


def compare(configs: Sequence[RunConfig]) -> tuple:
    """Run several configurations on one problem.

    Returns:
        ``(rows, reports)``: one :class:`ComparisonRow` per config and the
        underlying run reports.
    """
    configs = list(configs)
    if len(configs) < 2:
        raise ConfigurationError("compare needs at least two configurations")
    keys = {(c.problem_id, json.dumps({k: _jsonable(v) for k, v in sorted(c.problem_options.items())})) for c in configs}
    if len(keys) > 1:
        raise ConfigurationError(f"compare needs a single problem, got {sorted(k[0] for k in keys)}")
    labels = [c.label for c in configs]
    if len(set(labels)) != len(labels):
        labels = [f"{lab}#{i}" for i, lab in enumerate(labels)]
    rows, reports = [], []
    for c, lab in zip(configs, labels):
        rep = run_config(c)
        f_star = c.problem().metadata.f_star
        tr = rep.trace
        gap = None if f_star is None else tr.final_f - f_star
        rows.append(ComparisonRow(lab, tr.solver, tr.status.value, tr.iterations, tr.fevals, tr.gevals, tr.final_f, gap))
        reports.append(rep)
    return rows, reports


def comparison_csv(rows: Iterable[ComparisonRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["label", "solver", "status", "iterations", "fevals", "gevals", "final_f", "final_gap"])
    for r in rows:
        w.writerow([r.label, r.solver, r.status, r.iterations, r.fevals, r.gevals, _fmt(r.final_f), "" if r.final_gap is None else _fmt(r.final_gap)])
    return buf.getvalue()


def gap_long_csv(rows: Sequence[ComparisonRow], reports: Sequence[RunReport]) -> str:
    """Long-format (solver, k, gap) table for plotting."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["solver", "k", "gap"])
    for row, rep in zip(rows, reports):
        f_star = rep.config.problem().metadata.f_star
        if f_star is None:
            continue
        for r in rep.trace.records:
            w.writerow([row.label, r.k, _fmt(r.f - f_star)])
    return buf.getvalue()


def format_table(rows: Sequence[ComparisonRow]) -> str:
    head = f"{'label':<16} {'status':<22} {'iters':>7} {'fevals':>7} {'gevals':>7} {'final gap':>12}"
    lines = [head, "-" * len(head)]
    for r in rows:
        gap = "n/a" if r.final_gap is None else f"{r.final_gap:.3e}"
        lines.append(f"{r.label:<16} {r.status:<22} {r.iterations:>7d} {r.fevals:>7d} {r.gevals:>7d} {gap:>12}")
    return "\n".join(lines)


# --- config files -------------------------------------------------------------


def _float_list(text: str) -> List[float]:
    try:
        return [float(t) for t in str(text).replace(";", ",").split(",") if t.strip()]
    except ValueError:
        raise ConfigurationError(f"expected a comma-separated list of numbers, got {text!r}") from None


_CASTS = {
    "beta": float,
    "eps0": float,
    "v": float,
    "rule": int,
    "grad_tol": float,
    "max_iters": int,
    "i_cap": int,
}


def config_from_mapping(values: Dict[str, str], name: str = "") -> RunConfig:
    """Build a :class:`RunConfig` from flat string key/value pairs."""
    vals = {k.strip().replace("-", "_"): v for k, v in values.items() if v is not None and v != ""}
    known = set(_CASTS) | set(LIST_OPTIONS) | {"problem", "solver", "x0", "seed", "output", "format", "rotation_seed"}
    unknown = set(vals) - known
    if unknown:
        raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
    if "problem" not in vals:
        raise ConfigurationError("config needs a 'problem' key")
    params = {}
    for key, cast in _CASTS.items():
        if key in vals:
            try:
                params[key] = cast(vals[key])
            except ValueError:
                raise ConfigurationError(f"{key}: cannot parse {vals[key]!r}") from None
    options: Dict[str, object] = {k: _float_list(vals[k]) for k in LIST_OPTIONS if k in vals}
    if "rotation_seed" in vals:
        options["rotation_seed"] = int(vals["rotation_seed"])
    try:
        seed = int(vals.get("seed", 0))
    except ValueError:
        raise ConfigurationError(f"seed: cannot parse {vals['seed']!r}") from None
    return RunConfig(
        problem_id=str(vals["problem"]),
        solver=str(vals.get("solver", "ASDM")),
        params=params,
        x0=_float_list(vals["x0"]) if "x0" in vals else None,
        seed=seed,
        output_path=vals.get("output"),
        format=str(vals.get("format", "csv")),
        problem_options=options,
        name=name,
    )


def read_config_file(path: str, overrides: Optional[Dict[str, str]] = None) -> List[RunConfig]:
    """Parse a key=value file with one ``[section]`` per run.

    Keys before the first section (or in ``[DEFAULT]``) apply to every run.
    ``overrides`` win over file values.
    """
    parser = configparser.ConfigParser(interpolation=None)
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path!r}: {exc}") from None
    if not text.lstrip().startswith("["):
        text = "[DEFAULT]\n" + text
    try:
        parser.read_string(text, source=path)
    except configparser.Error as exc:
        raise ConfigurationError(f"malformed config {path!r}: {exc}") from None
    sections = parser.sections() or ["DEFAULT"]
    configs = []
    for sec in sections:
        vals = dict(parser[sec])
        vals.update({k: v for k, v in (overrides or {}).items() if v is not None})
        configs.append(config_from_mapping(vals, name="" if sec == "DEFAULT" else sec))
    return configs
