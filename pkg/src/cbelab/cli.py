"""Command-line front end: case orchestration and deterministic CSV/JSON emission.

Subcommands: ``solve``, ``eoc``, ``reproduce``, ``optimize-alpha``, ``validate``.
Exit codes: 0 success, 1 validation failure, 2 usage/config error, 3 numerical
failure.  CSV bodies are byte-stable across runs for identical configurations;
the only header line is a comment carrying the config hash.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
import time
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .cases import (
    CaseSpec,
    ConstantKernel,
    ProductKernel,
    breakage_mass_residual,
    case_ids,
    exact_concentration,
    exact_moment,
    fragment_count,
    kernel_eval,
    registry_case,
    with_overrides,
)
from .errors import (
    CbelabError,
    DivergenceError,
    DomainError,
    NumericalError,
    StiffnessError,
    UnknownCaseError,
)
from .fvm import fvm_rhs, integrate, precompute_weights
from .grid import GridFunction, build_grid, l1_distance, l1_norm, quad_moment
from .metrics import EocReport, abs_error_grid, consecutive_term_norm, eoc, number_error
from .series import (
    ahpm_terms,
    ham_terms,
    optimize_alpha,
    oracle_table,
    oracle_terms,
    truncated_sum,
)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_USAGE = 2
EXIT_NUMERICAL = 3

_METHODS = ("fvm", "ham", "ahpm")
_FIGURES = ("table1", "fig1", "fig2", "fig3a", "fig3b", "fig4", "fig5", "fig6", "fig7")


class UsageError(Exception):
    """Bad flags or configuration; maps to exit code 2."""


# --------------------------------------------------------------------------
# configuration
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class RunConfig:
    """Effective settings of one command invocation."""

    case: str
    method: str = "fvm"
    order: int = 5
    cells: int = 300
    grid_scheme: str = "uniform"
    eps_min: float | None = None
    alpha: str = "auto"
    rmax: float | None = None
    tend: float | None = None
    times: tuple[float, ...] | None = None
    outdir: str = "runs"

    def validated(self) -> "RunConfig":
        if self.method not in _METHODS:
            raise UsageError(f"method must be one of {_METHODS}, got {self.method!r}")
        if self.order < 0:
            raise UsageError("order must be non-negative")
        if self.cells < 2:
            raise UsageError("cells must be at least 2")
        if self.grid_scheme not in ("uniform", "geometric"):
            raise UsageError(f"unknown grid scheme {self.grid_scheme!r}")
        if self.alpha != "auto":
            value = _parse_float(self.alpha, "alpha")
            if not (-1.0 <= value < 0.0):
                raise UsageError(f"fixed alpha must lie in [-1, 0), got {value}")
        try:
            case = registry_case(self.case)
            with_overrides(case, rmax=self.rmax, tend=self.tend)
        except UnknownCaseError as exc:
            raise UsageError(str(exc)) from exc
        except DomainError as exc:
            raise UsageError(str(exc)) from exc
        return self

    def resolved_case(self) -> CaseSpec:
        return with_overrides(registry_case(self.case), rmax=self.rmax, tend=self.tend)

    def hash(self) -> str:
        # identifies the result-determining settings; the output path is not one
        fields = {k: v for k, v in asdict(self).items() if k != "outdir"}
        canon = "\n".join(f"{key}={value}" for key, value in sorted(fields.items()))
        return hashlib.sha256(canon.encode()).hexdigest()[:12]


def _parse_float(text: str, name: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise UsageError(f"cannot parse {name}={text!r} as a number") from None


def _parse_times(text: str) -> tuple[float, ...]:
    try:
        values = tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise UsageError(f"cannot parse times {text!r}") from None
    if not values:
        raise UsageError("empty times list")
    return values


def load_config_file(path: str) -> dict[str, str]:
    """Flat ``key=value`` configuration; '#' starts a comment."""
    entries: dict[str, str] = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, value = line.split("=", 1)
        entries[key.strip()] = value.strip()
    return entries


_CONFIG_KEYS = {
    "case": str,
    "method": str,
    "order": int,
    "cells": int,
    "grid_scheme": str,
    "eps_min": float,
    "alpha": str,
    "rmax": float,
    "tend": float,
    "times": _parse_times,
    "outdir": str,
}


def build_config(file_values: dict[str, str], cli_values: dict) -> RunConfig:
    """Merge config-file entries with CLI flags; flags win."""
    merged: dict = {}
    for key, value in file_values.items():
        if key not in _CONFIG_KEYS:
            raise UsageError(f"unknown config key {key!r}")
        caster = _CONFIG_KEYS[key]
        try:
            merged[key] = caster(value)
        except ValueError:
            raise UsageError(f"bad value for config key {key!r}: {value!r}") from None
    for key, value in cli_values.items():
        if value is not None:
            merged[key] = value
    if "case" not in merged:
        raise UsageError("missing case id in config")
    return RunConfig(**merged).validated()


# --------------------------------------------------------------------------
# emission helpers
# --------------------------------------------------------------------------

def _fmt(value: float) -> str:
    return f"{value:.12g}"


def _write_csv(path: Path, config_hash: str, header: list[str], rows: list[list]) -> None:
    lines = [f"# config {config_hash}", ",".join(header)]
    for row in rows:
        cells = []
        for value in row:
            if isinstance(value, float):
                if not math.isfinite(value):
                    raise DivergenceError(f"non-finite value while writing {path.name}")
                cells.append(_fmt(value))
            elif value is None:
                cells.append("")
            else:
                cells.append(str(value))
        lines.append(",".join(cells))
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n")


def _write_run_json(path: Path, payload: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


# --------------------------------------------------------------------------
# solve
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ResultBundle:
    """Everything one command produced, ready for emission."""

    config: RunConfig
    concentration_rows: list[list]
    moment_rows: list[list]
    eoc_report: EocReport | None = None
    alpha_star: float | None = None
    averaged_residual: float | None = None
    fvm_steps: int | None = None


def _resolve_alpha(config: RunConfig, case, grid) -> tuple[float, float | None]:
    """Fixed or optimised control parameter, plus the residual when optimised."""
    if config.alpha == "auto":
        result = optimize_alpha(case, grid, config.order)
        return result.alpha, result.averaged_residual
    return float(config.alpha), None


def _solve_tables(config: RunConfig) -> ResultBundle:
    case = config.resolved_case()
    grid = build_grid(case.rmax, config.cells, config.grid_scheme, config.eps_min)
    times = config.times or tuple(np.linspace(0.0, case.tend, 11))
    if times[0] != 0.0:
        times = (0.0,) + tuple(times)
    alpha_star = None
    residual_star = None
    steps = None
    order_label: int | None = config.order

    if config.method == "fvm":
        solution = integrate(case, grid, times)
        snapshots = list(zip(solution.times, solution.snapshots))
        moments = [tuple(row) for row in solution.moments]
        steps = solution.step_count
        alpha_label = None
        order_label = None
    else:
        if config.method == "ham":
            alpha_star, residual_star = _resolve_alpha(config, case, grid)
            series = ham_terms(case, grid, config.order, alpha_star)
            alpha_label = alpha_star
        else:
            series = ahpm_terms(case, grid, config.order)
            alpha_label = None
        snapshots = [
            (t, truncated_sum(series, config.order, t)) for t in times
        ]
        moments = [
            tuple(quad_moment(g, n) for n in (0, 1, 2)) for _, g in snapshots
        ]

    conc_rows = []
    for t, snapshot in snapshots:
        for size, value in zip(grid.midpoints, snapshot.values):
            conc_rows.append(
                [case.id, config.method, order_label, alpha_label, float(t), float(size), float(value)]
            )
    moment_rows = [
        [case.id, config.method, float(t), m0, m1, m2]
        for (t, _), (m0, m1, m2) in zip(snapshots, moments)
    ]
    return ResultBundle(
        config=config,
        concentration_rows=conc_rows,
        moment_rows=moment_rows,
        alpha_star=alpha_star,
        averaged_residual=residual_star,
        fvm_steps=steps,
    )


def cmd_solve(config: RunConfig) -> int:
    started = time.perf_counter()
    bundle = _solve_tables(config)
    outdir = Path(config.outdir)
    chash = config.hash()
    _write_csv(
        outdir / "concentration.csv",
        chash,
        ["case", "method", "order", "alpha", "time", "size", "value"],
        bundle.concentration_rows,
    )
    _write_csv(
        outdir / "moments.csv",
        chash,
        ["case", "method", "time", "m0", "m1", "m2"],
        bundle.moment_rows,
    )
    payload = {
        "config": asdict(config),
        "config_hash": chash,
        "version": __version__,
        "wall_time_s": round(time.perf_counter() - started, 6),
    }
    if bundle.alpha_star is not None:
        payload["alpha_star"] = bundle.alpha_star
        if bundle.averaged_residual is not None:
            payload["averaged_residual"] = bundle.averaged_residual
    if bundle.fvm_steps is not None:
        payload["fvm_steps"] = bundle.fvm_steps
    _write_run_json(outdir / "run.json", payload)
    return EXIT_OK


# --------------------------------------------------------------------------
# eoc
# --------------------------------------------------------------------------

def _eoc_report(case, method: str, cells: list[int], order: int, alpha: float | None) -> EocReport:
    errors = []
    for count in cells:
        grid = build_grid(case.rmax, count)
        if method == "fvm":
            solution = integrate(case, grid, (0.0, case.tend))
            approx = solution.snapshots[-1]
        elif method == "ham":
            series = ham_terms(case, grid, order, alpha)
            approx = truncated_sum(series, order, case.tend)
        else:
            series = ahpm_terms(case, grid, order)
            approx = truncated_sum(series, order, case.tend)
        errors.append(number_error(approx, case, grid, case.tend))
    orders = [None] + [eoc(a, b) for a, b in zip(errors, errors[1:])]
    return EocReport(
        case_id=case.id,
        method=method,
        cells=tuple(cells),
        errors=tuple(errors),
        orders=tuple(orders),
    )


def _eoc_rows(report: EocReport) -> list[list]:
    return [
        [report.case_id, report.method, count, err, order_entry]
        for count, err, order_entry in zip(report.cells, report.errors, report.orders)
    ]


def cmd_eoc(config: RunConfig, cells: list[int]) -> int:
    case = config.resolved_case()
    if case.exact.concentration is None:
        raise UsageError(
            f"case {case.id!r} has no exact concentration; convergence needs one"
        )
    if len(cells) < 2:
        raise UsageError("need at least two cell counts")
    if any(b != 2 * a for a, b in zip(cells, cells[1:])):
        raise UsageError(f"cell counts must double, got {cells}")
    alpha = case.reference_alpha if config.alpha == "auto" else float(config.alpha)
    report = _eoc_report(case, config.method, cells, config.order, alpha)
    outdir = Path(config.outdir)
    _write_csv(
        outdir / "eoc.csv",
        config.hash(),
        ["case", "method", "cells", "error", "eoc"],
        _eoc_rows(report),
    )
    return EXIT_OK


# --------------------------------------------------------------------------
# reproduce
# --------------------------------------------------------------------------

def _series_for(case, grid, method: str, order: int):
    if method == "ham":
        return ham_terms(case, grid, order, case.reference_alpha)
    return ahpm_terms(case, grid, order)


def _figure_concentration(case_id: str, t: float, order: int, cells: int, chash, outdir):
    case = registry_case(case_id)
    grid = build_grid(case.rmax, cells)
    rows = []
    solution = integrate(case, grid, (0.0, t))
    for size, value in zip(grid.midpoints, solution.snapshots[-1].values):
        rows.append([case.id, "fvm", None, None, t, float(size), float(value)])
    for method in ("ham", "ahpm"):
        series = _series_for(case, grid, method, order)
        snapshot = truncated_sum(series, order, t)
        alpha = case.reference_alpha if method == "ham" else None
        for size, value in zip(grid.midpoints, snapshot.values):
            rows.append([case.id, method, order, alpha, t, float(size), float(value)])
    if case.exact.concentration is not None:
        exact = exact_concentration(case, t, grid.midpoints)
        for size, value in zip(grid.midpoints, exact):
            rows.append([case.id, "exact", None, None, t, float(size), float(value)])
    _write_csv(
        outdir / "concentration.csv",
        chash,
        ["case", "method", "order", "alpha", "time", "size", "value"],
        rows,
    )


def _figure_moments(case_id: str, order: int, cells: int, chash, outdir):
    case = registry_case(case_id)
    grid = build_grid(case.rmax, cells)
    times = np.linspace(0.0, case.tend, 11)
    rows = []
    solution = integrate(case, grid, times)
    for t, (m0, m1, m2) in zip(solution.times, solution.moments):
        rows.append([case.id, "fvm", float(t), float(m0), float(m1), float(m2)])
    for method in ("ham", "ahpm"):
        series = _series_for(case, grid, method, order)
        for t in times:
            g = truncated_sum(series, order, float(t))
            rows.append(
                [case.id, method, float(t)]
                + [quad_moment(g, n) for n in (0, 1, 2)]
            )
    for t in times:
        entry = [case.id, "exact", float(t)]
        for n in (0, 1, 2):
            try:
                entry.append(exact_moment(case, n, float(t)))
            except CbelabError:
                entry.append(None)
        rows.append(entry)
    _write_csv(
        outdir / "moments.csv",
        chash,
        ["case", "method", "time", "m0", "m1", "m2"],
        rows,
    )


def _figure_term_norms(case_id: str, order: int, cells: int, chash, outdir):
    case = registry_case(case_id)
    grid = build_grid(case.rmax, cells)
    rows = []
    for method in ("ham", "ahpm"):
        series = _series_for(case, grid, method, order)
        for m in range(1, order + 1):
            rows.append([case.id, method, m, consecutive_term_norm(series, m)])
    _write_csv(
        outdir / "term_norms.csv",
        chash,
        ["case", "method", "m", "l1_norm"],
        rows,
    )


def _figure_abs_error(case_id: str, t: float, order: int, cells: int, chash, outdir):
    case = registry_case(case_id)
    grid = build_grid(case.rmax, cells)
    rows = []
    solution = integrate(case, grid, (0.0, t))
    err = abs_error_grid(solution.snapshots[-1], case, t)
    for size, value in zip(grid.midpoints, err.values):
        rows.append([case.id, "fvm", t, float(size), float(value)])
    for method in ("ham", "ahpm"):
        series = _series_for(case, grid, method, order)
        err = abs_error_grid(truncated_sum(series, order, t), case, t)
        for size, value in zip(grid.midpoints, err.values):
            rows.append([case.id, method, t, float(size), float(value)])
    _write_csv(
        outdir / "abs_error.csv",
        chash,
        ["case", "method", "time", "size", "abs_error"],
        rows,
    )


def _figure_table1(cells: list[int], order: int, chash, outdir):
    case = registry_case("ex1")
    rows = []
    for method in _METHODS:
        report = _eoc_report(case, method, cells, order, case.reference_alpha)
        rows.extend(_eoc_rows(report))
    _write_csv(
        outdir / "eoc.csv",
        chash,
        ["case", "method", "cells", "error", "eoc"],
        rows,
    )


def cmd_reproduce(target: str, outdir_root: str, cells: int = 300) -> int:
    if target == "all":
        targets = list(_FIGURES)
    elif target in _FIGURES:
        targets = [target]
    else:
        raise UsageError(f"unknown figure id {target!r}; known: all, {', '.join(_FIGURES)}")
    base_config = RunConfig(case="ex1", cells=cells, outdir=outdir_root)
    chash = base_config.hash()
    for name in targets:
        outdir = Path(outdir_root) / name
        if name == "table1":
            _figure_table1([30, 60, 120, 240], 5, chash, outdir)
        elif name == "fig1":
            _figure_concentration("ex1", 1.0, 5, cells, chash, outdir)
        elif name == "fig2":
            _figure_moments("ex1", 5, cells, chash, outdir)
        elif name == "fig3a":
            _figure_concentration("ex2", 1.0, 5, cells, chash, outdir)
        elif name == "fig3b":
            _figure_term_norms("ex2", 5, cells, chash, outdir)
        elif name == "fig4":
            _figure_moments("ex2", 5, cells, chash, outdir)
        elif name == "fig5":
            _figure_concentration("ex3", 0.5, 3, cells, chash, outdir)
        elif name == "fig6":
            _figure_moments("ex3", 3, cells, chash, outdir)
        elif name == "fig7":
            _figure_abs_error("ex1", 1.0, 5, cells, chash, outdir)
    return EXIT_OK


# --------------------------------------------------------------------------
# optimize-alpha
# --------------------------------------------------------------------------

def cmd_optimize_alpha(config: RunConfig) -> int:
    started = time.perf_counter()
    case = config.resolved_case()
    grid = build_grid(case.rmax, config.cells, config.grid_scheme, config.eps_min)
    result = optimize_alpha(case, grid, config.order)
    payload = {
        "config": asdict(config),
        "config_hash": config.hash(),
        "case": case.id,
        "order": config.order,
        "alpha_star": result.alpha,
        "averaged_residual": result.averaged_residual,
        "reference_alpha": case.reference_alpha,
        "version": __version__,
        "wall_time_s": round(time.perf_counter() - started, 6),
    }
    _write_run_json(Path(config.outdir) / "alpha.json", payload)
    print(f"alpha* = {result.alpha:.6f}  averaged residual = {result.averaged_residual:.6e}")
    return EXIT_OK


# --------------------------------------------------------------------------
# validate
# --------------------------------------------------------------------------

def _validation_checks() -> list[tuple[str, bool, str]]:
    checks: list[tuple[str, bool, str]] = []
    rng = np.random.default_rng(20240521)

    pairs = rng.uniform(1e-3, 50.0, size=(1000, 2))
    kernels = [ProductKernel(1.0), ProductKernel(0.05), ConstantKernel(1.0)]
    sym_ok = all(
        kernel_eval(k, x, y) == kernel_eval(k, y, x) and kernel_eval(k, x, y) >= 0
        for k in kernels
        for x, y in pairs[:200]
    )
    checks.append(("kernel-symmetry", sym_ok, "K(x,y) == K(y,x) >= 0"))

    parents = rng.uniform(1e-3, 40.0, size=100)
    laws = [registry_case("ex1").breakage, registry_case("ex3").breakage]
    mass_ok = all(breakage_mass_residual(b, p) == 0.0 for b in laws for p in parents)
    checks.append(("breakage-mass", mass_ok, "fragment mass equals parent mass"))

    count_ok = (
        fragment_count(registry_case("ex1").breakage, 3.0, 1.0) == 2.0
        and fragment_count(registry_case("ex3").breakage, 3.0, 1.0) == 2.0
    )
    checks.append(("fragment-count", count_ok, "two fragments per event"))

    case1 = registry_case("ex1")
    wide = build_grid(20.0, 200)
    nodes, node_weights = np.polynomial.legendre.leggauss(20)
    half = 0.5 * wide.widths
    moment_ok = True
    for n in (0, 1, 2):
        approx = 0.0
        for node, weight in zip(nodes, node_weights):
            x = wide.midpoints + half * node
            approx += weight * float(
                np.sum(x**n * exact_concentration(case1, 0.7, x) * half)
            )
        target = exact_moment(case1, n, 0.7)
        if abs(approx - target) > 1e-6 * abs(target):
            moment_ok = False
    checks.append(("exact-moment-quadrature", moment_ok, "closed forms integrate to the published moments"))

    grid = build_grid(20.0, 1000)
    by_pair: dict[tuple[str, str], list[int]] = {}
    for case_id, method, m in oracle_table():
        by_pair.setdefault((case_id, method), []).append(m)
    worst = ("", 0.0)
    oracle_ok = True
    for (case_id, method), orders in by_pair.items():
        case = registry_case(case_id)
        if method == "ham":
            series = ham_terms(case, grid, max(orders), case.reference_alpha)
        else:
            series = ahpm_terms(case, grid, max(orders))
        for m in orders:
            alpha = case.reference_alpha if method == "ham" else None
            reference = oracle_terms(case_id, method, m, grid, alpha=alpha)
            num = series.terms[m].eval(case.tend)
            ref = reference.eval(case.tend)
            rel = l1_distance(num, ref) / max(l1_norm(ref), 1e-300)
            if rel > worst[1]:
                worst = (f"{case_id}/{method}/m={m}", rel)
            if rel > 1e-3:
                oracle_ok = False
    checks.append(
        ("oracle-equivalence", oracle_ok, f"worst {worst[0]} rel L1 {worst[1]:.2e}")
    )

    degree_ok = all(
        term.degree <= m
        for m, term in enumerate(ham_terms(case1, build_grid(10.0, 64), 4, -0.8).terms)
    )
    checks.append(("control-series-degree", degree_ok, "term m has polynomial degree m"))

    try:
        ham_terms(case1, build_grid(10.0, 16), 1, 0.5)
        alpha_ok = False
    except DomainError:
        alpha_ok = True
    checks.append(("alpha-domain", alpha_ok, "control parameter restricted to [-1, 0)"))

    small = build_grid(5.0, 16)
    weights = precompute_weights(small, case1.breakage)
    f = GridFunction(small, rng.uniform(0.0, 1.0, small.cells))
    fast = fvm_rhs(small, weights, case1.kernel, f).values
    slow = _brute_force_rhs(small, weights.table, case1, f.values)
    checks.append(
        (
            "rhs-brute-force",
            bool(np.max(np.abs(fast - slow)) <= 1e-12),
            "vectorised collision terms match the triple loop",
        )
    )
    return checks


def _brute_force_rhs(grid, table, case, f):
    mid, w = grid.midpoints, grid.widths
    n = grid.cells
    out = np.zeros(n)
    for i in range(n):
        birth = 0.0
        for j in range(i, n):
            for l in range(n):
                birth += (
                    kernel_eval(case.kernel, mid[j], mid[l])
                    * f[j]
                    * f[l]
                    * w[j]
                    * w[l]
                    * table[i, j]
                )
        death = sum(
            kernel_eval(case.kernel, mid[i], mid[j]) * f[i] * f[j] * w[j]
            for j in range(n)
        )
        out[i] = birth / w[i] - death
    return out


def cmd_validate(outdir: str | None) -> int:
    checks = _validation_checks()
    failed = [name for name, ok, _ in checks if not ok]
    for name, ok, detail in checks:
        print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    if outdir is not None:
        payload = {
            "version": __version__,
            "checks": [
                {"name": name, "passed": ok, "detail": detail}
                for name, ok, detail in checks
            ],
            "passed": not failed,
        }
        _write_run_json(Path(outdir) / "validate.json", payload)
    if failed:
        print(f"validation failed: {failed[0]}", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


# --------------------------------------------------------------------------
# argument parsing
# --------------------------------------------------------------------------

def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="flat key=value config file")
    parser.add_argument("--case", help=f"benchmark case id ({', '.join(case_ids())})")
    parser.add_argument("--method", choices=_METHODS)
    parser.add_argument("--order", type=int, help="series truncation order")
    parser.add_argument("--cells", type=int, help="grid cell count")
    parser.add_argument("--grid-scheme", dest="grid_scheme", choices=("uniform", "geometric"))
    parser.add_argument("--eps-min", dest="eps_min", type=float, help="first interior edge (geometric grids)")
    parser.add_argument("--alpha", help="'auto' or a fixed value in [-1, 0)")
    parser.add_argument("--rmax", type=float, help="truncation radius override")
    parser.add_argument("--tend", type=float, help="time horizon override")
    parser.add_argument("--times", help="comma-separated output times")
    parser.add_argument("--out", dest="outdir", help="output directory")


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    file_values = load_config_file(args.config) if args.config else {}
    cli_values = {
        "case": args.case,
        "method": args.method,
        "order": args.order,
        "cells": args.cells,
        "grid_scheme": args.grid_scheme,
        "eps_min": args.eps_min,
        "alpha": args.alpha,
        "rmax": args.rmax,
        "tend": args.tend,
        "times": _parse_times(args.times) if args.times else None,
        "outdir": args.outdir,
    }
    return build_config(file_values, cli_values)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cbelab",
        description="Finite-volume and homotopy-series solvers for collision-induced breakage",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="run one case/method and emit tables")
    _add_config_flags(p_solve)

    p_eoc = sub.add_parser("eoc", help="doubling-grid convergence table")
    _add_config_flags(p_eoc)
    p_eoc.add_argument(
        "--cell-list",
        default="30,60,120,240",
        help="comma-separated doubling cell counts",
    )

    p_rep = sub.add_parser("reproduce", help="emit benchmark figure/table data")
    p_rep.add_argument("target", help=f"all or one of {', '.join(_FIGURES)}")
    p_rep.add_argument("--out", dest="outdir", default="reproduction")
    p_rep.add_argument("--cells", type=int, default=300)

    p_alpha = sub.add_parser("optimize-alpha", help="minimise the averaged residual")
    _add_config_flags(p_alpha)

    p_val = sub.add_parser("validate", help="run oracle and invariant checks")
    p_val.add_argument("--out", dest="outdir", default=None)
    p_val.add_argument("--config", default=None, help="optional config file to check")
    return parser


def _dispatch(args: argparse.Namespace) -> int:
    if args.command == "solve":
        return cmd_solve(_config_from_args(args))
    if args.command == "eoc":
        try:
            cells = [int(v) for v in args.cell_list.split(",") if v.strip()]
        except ValueError:
            raise UsageError(f"cannot parse cell list {args.cell_list!r}") from None
        return cmd_eoc(_config_from_args(args), cells)
    if args.command == "reproduce":
        return cmd_reproduce(args.target, args.outdir, args.cells)
    if args.command == "optimize-alpha":
        config = _config_from_args(args)
        if config.method == "fvm":
            config = RunConfig(**{**asdict(config), "method": "ham"})
        return cmd_optimize_alpha(config)
    if args.command == "validate":
        if args.config:
            build_config(load_config_file(args.config), {})
        return cmd_validate(args.outdir)
    raise UsageError(f"unknown command {args.command!r}")


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _dispatch(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DivergenceError, StiffnessError, NumericalError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except CbelabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"i/o failure: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
