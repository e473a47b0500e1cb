"""Command-line front end.

Subcommands: ``solve``, ``sweep``, ``compare``, ``fit-interp``, ``verify``.
Exit codes: 0 success, 1 verification failure, 2 configuration error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from partition_force import approx, oracle
from partition_force.errors import (
    DomainError,
    PartitionForceError,
    RegimeWarning,
    VerificationFailure,
)
from partition_force.spectrum import PhysicalScales
from partition_force.statmech import (
    EnsembleParams,
    Statistics,
    SumMode,
    average_energy_difference,
    force_bounds,
    net_force,
    solve_fugacity,
)

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

FORCE_UNIT = "E/(2sqrt(pi)a)"
T_HEADER = "t [kT/E]"


class ConfigError(DomainError):
    pass


@dataclass(frozen=True)
class Grid:
    lo: float
    hi: float
    count: int
    spacing: str

    @classmethod
    def parse(cls, text: str) -> "Grid":
        parts = text.split(":")
        if len(parts) != 4:
            raise ConfigError(f"grid must be min:max:count:{{lin,log}}, got {text!r}")
        try:
            lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError as exc:
            raise ConfigError(f"bad grid {text!r}: {exc}") from None
        spacing = parts[3].strip().lower()
        if spacing not in ("lin", "log"):
            raise ConfigError(f"grid spacing must be lin or log, got {parts[3]!r}")
        if not (0 < lo < hi and math.isfinite(hi)):
            raise ConfigError(f"grid needs 0 < min < max, got {lo}, {hi}")
        if count < 2:
            raise ConfigError(f"grid count must be >= 2, got {count}")
        return cls(lo, hi, count, spacing)

    def points(self) -> np.ndarray:
        if self.spacing == "log":
            return np.geomspace(self.lo, self.hi, self.count)
        return np.linspace(self.lo, self.hi, self.count)


@dataclass(frozen=True)
class SweepConfig:
    stats: Statistics
    N: int
    grid: Grid
    methods: tuple[str, ...]
    out: str | None = None
    fmt: str = "csv"

    def __post_init__(self):
        if not self.methods:
            raise ConfigError("at least one method is required")
        for m in self.methods:
            check_method(m, self.stats)


# --- method registry --------------------------------------------------------


class _Point:
    """Per-grid-point evaluation context; solves the exact problem at most once."""

    def __init__(self, stats, N, t, interp_spec):
        self.stats, self.N, self.t = stats, N, t
        self.interp_spec = interp_spec
        self._fug = None

    @property
    def params(self):
        return EnsembleParams.from_temperature(self.N, self.t)

    @property
    def fugacity_result(self):
        if self._fug is None:
            self._fug = solve_fugacity(self.params, self.stats)
        return self._fug


def _exact(p):
    return net_force(p.fugacity_result.alpha_tilde, p.params, p.stats).value


def _med_t(p):
    if p.stats is Statistics.FERMI:
        return approx.med_t_fermion_force(p.N, p.t).value
    return approx.med_t_boson_force(p.N, p.t).value


def _low_t(n):
    def f(p):
        if p.stats is Statistics.FERMI:
            return approx.low_t_fermion_force(p.N, p.t, n).value
        return approx.low_t_boson_force(p.N, p.t, n).value

    return f


def _boson_form(form):
    return lambda p: approx.med_t_boson_force(p.N, p.t, form).value


BOTH = frozenset(Statistics)
FERMI_ONLY = frozenset({Statistics.FERMI})
BOSE_ONLY = frozenset({Statistics.BOSE})

# tag -> (evaluator, statistics it applies to, kind)
METHODS = {
    "exact": (_exact, BOTH, "force"),
    "pade": (lambda p: approx.high_t_force_pade(p.N, p.t, p.stats).value, BOTH, "force"),
    "medT": (_med_t, BOTH, "force"),
    "medT-unsimplified": (_boson_form(approx.BosonMediumForm.UNSIMPLIFIED), BOSE_ONLY, "force"),
    "medT-prefactored": (_boson_form(approx.BosonMediumForm.PREFACTORED), BOSE_ONLY, "force"),
    "interp": (lambda p: approx.interpolated_force(p.N, p.t, p.stats, p.interp_spec).value, BOTH, "force"),
    "fugacity-exact": (lambda p: p.fugacity_result.fugacity, BOTH, "fugacity"),
    "fugacity-highT": (lambda p: approx.high_t_alpha(p.N, p.t, p.stats), BOTH, "fugacity"),
    "fugacity-highT-refined": (lambda p: approx.high_t_alpha(p.N, p.t, p.stats, refined=True), BOTH, "fugacity"),
    "fugacity-medT": (lambda p: approx.med_t_fermion_alpha(p.N, p.t), FERMI_ONLY, "fugacity"),
}
for _n in range(1, 5):
    METHODS[f"highT-{_n}"] = (
        (lambda n: lambda p: approx.high_t_force(p.N, p.t, p.stats, n).value)(_n),
        BOTH,
        "force",
    )
for _n in range(1, 6):
    METHODS[f"lowT-{_n}"] = (_low_t(_n), BOTH if _n <= 3 else FERMI_ONLY, "force")

# log(fugacity) evaluators for relative errors that survive overflow of exp(-alpha).
_LOG_FUGACITY = {
    "fugacity-exact": lambda p: -p.fugacity_result.alpha_tilde,
    "fugacity-medT": lambda p: -approx.med_t_fermion_alpha_tilde(p.N, p.t),
    "fugacity-highT": lambda p: math.log(approx.high_t_alpha(p.N, p.t, p.stats)),
    "fugacity-highT-refined": lambda p: math.log(approx.high_t_alpha(p.N, p.t, p.stats, refined=True)),
}


def check_method(tag: str, stats: Statistics):
    if tag not in METHODS:
        raise ConfigError(f"unknown method {tag!r}; choose from {', '.join(sorted(METHODS))}")
    if stats not in METHODS[tag][1]:
        raise ConfigError(f"method {tag!r} does not apply to {stats.name.lower()} statistics")


def _unit(tag):
    return FORCE_UNIT if METHODS[tag][2] == "force" else "1"


def _fmt(value):
    if value is None:
        return ""
    return format(float(value), ".17g")


def _thread_count():
    raw = os.environ.get("PARTITION_FORCE_THREADS", "0")
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"PARTITION_FORCE_THREADS must be an integer, got {raw!r}") from None
    if n < 0:
        raise ConfigError("PARTITION_FORCE_THREADS must be >= 0")
    return n if n > 0 else min(8, os.cpu_count() or 1)


def _parallel_map(func, items):
    workers = _thread_count()
    if workers == 1:
        return [func(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))


def _needs_interp(methods):
    return "interp" in methods


def _evaluate(stats, N, ts, methods, extra=None):
    """Evaluate ``methods`` at each temperature; failures become ``None``.

    ``extra`` maps a name to ``fn(point) -> value`` for derived columns.
    Returns the rows and a list of ``(t, tag, error)`` failures.
    """
    spec = approx.fit_interpolation(stats, N) if _needs_interp(methods) else None
    extra = extra or {}

    def one(t):
        p = _Point(stats, N, float(t), spec)
        row, errs = {}, []
        for tag in methods:
            try:
                row[tag] = float(METHODS[tag][0](p))
            except (PartitionForceError, ArithmeticError, ValueError) as exc:
                row[tag] = None
                errs.append((float(t), tag, f"{type(exc).__name__}: {exc}"))
        for name, fn in extra.items():
            try:
                row[name] = fn(p, row)
            except (PartitionForceError, ArithmeticError, ValueError) as exc:
                row[name] = None
                errs.append((float(t), name, f"{type(exc).__name__}: {exc}"))
        return row, errs

    results = _parallel_map(one, list(ts))
    rows = [r for r, _ in results]
    failures = [e for _, errs in results for e in errs]
    return rows, failures


def _write_table(columns, rows, out, fmt, meta=None):
    """Serialize ``rows`` (lists of floats or None) as CSV or JSON."""
    if fmt == "json":
        payload = {"meta": meta or {}, "columns": columns, "rows": rows}
        text = json.dumps(payload, indent=1, allow_nan=True) + "\n"
    else:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
        text = buf.getvalue()
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _report_failures(failures):
    if not failures:
        return
    print(f"{len(failures)} point evaluation(s) failed:", file=sys.stderr)
    for t, tag, msg in failures:
        print(f"  t={t:.6g} {tag}: {msg}", file=sys.stderr)


# --- commands ---------------------------------------------------------------


def cmd_solve(stats: Statistics, N: int, t: float, tol: float = 1e-10, fmt: str = "text", out=None) -> dict:
    """Solve one ensemble and print alpha_tilde, the force and its bounds."""
    out = out or sys.stdout
    params = EnsembleParams.from_temperature(N, t)
    fug = solve_fugacity(params, stats, tol=tol)
    direct = net_force(fug.alpha_tilde, params, stats, SumMode.DIRECT)
    resummed = (
        net_force(fug.alpha_tilde, params, stats, SumMode.RESUMMED).value if fug.alpha_tilde > 0 else None
    )
    bound_n, bound_n0 = force_bounds(fug.alpha_tilde, params, stats)
    record = {
        "statistics": stats.name.lower(),
        "N": N,
        "t": t,
        "alpha_tilde": fug.alpha_tilde,
        "fugacity": fug.fugacity,
        "residual": fug.residual,
        "delta_f_direct": direct.value,
        "delta_f_direct_tail_bound": direct.tail_bound,
        "delta_f_resummed": resummed,
        "bound_N": bound_n,
        "bound_N_plus_N0_half": bound_n0,
        "average_energy_difference": average_energy_difference(params),
        "force_unit_multiplier": PhysicalScales().force_unit,
    }
    if fmt == "json":
        out.write(json.dumps(record, indent=1) + "\n")
        return record
    units = {
        "alpha_tilde": "[1]",
        "fugacity": "[1]",
        "residual": "[1]",
        "delta_f_direct": f"[{FORCE_UNIT}]",
        "delta_f_direct_tail_bound": f"[{FORCE_UNIT}]",
        "delta_f_resummed": f"[{FORCE_UNIT}]",
        "bound_N": f"[{FORCE_UNIT}]",
        "bound_N_plus_N0_half": f"[{FORCE_UNIT}]",
        "average_energy_difference": "[E]",
        "force_unit_multiplier": "[E/a] per unit delta_f, with E = a = 1",
        "t": "[kT/E]",
    }
    for key, value in record.items():
        shown = "n/a (alpha_tilde <= 0)" if value is None else (_fmt(value) if isinstance(value, float) else value)
        out.write(f"{key} = {shown} {units.get(key, '')}".rstrip() + "\n")
    return record


def cmd_sweep(config: SweepConfig) -> list:
    """Tabulate the requested methods over the temperature grid."""
    methods = sorted(config.methods)
    ts = config.grid.points()
    rows, failures = _evaluate(config.stats, config.N, ts, methods)
    columns = [T_HEADER] + [f"{m} [{_unit(m)}]" for m in methods]
    table = [[float(t)] + [row[m] for m in methods] for t, row in zip(ts, rows)]
    meta = {"statistics": config.stats.name.lower(), "N": config.N, "grid": config.grid.__dict__}
    _write_table(columns, table, config.out, config.fmt, meta)
    _report_failures(failures)
    return table


DEFAULT_COMPARE = {
    Statistics.FERMI: ("fugacity-medT", "interp", "medT", "pade"),
    Statistics.BOSE: ("highT-3", "interp", "medT", "medT-prefactored"),
}
FUGACITY_BOUND = 1e-5


def _relative_error(tag):
    if METHODS[tag][2] == "fugacity":
        log_approx = _LOG_FUGACITY[tag]

        def err(p, row):
            return abs(math.expm1(log_approx(p) - _LOG_FUGACITY["fugacity-exact"](p)))

    else:

        def err(p, row):
            if row.get(tag) is None or row.get("exact") is None:
                return None
            return abs(row[tag] - row["exact"]) / abs(row["exact"])

    return err


def cmd_compare(stats: Statistics, N: int, grid: Grid, methods=None, out=None, fmt="csv") -> dict:
    """Relative error of each approximation against the exact solver.

    Returns ``{tag: max relative error}`` and prints one summary line per
    method; for the medium-T fermion fugacity the line also states whether
    the 1e-5 bound holds.
    """
    methods = sorted(methods or DEFAULT_COMPARE[stats])
    for m in methods:
        check_method(m, stats)
    base = ["exact"]
    if any(METHODS[m][2] == "fugacity" for m in methods):
        base.append("fugacity-exact")
    evaluated = sorted(set(base) | set(methods))
    extra = {f"relerr:{m}": _relative_error(m) for m in methods}
    ts = grid.points()
    rows, failures = _evaluate(stats, N, ts, evaluated, extra)
    columns = [T_HEADER] + [f"{m} [{_unit(m)}]" for m in evaluated] + [f"relerr:{m} [1]" for m in methods]
    table = [
        [float(t)] + [row[m] for m in evaluated] + [row[f"relerr:{m}"] for m in methods]
        for t, row in zip(ts, rows)
    ]
    summary = {}
    for m in methods:
        errs = [row[f"relerr:{m}"] for row in rows if row[f"relerr:{m}"] is not None]
        summary[m] = max(errs) if errs else None
    meta = {"statistics": stats.name.lower(), "N": N, "grid": grid.__dict__, "max_relative_error": summary}
    _write_table(columns, table, out, fmt, meta)
    stream = sys.stderr if out is None else sys.stdout
    for m in methods:
        worst = summary[m]
        line = f"max relative error {m}: {'n/a' if worst is None else format(worst, '.3e')}"
        if m == "fugacity-medT" and worst is not None:
            line += f" (bound {FUGACITY_BOUND:g}: {'holds' if worst <= FUGACITY_BOUND else 'VIOLATED'})"
        print(line, file=stream)
    _report_failures(failures)
    return summary


def cmd_fit_interp(stats: Statistics, N: int, out=None) -> approx.InterpolationSpec:
    out = out or sys.stdout
    spec = approx.fit_interpolation(stats, N)
    out.write(f"statistics = {stats.name.lower()}\nN = {N}\n")
    out.write(f"variable = {spec.variable.value}\n")
    out.write(f"x_star = {spec.x_star:.10g}\n")
    if spec.p_raw is not None:
        out.write(f"p_raw = {spec.p_raw:.6g}\n")
    out.write(f"p = {spec.p:g}\n")
    if spec.tangent is not None:
        (t1, g1), (t2, g2), slope = spec.tangent
        out.write(f"tangent_low = ({t1:.6g}, {g1:.6g})\n")
        out.write(f"tangent_high = ({t2:.6g}, {g2:.6g})\n")
        out.write(f"tangent_slope = {slope:.6g}\n")
    return spec


def cmd_verify(k_max: int = 5, delta: float = 1e-3, tol: float = 1e-3, out=None) -> int:
    """Run the shooting oracle for ``k = 0..k_max``; returns the exit status."""
    if not 0 <= k_max <= 20:
        raise ConfigError(f"k_max must lie in [0, 20], got {k_max}")
    report = oracle.verify_delta_f(range(k_max + 1), delta, tol, raise_on_failure=False)
    text = report.table()
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    sys.stdout.write(text)
    if report.passed:
        print(f"verification passed for k = 0..{k_max}")
        return EXIT_OK
    floor = max(row[5] for row in report.rows)
    print(
        f"verification FAILED for k in {report.failures}: tol={tol:g} is below the accuracy "
        f"of central differences at delta={delta:g} (observed floor ~{floor:.1e}, set by the "
        f"O(delta^2) truncation and ~1e-12 eigenvalue noise divided by delta)",
        file=sys.stderr,
    )
    return EXIT_VERIFY


# --- argument parsing -------------------------------------------------------


def _stats_arg(text):
    try:
        return Statistics.parse(text)
    except DomainError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _grid_arg(text):
    try:
        return Grid.parse(text)
    except ConfigError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _methods_arg(text):
    return tuple(m.strip() for m in text.split(",") if m.strip())


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="partition-force",
        description="Statistical force on a Dirichlet/Neumann wall in a harmonic trap.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, temp=False, grid=False):
        p.add_argument("--stats", type=_stats_arg, required=True, help="bose or fermi")
        p.add_argument("--particles", type=int, required=True, help="particles per side N")
        if temp:
            p.add_argument("--temp", type=float, required=True, help="rescaled temperature t = kT/E")
        if grid:
            p.add_argument("--grid", type=_grid_arg, required=True, help="min:max:count:{lin,log}")

    p = sub.add_parser("solve", help="solve a single (N, t) point")
    common(p, temp=True)
    p.add_argument("--tol", type=float, default=1e-10, help="relative tolerance on the number constraint")
    p.add_argument("--format", choices=("text", "json"), default="text")

    p = sub.add_parser("sweep", help="tabulate methods over a temperature grid")
    common(p, grid=True)
    p.add_argument("--methods", type=_methods_arg, default=("exact",))
    p.add_argument("--out")
    p.add_argument("--format", choices=("csv", "json"), default="csv")

    p = sub.add_parser("compare", help="relative errors of approximations against the exact solver")
    common(p, grid=True)
    p.add_argument("--methods", type=_methods_arg, default=None)
    p.add_argument("--out")
    p.add_argument("--format", choices=("csv", "json"), default="csv")

    p = sub.add_parser("fit-interp", help="fit the regime interpolation")
    common(p)

    p = sub.add_parser("verify", help="check the level force coefficients by shooting")
    p.add_argument("--k-max", type=int, default=5)
    p.add_argument("--delta", type=float, default=1e-3)
    p.add_argument("--tol", type=float, default=1e-3)
    p.add_argument("--out")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "solve":
            cmd_solve(args.stats, args.particles, args.temp, args.tol, args.format)
        elif args.command == "sweep":
            warnings.simplefilter("ignore", RegimeWarning)
            cmd_sweep(SweepConfig(args.stats, args.particles, args.grid, args.methods, args.out, args.format))
        elif args.command == "compare":
            warnings.simplefilter("ignore", RegimeWarning)
            cmd_compare(args.stats, args.particles, args.grid, args.methods, args.out, args.format)
        elif args.command == "fit-interp":
            cmd_fit_interp(args.stats, args.particles)
        elif args.command == "verify":
            return cmd_verify(args.k_max, args.delta, args.tol, args.out)
    except VerificationFailure as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except DomainError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (PartitionForceError, ArithmeticError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
