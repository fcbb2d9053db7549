"""``radarcap`` command-line front end.

Exit codes: 0 success, 1 usage or input error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields, replace

import numpy as np

from .bounds import BoundOrderingError, bound_envelope, bounds_to_csv
from .channel import (
    ChannelParams,
    DiscreteInput,
    InfeasibleInputError,
    conditional_mean,
    conditional_mean_quadrature,
    kernel,
    kernel_alt,
    kernel_cdf,
    kernel_mass,
    ks_distance,
    sample_output_modsq,
)
from .optimizer import (
    OptimizerConfig,
    OptimizerError,
    escalate_mass_points,
    estimate_lambda,
    kkt_report,
    optimize,
)
from .quadrature import DEFAULT_CONFIG, CheckResult, QuadratureConfig, QuadratureError, SelftestReport
from .quadrature import selftest as quadrature_selftest
from .rates import gaussian_input_rate, mutual_information

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2
COMMANDS = ("rate", "bounds", "optimize", "kkt", "sweep", "selftest", "tables")
SWEEP_FIELDS = (
    "S", "I", "lower_tin", "upper_genie", "upper_ihara", "upper_ze",
    "rate_gauss", "rate_single_mass", "rate_opt", "high_inr_limit",
)

# published reference values: (S, exponent) -> (gaussian, optimized)
REFERENCE_TABLES = {
    5.0: {0.8: (1.2905, 1.2927), 1.4: (1.1910, 1.1922), 2.0: (1.2470, 1.2480)},
    10.0: {0.8: (1.6986, 1.7108), 1.4: (1.6393, 1.6398), 2.0: (1.7100, 1.7102)},
}
TABLE_TOL = {"gaussian": 0.002, "optimized": 0.005}
FIG1_INR = 5.0


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    snr: float | None = None
    inr: float | None = None
    grid: str | None = None
    input_path: str | None = None
    gaussian: bool = False
    output_path: str | None = None
    format: str | None = None
    fig1: bool = False
    with_opt: bool = False
    gaussian_only: bool = False
    lam: float | None = None
    grid_n: int = 200
    grid_max: float | None = None
    quadrature: QuadratureConfig = field(default_factory=lambda: DEFAULT_CONFIG)
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)

    def params(self) -> ChannelParams:
        if self.snr is None or self.inr is None:
            raise UsageError(f"{self.command} needs --snr/--snr-db and --inr/--inr-db")
        return ChannelParams(self.snr, self.inr)


# ---------------------------------------------------------------------------
# helpers


def _threads() -> int:
    raw = os.environ.get("RADARCAP_THREADS")
    if raw is None:
        return os.cpu_count() or 1
    try:
        n = int(raw)
    except ValueError:
        raise UsageError(f"RADARCAP_THREADS must be an integer, got {raw!r}") from None
    return max(1, n)


def parallel_map(fn, items):
    """Ordered map, threaded up to RADARCAP_THREADS workers."""
    items = list(items)
    n = min(_threads(), len(items))
    if n <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


def parse_grid(spec: str) -> np.ndarray:
    """``start:stop:n[:log|lin]``; with ``log`` the ends are base-10 exponents."""
    parts = spec.split(":")
    if len(parts) not in (3, 4):
        raise UsageError(f"grid spec must be start:stop:n[:log|lin], got {spec!r}")
    try:
        start, stop, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise UsageError(f"malformed grid spec {spec!r}") from None
    scale = parts[3] if len(parts) == 4 else "lin"
    if n < 1 or scale not in ("log", "lin"):
        raise UsageError(f"malformed grid spec {spec!r}")
    values = np.logspace(start, stop, n) if scale == "log" else np.linspace(start, stop, n)
    if np.any(values < 0):
        raise UsageError("grid values must be nonnegative")
    return values


def _fmt(v) -> str:
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return ""
    return f"{v:.6g}"


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) if isinstance(v, (float, int, np.floating)) else v for v in r])
    return buf.getvalue()


def _json(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _emit(text: str, cfg: RunConfig) -> None:
    if cfg.output_path:
        with open(cfg.output_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load_input(cfg: RunConfig) -> DiscreteInput:
    if not cfg.input_path:
        raise UsageError(f"{cfg.command} needs --input FILE")
    try:
        with open(cfg.input_path, encoding="utf-8") as fh:
            return DiscreteInput.from_json(fh.read())
    except OSError as exc:
        raise UsageError(f"cannot read {cfg.input_path}: {exc.strerror}") from None
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"invalid input file {cfg.input_path}: {exc}") from None


# ---------------------------------------------------------------------------
# commands


def cmd_rate(cfg: RunConfig) -> int:
    params = cfg.params()
    if cfg.gaussian:
        br = gaussian_input_rate(params, cfg.quadrature)
    else:
        br = mutual_information(_load_input(cfg), params, cfg.quadrature)
    d = br.to_dict()
    if (cfg.format or "json") == "json":
        _emit(_json(d), cfg)
    else:
        desc = d["input"] if isinstance(d["input"], str) else json.dumps(d["input"])
        _emit(_csv(("S", "I", "h_y_nats", "h_w_nats", "rate_bits", "input"),
                   [(d["S"], d["I"], d["h_y_nats"], d["h_w_nats"], d["rate_bits"], desc)]), cfg)
    return EXIT_OK


def _grid_params(cfg: RunConfig):
    """(S, I) pairs from a fixed S and either a fixed I or an I grid."""
    if cfg.snr is None:
        raise UsageError(f"{cfg.command} needs --snr/--snr-db")
    if cfg.grid:
        return [ChannelParams(cfg.snr, float(i)) for i in parse_grid(cfg.grid)]
    return [cfg.params()]


def cmd_bounds(cfg: RunConfig) -> int:
    rows = parallel_map(lambda p: bound_envelope(p, cfg.quadrature), _grid_params(cfg))
    if (cfg.format or "csv") == "csv":
        _emit(bounds_to_csv(rows), cfg)
    else:
        _emit(_json([b.to_dict() for b in rows]), cfg)
    return EXIT_OK


def _sweep_row(params, cfg):
    b = bound_envelope(params, cfg.quadrature)
    single = mutual_information(DiscreteInput.single(params.snr), params, cfg.quadrature).mi_bits
    opt = None
    if cfg.with_opt:
        opt = escalate_mass_points(params, cfg.optimizer, cfg.quadrature)[1].mi_bits
    return (params.snr, params.inr, b.lower_tin, b.upper_genie, b.upper_ihara, b.upper_ze,
            b.gauss_rate, single, opt, b.high_inr_limit)


def cmd_sweep(cfg: RunConfig) -> int:
    if not cfg.grid:
        raise UsageError("sweep needs --grid start:stop:n[:log|lin]")
    rows = parallel_map(lambda p: _sweep_row(p, cfg), _grid_params(cfg))
    if (cfg.format or "csv") == "csv":
        _emit(_csv(SWEEP_FIELDS, rows), cfg)
    else:
        _emit(_json([dict(zip(SWEEP_FIELDS, r)) for r in rows]), cfg)
    return EXIT_OK


def _fig1(cfg: RunConfig) -> int:
    inr = FIG1_INR if cfg.inr is None else cfg.inr
    snrs = parse_grid(cfg.grid) if cfg.grid else np.arange(1.0, 11.0)
    results = parallel_map(
        lambda s: escalate_mass_points(ChannelParams(float(s), inr), cfg.optimizer, cfg.quadrature)[0], snrs
    )
    rows = [(float(s), x, p) for s, inp in zip(snrs, results) for x, p in zip(inp.locations, inp.probs)]
    if (cfg.format or "csv") == "csv":
        _emit(_csv(("S", "x", "p"), rows), cfg)
    else:
        _emit(_json([{"S": s, "x": x, "p": p} for s, x, p in rows]), cfg)
    return EXIT_OK


def cmd_optimize(cfg: RunConfig) -> int:
    if cfg.fig1:
        return _fig1(cfg)
    res = optimize(cfg.params(), cfg.optimizer, cfg.quadrature)
    _emit(_json(res.to_dict()), cfg)
    return EXIT_OK


def cmd_kkt(cfg: RunConfig) -> int:
    params = cfg.params()
    inp = _load_input(cfg)
    inp.check_power(params)
    lam = cfg.lam if cfg.lam is not None else estimate_lambda(inp, params, cfg.optimizer, cfg.quadrature)
    rep = kkt_report(inp, lam, params, grid_max=cfg.grid_max, grid_n=cfg.grid_n, qcfg=cfg.quadrature)
    if (cfg.format or "json") == "json":
        _emit(_json(rep.to_dict()), cfg)
    else:
        _emit(_csv(("x", "slack_nats"), rep.grid), cfg)
    return EXIT_OK


def _rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


def _guarded(name, tol, compute):
    try:
        err = float(compute())
        return CheckResult(name, err <= tol, err)
    except (ArithmeticError, ValueError) as exc:
        return CheckResult(name, False, math.inf, str(exc))


def run_selftest(qcfg: QuadratureConfig = DEFAULT_CONFIG) -> SelftestReport:
    """Quadrature identities plus kernel, normalization, mean and sampler checks."""
    report = quadrature_selftest(qcfg)
    cases = [(0.5, 2.0, 1.0), (5.0, 12.0, 25.0), (20.0, 3.0, 7.0), (40.0, 90.0, 10.0)]
    report.checks.append(_guarded("kernel_two_forms", 1e-8, lambda: max(
        _rel(kernel(x, y, ChannelParams(0.0, i), qcfg), kernel_alt(x, y, ChannelParams(0.0, i), qcfg))
        for x, y, i in cases)))
    report.checks.append(_guarded("kernel_symmetry", 1e-8, lambda: max(
        _rel(kernel(x, y, ChannelParams(0.0, i), qcfg), kernel(y, x, ChannelParams(0.0, i), qcfg))
        for x, y, i in cases)))
    report.checks.append(_guarded("kernel_normalization", 1e-8, lambda: max(
        abs(kernel_mass(x, ChannelParams(0.0, i), qcfg) - 1.0) for x, _, i in cases)))
    report.checks.append(_guarded("conditional_mean", 1e-7, lambda: max(
        _rel(conditional_mean_quadrature(x, ChannelParams(0.0, i), qcfg), conditional_mean(x, ChannelParams(0.0, i)))
        for x, _, i in cases)))

    def ks():
        n = 20000
        crit = 1.628 / math.sqrt(n)  # 1% two-sided
        worst = 0.0
        for k, (x, _, i) in enumerate(cases):
            params = ChannelParams(0.0, i)
            d = ks_distance(sample_output_modsq(x, n, 1000 + k, params).values, kernel_cdf(x, params, qcfg))
            worst = max(worst, d / crit)
        return worst

    report.checks.append(_guarded("sampler_ks_over_critical", 1.0, ks))
    return report


def cmd_selftest(cfg: RunConfig) -> int:
    report = run_selftest(cfg.quadrature)
    if (cfg.format or "json") == "json":
        _emit(_json(report.as_dicts()), cfg)
    else:
        _emit(_csv(("check", "status", "max_err"),
                   [(d["check"], d["status"], d["max_err"]) for d in report.as_dicts()]), cfg)
    return EXIT_OK if report.passed else EXIT_NUMERIC


def table_cells(cfg: RunConfig):
    """All twelve reference cells, recomputed, with deltas and a within-tolerance flag."""
    specs = [(s, a, row) for s in REFERENCE_TABLES for a in (0.8, 1.4, 2.0)
             for row in ("gaussian", "optimized")]
    if cfg.gaussian_only:
        specs = [sp for sp in specs if sp[2] == "gaussian"]

    def cell(spec):
        s, a, row = spec
        params = ChannelParams(s, s**a)
        if row == "gaussian":
            value = gaussian_input_rate(params, cfg.quadrature).mi_bits
        else:
            value = escalate_mass_points(params, cfg.optimizer, cfg.quadrature)[1].mi_bits
        ref = REFERENCE_TABLES[s][a][0 if row == "gaussian" else 1]
        delta = value - ref
        return {"S": s, "I": s**a, "alpha": a, "row": row, "computed": value, "reference": ref,
                "delta": delta, "tol": TABLE_TOL[row], "within_tol": abs(delta) <= TABLE_TOL[row]}

    return parallel_map(cell, specs)


def cmd_tables(cfg: RunConfig) -> int:
    cells = table_cells(cfg)
    fmt = cfg.format or "text"
    if fmt == "json":
        _emit(_json(cells), cfg)
    elif fmt == "csv":
        keys = ("S", "I", "row", "computed", "reference", "delta", "tol", "within_tol")
        _emit(_csv(keys, [tuple(str(c[k]) if k == "within_tol" else c[k] for k in keys) for c in cells]), cfg)
    else:
        lines = [f"{'S':>4} {'I':>9} {'row':>9} {'computed':>9} {'reference':>9} {'delta':>9}  ok"]
        for c in cells:
            lines.append(f"{c['S']:4g} {c['I']:9.4f} {c['row']:>9} {c['computed']:9.4f} "
                         f"{c['reference']:9.4f} {c['delta']:+9.4f}  {'yes' if c['within_tol'] else 'NO'}")
        _emit("\n".join(lines) + "\n", cfg)
    return EXIT_OK if all(c["within_tol"] for c in cells) else EXIT_NUMERIC


HANDLERS = {
    "rate": cmd_rate, "bounds": cmd_bounds, "optimize": cmd_optimize, "kkt": cmd_kkt,
    "sweep": cmd_sweep, "selftest": cmd_selftest, "tables": cmd_tables,
}


# ---------------------------------------------------------------------------
# argument handling


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="radarcap", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", metavar="FILE", help="JSON file mirroring the run configuration")
    p.add_argument("--snr", type=float, help="input power budget S (linear)")
    p.add_argument("--inr", type=float, help="interference power I (linear)")
    p.add_argument("--snr-db", type=float, help="S in dB")
    p.add_argument("--inr-db", type=float, help="I in dB")
    p.add_argument("--grid", metavar="START:STOP:N[:log|lin]", help="I grid (S grid with --fig1)")
    p.add_argument("--input", dest="input_path", metavar="FILE", help="discrete input JSON")
    p.add_argument("--gaussian", action="store_true", help="use a proper-complex Gaussian input")
    p.add_argument("--out", dest="output_path", metavar="FILE", help="write here instead of stdout")
    p.add_argument("--format", choices=("csv", "json", "text"))
    p.add_argument("--seed", type=int, help="multistart seed")
    p.add_argument("--theta-nodes", type=int, help="phase-average trapezoid nodes")
    p.add_argument("--tol", type=float, help="rate tolerance in bits for mass-point escalation")
    p.add_argument("--max-points", type=int, help="cap on mass points during escalation")
    p.add_argument("--fig1", action="store_true", help="mass locations versus S at fixed INR")
    p.add_argument("--with-opt", action="store_true", help="fill the rate_opt sweep column")
    p.add_argument("--gaussian-only", action="store_true", help="tables: skip the optimized rows")
    p.add_argument("--lambda", dest="lam", type=float, help="kkt: multiplier instead of the estimate")
    p.add_argument("--grid-n", type=int, help="kkt: number of slack grid points")
    p.add_argument("--grid-max", type=float, help="kkt: right end of the slack grid")
    return p


def _from_db(db):
    return 10.0 ** (db / 10.0)


def make_config(argv=None) -> RunConfig:
    args = build_parser().parse_args(argv)
    base = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                base = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot load config {args.config}: {exc}") from None
        if not isinstance(base, dict):
            raise UsageError("config file must hold a JSON object")
    q = dict(base.pop("quadrature", {}) or {})
    o = dict(base.pop("optimizer", {}) or {})
    base.pop("command", None)
    known = {f.name for f in fields(RunConfig)} - {"command", "quadrature", "optimizer"}
    unknown = set(base) - known
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")

    for name in ("snr", "inr"):
        if getattr(args, name) is not None and getattr(args, f"{name}_db") is not None:
            raise UsageError(f"give --{name} or --{name}-db, not both")
        if getattr(args, f"{name}_db") is not None:
            setattr(args, name, _from_db(getattr(args, f"{name}_db")))
    for name in known:
        value = getattr(args, name, None)
        if value is not None and value is not False:
            base[name] = value
    if args.theta_nodes is not None:
        q["theta_nodes"] = args.theta_nodes
    if args.seed is not None:
        o["seed"] = args.seed
    if args.tol is not None:
        o["rate_tol_bits"] = args.tol
    if args.max_points is not None:
        o["max_points"] = args.max_points
    try:
        qcfg = replace(DEFAULT_CONFIG, **q)
        ocfg = OptimizerConfig(**o)
        cfg = RunConfig(command=args.command, quadrature=qcfg, optimizer=ocfg, **base)
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    if cfg.format == "text" and cfg.command != "tables":
        raise UsageError("--format text is only available for tables")
    return cfg


def main(argv=None) -> int:
    try:
        cfg = make_config(argv)
        return HANDLERS[cfg.command](cfg)
    except UsageError as exc:
        print(f"radarcap: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InfeasibleInputError, ValueError) as exc:
        print(f"radarcap: invalid input: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (QuadratureError, OptimizerError, BoundOrderingError, ArithmeticError) as exc:
        print(f"radarcap: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
