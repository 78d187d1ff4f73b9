"""Command-line front end: spectra, densities, ramps and validation as CSV.

Exit codes: 0 success, 1 usage error, 2 validation failure, 3 numerical
failure inside a solver.
"""
from __future__ import annotations

import argparse
import csv
import io
import os
import sys
from importlib import resources

import numpy as np

from . import __version__
from .errors import CouplingFlowError
from .flow import DEFAULT_GAP_FLOOR
from .integrator import IntegratorConfig
from .models import (
    ModelSpec,
    dwp_model,
    potential_curve,
    run_flow,
    solve_aho,
    solve_dwp,
    wavefunction_density,
)
from .nonadiabatic import evolve_ramp
from .oracle import ModelKind, oracle_spectrum

EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 1, 2, 3
GOLDEN = {"table1": ("table1.csv", ModelKind.AHO), "table2": ("table2.csv", ModelKind.DWP)}


ERROR_SOURCE = {
    "NearDegeneracyError": "flow",
    "ZeroRampRateError": "nonadiabatic",
    "StepLimitExceeded": "integrator",
    "StepUnderflow": "integrator",
    "ChainMismatchError": "models",
    "NoConvergenceError": "oracle",
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def fmt_coord(x: float) -> str:
    return f"{x:.11g}"


def fmt_value(x: float) -> str:
    s = f"{x:.11g}"
    if not any(ch in s for ch in ".enai"):
        s += ".0"
    return s


def _float_list(text: str):
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _int_list(text: str):
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _add_common(p, levels_default="0,1,2,3,4,5"):
    p.add_argument("--n", type=int, default=50, help="truncation dimension N")
    p.add_argument("--levels", type=_int_list, default=_int_list(levels_default))
    p.add_argument("--output", "-o", help="write to this file instead of stdout")
    p.add_argument("--format", choices=("csv", "table"), default="csv")
    p.add_argument("--rtol", type=float, default=IntegratorConfig.rel_tol)
    p.add_argument("--atol", type=float, default=IntegratorConfig.abs_tol)
    p.add_argument("--initial-step", type=float, default=IntegratorConfig.initial_step)
    p.add_argument("--max-step", type=float, default=IntegratorConfig.max_step)
    p.add_argument("--max-steps", type=int, default=IntegratorConfig.max_steps)
    p.add_argument("--gap-floor", type=float, default=DEFAULT_GAP_FLOOR)


def _add_grid(p, name):
    flags = ["--g"] if name == "g" else [f"--{name}", "--g"]
    p.add_argument(*flags, dest="g", type=_float_list,
                   help="explicit comma-separated coupling values")
    p.add_argument("--g-min", type=float, default=0.0)
    p.add_argument("--g-max", type=float)
    p.add_argument("--g-step", type=float, default=0.1)


def build_parser():
    parser = _Parser(prog="coupling-flow", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("aho", help="anharmonic-oscillator spectrum E_i(g)")
    _add_common(p)
    _add_grid(p, "g")

    p = sub.add_parser("dwp", help="double-well spectrum E_i(g')")
    _add_common(p)
    _add_grid(p, "gp")

    p = sub.add_parser("nonadiabatic", help="populations along the ramp g' = v t")
    _add_common(p, "0,2,4")
    p.add_argument("--model", choices=("aho", "dwp"), default="dwp")
    p.add_argument("--v", type=float, required=True, help="ramp rate dg/dt")
    p.add_argument("--g-max", "--gp-max", dest="g_max", type=float, default=6.0)
    p.add_argument("--samples", type=int, default=121, help="evenly spaced samples on [0, g_max]")
    p.add_argument("--init-level", type=int, default=0)
    p.add_argument("--resolve-phases", action="store_true",
                   help="cap the step so every phase difference gets 8 steps per period")

    p = sub.add_parser("density", help="probability density |psi_i(x)|^2")
    _add_common(p, "0,1")
    p.add_argument("--model", choices=("aho", "dwp"), default="dwp")
    p.add_argument("--g", "--gp", dest="g", type=float, required=True)
    p.add_argument("--x", type=_float_list)
    p.add_argument("--x-min", type=float, default=-6.0)
    p.add_argument("--x-max", type=float, default=6.0)
    p.add_argument("--x-points", type=int, default=601)

    p = sub.add_parser("potential", help="double-well potential V(x) at one g'")
    p.add_argument("--gp", type=float, required=True)
    p.add_argument("--x", type=_float_list)
    p.add_argument("--x-min", type=float, default=-3.0)
    p.add_argument("--x-max", type=float, default=3.0)
    p.add_argument("--x-points", type=int, default=601)
    p.add_argument("--output", "-o")
    p.add_argument("--format", choices=("csv", "table"), default="csv")

    p = sub.add_parser("validate", help="compare the flow with brute-force diagonalization")
    _add_common(p)
    p.add_argument("--model", choices=("aho", "dwp"), default="aho")
    p.add_argument("--g", "--gp", dest="g", type=_float_list)
    p.add_argument("--tol", type=float, default=1e-7)
    p.add_argument("--golden", choices=sorted(GOLDEN), help="also diff against a shipped table")
    return parser


def _config(args) -> IntegratorConfig:
    try:
        return IntegratorConfig(args.rtol, args.atol, args.initial_step, args.max_step, args.max_steps)
    except ValueError as exc:
        raise UsageError(f"integrator flags: {exc}")


def _grid(args):
    if args.g is not None:
        g = args.g
    elif args.g_max is not None:
        if args.g_step <= 0:
            raise UsageError("--g-step must be positive")
        count = int(round((args.g_max - args.g_min) / args.g_step)) + 1
        g = list(np.round(args.g_min + args.g_step * np.arange(count), 12))
    else:
        raise UsageError("give coupling values with --g/--gp or a grid with --g-max")
    if not g or g[0] < 0 or any(b <= a for a, b in zip(g, g[1:])):
        raise UsageError("coupling values must be non-negative and strictly increasing")
    return [float(v) for v in g]


def _x_grid(args):
    if args.x is not None:
        x = np.asarray(args.x, dtype=float)
    else:
        if args.x_points < 2 or args.x_max <= args.x_min:
            raise UsageError("--x-min/--x-max/--x-points describe an empty grid")
        x = np.linspace(args.x_min, args.x_max, args.x_points)
    if x.size == 0 or np.any(np.diff(x) <= 0):
        raise UsageError("--x values must be strictly increasing")
    return x


def _check_common(args):
    if args.n < 2:
        raise UsageError("--n must be at least 2")
    bad = [lvl for lvl in args.levels if not 0 <= lvl < args.n]
    if bad:
        raise UsageError(f"--levels {bad} outside [0, {args.n})")


def _metadata(args, **extra):
    meta = {"tool": f"coupling-flow {__version__}", "command": args.command}
    if hasattr(args, "n"):
        meta.update(n_states=args.n, rel_tol=args.rtol, abs_tol=args.atol,
                    max_step=args.max_step, gap_floor=args.gap_floor)
    meta.update(extra)
    return [f"{k}={v}" for k, v in meta.items()]


def _render(header, rows, meta, fmt):
    buf = io.StringIO()
    if fmt == "csv":
        for line in meta:
            buf.write(f"# {line}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    else:
        for line in meta:
            buf.write(f"# {line}\n")
        widths = [max(len(str(c)) for c in col) for col in zip(header, *rows)] if rows else [len(h) for h in header]
        buf.write("  ".join(h.rjust(w) for h, w in zip(header, widths)) + "\n")
        buf.write("  ".join("-" * w for w in widths) + "\n")
        for row in rows:
            buf.write("  ".join(str(c).rjust(w) for c, w in zip(row, widths)) + "\n")
    return buf.getvalue()


def _emit(text, output):
    if output:
        with open(output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_spectrum(args):
    _check_common(args)
    g = _grid(args)
    config = _config(args)
    if args.command == "aho":
        table, _ = solve_aho(args.n, g, config, args.levels, args.gap_floor)
    else:
        table = solve_dwp(args.n, g, config, args.levels, args.gap_floor)
    rows = [(fmt_coord(gv), lvl, fmt_value(e)) for gv, lvl, e in table.rows()]
    meta = _metadata(args, model=args.command)
    _emit(_render(["g", "level", "energy"], rows, meta, args.format), args.output)
    return EXIT_OK


def _model(kind, n, config, gap_floor):
    if kind == "aho":
        return ModelSpec(ModelKind.AHO, n)
    return dwp_model(n, config, gap_floor)


def cmd_nonadiabatic(args):
    _check_common(args)
    if args.v <= 0:
        raise UsageError("--v must be positive")
    if args.g_max < 0:
        raise UsageError("--g-max must be non-negative")
    if not 0 <= args.init_level < args.n:
        raise UsageError(f"--init-level must be in [0, {args.n})")
    if args.samples < 1:
        raise UsageError("--samples must be positive")
    config = _config(args)
    samples = np.linspace(0.0, args.g_max, args.samples) if args.g_max > 0 else np.array([0.0])
    model = _model(args.model, args.n, config, args.gap_floor)
    traj = evolve_ramp(model, args.v, args.g_max, args.init_level, samples, config,
                       args.gap_floor, cap_step=args.resolve_phases)
    rows = []
    for k, gv in enumerate(traj.g):
        for lvl in args.levels:
            rows.append((fmt_coord(gv), fmt_coord(traj.t[k]), lvl,
                         fmt_value(traj.probabilities[k, lvl]), fmt_value(traj.phases[k, lvl])))
    meta = _metadata(args, model=args.model, ramp_rate=args.v, g_max=args.g_max,
                     init_level=args.init_level,
                     max_unitarity_drift=f"{traj.unitarity_drift().max():.3e}")
    _emit(_render(["g", "t", "level", "probability", "phase"], rows, meta, args.format), args.output)
    return EXIT_OK


def cmd_density(args):
    _check_common(args)
    if args.g < 0:
        raise UsageError("--g must be non-negative")
    config = _config(args)
    x = _x_grid(args)
    model = _model(args.model, args.n, config, args.gap_floor)
    table = run_flow(model, [args.g], config, args.gap_floor)
    rows, norms = [], []
    for lvl in args.levels:
        res = wavefunction_density(table, lvl, args.g, x)
        norms.append(f"{lvl}:{res.raw_norm:.10f}{'' if res.grid_ok else '(grid too narrow)'}")
        rows.extend((fmt_coord(xv), lvl, fmt_value(d)) for xv, d in zip(res.x, res.density))
    meta = _metadata(args, model=args.model, g=args.g, raw_norms=";".join(norms))
    _emit(_render(["x", "level", "density"], rows, meta, args.format), args.output)
    return EXIT_OK


def cmd_potential(args):
    x = _x_grid(args)
    v = potential_curve(args.gp, x)
    rows = [(fmt_coord(xv), fmt_value(vv)) for xv, vv in zip(x, v)]
    meta = _metadata(args, g_prime=args.gp)
    _emit(_render(["x", "potential"], rows, meta, args.format), args.output)
    return EXIT_OK


def load_golden(name):
    fname, kind = GOLDEN[name]
    text = resources.files("couplingflow").joinpath("data", fname).read_text(encoding="utf-8")
    rows = [r for r in csv.DictReader(line for line in text.splitlines() if not line.startswith("#"))]
    return kind, [
        {"g": float(r["g"]), "level": int(r["level"]), "method": float(r["method"]),
         "reference": float(r["reference"]), "abs_tol": float(r["abs_tol"])}
        for r in rows
    ]


def cmd_validate(args):
    _check_common(args)
    config = _config(args)
    kind = ModelKind(args.model)
    golden = None
    if args.golden:
        gkind, golden = load_golden(args.golden)
        if gkind is not kind:
            raise UsageError(f"--golden {args.golden} belongs to --model {gkind.value}")
    g = args.g
    if g is None:
        if golden is None:
            raise UsageError("give --g values (or --golden)")
        g = sorted({row["g"] for row in golden})
    if not g or g[0] < 0 or any(b <= a for a, b in zip(g, g[1:])):
        raise UsageError("--g values must be non-negative and strictly increasing")
    g = sorted(set(g) | ({row["g"] for row in golden} if golden else set()))

    model = _model(args.model, args.n, config, args.gap_floor)
    table = run_flow(model, g, config, args.gap_floor)
    rows, worst, passed = [], 0.0, True
    # Flow labels follow continuity and may cross across parity sectors,
    # so the comparison is between sorted spectra.
    for gv, energies in zip(table.g_values, table.energies):
        if args.g is not None and gv not in args.g:
            continue
        oracle = oracle_spectrum(kind, gv, args.n).eigenvalues
        flow = np.sort(energies)
        for rank, (ef, eo) in enumerate(zip(flow, oracle)):
            dev = abs(ef - eo)
            worst = max(worst, dev)
            rows.append((fmt_coord(gv), rank, fmt_value(ef), fmt_value(eo), f"{dev:.3e}",
                         "oracle", "pass" if dev < args.tol else "fail"))
    passed = worst < args.tol
    if golden:
        for row in golden:
            e = table.state_at(row["g"]).energies[row["level"]]
            dev = abs(e - row["method"])
            ok = dev <= row["abs_tol"]
            passed &= ok
            rows.append((fmt_coord(row["g"]), row["level"], fmt_value(e), fmt_value(row["method"]),
                         f"{dev:.3e}", args.golden, "pass" if ok else "fail"))
    meta = _metadata(args, model=args.model, tol=args.tol,
                     max_oracle_deviation=f"{worst:.3e}", result="PASS" if passed else "FAIL")
    header = ["g", "level", "flow", "expected", "deviation", "against", "status"]
    _emit(_render(header, rows, meta, args.format), args.output)
    sys.stderr.write(f"validate {args.model}: max |flow - oracle| = {worst:.3e} "
                     f"({'PASS' if passed else 'FAIL'})\n")
    return EXIT_OK if passed else EXIT_VALIDATION


COMMANDS = {
    "aho": cmd_spectrum,
    "dwp": cmd_spectrum,
    "nonadiabatic": cmd_nonadiabatic,
    "density": cmd_density,
    "potential": cmd_potential,
    "validate": cmd_validate,
}


def _thread_limit():
    value = os.environ.get("COUPLING_FLOW_THREADS")
    if not value:
        return None
    try:
        limit = int(value)
    except ValueError:
        raise UsageError(f"COUPLING_FLOW_THREADS must be an integer, got {value!r}")
    if limit < 1:
        raise UsageError("COUPLING_FLOW_THREADS must be >= 1")
    return limit


def run(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        limit = _thread_limit()
        if limit is None:
            return COMMANDS[args.command](args)
        from threadpoolctl import threadpool_limits

        with threadpool_limits(limits=limit):
            return COMMANDS[args.command](args)
    except UsageError as exc:
        sys.stderr.write(f"coupling-flow: usage error: {exc}\n")
        return EXIT_USAGE
    except (CouplingFlowError, ValueError) as exc:
        module = ERROR_SOURCE.get(type(exc).__name__, "input validation")
        sys.stderr.write(f"coupling-flow: {module} failed ({type(exc).__name__}): {exc}; "
                         f"arguments: {' '.join(argv if argv is not None else sys.argv[1:])}\n")
        return EXIT_NUMERICAL


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
