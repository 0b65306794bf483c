"""``pdregion`` command line.

Exit codes: 0 holds / passive, 1 fails / not passive / inconclusive, 2 error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from pdregion.bands import critical_frequency, pd_band
from pdregion.config import GridSpec
from pdregion.errors import PDRegionError
from pdregion.genpass import ROperator, example2_system, gen_full_passivity, gen_pd_band, gen_pd_check, gen_samples
from pdregion.hermlin import numerical_range
from pdregion.margins import robustness_distance, waterbed_bound, waterbed_identity
from pdregion.passivity import of_passivity_check
from pdregion.pdcore import PassivityIndex, pd_check_generic, pd_necessary_matrix
from pdregion.plotting import (
    band_bundle,
    generalized_bundle,
    nichols_bundle,
    numerical_range_bundle,
    nyquist_bundle,
    render,
)
from pdregion.tfparse import load_system


class CliError(Exception):
    pass


def _round(obj, precision: int | None):
    if precision is None:
        return obj
    if isinstance(obj, float):
        if not np.isfinite(obj):
            return str(obj)
        return float(f"{obj:.{precision}g}")
    if isinstance(obj, complex):
        return [_round(obj.real, precision), _round(obj.imag, precision)]
    if isinstance(obj, dict):
        return {k: _round(v, precision) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v, precision) for v in obj]
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return _round(obj.item(), precision)
    return obj


def emit(obj, args, out=None) -> None:
    text = json.dumps(_round(obj, args.precision), indent=2, sort_keys=True) + "\n"
    target = out or getattr(args, "out", None)
    if target:
        Path(target).write_text(text)
    else:
        sys.stdout.write(text)


def parse_sigma(args, size: int | None = None):
    """Scalar ``--sigma`` or ``--sigma-matrix`` (inline JSON or a path to a JSON file)."""
    if getattr(args, "sigma_matrix", None):
        src = args.sigma_matrix
        p = Path(src)
        text = p.read_text() if not src.lstrip().startswith("[") and p.exists() else src
        try:
            m = np.array(json.loads(text), dtype=float)
        except (json.JSONDecodeError, ValueError) as exc:
            raise CliError(f"cannot read --sigma-matrix: {exc}") from exc
        idx = PassivityIndex.of(m)
    elif getattr(args, "sigma", None) is not None:
        idx = PassivityIndex.of(float(args.sigma))
    else:
        raise CliError("give --sigma or --sigma-matrix")
    if size is not None and idx.size == 1 and size > 1:
        idx = PassivityIndex.of(np.eye(size) * idx.scalar)
    return idx


def parse_sigma_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise CliError(f"bad --sigma-list: {exc}") from exc


def grid_from(args) -> GridSpec:
    return GridSpec(args.w_min, args.w_max, args.ppd)


_MODES = {"siso": "siso", "mimo-exact": "mimo-exact", "mimo-estimated": "mimo-estimated", "if": "if"}
_BAND_MODES = {"siso": "siso_exact", "mimo-exact": "mimo_exact", "mimo-estimated": "mimo_estimated", "if": "if"}


def _operator(args):
    op = getattr(args, "operator", "identity")
    if op == "example2":
        return None
    return ROperator.named(op)


# ---------------------------------------------------------------------------
# subcommands


def cmd_check(args) -> int:
    name, G = load_system(args.system)
    if args.mode == "generalized":
        idx = parse_sigma(args)
        op = _operator(args)
        g = G.scalar()
        if op is None:
            g, op = example2_system(g), ROperator.identity()
        res = gen_pd_check(g, idx.scalar, op, args.freq)
        rep = {"system": name, "mode": "generalized", "operator": args.operator, "sigma": idx.scalar,
               "w": args.freq, "holds": res.holds, "margin": res.margin}
    else:
        idx = parse_sigma(args, G.size)
        res = pd_check_generic(G, idx, args.freq, _MODES[args.mode], n_angles=args.n_angles)
        rep = {"system": name, "mode": args.mode, "sigma": idx.to_json(), "w": args.freq, **res}
    emit(rep, args)
    return 0 if rep["holds"] else 1


def cmd_band(args) -> int:
    name, G = load_system(args.system)
    grid = grid_from(args)
    sigmas = parse_sigma_list(args.sigma_list) if args.sigma_list else [None]
    out = []
    for s in sigmas:
        if s is None:
            idx = parse_sigma(args, G.size)
        else:
            idx = PassivityIndex.of(np.eye(G.size) * s if G.size > 1 else s)
        op = _operator(args)
        if args.operator != "identity":
            g = G.scalar()
            if op is None:
                g, op = example2_system(g), ROperator.identity()
            band = gen_pd_band(g, idx.scalar, op, grid)
        else:
            band = pd_band(G, idx, grid, _BAND_MODES[args.mode], n_angles=args.n_angles)
        row = {"sigma": idx.scalar if idx.size == 1 else idx.to_json(), "band": band.to_json()}
        if args.report_grid_point:
            if G.size != 1 or args.operator != "identity":
                raise CliError("--report-grid-point needs a SISO system and the identity operator")
            try:
                cf = critical_frequency(G, idx.scalar, 1.0 / args.ppd, grid)
                row.update(critical_frequency=cf.reported, first_failing_grid_point=cf.grid_point,
                           refined_edge=cf.refined_edge)
            except ValueError as exc:
                row.update(critical_frequency=None, note=str(exc))
        out.append(row)
    if args.report_grid_point and not args.json:
        p = args.precision or 6
        lines = ["sigma,critical_frequency,first_failing_grid_point,refined_edge"]
        for r in out:
            cfv = r.get("critical_frequency")
            lines.append(",".join([
                f"{r['sigma']:.{p}g}",
                "nan" if cfv is None else f"{cfv:.4f}",
                "nan" if r.get("first_failing_grid_point") is None else f"{r['first_failing_grid_point']:.4f}",
                "nan" if r.get("refined_edge") is None else f"{r['refined_edge']:.{p}g}",
            ]))
        text = "\n".join(lines) + "\n"
        if args.out:
            Path(args.out).write_text(text)
        else:
            sys.stdout.write(text)
    else:
        emit({"system": name, "mode": args.mode, "operator": args.operator, "results": out}, args)
    return 0


def cmd_passivize(args) -> int:
    name, G = load_system(args.system)
    idx = parse_sigma(args)
    if args.operator == "identity":
        rep = of_passivity_check(G.scalar(), idx.scalar, grid_from(args))
    elif args.operator == "s":
        rep = gen_full_passivity(G.scalar(), idx.scalar, ROperator.differentiator(), grid_from(args))
    else:
        raise CliError("passivize supports --operator identity or s")
    emit({"system": name, **rep.to_json()}, args)
    return 0 if rep.verdict == "passive" else 1


def cmd_robust(args) -> int:
    name, G = load_system(args.system)
    idx = parse_sigma(args)
    res = robustness_distance(G.scalar(), idx.scalar, (args.w_min, args.w_max), args.ppd)
    rep = {"system": name, **res.to_json()}
    code = 0 if res.d_min > 0 else 1
    if args.delta is not None:
        ok = bool(res.d_min > 0 and args.delta < res.d_min)
        rep.update(delta=args.delta, admissible=ok)
        code = 0 if ok else 1
    emit(rep, args)
    return code


def cmd_waterbed(args) -> int:
    name, G = load_system(args.system)
    res = waterbed_identity(G.scalar(), args.a)
    rep = {"system": name, **res.to_json()}
    ok = res.abs_error <= 1e-6
    if args.sigma is not None and args.wc is not None:
        b = waterbed_bound(G.scalar(), args.sigma, args.wc, args.a, grid_from(args))
        rep["bound"] = b.to_json()
        ok = ok and b.satisfied
    emit(rep, args)
    return 0 if ok else 1


def cmd_range(args) -> int:
    name, G = load_system(args.system)
    idx = parse_sigma(args, G.size)
    M = G(1j * args.freq)
    nr = numerical_range(M, args.n_angles)
    chk = pd_necessary_matrix(M, idx, args.n_angles)
    rep = {"system": name, "w": args.freq, "sigma": idx.to_json(), "holds": chk.holds, "status": chk.status,
           "slack": chk.slack, "worst_point": chk.worst_point,
           "boundary": [complex(z) for z in nr.boundary_points]}
    emit(rep, args)
    return 0 if chk.holds else 1


def cmd_plot(args) -> int:
    name, G = load_system(args.system)
    grid = grid_from(args)
    kind = args.kind
    if kind == "nyquist":
        b = nyquist_bundle({name: G.scalar()}, args.sigma, grid)
    elif kind == "nichols":
        if args.sigma is None:
            raise CliError("nichols needs --sigma")
        b = nichols_bundle({name: G.scalar()}, args.sigma, grid)
    elif kind == "range":
        idx = parse_sigma(args, G.size)
        b = numerical_range_bundle(G, idx.matrix, n_angles=args.n_angles)
    elif kind == "band":
        sig = parse_sigma_list(args.sigma_list) if args.sigma_list else [args.sigma if args.sigma is not None else 0.0]
        b = band_bundle({s: pd_band(G.scalar(), s, grid) for s in sig})
    elif kind == "generalized":
        if args.sigma is None:
            raise CliError("generalized needs --sigma")
        op = _operator(args)
        b = generalized_bundle(gen_samples(G.scalar(), args.sigma, op, grid, example2=op is None), name)
    else:
        raise CliError(f"unknown plot kind {kind!r}")
    text = render(b, args.format, args.precision or 6)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pdregion", description="Positive-damping regions and passivization checks.")
    p.add_argument("--reproduce-paper", action="store_true",
                   help="run the full case study and write a summary table plus figure data to --out")
    p.add_argument("--out", help="output file (subcommands) or directory (--reproduce-paper)")
    p.add_argument("--precision", type=int, default=6, help="significant digits in printed numbers")
    sub = p.add_subparsers(dest="command")

    def common(sp, sigma=True, grid=True):
        sp.add_argument("system", help="system JSON file")
        if sigma:
            sp.add_argument("--sigma", type=float)
            sp.add_argument("--sigma-matrix", help="JSON matrix inline or a path to a JSON file")
        if grid:
            sp.add_argument("--w-min", type=float, default=1e-3)
            sp.add_argument("--w-max", type=float, default=1e3)
            sp.add_argument("--ppd", type=int, default=100, help="points per decade")
        sp.add_argument("--out", default=argparse.SUPPRESS)
        sp.add_argument("--precision", type=int, default=argparse.SUPPRESS)

    sp = sub.add_parser("check", help="PD check at one frequency")
    common(sp, grid=False)
    sp.add_argument("--freq", type=float, required=True)
    sp.add_argument("--mode", choices=["siso", "mimo-exact", "mimo-estimated", "if", "generalized"], default="siso")
    sp.add_argument("--operator", choices=["identity", "s", "example2"], default="identity")
    sp.add_argument("--n-angles", type=int, default=720)
    sp.set_defaults(fn=cmd_check)

    sp = sub.add_parser("band", help="PD frequency band")
    common(sp)
    sp.add_argument("--sigma-list", help="comma-separated scalar indices")
    sp.add_argument("--mode", choices=["siso", "mimo-exact", "mimo-estimated", "if"], default="siso")
    sp.add_argument("--operator", choices=["identity", "s", "example2"], default="identity")
    sp.add_argument("--report-grid-point", action="store_true",
                    help="table of first failing grid points (0 when the band is the single point w = 0)")
    sp.add_argument("--json", action="store_true", help="JSON output even with --report-grid-point")
    sp.add_argument("--n-angles", type=int, default=720)
    sp.set_defaults(fn=cmd_band)

    sp = sub.add_parser("passivize", help="full passivity verdict")
    common(sp)
    sp.add_argument("--operator", choices=["identity", "s"], default="identity")
    sp.set_defaults(fn=cmd_passivize)

    sp = sub.add_parser("robust", help="robustness distance to the PD disk")
    common(sp)
    sp.add_argument("--delta", type=float)
    sp.set_defaults(fn=cmd_robust)

    sp = sub.add_parser("waterbed", help="Poisson-integral identity and bandwidth bound")
    common(sp, sigma=False)
    sp.add_argument("--a", type=float, default=1.0)
    sp.add_argument("--sigma", type=float)
    sp.add_argument("--wc", type=float)
    sp.set_defaults(fn=cmd_waterbed)

    sp = sub.add_parser("range", help="numerical range of G(jw) and the necessary disk test")
    common(sp, grid=False)
    sp.add_argument("--freq", type=float, required=True)
    sp.add_argument("--n-angles", type=int, default=720)
    sp.set_defaults(fn=cmd_range)

    sp = sub.add_parser("plot", help="plot data as CSV, JSON or SVG")
    common(sp)
    sp.add_argument("--kind", choices=["nyquist", "nichols", "range", "band", "generalized"], default="nyquist")
    sp.add_argument("--format", choices=["csv", "json", "svg"], default="csv")
    sp.add_argument("--sigma-list")
    sp.add_argument("--operator", choices=["identity", "s", "example2"], default="identity")
    sp.add_argument("--n-angles", type=int, default=180)
    sp.set_defaults(fn=cmd_plot)
    return p


def _looks_negative(v: str) -> bool:
    return len(v) > 1 and v[0] == "-" and (v[1].isdigit() or v[1] == ".")


def _join_negative_values(argv: list[str]) -> list[str]:
    """``--opt -0.5,-0.2`` -> ``--opt=-0.5,-0.2`` (argparse would read the value as a flag)."""
    out: list[str] = []
    i = 0
    while i < len(argv):
        a = argv[i]
        if a.startswith("--") and "=" not in a and i + 1 < len(argv) and _looks_negative(argv[i + 1]):
            out.append(f"{a}={argv[i + 1]}")
            i += 2
            continue
        out.append(a)
        i += 1
    return out


def main(argv=None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    args = parser.parse_args(_join_negative_values(argv))
    try:
        if args.reproduce_paper:
            from pdregion.casestudy import reproduce, summary_table

            summary = reproduce(args.out, args.precision)
            if not args.out:
                sys.stdout.write(summary_table(summary))
            return 0
        if not getattr(args, "fn", None):
            parser.print_help(sys.stderr)
            return 2
        return args.fn(args)
    except (PDRegionError, CliError, ValueError, ZeroDivisionError, ArithmeticError, OSError) as exc:
        err = {"error": type(exc).__name__, "message": str(exc)}
        if getattr(exc, "offset", None) is not None:
            err["offset"] = exc.offset
        sys.stderr.write(json.dumps(err) + "\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
