"""Command line front-end: ``vhardy <verb> [inputs] [flags]``.

Single-operation verbs print one JSON object on stdout (or write ``--out``);
``run-suite`` and ``frac-suite`` run certification suites and exit nonzero when
any check fails, listing the failing check identifiers on stderr.
"""
from __future__ import annotations

import argparse
import sys
from contextlib import nullcontext
from pathlib import Path

import numpy as np
from scipy import fft as sfft

from .bmo import bmo_report, carleson_measure
from .config import ALL_SUITES, SuiteConfig
from .exponent import ExponentFunction
from .fractional import FractionalParams, TailError, fractional_apply
from .grid import (Cube, GridFunction, HalfSpaceFunction, ResolutionError, ScaleLadder,
                   TruncationError)
from .hardy import (ClassicalAtom, classical_atom_embedding_check, hardy_norm,
                    is_classical_atom, molecular_decompose)
from .io import (FormatError, read_any, read_decomposition, reconstruct_bundle,
                 write_decomposition, write_grid)
from .lebesgue import luxemburg_norm, modular
from .maximal import HypothesisViolationError
from .semigroup import KernelBoundError, OperatorParams, SemigroupSpec, verify_kernel_decay
from .suites import dump_json, make_context, run_suite, suite_fractional
from .tent import tent_atomic_decompose

USAGE_ERROR = 2


def _exponent(args, box) -> ExponentFunction:
    return ExponentFunction.from_preset(args.p, box)


def _spec(args) -> SemigroupSpec:
    if getattr(args, "spec", None):
        import yaml
        with open(args.spec) as fh:
            return SemigroupSpec.from_dict(yaml.safe_load(fh))
    return SemigroupSpec()


def _ladder(args, box):
    return ScaleLadder.for_box(box, args.levels, args.t_max)


def _grid_input(path) -> GridFunction:
    obj = read_any(path)
    if not isinstance(obj, GridFunction):
        raise FormatError(f"{path}: expected a grid function, found a half-space function")
    return obj


def _emit(args, payload: dict):
    text = dump_json(payload)
    if getattr(args, "json_out", None):
        Path(args.json_out).write_text(text)
    sys.stdout.write(text)


# ---------------------------------------------------------------------------
# verbs


def cmd_norm(args):
    f = _grid_input(args.input)
    res = luxemburg_norm(f, _exponent(args, f.box), args.tol)
    _emit(args, res.to_dict())


def cmd_modular(args):
    f = _grid_input(args.input)
    _emit(args, {"value": modular(f, _exponent(args, f.box))})


def cmd_hardy_norm(args):
    f = _grid_input(args.input)
    spec = _spec(args)
    val = hardy_norm(f, _exponent(args, f.box), spec, _ladder(args, f.box))
    _emit(args, {"value": val, "experimental": spec.experimental})


def cmd_decompose(args):
    obj = read_any(args.input)
    p = _exponent(args, obj.box)
    if isinstance(obj, HalfSpaceFunction):
        dec = tent_atomic_decompose(obj, p)
        summary = dec.summary()
    else:
        spec = _spec(args)
        dec = molecular_decompose(obj, p, spec, OperatorParams(args.s, args.s0),
                                  _ladder(args, obj.box), strict=args.strict)
        summary = dec.summary()
    if args.out:
        write_decomposition(args.out, dec, args.p)
        summary["bundle"] = str(args.out)
    _emit(args, summary)


def cmd_reconstruct(args):
    bundle = read_decomposition(args.input)
    out = reconstruct_bundle(bundle)
    if args.out:
        write_grid(args.out, out)
    payload = {"kind": bundle["kind"], "terms": len(bundle["cubes"])}
    if args.reference:
        ref = read_any(args.reference)
        diff = np.sqrt(np.sum(np.abs(out.values - ref.values) ** 2))
        payload["relative_residual"] = float(diff / np.sqrt(np.sum(np.abs(ref.values) ** 2)))
    _emit(args, payload)


def cmd_frac_apply(args):
    f = _grid_input(args.input)
    params = FractionalParams(args.gamma, 2.0, f.box.dim)
    out = fractional_apply(f, params, _spec(args), boundary=args.boundary)
    if args.out:
        write_grid(args.out, out)
    _emit(args, {"gamma": args.gamma, "l2_norm": float(np.sqrt(np.sum(np.abs(out.values) ** 2)
                                                               * f.box.cell_volume))})


def cmd_bmo_norm(args):
    f = _grid_input(args.input)
    rep = bmo_report(f, _exponent(args, f.box), args.s, _spec(args), args.depth)
    _emit(args, rep.to_dict())


def cmd_carleson(args):
    g = _grid_input(args.input)
    cm = carleson_measure(g, _exponent(args, g.box), OperatorParams(args.s, args.s0), _spec(args),
                          args.depth, _ladder(args, g.box))
    cube = cm.attaining_cube
    _emit(args, {"value": cm.norm_value, "family_depth": args.depth,
                 "attaining_cube": None if cube is None else {"center": list(cube.center),
                                                              "side": cube.side}})


def cmd_embed_check(args):
    f = _grid_input(args.input)
    p = _exponent(args, f.box)
    vals = [float(v) for v in args.cube.split(",")]
    if len(vals) != f.box.dim + 1:
        raise ValueError(f"--cube needs {f.box.dim} centre coordinates and a side")
    cube = Cube(tuple(vals[:-1]), vals[-1])
    payload = {"is_atom": is_classical_atom(f, cube, p, args.q, args.d)}
    atom = ClassicalAtom(f, cube, args.q, args.d)
    payload["hardy_norm"] = classical_atom_embedding_check(atom, p, _spec(args), _ladder(args, f.box))
    _emit(args, payload)


def cmd_frac_suite(args):
    cfg = _suite_config(args)
    ctx = make_context(cfg)
    p = ExponentFunction.from_preset(args.p, ctx.box) if args.p else None
    checks = suite_fractional(ctx, args.gamma, p)
    failing = [c["id"] for c in checks if not c["passed"]]
    outdir = cfg.resolved_output_dir()
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "fractional.json").write_text(dump_json({"suite": "fractional", "checks": checks,
                                                       "passed": not failing}))
    return _finish(failing, outdir)


def cmd_run_suite(args):
    cfg = _suite_config(args)
    # reject a bad semigroup spec up front, with its witness
    spec = SemigroupSpec.from_dict(cfg.semigroup)
    rep = verify_kernel_decay(spec, cfg.grid.dim)
    result = run_suite(cfg)
    if not rep.passed:
        out = cfg.resolved_output_dir()
        (out / "kernel_witness.json").write_text(dump_json(rep.to_dict()))
    return _finish(result.failing, result.output_dir)


def _finish(failing, outdir) -> int:
    if failing:
        print("FAILED: " + " ".join(failing), file=sys.stderr)
        return 1
    print(f"all checks passed; reports in {outdir}", file=sys.stderr)
    return 0


def _suite_config(args) -> SuiteConfig:
    cfg = SuiteConfig.load(args.config) if args.config else SuiteConfig()
    suites = None
    if getattr(args, "suites", None) is not None:
        suites = [s for s in args.suites.split(",") if s]
    return cfg.override(seed=args.seed, output_dir=args.output_dir, suites=suites,
                        trials=getattr(args, "trials", None),
                        plots=True if getattr(args, "plots", False) else None,
                        exponent=getattr(args, "exponent", None),
                        gamma=getattr(args, "gamma", None), grid_points=args.points,
                        grid_levels=args.grid_levels)


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="vhardy", description=__doc__.splitlines()[0])
    ap.add_argument("--threads", type=int, default=None, help="cap on FFT worker threads")
    sub = ap.add_subparsers(dest="verb", required=True)

    def op(name, fn, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("input", help="grid file (binary or CSV) or bundle")
        sp.add_argument("--p", default="const:1", help="exponent: const:<v>, preset or expression")
        sp.add_argument("--spec", help="YAML semigroup spec (default: Gaussian)")
        sp.add_argument("--levels", type=int, default=64)
        sp.add_argument("--t-max", type=float, default=None)
        sp.add_argument("--out", help="output file")
        sp.add_argument("--json-out", help="also write the JSON result here")
        sp.set_defaults(func=fn)
        return sp

    sp = op("norm", cmd_norm, "Luxemburg norm")
    sp.add_argument("--tol", type=float, default=1e-8)
    op("modular", cmd_modular, "modular of f")
    op("hardy-norm", cmd_hardy_norm, "Hardy quasi-norm via the area function")
    sp = op("decompose", cmd_decompose, "molecular (grid input) or tent (half-space input) decomposition")
    sp.add_argument("--s", type=int, default=0)
    sp.add_argument("--s0", type=int, default=0)
    sp.add_argument("--strict", action="store_true", help="reject inputs that are not band-limited")
    sp = op("reconstruct", cmd_reconstruct, "sum of a decomposition bundle")
    sp.add_argument("--reference", help="grid file to report the relative residual against")
    sp = op("frac-apply", cmd_frac_apply, "fractional integral of f")
    sp.add_argument("--gamma", type=float, required=True)
    sp.add_argument("--boundary", choices=["zero", "periodic"], default="zero")
    sp = op("bmo-norm", cmd_bmo_norm, "BMO-type norm over a dyadic family")
    sp.add_argument("--s", type=int, default=0)
    sp.add_argument("--depth", type=int, default=7)
    sp = op("carleson", cmd_carleson, "Carleson norm of the measure built from g")
    sp.add_argument("--s", type=int, default=0)
    sp.add_argument("--s0", type=int, default=0)
    sp.add_argument("--depth", type=int, default=7)
    sp = op("embed-check", cmd_embed_check, "Hardy norm of a classical atom")
    sp.add_argument("--cube", required=True, help="supporting cube as 'c1[,c2],side'")
    sp.add_argument("--q", type=float, default=2.0)
    sp.add_argument("--d", type=int, default=0)

    def suite_parser(name, fn, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--config", help="YAML suite config")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--output-dir", help="report directory (default: $VHARDY_OUTPUT or ./vhardy-out)")
        sp.add_argument("--points", type=int, help="grid points per axis")
        sp.add_argument("--grid-levels", type=int, help="ladder levels")
        sp.set_defaults(func=fn)
        return sp

    sp = suite_parser("run-suite", cmd_run_suite, "run certification suites")
    sp.add_argument("--suites", help=f"comma-separated subset of {','.join(ALL_SUITES)}")
    sp.add_argument("--trials", type=int)
    sp.add_argument("--exponent")
    sp.add_argument("--plots", action="store_true")
    sp = suite_parser("frac-suite", cmd_frac_suite, "fractional integral suite")
    sp.add_argument("--gamma", type=float)
    sp.add_argument("--p", help="exponent for the Hardy ratio and coefficient checks (default const:1)")
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    workers = sfft.set_workers(args.threads) if args.threads else nullcontext()
    try:
        with workers:
            rc = args.func(args)
    except (FormatError, FileNotFoundError, ValueError) as exc:
        if isinstance(exc, KernelBoundError):
            sys.stdout.write(dump_json(exc.report.to_dict()))
        if isinstance(exc, (TailError, HypothesisViolationError, TruncationError, ResolutionError)):
            print(f"error: {exc}", file=sys.stderr)
            return 1
        print(f"usage error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    return rc or 0


if __name__ == "__main__":
    sys.exit(main())
