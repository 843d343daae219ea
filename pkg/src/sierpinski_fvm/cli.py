"""Command-line entry point.

Every subcommand except ``cfl`` writes its data files under the output
directory (``--out``, else ``$SIERPINSKI_FVM_OUT``, else ``./out``) together
with ``manifest.json``, and prints the manifest.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from fractions import Fraction
from pathlib import Path

from . import __version__
from .analysis import self_convergence_study
from .config import PRESETS, RunConfig, config_text, parse_config
from .errors import FVMError
from .graphs import BOUNDARY_MODES, DEFAULT_GHOST_INCREMENT, build_vertex_laplacian, cell_laplacian
from .io import coo_text, fmt, key_value_text, spectrum_text, write_geometry, write_json, write_snapshots
from .simplex import SimplexSpace
from .solver import CFL_POLICIES, SCHEMES, run
from .spectral import DENSE_BUDGET, annotated_spectrum, cfl_admissible, cfl_max_h, lifted_spectrum

OUT_ENV = "SIERPINSKI_FVM_OUT"
DETERMINISM = "no random state; data files depend only on the configuration"

log = logging.getLogger("sierpinski_fvm")


def _out_dir(args) -> Path:
    out = Path(args.out or os.environ.get(OUT_ENV) or "out")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _int_list(text: str) -> tuple[int, ...]:
    return tuple(int(tok) for tok in text.split(",") if tok.strip())


def _cfl_block(d: int, m: int, h, scheme: str = "explicit") -> dict:
    bound = cfl_max_h(d, m)
    ok = cfl_admissible(d, m, h)
    return {
        "bound": bound,
        "h": float(h),
        "verdict": "admissible" if ok else "violated",
        "applies": scheme == "explicit",
    }


def _manifest(command: str, config: dict, started: float, outputs, **extra) -> dict:
    payload = {
        "tool": "sierpinski-fvm",
        "version": __version__,
        "command": command,
        "config": config,
        "determinism": DETERMINISM,
        "duration_seconds": round(time.perf_counter() - started, 3),
        "outputs": sorted(str(p.name) for p in outputs),
    }
    payload.update(extra)
    return payload


def _finish(out: Path, payload: dict) -> int:
    write_json(out / "manifest.json", payload)
    print(json.dumps(payload, indent=2, sort_keys=True))
    return 0


# ---------------------------------------------------------------------------
# subcommands


def cmd_simulate(args) -> int:
    started = time.perf_counter()
    overrides = {
        "d": args.d, "m": args.m, "T": args.T, "N": args.N, "scheme": args.scheme,
        "boundary": args.boundary, "cfl_policy": args.cfl_policy, "snapshots": args.snapshots,
        "initial": args.initial, "ghost_increment": args.ghost_increment,
        "cg_tolerance": args.cg_tolerance, "cg_max_iterations": args.cg_max_iterations,
    }
    if args.manifest:
        recorded = json.loads(Path(args.manifest).read_text())["config"]
        cfg = RunConfig.from_dict({**recorded, **{k: v for k, v in overrides.items() if v is not None}})
    else:
        cfg = parse_config(args.config, args.preset, overrides)

    out = _out_dir(args)
    space = SimplexSpace.regular(cfg.d)
    scheme = cfg.scheme_config()
    cfl = _cfl_block(cfg.d, cfg.m, scheme.h_exact, cfg.scheme)
    failure = None
    try:
        series = run(scheme, cfg.initial_condition(), cfg.d, cfg.m)
    except FVMError as exc:
        series = getattr(exc, "series", None)
        if series is None:
            raise
        failure = exc

    outputs = write_snapshots(out, space, series)
    (out / "config.txt").write_text(config_text(cfg))
    summary = [
        ("d", cfg.d), ("m", cfg.m), ("scheme", cfg.scheme), ("boundary", cfg.boundary),
        ("h", scheme.h), ("steps_completed", series.completed_steps),
        ("cfl_bound", cfl["bound"]), ("cfl_verdict", cfl["verdict"]),
        ("initial_mass", series.masses[0] if series.masses else float("nan")),
        ("final_mass", series.masses[-1] if series.masses else float("nan")),
        ("final_max_norm", series.max_norms[-1] if series.values else float("nan")),
        ("norm_2_inf", series.norm_2_inf), ("cg_iterations", series.cg_iterations),
        ("status", "ok" if failure is None else f"failed: {failure}"),
    ]
    (out / "summary.txt").write_text(key_value_text(summary))
    outputs += [out / "config.txt", out / "summary.txt"]
    _finish(out, _manifest("simulate", cfg.to_dict(), started, outputs, cfl=cfl))
    if failure is not None:
        print(f"error: {failure}", file=sys.stderr)
        return 1
    return 0


def cmd_spectrum(args) -> int:
    started = time.perf_counter()
    out = _out_dir(args)
    n = args.d ** args.m
    if args.method == "lifted" or (args.method == "auto" and n > DENSE_BUDGET):
        report = lifted_spectrum(args.d, args.m, args.boundary, ghost_increment=args.ghost_increment)
    else:
        lap = cell_laplacian(args.d, args.m, args.boundary, args.ghost_increment)
        report = annotated_spectrum(lap)
    path = out / "spectrum.csv"
    path.write_text(spectrum_text(report))
    config = {"d": args.d, "m": args.m, "boundary": args.boundary,
              "ghost_increment": args.ghost_increment, "method": args.method}
    return _finish(out, _manifest("spectrum", config, started, [path]))


def cmd_cfl(args) -> int:
    h = Fraction(args.h) if args.h is not None else Fraction(args.T) / args.N
    block = _cfl_block(args.d, args.m, h)
    print(key_value_text([("d", args.d), ("m", args.m), ("h", block["h"]),
                          ("bound", block["bound"]), ("verdict", block["verdict"])]), end="")
    return 0


def cmd_laplacian(args) -> int:
    started = time.perf_counter()
    out = _out_dir(args)
    if args.graph == "vertex":
        matrix = build_vertex_laplacian(args.d, args.m, merged=args.merged).laplacian
        name = f"laplacian_vertex{'_merged' if args.merged else ''}_d{args.d}_m{args.m}.txt"
    else:
        matrix = cell_laplacian(args.d, args.m, args.boundary, args.ghost_increment).matrix
        name = f"laplacian_cell_{args.boundary}_d{args.d}_m{args.m}.txt"
    path = out / name
    text = coo_text(matrix)
    path.write_text(text)
    if args.print:
        print(text, end="")
        return 0
    config = {"d": args.d, "m": args.m, "graph": args.graph, "merged": args.merged,
              "boundary": args.boundary, "ghost_increment": args.ghost_increment}
    return _finish(out, _manifest("laplacian", config, started, [path]))


def cmd_convergence(args) -> int:
    started = time.perf_counter()
    out = _out_dir(args)
    table = self_convergence_study(args.d, args.levels, scheme=args.scheme, T=args.T, N=args.N,
                                   boundary_mode=args.boundary, m_ref=args.m_ref)
    rows = ["m,h,error,rate,message"]
    rows += [f"{r.m},{fmt(r.h)},{fmt(r.error)},{fmt(r.rate)},{r.message}" for r in table.rows]
    table_path = out / "convergence.csv"
    table_path.write_text("\n".join(rows) + "\n")
    summary_path = out / "summary.txt"
    summary_path.write_text(key_value_text([
        ("d", table.d), ("scheme", table.scheme), ("T", table.T), ("m_ref", table.m_ref),
        ("restriction", table.restriction), ("initial", table.initial),
        ("strictly_decreasing", str(table.strictly_decreasing).lower()),
    ]))
    config = {"d": args.d, "levels": list(args.levels), "scheme": args.scheme, "T": args.T,
              "N": args.N, "boundary": args.boundary, "m_ref": table.m_ref}
    _finish(out, _manifest("convergence", config, started, [table_path, summary_path],
                           strictly_decreasing=table.strictly_decreasing))
    if not table.strictly_decreasing:
        print("error: self-convergence errors are not strictly decreasing", file=sys.stderr)
        return 1
    return 0


def cmd_export_geometry(args) -> int:
    started = time.perf_counter()
    out = _out_dir(args)
    path = write_geometry(out / f"geometry_d{args.d}_m{args.m}.csv", SimplexSpace.regular(args.d), args.m)
    return _finish(out, _manifest("export-geometry", {"d": args.d, "m": args.m}, started, [path]))


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sierpinski-fvm", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add(name, func, help_text, out=True):
        p = sub.add_parser(name, help=help_text, description=help_text)
        p.set_defaults(func=func)
        if out:
            p.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./out)")
        return p

    def geometry(p, m_required=True):
        p.add_argument("--d", type=int, required=True, help="branching number")
        p.add_argument("--m", type=int, required=m_required, help="level")

    def boundary(p):
        p.add_argument("--boundary", choices=BOUNDARY_MODES, default="dirichlet-ghost")
        p.add_argument("--ghost-increment", type=float, default=DEFAULT_GHOST_INCREMENT)

    p = add("simulate", cmd_simulate, "run the heat equation and write snapshot files")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--preset", choices=sorted(PRESETS))
    src.add_argument("--manifest", help="re-run the configuration recorded in a manifest.json")
    p.add_argument("--config", help="key = value configuration file")
    p.add_argument("--d", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--T", type=float)
    p.add_argument("--N", type=int)
    p.add_argument("--scheme", choices=SCHEMES)
    p.add_argument("--boundary", choices=BOUNDARY_MODES)
    p.add_argument("--cfl-policy", choices=CFL_POLICIES)
    p.add_argument("--snapshots", type=_int_list, help="comma-separated step indices")
    p.add_argument("--initial", help="spike:<cell> | spline:<word>:<corner>[@level] | custom:<path>")
    p.add_argument("--ghost-increment", type=float)
    p.add_argument("--cg-tolerance", type=float)
    p.add_argument("--cg-max-iterations", type=int)

    p = add("spectrum", cmd_spectrum, "eigenvalues of the cell Laplacian with decimation provenance")
    geometry(p)
    boundary(p)
    p.add_argument("--method", choices=("auto", "direct", "lifted"), default="auto")

    p = add("cfl", cmd_cfl, "check an explicit step size against the stability bound", out=False)
    geometry(p)
    step = p.add_mutually_exclusive_group(required=True)
    step.add_argument("--h", type=str, help="step size")
    step.add_argument("--T", type=float, help="final time (with --N)")
    p.add_argument("--N", type=int)

    p = add("laplacian", cmd_laplacian, "export a Laplacian as zero-based coordinate triples")
    geometry(p)
    boundary(p)
    p.add_argument("--graph", choices=("cell", "vertex"), default="cell")
    p.add_argument("--merged", action="store_true", help="vertex graph with touching corners identified")
    p.add_argument("--print", action="store_true", help="print the triples instead of the manifest")

    p = add("convergence", cmd_convergence, "self-convergence study against a finer reference")
    p.add_argument("--d", type=int, default=3)
    p.add_argument("--levels", type=_int_list, default=(2, 3, 4), help="comma-separated levels")
    p.add_argument("--m-ref", type=int)
    p.add_argument("--scheme", choices=SCHEMES, default="implicit")
    p.add_argument("--T", type=float, default=0.1)
    p.add_argument("--N", type=int)
    p.add_argument("--boundary", choices=BOUNDARY_MODES, default="dirichlet-ghost")

    p = add("export-geometry", cmd_export_geometry, "cell words, barycenters and measures")
    geometry(p)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "cfl" and args.h is None and args.N is None:
        parser.error("cfl: --T requires --N")
    try:
        return args.func(args)
    except (FVMError, ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
