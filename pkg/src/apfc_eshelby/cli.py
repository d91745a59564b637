"""Command-line entry point: ``apfc {simulate,sweep,oracle,compare}``."""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from pathlib import Path

import numpy as np

from .config import ConfigError, load_config
from .dumps import DumpFormatError, read_field, write_field, write_profile_csv
from .experiment import (
    RunResult,
    compare_fields,
    eshelby_problem,
    metadata,
    normalized_extrema,
    run_single,
    run_sweep,
    sweep_report,
    write_json,
)
from .eshelby import sample_stress_field
from .stress import line_profile


def _apply_overrides(cfg, args):
    changes = {}
    if args.out is not None:
        changes["out_dir"] = args.out
    if getattr(args, "dump_every", None) is not None:
        changes["dump_every"] = args.dump_every
    return dataclasses.replace(cfg, **changes) if changes else cfg


def _print_rows(rows, out=None):
    out = out or sys.stdout
    for key, value in rows:
        out.write(f"{key}\t{value}\n")


def cmd_simulate(args) -> int:
    cfg = _apply_overrides(load_config(args.config), args)
    result = run_single(cfg)
    rep = result.report
    rows = [
        ("converged", rep.converged),
        ("steps", rep.steps),
        ("interior_plateau", f"{rep.interior_plateau:.6e}"),
        ("analytic_interior", f"{rep.analytic_interior:.6e}"),
        ("exterior_decay_exponent", f"{rep.exterior_decay_exponent:.4f}"),
        ("transition_width", f"{rep.transition_width:.4f}"),
    ]
    rows += [(f"rel_l2_bulk.{k}", f"{v['value']:.4e}" + (" (exact-zero)" if v["exact_zero"] else ""))
             for k, v in rep.rel_l2_bulk.items()]
    rows.append(("output", cfg.out_dir))
    if not args.quiet:
        _print_rows(rows)
    return 0 if rep.converged else 2


def cmd_sweep(args) -> int:
    cfg = _apply_overrides(load_config(args.config), args)
    results = run_sweep(cfg)
    if not args.quiet:
        rows = normalized_extrema(results)
        if rows:
            keys = list(rows[0])
            sys.stdout.write(",".join(keys) + "\n")
            for row in rows:
                sys.stdout.write(",".join(str(row[k]) for k in keys) + "\n")
        for r in results:
            rep = sweep_report(r)
            if rep.error:
                sys.stdout.write(f"# {rep.label} failed: {rep.error}\n")
    failed = any(not isinstance(r, RunResult) or not r.report.converged for r in results)
    return 2 if failed else 0


def cmd_oracle(args) -> int:
    cfg = _apply_overrides(load_config(args.config), args)
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    grid = cfg.grid()
    prob = eshelby_problem(cfg)
    sigma = sample_stress_field(prob, grid)
    for name, arr in sigma.components().items():
        write_field(out / f"{name}_analytic.bin", f"{name}_analytic", grid, arr)
    prof = line_profile(sigma.syy, grid, "x", prob.center[1])
    # analytic-only profile: the APFC column is left empty-valued as NaN
    write_profile_csv(out / "profile_x_analytic.csv", prof.coordinates - prob.center[0],
                      np.full_like(prof.values, np.nan), prof.values)
    write_json(out / "metadata.json", metadata(cfg))
    if not args.quiet:
        _print_rows([("output", out), ("interior_syy", f"{sigma.syy[grid.nx // 2, grid.ny // 2]:.6e}")])
    return 0


def cmd_compare(args) -> int:
    name_a, grid_a, a = read_field(args.dump_a)
    name_b, grid_b, b = read_field(args.dump_b)
    if grid_a != grid_b:
        raise ValueError(f"grid mismatch: {grid_a} vs {grid_b}")
    c = compare_fields(a, b)
    rows = [
        ("a", name_a),
        ("b", name_b),
        ("rel_l2", f"{c.value:.6e}"),
        ("exact_zero", c.exact_zero),
        ("max_abs_diff", f"{float(np.abs(a - b).max()):.6e}"),
    ]
    if not args.quiet:
        _print_rows(rows)
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default=None, help="output directory (overrides output.dir)")
    common.add_argument("--dump-every", type=int, default=None, help="checkpoint cadence in steps")
    common.add_argument("--quiet", action="store_true")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="apfc", description="APFC elastic-inclusion simulator")
    sub = p.add_subparsers(dest="command", required=True)
    for name, fn, helptext in (
        ("simulate", cmd_simulate, "relax one inclusion and compare with the analytic field"),
        ("sweep", cmd_sweep, "run the sweep listed in the config"),
        ("oracle", cmd_oracle, "write the analytic stress field only"),
    ):
        sp = sub.add_parser(name, parents=[common], help=helptext)
        sp.add_argument("config")
        sp.set_defaults(func=fn)
    sp = sub.add_parser("compare", parents=[common], help="relative L2 difference of two dumps")
    sp.add_argument("dump_a")
    sp.add_argument("dump_b")
    sp.set_defaults(func=cmd_compare)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING if args.quiet else (logging.DEBUG if args.verbose else logging.INFO)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    logging.getLogger("matplotlib").setLevel(logging.WARNING)
    try:
        return args.func(args)
    except (ConfigError, DumpFormatError, ValueError, OSError) as exc:
        print(f"apfc: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
