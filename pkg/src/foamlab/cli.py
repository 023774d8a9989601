"""Command-line front end: lattice info, cells, ratios, Plateau reports,
nonlocal functionals, the ratio optimizer, and reproduction of the
published cell constants.

Exit status: 0 success, 1 computation error, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import re
import sys

import numpy as np

from . import functionals as fn
from . import lattice as lat
from . import optimizer as opt
from . import plateau as pla
from . import polytope as pol
from . import tiling as til
from .errors import FoamLabError

FMT = "{:.12g}"


def _fmt(x) -> str:
    return FMT.format(float(x))


_NAME_RE = re.compile(r"^([a-z]+?)(\d+)?$")


def parse_lattice(token: str, dim: int | None = None) -> lat.Lattice:
    """Catalog token ('fcc', 'z3', 'astar4', ...) or a lattice JSON path."""
    if token.endswith(".json") or os.path.sep in token or os.path.exists(token):
        return lat.load_lattice(token)
    key = token.lower()
    if key in lat.CATALOG_NAMES:
        return lat.catalog(key, dim)
    m = _NAME_RE.match(key)
    if not m:
        raise FoamLabError(f"cannot parse lattice spec {token!r}")
    name, trailing = m.group(1), m.group(2)
    if trailing is not None:
        dim = int(trailing)
    return lat.catalog(name, dim)


def _write_or_print(text: str, out: str | None):
    if out:
        with open(out, "w") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_info(args) -> int:
    L = parse_lattice(args.lattice, args.dim)
    rows = [
        ("dim", str(L.dim)),
        ("volume d(G)", _fmt(lat.determinant(L))),
        ("minimal norm", _fmt(lat.minimal_norm(L))),
        ("inradius", _fmt(lat.inradius(L))),
    ]
    if L.dim <= 4:
        rows.append(("covering radius", _fmt(lat.covering_radius(L))))
        cell = til.voronoi_cell(L)
        rows.append(("cell facets", str(len(cell.facets))))
        rows.append(("cell vertices", str(len(cell.vertices))))
    else:
        rows.append(("relevant vectors", str(len(lat.relevant_vectors(L)))))
    width = max(len(k) for k, _ in rows)
    lines = [f"{k:<{width}}  {v}" for k, v in rows]
    _write_or_print("\n".join(lines), args.out)
    return 0


def cmd_voronoi(args) -> int:
    L = parse_lattice(args.lattice, args.dim)
    cell = til.voronoi_cell(L)
    if args.normalize:
        rho, _ = pol.chebyshev_inradius(cell)
        cell = pol.transform(cell, scale=1.0 / rho)
    if args.format == "off":
        text = pol.polytope_to_off(cell)
    else:
        text = pol.polytope_to_json(cell)
    _write_or_print(text, args.out)
    return 0


def cmd_ratio(args) -> int:
    L = parse_lattice(args.lattice, args.dim)
    spec = fn.RatioSpec(exponent=args.exponent)
    value = fn.iso_ratio(til.voronoi_cell(L), spec)
    _write_or_print(_fmt(value), args.out)
    return 0


def cmd_plateau(args) -> int:
    L = parse_lattice(args.lattice, args.dim)
    report = pla.plateau_check(L, tol_deg=args.tol_deg)
    if args.format == "json":
        text = json.dumps(report.to_json_dict(), indent=2)
    else:
        lines = [f"{'dim':>4} {'chambers':>9} {'verdict':<22} {'deviation_deg':>14}"]
        for e in report.entries:
            dev = "" if math.isnan(e.deviation_deg) else _fmt(e.deviation_deg)
            lines.append(f"{e.face_dim:>4} {e.chambers:>9} {e.verdict:<22} {dev:>14}")
        lines.append(f"overall: {'PASS' if report.overall_pass else 'FAIL'}")
        text = "\n".join(lines)
    _write_or_print(text, args.out)
    return 0


def _mc_config(args) -> fn.MonteCarloConfig:
    return fn.MonteCarloConfig(samples=args.samples, seed=args.seed, batch=args.batch)


def cmd_fracper(args) -> int:
    L = parse_lattice(args.lattice, args.dim)
    cfg = _mc_config(args)
    est = fn.fractional_perimeter(til.voronoi_cell(L), args.s, cfg)
    payload = {
        "functional": "fractional_perimeter",
        "s": args.s,
        "value": est.value,
        "stderr": est.stderr,
        "config": {"samples": cfg.samples, "seed": cfg.seed, "batch": cfg.batch},
    }
    _write_or_print(json.dumps(payload, indent=2), args.out)
    return 0


def cmd_riesz(args) -> int:
    L = parse_lattice(args.lattice, args.dim)
    cfg = _mc_config(args)
    est = fn.riesz_energy(til.voronoi_cell(L), args.alpha, cfg)
    payload = {
        "functional": "riesz_energy",
        "alpha": args.alpha,
        "value": est.value,
        "stderr": est.stderr,
        "config": {"samples": cfg.samples, "seed": cfg.seed, "batch": cfg.batch},
    }
    _write_or_print(json.dumps(payload, indent=2), args.out)
    return 0


def cmd_check_domain(args) -> int:
    L = parse_lattice(args.lattice, args.dim)
    if args.cell:
        with open(args.cell) as fh:
            P = pol.polytope_from_json_dict(json.load(fh))
    else:
        P = til.voronoi_cell(L)
    report = til.fundamental_domain_check(P, L, samples=args.samples, seed=args.seed)
    _write_or_print(json.dumps(report.to_json_dict(), indent=2), args.out)
    return 0 if report.passed else 1


def cmd_optimize(args) -> int:
    initial = tuple(s for s in (args.init or "").split(",") if s)
    cfg = opt.OptimizerConfig(
        dim=args.dim,
        restarts=args.restarts,
        seed=args.seed,
        max_iters=args.max_iters,
        initial=initial,
    )
    report = opt.optimize(cfg)
    payload = json.dumps(report.to_json_dict(), indent=2)
    if args.out:
        _write_or_print(payload, args.out)
        stem = os.path.splitext(args.out)[0]
        with open(stem + "_trace.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["restart", "iter", "ratio"])
            for r in report.restarts:
                for it, ratio in r.trace:
                    writer.writerow([r.index, int(it), _fmt(ratio)])
        if args.plot:
            from .plots import save_trace_figure

            save_trace_figure(report, stem + "_trace.png")
    else:
        sys.stdout.write(payload + "\n")
    summary = (
        f"best ratio {_fmt(report.best_ratio)} "
        f"(equivalence: {report.equivalence}; flags: {list(report.flags) or 'none'})"
    )
    sys.stdout.write(summary + "\n")
    return 0


# expected constants for the reproduction suite: cell ratios in R^3, the
# Kelvin-cell bound, and the honeycomb singularity verdicts
REPRODUCE_SUITES = {
    "prop5": (
        ("ratio_fcc", 12.0 * math.sqrt(2.0), 1e-6),
        ("ratio_bcc", 4.0 * (2.0 * math.sqrt(3.0) + 1.0), 1e-6),
        ("kelvin_lower_bound", 0.998 * 4.0 * (2.0 * math.sqrt(3.0) + 1.0), 1e-6),
        ("kelvin_bound_exceeds_rd", 1.0, 0.0),
        ("plateau_fcc_fails", 1.0, 0.0),
        ("plateau_fcc_six_chamber_vertex", 1.0, 0.0),
        ("plateau_d4_passes", 1.0, 0.0),
    ),
}


def _reproduce_values() -> dict:
    rd = til.voronoi_cell(lat.catalog("fcc"))
    to = til.voronoi_cell(lat.catalog("bcc"))
    kb = fn.kelvin_bound_check()
    p_fcc = pla.plateau_check(lat.catalog("fcc"))
    p_d4 = pla.plateau_check(lat.catalog("d", 4))
    worst = p_fcc.worst_violation()
    return {
        "ratio_fcc": fn.iso_ratio(rd),
        "ratio_bcc": fn.iso_ratio(to),
        "kelvin_lower_bound": kb.kelvin_lower_bound,
        "kelvin_bound_exceeds_rd": float(kb.bound_exceeds_rd),
        "plateau_fcc_fails": float(not p_fcc.overall_pass),
        "plateau_fcc_six_chamber_vertex": float(
            worst is not None and worst.chambers == 6 and worst.face_dim == 0
        ),
        "plateau_d4_passes": float(p_d4.overall_pass),
    }


def cmd_reproduce(args) -> int:
    suite = REPRODUCE_SUITES[args.suite]
    values = _reproduce_values()
    rows = []
    all_ok = True
    for name, expected, tol in suite:
        got = values[name]
        ok = abs(got - expected) <= tol
        all_ok &= ok
        rows.append((name, got, expected, tol, "ok" if ok else "DRIFT"))
    width = max(len(r[0]) for r in rows)
    lines = [
        f"{name:<{width}}  {_fmt(got):>18}  expected {_fmt(exp):>18}  {status}"
        for name, got, exp, tol, status in rows
    ]
    lines.append("result: " + ("MATCH" if all_ok else "MISMATCH"))
    sys.stdout.write("\n".join(lines) + "\n")
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, f"{args.suite}.csv"), "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["check", "computed", "expected", "tolerance", "status"])
            for name, got, exp, tol, status in rows:
                writer.writerow([name, _fmt(got), _fmt(exp), _fmt(tol), status])
        from .plots import save_comparison_figure

        ratio_rows = [(n, g, e) for n, g, e, _, _ in rows if n.startswith(("ratio", "kelvin_lower"))]
        save_comparison_figure(
            ratio_rows, os.path.join(args.out, f"{args.suite}.png"),
            title=f"reproduction suite {args.suite}",
        )
    return 0 if all_ok else 1


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="foamlab",
        description="Lattice Voronoi cells, perimeter ratios, and periodic foam checks",
    )
    sub = p.add_subparsers(dest="command", required=True)

    def add_lattice(sp):
        sp.add_argument("lattice", help="catalog name (fcc, bcc, hex, z3, a4, astar3, d4, dplus8, e8) or lattice JSON path")
        sp.add_argument("--dim", type=int, default=None, help="dimension for family names without a suffix")

    sp = sub.add_parser("info", help="lattice invariants table")
    add_lattice(sp)
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_info)

    sp = sub.add_parser("voronoi", help="export the Voronoi cell (JSON or OFF)")
    add_lattice(sp)
    sp.add_argument("--format", choices=("json", "off"), default="json")
    sp.add_argument("--out", default=None)
    sp.add_argument("--normalize", action="store_true", help="rescale the cell to inradius 1 before export")
    sp.set_defaults(func=cmd_voronoi)

    sp = sub.add_parser("ratio", help="perimeter / inradius^exponent of the Voronoi cell")
    add_lattice(sp)
    sp.add_argument("--exponent", type=float, default=None, help="default: dim - 1")
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_ratio)

    sp = sub.add_parser("plateau", help="singular-structure report of the tiling")
    add_lattice(sp)
    sp.add_argument("--tol-deg", type=float, default=0.1)
    sp.add_argument("--format", choices=("table", "json"), default="table")
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_plateau)

    for name, fun, extra in (
        ("fracper", cmd_fracper, ("--s", 0.5)),
        ("riesz", cmd_riesz, ("--alpha", 1.0)),
    ):
        sp = sub.add_parser(name, help=f"Monte Carlo {name} of the Voronoi cell")
        add_lattice(sp)
        sp.add_argument(extra[0], type=float, default=extra[1])
        sp.add_argument("--samples", type=int, default=100_000)
        sp.add_argument("--batch", type=int, default=0)
        sp.add_argument("--seed", type=int, required=True)
        sp.add_argument("--out", default=None)
        sp.set_defaults(func=fun)

    sp = sub.add_parser("check-domain", help="fundamental-domain certificate for a cell")
    add_lattice(sp)
    sp.add_argument("--cell", default=None, help="polytope JSON; default: the Voronoi cell")
    sp.add_argument("--samples", type=int, default=20_000)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_check_domain)

    sp = sub.add_parser("optimize", help="multi-restart ratio minimization over lattices")
    sp.add_argument("--dim", type=int, required=True, choices=(2, 3, 4))
    sp.add_argument("--restarts", type=int, default=10)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--max-iters", type=int, default=600)
    sp.add_argument("--init", default="", help="comma list of catalog starts, e.g. z,bcc")
    sp.add_argument("--out", default=None, help="report JSON path; also writes _trace.csv/_trace.png")
    sp.add_argument("--plot", action=argparse.BooleanOptionalAction, default=True)
    sp.set_defaults(func=cmd_optimize)

    sp = sub.add_parser("reproduce", help="recompute the published cell constants and diff")
    sp.add_argument("suite", choices=sorted(REPRODUCE_SUITES))
    sp.add_argument("--out", default=None, help="directory for CSV and figure output")
    sp.set_defaults(func=cmd_reproduce)

    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FoamLabError as exc:
        sys.stderr.write(f"foamlab: {type(exc).__module__.split('.')[-1]}.{type(exc).__name__}: {exc}\n")
        return 1
    except ValueError as exc:
        sys.stderr.write(f"foamlab: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
