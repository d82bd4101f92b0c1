"""Command-line front end: ``raycasimir <command> [options]``.

Units: hbar*c = 1.  Lengths are in an arbitrary common unit; energies
(per unit length along the squares' axis) come out in 1/length and
forces in 1/length**2.  Negative forces are attractive.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict
from typing import Sequence


from . import assembly
from .core import Geometry
from .piston import piston_energy, piston_force

EXIT_OK, EXIT_USAGE, EXIT_PARTIAL = 0, 1, 2
COMMANDS = ("energy", "force", "sweep-h", "sweep-a", "piston", "convergence")
FIELDS = (
    "a", "s", "h", "F_even", "F_odd", "F_pfa", "F_neumann", "F_dirichlet",
    "F_total", "F_total_over_Fpfa", "converged", "orders",
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def parse_grid(text: str) -> list[float]:
    """``lo:hi:step`` to an inclusive list of values."""
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError(f"grid must be lo:hi:step, got {text!r}")
    try:
        lo, hi, step = map(float, parts)
    except ValueError:
        raise UsageError(f"grid must be numeric, got {text!r}") from None
    if not all(map(math.isfinite, (lo, hi, step))) or step <= 0 or hi < lo:
        raise UsageError(f"grid needs lo <= hi and step > 0, got {text!r}")
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return [round(lo + k * step, 12) for k in range(count)]


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(
        prog="raycasimir",
        description=__doc__.split("\n\n", 1)[1],
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--a", type=float, default=1.0, help="separation of the squares")
    p.add_argument("--s", type=float, default=1.0, help="side of the squares")
    p.add_argument("--h", type=float, default=0.0, help="gap between each square and its sidewall")
    p.add_argument("--h-grid", type=parse_grid, help="lo:hi:step grid of h (sweep-h)")
    p.add_argument("--a-grid", type=parse_grid, help="lo:hi:step grid of a (sweep-a)")
    p.add_argument("--tol", type=float, default=assembly.DEFAULT_TOL, help="relative tolerance (default 1e-4)")
    p.add_argument("--max-order", type=int, default=assembly.DEFAULT_MAX_ORDER, help="odd reflection-order cap")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", help="output file (default stdout)")
    p.add_argument("--threads", type=int, default=1, help="worker processes for sweeps")
    p.add_argument("--normalize", choices=("pfa", "piston"), default="pfa", help="sweep-a normalisation")
    return p


def parse_args(argv: Sequence[str] | None = None) -> argparse.Namespace:
    cfg = build_parser().parse_args(argv)
    if cfg.a <= 0 or cfg.s <= 0 or cfg.h < 0:
        raise UsageError("lengths must satisfy a > 0, s > 0, h >= 0")
    if cfg.tol <= 0 or cfg.max_order < 3 or cfg.threads < 1:
        raise UsageError("need tol > 0, max-order >= 3, threads >= 1")
    if cfg.command == "sweep-h" and not cfg.h_grid:
        raise UsageError("sweep-h needs --h-grid")
    if cfg.command == "sweep-a" and not cfg.a_grid:
        raise UsageError("sweep-a needs --a-grid")
    if cfg.a_grid and min(cfg.a_grid) <= 0:
        raise UsageError("a-grid values must be positive")
    return cfg


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def format_rows(rows: list[dict], fmt: str) -> str:
    """Serialise rows sharing the same keys as CSV (12 significant digits) or JSON."""
    if not rows:
        raise ValueError("nothing to write")
    if fmt == "json":
        return json.dumps(rows, indent=2) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(rows[0].keys())
    for row in rows:
        writer.writerow([_fmt(v) for v in row.values()])
    return buf.getvalue()


def write_records(records, fmt: str, destination: str | None) -> None:
    rows = [r if isinstance(r, dict) else asdict(r) for r in records]
    text = format_rows(rows, fmt)
    if destination is None:
        sys.stdout.write(text)
        return
    with open(destination, "w", newline="") as fh:
        fh.write(text)


def _energy_row(res: assembly.ChannelResult) -> dict:
    g, e = res.geometry, res.energy
    return {
        "a": g.a, "s": g.s, "h": g.h,
        "E_even": e.even, "E_odd": e.odd_paths, "E_pfa": e.pfa,
        "E_neumann": e.neumann, "E_dirichlet": e.dirichlet, "E_total": e.total,
        "converged": res.converged, "orders": "{};{}".format(*res.orders),
    }


def run(cfg: argparse.Namespace) -> int:
    geometry = Geometry(cfg.a, cfg.s, cfg.h)
    if cfg.command == "energy":
        res = assembly.evaluate(geometry, cfg.tol, cfg.max_order)
        write_records([_energy_row(res)], cfg.format, cfg.out)
        return EXIT_OK if res.converged else EXIT_PARTIAL
    if cfg.command == "force":
        res = assembly.evaluate(geometry, cfg.tol, cfg.max_order)
        write_records([assembly.SweepRecord.from_result(res)], cfg.format, cfg.out)
        return EXIT_OK if res.converged else EXIT_PARTIAL
    if cfg.command == "piston":
        e, f = piston_energy(geometry), piston_force(geometry)
        row = {
            "a": cfg.a, "s": cfg.s,
            "E_even": e.even, "E_odd": e.odd_paths, "E_pfa": e.pfa, "E_total": e.total,
            "F_even": f.even, "F_odd": f.odd, "F_pfa": f.f_pfa, "F_total": f.total,
            "F_total_over_Fpfa": f.normalized_by_pfa["total"],
        }
        write_records([row], cfg.format, cfg.out)
        return EXIT_OK
    if cfg.command == "convergence":
        reports = assembly.convergence_study(geometry, cfg.max_order)
        rows = []
        for name, rep in reports.items():
            diffs = [math.nan] + list(rep.successive_rel_diffs)
            for order, partial, d in zip(rep.orders, rep.partial, diffs):
                rows.append({"channel": name, "order": order, "partial": partial, "rel_diff": d})
            print(f"# {rep.summary()}", file=sys.stderr)
        write_records(rows, cfg.format, cfg.out)
        return EXIT_OK
    if cfg.command == "sweep-h":
        result = assembly.sweep_h(cfg.a, cfg.s, cfg.h_grid, cfg.tol, cfg.max_order, cfg.threads)
        rows = [asdict(r) for r in result.records]
    else:
        result = assembly.sweep_a(cfg.h, cfg.s, cfg.a_grid, cfg.tol, cfg.max_order, cfg.normalize, cfg.threads)
        rows = [asdict(r) for r in result.records]
        if result.piston is not None:
            for row, fp in zip(rows, result.piston):
                row["F_total_over_Fpiston"] = row["F_total"] / fp
    write_records(rows, cfg.format, cfg.out)
    for ext in result.extrema:
        print(f"# interior {ext.kind} of |F_total| at {result.variable} = {ext.x:.6g} ({ext.value:.6g})", file=sys.stderr)
    return EXIT_OK if result.converged else EXIT_PARTIAL


def main(argv: Sequence[str] | None = None) -> int:
    try:
        cfg = parse_args(argv)
    except UsageError as exc:
        build_parser().print_usage(sys.stderr)
        print(f"raycasimir: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return run(cfg)
    except OSError as exc:
        print(f"raycasimir: I/O error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
