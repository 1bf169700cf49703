"""Batch command-line front-end.

Subcommands cover every pipeline stage: exact algebra construction,
involution enumeration, grading inspection, Lax flow integration, Toda
field checks and the formal Killing recursion, plus an aggregate
`certify all` that runs the full property suite.

Exit codes: 0 success, 1 usage error, 2 certification failure,
3 numerical blow-up.
"""

from __future__ import annotations

import argparse
import json
import struct
import sys
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import toda as td
from .chevalley import cached_algebra, verify_jacobi
from .coxeter import CoxeterAutomorphism, GradingProjector, g1_indices
from .involution import (certify_prop31, compact_conjugation,
                         enumerate_involutions, find_certificate,
                         lift_involution, real_form_conjugation)
from .laxflow import (FieldGrid, FlowSpec, ResidualReport, conjugation_matrix,
                      conserved_drift, integrate_flow, mc_residual,
                      random_graded_loop, vacuum_loop)

MAGIC = b"TLAX"
VERSION = 1

# header: magic, version, type, rank, d, k, Nx, Ny (little-endian int32
# after the 4-byte magic and 1-byte type char), h (little-endian float64)
_HEADER = "<4si1siiiiid"


class UsageError(ValueError):
    pass


# -- binary grid IO --------------------------------------------------


def write_grid(path: str, series: str, rank: int, d: int, k: int,
               h: float, data: np.ndarray) -> None:
    """Binary grid file: fixed header then the row-major complex array."""
    header = struct.pack(_HEADER, MAGIC, VERSION, series.encode(), rank,
                         d, k, data.shape[0] - 1, data.shape[1] - 1, h)
    with open(path, "wb") as f:
        f.write(header)
        f.write(np.ascontiguousarray(data, dtype="<c16").tobytes())


def read_grid(path: str):
    """(series, rank, d, k, h, data) with data reshaped per the header."""
    with open(path, "rb") as f:
        raw = f.read()
    size = struct.calcsize(_HEADER)
    magic, version, series, rank, d, k, nx, ny, h = struct.unpack(
        _HEADER, raw[:size])
    if magic != MAGIC or version != VERSION:
        raise UsageError(f"{path}: not a grid file")
    series = series.decode()
    flat = np.frombuffer(raw[size:], dtype="<c16")
    per_node = flat.size // ((nx + 1) * (ny + 1))
    data = flat.reshape(nx + 1, ny + 1, per_node).copy()
    return series, rank, d, k, h, data


def load_field_grid(path: str) -> FieldGrid:
    series, rank, d, k, h, data = read_grid(path)
    alg = cached_algebra(series, rank)
    if d == 0:
        raise UsageError(f"{path}: holds a Toda field, not a flow grid")
    xi = data.reshape(data.shape[0], data.shape[1], 2 * d + 1, alg.dim)
    cm = conjugation_matrix(compact_conjugation(alg))
    return FieldGrid(alg, d, h, 0.5, xi, cm)


def load_omega(path: str) -> td.TodaField:
    series, rank, d, k, h, data = read_grid(path)
    alg = cached_algebra(series, rank)
    if d != 0 or data.shape[2] != rank:
        raise UsageError(f"{path}: not a Toda field file")
    return td.TodaField(alg, h, np.real(data))


# -- reports and plots -----------------------------------------------


def report_row(rep: ResidualReport) -> Dict:
    out = {"name": rep.name, "sup": rep.sup}
    if rep.order is not None:
        out["order"] = rep.order
    if rep.drift is not None:
        out["drift"] = rep.drift
    if rep.details:
        out["details"] = {k: (v if np.isfinite(v) else "inf")
                          for k, v in rep.details.items()}
    return out


def write_report(path: Optional[str], payload) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True, default=float)
    if path:
        with open(path, "w") as f:
            f.write(text + "\n")
    else:
        print(text)


def emit_plot(reports: Sequence[ResidualReport], path: str) -> None:
    """Log-log residual-versus-h plot (vector graphics); the fitted
    least-squares slope is annotated when two or more resolutions exist."""
    if not reports:
        raise UsageError("nothing to plot")
    import matplotlib
    matplotlib.use("Agg")
    matplotlib.rcParams["svg.hashsalt"] = "todalax"
    import matplotlib.pyplot as plt
    fig, ax = plt.subplots(figsize=(5, 4))
    for rep in reports:
        hs, sups = [], []
        for key, val in sorted(rep.details.items()):
            if key.startswith("sup_h"):
                hs.append(float(key[5:]))
                sups.append(val)
        if not hs:
            hs, sups = [1.0], [rep.sup]
        order = np.argsort(hs)
        hs = np.array(hs)[order]
        sups = np.array(sups)[order]
        label = rep.name
        if len(hs) >= 2 and np.all(np.array(sups) > 0):
            slope = np.polyfit(np.log(hs), np.log(sups), 1)[0]
            label += f" (slope {slope:.2f})"
        ax.loglog(hs, sups, "o-", label=label)
    ax.set_xlabel("h")
    ax.set_ylabel("sup residual")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, metadata={"Date": None})
    plt.close(fig)


# -- subcommands -----------------------------------------------------


def cmd_algebra(args) -> int:
    alg = cached_algebra(args.type, args.rank)
    rs = alg.rs
    if args.what == "info":
        payload = {
            "type": f"{args.type}{args.rank}",
            "rank": rs.rank,
            "dim": alg.dim,
            "roots": len(rs.roots),
            "coxeter_number": rs.coxeter_number,
            "marks": list(rs.marks),
            "grading_dims": GradingProjector(alg).component_dims(),
        }
        write_report(args.out, payload)
        return 0
    # constants: every nonzero bracket as one CSV row
    labels = alg.basis_labels()
    lines = ["i,j,k,c"]
    for i in range(alg.dim):
        for j in range(alg.dim):
            for k, c in alg.bracket_basis(i, j).items():
                lines.append(f"{labels[i]},{labels[j]},{labels[k]},{c}")
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as f:
            f.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_involutions(args) -> int:
    alg = cached_algebra(args.type, args.rank)
    rows = []
    omega0 = compact_conjugation(alg)
    for pi in enumerate_involutions(alg.rs):
        theta = lift_involution(alg, pi)
        cert = find_certificate(alg.rs, pi)
        conj = real_form_conjugation(theta, omega0)
        ok = theta.certify() and all(certify_prop31(alg, theta, conj).values)
        row = {
            "permutation": list(pi.perm),
            "identity": pi.is_identity,
            "certificate": cert.kind,
            "signs": [int(b) for b in theta.b_simple],
            "certified": ok,
        }
        if cert.node is not None:
            row["node"] = cert.node
        if cert.gamma is not None:
            row["gamma"] = list(cert.gamma.coeffs)
        if cert.delta is not None:
            row["delta"] = list(cert.delta.coeffs)
        rows.append(row)
    write_report(args.out, {"type": f"{args.type}{args.rank}",
                            "involutions": rows})
    return 0 if all(r["certified"] for r in rows) else 2


def cmd_grading(args) -> int:
    alg = cached_algebra(args.type, args.rank)
    cox = CoxeterAutomorphism(alg)
    proj = GradingProjector(alg)
    payload = {
        "type": f"{args.type}{args.rank}",
        "coxeter_number": cox.k,
        "order_defect": cox.order_defect(),
        "component_dims": proj.component_dims(),
        "g1_dim": len(g1_indices(alg)),
    }
    write_report(args.out, payload)
    return 0


def _flow_pieces(args):
    alg = cached_algebra(args.type, args.rank)
    conj = compact_conjugation(alg)
    if args.vacuum:
        seed = vacuum_loop(alg, conj, args.d)
    else:
        seed = random_graded_loop(alg, conj, args.d, seed=args.seed)
    return alg, conj, seed


def cmd_flow_run(args) -> int:
    alg, conj, seed = _flow_pieces(args)
    spec = FlowSpec(alg, conj, args.d, seed, lx=args.lx, ly=args.ly,
                    h=args.h, blowup_bound=args.blowup_bound)
    grid = integrate_flow(spec)
    lams = np.exp(2j * np.pi * np.arange(8) / 8)
    reports = [mc_residual(grid, lams), conserved_drift(grid)]
    payload = {
        "type": f"{args.type}{args.rank}",
        "d": args.d,
        "h": args.h,
        "seed": args.seed,
        "truncated_at": grid.truncated_at,
        "grading_defect": grid.grading_defect(),
        "reality_defect": grid.reality_defect(),
        "checks": [report_row(r) for r in reports],
    }
    if args.out:
        write_grid(args.out, args.type, args.rank, args.d,
                   alg.rs.coxeter_number, args.h,
                   grid.xi.reshape(grid.nx + 1, grid.ny + 1, -1))
    write_report(args.report, payload)
    if args.plot:
        emit_plot(reports, args.plot)
    return 3 if grid.truncated_at is not None else 0


def _cyclic_data_for(grid: FieldGrid, w_path: Optional[str]) -> td.CyclicData:
    conj = compact_conjugation(grid.alg)
    if w_path is None:
        return td.grid_cyclic_data(grid, conj)
    with open(w_path) as f:
        spec = json.load(f)
    if spec.get("conjugation", "compact") != "compact":
        raise UsageError("only the compact conjugation is wired to the CLI")
    r = tuple(complex(a, b) for a, b in spec["r"])
    return td.CyclicData(grid.alg, conj, r)


def cmd_toda_check(args) -> int:
    grid = load_field_grid(args.grid)
    data = _cyclic_data_for(grid, args.W)
    omega = td.reconstruct_omega(grid)
    reports = [
        td.toda_residual(omega, data),
        td.toda_bracket_form(omega, data),
        td.toda_frame_form(omega, data,
                           np.exp(2j * np.pi * np.arange(4) / 4)),
        td.normalization_check(data, td.g1_coefficient_grid(grid)),
        td.w_constancy(grid, omega),
    ]
    payload = {
        "loop_defect": omega.loop_defect,
        "reality_defect": omega.reality_defect,
        "non_cyclic": not data.is_cyclic,
        "checks": [report_row(r) for r in reports],
    }
    write_report(args.report, payload)
    if args.plot:
        emit_plot(reports, args.plot)
    bad = (not data.is_cyclic or
           any(r.sup > args.tol for r in reports if r.name in
               ("toda_rhs_agreement", "w_constancy", "normalization")))
    return 2 if bad else 0


def cmd_toda_reconstruct(args) -> int:
    grid = load_field_grid(args.grid)
    omega = td.reconstruct_omega(grid)
    write_grid(args.out, grid.alg.rs.series, grid.alg.rank, 0,
               grid.alg.rs.coxeter_number, grid.h,
               omega.omega.astype(complex))
    write_report(args.report, {"loop_defect": omega.loop_defect,
                               "reality_defect": omega.reality_defect})
    return 0


def cmd_toda_recursion(args) -> int:
    grid = load_field_grid(args.grid)
    data = _cyclic_data_for(grid, args.W)
    omega = td.reconstruct_omega(grid)
    res = td.formal_killing_recursion(omega, data, args.order)
    payload = {
        "order": args.order,
        "margin": res.margin,
        "top_defect": res.top_defect,
        "projection_defect": res.projection_defect,
        "v_component": res.v_component,
        "noncyclic_nodes": int(res.noncyclic_nodes.sum()),
        "lax": report_row(res.lax_report),
    }
    write_report(args.report, payload)
    return 0


def cmd_certify(args) -> int:
    """Aggregate property suite; one row per check, nonzero exit on any
    failure."""
    rows: List[Dict] = []

    def check(name: str, ok: bool, value=None):
        rows.append({"check": name, "pass": bool(ok), "value": value})

    alg = cached_algebra(args.type, args.rank)
    rs = alg.rs
    rep = verify_jacobi(alg)
    check("jacobi_identity", rep.ok, len(rep.violations))
    check("coxeter_number", rs.coxeter_number ==
          max(r.height for r in rs.roots) + 1, rs.coxeter_number)
    omega0 = compact_conjugation(alg)
    for pi in enumerate_involutions(rs):
        theta = lift_involution(alg, pi)
        conj = real_form_conjugation(theta, omega0)
        ok = theta.certify() and all(certify_prop31(alg, theta, conj).values)
        label = "".join(str(p) for p in pi.perm)
        check(f"involution_{label}", ok)
    cox = CoxeterAutomorphism(alg)
    check("coxeter_order", cox.order_defect() < 1e-12, cox.order_defect())

    conj = compact_conjugation(alg)
    vac = vacuum_loop(alg, conj, 1)
    spec = FlowSpec(alg, conj, 1, vac, lx=args.lx, ly=args.ly, h=args.h)
    grid = integrate_flow(spec)
    drift = float(np.max(np.abs(grid.xi - grid.xi[0, 0])))
    check("vacuum_fixed_point", drift <= 1e-12, drift)

    seed = random_graded_loop(alg, conj, 1, seed=args.seed)
    grid = integrate_flow(FlowSpec(alg, conj, 1, seed, lx=args.lx,
                                   ly=args.ly, h=args.h))
    lams = np.exp(2j * np.pi * np.arange(8) / 8)
    dr = conserved_drift(grid)
    check("killing_drift", dr.sup < 1e-10, dr.sup)
    grid2 = integrate_flow(FlowSpec(alg, conj, 1, seed, lx=args.lx,
                                    ly=args.ly, h=args.h / 2))
    mc = mc_residual([grid, grid2], lams)
    check("mc_order", mc.order is not None and mc.order >= 3.5, mc.order)

    for row in rows:
        status = "PASS" if row["pass"] else "FAIL"
        val = "" if row["value"] is None else f"  ({row['value']})"
        print(f"{status}  {row['check']}{val}")
    if args.report:
        write_report(args.report, {"checks": rows})
    return 0 if all(r["pass"] for r in rows) else 2


# -- argument parsing ------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="todalax",
                                description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def add_type(sp):
        sp.add_argument("--type", required=True,
                        choices=list("ABCDEFG"), help="series letter")
        sp.add_argument("--rank", required=True, type=int)
        sp.add_argument("--out", default=None,
                        help="output path (stdout if omitted)")

    pa = sub.add_parser("algebra", help="exact algebra data")
    pa.add_argument("what", choices=["info", "constants"])
    add_type(pa)
    pa.set_defaults(func=cmd_algebra)

    pi = sub.add_parser("involutions",
                        help="extended-diagram involutions with lifts")
    add_type(pi)
    pi.set_defaults(func=cmd_involutions)

    pg = sub.add_parser("grading", help="Coxeter grading summary")
    add_type(pg)
    pg.set_defaults(func=cmd_grading)

    pf = sub.add_parser("flow", help="Lax flow integration")
    fsub = pf.add_subparsers(dest="flow_command", required=True)
    fr = fsub.add_parser("run")
    add_type(fr)
    fr.add_argument("--d", type=int, default=1)
    fr.add_argument("--h", type=float, default=0.01)
    fr.add_argument("--lx", type=float, default=1.0)
    fr.add_argument("--ly", type=float, default=1.0)
    fr.add_argument("--seed", type=int, default=0)
    fr.add_argument("--vacuum", action="store_true")
    fr.add_argument("--blowup-bound", type=float, default=1e12)
    fr.add_argument("--report", default=None)
    fr.add_argument("--plot", default=None)
    fr.set_defaults(func=cmd_flow_run)

    pt = sub.add_parser("toda", help="Toda field checks")
    tsub = pt.add_subparsers(dest="toda_command", required=True)
    tc = tsub.add_parser("check")
    tc.add_argument("--grid", required=True)
    tc.add_argument("--W", default=None, help="cyclic data JSON")
    tc.add_argument("--tol", type=float, default=1e-8)
    tc.add_argument("--report", default=None)
    tc.add_argument("--plot", default=None)
    tc.set_defaults(func=cmd_toda_check)
    tr = tsub.add_parser("reconstruct")
    tr.add_argument("--grid", required=True)
    tr.add_argument("--out", required=True)
    tr.add_argument("--report", default=None)
    tr.set_defaults(func=cmd_toda_reconstruct)
    tk = tsub.add_parser("recursion")
    tk.add_argument("--grid", required=True)
    tk.add_argument("--W", default=None)
    tk.add_argument("--order", type=int, default=2)
    tk.add_argument("--report", default=None)
    tk.set_defaults(func=cmd_toda_recursion)

    pc = sub.add_parser("certify", help="aggregate property suite")
    pc.add_argument("what", choices=["all"])
    add_type(pc)
    pc.add_argument("--h", type=float, default=0.01)
    pc.add_argument("--lx", type=float, default=1.0)
    pc.add_argument("--ly", type=float, default=1.0)
    pc.add_argument("--seed", type=int, default=0)
    pc.add_argument("--report", default=None)
    pc.set_defaults(func=cmd_certify)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except (UsageError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
