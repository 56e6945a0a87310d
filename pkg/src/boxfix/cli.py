"""Command-line front end: solve / label / dcn / degree / sperner / game.

Exit codes: 0 success, 1 solver abort, 2 input validation error.  All
outputs are byte-stable for fixed inputs and flags; no environment
variables are consulted.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .correspondences import MapSpecError, bimatrix_map_spec, load_map_spec
from .dcn import dcn_extension, is_dcn
from .degree import (
    LabeledTriangulation,
    boundary_degree_2d,
    boundary_label_cycle,
    completely_labeled_triangles,
    nondegenerate_valid,
    sperner_valid,
)
from .labeling import LabelingConfig, dump_grid_csv, label_grid
from .solver import Candidate, GridSpec, SolverAbort, SolverConfig, scan, solve


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tol", type=float, default=1e-7, help="fixed-point tolerance eps_fix")
    p.add_argument("--initial-res", type=int, default=8, help="initial cells per axis")
    p.add_argument("--max-depth", type=int, default=6, help="number of refinement rounds")
    p.add_argument("--face-mode", choices=("equality", "subcube"), default="equality")
    p.add_argument("--filter", choices=("off", "piecewise-exact"), default="off")
    p.add_argument("--policy", choices=("centroid", "first"), default="centroid")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--report", type=Path, help="write the solve report JSON here")
    p.add_argument("--dump-grid", type=Path, help="write the depth-0 labeling CSV here")
    p.add_argument("--plot", type=Path, help="render a figure of the run here (.png)")


def _solver_config(args) -> SolverConfig:
    return SolverConfig(
        initial_resolution=args.initial_res,
        max_depth=args.max_depth,
        eps_fix=args.tol,
        face_mode=args.face_mode,
        filter=args.filter,
        policy=args.policy,
        seed=args.seed,
        early_exit=args.dump_grid is None,
    )


def _run_solve_outputs(spec, cfg: SolverConfig, args) -> int:
    report = solve(spec, cfg)
    if args.report:
        args.report.write_text(report.to_json())
    gl = None
    cands = None
    if args.dump_grid or args.plot:
        from .correspondences import build_correspondence

        f = build_correspondence(spec)
        lcfg = LabelingConfig(
            eps_fix=cfg.eps_fix, tau_sign=cfg.tau_sign, policy=cfg.policy,
            early_exit=False, carrier_domain=f.domain,
        )
        gl = label_grid(GridSpec(f.domain, cfg.initial_resolution), f, lcfg)
        cands = scan(gl, f, cfg)
    if args.dump_grid:
        dump_grid_csv(gl, args.dump_grid)
    if args.plot:
        from .plots import render_solve_figure

        render_solve_figure(report.to_dict(), args.plot, gl=gl, candidates=cands)
    point = ",".join(repr(x) for x in report.point)
    print(f"status={report.status} point=({point}) residual={report.residual!r}")
    return 0


def _cmd_solve(args) -> int:
    spec = load_map_spec(args.map)
    return _run_solve_outputs(spec, _solver_config(args), args)


def _cmd_label(args) -> int:
    from .correspondences import build_correspondence

    spec = load_map_spec(args.map)
    f = build_correspondence(spec)
    lcfg = LabelingConfig(eps_fix=args.tol, early_exit=False, carrier_domain=f.domain)
    gl = label_grid(GridSpec(f.domain, args.initial_res), f, lcfg)
    dump_grid_csv(gl, args.dump_grid)
    cfg = SolverConfig(initial_resolution=max(args.initial_res, 2), eps_fix=args.tol)
    cands = scan(gl, f, cfg)
    if args.plot:
        from .plots import render_labeling

        render_labeling(gl, cands, path=args.plot)
    n_fixed = int(gl.fixed.sum())
    n_complete = sum(1 for c in cands if c.kind == "CompleteCell")
    n_faces = sum(1 for c in cands if c.kind == "ProblematicFace")
    print(
        f"vertices={gl.grid.n_vertices} fixed={n_fixed} "
        f"complete_cells={n_complete} problematic_faces={n_faces}"
    )
    return 0


def parse_sign_string(s: str) -> tuple:
    out = []
    for ch in s.strip():
        if ch == "+":
            out.append(1)
        elif ch == "-":
            out.append(-1)
        elif ch == "0":
            out.append(0)
        else:
            raise ValueError(f"invalid sign character {ch!r} in {s!r}")
    if not out:
        raise ValueError("empty sign string")
    return tuple(out)


def format_signs(sigma) -> str:
    return "(" + ",".join("+" if s > 0 else "-" if s < 0 else "0" for s in sigma) + ")"


def _cmd_dcn(args) -> int:
    labels = []
    for part in args.set.split(","):
        part = part.strip()
        if not part:
            continue
        lab = parse_sign_string(part)
        if len(lab) != args.d:
            raise ValueError(f"label {part!r} has {len(lab)} signs, expected d={args.d}")
        if any(s == 0 for s in lab):
            raise ValueError(f"orthant label {part!r} must not contain 0")
        labels.append(lab)
    if not labels:
        raise ValueError("--set must name at least one label")
    result = is_dcn(labels, args.d)
    if result:
        print(
            f"dcn=true witness={format_signs(result.witness)} "
            f"cut_included={str(result.cut_included).lower()}"
        )
    else:
        ext = dcn_extension(labels, args.d)
        ext_str = ",".join(
            "".join("+" if s > 0 else "-" for s in lab) for lab in sorted(ext)
        ) if ext else "none"
        print(f"dcn=false extension={ext_str}")
    return 0


def _load_triangulation(path) -> LabeledTriangulation:
    try:
        obj = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ValueError(f"labeling: cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ValueError(f"labeling: malformed JSON: {exc}") from None
    return LabeledTriangulation.from_json(obj)


def _cmd_degree(args) -> int:
    t = _load_triangulation(args.labeling)
    result = boundary_degree_2d(boundary_label_cycle(t), t.target_n)
    if result.ambiguous:
        print("note: cycle crosses diametrically opposite labels; positive arc chosen",
              file=sys.stderr)
    print(result.degree)
    return 0


def _cmd_sperner(args) -> int:
    t = _load_triangulation(args.labeling)
    sper = sperner_valid(t) if len(t.polygon) == 3 and t.target_n == 3 else None
    nondeg = nondegenerate_valid(t)
    count = len(completely_labeled_triangles(t))
    sper_str = "na" if sper is None else str(sper).lower()
    print(
        f"sperner_valid={sper_str} nondegenerate={str(nondeg).lower()} "
        f"completely_labeled={count}"
    )
    return 0


def parse_matrix_literal(text: str):
    rows = text.split(";")
    if len(rows) == 1:
        vals = [float(v) for v in text.split(",")]
        if len(vals) != 4:
            raise ValueError(f"matrix literal needs 4 row-major entries, got {len(vals)}")
        return np.array(vals).reshape(2, 2)
    m = [[float(v) for v in row.split(",")] for row in rows]
    arr = np.array(m)
    if arr.shape != (2, 2):
        raise ValueError(f"matrix literal must be 2x2, got shape {arr.shape}")
    return arr


NAMED_GAMES = {
    "matching-pennies": ([[1.0, -1.0], [-1.0, 1.0]], [[-1.0, 1.0], [1.0, -1.0]]),
    "coordination": ([[1.0, 0.0], [0.0, 1.0]], [[1.0, 0.0], [0.0, 1.0]]),
}


def _cmd_game(args) -> int:
    if args.game:
        A, B = NAMED_GAMES[args.game]
    elif args.A and args.B:
        A = parse_matrix_literal(args.A)
        B = parse_matrix_literal(args.B)
    else:
        raise ValueError("game: provide --game NAME or both --A and --B")
    spec = bimatrix_map_spec(A, B)
    emit = args.emit_spec
    if emit is None:
        emit = (
            args.report.with_suffix(".mapspec.json")
            if args.report
            else Path("bimatrix_spec.json")
        )
    emit.write_text(json.dumps(spec.raw, sort_keys=True, indent=2) + "\n")
    return _run_solve_outputs(spec, _solver_config(args), args)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="boxfix",
        description="Locate fixed points of multivalued maps on boxes by orthant "
        "labeling of cubical grids.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="run the fixed-point search on a map spec")
    p.add_argument("--map", required=True, type=Path, help="MapSpec JSON file")
    _add_solver_flags(p)
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("label", help="label one grid and dump it as CSV")
    p.add_argument("--map", required=True, type=Path)
    p.add_argument("--initial-res", type=int, default=8)
    p.add_argument("--tol", type=float, default=1e-7)
    p.add_argument("--dump-grid", required=True, type=Path)
    p.add_argument("--plot", type=Path)
    p.set_defaults(func=_cmd_label)

    p = sub.add_parser("dcn", help="decide whether a label set is a dcn set")
    p.add_argument("--d", required=True, type=int)
    p.add_argument("--set", required=True, help='comma-separated sign strings, e.g. "+++,++-"')
    p.set_defaults(func=_cmd_dcn)

    p = sub.add_parser("degree", help="boundary degree of a labeled triangulation")
    p.add_argument("--labeling", required=True, type=Path, help="triangulation JSON")
    p.set_defaults(func=_cmd_degree)

    p = sub.add_parser("sperner", help="validate a labeling and count complete triangles")
    p.add_argument("--labeling", required=True, type=Path)
    p.set_defaults(func=_cmd_sperner)

    p = sub.add_parser("game", help="solve a 2x2 bimatrix game's best-response map")
    p.add_argument("--game", choices=sorted(NAMED_GAMES))
    p.add_argument("--A", help="row-major 2x2 payoff literal, e.g. '1,-1,-1,1'")
    p.add_argument("--B", help="row-major 2x2 payoff literal")
    p.add_argument("--emit-spec", type=Path, help="where to write the generated MapSpec")
    _add_solver_flags(p)
    p.set_defaults(func=_cmd_game)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except (MapSpecError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SolverAbort as exc:
        print(f"solver abort: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())
