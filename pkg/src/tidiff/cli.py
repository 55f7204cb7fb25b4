"""Command-line front end.

Subcommands: validate (material sanity checks), curves (slowness/wave
sections), factor-diag (split-identity residuals), diffract
(coefficient sweeps with a self-certifying JSON manifest).  Output is
deterministic: fixed formatting, fixed node counts.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys

import numpy as np

from . import christoffel as ch
from . import codsolver as cod
from . import gtd
from . import spectral as sp
from .crackgeom import CrackCase, incident_wave
from .errors import TidiffError
from .material import NondimMaterial, load_material, nondimensionalize
from .wienerhopf import KERNEL_DEN, KERNEL_NUM, FactorTable

MATERIAL_DIR_ENV = "TIDIFF_MATERIAL_DIR"


def _resolve_material(path: str) -> str:
    if os.path.exists(path):
        return path
    base = os.environ.get(MATERIAL_DIR_ENV)
    if base:
        cand = os.path.join(base, path)
        if os.path.exists(cand):
            return cand
        cand = os.path.join(base, path + ".json")
        if os.path.exists(cand):
            return cand
    return path


def _load_nondim(path: str) -> NondimMaterial:
    return nondimensionalize(load_material(_resolve_material(path)))


def _material_hash(m: NondimMaterial) -> str:
    blob = json.dumps(m.moduli_key()).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def _parse_grid(spec: str) -> np.ndarray:
    try:
        start, stop, step = (float(p) for p in spec.split(":"))
    except ValueError as e:
        raise TidiffError(f"bad grid spec {spec!r}, expected start:stop:step") from e
    if step <= 0.0:
        raise TidiffError("grid step must be positive")
    n = int(np.floor((stop - start) / step + 1e-9)) + 1
    return start + step * np.arange(n)


# -- validate -----------------------------------------------------------------

def cmd_validate(args) -> int:
    try:
        mat = load_material(_resolve_material(args.material))
        m = nondimensionalize(mat)
    except TidiffError as e:
        print(f"FAIL material: {e}")
        return 1
    print(f"ok   material '{mat.name}': stability inequalities hold")
    print(f"     nondim moduli A11={m.A11:.6g} A12={m.A12:.6g} A13={m.A13:.6g} "
          f"A33={m.A33:.6g} B3={m.B3:.6g} (c0={m.c0:.6g} m/s)")

    for case in (CrackCase.AXIS_PERP, CrackCase.AXIS_IN_PLANE):
        xi2_values = [0.0]
        if case is CrackCase.AXIS_PERP:
            top = 0.95 / np.sqrt(m.B3)
            xi2_values = list(np.linspace(0.0, top, args.xi2_points))
        for q in xi2_values:
            try:
                sp.branch_points(case, q, m)
            except TidiffError as e:
                print(f"FAIL {case.value}: branch ordering at xi2={q:.4g}: {e}")
                return 1
        print(f"ok   {case.value}: branch-point ordering holds over "
              f"{len(xi2_values)} xi2 value(s)")
        try:
            ray = sp.rayleigh_pole(0.0, case, m)
        except TidiffError as e:
            print(f"FAIL {case.value}: surface-wave pole: {e}")
            return 1
        print(f"ok   {case.value}: surface-wave pole k_R={ray.k_R:.8g}")
    print("PASS all checks")
    return 0


# -- curves ------------------------------------------------------------------

def cmd_curves(args) -> int:
    m = _load_nondim(args.material)
    modes = ch.MODES if args.mode == "all" else (args.mode,)
    ch.write_curves_csv(args.out, m, modes=modes, n_points=args.n_points)
    print(f"wrote {args.out} ({len(modes)} mode(s), {args.n_points} points each)")
    return 0


# -- factor-diag ---------------------------------------------------------------

def cmd_factor_diag(args) -> int:
    m = _load_nondim(args.material)
    case = CrackCase.parse(args.case)
    table = FactorTable.build(case, args.xi2, m, n_half=args.nodes // 2)
    scale = table.bd.kappa_scale()
    grid = np.linspace(-args.span * scale, args.span * scale, args.n_points)
    keep = table._min_cut_distance(grid.astype(complex)) > 0.03 * scale
    keep &= table._min_cut_distance(-grid.astype(complex)) > 0.03 * scale
    for p in table.bd.branch_point_list() + [complex(table.rayleigh.kappa_R)]:
        keep &= np.abs(grid - p.real) > 0.03 * scale
        keep &= np.abs(grid + p.real) > 0.03 * scale
    grid = grid[keep]
    with open(args.out, "w", encoding="utf-8") as f:
        f.write("kernel,xi1,residual\n")
        worst = 0.0
        for name in (KERNEL_NUM, KERNEL_DEN):
            kv = table.kernel_value(name, grid)
            resid = np.abs(table.k_plus_any(name, grid)
                           * table.k_plus_any(name, -grid) / kv - 1.0)
            worst = max(worst, float(np.max(resid)))
            for x, rv in zip(grid, resid):
                f.write(f"{name},{x:.12g},{rv:.6e}\n")
    far = abs(complex(table.k_plus_any(KERNEL_NUM, 1e4)) - 1.0)
    print(f"wrote {args.out}; worst split-identity residual {worst:.3e}; "
          f"|K+(1e4)-1| = {far:.3e}")
    return 0 if worst < 1e-6 else 1


# -- diffract -------------------------------------------------------------------

def _apply_config(args, parser):
    if args.config:
        with open(args.config, "r", encoding="utf-8") as f:
            conf = json.load(f)
        for key, val in conf.items():
            dest = key.replace("-", "_")
            if not hasattr(args, dest):
                parser.error(f"unknown config key {key!r}")
            if parser.get_default(dest) == getattr(args, dest):
                setattr(args, dest, val)
    return args


def cmd_diffract(args) -> int:
    m = _load_nondim(args.material)
    case = CrackCase.parse(args.case)
    inc = incident_wave(case, args.mode_in, args.phi_in, args.theta_in, m)
    sol = cod.solve(case, inc, m, n_half=args.nodes // 2)
    grid = _parse_grid(args.grid)
    alphas = []
    for tok in args.alpha.split(","):
        tok = tok.strip()
        alphas.append(int(tok) if tok.isdigit() else gtd.ALPHA_OF_MODE[tok])
    results = [gtd.sweep(a, inc.mode, inc, grid, sol) for a in alphas]
    gtd.write_sweep_csv(args.out, results)

    diag = {"max_functional_residual": None, "g_residues": None}
    try:
        diag["max_functional_residual"] = cod.functional_residual(
            sol, cod.residual_grid(sol))
    except TidiffError:
        pass
    if sol.g is not None:
        rp, rm = cod.residue_conditions(sol)
        diag["g_residues"] = [float(np.linalg.norm(rp)),
                              float(np.linalg.norm(rm))]
    manifest = {
        "material": {"file": args.material, "hash": _material_hash(m),
                     "name": m.name},
        "case": case.value,
        "incident": {"mode": inc.mode, "phi_in": inc.phi_in,
                     "theta_in": inc.theta_in, "xi2": inc.xi2,
                     "wavenumber": inc.k_mag},
        "alphas": alphas,
        "grid": args.grid,
        "nodes_per_segment": args.nodes,
        "tolerances": {"shadow": gtd.GTDTolerances().shadow,
                       "cusp": gtd.GTDTolerances().cusp,
                       "cone": gtd.GTDTolerances().cone},
        "diagnostics": diag,
    }
    manifest_path = args.manifest or (os.path.splitext(args.out)[0] + ".manifest.json")
    with open(manifest_path, "w", encoding="utf-8") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
        f.write("\n")
    res = diag["max_functional_residual"]
    res_txt = "n/a" if res is None else f"{res:.3e}"
    print(f"wrote {args.out} and {manifest_path}; functional residual {res_txt}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="tidiff",
        description="edge-diffraction coefficients for a half-plane crack "
                    "in a transversely isotropic solid")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate", help="material stability / ordering / pole checks")
    v.add_argument("material")
    v.add_argument("--xi2-points", type=int, default=12)
    v.set_defaults(func=cmd_validate)

    c = sub.add_parser("curves", help="slowness and wave curve sections (CSV)")
    c.add_argument("material")
    c.add_argument("--mode", default="all", choices=("all",) + ch.MODES)
    c.add_argument("--n-points", type=int, default=720)
    c.add_argument("--out", default="curves.csv")
    c.set_defaults(func=cmd_curves)

    d = sub.add_parser("factor-diag", help="split-identity residuals (CSV)")
    d.add_argument("material")
    d.add_argument("--case", default="axis-perp",
                   choices=[c.value for c in CrackCase])
    d.add_argument("--xi2", type=float, default=0.0)
    d.add_argument("--nodes", type=int, default=200)
    d.add_argument("--span", type=float, default=3.0)
    d.add_argument("--n-points", type=int, default=121)
    d.add_argument("--out", default="factor_diag.csv")
    d.set_defaults(func=cmd_factor_diag)

    f = sub.add_parser("diffract", help="diffraction-coefficient sweep (CSV + manifest)")
    f.add_argument("material")
    f.add_argument("--config", help="JSON config; explicit flags override")
    f.add_argument("--case", default="axis-perp",
                   choices=[c.value for c in CrackCase])
    f.add_argument("--mode-in", default="qP", choices=ch.MODES)
    f.add_argument("--phi-in", type=float, default=90.0)
    f.add_argument("--theta-in", type=float, default=120.0)
    f.add_argument("--alpha", default="qP,qSV,qSH",
                   help="comma list of families (labels or indices 1..3)")
    f.add_argument("--grid", default="0:360:0.5", help="start:stop:step degrees")
    f.add_argument("--nodes", type=int, default=200)
    f.add_argument("--out", default="sweep.csv")
    f.add_argument("--manifest")
    f.set_defaults(func=cmd_diffract)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        args = _apply_config(args, parser)
    try:
        return args.func(args)
    except TidiffError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
