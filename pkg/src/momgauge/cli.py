"""Command-line front end.

Every subcommand prints one JSON document to stdout. Exit codes: 0 success,
2 validation failure, 3 a residual or discrepancy above the bound when
``--assert`` is given.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import fieldsolve as fs
from . import gaugefield as gf
from . import landau as ld
from . import phasegrid as pg
from .errors import ConfigurationError

SCHEMA_VERSION = "1"
EXIT_OK, EXIT_VALIDATION, EXIT_ASSERT = 0, 2, 3


class ValidationError(Exception):
    pass


@dataclass
class RunConfig:
    """Parsed invocation: command, typed parameters, CSV target and seed."""

    command: str
    params: dict
    csv_path: str | None = None
    seed: int = 0

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "RunConfig":
        params = {k: v for k, v in vars(args).items() if k not in ("func", "command", "csv", "seed")}
        return cls(args.command, params, getattr(args, "csv", None), getattr(args, "seed", 0))

    def validate(self) -> None:
        for name, value in self.params.items():
            if isinstance(value, float) and not math.isfinite(value):
                raise ValidationError(f"--{name} must be finite")
            if name in ("n", "nmax", "nodes", "samples", "states") and value < 1:
                raise ValidationError(f"--{name} must be positive")


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        if not math.isfinite(v):
            raise ValidationError(f"non-finite value {v} in output")
        return v + 0.0  # normalizes -0.0
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def dumps(payload: dict) -> str:
    """Deterministic JSON: shortest round-trip floats, fixed key order."""
    body = {"schema_version": SCHEMA_VERSION, **payload}
    return json.dumps(_clean(body), indent=2, allow_nan=False) + "\n"


def write_csv(path: str, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([format(float(v) + 0.0, ".17g") for v in row])


def _finite(name: str, value: float) -> float:
    if not math.isfinite(value):
        raise ValidationError(f"--{name} must be finite")
    return value


def _pair_key(i: int, j: int) -> str:
    return f"{i}{j}"


# ---------------------------------------------------------------------------
# nc-check


def _load_config(path: str | None) -> gf.MomentumGaugeConfig:
    if path is None:
        return gf.SymmetricGauge2D(1.0)
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ValidationError(f"cannot read config: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ValidationError(f"malformed config JSON: {exc}") from None
    return gf.config_from_dict(data)


def cmd_nc_check(args) -> tuple[dict, int]:
    g = args.g
    try:
        comps = tuple(int(c) for c in args.components.split(","))
    except ValueError:
        raise ValidationError("--components needs two distinct 4-indices, e.g. 1,2") from None
    if len(comps) != 2 or any(c not in (0, 1, 2, 3) for c in comps) or comps[0] == comps[1]:
        raise ValidationError("--components needs two distinct 4-indices, e.g. 1,2")
    config = _load_config(args.config)
    grid = pg.make_grid(2, args.n, args.extent)
    rng = np.random.default_rng(args.seed)
    reach = min(1.5, args.extent - 3 * args.width - grid.spacing[0])
    if reach < 0:
        raise ValidationError("grid too small for the requested state width")
    centers = [np.zeros(2)] + [rng.uniform(-reach, reach, 2) for _ in range(args.states - 1)]
    states = [pg.gaussian_state(grid, c, args.width) for c in centers]
    report = pg.verify_noncommutativity(grid, config, g, states, args.hbar, comps)
    key = _pair_key(*comps)
    rkey = _pair_key(comps[1], comps[0])
    out = {
        "command": "nc-check",
        "config": config.to_dict(),
        "g": g,
        "hbar": args.hbar,
        "seed": args.seed,
        "grid": grid.to_dict(),
        "components": list(comps),
        "states": [{"center": c, "width": args.width} for c in centers],
        "theta": {key: report.theta[(0, 1)], rkey: report.theta[(1, 0)]},
        f"theta_{key}": report.theta[(0, 1)],
        "residual": {key: report.residual[(0, 1)], rkey: report.residual[(1, 0)]},
        "max_residual": report.max_residual,
        "bound": args.bound,
    }
    if args.dump_states:
        out["state_dump"] = [s.to_records() for s in states]
    code = EXIT_ASSERT if args.assert_ and report.max_residual > args.bound else EXIT_OK
    return out, code


# ---------------------------------------------------------------------------
# spectrum


def _params_from(ns: dict) -> ld.OscillatorParams:
    return ld.OscillatorParams(
        m=ns["m"], omega=ns["w"], e=ns["e"], g=ns["g"], B=ns["B"], Bm=ns["Bm"], hbar=ns["hbar"]
    )


def _spectrum_one(ns: dict) -> dict:
    params = _params_from(ns)
    H = ld.assemble_fock_hamiltonian(params, ns["nmax"], ns["reference"])
    spec = ld.diagonalize(H)
    levels = ld.analytic_spectrum(params, spec.trusted_count)
    out = {
        "params": params.to_dict(),
        "effective": ld.effective_params(params).to_dict(),
        "n_max": ns["nmax"],
        "reference": list(H.reference),
        "dimension": H.dimension,
        "eigenvalues": spec.trusted,
        "trusted_count": spec.trusted_count,
        "analytic": [lv.to_dict() for lv in levels],
        "max_trusted_discrepancy": ld.compare_levels(spec.trusted, [lv.energy for lv in levels]),
    }
    if ns.get("grid_cross_check"):
        n = ns["grid_cross_check"]
        grid = pg.make_grid(2, n, ns["grid_extent"])
        gspec = ld.diagonalize(ld.assemble_grid_hamiltonian(grid, params))
        k = min(5, gspec.trusted_count)
        out["grid_cross_check"] = {
            "grid": grid.to_dict(),
            "lowest": gspec.eigenvalues[:k],
            "fock_lowest": spec.eigenvalues[:k],
            "discrepancy": ld.compare_levels(gspec.eigenvalues[:k], spec.eigenvalues[:k]),
        }
    return out


def _sweep(path: str, base: dict, fn) -> list:
    try:
        entries = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot read sweep file: {exc}") from None
    if not isinstance(entries, list) or not all(isinstance(e, dict) for e in entries):
        raise ValidationError("sweep file must be a JSON list of objects")
    jobs = []
    for e in entries:
        unknown = set(e) - set(base)
        if unknown:
            raise ValidationError(f"unknown sweep keys {sorted(unknown)}")
        jobs.append({**base, **e})
    # validate everything before fanning out
    for j in jobs:
        for k, v in j.items():
            if isinstance(v, float):
                _finite(k, v)
    with ThreadPoolExecutor(max_workers=base.get("workers") or None) as pool:
        return list(pool.map(fn, jobs))


def cmd_spectrum(args) -> tuple[dict, int]:
    base = {k: getattr(args, k) for k in ("m", "w", "e", "g", "B", "Bm", "hbar", "nmax", "reference")}
    base.update(grid_cross_check=args.grid_cross_check, grid_extent=args.grid_extent, workers=args.workers)
    if args.sweep:
        results = _sweep(args.sweep, base, _spectrum_one)
        worst = max((r["max_trusted_discrepancy"] for r in results), default=0.0)
        out = {"command": "spectrum-sweep", "results": results, "max_trusted_discrepancy": worst}
    else:
        out = {"command": "spectrum", **_spectrum_one(base)}
        worst = out["max_trusted_discrepancy"]
    out["tol"] = args.tol
    code = EXIT_ASSERT if args.assert_ and worst > args.tol else EXIT_OK
    return out, code


# ---------------------------------------------------------------------------
# theta-map


def cmd_theta_map(args) -> tuple[dict, int]:
    g = args.g
    pa = args.pa
    if args.variant == "capacitor":
        config = gf.CapacitorStack(args.sigma, pa)
        mu, nu, strength = 0, 3, args.sigma
    else:
        config = gf.CurrentSheets(args.j, pa)
        mu, nu, strength = 2, 3, args.j
    extent = args.extent if args.extent is not None else 4 * pa
    grid = pg.make_grid(1, args.samples, extent)
    tmap = gf.theta_map(config, g, grid, components=(3,))
    plateaus = tmap.plateaus(mu, nu)
    if args.csv:
        write_csv(args.csv, ["p_z", f"theta_{mu}{nu}"], zip(tmap.points[:, 3], tmap.component(mu, nu)))
    out = {
        "command": "theta-map",
        "config": config.to_dict(),
        "g": g,
        "component": f"{mu}{nu}",
        "grid": grid.to_dict(),
        "expected_magnitude": 4 * math.pi * abs(strength * g),
        "plateaus": [
            {"value": p.value, "start": p.start, "end": p.end, "count": p.count} for p in plateaus
        ],
        "transitions": tmap.transitions(mu, nu),
        "expected_transitions": [-pa, pa],
    }
    return out, EXIT_OK


# ---------------------------------------------------------------------------
# solve-field


def _parse_sheet(text: str) -> fs.Sheet:
    parts = text.split(":")
    if len(parts) not in (2, 3):
        raise ValidationError(f"--sheet expects POS:STRENGTH[:KIND], got {text!r}")
    try:
        pos, q = float(parts[0]), float(parts[1])
    except ValueError:
        raise ValidationError(f"bad number in --sheet {text!r}") from None
    return fs.Sheet(pos, q, parts[2] if len(parts) == 3 else "charge")


def cmd_solve_field(args) -> tuple[dict, int]:
    pa = args.pa
    if args.variant and args.sheet:
        raise ValidationError("use either --variant or --sheet, not both")
    if args.variant == "capacitor":
        source = fs.MomentumSource1D.capacitor(args.sigma, pa)
    elif args.variant == "sheets":
        source = fs.MomentumSource1D.current_sheets(args.j, pa)
    elif args.variant == "ordinary-capacitor":
        source = fs.MomentumSource1D.ordinary_capacitor(args.sigma, pa)
    elif args.sheet:
        source = fs.MomentumSource1D(tuple(_parse_sheet(s) for s in args.sheet))
    else:
        raise ValidationError("no source given; use --variant or --sheet")
    if args.extent is not None:
        extent = args.extent
    elif source.sheets:
        extent = 4 * max(abs(s.position) for s in source.sheets)
    else:
        extent = 4 * pa
    if args.bc == "analytic":
        bc = "analytic"
    else:
        try:
            bc = tuple(float(v) for v in args.bc.split(","))
        except ValueError:
            raise ValidationError(f"--bc expects 'analytic' or 'LEFT,RIGHT', got {args.bc!r}") from None
        if len(bc) != 2:
            raise ValidationError("--bc needs two values")
    sol = fs.poisson_solve_1d(source, args.nodes, extent, bc)
    resid = fs.laplacian_residual(sol, source)
    out = {
        "command": "solve-field",
        "source": [{"position": s.position, "strength": s.strength, "kind": s.kind} for s in source.sheets],
        "kind": source.kind,
        "nodes": args.nodes,
        "half_extent": extent,
        "bc": bc if isinstance(bc, str) else list(bc),
        "source_sign": fs.SOURCE_SIGN,
        "convention": "d2C/dp2 = source_sign * 4*pi*rho; field = -dC/dp",
        "residual": resid.to_dict(),
        "bound": args.bound,
    }
    if bc == "analytic" and source.sheets:
        analytic = fs.analytic_solution(source)
        h = sol.spacing
        far = np.ones(len(sol.nodes), dtype=bool)
        for s in source.sheets:
            far &= np.abs(sol.nodes - s.position) > 2.5 * h
        far[:2] = far[-2:] = False
        out["plateaus"] = analytic.values
        out["max_plateau_deviation"] = float(np.max(np.abs(sol.field - analytic.field(sol.nodes))[far]))
    if args.csv:
        write_csv(args.csv, ["p_z", "potential", "field"], sol.rows())
    code = EXIT_ASSERT if args.assert_ and resid.max_abs_residual > args.bound else EXIT_OK
    return out, code


# ---------------------------------------------------------------------------
# reciprocity


def _reciprocity_one(ns: dict) -> dict:
    return ld.reciprocity_duality_check(ns["a"], ns["b"], ns["nmax"])


def cmd_reciprocity(args) -> tuple[dict, int]:
    base = {"a": args.a, "b": args.b, "nmax": args.nmax, "workers": args.workers}
    if args.sweep:
        results = _sweep(args.sweep, base, _reciprocity_one)
        worst = max((r["discrepancy"] for r in results), default=0.0)
        out = {"command": "reciprocity-sweep", "results": results, "max_discrepancy": worst}
    else:
        out = {"command": "reciprocity", **_reciprocity_one(base)}
        worst = out["discrepancy"]
    out["tol"] = args.tol
    code = EXIT_ASSERT if args.assert_ and worst > args.tol else EXIT_OK
    return out, code


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="momgauge",
        description="Momentum gauge fields, non-commutative coordinates and doubly gauged Landau levels.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_assert(p, default_bound, name="--bound"):
        p.add_argument("--assert", dest="assert_", action="store_true", help="exit 3 when the bound is exceeded")
        p.add_argument(name, type=float, default=default_bound)

    p = sub.add_parser("nc-check", help="check [X_i, X_j] = i g G_ij on Gaussian states")
    p.add_argument("--config", help='JSON file {"variant": ..., "params": {...}}; default SymmetricGauge2D B=1')
    p.add_argument("--g", type=float, default=1.0, help="momentum coupling g")
    p.add_argument("--n", type=int, default=64, help="points per axis")
    p.add_argument("--extent", type=float, default=8.0, help="grid half extent")
    p.add_argument("--hbar", type=float, default=1.0)
    p.add_argument("--width", type=float, default=0.7, help="Gaussian test-state width")
    p.add_argument("--states", type=int, default=5)
    p.add_argument("--seed", type=int, default=0, help="seed for test-state centers")
    p.add_argument("--components", default="1,2", help="4-indices spanned by the grid axes")
    p.add_argument("--dump-states", action="store_true")
    add_assert(p, 1e-6)
    p.set_defaults(func=cmd_nc_check)

    p = sub.add_parser("spectrum", help="Fock-basis spectrum against the closed form")
    for flag, default, help_ in [
        ("--m", 1.0, "mass"),
        ("--w", 1.0, "frequency omega"),
        ("--e", 0.0, "ordinary coupling e"),
        ("--g", 0.0, "momentum coupling g"),
        ("--B", 0.0, "ordinary magnetic field"),
        ("--Bm", 0.0, "momentum magnetic field"),
        ("--hbar", 1.0, "action scale"),
    ]:
        p.add_argument(flag, type=float, default=default, help=help_)
    p.add_argument("--nmax", type=int, default=20, help="quanta per mode")
    p.add_argument("--reference", choices=["bare", "effective"], default="bare")
    p.add_argument("--grid-cross-check", type=int, default=0, metavar="N", help="also diagonalize on an N x N momentum grid")
    p.add_argument("--grid-extent", type=float, default=8.0)
    p.add_argument("--sweep", help="JSON list of parameter overrides")
    p.add_argument("--workers", type=int, default=0)
    add_assert(p, 1e-8, "--tol")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("theta-map", help="momentum-dependent non-commutativity plateaus")
    p.add_argument("--variant", choices=["capacitor", "sheets"], required=True)
    p.add_argument("--sigma", type=float, default=1.0, help="sheet charge (capacitor)")
    p.add_argument("--j", type=float, default=1.0, help="sheet current (sheets)")
    p.add_argument("--pa", type=float, default=1.0, help="sheet position p_a")
    p.add_argument("--g", type=float, default=1.0)
    p.add_argument("--samples", type=int, default=400)
    p.add_argument("--extent", type=float, default=None, help="half extent, default 4*pa")
    p.add_argument("--csv", help="write (p_z, theta) rows here")
    p.set_defaults(func=cmd_theta_map)

    p = sub.add_parser("solve-field", help="1D momentum Poisson solve with residuals")
    p.add_argument("--variant", choices=["capacitor", "sheets", "ordinary-capacitor"])
    p.add_argument("--sheet", action="append", help="POS:STRENGTH[:KIND], repeatable")
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--j", type=float, default=1.0)
    p.add_argument("--pa", type=float, default=1.0)
    p.add_argument("--nodes", type=int, default=512)
    p.add_argument("--extent", type=float, default=None)
    p.add_argument("--bc", default="analytic", help="'analytic' or LEFT,RIGHT potential values")
    p.add_argument("--csv", help="write (p_z, potential, field) rows here")
    add_assert(p, 1e-10)
    p.set_defaults(func=cmd_solve_field)

    p = sub.add_parser("reciprocity", help="spectra of (eB, gBm) = (a, b) vs (-b, -a)")
    p.add_argument("--a", type=float, default=0.0)
    p.add_argument("--b", type=float, default=0.0)
    p.add_argument("--nmax", type=int, default=40)
    p.add_argument("--sweep", help="JSON list of {a, b, nmax} overrides")
    p.add_argument("--workers", type=int, default=0)
    add_assert(p, 1e-8, "--tol")
    p.set_defaults(func=cmd_reciprocity)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        RunConfig.from_args(args).validate()
        out, code = args.func(args)
        text = dumps(out)
    except (ValidationError, ConfigurationError, ZeroDivisionError) as exc:
        print(f"momgauge {args.command}: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
