"""Momentum-threshold non-commutativity from sheet sources.

Prints ``Theta`` along ``p_z`` for the capacitor (``Theta_03``) and the
current sheets (``Theta_23``), next to the same component rebuilt from the
numerical Poisson field, then the detected plateaus. ``G_03 = +E_z`` and
``G_23 = -Bm_x``; the solver value on a sheet node is the centered average.

    python3 scripts/theta_threshold_demo.py --strength 1 --pa 1 --g 0.5
"""
import argparse

import numpy as np

from momgauge import fieldsolve as fs
from momgauge import gaugefield as gf
from momgauge import phasegrid as pg


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--strength", type=float, default=1.0, help="sheet charge or current")
    parser.add_argument("--pa", type=float, default=1.0)
    parser.add_argument("--g", type=float, default=1.0)
    parser.add_argument("--nodes", type=int, default=512)
    parser.add_argument("--rows", type=int, default=17, help="rows of the printed profile")
    args = parser.parse_args(argv)

    S, pa, g = args.strength, args.pa, args.g
    cases = [
        ("capacitor", gf.CapacitorStack(S, pa), (0, 3), 1.0, fs.MomentumSource1D.capacitor(S, pa)),
        ("current sheets", gf.CurrentSheets(S, pa), (2, 3), -1.0, fs.MomentumSource1D.current_sheets(S, pa)),
    ]
    for name, cfg, (mu, nu), sign, source in cases:
        sol = fs.poisson_solve_1d(source, n_nodes=args.nodes, half_extent=4 * pa)
        tm = gf.theta_map(cfg, g, sol.nodes[:, None] * np.eye(4)[3])
        theta = tm.component(mu, nu) + 0.0
        solved = sign * g * sol.field + 0.0
        print(f"{name}: Theta_{mu}{nu}(p_z), S = {S:g}, p_a = {pa:g}, g = {g:g}")
        print(f"{'p_z':>9} {'Theta':>12} {'from solver':>12}")
        for k in np.linspace(0, len(sol.nodes) - 1, args.rows).astype(int):
            print(f"{sol.nodes[k]:9.4f} {theta[k]:12.6f} {solved[k]:12.6f}")
        line = pg.make_grid(1, args.nodes, 4 * pa)
        for p in gf.theta_map(cfg, g, line).plateaus(mu, nu):
            print(f"  plateau {p.value + 0.0:+.6f} on [{p.start:.4f}, {p.end:.4f}] ({p.count} samples)")
        print()
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
