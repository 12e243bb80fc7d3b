"""Truncation study for the Fock-basis Landau spectrum.

Draws ``(eB, gBm)`` uniformly in ``[-1, 1]^2`` (``m = omega = hbar = 1``),
diagonalizes on the ``n1, n2 <= n_max`` box and reports the worst deviation
of the trusted levels from the closed form, for the bare and the effective
reference oscillator.

    python3 scripts/landau_truncation_study.py --draws 20 --nmax 40
"""
import argparse
import math

import numpy as np

from momgauge import landau as ld


def deviation(params: ld.OscillatorParams, n_max: int, reference: str) -> float:
    s = ld.diagonalize(ld.assemble_fock_hamiltonian(params, n_max, reference))
    analytic = [lev.energy for lev in ld.analytic_spectrum(params, s.trusted_count)]
    return ld.compare_levels(s.trusted, analytic)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--draws", type=int, default=20)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--nmax", type=int, nargs="+", default=[40])
    parser.add_argument("--tol", type=float, default=1e-8)
    args = parser.parse_args(argv)

    rng = np.random.default_rng(args.seed)
    draws = [tuple(rng.uniform(-1.0, 1.0, size=2)) for _ in range(args.draws)]
    for n_max in args.nmax:
        print(f"n_max = {n_max}")
        print(f"{'eB':>8} {'gBm':>8} {'|lam|/w_eff':>12} {'bare':>10} {'effective':>10}")
        passed = {"bare": 0, "effective": 0}
        for eB, gBm in draws:
            p = ld.OscillatorParams(e=eB, B=1.0, g=gBm, Bm=1.0)
            eff = ld.effective_params(p)
            row = {ref: deviation(p, n_max, ref) for ref in passed}
            for ref, d in row.items():
                passed[ref] += d <= args.tol
            ratio = abs(eff.lz_coefficient) / eff.omega_eff
            print(f"{eB:8.4f} {gBm:8.4f} {ratio:12.4f} {row['bare']:10.2e} {row['effective']:10.2e}")
        for ref, count in passed.items():
            print(f"{ref}: {count}/{len(draws)} draws within {args.tol:g}")
        print()
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
