#!/usr/bin/env python3
"""Step-size study: splitting error against the rotation oracle.

Halving dt should cut the error by a factor of four on both engines.
"""

import argparse

import numpy as np

from liouq import (
    EvolverConfig,
    GridSpec,
    Harmonic,
    PhaseSpaceDistribution,
    liouville_evolve_xp,
    make_gaussian_phase_space,
    von_neumann_evolve,
    xp_to_Qq,
)

SIGMA = 1.0 / np.sqrt(2.0)


def rotation_oracle(grid, cx, t):
    X, P = np.meshgrid(grid.x, grid.p, indexing="ij")
    x0 = X * np.cos(t) - P * np.sin(t)
    p0 = X * np.sin(t) + P * np.cos(t)
    vals = np.exp(-0.5 * ((x0 - cx) / SIGMA) ** 2 - 0.5 * (p0 / SIGMA) ** 2)
    ref = np.exp(-0.5 * ((X - cx) / SIGMA) ** 2 - 0.5 * (P / SIGMA) ** 2)
    return vals / (ref.sum() * grid.spacing * grid.momentum_spacing)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--t-final", type=float, default=0.5)
    parser.add_argument("--steps", type=int, nargs="+", default=[100, 200, 400, 800])
    args = parser.parse_args()

    grid = GridSpec(64, 8.0)
    f0 = make_gaussian_phase_space(0.4, 0.0, SIGMA, SIGMA, grid)
    v = Harmonic(1.0)
    oracle = rotation_oracle(grid, 0.4, args.t_final)
    oracle_qq = xp_to_Qq(PhaseSpaceDistribution(grid, oracle, args.t_final)).values

    print(f"{'n_steps':>8} {'dt':>10} {'classical err':>14} {'commutator err':>15}")
    prev = None
    for n in args.steps:
        cfg = EvolverConfig(dt=args.t_final / n, n_steps=n, record_every=n)
        err_c = np.abs(
            liouville_evolve_xp(f0, v, cfg).states[-1].values - oracle
        ).max()
        err_q = np.abs(
            von_neumann_evolve(xp_to_Qq(f0), v, cfg).states[-1].values - oracle_qq
        ).max()
        note = "" if prev is None else f"  ratio {prev / err_c:.2f}"
        print(f"{n:8d} {args.t_final / n:10.2e} {err_c:14.3e} {err_q:15.3e}{note}")
        prev = err_c
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
