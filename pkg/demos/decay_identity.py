"""Verifying dV/dt = -\\int L_pp u_t^2 dx by direct simulation.

Along any solution of u_t = u_xx + f(u, u_x) on the circle, the
constructed functional V satisfies the decay identity with the positive
weight L_pp.  Discretely the identity holds up to a residual that is
second order in both the grid spacing and the save spacing: doubling the
resolution should shrink it by about 4x.  This script runs the same
gradient-dependent scenario at two resolutions and prints the residual
refinement table.

Usage:  python3 decay_identity.py [--scenario gradient_quadratic]
"""

import argparse

import numpy as np

from circlyap.harness import ScenarioConfig, run_scenario
from circlyap.pde import SolverConfig


def snapped_solver(n, dt_save, t_end, a=1.0, ell=1.0):
    """Step size chosen so the save grid is exactly uniform."""
    h = ell / n
    m = int(np.ceil(dt_save / (0.4 * h * h / a)))
    return SolverConfig(n=n, dt=dt_save / m, t_end=t_end, save_every=m)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--scenario", default="gradient_quadratic",
                    choices=["gradient_quadratic", "chafee_infante",
                             "qlinear"])
    args = ap.parse_args()

    if args.scenario == "gradient_quadratic":
        params = {"b": 1.0, "slope": -1.0, "burn_in": 0.05}
        levels = [(256, 5e-4), (512, 2.5e-4)]
        t_end, a = 0.05, 1.0
    elif args.scenario == "chafee_infante":
        params = {"lam": 15.0, "burn_in": 0.1}
        levels = [(256, 2e-3), (512, 1e-3)]
        t_end, a = 0.02, 1.0
    else:  # quasilinear: constant coefficient abar = 2 weights the identity
        params = {"lam": 15.0, "a_const": 2.0, "burn_in": 0.05}
        levels = [(256, 5e-4), (512, 2.5e-4)]
        t_end, a = 0.05, 2.0

    print(f"scenario: {args.scenario}")
    print(f"{'n':>6} {'dt_save':>10} {'max residual':>14} "
          f"{'residual / max|dV/dt|':>22}")
    ratios = []
    for n, dt_save in levels:
        cfg = ScenarioConfig(
            scenario=args.scenario, params=params,
            initial={"kind": "random_smooth", "seed": 11},
            solver=snapped_solver(n, dt_save, t_end, a=a))
        _, extras = run_scenario(cfg, write=False)
        res = np.nanmax(extras["residual"])
        scale = max(1.0, np.nanmax(np.abs(extras["dissipation"])))
        ratios.append(res / scale)
        print(f"{n:>6} {dt_save:>10.1e} {res:>14.3e} {res / scale:>22.3e}")
    print(f"refinement drop: {ratios[0] / ratios[1]:.2f}x (second order => "
          f"about 4x)")


if __name__ == "__main__":
    main()
