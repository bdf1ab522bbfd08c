"""Command-line front end for scenario runs and quick self-checks.

Exit codes: 0 on success, 2 if the PDE run blew up, 3 if a Lyapunov
construction failed (characteristic escape or integration breakdown).
"""

from __future__ import annotations

import argparse
import copy
import json
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import charflow, harness
from .lagrangian import DOUBLE_INTEGRAL, REDUCED, LagrangianEvaluator
from .functional import ScalarField, gradient

EXIT_OK = 0
EXIT_BLOWUP = 2
EXIT_CONSTRUCTION_FAILURE = 3

_STATUS_CODES = {"ok": EXIT_OK, "blowup": EXIT_BLOWUP,
                 "construction_failure": EXIT_CONSTRUCTION_FAILURE}


def _set_path(tree: dict, dotted: str, value):
    keys = dotted.split(".")
    node = tree
    for k in keys[:-1]:
        node = node[k]
    leaf = keys[-1]
    old = node.get(leaf)
    if isinstance(old, bool):
        node[leaf] = value.lower() in ("1", "true", "yes")
    elif isinstance(old, int) and not isinstance(old, bool):
        node[leaf] = int(value)
    elif isinstance(old, float):
        node[leaf] = float(value)
    else:
        try:
            node[leaf] = float(value)
        except ValueError:
            node[leaf] = value


def _run_one(cfg_dict: dict) -> str:
    cfg = harness.ScenarioConfig.from_dict(cfg_dict)
    _, extras = harness.run_scenario(cfg)
    return extras["status"]


def cmd_run(args) -> int:
    cfg = harness.parse_config(args.config)
    _, extras = harness.run_scenario(cfg)
    print(f"{cfg.scenario}: {extras['status']}"
          + (f" -> {extras.get('output_dir', '')}" if "output_dir" in extras else ""))
    if extras["status"] != "ok" and "error" in extras:
        print(f"  {extras['error']}", file=sys.stderr)
    return _STATUS_CODES[extras["status"]]


def cmd_sweep(args) -> int:
    base = harness.parse_config(args.config).to_dict()
    values = args.values.split(",")
    jobs = []
    for v in values:
        d = copy.deepcopy(base)
        _set_path(d, args.param, v)
        out = d.get("output_path") or f"runs/{d['scenario']}"
        d["output_path"] = f"{out}_{args.param.split('.')[-1]}={v}"
        jobs.append(d)
    worst = EXIT_OK
    with ProcessPoolExecutor(max_workers=args.workers) as pool:
        for v, status in zip(values, pool.map(_run_one, jobs)):
            print(f"{args.param}={v}: {status}")
            worst = max(worst, _STATUS_CODES[status])
    return worst


def cmd_list_scenarios(_args) -> int:
    for name in sorted(harness.SCENARIOS):
        print(f"{name:20s} {harness.SCENARIOS[name]}")
    return EXIT_OK


def cmd_check(_args) -> int:
    """Fast built-in invariant suite (a subset of the full test suite)."""
    failures = 0

    def check(name, ok):
        nonlocal failures
        print(f"{'PASS' if ok else 'FAIL'}  {name}")
        failures += 0 if ok else 1

    nl = harness.gradient_quadratic_nl(b=1.0, slope=-1.0)
    res = charflow.evolve(nl, 0.7, 0.7, 1.3)
    check("charflow identity", res.value == 1.3 and res.sensitivity == 1.0)

    two_leg, direct = charflow.compose_check(nl, -0.5, 0.3, 0.9, 0.4)
    check("charflow composition",
          abs(two_leg - direct) <= 1e-9 * max(1.0, abs(direct)))

    fwd = charflow.evolve(nl, 0.2, 1.1, 0.6)
    back = charflow.evolve(nl, 1.1, 0.2, fwd.value)
    check("charflow inverse", abs(back.value - 0.6) <= 1e-8)

    ev_d = LagrangianEvaluator(nl, form=DOUBLE_INTEGRAL)
    ev_r = LagrangianEvaluator(nl, form=REDUCED)
    pts = [(0.5, 1.0), (-0.8, 2.0), (1.2, -1.5)]
    ok = all(abs(ev_d.L(u, p) - ev_r.L(u, p))
             <= 1e-6 * max(1.0, abs(ev_r.L(u, p))) for u, p in pts)
    check("Lagrangian form equivalence", ok)

    check("convexity weight positive",
          all(ev_r.L_pp(u, p) > 0 for u, p in pts))

    x = np.arange(256) / 256.0
    fld = ScalarField(np.sin(2 * np.pi * x), 1.0)
    err = np.max(np.abs(gradient(fld).values - 2 * np.pi * np.cos(2 * np.pi * x)))
    check("gradient stencil accuracy", err < 2e-3)

    print(f"{'OK' if failures == 0 else 'FAILED'}: "
          f"{6 - failures}/6 checks passed")
    return EXIT_OK if failures == 0 else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="circlyap",
        description="Lyapunov-function scenarios for parabolic PDEs on the circle")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one scenario from a JSON config file")
    p_run.add_argument("config")
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="run a scenario over a parameter sweep")
    p_sweep.add_argument("config")
    p_sweep.add_argument("--param", required=True,
                         help="dotted config path, e.g. params.lam")
    p_sweep.add_argument("--values", required=True,
                         help="comma-separated values")
    p_sweep.add_argument("--workers", type=int, default=None)
    p_sweep.set_defaults(func=cmd_sweep)

    p_check = sub.add_parser("check", help="run the built-in invariant suite")
    p_check.set_defaults(func=cmd_check)

    p_list = sub.add_parser("list-scenarios", help="list available scenarios")
    p_list.set_defaults(func=cmd_list_scenarios)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
