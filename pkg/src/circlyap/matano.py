"""Separated-boundary-condition Lagrange function and its periodic obstruction.

For general reaction terms f(x, u, u_x) under Dirichlet (or Neumann)
boundary conditions, the convexity exponent g(x, u, p) of the Lagrange
function solves a first-order linear PDE by the method of characteristics:
along du/dx = p, dp/dx = -f the exponent accumulates f_p, normalized to
g = 0 at x = 0.

Under periodic boundary conditions the same recipe demands that the
accumulated f_p vanish around every 1-periodic characteristic orbit; the
``integrability_defect`` routine locates such an orbit by single shooting
and reports that integral. A nonzero value certifies the obstruction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .charflow import (
    DEFAULT_CONFIG,
    CharacteristicEscape,
    CharflowConfig,
    IntegrationFailure,
    _Abort,
)
from .functional import DIRICHLET, ScalarField, gradient, quadrature_weights
from .lagrangian import QuadratureConfig, _unit_rule, quad_nodes_weights
from .pde import GeneralNonlinearity, TrajectoryRecord


@dataclass
class CharacteristicState:
    """State carried along a characteristic: position, profile, slope and
    the accumulated convexity exponent."""

    x: float
    u: float
    p: float
    g: float


def _char_batch(nl: GeneralNonlinearity, x: float, us: np.ndarray,
                ps: np.ndarray, cfg: CharflowConfig) -> np.ndarray:
    """g(x, u_k, p_k) for batched states, one backward solve to x = 0."""
    us = np.asarray(us, dtype=float)
    ps = np.asarray(ps, dtype=float)
    m = us.size
    if x == 0.0:
        return np.zeros(m)

    def rhs(s, y):
        u, p = y[:m], y[m:2 * m]
        fv = np.asarray(nl.f(s, u, p), dtype=float)
        fp = np.asarray(nl.f_p(s, u, p), dtype=float)
        if not (np.all(np.isfinite(fv)) and np.all(np.isfinite(fp))):
            raise _Abort(s, "non-finite right-hand side")
        return np.concatenate([p, -np.broadcast_to(fv, (m,)),
                               np.broadcast_to(fp, (m,))])

    def escape(s, y):
        return max(np.max(np.abs(y[:m])), np.max(np.abs(y[m:2 * m]))) \
            - cfg.escape_bound

    escape.terminal = True

    y0 = np.concatenate([us, ps, np.zeros(m)])
    try:
        sol = solve_ivp(rhs, (x, 0.0), y0, method="RK45",
                        rtol=cfg.rel_tol, atol=cfg.abs_tol, events=escape)
    except _Abort as ab:
        raise IntegrationFailure(ab.reason, ab.u_reached) from None
    if sol.status == 1:
        raise CharacteristicEscape(float(sol.t_events[0][0]),
                                   f"backward characteristic from x={x:.6g}")
    if not sol.success:
        raise IntegrationFailure(sol.message, float(sol.t[-1]))
    # accumulated integral runs from x down to 0; g is its negative
    return -sol.y[2 * m:, -1]


def g_value(nl: GeneralNonlinearity, x: float, u: float, p: float,
            cfg: CharflowConfig = DEFAULT_CONFIG) -> float:
    """Convexity exponent g(x, u, p), normalized to vanish at x = 0."""
    return float(_char_batch(nl, x, np.array([u]), np.array([p]), cfg)[0])


class SeparatedEvaluator:
    """Cached evaluator of the separated-BC Lagrange function L(x, u, p)."""

    def __init__(self, nl: GeneralNonlinearity,
                 charflow_cfg: CharflowConfig = DEFAULT_CONFIG,
                 quad_cfg: QuadratureConfig | None = None):
        self.nl = nl
        self.charflow_cfg = charflow_cfg
        self.quad_cfg = quad_cfg or QuadratureConfig()
        self._g_cache: dict = {}

    def _key(self, *vals):
        return tuple(round(float(v), 12) for v in vals)

    def g(self, x, u, p) -> float:
        key = self._key(x, u, p)
        got = self._g_cache.get(key)
        if got is None:
            got = g_value(self.nl, x, u, p, self.charflow_cfg)
            self._g_cache[key] = got
        return got

    def _g_many(self, x, us, ps) -> np.ndarray:
        us = np.asarray(us, dtype=float)
        ps = np.asarray(ps, dtype=float)
        out = np.empty(us.size)
        missing_u, missing_p, idx = [], [], []
        for i, (u, p) in enumerate(zip(us.ravel(), ps.ravel())):
            got = self._g_cache.get(self._key(x, u, p))
            if got is None:
                missing_u.append(u)
                missing_p.append(p)
                idx.append(i)
            else:
                out[i] = got
        if missing_u:
            vals = _char_batch(self.nl, x, np.array(missing_u),
                               np.array(missing_p), self.charflow_cfg)
            for i, u, p, v in zip(idx, missing_u, missing_p, vals):
                out[i] = v
                self._g_cache[self._key(x, u, p)] = v
        return out

    def F(self, x, u) -> float:
        nodes, w = quad_nodes_weights(self.quad_cfg.rule,
                                      self.quad_cfg.panels, 0.0, u)
        if nodes.size == 0:
            return 0.0
        gv = self._g_many(x, nodes, np.zeros_like(nodes))
        f0 = np.asarray(self.nl.f(x, nodes, np.zeros_like(nodes)), dtype=float)
        return float(np.dot(w, f0 * np.exp(gv)))

    def L(self, x, u, p) -> float:
        outer_nodes, outer_w = quad_nodes_weights(
            self.quad_cfg.rule, self.quad_cfg.panels, 0.0, p)
        total = 0.0
        for p1, w1 in zip(outer_nodes, outer_w):
            inner_nodes, inner_w = quad_nodes_weights(
                self.quad_cfg.rule, self.quad_cfg.nested_panels, 0.0, p1)
            if inner_nodes.size == 0:
                continue
            gv = self._g_many(x, np.full(inner_nodes.size, u), inner_nodes)
            total += w1 * float(np.dot(inner_w, np.exp(gv)))
        return total - self.F(x, u)

    def L_pp(self, x, u, p) -> float:
        return float(np.exp(self.g(x, u, p)))

    def g_batch(self, xs, us, ps) -> np.ndarray:
        """g at paired samples with varying x, in a single backward solve.

        Each span [x_k, 0] is rescaled to a common parameter s in [1, 0],
        so characteristics from every sample advance together.
        """
        xs = np.asarray(xs, dtype=float).ravel()
        us = np.asarray(us, dtype=float).ravel()
        ps = np.asarray(ps, dtype=float).ravel()
        m = xs.size
        nl, cfg = self.nl, self.charflow_cfg

        def rhs(s, y):
            u, p = y[:m], y[m:2 * m]
            pos = xs * s
            fv = np.asarray(nl.f(pos, u, p), dtype=float)
            fp = np.asarray(nl.f_p(pos, u, p), dtype=float)
            if not (np.all(np.isfinite(fv)) and np.all(np.isfinite(fp))):
                raise _Abort(s, "non-finite right-hand side")
            return np.concatenate([xs * p, -xs * np.broadcast_to(fv, (m,)),
                                   xs * np.broadcast_to(fp, (m,))])

        def escape(s, y):
            return max(np.max(np.abs(y[:m])), np.max(np.abs(y[m:2 * m]))) \
                - cfg.escape_bound

        escape.terminal = True

        y0 = np.concatenate([us, ps, np.zeros(m)])
        try:
            sol = solve_ivp(rhs, (1.0, 0.0), y0, method="RK45",
                            rtol=cfg.rel_tol, atol=cfg.abs_tol, events=escape)
        except _Abort as ab:
            raise IntegrationFailure(ab.reason, ab.u_reached) from None
        if sol.status == 1:
            raise CharacteristicEscape(float(sol.t_events[0][0]),
                                       "batched backward characteristics")
        if not sol.success:
            raise IntegrationFailure(sol.message, float(sol.t[-1]))
        return -sol.y[2 * m:, -1]

    def field_eval(self, fld: ScalarField):
        """L, L_pp and F over a whole gridded field in one fused solve.

        Builds every quadrature node of the nested p-integrals and the
        F-integrals for all grid points, evaluates g on the full batch,
        and assembles the Lagrange function values.
        """
        x = fld.grid()
        u = fld.values
        p = gradient(fld).values
        n = x.size
        panels = self.quad_cfg.panels
        frac, wfrac = _unit_rule(self.quad_cfg.rule, panels)
        m = frac.size

        # nested nodes p2 = frac_k * p1, p1 = frac_j * p
        p1 = p[:, None] * frac[None, :]                       # (n, m)
        w1 = p[:, None] * wfrac[None, :]
        p2 = p1[:, :, None] * frac[None, None, :]             # (n, m, m)
        w2 = p1[:, :, None] * wfrac[None, None, :]
        u_nodes = u[:, None] * frac[None, :]                  # (n, m) for F
        wF = u[:, None] * wfrac[None, :]

        xs = np.concatenate([
            np.repeat(x, m * m),
            np.repeat(x, m),
            x,
        ])
        us = np.concatenate([
            np.repeat(u, m * m),
            u_nodes.ravel(),
            u,
        ])
        ps = np.concatenate([
            p2.ravel(),
            np.zeros(n * m),
            p,
        ])
        g_all = self.g_batch(xs, us, ps)
        g_inner = g_all[:n * m * m].reshape(n, m, m)
        g_F = g_all[n * m * m:n * m * m + n * m].reshape(n, m)
        g_star = g_all[n * m * m + n * m:]

        f0 = np.asarray(self.nl.f(np.repeat(x, m), u_nodes.ravel(),
                                  np.zeros(n * m)), dtype=float).reshape(n, m)
        F_vals = np.sum(wF * f0 * np.exp(g_F), axis=1)
        inner = np.sum(w2 * np.exp(g_inner), axis=2)          # (n, m)
        L_vals = np.sum(w1 * inner, axis=1) - F_vals
        return {"L": L_vals, "L_pp": np.exp(g_star), "F": F_vals}


def L_separated(nl: GeneralNonlinearity, x: float, u: float, p: float,
                charflow_cfg: CharflowConfig = DEFAULT_CONFIG,
                quad_cfg: QuadratureConfig | None = None) -> float:
    """One-shot evaluation of the separated-BC Lagrange function."""
    return SeparatedEvaluator(nl, charflow_cfg, quad_cfg).L(x, u, p)


def functional_V(ev: SeparatedEvaluator, fld: ScalarField) -> float:
    w = quadrature_weights(fld)
    return float(np.dot(w, ev.field_eval(fld)["L"]))


def weighted_dissipation(ev: SeparatedEvaluator, fld: ScalarField,
                         u_t: ScalarField) -> float:
    lpp = ev.field_eval(fld)["L_pp"]
    w = quadrature_weights(fld)
    return -float(np.dot(w, lpp * u_t.values**2))


def field_report(ev: SeparatedEvaluator, fld: ScalarField,
                 u_t: ScalarField):
    """(V, dissipation, min L_pp) of one snapshot from a single fused solve."""
    fe = ev.field_eval(fld)
    w = quadrature_weights(fld)
    V = float(np.dot(w, fe["L"]))
    diss = -float(np.dot(w, fe["L_pp"] * u_t.values**2))
    return V, diss, float(np.min(fe["L_pp"]))


def decay_identity_residual(nl: GeneralNonlinearity, trajectory: TrajectoryRecord,
                            charflow_cfg: CharflowConfig = DEFAULT_CONFIG,
                            quad_cfg: QuadratureConfig | None = None) -> np.ndarray:
    """Centered-difference check of dV/dt against the dissipation integral.

    Expects a Dirichlet trajectory. Returns one residual per interior save
    point; the residuals shrink at second order under grid and save-density
    refinement.
    """
    if trajectory.snapshots[0].bc != DIRICHLET:
        raise ValueError("decay identity check expects a Dirichlet trajectory")
    ev = SeparatedEvaluator(nl, charflow_cfg, quad_cfg)
    ts = trajectory.times
    VD = [field_report(ev, s, ut) for s, ut in
          zip(trajectory.snapshots, trajectory.u_t_snapshots)]
    Vs = np.array([v for v, _, _ in VD])
    Ds = np.array([d for _, d, _ in VD])
    res = []
    for k in range(1, len(ts) - 1):
        dVdt = (Vs[k + 1] - Vs[k - 1]) / (ts[k + 1] - ts[k - 1])
        res.append(abs(dVdt - Ds[k]))
    return np.array(res)


def _flow_map(nl: GeneralNonlinearity, z: np.ndarray,
              cfg: CharflowConfig, with_fp: bool = False):
    """Characteristic flow over x in [0, 1] from initial state z = (u, p)."""

    def rhs(x, y):
        u, p = y[0], y[1]
        out = [p, -float(nl.f(x, u, p))]
        if with_fp:
            out.append(float(nl.f_p(x, u, p)))
        return out

    y0 = list(z) + ([0.0] if with_fp else [])
    sol = solve_ivp(rhs, (0.0, 1.0), y0, method="RK45",
                    rtol=cfg.rel_tol, atol=cfg.abs_tol, dense_output=with_fp)
    if not sol.success:
        raise IntegrationFailure(sol.message, float(sol.t[-1]))
    return sol


def integrability_defect(nl: GeneralNonlinearity,
                         periodic_orbit_seed: tuple[float, float],
                         cfg: CharflowConfig = DEFAULT_CONFIG,
                         max_iter: int = 50,
                         tol: float = 1e-10,
                         return_orbit: bool = False):
    """Accumulated f_p around a 1-periodic characteristic orbit.

    Locates the orbit by Newton iteration on the period-1 return map,
    starting from the seed; the Jacobian is finite-differenced and solved
    by least squares (the phase direction of an orbit family is neutral).
    Returns the integral of f_p along the located orbit. A nonzero value
    is the obstruction to the separated-BC construction on the circle.
    """
    z = np.array(periodic_orbit_seed, dtype=float)

    def residual(zz):
        sol = _flow_map(nl, zz, cfg)
        return sol.y[:2, -1] - zz

    converged = False
    for _ in range(max_iter):
        r = residual(z)
        if np.max(np.abs(r)) < tol:
            converged = True
            break
        J = np.empty((2, 2))
        for j in range(2):
            h = 1e-7 * max(1.0, abs(z[j]))
            e = np.zeros(2)
            e[j] = h
            J[:, j] = (residual(z + e) - residual(z - e)) / (2 * h)
        step, *_ = np.linalg.lstsq(J, -r, rcond=None)
        # damp overly long steps along the neutral phase direction
        norm = np.linalg.norm(step)
        if norm > 1.0:
            step *= 1.0 / norm
        z = z + step
    if not converged and np.max(np.abs(residual(z))) >= tol:
        raise RuntimeError(
            f"shooting failed to locate a 1-periodic characteristic orbit "
            f"in {max_iter} iterations (residual {np.max(np.abs(residual(z))):.3g})")

    sol = _flow_map(nl, z, cfg, with_fp=True)
    defect = float(sol.y[2, -1])
    if return_orbit:
        return defect, (float(z[0]), float(z[1]))
    return defect
