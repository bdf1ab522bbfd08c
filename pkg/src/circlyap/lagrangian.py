"""Lagrange function for the reflection-symmetric construction.

Builds the integrand L(u, p) of the Lyapunov functional, its convexity
weight L_pp = exp(Fq), and the ingredients Fq, F and the auxiliary phi,
in two equivalent forms:

* ``double_integral``: the double p-quadrature of exp(Fq) minus F(u),
* ``reduced``: p * phi(u, p) - Psi^{0,u}(p^2/2),

where Psi is the characteristic evolution from :mod:`circlyap.charflow`.

Fq(u, q) is obtained by co-integrating the scalar transport equation
dg/du = fbar_q(u, q(u)) along a single characteristic through (u, q),
normalized to g = 0 at u = 0. This is one integration pass per (u, q)
instead of one characteristic solve per quadrature node.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.integrate import solve_ivp

from .charflow import (
    DEFAULT_CONFIG,
    CharacteristicEscape,
    CharflowConfig,
    IntegrationFailure,
    NonlinearityO2,
    _Abort,
    _eval_vec,
    evolve_batch,
)

SIMPSON = "simpson"
GAUSS_LEGENDRE = "gauss_legendre"

DOUBLE_INTEGRAL = "double_integral"
REDUCED = "reduced"


@dataclass(frozen=True)
class QuadratureConfig:
    rule: str = SIMPSON
    panels: int = 64
    nested_panels: int = 64

    def __post_init__(self):
        if self.rule not in (SIMPSON, GAUSS_LEGENDRE):
            raise ValueError(f"unknown quadrature rule: {self.rule!r}")
        if self.nested_panels < 2 or self.panels < 2:
            raise ValueError("panels and nested_panels must be >= 2")
        if self.rule == SIMPSON and (self.panels % 2 or self.nested_panels % 2):
            raise ValueError("Simpson panel counts must be even")


def quad_nodes_weights(rule: str, panels: int, a: float, b: float):
    """Nodes and weights for integrating over [a, b] (b may lie below a)."""
    if a == b:
        return np.empty(0), np.empty(0)
    if rule == SIMPSON:
        nodes = np.linspace(a, b, panels + 1)
        h = (b - a) / panels
        w = np.full(panels + 1, 2.0)
        w[1::2] = 4.0
        w[0] = w[-1] = 1.0
        return nodes, w * (h / 3.0)
    x, w = leggauss(panels)
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    return mid + half * x, half * w


def _unit_rule(rule: str, panels: int):
    """Nodes and weights on [0, 1]; scale nodes by an endpoint to cover
    [0, b] with weights scaled by the same factor."""
    if rule == SIMPSON:
        frac = np.linspace(0.0, 1.0, panels + 1)
        wfrac = np.full(panels + 1, 2.0)
        wfrac[1::2] = 4.0
        wfrac[0] = wfrac[-1] = 1.0
        return frac, wfrac / (3.0 * panels)
    xg, wg = leggauss(panels)
    return 0.5 * (xg + 1.0), 0.5 * wg


def _key(x: float) -> float:
    return round(float(x), 12)


@dataclass
class LagrangianEvaluator:
    """Cached evaluator of L and its ingredients for one nonlinearity.

    Instances memoize characteristic and transport solves keyed by their
    arguments rounded to integration tolerance. Confine each instance to a
    single thread; distinct instances may run concurrently.
    """

    nl: NonlinearityO2
    charflow_cfg: CharflowConfig = DEFAULT_CONFIG
    quad_cfg: QuadratureConfig = field(default_factory=QuadratureConfig)
    form: str = REDUCED

    def __post_init__(self):
        if self.form not in (DOUBLE_INTEGRAL, REDUCED):
            raise ValueError(f"unknown Lagrangian form: {self.form!r}")
        self._fq_cache: dict = {}
        self._psi_cache: dict = {}
        self._F_cache: dict = {}

    # -- characteristic solves -------------------------------------------

    def _transport_batch(self, u: float, qs: np.ndarray) -> np.ndarray:
        """Fq(u, q) for an array of q, by one vectorized transport solve."""
        qs = np.asarray(qs, dtype=float)
        out = np.empty_like(qs)
        missing, idx = [], []
        for i, q in enumerate(qs.ravel()):
            cached = self._fq_cache.get((_key(u), _key(q)))
            if cached is None:
                missing.append(q)
                idx.append(i)
            else:
                out.ravel()[i] = cached
        if not missing:
            return out
        vals = self._transport_solve(u, np.array(missing))
        for i, q, v in zip(idx, missing, vals):
            out.ravel()[i] = v
            self._fq_cache[(_key(u), _key(q))] = v
        return out

    def _transport_solve(self, u: float, qs: np.ndarray) -> np.ndarray:
        """Integrate (q, g) from u down to 0; returns Fq = -g(0)."""
        if u == 0.0:
            return np.zeros_like(qs)
        nl, cfg = self.nl, self.charflow_cfg
        m = qs.size

        def rhs(s, y):
            q = y[:m]
            fv = _eval_vec(nl.f_bar, s, q)
            fq = _eval_vec(nl.f_bar_q, s, q)
            if not (np.all(np.isfinite(fv)) and np.all(np.isfinite(fq))):
                raise _Abort(s, "non-finite right-hand side")
            return np.concatenate([-fv, fq])

        def escape(s, y):
            return np.max(np.abs(y[:m])) - cfg.escape_bound

        escape.terminal = True

        y0 = np.concatenate([qs, np.zeros(m)])
        try:
            sol = solve_ivp(rhs, (u, 0.0), y0, method="RK45",
                            rtol=cfg.rel_tol, atol=cfg.abs_tol, events=escape)
        except _Abort as ab:
            raise IntegrationFailure(ab.reason, ab.u_reached) from None
        if sol.status == 1:
            raise CharacteristicEscape(float(sol.t_events[0][0]),
                                       f"transport solve from u={u:.6g}")
        if not sol.success:
            raise IntegrationFailure(sol.message, float(sol.t[-1]))
        return -sol.y[m:, -1]

    def _psi_batch(self, u: float, qs: np.ndarray):
        """(Psi^{0,u}(q), Psi_q^{0,u}(q)) for an array of q, cached."""
        qs = np.asarray(qs, dtype=float)
        vals = np.empty_like(qs)
        sens = np.empty_like(qs)
        missing, idx = [], []
        for i, q in enumerate(qs.ravel()):
            cached = self._psi_cache.get((_key(u), _key(q)))
            if cached is None:
                missing.append(q)
                idx.append(i)
            else:
                vals.ravel()[i], sens.ravel()[i] = cached
        if missing:
            try:
                v, s = evolve_batch(self.nl, u, 0.0, np.array(missing),
                                    self.charflow_cfg)
            except CharacteristicEscape as esc:
                raise CharacteristicEscape(
                    esc.u_at_escape, f"evolution Psi^(0,{u:.6g})") from None
            for i, q, vi, si in zip(idx, missing, v, s):
                vals.ravel()[i], sens.ravel()[i] = vi, si
                self._psi_cache[(_key(u), _key(q))] = (vi, si)
        return vals, sens

    # -- ingredients ------------------------------------------------------

    def F_q(self, u: float, q: float) -> float:
        """Accumulated partial derivative exponent Fq(u, q)."""
        return float(self._transport_batch(u, np.array([q]))[0])

    def F(self, u: float) -> float:
        """F(u) by quadrature of fbar(u1, 0) * exp(Fq(u1, 0)) over [0, u]."""
        cached = self._F_cache.get(_key(u))
        if cached is not None:
            return cached
        nodes, w = quad_nodes_weights(self.quad_cfg.rule, self.quad_cfg.panels,
                                      0.0, u)
        total = 0.0
        for u1, wi in zip(nodes, w):
            fq = self._transport_batch(u1, np.array([0.0]))[0]
            total += wi * self.nl.f_bar(u1, 0.0) * math.exp(fq)
        self._F_cache[_key(u)] = total
        return total

    def phi(self, u: float, p: float) -> float:
        """Antiderivative in p of the evolution sensitivity at q = p^2/2."""
        nodes, w = quad_nodes_weights(self.quad_cfg.rule, self.quad_cfg.panels,
                                      0.0, p)
        if nodes.size == 0:
            return 0.0
        _, sens = self._psi_batch(u, 0.5 * nodes**2)
        return float(np.dot(w, sens))

    # -- Lagrange function ------------------------------------------------

    def L(self, u: float, p: float) -> float:
        if self.form == REDUCED:
            vals, _ = self._psi_batch(u, np.array([0.5 * p * p]))
            return p * self.phi(u, p) - float(vals[0])
        return self._L_double(u, p)

    def _L_double(self, u: float, p: float) -> float:
        outer_nodes, outer_w = quad_nodes_weights(
            self.quad_cfg.rule, self.quad_cfg.panels, 0.0, p)
        total = 0.0
        for p1, w1 in zip(outer_nodes, outer_w):
            inner_nodes, inner_w = quad_nodes_weights(
                self.quad_cfg.rule, self.quad_cfg.nested_panels, 0.0, p1)
            if inner_nodes.size == 0:
                continue
            fq = self._transport_batch(u, 0.5 * inner_nodes**2)
            total += w1 * float(np.dot(inner_w, np.exp(fq)))
        return total - self.F(u)

    def L_pp(self, u: float, p: float) -> float:
        """Convexity weight exp(Fq(u, p^2/2)); strictly positive."""
        return math.exp(self.F_q(u, 0.5 * p * p))

    def field_eval(self, u_arr, p_arr):
        """Reduced-form L and L_pp over paired sample arrays, in one solve.

        Rescales every characteristic span [u_i, 0] to a common parameter
        s in [1, 0] and integrates all quadrature-node characteristics,
        their sensitivities and the transport exponents as one stacked
        system. Feeds the Fq cache so pointwise queries on the same samples
        are free afterwards.
        """
        u_arr = np.asarray(u_arr, dtype=float)
        p_arr = np.asarray(p_arr, dtype=float)
        npts = u_arr.size
        frac, wfrac = _unit_rule(self.quad_cfg.rule, self.quad_cfg.panels)
        m = frac.size

        nodes = p_arr[:, None] * frac[None, :]          # (npts, m)
        weights = p_arr[:, None] * wfrac[None, :]
        q_nodes = 0.5 * nodes**2
        q_star = 0.5 * p_arr**2

        # stacked state: node characteristics, node sensitivities,
        # star characteristics, star transport exponents
        u_out_nodes = np.repeat(u_arr, m)
        nl, cfg = self.nl, self.charflow_cfg

        def rhs(s, y):
            qn = y[:npts * m]
            eta = y[npts * m:2 * npts * m]
            qs = y[2 * npts * m:2 * npts * m + npts]
            un = u_out_nodes * 1.0
            fv_n = np.asarray(nl.f_bar(un * s, qn), dtype=float)
            fq_n = np.asarray(nl.f_bar_q(un * s, qn), dtype=float)
            fv_s = np.asarray(nl.f_bar(u_arr * s, qs), dtype=float)
            fq_s = np.asarray(nl.f_bar_q(u_arr * s, qs), dtype=float)
            if not (np.all(np.isfinite(fv_n)) and np.all(np.isfinite(fv_s))):
                raise _Abort(s, "non-finite right-hand side")
            return np.concatenate([
                -un * np.broadcast_to(fv_n, un.shape),
                -un * np.broadcast_to(fq_n, un.shape) * eta,
                -u_arr * np.broadcast_to(fv_s, u_arr.shape),
                u_arr * np.broadcast_to(fq_s, u_arr.shape),
            ])

        def escape(s, y):
            return np.max(np.abs(y[:2 * npts * m + npts])) - cfg.escape_bound

        escape.terminal = True

        y0 = np.concatenate([q_nodes.ravel(), np.ones(npts * m),
                             q_star, np.zeros(npts)])
        try:
            sol = solve_ivp(rhs, (1.0, 0.0), y0, method="RK45",
                            rtol=cfg.rel_tol, atol=cfg.abs_tol, events=escape)
        except _Abort as ab:
            raise IntegrationFailure(ab.reason, ab.u_reached) from None
        if sol.status == 1:
            raise CharacteristicEscape(float(sol.t_events[0][0]),
                                       "batched field evaluation")
        if not sol.success:
            raise IntegrationFailure(sol.message, float(sol.t[-1]))
        yf = sol.y[:, -1]
        eta = yf[npts * m:2 * npts * m].reshape(npts, m)
        psi_star = yf[2 * npts * m:2 * npts * m + npts]
        fq_star = -yf[2 * npts * m + npts:]
        phi = np.sum(weights * eta, axis=1)
        L_vals = p_arr * phi - psi_star
        lpp = np.exp(fq_star)
        for u, q, fq in zip(u_arr, q_star, fq_star):
            self._fq_cache.setdefault((_key(u), _key(q)), fq)
        return {"L": L_vals, "L_pp": lpp, "phi": phi, "psi": psi_star,
                "F_q": fq_star}

    def L_pp_field(self, u_arr, p_arr) -> np.ndarray:
        """L_pp on paired arrays of (u, p) samples."""
        u_arr = np.asarray(u_arr, dtype=float)
        p_arr = np.asarray(p_arr, dtype=float)
        out = np.empty_like(u_arr)
        for i in range(u_arr.size):
            out.ravel()[i] = self.L_pp(u_arr.ravel()[i], p_arr.ravel()[i])
        return out


def effective_nonlinearity(f_bar: NonlinearityO2, a_bar: NonlinearityO2) -> NonlinearityO2:
    """Quotient nonlinearity fbar / abar for the quasilinear construction.

    The diffusion coefficient ``a_bar`` must be positive wherever it is
    sampled; a non-positive value raises ValueError at evaluation time.
    """

    def _check_positive(av):
        if np.any(np.asarray(av) <= 0.0):
            raise ValueError("diffusion coefficient must be uniformly positive")

    def quotient(u, q):
        av = a_bar.f_bar(u, q)
        _check_positive(av)
        return f_bar.f_bar(u, q) / av

    def quotient_q(u, q):
        av = a_bar.f_bar(u, q)
        _check_positive(av)
        return (f_bar.f_bar_q(u, q) * av - f_bar.f_bar(u, q) * a_bar.f_bar_q(u, q)) / av**2

    label = f"({f_bar.label or 'f'})/({a_bar.label or 'a'})"
    return NonlinearityO2(quotient, quotient_q, label)
