"""Characteristic flow of the gradient variable.

The reflection-symmetric nonlinearity enters all Lagrangian formulas through
the nonautonomous scalar ODE

    dq/du = -fbar(u, q),    q(u0) = q0,

whose solution operator we call the *evolution* of the characteristic flow.
This module integrates that ODE adaptively, co-integrating the sensitivity
of the solution with respect to the initial value q0 (the linearized
equation d(eta)/du = -fbar_q(u, q) * eta, eta(u0) = 1).

Negative q is allowed throughout; the flow is not stopped at q = 0.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp


class IntegrationFailure(RuntimeError):
    """Adaptive integration of the characteristic ODE broke down.

    Raised on a non-finite right-hand side or step-count exhaustion.
    ``u_reached`` is the last abscissa the integrator saw.
    """

    def __init__(self, message: str, u_reached: float):
        super().__init__(f"{message} (u reached: {u_reached:.6g})")
        self.u_reached = u_reached


class CharacteristicEscape(RuntimeError):
    """A characteristic left the configured |q| bound before completion."""

    def __init__(self, u_at_escape: float, context: str = ""):
        msg = f"characteristic escaped |q| bound at u={u_at_escape:.6g}"
        if context:
            msg += f" ({context})"
        super().__init__(msg)
        self.u_at_escape = u_at_escape


class Status(enum.Enum):
    COMPLETED = "completed"
    ESCAPED_BOUND = "escaped_bound"


@dataclass(frozen=True)
class NonlinearityO2:
    """Reflection-symmetric nonlinearity fbar(u, q) with q = p^2/2.

    ``f_bar_q`` is the partial derivative of ``f_bar`` in its second
    argument. Callables should accept numpy arrays in ``q`` (scalar
    fallback is handled by the integrator, at a cost).
    """

    f_bar: Callable[[float, float], float]
    f_bar_q: Callable[[float, float], float]
    label: str = ""

    def check_consistency(self, u_samples, q_samples, rel_tol: float = 1e-5) -> None:
        """Verify f_bar_q against a central difference of f_bar.

        Raises ValueError at the first sample where the relative mismatch
        exceeds ``rel_tol``.
        """
        for u in np.atleast_1d(u_samples):
            for q in np.atleast_1d(q_samples):
                h = 1e-6 * max(1.0, abs(q))
                fd = (self.f_bar(u, q + h) - self.f_bar(u, q - h)) / (2 * h)
                an = self.f_bar_q(u, q)
                scale = max(1.0, abs(an), abs(fd))
                if abs(fd - an) > rel_tol * scale:
                    raise ValueError(
                        f"f_bar_q inconsistent at (u={u}, q={q}): "
                        f"analytic {an:.8g} vs finite difference {fd:.8g}"
                    )


@dataclass(frozen=True)
class CharflowConfig:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    escape_bound: float = 1e12
    max_steps: int = 10**6

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("tolerances must be positive")
        if not (self.escape_bound > 0 and self.max_steps > 0):
            raise ValueError("escape_bound and max_steps must be positive")


@dataclass(frozen=True)
class EvolutionResult:
    value: float
    sensitivity: float
    status: Status
    u_at_escape: float | None = None


DEFAULT_CONFIG = CharflowConfig()


class _Abort(Exception):
    """Internal signal used to bail out of solve_ivp."""

    def __init__(self, u_reached, reason):
        self.u_reached = float(u_reached)
        self.reason = reason


def _eval_vec(fn, u, q):
    """Evaluate fn(u, q_array) elementwise, tolerating scalar-only callables."""
    try:
        out = np.asarray(fn(u, q), dtype=float)
    except (TypeError, ValueError):
        out = np.array([fn(u, qi) for qi in np.atleast_1d(q)], dtype=float)
    if out.shape != np.shape(q):
        out = np.broadcast_to(out, np.shape(q)).copy()
    return out


def evolve(
    nl: NonlinearityO2,
    u0: float,
    u1: float,
    q0: float,
    cfg: CharflowConfig = DEFAULT_CONFIG,
) -> EvolutionResult:
    """Evolution of the characteristic ODE from u0 to u1 (either direction).

    Returns the terminal value q(u1) together with its sensitivity to q0.
    If |q| exceeds ``cfg.escape_bound`` on the way, the result carries
    status ESCAPED_BOUND and the abscissa of the escape.
    """
    for v in (u0, u1, q0):
        if not np.isfinite(v):
            raise ValueError("evolve requires finite inputs")
    if u0 == u1:
        return EvolutionResult(float(q0), 1.0, Status.COMPLETED)

    nfev_budget = 7 * cfg.max_steps

    state = {"nfev": 0}

    def rhs(u, y):
        state["nfev"] += 1
        if state["nfev"] > nfev_budget:
            raise _Abort(u, "step budget exhausted")
        q, eta = y
        fv = nl.f_bar(u, q)
        fq = nl.f_bar_q(u, q)
        if not (np.isfinite(fv) and np.isfinite(fq)):
            raise _Abort(u, "non-finite right-hand side")
        return (-fv, -fq * eta)

    def escape(u, y):
        return abs(y[0]) - cfg.escape_bound

    escape.terminal = True

    try:
        sol = solve_ivp(
            rhs,
            (u0, u1),
            (float(q0), 1.0),
            method="RK45",
            rtol=cfg.rel_tol,
            atol=cfg.abs_tol,
            events=escape,
            dense_output=False,
        )
    except _Abort as ab:
        raise IntegrationFailure(ab.reason, ab.u_reached) from None

    if sol.status == 1:  # terminated by the escape event
        u_esc = float(sol.t_events[0][0])
        return EvolutionResult(
            float(sol.y[0, -1]), float(sol.y[1, -1]), Status.ESCAPED_BOUND, u_esc
        )
    if not sol.success:
        raise IntegrationFailure(sol.message, float(sol.t[-1]))
    return EvolutionResult(float(sol.y[0, -1]), float(sol.y[1, -1]), Status.COMPLETED)


def evolve_batch(
    nl: NonlinearityO2,
    u0: float,
    u1: float,
    q0: np.ndarray,
    cfg: CharflowConfig = DEFAULT_CONFIG,
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized evolution for many initial values over the same u-span.

    Returns (values, sensitivities). Escapes raise CharacteristicEscape:
    batched callers need all characteristics to complete.
    """
    q0 = np.asarray(q0, dtype=float)
    if q0.size == 0:
        return q0.copy(), np.ones_like(q0)
    if u0 == u1:
        return q0.copy(), np.ones_like(q0)
    m = q0.size

    def rhs(u, y):
        q = y[:m]
        eta = y[m:]
        fv = _eval_vec(nl.f_bar, u, q)
        fq = _eval_vec(nl.f_bar_q, u, q)
        if not (np.all(np.isfinite(fv)) and np.all(np.isfinite(fq))):
            raise _Abort(u, "non-finite right-hand side")
        return np.concatenate([-fv, -fq * eta])

    def escape(u, y):
        return np.max(np.abs(y[:m])) - cfg.escape_bound

    escape.terminal = True

    y0 = np.concatenate([q0.ravel(), np.ones(m)])
    try:
        sol = solve_ivp(
            rhs, (u0, u1), y0, method="RK45",
            rtol=cfg.rel_tol, atol=cfg.abs_tol, events=escape,
        )
    except _Abort as ab:
        raise IntegrationFailure(ab.reason, ab.u_reached) from None
    if sol.status == 1:
        raise CharacteristicEscape(float(sol.t_events[0][0]), "batched evolution")
    if not sol.success:
        raise IntegrationFailure(sol.message, float(sol.t[-1]))
    values = sol.y[:m, -1].reshape(q0.shape)
    sens = sol.y[m:, -1].reshape(q0.shape)
    return values, sens


def compose_check(
    nl: NonlinearityO2,
    u0: float,
    u1: float,
    u2: float,
    q0: float,
    cfg: CharflowConfig = DEFAULT_CONFIG,
) -> tuple[float, float]:
    """Two-leg versus direct evolution from u0 to u2.

    Returns (two-leg value, direct value); the evolution property says they
    agree up to integration error.
    """
    leg1 = evolve(nl, u0, u1, q0, cfg)
    if leg1.status is not Status.COMPLETED:
        raise CharacteristicEscape(leg1.u_at_escape, "compose_check leg u0->u1")
    leg2 = evolve(nl, u1, u2, leg1.value, cfg)
    if leg2.status is not Status.COMPLETED:
        raise CharacteristicEscape(leg2.u_at_escape, "compose_check leg u1->u2")
    direct = evolve(nl, u0, u2, q0, cfg)
    if direct.status is not Status.COMPLETED:
        raise CharacteristicEscape(direct.u_at_escape, "compose_check direct leg")
    return leg2.value, direct.value


def verify_equilibrium_first_integral(
    nl: NonlinearityO2,
    u_init: float,
    p_init: float,
    x_span: float,
    cfg: CharflowConfig = DEFAULT_CONFIG,
    n_check: int = 64,
) -> float:
    """First-integral defect of the characteristic flow along an equilibrium.

    Integrates the stationary profile ODE u'' = -fbar(u, u'^2/2) from
    (u_init, p_init) over [0, x_span] and compares q(x) = u'(x)^2/2 against
    the characteristic evolution started from q = p_init^2/2 at u_init.
    Returns the maximum absolute mismatch over the trajectory; a small value
    confirms that the evolution is a first integral of the equilibrium ODE.
    """
    if p_init == 0:
        raise ValueError("p_init must be nonzero (positivity domain of q)")

    def rhs(x, y):
        u, p = y
        fv = nl.f_bar(u, 0.5 * p * p)
        if not np.isfinite(fv):
            raise _Abort(x, "equilibrium blow-up")
        return (p, -fv)

    try:
        sol = solve_ivp(
            rhs, (0.0, x_span), (float(u_init), float(p_init)),
            method="RK45", rtol=cfg.rel_tol, atol=cfg.abs_tol,
            dense_output=True,
        )
    except _Abort as ab:
        raise IntegrationFailure(ab.reason, ab.u_reached) from None
    if not sol.success:
        raise IntegrationFailure(sol.message, float(sol.t[-1]))

    xs = np.linspace(0.0, x_span, n_check)
    defect = 0.0
    q0 = 0.5 * p_init * p_init
    for x in xs[1:]:
        u, p = sol.sol(x)
        res = evolve(nl, u_init, float(u), q0, cfg)
        if res.status is not Status.COMPLETED:
            raise CharacteristicEscape(res.u_at_escape, f"first integral at x={x:.4g}")
        defect = max(defect, abs(0.5 * p * p - res.value))
    return defect
