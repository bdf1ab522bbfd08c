"""Method-of-lines integrator for u_t = a * u_xx + f(x, u, u_x).

Second-order central stencils in space; explicit RK4 or an IMEX scheme
(Crank-Nicolson diffusion, Adams-Bashforth 2 reaction) in time. The IMEX
path needs a constant diffusion coefficient.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .functional import DIRICHLET, NEUMANN, PERIODIC, FunctionalReport, ScalarField

BLOWUP_THRESHOLD = 1e6

RK4 = "rk4"
IMEX = "imex"


@dataclass(frozen=True)
class GeneralNonlinearity:
    """Reaction term f(x, u, p) with its advection partial f_p.

    Callables must broadcast over numpy arrays in all three arguments.
    """

    f: Callable
    f_p: Callable
    x_periodic: bool = True

    def check_consistency(self, x_samples, u_samples, p_samples,
                          rel_tol: float = 1e-5) -> None:
        for x in np.atleast_1d(x_samples):
            for u in np.atleast_1d(u_samples):
                for p in np.atleast_1d(p_samples):
                    h = 1e-6 * max(1.0, abs(p))
                    fd = (self.f(x, u, p + h) - self.f(x, u, p - h)) / (2 * h)
                    an = self.f_p(x, u, p)
                    scale = max(1.0, abs(an), abs(fd))
                    if abs(fd - an) > rel_tol * scale:
                        raise ValueError(
                            f"f_p inconsistent at (x={x}, u={u}, p={p}): "
                            f"analytic {an:.8g} vs finite difference {fd:.8g}")


@dataclass
class SolverConfig:
    n: int = 256
    dt: float | None = None  # default 0.4 * (l/n)^2 / a
    t_end: float = 1.0
    save_every: int = 100
    scheme: str = RK4

    def __post_init__(self):
        if self.n < 8:
            raise ValueError("need at least 8 grid points")
        if self.dt is not None and self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.t_end <= 0:
            raise ValueError("t_end must be positive")
        if self.scheme not in (RK4, IMEX):
            raise ValueError(f"unknown scheme: {self.scheme!r}")


@dataclass
class TrajectoryRecord:
    times: np.ndarray
    snapshots: list
    u_t_snapshots: list
    reports: list | None = None
    blew_up: bool = False
    blowup_time: float | None = None


def _normalize_a(a):
    """Return (callable or None, constant value or None)."""
    if a is None:
        return None, 1.0
    if np.isscalar(a):
        val = float(a)
        return (lambda x, u, p: np.full_like(np.asarray(u, dtype=float), val)), val
    return a, None


def laplacian(field: ScalarField) -> np.ndarray:
    u = field.values
    h2 = field.dx**2
    if field.bc == PERIODIC:
        return (np.roll(u, -1) - 2 * u + np.roll(u, 1)) / h2
    uxx = np.empty_like(u)
    uxx[1:-1] = (u[2:] - 2 * u[1:-1] + u[:-2]) / h2
    if field.bc == DIRICHLET:
        uxx[0] = uxx[-1] = 0.0  # boundary values are pinned; u_t = 0 there
    else:  # Neumann: mirror ghost values
        uxx[0] = 2 * (u[1] - u[0]) / h2
        uxx[-1] = 2 * (u[-2] - u[-1]) / h2
    return uxx


def rhs(nl: GeneralNonlinearity, a, field: ScalarField) -> ScalarField:
    """Semi-discrete right-hand side a * u_xx + f(x, u, u_x)."""
    from .functional import gradient

    a_fn, _ = _normalize_a(a)
    u = field.values
    x = field.grid()
    p = gradient(field).values
    uxx = laplacian(field)
    coeff = a_fn(x, u, p) if a_fn is not None else 1.0
    out = coeff * uxx + nl.f(x, u, p)
    if field.bc == DIRICHLET:
        out = np.array(out, dtype=float)
        out[0] = out[-1] = 0.0
    if not np.all(np.isfinite(out)):
        bad = int(np.argmax(~np.isfinite(np.asarray(out))))
        raise FloatingPointError(f"non-finite right-hand side at grid index {bad}")
    return field.like(out)


def _diffusion_matrix(n: int, h: float, bc: str) -> sp.csc_matrix:
    h2 = h * h
    main = np.full(n, -2.0)
    off = np.ones(n - 1)
    A = sp.diags([off, main, off], (-1, 0, 1), format="lil")
    if bc == PERIODIC:
        A[0, -1] = 1.0
        A[-1, 0] = 1.0
    elif bc == DIRICHLET:
        A[0, :] = 0.0
        A[-1, :] = 0.0
    else:  # Neumann, mirrored ghosts
        A[0, 0], A[0, 1] = -2.0, 2.0
        A[-1, -1], A[-1, -2] = -2.0, 2.0
    return sp.csc_matrix(A / h2)


def integrate(nl: GeneralNonlinearity, a, u0: ScalarField,
              cfg: SolverConfig) -> TrajectoryRecord:
    """Advance the semi-discrete system and record snapshots.

    Snapshots and the discrete right-hand side are stored every
    ``save_every`` steps. Integration stops early with a blow-up record if
    max|u| exceeds 1e6 or the state turns non-finite.
    """
    a_fn, a_const = _normalize_a(a)
    h = u0.dx
    a_scale = a_const if a_const is not None else 1.0
    dt = cfg.dt if cfg.dt is not None else 0.4 * h * h / a_scale
    if cfg.scheme == RK4 and a_const is not None and dt * 4 * a_const / (h * h) > 2.8:
        warnings.warn("time step exceeds the explicit diffusion stability limit",
                      stacklevel=2)
    if cfg.scheme == IMEX and a_const is None:
        raise ValueError("IMEX stepping needs a constant diffusion coefficient")

    # tolerate round-off when t_end is an exact multiple of dt
    n_steps = int(np.ceil(cfg.t_end / dt - 1e-9))
    u = u0.values.copy()
    make = u0.like

    times, snaps, rhs_snaps = [], [], []

    def record(t, uv):
        fld = make(uv.copy())
        times.append(t)
        snaps.append(fld)
        rhs_snaps.append(rhs(nl, a_fn if a_const is None else a_const, fld))

    def finish(blew_up=False, t_blow=None):
        return TrajectoryRecord(np.array(times), snaps, rhs_snaps,
                                blew_up=blew_up, blowup_time=t_blow)

    record(0.0, u)

    if cfg.scheme == IMEX:
        A = _diffusion_matrix(u0.n, h, u0.bc) * a_const
        eye = sp.identity(u0.n, format="csc")
        lhs = splu(sp.csc_matrix(eye - 0.5 * dt * A))
        explicit = eye + 0.5 * dt * A
        x = u0.grid()

        def reaction(uv):
            fld = make(uv)
            from .functional import gradient
            out = nl.f(x, uv, gradient(fld).values)
            if u0.bc == DIRICHLET:
                out = np.array(out, dtype=float)
                out[0] = out[-1] = 0.0
            return out

        N_prev = reaction(u)
        for k in range(1, n_steps + 1):
            N_cur = reaction(u)
            if k == 1:
                expl = N_cur  # first step: IMEX Euler start
            else:
                expl = 1.5 * N_cur - 0.5 * N_prev
            u = lhs.solve(explicit @ u + dt * expl)
            if u0.bc == DIRICHLET:
                u[0] = u[-1] = 0.0
            N_prev = N_cur
            t = k * dt
            if not np.all(np.isfinite(u)) or np.max(np.abs(u)) > BLOWUP_THRESHOLD:
                return finish(blew_up=True, t_blow=t)
            if k % cfg.save_every == 0 or k == n_steps:
                record(t, u)
        return finish()

    # explicit RK4
    a_arg = a_const if a_const is not None else (a_fn if a_fn is not None else None)
    for k in range(1, n_steps + 1):
        k1 = rhs(nl, a_arg, make(u)).values
        k2 = rhs(nl, a_arg, make(u + 0.5 * dt * k1)).values
        k3 = rhs(nl, a_arg, make(u + 0.5 * dt * k2)).values
        k4 = rhs(nl, a_arg, make(u + dt * k3)).values
        u = u + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        t = k * dt
        if not np.all(np.isfinite(u)) or np.max(np.abs(u)) > BLOWUP_THRESHOLD:
            return finish(blew_up=True, t_blow=t)
        if k % cfg.save_every == 0 or k == n_steps:
            record(t, u)
    return finish()
