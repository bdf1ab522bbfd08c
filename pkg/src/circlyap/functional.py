"""Discrete fields and the Lyapunov functional over them.

Evaluates V(u) = integral of L(u, u_x) and the dissipation integral on
uniformly gridded fields. Periodic fields use the rectangle rule, which is
spectrally accurate for smooth periodic integrands; interval fields use the
trapezoid rule.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .lagrangian import REDUCED, LagrangianEvaluator
from .charflow import NonlinearityO2

PERIODIC = "periodic"
DIRICHLET = "dirichlet"
NEUMANN = "neumann"

_BCS = (PERIODIC, DIRICHLET, NEUMANN)


@dataclass
class ScalarField:
    """Samples of u on a uniform grid with a boundary-condition tag.

    Periodic grids carry n points x_i = i * l / n (the endpoint x = l is
    identified with x = 0); interval grids carry n points x_i = i*l/(n-1).
    """

    values: np.ndarray
    domain_length: float
    bc: str = PERIODIC

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 1 or self.values.size < 8:
            raise ValueError("field needs a 1-D array of at least 8 samples")
        if self.domain_length <= 0:
            raise ValueError("domain_length must be positive")
        if self.bc not in _BCS:
            raise ValueError(f"unknown boundary condition tag: {self.bc!r}")
        if self.bc == DIRICHLET:
            if abs(self.values[0]) > 1e-12 or abs(self.values[-1]) > 1e-12:
                raise ValueError("Dirichlet fields must vanish at both ends")

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def dx(self) -> float:
        if self.bc == PERIODIC:
            return self.domain_length / self.n
        return self.domain_length / (self.n - 1)

    def grid(self) -> np.ndarray:
        if self.bc == PERIODIC:
            return np.arange(self.n) * self.dx
        return np.linspace(0.0, self.domain_length, self.n)

    def like(self, values: np.ndarray) -> "ScalarField":
        return ScalarField(np.asarray(values, dtype=float),
                           self.domain_length, self.bc)


@dataclass
class FunctionalReport:
    V: float
    dissipation: float
    convexity_min: float


def gradient(field: ScalarField) -> ScalarField:
    """Second-order finite-difference derivative of the field."""
    u = field.values
    h = field.dx
    if field.bc == PERIODIC:
        ux = (np.roll(u, -1) - np.roll(u, 1)) / (2 * h)
        return field.like(ux)
    ux = np.empty_like(u)
    ux[1:-1] = (u[2:] - u[:-2]) / (2 * h)
    ux[0] = (-3 * u[0] + 4 * u[1] - u[2]) / (2 * h)
    ux[-1] = (3 * u[-1] - 4 * u[-2] + u[-3]) / (2 * h)
    out = ScalarField.__new__(ScalarField)
    out.values = ux
    out.domain_length = field.domain_length
    out.bc = field.bc  # derivative of a Dirichlet field need not vanish at ends
    return out


def quadrature_weights(field: ScalarField) -> np.ndarray:
    h = field.dx
    if field.bc == PERIODIC:
        return np.full(field.n, h)
    w = np.full(field.n, h)
    w[0] = w[-1] = 0.5 * h
    return w


def evaluate_V(ev: LagrangianEvaluator, field: ScalarField) -> FunctionalReport:
    """Lyapunov functional of a periodic field under the O(2) construction.

    The dissipation slot of the report is left at zero; the trajectory
    monitor fills it from the solver's u_t snapshots.
    """
    if field.bc != PERIODIC:
        raise ValueError("the circle construction needs a periodic field")
    u = field.values
    p = gradient(field).values
    w = quadrature_weights(field)
    if ev.form == REDUCED:
        fe = ev.field_eval(u, p)
        L_vals, lpp = fe["L"], fe["L_pp"]
    else:
        L_vals = np.array([ev.L(ui, pi) for ui, pi in zip(u, p)])
        lpp = ev.L_pp_field(u, p)
    return FunctionalReport(
        V=float(np.dot(w, L_vals)),
        dissipation=0.0,
        convexity_min=float(np.min(lpp)),
    )


def dissipation_rate(
    ev: LagrangianEvaluator,
    field: ScalarField,
    u_t: ScalarField,
    weight_a: NonlinearityO2 | None = None,
) -> float:
    """Signed dissipation integral -int w * L_pp(u, u_x) * u_t^2 dx.

    ``weight_a`` supplies the quasilinear weight 1/abar(u, u_x^2/2); omit it
    in the semilinear case. The return value is always <= 0.
    """
    if field.n != u_t.n or field.bc != u_t.bc:
        raise ValueError("field and u_t must share grid and boundary condition")
    u = field.values
    p = gradient(field).values
    lpp = ev.L_pp_field(u, p)
    w = np.ones_like(u)
    if weight_a is not None:
        av = np.array([weight_a.f_bar(ui, 0.5 * pi * pi) for ui, pi in zip(u, p)])
        if np.any(av <= 0):
            raise ValueError("diffusion coefficient must be positive on the grid")
        w = 1.0 / av
    qw = quadrature_weights(field)
    return -float(np.dot(qw, w * lpp * u_t.values**2))
