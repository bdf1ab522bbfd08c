"""Tests for the Lagrange function and its ingredients."""

import numpy as np
import pytest

from circlyap.charflow import NonlinearityO2, evolve
from circlyap.lagrangian import (
    DOUBLE_INTEGRAL,
    GAUSS_LEGENDRE,
    REDUCED,
    SIMPSON,
    LagrangianEvaluator,
    QuadratureConfig,
    effective_nonlinearity,
    quad_nodes_weights,
)


def cubic_nl(lam=2.0):
    return NonlinearityO2(f_bar=lambda u, q: lam * u * (1.0 - u * u) + 0.0 * q,
                          f_bar_q=lambda u, q: 0.0 * q,
                          label=f"cubic(lam={lam})")


def linear_nl(b=1.0):
    return NonlinearityO2(f_bar=lambda u, q: b * q,
                          f_bar_q=lambda u, q: b + 0.0 * q,
                          label=f"linear(b={b})")


def mixed_nl(lam=2.0):
    return NonlinearityO2(f_bar=lambda u, q: lam * u * (1.0 - u * u) + q * u,
                          f_bar_q=lambda u, q: u + 0.0 * q,
                          label=f"mixed(lam={lam})")


def cubic_primitive(lam):
    return lambda u: lam * (u * u / 2.0 - u**4 / 4.0)


class TestQuadRule:
    def test_simpson_exact_on_cubics(self):
        nodes, w = quad_nodes_weights(SIMPSON, 4, 0.0, 2.0)
        assert np.dot(w, nodes**3) == pytest.approx(4.0, abs=1e-12)

    def test_gauss_exact_on_high_degree(self):
        nodes, w = quad_nodes_weights(GAUSS_LEGENDRE, 8, -1.0, 3.0)
        exact = (3.0**8 - (-1.0) ** 8) / 8.0
        assert np.dot(w, nodes**7) == pytest.approx(exact, rel=1e-12)

    def test_reversed_interval_flips_sign(self):
        nodes, w = quad_nodes_weights(SIMPSON, 4, 1.0, 0.0)
        assert np.dot(w, np.ones_like(nodes)) == pytest.approx(-1.0, abs=1e-12)

    def test_empty_interval(self):
        nodes, w = quad_nodes_weights(SIMPSON, 4, 0.5, 0.5)
        assert nodes.size == 0 and w.size == 0

    def test_simpson_needs_even_panels(self):
        with pytest.raises(ValueError):
            QuadratureConfig(rule=SIMPSON, panels=5)


class TestFq:
    def test_zero_when_gradient_independent(self):
        ev = LagrangianEvaluator(cubic_nl(3.0))
        for u, q in [(0.5, 0.1), (-1.0, 2.0), (1.5, 0.0)]:
            assert ev.F_q(u, q) == pytest.approx(0.0, abs=1e-10)

    def test_linear_closed_form(self):
        ev = LagrangianEvaluator(linear_nl(1.0))
        for u, q in [(0.3, 0.5), (-0.8, 1.0), (1.2, 0.0)]:
            assert ev.F_q(u, q) == pytest.approx(u, abs=1e-8)

    def test_exponential_identity_vs_sensitivity(self):
        # the transport integral and the linearized flow must agree:
        # exp(F_q(u, q)) equals the sensitivity of the u -> 0 evolution
        nl = mixed_nl(2.0)
        ev = LagrangianEvaluator(nl)
        for u, q in [(0.4, 0.2), (-0.9, 1.1), (1.3, 0.0), (0.7, -0.3)]:
            sens = evolve(nl, u, 0.0, q).sensitivity
            assert np.exp(ev.F_q(u, q)) == pytest.approx(sens, abs=1e-6)


class TestF:
    def test_vanishes_at_zero(self):
        ev = LagrangianEvaluator(mixed_nl())
        assert ev.F(0.0) == 0.0

    def test_classical_primitive(self):
        lam = 2.0
        ev = LagrangianEvaluator(cubic_nl(lam))
        F = cubic_primitive(lam)
        for u in [-1.0, 0.5, 1.4]:
            assert ev.F(u) == pytest.approx(F(u), abs=1e-8)

    def test_matches_zero_characteristic(self):
        # F(u) must equal the u -> 0 evolution started at q = 0; Gauss
        # nodes keep the quadrature error below the identity tolerance
        nl = mixed_nl(2.0)
        qc = QuadratureConfig(rule=GAUSS_LEGENDRE, panels=32)
        ev = LagrangianEvaluator(nl, quad_cfg=qc)
        for u in [-1.0, 0.5, 1.0]:
            assert ev.F(u) == pytest.approx(evolve(nl, u, 0.0, 0.0).value,
                                            abs=1e-8)


class TestPhi:
    def test_gradient_independent_gives_p(self):
        ev = LagrangianEvaluator(cubic_nl(2.0))
        for u, p in [(0.5, 1.0), (-1.0, -2.0), (0.0, 0.7)]:
            assert ev.phi(u, p) == pytest.approx(p, abs=1e-8)

    def test_zero_at_p_zero(self):
        ev = LagrangianEvaluator(mixed_nl())
        assert ev.phi(0.8, 0.0) == 0.0

    def test_linear_closed_form(self):
        ev = LagrangianEvaluator(linear_nl(1.0))
        for u, p in [(0.5, 1.0), (-0.7, 2.0), (1.1, -1.5)]:
            assert ev.phi(u, p) == pytest.approx(p * np.exp(u), abs=1e-8)


class TestL:
    def test_classical_reduction(self):
        lam = 2.0
        F = cubic_primitive(lam)
        for form in (REDUCED, DOUBLE_INTEGRAL):
            ev = LagrangianEvaluator(cubic_nl(lam), form=form)
            for u, p in [(0.5, 1.0), (-1.2, 2.0), (1.0, -0.5)]:
                assert ev.L(u, p) == pytest.approx(0.5 * p * p - F(u), abs=1e-8)

    def test_linear_closed_form_both_forms(self):
        for form in (REDUCED, DOUBLE_INTEGRAL):
            ev = LagrangianEvaluator(linear_nl(1.0), form=form)
            for u, p in [(0.5, 1.0), (-0.8, 2.0), (1.2, -1.5)]:
                assert ev.L(u, p) == pytest.approx(0.5 * p * p * np.exp(u),
                                                   abs=1e-7)

    def test_value_at_p_zero_is_minus_F(self):
        # exact for the double-integral form (empty p-integrals); the
        # reduced form replaces the quadrature for F by a characteristic
        # solve and agrees up to quadrature error
        ev_d = LagrangianEvaluator(mixed_nl(), form=DOUBLE_INTEGRAL)
        for u in [-1.0, 0.3, 0.9]:
            assert ev_d.L(u, 0.0) == pytest.approx(-ev_d.F(u), abs=1e-12)
        ev_r = LagrangianEvaluator(mixed_nl(), form=REDUCED)
        for u in [-1.0, 0.3, 0.9]:
            assert ev_r.L(u, 0.0) == pytest.approx(-ev_r.F(u), abs=1e-6)

    def test_form_equivalence_on_grid(self):
        nl = mixed_nl(2.0)
        qc = QuadratureConfig(rule=GAUSS_LEGENDRE, panels=16, nested_panels=16)
        ev_r = LagrangianEvaluator(nl, quad_cfg=qc, form=REDUCED)
        ev_d = LagrangianEvaluator(nl, quad_cfg=qc, form=DOUBLE_INTEGRAL)
        for u in [-1.0, 0.0, 1.0]:
            for p in [-2.0, 0.5, 1.5]:
                a, b = ev_d.L(u, p), ev_r.L(u, p)
                assert abs(a - b) <= 1e-6 * max(1.0, abs(b))

    def test_even_in_p(self):
        ev = LagrangianEvaluator(mixed_nl())
        for u, p in [(0.5, 1.0), (-0.8, 2.0), (1.2, 0.3)]:
            assert ev.L(u, p) == pytest.approx(ev.L(u, -p), abs=1e-13)

    def test_second_derivative_consistency(self):
        ev = LagrangianEvaluator(mixed_nl())
        h = 1e-3
        for u, p in [(0.4, 1.0), (-0.6, 1.5)]:
            fd = (ev.L(u, p + h) - 2 * ev.L(u, p) + ev.L(u, p - h)) / (h * h)
            assert ev.L_pp(u, p) == pytest.approx(fd, rel=1e-3)

    def test_defining_pde_residual(self):
        # L_u - p * L_up + fbar(u, p^2/2) * L_pp should vanish
        nl = mixed_nl(2.0)
        ev = LagrangianEvaluator(nl)
        h = 1e-5
        for u, p in [(0.3, 0.8), (-0.5, 1.2)]:
            L_u = (ev.L(u + h, p) - ev.L(u - h, p)) / (2 * h)
            L_up = (ev.L(u + h, p + h) - ev.L(u + h, p - h)
                    - ev.L(u - h, p + h) + ev.L(u - h, p - h)) / (4 * h * h)
            resid = L_u - p * L_up + nl.f_bar(u, 0.5 * p * p) * ev.L_pp(u, p)
            assert abs(resid) <= 1e-4


class TestLpp:
    def test_unity_for_gradient_independent(self):
        ev = LagrangianEvaluator(cubic_nl(2.0))
        for u, p in [(0.5, 1.0), (-1.0, 0.0), (1.3, -2.0)]:
            assert ev.L_pp(u, p) == pytest.approx(1.0, abs=1e-9)

    def test_linear_closed_form(self):
        ev = LagrangianEvaluator(linear_nl(1.0))
        for u, p in [(0.5, 1.0), (-0.7, 2.0)]:
            assert ev.L_pp(u, p) == pytest.approx(np.exp(u), abs=1e-8)

    def test_positive_everywhere_sampled(self):
        rng = np.random.default_rng(12)
        ev = LagrangianEvaluator(mixed_nl())
        for _ in range(20):
            u, p = rng.uniform(-1.2, 1.2), rng.uniform(-2.0, 2.0)
            assert ev.L_pp(u, p) > 0.0


class TestFieldEval:
    def test_matches_pointwise(self):
        rng = np.random.default_rng(3)
        ev = LagrangianEvaluator(mixed_nl())
        u = rng.uniform(-1.0, 1.0, 24)
        p = rng.uniform(-2.0, 2.0, 24)
        fe = ev.field_eval(u, p)
        fresh = LagrangianEvaluator(mixed_nl())
        for i in range(u.size):
            assert fe["L"][i] == pytest.approx(fresh.L(u[i], p[i]), abs=1e-8)
            assert fe["L_pp"][i] == pytest.approx(fresh.L_pp(u[i], p[i]),
                                                  abs=1e-8)


class TestEffectiveNonlinearity:
    def test_unit_coefficient_is_identity(self):
        nl = mixed_nl()
        one = NonlinearityO2(f_bar=lambda u, q: 1.0 + 0.0 * q,
                             f_bar_q=lambda u, q: 0.0 * q, label="one")
        eff = effective_nonlinearity(nl, one)
        for u, q in [(0.4, 0.3), (-1.0, 1.2)]:
            assert eff.f_bar(u, q) == pytest.approx(nl.f_bar(u, q), abs=1e-14)
            assert eff.f_bar_q(u, q) == pytest.approx(nl.f_bar_q(u, q),
                                                      abs=1e-14)

    def test_constant_two_halves_the_reaction(self):
        lam = 2.0
        nl = cubic_nl(lam)
        two = NonlinearityO2(f_bar=lambda u, q: 2.0 + 0.0 * q,
                             f_bar_q=lambda u, q: 0.0 * q, label="two")
        eff = effective_nonlinearity(nl, two)
        ev = LagrangianEvaluator(eff)
        F_half = cubic_primitive(lam / 2.0)
        for u, p in [(0.5, 1.0), (-1.1, 0.4)]:
            assert ev.L(u, p) == pytest.approx(0.5 * p * p - F_half(u),
                                               abs=1e-8)

    def test_quotient_partial_matches_finite_difference(self):
        nl = mixed_nl()
        a_bar = NonlinearityO2(f_bar=lambda u, q: 2.0 + 0.1 * q,
                               f_bar_q=lambda u, q: 0.1 + 0.0 * q,
                               label="a")
        eff = effective_nonlinearity(nl, a_bar)
        eff.check_consistency(u_samples=[-0.8, 0.2, 1.0],
                              q_samples=[0.0, 0.5, 2.0])

    def test_nonpositive_coefficient_rejected(self):
        nl = cubic_nl()
        bad = NonlinearityO2(f_bar=lambda u, q: -1.0 + 0.0 * q,
                             f_bar_q=lambda u, q: 0.0 * q, label="bad")
        eff = effective_nonlinearity(nl, bad)
        with pytest.raises(ValueError):
            eff.f_bar(0.5, 0.1)
