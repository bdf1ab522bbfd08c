"""Tests for the method-of-lines solver."""

import warnings

import numpy as np
import pytest

from circlyap.functional import DIRICHLET, NEUMANN, PERIODIC, ScalarField
from circlyap.pde import (
    GeneralNonlinearity,
    SolverConfig,
    integrate,
    laplacian,
    rhs,
)


def zero_gen():
    return GeneralNonlinearity(f=lambda x, u, p: 0.0 * u,
                               f_p=lambda x, u, p: 0.0 * u)


def cubic_gen(lam):
    return GeneralNonlinearity(f=lambda x, u, p: lam * u * (1.0 - u * u),
                               f_p=lambda x, u, p: 0.0 * u)


def sine_field(n, ell=1.0, amplitude=1.0):
    x = np.arange(n) * (ell / n)
    return ScalarField(amplitude * np.sin(2 * np.pi * x / ell), ell, PERIODIC)


class TestRhs:
    def test_periodic_laplacian_oracle(self):
        n = 256
        fld = sine_field(n)
        out = rhs(zero_gen(), None, fld)
        exact = -(2 * np.pi) ** 2 * fld.values
        assert np.max(np.abs(out.values - exact)) <= 1e-2

    def test_constant_field_is_stationary(self):
        fld = ScalarField(np.full(64, 0.8), 1.0)
        assert np.max(np.abs(rhs(zero_gen(), None, fld).values)) == 0.0

    def test_zero_is_reaction_equilibrium(self):
        fld = ScalarField(np.zeros(64), 1.0)
        out = rhs(cubic_gen(2.0), None, fld)
        assert np.max(np.abs(out.values)) == 0.0

    def test_dirichlet_ends_are_pinned(self):
        n = 64
        x = np.linspace(0.0, 1.0, n)
        fld = ScalarField(np.sin(np.pi * x), 1.0, DIRICHLET)
        out = rhs(cubic_gen(2.0), None, fld)
        assert out.values[0] == 0.0 and out.values[-1] == 0.0

    def test_neumann_mirror(self):
        n = 64
        x = np.linspace(0.0, 1.0, n)
        fld = ScalarField(np.cos(np.pi * x), 1.0, NEUMANN)
        uxx = laplacian(fld)
        exact = -np.pi**2 * fld.values
        assert np.max(np.abs(uxx - exact)) <= 5e-2

    def test_diffusion_coefficient_scales(self):
        fld = sine_field(128)
        one = rhs(zero_gen(), None, fld).values
        two = rhs(zero_gen(), 2.0, fld).values
        assert np.allclose(two, 2.0 * one)


class TestIntegrate:
    def test_heat_equation_decay(self):
        n, t_end = 256, 0.01
        traj = integrate(zero_gen(), None, sine_field(n),
                         SolverConfig(n=n, t_end=t_end, save_every=10**9))
        final = traj.snapshots[-1].values
        exact = np.exp(-4 * np.pi**2 * t_end) * sine_field(n).values
        scale = np.max(np.abs(exact))
        assert np.max(np.abs(final - exact)) <= 1e-2 * scale

    def test_mean_conservation(self):
        rng = np.random.default_rng(4)
        n = 64
        u0 = ScalarField(rng.standard_normal(n), 1.0, PERIODIC)
        traj = integrate(zero_gen(), None, u0,
                         SolverConfig(n=n, t_end=0.5, save_every=10**9))
        m0 = np.mean(u0.values)
        m1 = np.mean(traj.snapshots[-1].values)
        assert abs(m1 - m0) <= 1e-10 * 0.5

    def test_rk4_temporal_order(self):
        # in the reaction-dominated regime halving dt shrinks the error
        # by roughly 2^4
        gen = GeneralNonlinearity(f=lambda x, u, p: u * (1.0 - u),
                                  f_p=lambda x, u, p: 0.0 * u)
        n = 16
        u0 = ScalarField(np.full(n, 0.2), 1.0, PERIODIC)
        cfg_ref = SolverConfig(n=n, dt=1e-5, t_end=1.0, save_every=10**9)
        ref = integrate(gen, None, u0, cfg_ref).snapshots[-1].values
        errs = []
        for dt in (0.05, 0.025):
            cfg = SolverConfig(n=n, dt=dt, t_end=1.0, save_every=10**9)
            with warnings.catch_warnings():
                # spatially constant state: the diffusion stability limit
                # does not bind here
                warnings.simplefilter("ignore")
                out = integrate(gen, None, u0, cfg).snapshots[-1].values
            errs.append(np.max(np.abs(out - ref)))
        factor = errs[0] / errs[1]
        assert 8.0 <= factor <= 32.0

    def test_rotation_equivariance(self):
        rng = np.random.default_rng(8)
        n, shift = 64, 5
        vals = rng.standard_normal(n)
        vals = np.convolve(np.tile(vals, 3), np.ones(5) / 5.0,
                           mode="same")[n:2 * n]  # smooth it a little
        u0 = ScalarField(vals, 1.0, PERIODIC)
        cfg = SolverConfig(n=n, t_end=0.05, save_every=10**9)
        plain = integrate(cubic_gen(3.0), None, u0, cfg).snapshots[-1].values
        rolled0 = ScalarField(np.roll(vals, shift), 1.0, PERIODIC)
        rolled = integrate(cubic_gen(3.0), None, rolled0, cfg).snapshots[-1].values
        assert np.max(np.abs(rolled - np.roll(plain, shift))) <= 1e-12

    def test_blowup_guard(self):
        # u_t = u_xx - u + u^3 grows without bound from large data
        gen = GeneralNonlinearity(f=lambda x, u, p: -u + u**3,
                                  f_p=lambda x, u, p: 0.0 * u)
        u0 = ScalarField(np.full(32, 3.0), 1.0, PERIODIC)
        traj = integrate(gen, None, u0,
                         SolverConfig(n=32, t_end=5.0, save_every=100))
        assert traj.blew_up
        assert traj.blowup_time is not None and traj.blowup_time < 5.0

    def test_imex_matches_rk4(self):
        n = 64
        u0 = sine_field(n, amplitude=0.3)
        gen = cubic_gen(5.0)
        rk = integrate(gen, None, u0,
                       SolverConfig(n=n, t_end=0.05, save_every=10**9))
        im = integrate(gen, None, u0,
                       SolverConfig(n=n, dt=1e-4, t_end=0.05,
                                    save_every=10**9, scheme="imex"))
        diff = np.max(np.abs(rk.snapshots[-1].values - im.snapshots[-1].values))
        assert diff <= 1e-5

    def test_imex_needs_constant_coefficient(self):
        with pytest.raises(ValueError):
            integrate(zero_gen(), lambda x, u, p: 1.0 + 0.0 * u, sine_field(32),
                      SolverConfig(n=32, t_end=0.01, scheme="imex"))

    def test_unstable_step_warns(self):
        with pytest.raises(Warning):
            with warnings.catch_warnings():
                warnings.simplefilter("error")
                integrate(zero_gen(), None, sine_field(32),
                          SolverConfig(n=32, dt=0.1, t_end=0.2,
                                       save_every=10**9))

    def test_save_times_strictly_increase(self):
        traj = integrate(cubic_gen(2.0), None, sine_field(64),
                         SolverConfig(n=64, t_end=0.02, save_every=20))
        assert np.all(np.diff(traj.times) > 0)
        assert len(traj.times) == len(traj.snapshots) == len(traj.u_t_snapshots)

    def test_dirichlet_boundary_stays_pinned(self):
        n = 64
        x = np.linspace(0.0, 1.0, n)
        u0 = ScalarField(0.5 * np.sin(np.pi * x), 1.0, DIRICHLET)
        traj = integrate(cubic_gen(5.0), None, u0,
                         SolverConfig(n=n, t_end=0.05, save_every=10**9))
        final = traj.snapshots[-1].values
        assert abs(final[0]) <= 1e-14 and abs(final[-1]) <= 1e-14


class TestGeneralNonlinearityConsistency:
    def test_finite_difference_check(self):
        gen = GeneralNonlinearity(f=lambda x, u, p: u * p + np.sin(x),
                                  f_p=lambda x, u, p: u + 0.0 * p)
        gen.check_consistency([0.0, 1.0], [-0.5, 0.5], [0.0, 1.0])

    def test_bad_partial_rejected(self):
        gen = GeneralNonlinearity(f=lambda x, u, p: p * p,
                                  f_p=lambda x, u, p: 3.0 * p)
        with pytest.raises(ValueError):
            gen.check_consistency([0.0], [0.0], [1.0])
