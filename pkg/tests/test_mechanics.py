import numpy as np
import pytest

from algmech import library as lib
from algmech.mechanics import (
    RankDeficiencyError,
    SingularLagrangianError,
    VelPoint,
    constrain,
    el_field,
    integrate_el,
    lagrangian_energy,
    legendre,
    riemannian_lagrangian,
    riemannian_spray,
    spray_defect,
)


class TestLegendre:
    def test_flat_metric(self):
        spec = lib.tangent(2)
        L = spec.lagrangian("0.5*(u1^2+u2^2)")
        p = legendre(spec, L, VelPoint.of([0.1, 0.2], [1.5, -0.5]))
        assert np.allclose(p.xi, [1.5, -0.5])

    def test_diagonal_metric(self):
        spec = lib.so3_zero_anchor()
        L = spec.lagrangian("0.5*(u1^2/1 + u2^2/2 + u3^2/3)")
        p = legendre(spec, L, VelPoint.of([0.0], [1.0, 1.0, 1.0]))
        assert np.allclose(p.xi, [1.0, 0.5, 1.0 / 3.0])

    def test_linear_lagrangian_constant_momentum(self):
        spec = lib.tangent(1)
        L = spec.lagrangian("3*u1")
        p1 = legendre(spec, L, VelPoint.of([0.0], [1.0]))
        p2 = legendre(spec, L, VelPoint.of([0.0], [7.0]))
        assert p1.xi == p2.xi == (3.0,)


class TestEnergy:
    def test_kinetic_plus_potential(self):
        spec = lib.tangent(2)
        L = spec.lagrangian("0.5*(u1^2+u2^2) - 0.5*(x1^2+x2^2)")
        vp = VelPoint.of([0.3, -0.4], [1.0, 2.0])
        expected = 0.5 * (1 + 4) + 0.5 * (0.09 + 0.16)
        assert abs(lagrangian_energy(spec, L, vp) - expected) < 1e-14

    def test_homogeneous_degree_one(self):
        spec = lib.tangent(2)
        L = spec.lagrangian("sqrt(u1^2 + u2^2)")
        vp = VelPoint.of([0.0, 0.0], [0.6, 0.8])
        assert abs(lagrangian_energy(spec, L, vp)) < 1e-14

    def test_quadratic_direct(self):
        spec = lib.tangent(1)
        L = spec.lagrangian("u1^2")
        assert lagrangian_energy(spec, L, VelPoint.of([0.0], [2.0])) == 4.0


class TestELField:
    def test_flat_geodesics(self):
        spec = lib.tangent(2)
        L = spec.lagrangian("0.5*(u1^2+u2^2)")
        xdot, udot = el_field(spec, L, VelPoint.of([0.1, 0.2], [1.0, -2.0]))
        assert np.allclose(xdot, [1.0, -2.0])
        assert np.allclose(udot, 0.0)

    def test_rigid_body_cross_product(self):
        spec = lib.so3_zero_anchor()
        L = spec.lagrangian("0.5*(u1^2 + 2*u2^2 + 3*u3^2)")
        inertia = np.array([1.0, 2.0, 3.0])
        rng = np.random.default_rng(0)
        for _ in range(10):
            u = rng.uniform(-1, 1, 3)
            _, udot = el_field(spec, L, VelPoint.of([0.0], u))
            oracle = np.cross(inertia * u, u) / inertia
            assert np.max(np.abs(udot - oracle)) < 1e-10

    def test_degenerate_lagrangian(self):
        spec = lib.tangent(1)
        L = spec.lagrangian("u1")
        with pytest.raises(SingularLagrangianError):
            el_field(spec, L, VelPoint.of([0.0], [1.0]))


class TestRiemannianSpray:
    def test_flat_geodesics(self):
        spec = lib.tangent(2, g=[["1", "0"], ["0", "1"]])
        _, udot = riemannian_spray(spec, VelPoint.of([0.1, 0.2], [1.0, 2.0]))
        assert np.allclose(udot, 0.0)

    def test_harmonic_oscillator(self):
        spec = lib.tangent(1, g=[["1"]], V="0.5*(x1^2)")
        _, udot = riemannian_spray(spec, VelPoint.of([0.7], [0.0]))
        assert abs(udot[0] - (-0.7)) < 1e-13
        L = riemannian_lagrangian(spec)
        _, udot_el = el_field(spec, L, VelPoint.of([0.7], [0.0]))
        assert np.allclose(udot, udot_el)

    def test_agrees_with_el_field(self):
        rng = np.random.default_rng(1)
        spec = lib.random_spec(rng, 3, 3, with_metric=True)
        L = riemannian_lagrangian(spec)
        for _ in range(20):
            vp = VelPoint.of(rng.uniform(-1, 1, spec.n), rng.uniform(-1, 1, spec.m))
            _, u1 = el_field(spec, L, vp)
            _, u2 = riemannian_spray(spec, vp)
            assert np.max(np.abs(u1 - u2)) < 1e-9


class TestIntegrate:
    def test_flat_geodesic_exact(self):
        spec = lib.tangent(2)
        L = spec.lagrangian("0.5*(u1^2+u2^2)")
        traj = integrate_el(spec, L, VelPoint.of([0.0, 0.0], [0.5, -1.0]), 1.0, 1e-2)
        assert np.allclose(traj.rows[-1][:2], [0.5, -1.0], atol=1e-13)

    def test_harmonic_oscillator_closed_form(self):
        spec = lib.tangent(1)
        L = spec.lagrangian("0.5*u1^2 - 0.5*x1^2")
        x0 = 0.8
        traj = integrate_el(spec, L, VelPoint.of([x0], [0.0]), 1.0, 1e-3)
        assert abs(traj.rows[-1][0] - x0 * np.cos(1.0)) < 1e-9

    def test_rigid_body_casimir_and_energy(self):
        spec = lib.so3_zero_anchor()
        L = spec.lagrangian("0.5*(u1^2 + 2*u2^2 + 3*u3^2)")
        inertia = np.array([1.0, 2.0, 3.0])
        traj = integrate_el(spec, L, VelPoint.of([0.0], [0.4, 0.3, -0.5]), 5.0, 2e-3)
        arr = traj.array()
        mom = arr[:, 1:4] * inertia
        casimir = np.sum(mom * mom, axis=1)
        assert np.max(np.abs(casimir - casimir[0])) < 1e-8
        assert np.max(np.abs(arr[:, -1] - arr[0, -1])) < 1e-8


class TestSprayDefect:
    def test_quadratic_is_spray(self):
        spec = lib.tangent(2, g=[["2", "0.3"], ["0.3", "1"]])
        L = riemannian_lagrangian(spec)
        vp = VelPoint.of([0.3, -0.1], [0.5, 0.7])
        for lam in (0.5, 2.0, 3.0):
            assert spray_defect(spec, L, vp, lam) < 1e-10

    def test_potential_breaks_homogeneity(self):
        spec = lib.tangent(1, g=[["1"]], V="x1")
        L = riemannian_lagrangian(spec)
        vp = VelPoint.of([0.5], [0.3])
        # udot = -dV = -1 at any u, so defect at lambda=2 is |(-1) - 4*(-1)| = 3
        assert abs(spray_defect(spec, L, vp, 2.0) - 3.0) < 1e-12

    def test_identity_homothety(self):
        spec = lib.tangent(1, g=[["1"]], V="x1^2")
        L = riemannian_lagrangian(spec)
        assert spray_defect(spec, L, VelPoint.of([0.4], [0.2]), 1.0) == 0.0


class TestConstrained:
    def _heis(self, V=None):
        flat = [["1", "0", "0"], ["0", "1", "0"], ["0", "0", "1"]]
        spec = lib.tangent(3, g=flat, V=V)
        frame = [spec.section(["1", "0", "x2"]), spec.section(["0", "1", "0"])]
        return spec, constrain(spec, frame)

    def test_full_frame_identity(self):
        g = [["1.5", "0.2", "0"], ["0.2", "1", "0"], ["0", "0", "2"]]
        spec = lib.tangent(3, g=g, V="0.3*x1*x3")
        sys = constrain(spec, [spec.basis_section(a) for a in range(3)])
        L = riemannian_lagrangian(spec)
        rng = np.random.default_rng(2)
        for _ in range(5):
            vp = VelPoint.of(rng.uniform(-1, 1, 3), rng.uniform(-1, 1, 3))
            x1, u1 = el_field(spec, L, vp)
            x2, u2 = sys.el_field(L, vp)
            assert np.max(np.abs(u1 - u2)) < 1e-12
            assert np.max(np.abs(x1 - x2)) < 1e-12

    def test_involutive_plane_geodesics(self):
        flat = [["1", "0", "0"], ["0", "1", "0"], ["0", "0", "1"]]
        spec = lib.tangent(3, g=flat)
        sys = constrain(spec, [spec.basis_section(0), spec.basis_section(1)])
        x = np.array([0.2, 0.4, -0.1])
        assert np.max(np.abs(sys.c_at(x))) < 1e-14
        L = riemannian_lagrangian(spec)
        _, udot = sys.el_field(L, VelPoint.of(x, [0.3, -0.7]))
        assert np.allclose(udot, 0.0, atol=1e-13)

    def test_heisenberg_bracket_matches_projection(self):
        spec, sys = self._heis()
        x = np.array([0.3, 0.7, -0.2])
        # ambient [f1, f2] = -d3; g-orthogonal projection onto the frame
        # has coefficients (-x2/(1+x2^2), 0)
        c = sys.c_at(x)
        assert abs(c[0, 0, 1] - (-x[1] / (1 + x[1] ** 2))) < 1e-12
        assert abs(c[1, 0, 1]) < 1e-12
        # and agrees with the shipped projected spec
        proj = lib.heisenberg_projected()
        assert abs(c[0, 0, 1] - proj.c_at(x)[0, 0, 1]) < 1e-12

    def test_constrained_energy_conserved(self):
        spec, sys = self._heis(V="0.1*(x1^2 + x3^2)")
        L = riemannian_lagrangian(spec)
        traj = sys.integrate_el(L, VelPoint.of([0.2, -0.1, 0.3], [0.4, 0.2]), 0.5, 1e-3)
        hcol = traj.array()[:, -1]
        assert np.max(np.abs(hcol - hcol[0])) < 1e-8

    def test_rank_deficiency_detected(self):
        flat = [["1", "0", "0"], ["0", "1", "0"], ["0", "0", "1"]]
        spec = lib.tangent(3, g=flat)
        frame = [spec.section(["x1", "0", "0"]), spec.section(["0", "1", "0"])]
        sys = constrain(spec, frame)
        with pytest.raises(RankDeficiencyError):
            sys.frame_matrix([0.0, 0.5, 0.5])
