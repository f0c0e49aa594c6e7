import math

import numpy as np
import pytest
from scipy import integrate

import diskcalabi as dc

TWO_PI = 2.0 * math.pi


def quad_tw(coeffs):
    return dc.RadialTwist(dc.TwistProfile.from_polynomial(coeffs))


def stress_map():
    """Third-of-a-turn rotation after an interior bump twist.

    The rotation carries the bump support onto a disjoint region, so the
    deepest point of the action maps to a point where f equals the boundary
    angle exactly; the contact lower bound (1+dip) min f - dip max f is then
    nearly attained."""
    bump = dc.RadialBumpHamiltonian((0.5, 0.0), 0.4, 0.25, power=4)
    return dc.Composition([dc.HamiltonianFlow(bump, steps=32, delta=0.05),
                           dc.RigidRotation(1.0 / 3.0)])


class TestSmoothingProfile:
    def test_default_profile_invariants(self):
        for eps in (0.02, 0.25, 0.5, 0.95):
            prof = dc.SmoothingProfile.default(eps)
            t = np.linspace(0.0, 1.0, 2001)
            ep = prof.eta_prime(t)
            assert ep.max() <= 1.0 + 1e-12
            assert ep.min() > -eps
            assert abs(float(prof.eta(0.0))) == 0.0
            assert abs(float(prof.eta(1.0))) <= 1e-12
            # eta = 0 near 0 and eta = t - 1 near 1
            assert np.abs(prof.eta(np.linspace(0, 0.04, 9))).max() <= 1e-15
            tt = np.linspace(prof.breaks[-2], 1.0, 9)
            assert np.abs(prof.eta(tt) - (tt - 1.0)).max() <= 1e-12

    def test_dip_must_stay_below_bound(self):
        with pytest.raises(dc.InvalidProfileError):
            dc.SmoothingProfile.default(0.25, dip=0.3)


class TestBuildSuspension:
    def test_rotation_constant_F(self):
        s = dc.build_suspension(dc.RigidRotation(0.3))
        ts = np.linspace(0.0, 1.0, 7)
        pts = np.array([[0.0, 0.0], [0.5, 0.2], [0.0, -0.9]])
        for t in ts:
            assert np.allclose(s.F(float(t), pts), 0.3, atol=1e-15)

    def test_twist_F_equals_radial_action(self, quadratic_twist):
        # f is rotation invariant, so f(phi(x)) = f(x) and F(t, .) = f
        s = dc.build_suspension(quadratic_twist)
        r = np.array([0.0, 0.4, 0.8, 1.0])
        pts = np.stack([r, np.zeros_like(r)], axis=1)
        expect = 0.3 * (1.0 + r**4) / 2.0
        for t in (0.0, 0.31, 0.77, 1.0):
            assert np.abs(s.F(t, pts) - expect).max() < 1e-14

    def test_collar_identity_near_boundary(self):
        s = dc.build_suspension(dc.RigidRotation(0.3))
        p = (0.99, 0.0)
        beta_expect = np.array([0.0, 0.99]) / TWO_PI
        for t in (0.0, 0.4, 1.0):
            assert abs(s.F(t, p) - 0.3) <= 4e-16
            assert np.abs(s.beta_coeffs(t, p) - beta_expect).max() <= 1e-12

    def test_nonpositive_action_rejected_with_shift_hint(self):
        with pytest.raises(dc.PreconditionError) as err:
            dc.build_suspension(dc.RigidRotation(-0.2))
        assert "integer" in str(err.value)

    def test_shifted_boundary_angle_fixes_positivity(self):
        s = dc.build_suspension(dc.RigidRotation(-0.2), theta0=0.8)
        assert s.f_min == pytest.approx(0.8, abs=1e-15)

    def test_oversized_profile_bound_rejected(self, quadratic_twist):
        profile = dc.SmoothingProfile.default(0.6)
        with pytest.raises(dc.InvalidProfileError):
            dc.build_suspension(quadratic_twist, profile=profile)  # needs < 0.5


class TestVerifyContact:
    def test_rotation(self):
        s = dc.build_suspension(dc.RigidRotation(0.3))
        rep = dc.verify_contact(s, 512)
        assert rep.passed
        assert rep.min_F == pytest.approx(0.3, abs=1e-15)

    def test_twist_minimum_at_origin(self, quadratic_twist):
        s = dc.build_suspension(quadratic_twist)
        rep = dc.verify_contact(s, 1024)
        assert rep.min_F == pytest.approx(0.15, abs=1e-15)
        assert np.hypot(*rep.argmin_point) < 1e-12

    def test_stress_case_near_zero_but_positive(self):
        from diskcalabi.quadrature import halton_disk

        m = stress_map()
        action = dc.ActionProfile(m, quad_tol=3e-5)
        pts = halton_disk(96)
        fv = action(pts)
        fphi = action(m(pts))
        f_min, f_max = float(fv.min()), float(fv.max())
        assert f_min > 0.0
        ratio = f_min / f_max
        profile = dc.SmoothingProfile.default(0.98 * ratio, dip=0.95 * ratio)
        s = dc.build_suspension(m, profile=profile, quad_tol=3e-5,
                                range_samples=96)
        ts = np.linspace(0.0, 1.0, 801)
        ep = profile.eta_prime(ts)
        dip = float(-ep.min())
        i = int(np.argmin(fv))
        # the rotated bump support is disjoint from itself, so the deepest
        # action point maps to a point with f equal to the boundary angle
        assert fphi[i] == pytest.approx(1.0 / 3.0, abs=1e-4)
        min_F = (1.0 + dip) * float(fv[i]) - dip * float(fphi[i])
        floor = (1.0 + dip) * f_min - dip * f_max
        assert floor > 0.0
        assert floor - 1e-9 <= min_F < 0.85 * f_min
        t_star = float(ts[np.argmin(ep)])
        assert s.F(t_star, pts[i]) == pytest.approx(min_F, abs=2e-4)


class TestReturnTime:
    def test_rotation(self):
        s = dc.build_suspension(dc.RigidRotation(0.3))
        for p in ((0.0, 0.0), (0.5, -0.2), (0.9, 0.1)):
            assert dc.return_time(s, p) == pytest.approx(0.3, abs=1e-13)

    def test_twist_origin(self, quadratic_twist):
        s = dc.build_suspension(quadratic_twist)
        assert dc.return_time(s, (0.0, 0.0)) == pytest.approx(0.15, abs=1e-13)

    def test_equals_action_at_random_points(self, quadratic_twist):
        s = dc.build_suspension(quadratic_twist)
        rng = np.random.default_rng(13)
        for _ in range(100):
            r = math.sqrt(rng.uniform())
            a = rng.uniform(0.0, TWO_PI)
            p = (r * math.cos(a), r * math.sin(a))
            assert dc.return_time(s, p) == pytest.approx(
                float(s.action(p)), abs=1e-8)


class TestContactVolume:
    def test_rotation(self):
        s = dc.build_suspension(dc.RigidRotation(0.3))
        assert dc.contact_volume(s) == pytest.approx(0.3, abs=1e-9)

    def test_twist_equals_calabi(self, quadratic_twist):
        s = dc.build_suspension(quadratic_twist)
        assert dc.contact_volume(s) == pytest.approx(0.2, abs=1e-9)

    def test_composition_volume_is_additive(self):
        t1 = quad_tw([0.0, 0.0, 0.2])
        t2 = quad_tw([0.0, 0.0, 0.0, 0.15])
        comp = dc.Composition([t1, t2])
        s = dc.build_suspension(comp)
        vol = dc.contact_volume(s)
        assert vol == pytest.approx(
            dc.calabi(t1).value + dc.calabi(t2).value, abs=1e-8)

    def test_nonradial_map_volume(self, counterexample_map):
        s = dc.build_suspension(counterexample_map, quad_tol=1e-6,
                                range_samples=256)
        vol = dc.contact_volume(s, quad_tol=1e-6)
        cal = dc.calabi(counterexample_map, quad_tol=1e-6).value
        assert vol == pytest.approx(cal, abs=1e-4)


class TestExactness:
    def test_finite_difference_dlambda(self, quadratic_twist):
        s = dc.build_suspension(quadratic_twist)
        assert dc.exactness_defect(s, 32) < 1e-6

    def test_finite_difference_rotation(self):
        s = dc.build_suspension(dc.RigidRotation(0.3))
        assert dc.exactness_defect(s, 32) < 1e-6


class TestBindingData:
    def test_half_turn(self):
        b = dc.binding_data(0.5)
        assert (b.action, b.rotation, b.elliptic) == (1.0, 2.0, True)

    def test_full_turn(self):
        assert dc.binding_data(1.0).rotation == 1.0

    def test_reciprocal(self):
        assert dc.binding_data(math.sqrt(2) / 2).rotation == pytest.approx(
            math.sqrt(2), rel=1e-15)

    def test_zero_rejected(self):
        with pytest.raises(dc.DomainError):
            dc.binding_data(0.0)


class TestBoundaryTwist:
    def test_identity_target_on_rotation_base(self):
        rot = dc.RigidRotation(0.3)
        res = dc.boundary_twist(rot, 0.3, dc.BoundaryTwistSpec(0.2, 0.3))
        assert res.inner_defect == 0.0
        assert res.calabi_defect <= 1e-12
        pts = np.array([[0.1, 0.2], [0.5, -0.5], [0.0, 0.79]])
        assert np.abs(res.new_map(pts) - rot(pts)).max() == 0.0

    def test_inner_region_agreement_exact(self, quadratic_twist):
        res = dc.boundary_twist(quadratic_twist, 0.3, dc.BoundaryTwistSpec(0.2, 0.25))
        rng = np.random.default_rng(37)
        r = 0.8 * np.sqrt(rng.uniform(size=64))
        a = rng.uniform(0, TWO_PI, size=64)
        pts = np.stack([r * np.cos(a), r * np.sin(a)], axis=1)
        assert np.abs(res.new_map(pts) - quadratic_twist(pts)).max() == 0.0

    def test_new_boundary_angle_is_target(self, quadratic_twist):
        res = dc.boundary_twist(quadratic_twist, 0.3, dc.BoundaryTwistSpec(0.2, 0.25))
        assert res.new_map.theta0 == pytest.approx(0.25, abs=1e-12)
        assert float(res.f_hat.radial_poly(1.0)) == pytest.approx(0.25, abs=1e-12)

    def test_collar_action_matches_fhatout(self):
        # rotation base: f_hat(r) = target - int_r^1 rho^2 psi_hat' on the collar
        rot = dc.RigidRotation(0.3)
        res = dc.boundary_twist(rot, 0.3, dc.BoundaryTwistSpec(0.25, 0.22))
        psi = res.collar_profile
        dpsi = psi.derivative()
        for r in (0.76, 0.85, 0.93, 0.99):
            tail, _ = integrate.quad(
                lambda rho: rho**2 * float(dpsi(rho)), r, 1.0,
                points=list(psi.x[1:-1]), limit=200,
            )
            assert float(res.f_hat((r, 0.0))) == pytest.approx(0.22 - tail, abs=1e-10)

    def test_inner_action_shift_matches_fhatin(self):
        rot = dc.RigidRotation(0.3)
        res = dc.boundary_twist(rot, 0.3, dc.BoundaryTwistSpec(0.25, 0.22))
        psi = res.collar_profile
        dpsi = psi.derivative()
        tail, _ = integrate.quad(
            lambda rho: rho**2 * float(dpsi(rho)), 0.75, 1.0,
            points=list(psi.x[1:-1]), limit=200,
        )
        expect = 0.22 - 0.3 - tail
        assert res.inner_shift == pytest.approx(expect, abs=1e-10)
        assert res.inner_defect == pytest.approx(abs(expect), abs=1e-10)

    def test_collar_orbits_have_mean_action_at_least_target(self):
        # nonincreasing collar profile pushes all collar actions above target
        rot = dc.RigidRotation(0.7)
        res = dc.boundary_twist(rot, 0.7, dc.BoundaryTwistSpec(0.3, 0.25))
        scan = dc.find_periodic_orbits(res.new_map, d_max=4, grid_n=14)
        collar = [o for o in scan if np.hypot(*o.points[0]) > 0.7]
        assert collar, "expected orbits in the twisted collar"
        assert all(o.mean_action >= 0.25 - 1e-10 for o in collar)

    def test_endpoint_mismatch_rejected(self):
        rot = dc.RigidRotation(0.3)
        from diskcalabi.piecewise import smooth_transition_ppoly

        bad = smooth_transition_ppoly(0.35, 0.25, 0.85, 0.95, x0=0.8, x1=1.0)
        with pytest.raises(dc.InvalidProfileError):
            dc.boundary_twist(rot, 0.3, dc.BoundaryTwistSpec(0.2, 0.25, profile=bad))

    def test_hamiltonian_collar_unsupported(self, counterexample_map):
        with pytest.raises(dc.PreconditionError):
            dc.boundary_twist(counterexample_map, 0.5, dc.BoundaryTwistSpec(0.2, 0.45))

    def test_shrink_collar_meets_bounds(self, quadratic_twist):
        eps = 0.05
        res = dc.shrink_collar(quadratic_twist, 0.3, 0.25, eps)
        assert res.inner_defect < eps / 3.0
        assert res.calabi_defect < eps / 2.0
