import math

import numpy as np
import pytest

import diskcalabi as dc
from diskcalabi.orbitscan import verdict_from_scan


def bisect_twist_radius(target, lo=0.0, hi=1.0):
    """Oracle: solve 0.3 r^2 = target by bisection."""
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if 0.3 * mid * mid < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


class TestFindOrbits:
    def test_identity_map_reports_seeds_as_fixed_points(self):
        flow = dc.HamiltonianFlow(dc.PolynomialHamiltonian([]), steps=4)
        scan = dc.find_periodic_orbits(flow, d_max=1, grid_n=4)
        assert 1 <= len(scan) <= 16
        assert all(o.period == 1 and o.residual == 0.0 for o in scan)

    def test_half_rotation(self):
        scan = dc.find_periodic_orbits(dc.RigidRotation(0.5), d_max=2, grid_n=8)
        fixed = [o for o in scan if o.period == 1]
        assert len(fixed) == 1
        assert np.abs(fixed[0].points).max() < 1e-12
        assert fixed[0].mean_action == pytest.approx(0.5, abs=1e-12)
        doubles = [o for o in scan if o.period == 2]
        assert doubles
        for o in doubles:
            assert o.mean_action == pytest.approx(0.5, abs=1e-12)
            assert np.allclose(o.points[1], -o.points[0], atol=1e-9)

    def test_irrational_rotation_has_only_the_origin(self):
        scan = dc.find_periodic_orbits(dc.RigidRotation(math.sqrt(2) / 2), d_max=3, grid_n=6)
        assert len(scan) == 1
        assert scan[0].period == 1
        assert np.abs(scan[0].points).max() < 1e-12

    def test_rational_rotation_orbit_periods(self):
        # theta0 = 1/4: every non-origin orbit has period 4 and mean action 1/4
        scan = dc.find_periodic_orbits(dc.RigidRotation(0.25), d_max=8, grid_n=6)
        for o in scan:
            if np.hypot(*o.points[0]) > 1e-9:
                assert o.period == 4
                assert o.mean_action == pytest.approx(0.25, abs=1e-12)

    def test_twist_orbits_sit_on_rational_circles(self, quadratic_twist):
        scan = dc.find_periodic_orbits(quadratic_twist, d_max=10, grid_n=12)
        radii = {}
        for o in scan:
            r = float(np.hypot(*o.points[0]))
            if r < 1e-3:
                continue
            val = 0.3 * r * r
            frac = val * o.period
            assert frac == pytest.approx(round(frac), abs=1e-8)
            radii.setdefault(o.period, set()).add(round(r, 6))
        # the period-4 circle at 0.3 r^2 = 1/4 must be among them
        r4 = bisect_twist_radius(0.25)
        assert any(abs(r - r4) < 1e-5 for r in radii.get(4, ()))
        assert r4 == pytest.approx(math.sqrt(5.0 / 6.0), abs=1e-9)

    def test_minimality_of_reported_periods(self, quadratic_twist):
        scan = dc.find_periodic_orbits(quadratic_twist, d_max=8, grid_n=10)
        for o in scan:
            for dp in range(1, o.period):
                if o.period % dp == 0:
                    gap = np.linalg.norm(o.points[dp % o.period] - o.points[0])
                    assert gap > 1e-10

    def test_residual_bound_and_cyclic_invariance(self, quadratic_twist):
        scan = dc.find_periodic_orbits(quadratic_twist, d_max=6, grid_n=10)
        prof = dc.ActionProfile(quadratic_twist)
        for o in scan[:20]:
            assert o.residual <= 1e-10
            img = quadratic_twist(o.points)
            rolled = np.roll(o.points, -1, axis=0)
            assert np.abs(img - rolled).max() <= 1e-9
            # cyclic relabeling leaves the total action unchanged exactly
            shifted = dc.PeriodicOrbit(np.roll(o.points, 2, axis=0), o.period,
                                       o.total_action, o.mean_action, o.residual)
            assert dc.total_action(shifted, prof) == pytest.approx(
                dc.total_action(o, prof), abs=1e-13)

    def test_mean_action_equals_profile_at_orbit_radius(self, quadratic_twist):
        scan = dc.find_periodic_orbits(quadratic_twist, d_max=6, grid_n=10)
        prof = dc.ActionProfile(quadratic_twist)
        for o in scan:
            r = float(np.hypot(*o.points[0]))
            assert o.mean_action == pytest.approx(float(prof((r, 0.0))), abs=1e-8)


class TestTotalAction:
    def test_rotation_total(self):
        rot = dc.RigidRotation(0.3)
        scan = dc.find_periodic_orbits(dc.RigidRotation(0.25), d_max=4, grid_n=5)
        orbit = next(o for o in scan if o.period == 4)
        prof = dc.ActionProfile(rot, theta0=0.3)
        assert dc.total_action(orbit, prof) == pytest.approx(1.2, abs=1e-12)

    def test_twist_period_four_total(self, quadratic_twist):
        scan = dc.find_periodic_orbits(quadratic_twist, d_max=4, grid_n=12)
        r4 = math.sqrt(5.0 / 6.0)
        orbit = next(
            o for o in scan
            if o.period == 4 and abs(np.hypot(*o.points[0]) - r4) < 1e-6
        )
        # 4 * f(r) with f(r) = 0.3 (1 + r^4)/2 at r^2 = 5/6: 61/60
        assert orbit.total_action == pytest.approx(61.0 / 60.0, abs=1e-9)

    def test_twist_origin_fixed_point(self, quadratic_twist):
        scan = dc.find_periodic_orbits(quadratic_twist, d_max=1, grid_n=8)
        assert scan[0].mean_action == pytest.approx(0.15, abs=1e-9)


class TestTheoremHarness:
    def test_quadratic_twist_verdict(self, quadratic_twist):
        v = dc.check_mean_action_theorem(quadratic_twist, d_max=10, grid_n=12, tol=1e-6)
        assert v.hypothesis_holds
        assert v.calabi == pytest.approx(0.2, abs=1e-10)
        assert v.min_mean_action <= v.calabi + 1e-6
        assert v.conclusion_holds
        assert v.witness.mean_action == v.min_mean_action
        assert v.margin == pytest.approx(v.calabi - v.min_mean_action, abs=1e-15)

    def test_rotation_equality_case(self):
        v = dc.check_mean_action_theorem(dc.RigidRotation(0.5), d_max=2, grid_n=6)
        assert v.calabi == pytest.approx(0.5, abs=1e-12)
        assert not v.hypothesis_holds

    def test_empty_scan_is_inconclusive(self):
        verdict = verdict_from_scan(dc.OrbitScan(), 0.4, 0.5, 6, 1e-6)
        assert verdict.inconclusive
        assert verdict.witness is None
        assert verdict.conclusion_holds is None
        assert math.isnan(verdict.min_mean_action)
        d = verdict.to_dict()
        assert d["min_mean_action"] is None
        assert d["inconclusive"] is True

    def test_counterexample_map(self, counterexample_map):
        # only fixed point is the origin, action 1/2 above the Calabi invariant,
        # yet some period-2 orbit undercuts the Calabi invariant
        v = dc.check_mean_action_theorem(
            counterexample_map, d_max=2, grid_n=20, tol=1e-4, quad_tol=1e-6
        )
        assert v.hypothesis_holds
        assert v.calabi < 0.5
        assert v.conclusion_holds
        assert v.witness.period == 2
        fixed = dc.find_periodic_orbits(counterexample_map, 1, grid_n=12, quad_tol=1e-6)
        assert len(fixed) == 1
        assert np.abs(fixed[0].points).max() < 1e-8
        assert fixed[0].mean_action == pytest.approx(0.5, abs=1e-7)
        assert fixed[0].mean_action > v.calabi
