"""Hamiltonian fields on the disk with analytic gradients and Hessians.

The flow convention is xdot = -dH/dy, ydot = dH/dx (with respect to the
plain area form dx^dy), so H = (x^2 + y^2)/2 generates counterclockwise
rotation at one radian per unit time.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class Hamiltonian:
    """Interface: value / velocity / velocity_jacobian, vectorized over points."""

    #: radii (from the origin) where smoothness of the induced map degrades
    radial_feature_breaks: tuple = ()

    def value(self, pts: np.ndarray, t: float) -> np.ndarray:
        raise NotImplementedError

    def velocity(self, pts: np.ndarray, t: float) -> np.ndarray:
        raise NotImplementedError

    def velocity_jacobian(self, pts: np.ndarray, t: float) -> np.ndarray:
        raise NotImplementedError


def _poly_eval(coeffs, t: float) -> float:
    out = 0.0
    for c in reversed(list(coeffs)):
        out = out * t + c
    return out


@dataclass(frozen=True)
class PolynomialHamiltonian(Hamiltonian):
    """H(x, y, t) = time_poly(t) * sum_k c_k x^i_k y^j_k.

    terms: iterable of (coefficient, x_power, y_power).
    """

    terms: tuple = ()
    time_coeffs: tuple = (1.0,)

    def __init__(self, terms, time_coeffs=(1.0,)):
        object.__setattr__(self, "terms", tuple((float(c), int(i), int(j)) for c, i, j in terms))
        object.__setattr__(self, "time_coeffs", tuple(float(c) for c in time_coeffs))

    def _sum(self, pts, deriv):
        x, y = pts[:, 0], pts[:, 1]
        out = np.zeros(len(pts))
        for c, i, j in self.terms:
            ci, pi, pj = c, i, j
            for axis in deriv:
                if axis == 0:
                    if pi == 0:
                        ci = 0.0
                        break
                    ci *= pi
                    pi -= 1
                else:
                    if pj == 0:
                        ci = 0.0
                        break
                    ci *= pj
                    pj -= 1
            if ci != 0.0:
                out += ci * x**pi * y**pj
        return out

    def value(self, pts, t):
        return _poly_eval(self.time_coeffs, t) * self._sum(pts, ())

    def velocity(self, pts, t):
        s = _poly_eval(self.time_coeffs, t)
        hx = self._sum(pts, (0,))
        hy = self._sum(pts, (1,))
        return s * np.stack([-hy, hx], axis=1)

    def velocity_jacobian(self, pts, t):
        s = _poly_eval(self.time_coeffs, t)
        hxx = self._sum(pts, (0, 0))
        hxy = self._sum(pts, (0, 1))
        hyy = self._sum(pts, (1, 1))
        out = np.empty((len(pts), 2, 2))
        out[:, 0, 0] = -hxy
        out[:, 0, 1] = -hyy
        out[:, 1, 0] = hxx
        out[:, 1, 1] = hxy
        return s * out


@dataclass(frozen=True)
class RadialBumpHamiltonian(Hamiltonian):
    """Compactly supported bump H = strength * (1 - rho^2/radius^2)^power.

    rho is the distance from `center`; H vanishes identically outside the
    disk of the given radius, so the time-one map is a localized twist
    (clockwise for positive strength) and is the identity elsewhere.
    """

    center: tuple
    radius: float
    strength: float
    power: int = 4
    radial_feature_breaks: tuple = field(init=False)

    def __init__(self, center, radius, strength, power=4):
        object.__setattr__(self, "center", (float(center[0]), float(center[1])))
        object.__setattr__(self, "radius", float(radius))
        object.__setattr__(self, "strength", float(strength))
        object.__setattr__(self, "power", int(power))
        if self.radius <= 0:
            raise ValueError("bump radius must be positive")
        if self.power < 4:
            raise ValueError("bump power must be at least 4 for a C^3 field")
        d = float(np.hypot(*self.center))
        object.__setattr__(
            self,
            "radial_feature_breaks",
            tuple(sorted(r for r in (d - self.radius, d + self.radius) if 0.0 < r < 1.0)),
        )

    def _geometry(self, pts):
        dx = pts[:, 0] - self.center[0]
        dy = pts[:, 1] - self.center[1]
        u = (dx * dx + dy * dy) / self.radius**2
        w = np.maximum(1.0 - u, 0.0)
        return dx, dy, w

    def value(self, pts, t):
        _, _, w = self._geometry(pts)
        return self.strength * w**self.power

    def velocity(self, pts, t):
        dx, dy, w = self._geometry(pts)
        kappa = 2.0 * self.strength * self.power * w ** (self.power - 1) / self.radius**2
        # (-H_y, H_x) = kappa * (dy, -dx): clockwise around the center
        return np.stack([kappa * dy, -kappa * dx], axis=1)

    def velocity_jacobian(self, pts, t):
        dx, dy, w = self._geometry(pts)
        A, p, s2 = self.strength, self.power, self.radius**2
        wp1 = w ** (p - 1)
        wp2 = w ** (p - 2)
        hxx = A * p * (p - 1) * wp2 * 4.0 * dx * dx / s2**2 - 2.0 * A * p * wp1 / s2
        hyy = A * p * (p - 1) * wp2 * 4.0 * dy * dy / s2**2 - 2.0 * A * p * wp1 / s2
        hxy = A * p * (p - 1) * wp2 * 4.0 * dx * dy / s2**2
        out = np.empty((len(pts), 2, 2))
        out[:, 0, 0] = -hxy
        out[:, 0, 1] = -hyy
        out[:, 1, 0] = hxx
        out[:, 1, 1] = hxy
        return out

    def exact_rotation_angle(self, rho: np.ndarray) -> np.ndarray:
        """Rotation angle (radians) of the exact time-one flow at distance rho."""
        u = np.asarray(rho, dtype=float) ** 2 / self.radius**2
        w = np.maximum(1.0 - u, 0.0)
        return -2.0 * self.strength * self.power * w ** (self.power - 1) / self.radius**2
