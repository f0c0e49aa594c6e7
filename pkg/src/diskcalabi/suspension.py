"""Open-book contact suspension of a disk map and the boundary-twist surgery.

The suspension carries the 1-form F dt + beta(t) on [0,1] x D^2 with

    F(t, x)  = (1 - eta'(t)) f(x) + eta'(t) f(phi(x)),
    beta(t)  = beta + (t - eta(t)) df + eta(t) phi^* df,

for a smoothing function eta that vanishes near t = 0, equals t - 1 near
t = 1, and has slope in (-eps, 1].  When the action f is positive the form
is contact; its volume reproduces the Calabi invariant and the Reeb return
time to a page reproduces f itself.  The binding circle closes the open
book with action 1 and rotation number 1/theta0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import PPoly

from .diskmap import (
    ActionProfile,
    Composition,
    DiskMap,
    RadialTwist,
    RigidRotation,
    TwistProfile,
    action_defect_covector,
    action_disk_integral,
    area_primitive_covector,
    as_points,
    calabi,
    check_in_disk,
    disk_average,
)
from .errors import (
    DomainError,
    InvalidProfileError,
    NumericError,
    PreconditionError,
)
from .piecewise import (
    ppoly_add,
    ppoly_constant,
    ppoly_extrema,
    ppoly_from_local_pieces,
    ppoly_mul,
    ppoly_restrict,
    ppoly_scale,
    smooth_transition_ppoly,
)
from .quadrature import composite_gauss, halton_cube

TWO_PI = 2.0 * math.pi


class SmoothingProfile:
    """Interpolation schedule eta for gluing the map to the identity.

    Invariants: eta = 0 near t = 0, eta(t) = t - 1 near t = 1, and
    -eps_eta < eta'(t) <= 1 throughout.  eps_eta must stay below
    min(f)/max(f) of the target map for the suspension to be contact.
    """

    def __init__(self, eta_prime: PPoly, eps_eta: float):
        self.eta_prime = eta_prime
        self.eta = eta_prime.antiderivative()
        self.eps_eta = float(eps_eta)
        self._validate()

    def _validate(self):
        ep = self.eta_prime
        if abs(ep.x[0]) > 1e-12 or abs(ep.x[-1] - 1.0) > 1e-12:
            raise InvalidProfileError("smoothing profile must cover [0, 1]")
        if np.abs(ep.c[:, 0]).max() > 1e-13:
            raise InvalidProfileError("eta' must vanish identically near t = 0")
        last = ep.c[:, -1]
        if abs(last[-1] - 1.0) > 1e-12 or np.abs(last[:-1]).max() > 1e-13:
            raise InvalidProfileError("eta' must equal 1 identically near t = 1")
        if abs(float(self.eta(1.0))) > 1e-12:
            raise InvalidProfileError("eta(1) must vanish so that eta = t - 1 near 1")
        lo, hi = ppoly_extrema(ep)
        if hi > 1.0 + 1e-12:
            raise InvalidProfileError(f"eta' exceeds 1 (max {hi})")
        if lo <= -self.eps_eta - 1e-12:
            raise InvalidProfileError(
                f"eta' reaches {lo}, at or below the declared bound {-self.eps_eta}"
            )

    @property
    def breaks(self) -> tuple:
        return tuple(float(x) for x in self.eta_prime.x)

    @classmethod
    def default(cls, eps_eta: float, dip: float | None = None) -> "SmoothingProfile":
        """Piecewise-quintic profile with a gentle dip of depth `dip`.

        Shape of eta': zero, ramp down to -dip, plateau, ramp up to 1, one.
        The plateau end b is solved from the constraint eta(1) = 0.
        """
        if not 0.0 < eps_eta:
            raise InvalidProfileError("eps_eta must be positive")
        dip = 0.9 * eps_eta if dip is None else float(dip)
        if not 0.0 < dip < eps_eta:
            raise InvalidProfileError("dip must lie in (0, eps_eta)")
        a, w = 0.05, 0.1
        w2 = min(0.12, 0.8 * dip * (1.0 - a - w))
        for _ in range(60):
            b = (1.0 - w2 / 2.0 + dip * (a + w / 2.0 - w2 / 2.0)) / (1.0 + dip)
            if b >= a + w + 1e-6 and b + w2 <= 1.0 - 1e-9:
                break
            w2 *= 0.5
        else:
            raise InvalidProfileError("could not place the smoothing ramps")
        down = smooth_transition_ppoly(0.0, -dip, a, a + w, x0=0.0, x1=b)
        up = smooth_transition_ppoly(-dip, 1.0, b, b + w2, x0=a + w, x1=1.0)
        pieces, breaks = [], [0.0]
        for p, lo, hi in ((down, 0.0, a + w), (up, a + w, 1.0)):
            r = ppoly_restrict(p, lo, hi)
            for j in range(r.c.shape[1]):
                pieces.append(r.c[::-1, j])
                breaks.append(float(r.x[j + 1]))
        return cls(ppoly_from_local_pieces(breaks, pieces), eps_eta)


@dataclass(frozen=True, eq=False)
class Suspension:
    """Contact suspension data of a disk map."""

    map: DiskMap
    theta0: float
    profile: SmoothingProfile
    action: ActionProfile
    f_min: float
    f_max: float

    def F(self, t: float, p):
        """Contact coefficient F(t, x) = (1 - eta') f + eta' (f o phi)."""
        pts, single = as_points(p)
        check_in_disk(pts)
        ep = float(self.profile.eta_prime(t))
        vals = (1.0 - ep) * self.action(pts) + ep * self.action(self.map(pts))
        return float(vals[0]) if single else vals

    def beta_coeffs(self, t: float, p):
        """Covector coefficients of beta(t) = beta + (t - eta) df + eta phi^*df."""
        pts, single = as_points(p)
        check_in_disk(pts)
        e = float(self.profile.eta(t))
        img, jac = self.map.eval_with_jacobian(pts)
        df = action_defect_covector(self.map, pts)
        df_img = action_defect_covector(self.map, img)
        pulled = np.einsum("nji,nj->ni", jac, df_img)
        out = area_primitive_covector(pts) + (t - e) * df + e * pulled
        return out[0] if single else out


@dataclass(frozen=True)
class ContactReport:
    min_F: float
    passed: bool
    argmin_t: float
    argmin_point: tuple
    n_samples: int


@dataclass(frozen=True)
class BindingData:
    action: float
    rotation: float
    elliptic: bool


def build_suspension(m: DiskMap, theta0: float | None = None,
                     profile: SmoothingProfile | None = None,
                     quad_tol: float = 1e-9,
                     range_samples: int = 4096) -> Suspension:
    """Construct the suspension, enforcing positivity of the action.

    A nonpositive action aborts with a hint: adding a positive integer to
    theta0 shifts the action up by that integer without changing the map.
    """
    theta0 = m.theta0 if theta0 is None else float(theta0)
    action = ActionProfile(m, theta0, quad_tol)
    f_min, f_max = action.range_estimate(range_samples)
    if f_min <= 0.0:
        raise PreconditionError(
            f"action function reaches {f_min:.6g} <= 0; add a positive integer "
            "n to theta0 (both the Calabi invariant and all mean actions "
            "shift by n) and rebuild"
        )
    ratio = f_min / f_max
    if profile is None:
        profile = SmoothingProfile.default(0.5 * ratio)
    elif profile.eps_eta >= ratio:
        raise InvalidProfileError(
            f"profile bound eps_eta = {profile.eps_eta} must stay below "
            f"min(f)/max(f) = {ratio:.6g}"
        )
    return Suspension(m, theta0, profile, action, f_min, f_max)


def verify_contact(s: Suspension, n_samples: int = 2048) -> ContactReport:
    """Minimum of F over a low-discrepancy sample of [0,1] x D^2.

    The sample is augmented with the origin and boundary points at several
    times, where radially symmetric maps attain their extremes.  The action
    values of the sample and its image are computed in one batch each, and
    F(t, x) = (1 - eta'(t)) f(x) + eta'(t) f(phi(x)) is assembled from them.
    """
    u = halton_cube(n_samples, 3)
    ts = u[:, 0]
    r = np.sqrt(u[:, 1])
    ang = TWO_PI * u[:, 2]
    pts = np.stack([r * np.cos(ang), r * np.sin(ang)], axis=1)
    extra_t = np.repeat([0.0, 0.25, 0.5, 0.75, 1.0], 3)
    extra_p = np.tile([[0.0, 0.0], [1.0, 0.0], [0.0, -1.0]], (5, 1))
    ts = np.concatenate([ts, extra_t])
    pts = np.vstack([pts, extra_p])
    f_here = s.action(pts)
    f_image = s.action(s.map(pts))
    ep = s.profile.eta_prime(ts)
    vals = (1.0 - ep) * f_here + ep * f_image
    i = int(np.argmin(vals))
    best = float(vals[i])
    return ContactReport(best, best > 0.0, float(ts[i]), tuple(pts[i]), len(ts))


def return_time(s: Suspension, x, quad_tol: float = 1e-9) -> float:
    """Reeb return time int_0^1 F(t, x) dt; equals the action f(x).

    Gauss quadrature of F in t, one action evaluation for the point and one
    for its image (F is linear in those two values at every t).
    """
    pts, _ = as_points(x)
    check_in_disk(pts)
    nodes, weights = composite_gauss(np.asarray(s.profile.breaks), 10)
    ep = s.profile.eta_prime(nodes)
    f_here = float(s.action(pts)[0])
    f_image = float(s.action(s.map(pts))[0])
    return float(np.sum(weights * ((1.0 - ep) * f_here + ep * f_image)))


def contact_volume(s: Suspension, quad_tol: float = 1e-9) -> float:
    """Volume integral of F dt ^ omega over the mapping torus.

    Tensor evaluation: Gauss in t against the eta' pieces, disk integrals of
    f and f o phi in space.  Radially symmetric maps integrate their closed
    form directly; otherwise both disk integrals use the radial-path Fubini
    reduction (one map-and-Jacobian batch per node, pushed through phi for
    the composed factor).  Equals the Calabi invariant of the map.
    """
    if s.action.radial_poly is not None:
        breaks = tuple(b for b in s.map.radial_breaks if 0.0 < b < 1.0)
        i_f, e1 = disk_average(s.action, quad_tol, r_breaks=breaks)
        i_ff, e2 = disk_average(lambda pts: s.action(s.map(pts)), quad_tol,
                                r_breaks=breaks)
    else:
        i_f, e1 = action_disk_integral(s.map, s.theta0, quad_tol)
        i_ff, e2 = action_disk_integral(s.map, s.theta0, quad_tol, composed=True)
    nodes, weights = composite_gauss(np.asarray(s.profile.breaks), 10)
    ep = s.profile.eta_prime(nodes)
    a = float(np.sum(weights * (1.0 - ep)))
    b = float(np.sum(weights * ep))
    if e1 + e2 > 10.0 * quad_tol:
        raise NumericError("contact volume quadrature did not reach tolerance",
                           estimate=a * i_f + b * i_ff, error_estimate=e1 + e2)
    return a * i_f + b * i_ff


def exactness_defect(s: Suspension, n_samples: int = 48, h: float = 1e-5) -> float:
    """Finite-difference check of d(beta(t))/dt = d_x F(t, .).

    Samples interior points; returns the worst absolute discrepancy between
    the t-derivative of beta(t) and the spatial differential of F.
    """
    u = halton_cube(n_samples, 3)
    ts = h + (1.0 - 2.0 * h) * u[:, 0]
    r = 0.9 * np.sqrt(u[:, 1])
    ang = TWO_PI * u[:, 2]
    pts = np.stack([r * np.cos(ang), r * np.sin(ang)], axis=1)
    worst = 0.0
    ex = np.array([h, 0.0])
    ey = np.array([0.0, h])
    for t, p in zip(ts, pts):
        lhs = (s.beta_coeffs(t + h, p) - s.beta_coeffs(t - h, p)) / (2.0 * h)
        rhs = np.array([
            (s.F(t, p + ex) - s.F(t, p - ex)) / (2.0 * h),
            (s.F(t, p + ey) - s.F(t, p - ey)) / (2.0 * h),
        ])
        worst = max(worst, float(np.abs(lhs - rhs).max()))
    return worst


def binding_data(theta0: float) -> BindingData:
    """Structural data of the binding orbit: action 1, rotation 1/theta0."""
    if theta0 == 0.0:
        raise DomainError("binding rotation number is undefined for theta0 = 0")
    return BindingData(action=1.0, rotation=1.0 / theta0, elliptic=True)


# ---------------------------------------------------------------------------
# boundary twist surgery


@dataclass(frozen=True, eq=False)
class BoundaryTwistSpec:
    """Collar surgery parameters: collar width, new boundary angle, and an
    optional explicit collar profile on [1 - delta, 1]."""

    delta: float
    target: float
    profile: PPoly | None = None

    def __post_init__(self):
        if not 0.0 < self.delta < 1.0:
            raise InvalidProfileError("collar width must lie in (0, 1)")


@dataclass(frozen=True, eq=False)
class BoundaryTwistResult:
    new_map: DiskMap
    f_hat: ActionProfile
    inner_defect: float
    calabi_defect: float
    delta: float
    target: float
    collar_profile: PPoly  # twist profile of the new map on [1 - delta, 1]
    inner_shift: float  # f_hat - f on the inner region (constant there)


def _full_twist_profile(m: DiskMap) -> PPoly | None:
    if isinstance(m, RigidRotation):
        return ppoly_constant(m.theta0, 0.0, 1.0)
    if isinstance(m, RadialTwist):
        return m.profile.psi
    if isinstance(m, Composition):
        parts = [_full_twist_profile(f) for f in m.factors]
        if any(p is None for p in parts):
            return None
        out = parts[0]
        for p in parts[1:]:
            out = ppoly_add(out, p)
        return out
    return None


def boundary_twist(m: DiskMap, theta0: float | None = None,
                   spec: BoundaryTwistSpec | None = None,
                   f_ref: ActionProfile | None = None,
                   quad_tol: float = 1e-9) -> BoundaryTwistResult:
    """Retune the boundary angle to spec.target by twisting inside the collar.

    The map must act radially on [1 - delta, 1].  The new map keeps the old
    behaviour for r <= 1 - delta; on the collar its twist profile blends
    smoothly from the old one to the constant target, so the new action
    differs from the old one by a constant on the inner region.
    """
    if spec is None:
        raise InvalidProfileError("a BoundaryTwistSpec is required")
    theta0 = m.theta0 if theta0 is None else float(theta0)
    delta, target = spec.delta, spec.target
    psi_map = m.collar_profile(delta)
    if psi_map is None:
        raise PreconditionError(
            "boundary twist needs a map acting as a radial twist on the collar"
        )

    lo = 1.0 - delta
    if spec.profile is not None:
        psi_new_collar = spec.profile
        if (abs(float(psi_new_collar(lo)) - float(psi_map(lo))) > 1e-9
                or abs(float(psi_new_collar(1.0)) - target) > 1e-9):
            raise InvalidProfileError(
                "collar profile endpoints must match the map at 1 - delta "
                "and the target at 1"
            )
    else:
        ramp = smooth_transition_ppoly(
            0.0, 1.0, lo + 0.15 * delta, 1.0 - 0.15 * delta, x0=lo, x1=1.0
        )
        diff = ppoly_add(ppoly_constant(target, lo, 1.0), ppoly_scale(psi_map, -1.0))
        psi_new_collar = ppoly_add(psi_map, ppoly_mul(diff, ramp))

    corr_collar = ppoly_add(psi_new_collar, ppoly_scale(psi_map, -1.0))
    full = _full_twist_profile(m)
    if full is not None:
        inner = ppoly_restrict(full, 0.0, lo) if lo > 1e-12 else None
        breaks = list(inner.x) + list(psi_new_collar.x[1:]) if inner is not None else list(psi_new_collar.x)
        pieces = []
        if inner is not None:
            pieces += [inner.c[::-1, j] for j in range(inner.c.shape[1])]
        pieces += [psi_new_collar.c[::-1, j] for j in range(psi_new_collar.c.shape[1])]
        psi_full_new = ppoly_from_local_pieces(breaks, pieces)
        new_map: DiskMap = RadialTwist(TwistProfile(psi_full_new), delta=0.15 * delta)
    else:
        corr_full = ppoly_from_local_pieces(
            [0.0, *corr_collar.x],
            [[0.0]] + [corr_collar.c[::-1, j] for j in range(corr_collar.c.shape[1])],
        )
        new_map = Composition([m, RadialTwist(TwistProfile(corr_full), delta=0.15 * delta)])

    f_hat = ActionProfile(new_map, target, quad_tol)
    reference = f_ref if f_ref is not None else ActionProfile(m, theta0, quad_tol)

    if f_hat.radial_poly is not None and reference.radial_poly is not None:
        diff_poly = ppoly_add(f_hat.radial_poly, ppoly_scale(reference.radial_poly, -1.0))
        dmin, dmax = ppoly_extrema(diff_poly, 0.0, lo)
        inner_defect = max(abs(dmin), abs(dmax))
        inner_shift = float(diff_poly(0.0))
    else:
        from .quadrature import halton_disk

        pts = halton_disk(2048) * lo
        diffs = f_hat(pts) - reference(pts)
        inner_defect = float(np.abs(diffs).max())
        inner_shift = float(diffs[0])

    cal_old = calabi(m, theta0, quad_tol).value
    cal_new = calabi(new_map, target, quad_tol).value
    return BoundaryTwistResult(
        new_map=new_map, f_hat=f_hat,
        inner_defect=float(inner_defect),
        calabi_defect=abs(cal_new - cal_old),
        delta=delta, target=target,
        collar_profile=psi_new_collar,
        inner_shift=inner_shift,
    )


def shrink_collar(m: DiskMap, theta0: float, target: float, eps: float,
                  delta0: float = 0.25, max_halvings: int = 14,
                  quad_tol: float = 1e-9) -> BoundaryTwistResult:
    """Halve the collar width until the surgery defects satisfy the
    inner < eps/3 and Calabi < eps/2 bounds; returns the first success."""
    last = None
    delta = delta0
    for _ in range(max_halvings + 1):
        res = boundary_twist(m, theta0, BoundaryTwistSpec(delta, target),
                             quad_tol=quad_tol)
        last = res
        if res.inner_defect < eps / 3.0 and res.calabi_defect < eps / 2.0:
            return res
        delta *= 0.5
    raise NumericError(
        f"no collar width below {delta0} met the defect bounds",
        estimate=(last.inner_defect, last.calabi_defect) if last else None,
    )
