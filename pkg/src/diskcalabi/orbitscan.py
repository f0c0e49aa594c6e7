"""Periodic-orbit search for disk maps and the mean-action test harness.

Orbits are located by damped Newton iteration on x -> phi^d(x) - x from a
polar seed grid, deduplicated up to relabeling, and reported only at their
minimal period.  The scan is a finite certificate: when it finds nothing
the verdict is inconclusive rather than a failure, because the mean-action
inequality quantifies over all periods.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .diskmap import ActionProfile, DiskMap, calabi
from .errors import DomainError

_SINGULAR_DET = 1e-14


@dataclass(frozen=True, eq=False)
class PeriodicOrbit:
    """A periodic orbit: d distinct points with phi(x_i) = x_{i+1 mod d}."""

    points: np.ndarray  # (d, 2), cyclic order
    period: int
    total_action: float
    mean_action: float
    residual: float

    def canonical_points(self) -> np.ndarray:
        order = np.lexsort((self.points[:, 1], self.points[:, 0]))
        return self.points[order]


@dataclass(eq=False)
class OrbitScan(Sequence):
    """Scan result: orbits sorted by mean action, plus seed diagnostics."""

    orbits: list = field(default_factory=list)
    seeds_total: int = 0
    seeds_converged: int = 0
    seeds_singular: int = 0
    seeds_failed: int = 0

    def __len__(self):
        return len(self.orbits)

    def __getitem__(self, i):
        return self.orbits[i]

    def __iter__(self):
        return iter(self.orbits)


def _polar_seeds(grid_n: int, r_max: float) -> np.ndarray:
    radii = (np.arange(grid_n) + 0.5) / grid_n * r_max
    angles = (np.arange(grid_n) + 0.5) / grid_n * 2.0 * np.pi
    R, A = np.meshgrid(radii, angles)
    return np.stack([R.ravel() * np.cos(A.ravel()), R.ravel() * np.sin(A.ravel())], axis=1)


def _iterate_with_jacobian(m: DiskMap, pts: np.ndarray, d: int):
    cur = pts
    jac = np.broadcast_to(np.eye(2), (len(pts), 2, 2)).copy()
    for _ in range(d):
        cur, jf = m.eval_with_jacobian(cur)
        jac = np.einsum("nij,njk->nik", jf, jac)
    return cur, jac


def _iterate(m: DiskMap, pts: np.ndarray, d: int) -> np.ndarray:
    for _ in range(d):
        pts = m._apply(pts)
    return pts


def _residuals(m: DiskMap, pts: np.ndarray, d: int) -> np.ndarray:
    return np.linalg.norm(_iterate(m, pts, d) - pts, axis=1)


def _newton_level(m: DiskMap, seeds: np.ndarray, d: int, newton_tol: float,
                  max_iter: int, max_halvings: int = 40):
    """Damped Newton on phi^d - id from every seed; returns converged points."""
    x = seeds.copy()
    n = len(x)
    active = np.ones(n, dtype=bool)
    res = np.full(n, np.inf)
    singular = 0

    converged_pts = []
    for _ in range(max_iter):
        if not active.any():
            break
        idx = np.flatnonzero(active)
        xa = x[idx]
        img, jac = _iterate_with_jacobian(m, xa, d)
        F = img - xa
        r = np.linalg.norm(F, axis=1)
        res[idx] = r

        done = r <= newton_tol
        for i in np.flatnonzero(done):
            converged_pts.append(xa[i])
        active[idx[done]] = False
        keep = ~done
        if not keep.any():
            continue
        idx = idx[keep]
        xa, F, jac, r = xa[keep], F[keep], jac[keep], r[keep]

        A = jac - np.eye(2)
        det = A[:, 0, 0] * A[:, 1, 1] - A[:, 0, 1] * A[:, 1, 0]
        bad = np.abs(det) < _SINGULAR_DET
        singular += int(bad.sum())
        active[idx[bad]] = False
        ok = ~bad
        if not ok.any():
            continue
        idx, xa, F, A, det, r = idx[ok], xa[ok], F[ok], A[ok], det[ok], r[ok]

        step = np.stack(
            [(-A[:, 1, 1] * F[:, 0] + A[:, 0, 1] * F[:, 1]) / det,
             (A[:, 1, 0] * F[:, 0] - A[:, 0, 0] * F[:, 1]) / det], axis=1
        )
        lam = np.ones(len(idx))
        cand = xa + step
        for _ in range(max_halvings):
            inside = np.hypot(cand[:, 0], cand[:, 1]) <= 1.0
            new_r = np.full(len(idx), np.inf)
            if inside.any():
                new_r[inside] = _residuals(m, cand[inside], d)
            worse = new_r >= r
            if not worse.any():
                break
            lam[worse] *= 0.5
            cand[worse] = xa[worse] + lam[worse, None] * step[worse]
        accepted = np.hypot(cand[:, 0], cand[:, 1]) <= 1.0
        # seeds that never improved even at the smallest damping are dropped
        give_up = ~accepted
        active[idx[give_up]] = False
        x[idx[accepted]] = cand[accepted]

    failed = int(active.sum())
    return converged_pts, singular, failed


class _Deduper:
    """Approximate orbit dedupe keyed on the sorted point multiset."""

    def __init__(self, eps: float):
        self.eps = eps
        self.cell = max(eps * 4.0, 1e-12)
        self.buckets: dict = {}
        self.canon: list = []

    def add(self, period: int, canonical: np.ndarray) -> bool:
        kx = int(np.floor(canonical[0, 0] / self.cell))
        ky = int(np.floor(canonical[0, 1] / self.cell))
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                for j in self.buckets.get((period, kx + dx, ky + dy), ()):
                    other = self.canon[j]
                    if np.abs(other - canonical).max() <= self.eps:
                        return False
        self.canon.append(canonical)
        self.buckets.setdefault((period, kx, ky), []).append(len(self.canon) - 1)
        return True


def find_periodic_orbits(m: DiskMap, d_max: int, grid_n: int = 16,
                         newton_tol: float = 1e-10, dedupe_eps: float = 1e-7,
                         quad_tol: float = 1e-9, theta0: float | None = None,
                         max_iter: int = 60) -> OrbitScan:
    """Scan periods 1..d_max for periodic orbits, sorted by mean action.

    Seeds in the rotation collar r > 1 - delta are skipped at period d
    unless d * theta0 is an integer (no collar orbits exist otherwise).
    """
    if d_max < 1:
        raise DomainError("d_max must be at least 1")
    if grid_n < 2:
        raise DomainError("grid_n must be at least 2")
    action = ActionProfile(m, theta0, quad_tol)
    scan = OrbitScan()
    dedupe = _Deduper(dedupe_eps)
    pending = []  # (points, period, residual)

    for d in range(1, d_max + 1):
        frac = abs(d * m.theta0 - round(d * m.theta0))
        r_max = 1.0 if frac <= 1e-9 else max(1.0 - m.delta, 1e-3)
        seeds = _polar_seeds(grid_n, r_max)
        scan.seeds_total += len(seeds)
        pts, n_singular, n_failed = _newton_level(m, seeds, d, newton_tol, max_iter)
        scan.seeds_singular += n_singular
        scan.seeds_failed += n_failed
        scan.seeds_converged += len(pts)

        for x in pts:
            orbit_pts = np.empty((d, 2))
            orbit_pts[0] = x
            for i in range(1, d):
                orbit_pts[i] = m._apply(orbit_pts[i - 1][None, :])[0]
            closure = m._apply(orbit_pts[-1][None, :])[0]
            residual = float(np.linalg.norm(closure - orbit_pts[0]))
            if residual > newton_tol:
                continue
            # minimal-period filter: a proper divisor that already returns
            # the start point means the orbit belongs to a smaller level
            minimal = True
            for dp in range(1, d):
                if d % dp == 0:
                    if np.linalg.norm(orbit_pts[dp] - orbit_pts[0]) <= newton_tol:
                        minimal = False
                        break
            if not minimal:
                continue
            if d > 1:
                diffs = orbit_pts[:, None, :] - orbit_pts[None, :, :]
                dist = np.linalg.norm(diffs, axis=2)
                dist[np.arange(d), np.arange(d)] = np.inf
                if dist.min() <= dedupe_eps:
                    continue
            order = np.lexsort((orbit_pts[:, 1], orbit_pts[:, 0]))
            if not dedupe.add(d, orbit_pts[order]):
                continue
            pending.append((orbit_pts, d, residual))

    if pending:
        all_pts = np.vstack([p for p, _, _ in pending])
        all_vals = action(all_pts)
        offset = 0
        for pts_arr, d, residual in pending:
            vals = all_vals[offset:offset + d]
            offset += d
            total = float(vals.sum())
            scan.orbits.append(
                PeriodicOrbit(pts_arr, d, total, total / d, residual)
            )
        scan.orbits.sort(
            key=lambda o: (o.mean_action, o.period,
                           round(o.points[0, 0], 9), round(o.points[0, 1], 9))
        )
    return scan


def total_action(orbit: PeriodicOrbit, action: ActionProfile) -> float:
    """Sum of the action over the orbit points."""
    return float(np.sum(action(orbit.points)))


@dataclass(frozen=True, eq=False)
class TheoremVerdict:
    """Outcome of the mean-action inequality check for one map."""

    calabi: float
    theta0: float
    hypothesis_holds: bool  # calabi < theta0
    min_mean_action: float  # nan when inconclusive
    witness: PeriodicOrbit | None
    margin: float  # calabi - min_mean_action
    searched_period: int
    inconclusive: bool
    conclusion_holds: bool | None  # min mean action <= calabi + tol
    tol: float

    def to_dict(self) -> dict:
        witness = None
        if self.witness is not None:
            witness = {
                "period": self.witness.period,
                "points": [[float(a), float(b)] for a, b in self.witness.points],
                "total_action": self.witness.total_action,
                "mean_action": self.witness.mean_action,
                "residual": self.witness.residual,
            }
        return {
            "calabi": self.calabi,
            "theta0": self.theta0,
            "hypothesis_holds": self.hypothesis_holds,
            "min_mean_action": None if self.inconclusive else self.min_mean_action,
            "witness": witness,
            "margin": None if self.inconclusive else self.margin,
            "searched_period": self.searched_period,
            "inconclusive": self.inconclusive,
            "conclusion_holds": self.conclusion_holds,
            "tol": self.tol,
        }


def verdict_from_scan(scan: OrbitScan, calabi_value: float, theta0: float,
                      d_max: int, tol: float) -> TheoremVerdict:
    """Build a verdict from an orbit scan (empty scan -> inconclusive)."""
    if len(scan) == 0:
        return TheoremVerdict(
            calabi=calabi_value, theta0=theta0,
            hypothesis_holds=calabi_value < theta0,
            min_mean_action=float("nan"), witness=None, margin=float("nan"),
            searched_period=d_max, inconclusive=True, conclusion_holds=None,
            tol=tol,
        )
    best = scan[0]
    return TheoremVerdict(
        calabi=calabi_value, theta0=theta0,
        hypothesis_holds=calabi_value < theta0,
        min_mean_action=best.mean_action, witness=best,
        margin=calabi_value - best.mean_action,
        searched_period=d_max, inconclusive=False,
        conclusion_holds=bool(best.mean_action <= calabi_value + tol),
        tol=tol,
    )


def check_mean_action_theorem(m: DiskMap, theta0: float | None = None,
                              d_max: int = 8, grid_n: int = 16,
                              tol: float = 1e-6, quad_tol: float = 1e-9,
                              newton_tol: float = 1e-10,
                              dedupe_eps: float = 1e-7,
                              calabi_method: str = "auto") -> TheoremVerdict:
    """Compute the Calabi invariant, scan orbits, and compare.

    When the hypothesis (Calabi < boundary angle) fails the verdict still
    reports the scan, with hypothesis_holds set to False.
    """
    theta0 = m.theta0 if theta0 is None else float(theta0)
    m.validate_collar()
    cal = calabi(m, theta0, quad_tol, method=calabi_method).value
    scan = find_periodic_orbits(
        m, d_max, grid_n=grid_n, newton_tol=newton_tol,
        dedupe_eps=dedupe_eps, quad_tol=quad_tol, theta0=theta0,
    )
    return verdict_from_scan(scan, cal, theta0, d_max, tol)
