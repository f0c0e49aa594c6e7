"""Lattice combinatorics of ellipsoid spectra, gradings, and bound algebra.

The central object is the nondecreasing sequence of values a*m + b*n over
nonnegative integer pairs (m, n), with repetitions; it equals the ECH
spectrum of the ellipsoid E(a, b) and drives the grading bijection, the
volume asymptotics, the knot filtration ranks, and the closed-form
mean-action bound.

Floating point cannot represent irrationality, so operations whose
correctness rests on an irrational ratio guard every floor argument: an
argument within eps_res of an integer raises ResonanceError instead of
silently committing to one side of the discontinuity.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    BudgetError,
    ConsistencyError,
    DomainError,
    PreconditionError,
    ResonanceError,
)

DEFAULT_EPS_RES = 1e-9
DEFAULT_BUDGET = 2_000_000


# ---------------------------------------------------------------------------
# capacity sequence N_k(a, b)


def iter_capacities(a: float, b: float):
    """Yield (value, m, n) with value = a*m + b*n in nondecreasing order.

    Every pair (m, n) is emitted exactly once, so tied values appear once
    per representation.  Values are recomputed as products, never as
    running sums, to match brute-force enumeration bit for bit.
    """
    if a <= 0 or b <= 0:
        raise DomainError("generators a, b must be positive")
    heap = [(0.0, 0, 0)]
    while True:
        v, m, n = heapq.heappop(heap)
        yield v, m, n
        heapq.heappush(heap, (a * (m + 1) + b * n, m + 1, n))
        if m == 0:
            heapq.heappush(heap, (b * (n + 1), 0, n + 1))


def capacity_sequence(a: float, b: float, k_max: int,
                      budget: int = DEFAULT_BUDGET):
    """Arrays (values, ms, ns) of the first k_max + 1 capacities."""
    if k_max < 0:
        raise DomainError("k_max must be nonnegative")
    if k_max > budget:
        raise BudgetError(f"k_max={k_max} exceeds the configured budget {budget}")
    values = np.empty(k_max + 1)
    ms = np.empty(k_max + 1, dtype=np.int64)
    ns = np.empty(k_max + 1, dtype=np.int64)
    gen = iter_capacities(a, b)
    for k in range(k_max + 1):
        values[k], ms[k], ns[k] = next(gen)
    return values, ms, ns


def ellipsoid_capacity(a: float, b: float, k: int,
                       budget: int = DEFAULT_BUDGET) -> float:
    """k-th smallest value (0-indexed, with repetitions) of a*m + b*n."""
    return float(capacity_sequence(a, b, k, budget)[0][k])


def _check_no_ties(values: np.ndarray, eps_res: float, context: str) -> None:
    gaps = np.diff(values)
    bad = np.flatnonzero(gaps < eps_res)
    if len(bad):
        k = int(bad[0])
        raise ResonanceError(
            f"{context}: capacities {k} and {k + 1} differ by {gaps[k]:.3g} "
            f"(< eps_res = {eps_res:g}); the generator ratio is too close to "
            "a rational for the requested range"
        )


# ---------------------------------------------------------------------------
# guarded and snapped floors


def guarded_floor(x: float, eps_res: float = DEFAULT_EPS_RES) -> int:
    """floor(x), refusing arguments within eps_res of an integer."""
    nearest = round(x)
    if abs(x - nearest) < eps_res:
        raise ResonanceError(
            f"floor argument {x!r} is within {eps_res:g} of the integer {nearest}"
        )
    return math.floor(x)


def snapped_floor(x: float, eps: float = DEFAULT_EPS_RES) -> int:
    """floor(x) treating near-integers as exact (for rational-safe counting)."""
    nearest = round(x)
    if abs(x - nearest) <= eps * max(1.0, abs(x)):
        return int(nearest)
    return math.floor(x)


# ---------------------------------------------------------------------------
# lattice count of the triangle x, y >= 0, a x + b y <= L


def triangle_lattice_count(a: float, b: float, L: float,
                           representation: tuple[int, int] | None = None,
                           eps: float = DEFAULT_EPS_RES) -> int:
    """Number of lattice points in the closed triangle bounded by the axes
    and the line a x + b y = L.

    With a representation L = a*m + b*n the rectangle-plus-floor-sums
    identity is evaluated as well and must agree with direct enumeration.
    """
    if a <= 0 or b <= 0:
        raise DomainError("a, b must be positive")
    if L < 0:
        raise DomainError("L must be nonnegative")
    x_max = snapped_floor(L / a, eps)
    count = 0
    for i in range(x_max + 1):
        rem = (L - a * i) / b
        count += snapped_floor(rem, eps) + 1 if rem >= -eps else 0

    if representation is not None:
        m, n = int(representation[0]), int(representation[1])
        if m < 0 or n < 0:
            raise DomainError("representation multiplicities must be nonnegative")
        if abs(a * m + b * n - L) > eps * max(1.0, abs(L)):
            raise PreconditionError(
                f"L = {L!r} does not equal a*m + b*n for (m, n) = {(m, n)}"
            )
        ident = (m + 1) * (n + 1)
        ident += sum(snapped_floor(a * i / b, eps) for i in range(1, m + 1))
        ident += sum(snapped_floor(b * j / a, eps) for j in range(1, n + 1))
        if ident != count:
            raise ConsistencyError(
                f"lattice identity ({ident}) disagrees with enumeration "
                f"({count}) for a={a!r}, b={b!r}, L={L!r}; this signals a "
                "resonance or precision problem"
            )
    return count


# ---------------------------------------------------------------------------
# quadratic lower bound N_k^2 >= 2abk - c sqrt(k)


@dataclass(frozen=True)
class CapacityBound:
    c_witness: float
    max_defect: float
    passed: bool
    k_max: int


def capacity_lower_bound(a: float, b: float, k_max: int,
                         budget: int = DEFAULT_BUDGET) -> CapacityBound:
    """Smallest c with N_k^2 >= 2abk - c*sqrt(k) for all 1 <= k <= k_max.

    The witness is the empirical maximum of (2abk - N_k^2)/sqrt(k), clamped
    at zero; the bound then holds on the scanned range by construction.
    """
    if k_max < 1:
        raise DomainError("k_max must be at least 1")
    values, _, _ = capacity_sequence(a, b, k_max, budget)
    k = np.arange(1, k_max + 1, dtype=float)
    defect = 2.0 * a * b * k - values[1:] ** 2
    c = float(np.maximum(defect / np.sqrt(k), 0.0).max())
    return CapacityBound(c, float(np.maximum(defect, 0.0).max()), True, k_max)


def capacity_upper_witness(a: float, b: float, k_max: int,
                           budget: int = DEFAULT_BUDGET) -> float:
    """Empirical max of (N_k^2 - 2abk)/sqrt(k); small for irrational ratios."""
    values, _, _ = capacity_sequence(a, b, k_max, budget)
    k = np.arange(1, k_max + 1, dtype=float)
    defect = values[1:] ** 2 - 2.0 * a * b * k
    return float(np.maximum(defect / np.sqrt(k), 0.0).max())


# ---------------------------------------------------------------------------
# gradings


@dataclass(frozen=True)
class EllipsoidOrbitSet:
    """Orbit set gamma1^m gamma2^n on the boundary of the ellipsoid E(a, b)."""

    m: int
    n: int
    a: float
    b: float

    def __post_init__(self):
        if self.m < 0 or self.n < 0:
            raise DomainError("multiplicities must be nonnegative")
        if self.a <= 0 or self.b <= 0:
            raise DomainError("ellipsoid parameters must be positive")

    @property
    def action(self) -> float:
        return self.a * self.m + self.b * self.n


def ellipsoid_grading(s: EllipsoidOrbitSet,
                      eps_res: float = DEFAULT_EPS_RES) -> int:
    """Grading 2((m+1)(n+1) - 1 + sum floor(ia/b) + sum floor(jb/a)).

    Raises ResonanceError when a floor argument sits within eps_res of an
    integer, since the result would then depend on rounding noise.
    """
    total = (s.m + 1) * (s.n + 1) - 1
    ratio = s.a / s.b
    for i in range(1, s.m + 1):
        total += guarded_floor(i * ratio, eps_res)
    ratio = s.b / s.a
    for j in range(1, s.n + 1):
        total += guarded_floor(j * ratio, eps_res)
    return 2 * total


@dataclass(frozen=True)
class GeneralOrbitDatum:
    """One simple orbit in a general orbit set: self-linking, rotation, multiplicity."""

    self_linking: int
    rotation: float
    multiplicity: int

    def __post_init__(self):
        if self.multiplicity < 1:
            raise DomainError("multiplicities must be at least 1")


def orbit_set_grading(orbits, linking, eps_res: float = DEFAULT_EPS_RES) -> int:
    """Grading of a general orbit set from self-linkings, rotations, and the
    symmetric pairwise linking table.

    I = -sum m_i sl_i + sum_{i != j} m_i m_j l_ij
        + sum_i sum_{k=1}^{m_i} (floor(k theta_i) + ceil(k theta_i)).
    """
    orbits = list(orbits)
    if not orbits:
        return 0
    k = len(orbits)
    table = np.asarray(linking, dtype=np.int64)
    if table.shape != (k, k):
        raise DomainError("linking table shape must match the orbit count")
    if not np.array_equal(table, table.T):
        raise DomainError("linking table must be symmetric")
    total = 0
    for i, o in enumerate(orbits):
        total -= o.multiplicity * o.self_linking
        for j, p in enumerate(orbits):
            if i != j:
                total += o.multiplicity * p.multiplicity * int(table[i, j])
        for step in range(1, o.multiplicity + 1):
            fl = guarded_floor(step * o.rotation, eps_res)
            total += 2 * fl + 1  # floor + ceil of a guarded non-integer
    return total


# ---------------------------------------------------------------------------
# spectrum table


@dataclass(frozen=True, eq=False)
class SpectrumTable:
    """Ellipsoid ECH spectrum c_k = N_k(a, b) with generators and gradings."""

    a: float
    b: float
    values: np.ndarray
    ms: np.ndarray
    ns: np.ndarray
    gradings: np.ndarray

    def ratio(self) -> np.ndarray:
        """c_k^2 / (2k); entry 0 is nan."""
        k = np.arange(len(self.values), dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(k > 0, self.values**2 / (2.0 * k), np.nan)


def _guarded_floor_prefix(ratio: float, count: int, eps_res: float,
                          context: str) -> np.ndarray:
    """Cumulative sums of floor(i * ratio) for i = 0..count, guarded."""
    if count == 0:
        return np.zeros(1, dtype=np.int64)
    i = np.arange(1, count + 1, dtype=float)
    args = i * ratio
    frac = np.abs(args - np.round(args))
    if frac.min() < eps_res:
        j = int(np.argmin(frac)) + 1
        raise ResonanceError(
            f"{context}: floor argument {j} * {ratio!r} is within "
            f"{eps_res:g} of an integer"
        )
    floors = np.floor(args).astype(np.int64)
    return np.concatenate([[0], np.cumsum(floors)])


def ellipsoid_spectrum(a: float, b: float, k_max: int,
                       eps_res: float = DEFAULT_EPS_RES,
                       budget: int = DEFAULT_BUDGET) -> SpectrumTable:
    """Spectrum, realizing generators, and gradings for E(a, b).

    Requires a non-resonant ratio: tied capacities in the range, or floor
    arguments within eps_res of an integer, raise ResonanceError.
    """
    values, ms, ns = capacity_sequence(a, b, k_max, budget)
    _check_no_ties(values, eps_res, "ellipsoid spectrum")
    cum_a = _guarded_floor_prefix(a / b, int(ms.max()), eps_res, "ellipsoid spectrum")
    cum_b = _guarded_floor_prefix(b / a, int(ns.max()), eps_res, "ellipsoid spectrum")
    gradings = 2 * ((ms + 1) * (ns + 1) - 1 + cum_a[ms] + cum_b[ns])
    return SpectrumTable(a, b, values, ms, ns, gradings)


# ---------------------------------------------------------------------------
# volume asymptotics


@dataclass(frozen=True, eq=False)
class VolumeAsymptotics:
    ks: np.ndarray
    ratios: np.ndarray  # c_k^2 / 2k
    volume: float  # a * b
    limit_defect: float  # |ratio - ab| at the largest k
    c_witness: float
    bound_ok: bool


def volume_asymptotics(a: float, b: float, k_list,
                       budget: int = DEFAULT_BUDGET) -> VolumeAsymptotics:
    """Check c_k^2/(2k) -> a*b at the requested indices.

    The defect at every sampled k must fall below the scanned witness
    c/(2 sqrt(k)) plus a small slack covering the one-sided nature of the
    witness (for a non-resonant ratio the upper defect is at most 2ab/k)
    and floating-point noise.
    """
    ks = sorted({int(k) for k in k_list})
    if not ks or ks[0] < 1:
        raise DomainError("k_list must contain positive integers")
    k_max = ks[-1]
    values, _, _ = capacity_sequence(a, b, k_max, budget)
    karr = np.asarray(ks, dtype=float)
    ratios = values[np.asarray(ks)] ** 2 / (2.0 * karr)
    ab = a * b
    bound = capacity_lower_bound(a, b, k_max, budget)
    slack = 2.0 * ab / karr + 1e-12
    ok = bool(np.all(np.abs(ratios - ab) <= bound.c_witness / (2.0 * np.sqrt(karr)) + slack))
    return VolumeAsymptotics(
        ks=np.asarray(ks), ratios=ratios, volume=ab,
        limit_defect=float(abs(ratios[-1] - ab)),
        c_witness=bound.c_witness, bound_ok=ok,
    )


# ---------------------------------------------------------------------------
# knot filtration


@dataclass(frozen=True)
class FiltrationQuery:
    """Filtration input: binding rotation number, binding multiplicity, and
    the linking number of the rest of the orbit set with the binding."""

    theta0: float
    m: int
    linking: int

    def __post_init__(self):
        if self.theta0 <= 0:
            raise DomainError("binding rotation number must be positive")
        if self.m < 0:
            raise DomainError("binding multiplicity must be nonnegative")


def knot_filtration(q: FiltrationQuery) -> float:
    """Filtration value m * theta0 + linking."""
    return q.m * q.theta0 + q.linking


def ellipsoid_filtration(a: float, b: float, d: int, m: int) -> float:
    """Filtration of gamma1^d gamma2^m by the binding gamma2 on E(a, b)."""
    if a <= 0 or b <= 0:
        raise DomainError("ellipsoid parameters must be positive")
    return knot_filtration(FiltrationQuery(theta0=b / a, m=m, linking=d))


def filtered_rank(k: int, level: float, theta0: float,
                  eps_res: float = DEFAULT_EPS_RES,
                  budget: int = DEFAULT_BUDGET) -> int:
    """Rank (0 or 1) of the level-filtered homology in grading 2k for the
    standard transverse unknot with rotation number theta0.

    Equals 1 exactly when level >= N_k(1, theta0); odd gradings vanish
    identically and are not indexed here.
    """
    if k < 0:
        raise DomainError("k must be nonnegative")
    if theta0 <= 0:
        raise DomainError("theta0 must be positive")
    values, _, _ = capacity_sequence(1.0, theta0, k, budget)
    _check_no_ties(values, eps_res, "filtered rank")
    return 1 if level >= values[k] else 0


# ---------------------------------------------------------------------------
# bound algebra


@dataclass(frozen=True)
class WitnessBounds:
    """Constraints a spectral witness pair (alpha, m) must satisfy."""

    action_bound: float  # upper bound for A(alpha) + m * A(B), A(B) = 1
    linking_bound: float  # lower bound for l(alpha, B) + m * rot(B)
    admissible: bool  # c_k^2 / 2k <= V + eps


def witness_bounds(k: int, theta0: float, volume: float, eps: float,
                   c_k: float, budget: int = DEFAULT_BUDGET) -> WitnessBounds:
    """Action and linking constraints at index k for binding rotation 1/theta0.

    Normalization: the binding has action 1 and rotation number 1/theta0.
    """
    if k < 1:
        raise DomainError("k must be positive")
    if theta0 <= 0 or volume <= 0 or eps <= 0:
        raise DomainError("theta0, volume, eps must be positive")
    if c_k < 0:
        raise DomainError("c_k must be nonnegative")
    action_bound = math.sqrt(2.0 * k * (volume + eps))
    linking_bound = ellipsoid_capacity(1.0, 1.0 / theta0, k, budget)
    return WitnessBounds(action_bound, linking_bound,
                         c_k**2 / (2.0 * k) <= volume + eps)


def min_admissible_k(theta0: float, volume: float, eps: float, c: float) -> int:
    """Smallest k with 2k(V + eps) <= 2k theta0 - c theta0^2 sqrt(k)."""
    gap = theta0 - volume - eps
    if gap <= 0:
        raise PreconditionError("requires volume + eps < theta0")
    if c <= 0:
        return 1
    root = c * theta0**2 / (2.0 * gap)
    k = max(1, math.ceil(root**2))
    while 2.0 * k * (volume + eps) > 2.0 * k * theta0 - c * theta0**2 * math.sqrt(k):
        k += 1
    return k


def mean_action_bound(theta0: float, volume: float, eps: float, k: int,
                      c: float) -> float:
    """Finite-k mean-action bound sqrt(2k(V+eps) / (2k/theta0 - c sqrt(k))).

    Requires V + eps < theta0 and k large enough that
    2k(V+eps) <= 2k theta0 - c theta0^2 sqrt(k); smaller k raise DomainError
    naming the minimal admissible index.  Nonincreasing in k, with limit
    sqrt(theta0 (V + eps)).
    """
    if theta0 <= 0 or volume <= 0 or eps <= 0:
        raise DomainError("theta0, volume, eps must be positive")
    if c < 0:
        raise DomainError("c must be nonnegative")
    if volume + eps >= theta0:
        raise PreconditionError(
            f"requires volume + eps < theta0 ({volume + eps} >= {theta0})"
        )
    if k < 1:
        raise DomainError("k must be positive")
    if 2.0 * k * (volume + eps) > 2.0 * k * theta0 - c * theta0**2 * math.sqrt(k):
        raise DomainError(
            "k is below the admissible range; the smallest admissible k is "
            f"{min_admissible_k(theta0, volume, eps, c)}"
        )
    denom = 2.0 * k / theta0 - c * math.sqrt(k)
    return math.sqrt(2.0 * k * (volume + eps) / denom)


def mean_action_bound_limit(theta0: float, volume: float, eps: float) -> float:
    """Limit of the finite-k bound as k grows: sqrt(theta0 (V + eps))."""
    if volume + eps >= theta0:
        raise PreconditionError("requires volume + eps < theta0")
    return math.sqrt(theta0 * (volume + eps))
