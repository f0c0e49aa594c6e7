import math

import numpy as np
import pytest

import diskcalabi as dc

SQRT2 = math.sqrt(2.0)


@pytest.fixture(scope="session")
def sqrt2_sequence_100k():
    """Capacity sequence of (1, sqrt 2) up to k = 1e5, shared across tests."""
    values, ms, ns = dc.capacity_sequence(1.0, SQRT2, 100_000)
    return values, ms, ns


@pytest.fixture()
def quadratic_twist():
    """The canonical twist psi(r) = 0.3 r^2 (boundary angle 0.3, Calabi 0.2)."""
    return dc.RadialTwist(dc.TwistProfile.from_polynomial([0.0, 0.0, 0.3]))


@pytest.fixture()
def counterexample_map():
    """Rotation by half a turn composed with a negative twist supported in a
    subdisk of the right half: Calabi < 1/2 but the only fixed point is the
    origin with action 1/2."""
    bump = dc.RadialBumpHamiltonian((0.45, 0.0), 0.25, 0.04, power=6)
    tau = dc.HamiltonianFlow(bump, steps=32, delta=0.25)
    return dc.Composition([tau, dc.RigidRotation(0.5)])


def brute_capacities(a: float, b: float, k_max: int) -> np.ndarray:
    """Independent oracle: enumerate a*m + b*n below a growing bound, sort."""
    bound = max(a, b) * (1.0 + math.sqrt(2.0 * (k_max + 1) * max(a, b) / min(a, b)))
    while True:
        vals = []
        m = 0
        while a * m <= bound:
            n = 0
            while a * m + b * n <= bound:
                vals.append(a * m + b * n)
                n += 1
            m += 1
        if len(vals) >= k_max + 1:
            return np.sort(np.asarray(vals))[: k_max + 1]
        bound *= 1.5
