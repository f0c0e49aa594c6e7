"""Calabi invariant and mean-action machinery for area-preserving disk maps.

Angles are in turns throughout: "rotation by theta0" means rotation by the
angle 2*pi*theta0.
"""

from .diskmap import (
    ActionProfile,
    AreaReport,
    CalabiResult,
    Composition,
    DiskMap,
    HamiltonianFlow,
    RadialTwist,
    RigidRotation,
    TwistProfile,
    action_value,
    calabi,
    verify_area_preservation,
)
from .echcomb import (
    CapacityBound,
    EllipsoidOrbitSet,
    FiltrationQuery,
    GeneralOrbitDatum,
    SpectrumTable,
    VolumeAsymptotics,
    WitnessBounds,
    capacity_lower_bound,
    capacity_sequence,
    ellipsoid_capacity,
    ellipsoid_filtration,
    ellipsoid_grading,
    ellipsoid_spectrum,
    filtered_rank,
    knot_filtration,
    mean_action_bound,
    mean_action_bound_limit,
    min_admissible_k,
    orbit_set_grading,
    triangle_lattice_count,
    volume_asymptotics,
    witness_bounds,
)
from .errors import (
    BudgetError,
    ConsistencyError,
    DiskCalabiError,
    DomainError,
    InvalidInputError,
    InvalidProfileError,
    NumericError,
    PreconditionError,
    ResonanceError,
)
from .hamiltonians import PolynomialHamiltonian, RadialBumpHamiltonian
from .mapspec import build_map, load_mapspec, parse_mapspec
from .orbitscan import (
    OrbitScan,
    PeriodicOrbit,
    TheoremVerdict,
    check_mean_action_theorem,
    find_periodic_orbits,
    total_action,
    verdict_from_scan,
)
from .suspension import (
    BindingData,
    BoundaryTwistResult,
    BoundaryTwistSpec,
    ContactReport,
    SmoothingProfile,
    Suspension,
    binding_data,
    boundary_twist,
    build_suspension,
    contact_volume,
    exactness_defect,
    return_time,
    shrink_collar,
    verify_contact,
)

__version__ = "0.1.0"
