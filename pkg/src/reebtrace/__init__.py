"""Ray and wavefront tracing on conformal material manifolds.

Light rays are integral curves of the Reeb field on the unit co-sphere bundle
of the medium; wavefronts are equal-time loci of ray fans.  Supported media:
the Euclidean plane and space with metric n^2*I and the hyperbolic half plane
with metric (n/y)^2*I, with vector Snell refraction at piecewise-constant
index interfaces.
"""

__version__ = "0.1.0"

from .checks import CheckRecord, VerificationReport, run_checks
from .contact import (
    ContactState,
    StateVelocity,
    closed_flow,
    direction_of,
    fiber_from_direction,
    liouville_form,
    make_state,
    momentum_of,
    reeb_field,
    verify_reeb,
    verify_strict_contact,
)
from .emit import emit_csv, emit_svg
from .fronts import (
    Fan,
    Wavefront,
    count_front_intersections,
    front_tangents,
    orthogonality_residual,
    propagate_fan,
    state_at_time,
)
from .geometry import (
    GeometryKind,
    HalfSpace,
    Region,
    Slab,
    body_metric_at,
    conformal_factor,
    g_inner,
    g_norm,
    interface_normal,
    to_poincare_disc,
)
from .scenefile import SceneError, SceneFile, emit_scene, parse_scene
from .tracing import (
    InterfaceEvent,
    MultipleCrossingsError,
    Ray,
    Scene,
    critical_angle,
    locate_crossing,
    refract,
    step_rk4,
    trace_ray,
)

__all__ = [
    "CheckRecord",
    "ContactState",
    "Fan",
    "GeometryKind",
    "HalfSpace",
    "InterfaceEvent",
    "MultipleCrossingsError",
    "Ray",
    "Region",
    "Scene",
    "SceneError",
    "SceneFile",
    "Slab",
    "StateVelocity",
    "VerificationReport",
    "Wavefront",
    "body_metric_at",
    "closed_flow",
    "conformal_factor",
    "count_front_intersections",
    "critical_angle",
    "direction_of",
    "emit_csv",
    "emit_scene",
    "emit_svg",
    "fiber_from_direction",
    "front_tangents",
    "g_inner",
    "g_norm",
    "interface_normal",
    "liouville_form",
    "locate_crossing",
    "make_state",
    "momentum_of",
    "orthogonality_residual",
    "parse_scene",
    "propagate_fan",
    "reeb_field",
    "refract",
    "run_checks",
    "state_at_time",
    "step_rk4",
    "to_poincare_disc",
    "trace_ray",
    "verify_reeb",
    "verify_strict_contact",
]
