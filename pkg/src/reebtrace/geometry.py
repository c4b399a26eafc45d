"""Charts, body metrics, refractive regions and interface normals.

Three media are supported, all with conformally flat body metrics:

* ``EUCLIDEAN2`` / ``EUCLIDEAN3``: metric ``n^2 * I`` on the plane / space,
* ``HYPERBOLIC_HALF_PLANE``: metric ``(n/y)^2 * I`` on the upper half plane.

Because every metric is a scalar multiple of the identity, angle measurement
coincides with Euclidean angle measurement; only norms carry the conformal
factor.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

# Points closer than this to a region boundary are treated as boundary points;
# side assignment is then up to the caller (the tracer keeps the incoming side).
BOUNDARY_TOL = 1e-12


class GeometryKind(Enum):
    EUCLIDEAN2 = "euclidean2"
    EUCLIDEAN3 = "euclidean3"
    HYPERBOLIC_HALF_PLANE = "hyperbolic-half-plane"

    @property
    def dim(self) -> int:
        return 3 if self is GeometryKind.EUCLIDEAN3 else 2

    @property
    def fiber_dim(self) -> int:
        """Number of angular fiber coordinates on the unit co-sphere."""
        return 2 if self is GeometryKind.EUCLIDEAN3 else 1

    @property
    def hyperbolic(self) -> bool:
        return self is GeometryKind.HYPERBOLIC_HALF_PLANE


def validate_point(kind: GeometryKind, p) -> np.ndarray:
    """Return ``p`` as a float array after checking the chart invariants."""
    q = np.asarray(p, dtype=float)
    if q.shape != (kind.dim,):
        raise ValueError(f"point must have {kind.dim} coordinates, got shape {q.shape}")
    if not np.all(np.isfinite(q)):
        raise ValueError(f"point has non-finite coordinates: {q}")
    if kind.hyperbolic and q[1] <= 0.0:
        raise ValueError(f"half-plane point needs y > 0, got y = {q[1]}")
    return q


def conformal_factor(kind: GeometryKind, n: float, p) -> float:
    """Scalar c with body metric c^2 * I at the point: n, or n/y on the half plane."""
    if n <= 0.0:
        raise ValueError(f"refractive index must be positive, got {n}")
    if kind.hyperbolic:
        y = float(p[1])
        if y <= 0.0:
            raise ValueError(f"half-plane point needs y > 0, got y = {y}")
        return n / y
    return float(n)


def body_metric_at(kind: GeometryKind, n: float, p) -> np.ndarray:
    """Body metric matrix at the point (symmetric positive definite)."""
    c = conformal_factor(kind, n, validate_point(kind, p))
    return (c * c) * np.eye(kind.dim)


def g_inner(kind: GeometryKind, n: float, p, v, w) -> float:
    """Metric inner product of two tangent vectors at ``p``."""
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    if v.shape != (kind.dim,) or w.shape != (kind.dim,):
        raise ValueError(f"vectors must have length {kind.dim}, got {v.shape} and {w.shape}")
    c = conformal_factor(kind, n, p)
    return (c * c) * float(v @ w)


def g_norm(kind: GeometryKind, n: float, p, v) -> float:
    return math.sqrt(max(g_inner(kind, n, p, v, v), 0.0))


def to_poincare_disc(p) -> np.ndarray:
    """Cayley transform w = (z - i)/(z + i) sending the half plane into the unit disc.

    y = 0 lands on the unit circle, y > 0 strictly inside; (0, 1) maps to the center.
    """
    x, y = float(p[0]), float(p[1])
    if y < 0.0:
        raise ValueError(f"half-plane closure requires y >= 0, got y = {y}")
    z = complex(x, y)
    w = (z - 1j) / (z + 1j)
    if not cmath.isfinite(w):
        # z == -i cannot occur for y >= 0
        raise ValueError(f"Cayley transform undefined at {p}")
    return np.array([w.real, w.imag])


@dataclass(frozen=True)
class HalfSpace:
    """Region of all points with normal . p >= offset (normal points into the region)."""

    normal: tuple
    offset: float

    def __post_init__(self):
        h = np.asarray(self.normal, dtype=float)
        if h.ndim != 1 or not np.all(np.isfinite(h)) or float(h @ h) == 0.0:
            raise ValueError(f"half-space normal must be a nonzero finite vector, got {self.normal}")
        object.__setattr__(self, "normal", tuple(float(c) for c in h))
        object.__setattr__(self, "offset", float(self.offset))

    @property
    def dim(self) -> int:
        return len(self.normal)

    def contains(self, p) -> bool:
        return self.signed_distance(p) >= -BOUNDARY_TOL

    def signed_distance(self, p) -> float:
        """Distance to the boundary plane, positive inside."""
        h = np.asarray(self.normal)
        return float((h @ np.asarray(p, dtype=float) - self.offset) / math.sqrt(float(h @ h)))

    def boundary_distance(self, p) -> float:
        return abs(self.signed_distance(p))

    def stored_normal(self, p=None) -> np.ndarray:
        h = np.asarray(self.normal, dtype=float)
        return h / math.sqrt(float(h @ h))

    def inward_normal(self, p=None) -> np.ndarray:
        """Euclidean unit normal pointing into the region at the boundary."""
        return self.stored_normal()


@dataclass(frozen=True)
class Slab:
    """Region lo <= p[axis] <= hi between two axis-aligned planes."""

    axis: int
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"slab needs lo < hi, got [{self.lo}, {self.hi}]")
        object.__setattr__(self, "axis", int(self.axis))
        object.__setattr__(self, "lo", float(self.lo))
        object.__setattr__(self, "hi", float(self.hi))

    def contains(self, p) -> bool:
        x = float(p[self.axis])
        return self.lo - BOUNDARY_TOL <= x <= self.hi + BOUNDARY_TOL

    def boundary_distance(self, p) -> float:
        x = float(p[self.axis])
        return min(abs(x - self.lo), abs(x - self.hi))

    def _unit(self, dim: int) -> np.ndarray:
        e = np.zeros(dim)
        e[self.axis] = 1.0
        return e

    def stored_normal(self, p) -> np.ndarray:
        return self._unit(len(p))

    def inward_normal(self, p) -> np.ndarray:
        """Unit normal into the slab at the nearer of the two boundary planes."""
        x = float(p[self.axis])
        e = self._unit(len(p))
        return e if abs(x - self.lo) <= abs(x - self.hi) else -e


@dataclass(frozen=True)
class Region:
    """A refractive patch: a shape with a constant index n > 0."""

    shape: object  # HalfSpace | Slab
    index: float

    def __post_init__(self):
        if not (self.index > 0.0 and math.isfinite(self.index)):
            raise ValueError(f"refractive index must be positive and finite, got {self.index}")
        object.__setattr__(self, "index", float(self.index))


def interface_normal(kind: GeometryKind, n_at_p: float, region: Region, p, tol: float = 1e-8) -> np.ndarray:
    """Boundary normal of ``region`` at ``p``, normalized to unit metric length.

    ``n_at_p`` is the index on the incident side and fixes the normalization.
    Orientation: from the higher-index side toward the lower-index side when the
    incident index differs from the region's, otherwise along the shape's stored
    normal.  Either sign works for the refraction routine, which is insensitive
    to the normal's orientation.
    """
    p = validate_point(kind, p)
    shape = region.shape
    d = shape.boundary_distance(p)
    if d > tol:
        raise ValueError(f"point {p} is {d:.3e} from the region boundary (tolerance {tol:.1e})")
    if abs(region.index - n_at_p) <= 1e-15:
        direction = shape.stored_normal(p)
    else:
        inward = shape.inward_normal(p)
        # region side has region.index; the incident side has n_at_p
        direction = -inward if region.index > n_at_p else inward
    return direction / conformal_factor(kind, n_at_p, p)
