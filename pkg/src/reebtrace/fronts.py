"""Wavefronts as equal-time loci of ray fans, with orthogonality diagnostics.

A front at time t is the polyline (ordered by launch angle) of the fan's ray
positions at flow parameter t, interpolated linearly between samples.  Fronts
are reconstructed purely from traced rays; no wave equation is involved.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .contact import ContactState, direction_of, make_state, reeb_field
from .geometry import GeometryKind, g_inner, validate_point
from .tracing import Ray, Scene, trace_ray

TWO_PI = 2.0 * math.pi
_FULL_CIRCLE_TOL = 1e-12


@dataclass(frozen=True)
class Fan:
    """Launch bundle from a point source.

    2D fans spread ``count`` fiber angles over [angle_from, angle_to]; a span of
    exactly 2pi is treated as a full circle (endpoint excluded, fronts closed).
    3D fans use a latitude-longitude grid: ``rings`` interior polar circles of
    ``segments`` directions each, plus the two poles.
    """

    source: np.ndarray
    count: int = 0
    angle_from: float = 0.0
    angle_to: float = TWO_PI
    rings: int = 0
    segments: int = 0

    def __post_init__(self):
        object.__setattr__(self, "source", np.asarray(self.source, dtype=float))
        if self.rings or self.segments:
            if self.rings < 1 or self.segments < 3:
                raise ValueError(f"grid fan needs rings >= 1 and segments >= 3, got {self.rings}, {self.segments}")
            object.__setattr__(self, "count", self.rings * self.segments + 2)
        else:
            if self.count < 3:
                raise ValueError(f"fan needs at least 3 rays, got {self.count}")
            if not self.angle_from < self.angle_to:
                raise ValueError(f"fan needs angle_from < angle_to, got [{self.angle_from}, {self.angle_to}]")

    @property
    def is_grid(self) -> bool:
        return self.rings > 0

    @property
    def full_circle(self) -> bool:
        return (not self.is_grid) and abs((self.angle_to - self.angle_from) - TWO_PI) <= _FULL_CIRCLE_TOL

    def launch_fibers(self, kind: GeometryKind) -> list:
        if self.is_grid:
            if kind is not GeometryKind.EUCLIDEAN3:
                raise ValueError("grid fans need a 3D geometry")
            fibers = [np.array([0.0, 0.0])]
            for i in range(1, self.rings + 1):
                theta = i * math.pi / (self.rings + 1)
                for j in range(self.segments):
                    fibers.append(np.array([theta, j * TWO_PI / self.segments]))
            fibers.append(np.array([math.pi, 0.0]))
            return fibers
        if kind is GeometryKind.EUCLIDEAN3:
            raise ValueError("3D geometry needs a grid fan")
        if self.full_circle:
            step = TWO_PI / self.count
            return [np.array([self.angle_from + k * step]) for k in range(self.count)]
        step = (self.angle_to - self.angle_from) / (self.count - 1)
        return [np.array([self.angle_from + k * step]) for k in range(self.count)]


@dataclass(frozen=True)
class Wavefront:
    """Equal-time locus of a fan: points ordered by launch angle with ray velocities."""

    t: float
    launch_indices: np.ndarray
    points: np.ndarray      # (k, dim)
    directions: np.ndarray  # (k, dim) ray velocity at parameter t
    closed: bool


def _wrap_diff(a: np.ndarray) -> np.ndarray:
    return (a + math.pi) % TWO_PI - math.pi


def state_at_time(ray: Ray, tq: float):
    """(base, fiber, n_local) of the ray at parameter ``tq``; None once terminated.

    Linear interpolation between bracketing samples; fiber angles take the
    shortest arc.  Events are samples, so a bracket never straddles a boundary.
    """
    ts = ray.t
    if tq > ts[-1] + 1e-12:
        return None
    i = int(np.searchsorted(ts, tq))
    if i < ts.size and abs(ts[i] - tq) <= 1e-15:
        j = i
        while j + 1 < ts.size and abs(ts[j + 1] - tq) <= 1e-15:
            j += 1  # prefer the post-event row at coincident times
        return ray.base[j].copy(), ray.fiber[j].copy(), float(ray.n_local[j])
    i = max(1, min(i, ts.size - 1))
    t0, t1 = ts[i - 1], ts[i]
    w = (tq - t0) / (t1 - t0)
    base = (1.0 - w) * ray.base[i - 1] + w * ray.base[i]
    fiber = ray.fiber[i - 1] + w * _wrap_diff(ray.fiber[i] - ray.fiber[i - 1])
    return base, fiber % TWO_PI, float(ray.n_local[i - 1])


def propagate_fan(scene: Scene, fan: Fan, t_max: float, dt: float, front_times,
                  tir_mode: str = "terminate", workers: int = 1):
    """Trace the fan and assemble the requested equal-time fronts.

    Returns ``(rays, fronts)``. Rays terminated by total reflection before a
    front time contribute no point to that front.  With ``workers > 1`` rays
    are traced concurrently; results are assembled in launch order, so output
    is independent of scheduling.
    """
    front_times = sorted(float(tf) for tf in front_times)
    if front_times and (front_times[0] < 0.0 or front_times[-1] > t_max + 1e-12):
        raise ValueError(f"front times must lie in [0, {t_max}], got {front_times}")
    source = validate_point(scene.kind, fan.source)
    launches = [make_state(scene.kind, source, f) for f in fan.launch_fibers(scene.kind)]

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rays = list(pool.map(lambda s: trace_ray(scene, s, t_max, dt, tir_mode), launches))
    else:
        rays = [trace_ray(scene, s, t_max, dt, tir_mode) for s in launches]

    fronts = [assemble_front(scene, rays, tf, fan.full_circle) for tf in front_times]
    return rays, fronts


def assemble_front(scene: Scene, rays, tf: float, full_circle: bool) -> Wavefront:
    idx, pts, dirs = [], [], []
    for k, ray in enumerate(rays):
        hit = state_at_time(ray, tf)
        if hit is None:
            continue
        base, fiber, n_loc = hit
        vel = reeb_field(scene.kind, n_loc, ContactState(base, fiber)).base_rate
        idx.append(k)
        pts.append(base)
        dirs.append(vel)
    closed = full_circle and len(idx) == len(rays)
    dim = scene.kind.dim
    return Wavefront(
        t=tf,
        launch_indices=np.array(idx, dtype=int),
        points=np.array(pts).reshape(len(pts), dim),
        directions=np.array(dirs).reshape(len(dirs), dim),
        closed=closed,
    )


def front_tangents(front: Wavefront) -> np.ndarray:
    """Central-difference tangents along the front polyline (wrapping if closed)."""
    pts = front.points
    k = pts.shape[0]
    if k < 3:
        raise ValueError(f"need at least 3 front points for tangents, got {k}")
    if front.closed:
        tangents = np.roll(pts, -1, axis=0) - np.roll(pts, 1, axis=0)
    else:
        tangents = np.empty_like(pts)
        tangents[1:-1] = pts[2:] - pts[:-2]
        tangents[0] = pts[1] - pts[0]
        tangents[-1] = pts[-1] - pts[-2]
    norms = np.linalg.norm(tangents, axis=1)
    scale = max(float(np.max(np.abs(pts))), 1.0)
    if np.any(norms < 1e-14 * scale):
        raise ValueError("coincident neighboring front points; tangent undefined")
    return tangents / norms[:, None]


def orthogonality_residual(scene: Scene, front: Wavefront, ray_directions=None) -> np.ndarray:
    """Normalized metric pairing of ray direction and front tangent, per point.

    Zero means the ray crosses its front perpendicularly; in homogeneous media
    the values vanish up to fan discretization, across interfaces they need not.
    """
    dirs = front.directions if ray_directions is None else np.asarray(ray_directions, dtype=float)
    tangents = front_tangents(front)
    out = np.empty(front.points.shape[0])
    for i, p in enumerate(front.points):
        n_loc = scene.n_at(p)
        d, tau = dirs[i], tangents[i]
        num = abs(g_inner(scene.kind, n_loc, p, d, tau))
        den = math.sqrt(g_inner(scene.kind, n_loc, p, d, d) * g_inner(scene.kind, n_loc, p, tau, tau))
        out[i] = num / den
    return out


def _polyline_segments(pts: np.ndarray, closed: bool):
    a = pts
    b = np.roll(pts, -1, axis=0) if closed else pts[1:]
    if closed:
        return a, b
    return a[:-1], b


def count_front_intersections(ray: Ray, front: Wavefront, tol: float = 1e-12) -> int:
    """Number of distinct crossings between the ray track and the front polyline.

    Segment pairs are intersected with orientation predicates (collinearity
    tolerance ``tol``); intersection points are deduplicated so shared polyline
    endpoints and tangential touches count once.
    """
    if ray.base.shape[1] != 2:
        raise ValueError("intersection counting is defined for planar scenes")
    ra, rb = ray.base[:-1], ray.base[1:]
    fa, fb = _polyline_segments(front.points, front.closed)
    if ra.shape[0] == 0 or fa.shape[0] == 0:
        return 0

    scale = max(float(np.max(np.abs(ray.base))), float(np.max(np.abs(front.points))), 1.0)
    hits = []
    d1 = rb - ra  # (N, 2)
    for j in range(fa.shape[0]):
        p3, p4 = fa[j], fb[j]
        d2 = p4 - p3
        denom = d1[:, 0] * d2[1] - d1[:, 1] * d2[0]
        rel = p3[None, :] - ra
        tnum = rel[:, 0] * d2[1] - rel[:, 1] * d2[0]
        unum = rel[:, 0] * d1[:, 1] - rel[:, 1] * d1[:, 0]
        ok = np.abs(denom) > tol * scale * scale
        with np.errstate(divide="ignore", invalid="ignore"):
            tpar = np.where(ok, tnum / denom, -1.0)
            upar = np.where(ok, unum / denom, -1.0)
        eps = 1e-12
        mask = ok & (tpar >= -eps) & (tpar <= 1.0 + eps) & (upar >= -eps) & (upar <= 1.0 + eps)
        for i in np.nonzero(mask)[0]:
            hits.append(ra[i] + tpar[i] * d1[i])
        # collinear overlaps: count the overlap once via its midpoint
        col = (~ok) & (np.abs(tnum) <= tol * scale * scale)
        for i in np.nonzero(col)[0]:
            pt = _collinear_overlap_mid(ra[i], rb[i], p3, p4)
            if pt is not None:
                hits.append(pt)

    if not hits:
        return 0
    pts = np.array(hits)
    dedup_tol = 1e-9 * scale
    kept: list = []
    for p in pts:
        if all(float(np.linalg.norm(p - q)) > dedup_tol for q in kept):
            kept.append(p)
    return len(kept)


def _collinear_overlap_mid(a, b, c, d):
    """Midpoint of the overlap of two collinear segments, or None if disjoint."""
    axis = int(np.argmax(np.abs(b - a)))
    lo1, hi1 = sorted((a[axis], b[axis]))
    lo2, hi2 = sorted((c[axis], d[axis]))
    lo, hi = max(lo1, lo2), min(hi1, hi2)
    if lo > hi:
        return None
    mid = 0.5 * (lo + hi)
    if abs(b[axis] - a[axis]) < 1e-300:
        return None
    w = (mid - a[axis]) / (b[axis] - a[axis])
    return a + w * (b - a)
