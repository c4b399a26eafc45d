"""Ray integration through piecewise-constant-index scenes.

Within a region the Reeb field is integrated with a fixed-step classical RK4;
region changes are located by bisecting the substep flow, after which vector
Snell refraction (or total internal reflection) reinitializes the fiber.  All
steps are deterministic: tracing the same launch twice yields identical bits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .contact import (
    ContactState,
    _reeb_rhs,
    direction_of,
    fiber_from_direction,
    make_state,
    reeb_field,
)
from .geometry import GeometryKind, Region, conformal_factor, interface_normal, validate_point

# Fraction of the transmitted-side step used to nudge a boundary point off the
# interface when classifying which region the ray enters.
_SIDE_EPS = 1e-9
_GRAZING_TOL = 1e-12
_CROSSING_POS_TOL = 1e-10
_MAX_HALVINGS = 20


class MultipleCrossingsError(RuntimeError):
    """A single integration step straddles more than one region boundary."""


@dataclass(frozen=True)
class Scene:
    """Geometry plus an ordered list of refractive regions over a default index."""

    kind: GeometryKind
    default_n: float
    regions: tuple = ()

    def __post_init__(self):
        if not (self.default_n > 0.0 and math.isfinite(self.default_n)):
            raise ValueError(f"default index must be positive and finite, got {self.default_n}")
        object.__setattr__(self, "regions", tuple(self.regions))

    def region_index_at(self, p) -> int | None:
        """Index into ``regions`` of the first region containing ``p``, else None."""
        for i, r in enumerate(self.regions):
            if r.shape.contains(p):
                return i
        return None

    def n_of(self, region_index: int | None) -> float:
        return self.default_n if region_index is None else self.regions[region_index].index

    def n_at(self, p) -> float:
        return self.n_of(self.region_index_at(p))


@dataclass(frozen=True)
class InterfaceEvent:
    """One boundary crossing: where, between which indices, and its outcome."""

    t: float
    point: np.ndarray
    n_in: float
    n_out: float
    angle_in: float
    outcome: str  # "refract" | "tir"
    angle_out: float | None
    d_in: np.ndarray
    d_out: np.ndarray | None


@dataclass
class Ray:
    """Sampled trajectory: state every dt and at every interface event.

    Sample arrays are parallel; ``n_local[i]`` is the index governing the
    segment that starts at sample ``i`` (event samples store the transmitted
    side).  ``samples`` offers the (t, state) view of the same data.
    """

    launch: ContactState
    t: np.ndarray
    base: np.ndarray
    fiber: np.ndarray
    n_local: np.ndarray
    event_labels: list
    events: list = field(default_factory=list)
    terminated_by_tir: bool = False

    @property
    def samples(self) -> list:
        return [(float(tk), ContactState(self.base[k].copy(), self.fiber[k].copy()))
                for k, tk in enumerate(self.t)]


def step_rk4(kind: GeometryKind, n_local: float, s: ContactState, dt: float) -> ContactState:
    """One classical RK4 step of the Reeb field in a medium of index ``n_local``."""
    if dt <= 0.0:
        raise ValueError(f"step size must be positive, got {dt}")
    q = _rk4(kind, n_local, tuple(s.base) + tuple(s.fiber), dt)
    d = kind.dim
    if kind.hyperbolic and q[1] <= 0.0:
        raise ValueError(f"step left the half plane (y = {q[1]}); dt = {dt} is too large")
    return make_state(kind, q[:d], q[d:])


def _rk4(kind: GeometryKind, n: float, q: tuple, dt: float) -> tuple:
    """Scalar RK4 kernel on packed coordinates; no normalization mid-step."""
    d = len(q)

    def rhs(z):
        b, f = _reeb_rhs(kind, n, z)
        return b + f

    k1 = rhs(q)
    k2 = rhs(tuple(q[i] + 0.5 * dt * k1[i] for i in range(d)))
    k3 = rhs(tuple(q[i] + 0.5 * dt * k2[i] for i in range(d)))
    k4 = rhs(tuple(q[i] + dt * k3[i] for i in range(d)))
    w = dt / 6.0
    return tuple(q[i] + w * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) for i in range(d))


def locate_crossing(scene: Scene, s_before: ContactState, s_after: ContactState, dt: float) -> float:
    """Fraction of ``dt`` at which the step from ``s_before`` changes region.

    Bisects the substep flow until the bracketing positions are within 1e-10 of
    each other; the returned fraction lands on the far side of the boundary.
    Raises :class:`MultipleCrossingsError` when interior probes reveal more than
    one boundary inside the step (the caller should halve dt and retry).
    """
    kind = scene.kind
    q0 = tuple(s_before.base) + tuple(s_before.fiber)
    r0 = scene.region_index_at(s_before.base)
    r1 = scene.region_index_at(s_after.base)
    if r0 == r1:
        raise ValueError("no region change between the given states")

    def pos(tau):
        q = _rk4(kind, scene.n_of(r0), q0, tau * dt)
        return np.array(q[: kind.dim])

    # probe interior points: more than one classification change means the step
    # jumped across several boundaries
    classes = [r0]
    for k in range(1, 8):
        classes.append(scene.region_index_at(pos(k / 8.0)))
    classes.append(r1)
    changes = sum(1 for a, b in zip(classes, classes[1:]) if a != b)
    if changes > 1:
        raise MultipleCrossingsError(f"{changes} region changes inside one step of dt = {dt}")

    lo, hi = 0.0, 1.0
    for k, c in enumerate(classes[1:-1], start=1):
        if c != r0:
            hi = k / 8.0
            break
        lo = k / 8.0
    p_lo, p_hi = pos(lo), pos(hi)
    while float(np.linalg.norm(p_hi - p_lo)) > _CROSSING_POS_TOL:
        mid = 0.5 * (lo + hi)
        p_mid = pos(mid)
        if scene.region_index_at(p_mid) == r0:
            lo, p_lo = mid, p_mid
        else:
            hi, p_hi = mid, p_mid
    return hi


def critical_angle(n1: float, n2: float) -> float | None:
    """Incidence angle beyond which a dense-to-rare interface totally reflects.

    None when n1 <= n2 (equal indices never reflect totally).
    """
    if n1 <= 0.0 or n2 <= 0.0:
        raise ValueError(f"indices must be positive, got {n1}, {n2}")
    if n1 <= n2:
        return None
    return math.asin(n2 / n1)


def refract(kind: GeometryKind, p_cross, d_in, normal, n1: float, n2: float) -> np.ndarray | None:
    """Transmitted direction across an interface, or None for total reflection.

    ``d_in`` and ``normal`` are metric-unit on the incident side; the result is
    metric-unit on the transmitted side.  The decomposition is metric-orthogonal,
    which for these conformal metrics coincides with the Euclidean one.  Grazing
    transmission within 1e-12 of the critical ratio is classified as total
    reflection.
    """
    p_cross = np.asarray(p_cross, dtype=float)
    u = np.asarray(d_in, dtype=float)
    u = u / math.sqrt(float(u @ u))
    nh = np.asarray(normal, dtype=float)
    nh = nh / math.sqrt(float(nh @ nh))

    cos_i = float(u @ nh)  # signed: keeps the crossing orientation
    sin_i = math.sqrt(max(0.0, 1.0 - cos_i * cos_i))
    sin_t = (n1 / n2) * sin_i
    if sin_t >= 1.0 - _GRAZING_TOL:
        return None
    c2 = conformal_factor(kind, n2, p_cross)
    if sin_i < 1e-300:
        return (math.copysign(1.0, cos_i) * nh) / c2
    t_hat = (u - cos_i * nh) / sin_i
    cos_t = math.sqrt(1.0 - sin_t * sin_t)
    out = math.copysign(cos_t, cos_i) * nh + sin_t * t_hat
    return out / c2


def _specular(u: np.ndarray, nh: np.ndarray) -> np.ndarray:
    return u - 2.0 * float(u @ nh) * nh


def _boundary_region(scene: Scene, p, r_from: int | None, r_to: int | None) -> Region:
    """The region whose shape boundary contains ``p`` among the two candidates."""
    best = None
    best_d = math.inf
    for idx in (r_from, r_to):
        if idx is None:
            continue
        reg = scene.regions[idx]
        d = reg.shape.boundary_distance(p)
        if d < best_d:
            best, best_d = reg, d
    if best is None:
        raise RuntimeError(f"no region boundary near {p}")
    return best


def trace_ray(scene: Scene, launch: ContactState, t_max: float, dt: float,
              tir_mode: str = "terminate") -> Ray:
    """Integrate a ray through the scene, refracting at region boundaries.

    Samples are recorded on the global grid k*dt and at every interface event.
    ``tir_mode`` "terminate" ends the ray at a total reflection (matching fans
    where only transmitted rays are kept); "reflect" continues with the
    metric-specular direction.
    """
    if t_max <= 0.0 or dt <= 0.0:
        raise ValueError(f"need t_max > 0 and dt > 0, got t_max = {t_max}, dt = {dt}")
    if tir_mode not in ("terminate", "reflect"):
        raise ValueError(f"tir_mode must be 'terminate' or 'reflect', got {tir_mode!r}")

    kind = scene.kind
    dim = kind.dim
    launch = make_state(kind, launch.base, launch.fiber)
    cur_region = scene.region_index_at(launch.base)
    n_cur = scene.n_of(cur_region)

    ts = [0.0]
    bases = [tuple(launch.base)]
    fibers = [tuple(launch.fiber)]
    ns = [n_cur]
    labels = ["-"]
    events: list = []
    terminated = False

    q = tuple(launch.base) + tuple(launch.fiber)
    t = 0.0

    def record(tk, qk, nk, label):
        nonlocal q
        if tk <= ts[-1] + 1e-15:
            # event landed on the previous sample time; keep one row, prefer the
            # event label
            if label != "-":
                labels[-1] = label
                bases[-1] = qk[:dim]
                fibers[-1] = qk[dim:]
                ns[-1] = nk
            return
        ts.append(tk)
        bases.append(qk[:dim])
        fibers.append(qk[dim:])
        ns.append(nk)
        labels.append(label)

    n_steps = int(math.ceil(t_max / dt - 1e-12))
    for k in range(1, n_steps + 1):
        grid_t = min(k * dt, t_max)
        # integrate from t to grid_t, consuming interface events along the way
        while t < grid_t - 1e-15 and not terminated:
            seg = grid_t - t
            halvings = 0
            while True:
                q_try = _rk4(kind, n_cur, q, seg)
                if kind.hyperbolic and q_try[1] <= 0.0:
                    raise ValueError(f"step left the half plane at t = {t}; reduce dt")
                r_new = scene.region_index_at(np.array(q_try[:dim]))
                if r_new == cur_region:
                    q = q_try
                    t += seg
                    break
                s_before = ContactState(np.array(q[:dim]), np.array(q[dim:]))
                s_after = ContactState(np.array(q_try[:dim]), np.array(q_try[dim:]))
                try:
                    tau = locate_crossing(scene, s_before, s_after, seg)
                except MultipleCrossingsError:
                    halvings += 1
                    if halvings > _MAX_HALVINGS:
                        raise
                    seg *= 0.5
                    continue

                q_ev = _rk4(kind, n_cur, q, tau * seg)
                t_ev = t + tau * seg
                p_cross = np.array(q_ev[:dim])
                fiber_ev = np.array(q_ev[dim:])
                u = direction_of(kind, fiber_ev)  # Euclidean unit incident direction
                r_enter = scene.region_index_at(p_cross + _SIDE_EPS * u)
                n_new = scene.n_of(r_enter)
                c_in = conformal_factor(kind, n_cur, p_cross)
                d_in = u / c_in

                boundary = _boundary_region(scene, p_cross, cur_region, r_enter)
                normal = interface_normal(kind, n_cur, boundary, p_cross, tol=1e-7)
                nh = normal / float(np.linalg.norm(normal))
                cos_i = float(u @ nh)
                angle_in = math.acos(max(-1.0, min(1.0, abs(cos_i))))

                d_out = refract(kind, p_cross, d_in, normal, n_cur, n_new)
                if d_out is None:
                    events.append(InterfaceEvent(
                        t=t_ev, point=p_cross, n_in=n_cur, n_out=n_new,
                        angle_in=angle_in, outcome="tir", angle_out=None,
                        d_in=d_in, d_out=None))
                    if tir_mode == "terminate":
                        record(t_ev, tuple(p_cross) + tuple(fiber_ev), n_cur, "tir")
                        terminated = True
                        break
                    u_ref = _specular(u, nh)
                    fiber_new = fiber_from_direction(kind, u_ref)
                    record(t_ev, tuple(p_cross) + tuple(fiber_new), n_cur, "tir")
                    q = tuple(p_cross) + tuple(fiber_new)
                    t = t_ev
                    continue

                sin_t = (n_cur / n_new) * math.sin(angle_in)
                angle_out = math.asin(min(1.0, sin_t))
                fiber_new = fiber_from_direction(kind, d_out)
                events.append(InterfaceEvent(
                    t=t_ev, point=p_cross, n_in=n_cur, n_out=n_new,
                    angle_in=angle_in, outcome="refract", angle_out=angle_out,
                    d_in=d_in, d_out=d_out))
                record(t_ev, tuple(p_cross) + tuple(fiber_new), n_new, "refract")
                q = tuple(p_cross) + tuple(fiber_new)
                t = t_ev
                cur_region = r_enter
                n_cur = n_new
                break
        if terminated:
            break
        record(grid_t, q, n_cur, "-")

    fiber_arr = np.array([normalize_fiber_row(kind, f) for f in fibers])
    return Ray(
        launch=launch,
        t=np.array(ts),
        base=np.array(bases),
        fiber=fiber_arr,
        n_local=np.array(ns),
        event_labels=labels,
        events=events,
        terminated_by_tir=terminated,
    )


def normalize_fiber_row(kind: GeometryKind, f: tuple) -> tuple:
    from .contact import normalize_fiber

    return tuple(normalize_fiber(kind, np.array(f)))


def velocity_at(scene: Scene, n_local: float, base, fiber) -> np.ndarray:
    """Base velocity of the Reeb field for a sampled (base, fiber) pair."""
    s = ContactState(np.asarray(base, dtype=float), np.asarray(fiber, dtype=float))
    return reeb_field(scene.kind, n_local, s).base_rate
