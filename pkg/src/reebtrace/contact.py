"""Liouville form, Reeb field, closed flows and the contact-axiom verifiers.

States live on the unit co-sphere bundle of the medium. The fiber chart stores
the physical propagation direction:

* ``EUCLIDEAN2``: one angle ``alpha``, direction ``(cos a, sin a)``;
* ``EUCLIDEAN3``: polar/azimuthal pair ``(theta, phi)``, direction
  ``(sin t cos p, sin t sin p, cos t)``;
* ``HYPERBOLIC_HALF_PLANE``: one angle ``phi``, direction ``(-cos p, sin p)``.

With conformal factor ``c`` (see :mod:`reebtrace.geometry`) the co-sphere
momentum is ``c * direction`` and the Reeb velocity has base part
``direction / c``, so the pairing ``lambda(xi) = 1`` holds identically and the
base speed is metric-unit.  The flows below advance a state along the Reeb
field in closed form and are exact group actions (strict contact maps), which
the finite-difference verifiers at the bottom of the module check without
assuming any of this.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import GeometryKind, conformal_factor, validate_point

TWO_PI = 2.0 * math.pi

# Largest |t|/n the hyperbolic closed flow accepts before exp(2t/n) overflows.
_HYP_FLOW_LIMIT = 350.0


@dataclass(frozen=True)
class ContactState:
    """Base point plus fiber angles on the unit co-sphere."""

    base: np.ndarray
    fiber: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "base", np.asarray(self.base, dtype=float))
        object.__setattr__(self, "fiber", np.atleast_1d(np.asarray(self.fiber, dtype=float)))


@dataclass(frozen=True)
class StateVelocity:
    """Rate of change of a contact state: base velocity plus fiber angular rates."""

    base_rate: np.ndarray
    fiber_rate: np.ndarray


def make_state(kind: GeometryKind, base, fiber) -> ContactState:
    """Validated state with fiber angles normalized into [0, 2pi)."""
    b = validate_point(kind, base)
    f = np.atleast_1d(np.asarray(fiber, dtype=float))
    if f.shape != (kind.fiber_dim,):
        raise ValueError(f"fiber must have {kind.fiber_dim} angle(s), got shape {f.shape}")
    if not np.all(np.isfinite(f)):
        raise ValueError(f"fiber has non-finite angles: {f}")
    return ContactState(b, normalize_fiber(kind, f))


def normalize_fiber(kind: GeometryKind, fiber) -> np.ndarray:
    f = np.atleast_1d(np.asarray(fiber, dtype=float)).copy()
    if kind is GeometryKind.EUCLIDEAN3:
        # fold the polar angle into [0, pi], flipping azimuth when crossing a pole
        t = f[0] % TWO_PI
        if t > math.pi:
            t = TWO_PI - t
            f[1] += math.pi
        f[0] = t
        f[1] %= TWO_PI
    else:
        f[0] %= TWO_PI
    return f


def direction_of(kind: GeometryKind, fiber) -> np.ndarray:
    """Euclidean unit propagation direction encoded by the fiber angles."""
    f = np.atleast_1d(np.asarray(fiber, dtype=float))
    if kind is GeometryKind.EUCLIDEAN2:
        a = f[0]
        return np.array([math.cos(a), math.sin(a)])
    if kind is GeometryKind.EUCLIDEAN3:
        t, p = f[0], f[1]
        st = math.sin(t)
        return np.array([st * math.cos(p), st * math.sin(p), math.cos(t)])
    phi = f[0]
    return np.array([-math.cos(phi), math.sin(phi)])


def fiber_from_direction(kind: GeometryKind, d) -> np.ndarray:
    """Inverse of :func:`direction_of`; ``d`` need not be normalized."""
    d = np.asarray(d, dtype=float)
    r = math.sqrt(float(d @ d))
    if r == 0.0 or not np.all(np.isfinite(d)):
        raise ValueError(f"cannot infer fiber angles from direction {d}")
    if kind is GeometryKind.EUCLIDEAN2:
        return np.array([math.atan2(d[1], d[0]) % TWO_PI])
    if kind is GeometryKind.EUCLIDEAN3:
        t = math.acos(max(-1.0, min(1.0, d[2] / r)))
        p = math.atan2(d[1], d[0]) % TWO_PI
        return np.array([t, p])
    return np.array([math.atan2(d[1], -d[0]) % TWO_PI])


def momentum_of(kind: GeometryKind, n: float, s: ContactState) -> np.ndarray:
    """Co-sphere momentum of the state: metric-unit covector along the direction."""
    c = conformal_factor(kind, n, s.base)
    return c * direction_of(kind, s.fiber)


def liouville_form(kind: GeometryKind, n: float, s: ContactState) -> np.ndarray:
    """Canonical one-form evaluated at the state; componentwise equal to the momentum."""
    return momentum_of(kind, n, s)


def reeb_field(kind: GeometryKind, n: float, s: ContactState) -> StateVelocity:
    """Generator of the ray flow at the state (base velocity, fiber rates)."""
    base, fiber = _reeb_rhs(kind, n, tuple(s.base) + tuple(s.fiber))
    return StateVelocity(np.array(base), np.array(fiber))


def _reeb_rhs(kind: GeometryKind, n: float, q: tuple) -> tuple:
    """Scalar right-hand side on packed coordinates (base..., fiber...)."""
    if kind is GeometryKind.EUCLIDEAN2:
        a = q[2]
        return (math.cos(a) / n, math.sin(a) / n), (0.0,)
    if kind is GeometryKind.EUCLIDEAN3:
        t, p = q[3], q[4]
        st = math.sin(t)
        return (st * math.cos(p) / n, st * math.sin(p) / n, math.cos(t) / n), (0.0, 0.0)
    y, phi = q[1], q[2]
    c = math.cos(phi)
    return ((-y * c / n, y * math.sin(phi) / n), (-c / n,))


def closed_flow(kind: GeometryKind, n: float, s: ContactState, t: float) -> ContactState:
    """State advanced by parameter ``t`` along the Reeb flow, in closed form.

    Requires a homogeneous medium.  Euclidean states translate along the stored
    direction at coordinate speed 1/n with frozen fiber; half-plane states follow
    the geodesic semicircle/vertical exactly.
    """
    if not math.isfinite(t):
        raise ValueError(f"flow parameter must be finite, got {t}")
    if kind is not GeometryKind.HYPERBOLIC_HALF_PLANE:
        d = direction_of(kind, s.fiber)
        return ContactState(s.base + (t / n) * d, s.fiber.copy())
    if abs(t) / n > _HYP_FLOW_LIMIT:
        raise OverflowError(
            f"hyperbolic flow parameter |t|/n = {abs(t) / n:.3g} exceeds {_HYP_FLOW_LIMIT:g}; "
            "exp(2t/n) would overflow"
        )
    x0, y0 = float(s.base[0]), float(s.base[1])
    phi0 = float(s.fiber[0])
    sp, cp = math.sin(phi0), math.cos(phi0)
    e = math.exp(t / n)
    e2 = e * e
    den = (sp - 1.0) * e2 - sp - 1.0  # strictly negative for all t
    x = ((x0 * sp + y0 * cp - x0) * e2 - x0 * sp - y0 * cp - x0) / den
    y = -2.0 * y0 * e / den
    if cp == 0.0:
        phi = phi0
    else:
        # the fiber angle never crosses a vertical (cos phi = 0), so the arctan
        # branch is fixed by the sign of cos phi0
        phi = math.atan(-(((1.0 - sp) * e2 - sp - 1.0) / (2.0 * e * cp)))
        if cp < 0.0:
            phi += math.pi
    return ContactState(np.array([x, y]), np.array([phi % TWO_PI]))


def _state_coords(s: ContactState) -> np.ndarray:
    return np.concatenate([s.base, s.fiber])


def _coords_state(kind: GeometryKind, q: np.ndarray) -> ContactState:
    d = kind.dim
    return ContactState(q[:d].copy(), q[d:].copy())


def _velocity_coords(v: StateVelocity) -> np.ndarray:
    return np.concatenate([v.base_rate, v.fiber_rate])


def _wrap_angle(d: float) -> float:
    """Representative of ``d`` modulo 2pi closest to zero."""
    return (d + math.pi) % TWO_PI - math.pi


def _lambda_components(kind: GeometryKind, n: float, q: np.ndarray) -> np.ndarray:
    """Liouville form on packed state coordinates; fiber components vanish."""
    s = _coords_state(kind, q)
    out = np.zeros(q.size)
    out[: kind.dim] = momentum_of(kind, n, s)
    return out


def verify_reeb(kind: GeometryKind, n: float, s: ContactState, h: float = 1e-5,
                field=None) -> tuple:
    """Residuals of the two Reeb axioms at the state.

    Returns ``(r1, r2)`` where ``r1 = |lambda(xi) - 1|`` and ``r2`` is the
    largest component of the contraction of ``d lambda`` with ``xi``, the
    exterior derivative being assembled by central finite differences over all
    state coordinates.  ``field`` substitutes a different vector field for the
    Reeb field (negative-control hook).
    """
    if h <= 0.0:
        raise ValueError(f"finite-difference step must be positive, got {h}")
    q = _state_coords(s)
    m = q.size
    xi = _velocity_coords((field or reeb_field)(kind, n, s))
    lam = _lambda_components(kind, n, q)
    r1 = abs(float(lam @ xi) - 1.0)

    # dlam[i, j] = d_i lam_j - d_j lam_i
    grad = np.zeros((m, m))  # grad[i, j] = d lam_j / d q_i
    for i in range(m):
        qp = q.copy()
        qm = q.copy()
        qp[i] += h
        qm[i] -= h
        grad[i] = (_lambda_components(kind, n, qp) - _lambda_components(kind, n, qm)) / (2.0 * h)
    dlam = grad - grad.T
    r2 = float(np.max(np.abs(xi @ dlam)))
    return r1, r2


def verify_strict_contact(kind: GeometryKind, n: float, s: ContactState, t: float,
                          h: float = 1e-5) -> float:
    """Residual of the pullback identity flow_t^* lambda = lambda at the state.

    The flow differential is assembled column by column with central finite
    differences of :func:`closed_flow`; the residual is the largest deviation
    of the pulled-back form from the original over the coordinate basis.
    """
    if h <= 0.0:
        raise ValueError(f"finite-difference step must be positive, got {h}")
    d = kind.dim
    q = _state_coords(s)
    m = q.size
    lam_here = _lambda_components(kind, n, q)
    moved = closed_flow(kind, n, s, t)
    p_moved = momentum_of(kind, n, moved)

    residual = 0.0
    for j in range(m):
        qp = q.copy()
        qm = q.copy()
        qp[j] += h
        qm[j] -= h
        fp = _state_coords(closed_flow(kind, n, _coords_state(kind, qp), t))
        fm = _state_coords(closed_flow(kind, n, _coords_state(kind, qm), t))
        col = fp - fm
        for k in range(d, m):
            col[k] = _wrap_angle(col[k])
        col /= 2.0 * h
        pulled = float(p_moved @ col[:d])  # lambda has no fiber components
        residual = max(residual, abs(pulled - lam_here[j]))
    return residual
