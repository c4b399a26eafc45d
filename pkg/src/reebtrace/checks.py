"""Seeded invariant battery over random co-sphere states.

Runs the contact-axiom residuals, the strictness residual and the algebraic
co-sphere/speed identities for every geometry and a small set of indices.
Deterministic for a given seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .contact import (
    make_state,
    momentum_of,
    reeb_field,
    verify_reeb,
    verify_strict_contact,
)
from .geometry import GeometryKind, conformal_factor

INDICES = (1.0, 1.33, 2.0)

# (name, tolerance); residual definitions below
TOLERANCES = {
    "reeb_pairing": 1e-9,
    "reeb_invariance": 1e-6,
    "strict_contact": 1e-6,
    "cosphere": 1e-12,
    "metric_speed": 1e-10,
    "coordinate_speed": 1e-12,
    "flow_group_law": 1e-9,
}


@dataclass(frozen=True)
class CheckRecord:
    name: str
    geometry: str
    n: float
    samples: int
    max_residual: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_residual <= self.tolerance


@dataclass(frozen=True)
class VerificationReport:
    seed: int
    records: tuple

    @property
    def all_pass(self) -> bool:
        return all(r.passed for r in self.records)

    def to_text(self) -> str:
        lines = []
        for r in self.records:
            status = "pass" if r.passed else "FAIL"
            lines.append(
                f"{status}  {r.name:<18} {r.geometry:<22} n={r.n:<5g} "
                f"samples={r.samples:<5d} max={r.max_residual:.3e} tol={r.tolerance:.1e}"
            )
        return "\n".join(lines)


def random_states(kind: GeometryKind, rng: np.random.Generator, count: int):
    for _ in range(count):
        if kind.hyperbolic:
            base = np.array([rng.uniform(-2.0, 2.0), rng.uniform(0.5, 3.0)])
        else:
            base = rng.uniform(-2.0, 2.0, size=kind.dim)
        if kind is GeometryKind.EUCLIDEAN3:
            fiber = np.array([rng.uniform(0.0, math.pi), rng.uniform(0.0, 2.0 * math.pi)])
        else:
            fiber = np.array([rng.uniform(0.0, 2.0 * math.pi)])
        yield make_state(kind, base, fiber)


def run_checks(seed: int = 0, samples: int = 1000, strict_samples: int = 100,
               reeb_override=None) -> VerificationReport:
    """Run the invariant battery; ``reeb_override`` substitutes the verified field
    (negative-control hook for the reeb_invariance check)."""
    if samples < 1:
        raise ValueError(f"need samples >= 1, got {samples}")
    from .contact import closed_flow
    from .geometry import g_inner

    records = []
    for kind in GeometryKind:
        for n in INDICES:
            rng = np.random.default_rng([seed, kind.dim, int(n * 100)])
            states = list(random_states(kind, rng, samples))

            r1 = r2 = 0.0
            for s in states:
                a, b = verify_reeb(kind, n, s, field=reeb_override)
                a2, b2 = verify_reeb(kind, n, s, h=0.5e-5, field=reeb_override)
                r1 = max(r1, a, a2)
                r2 = max(r2, b, b2)
            records.append(CheckRecord("reeb_pairing", kind.value, n, samples, r1,
                                       TOLERANCES["reeb_pairing"]))
            records.append(CheckRecord("reeb_invariance", kind.value, n, samples, r2,
                                       TOLERANCES["reeb_invariance"]))

            res = 0.0
            for s in states[:strict_samples]:
                t = rng.uniform(-2.0, 2.0)
                res = max(res, verify_strict_contact(kind, n, s, t))
            records.append(CheckRecord("strict_contact", kind.value, n,
                                       min(strict_samples, len(states)), res,
                                       TOLERANCES["strict_contact"]))

            cosphere = speed = cspeed = group = 0.0
            for s in states:
                p = momentum_of(kind, n, s)
                c = conformal_factor(kind, n, s.base)
                cosphere = max(cosphere, abs(float(p @ p) / (c * c) - 1.0))
                xi = reeb_field(kind, n, s)
                speed = max(speed, abs(g_inner(kind, n, s.base, xi.base_rate, xi.base_rate) - 1.0))
                if not kind.hyperbolic:
                    cspeed = max(cspeed, abs(float(np.linalg.norm(xi.base_rate)) - 1.0 / n))
            for s in states[:strict_samples]:
                t1 = rng.uniform(-1.5, 1.5)
                t2 = rng.uniform(-1.5, 1.5)
                one = closed_flow(kind, n, s, t1 + t2)
                two = closed_flow(kind, n, closed_flow(kind, n, s, t1), t2)
                group = max(group, float(np.max(np.abs(one.base - two.base))))
            records.append(CheckRecord("cosphere", kind.value, n, samples, cosphere,
                                       TOLERANCES["cosphere"]))
            records.append(CheckRecord("metric_speed", kind.value, n, samples, speed,
                                       TOLERANCES["metric_speed"]))
            if not kind.hyperbolic:
                records.append(CheckRecord("coordinate_speed", kind.value, n, samples, cspeed,
                                           TOLERANCES["coordinate_speed"]))
            records.append(CheckRecord("flow_group_law", kind.value, n,
                                       min(strict_samples, len(states)), group,
                                       TOLERANCES["flow_group_law"]))
    return VerificationReport(seed=seed, records=tuple(records))
