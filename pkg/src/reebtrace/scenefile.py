"""Scene documents: a small versioned JSON schema for traceable scenes.

See docs/scene-schema.md for the field-by-field description.  Parsing is
strict: unknown keys and invalid values are rejected with the offending path.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .fronts import Fan
from .geometry import GeometryKind, HalfSpace, Region, Slab
from .tracing import Scene

SCHEMA_VERSION = 1

_GEOMETRY_NAMES = {k.value: k for k in GeometryKind}
_TIR_MODES = ("terminate", "reflect")
_PROJECTIONS = ("chart", "poincare-disc")


class SceneError(ValueError):
    """Scene document rejected; ``path`` locates the offending field."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


@dataclass(frozen=True)
class SceneFile:
    """Parsed scene document."""

    geometry: GeometryKind
    default_n: float
    regions: tuple
    source: np.ndarray
    fan: Fan
    t_max: float
    dt: float
    front_times: tuple | None
    front_every: float | None
    tir_mode: str = "terminate"
    projection: str = "chart"
    version: int = SCHEMA_VERSION
    extras: dict = field(default_factory=dict)

    @property
    def scene(self) -> Scene:
        return Scene(self.geometry, self.default_n, self.regions)

    def resolved_front_times(self) -> tuple:
        if self.front_times is not None:
            return self.front_times
        if self.front_every is None:
            return ()
        k = int(math.floor(self.t_max / self.front_every + 1e-12))
        return tuple(i * self.front_every for i in range(1, k + 1))


def _require(d: dict, key: str, path: str):
    if key not in d:
        raise SceneError(f"{path}.{key}" if path else key, "missing required field")
    return d[key]


def _reject_unknown(d: dict, allowed, path: str):
    for k in d:
        if k not in allowed:
            raise SceneError(f"{path}.{k}" if path else k, "unknown field")


def _finite_number(v, path: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise SceneError(path, f"expected a number, got {type(v).__name__}")
    x = float(v)
    if not math.isfinite(x):
        raise SceneError(path, f"expected a finite number, got {v}")
    return x


def _positive(v, path: str) -> float:
    x = _finite_number(v, path)
    if x <= 0.0:
        raise SceneError(path, f"expected a positive number, got {v}")
    return x


def _integer(v, path: str) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise SceneError(path, f"expected an integer, got {v!r}")
    return v


def _vector(v, dim: int, path: str) -> tuple:
    if not isinstance(v, list) or len(v) != dim:
        raise SceneError(path, f"expected a list of {dim} numbers, got {v!r}")
    return tuple(_finite_number(c, f"{path}[{i}]") for i, c in enumerate(v))


def _parse_shape(d, dim: int, path: str):
    if not isinstance(d, dict):
        raise SceneError(path, "expected an object")
    kind = _require(d, "type", path)
    if kind == "half-space":
        _reject_unknown(d, {"type", "normal", "offset"}, path)
        normal = _vector(_require(d, "normal", path), dim, f"{path}.normal")
        if all(c == 0.0 for c in normal):
            raise SceneError(f"{path}.normal", "normal must be nonzero")
        return HalfSpace(normal, _finite_number(_require(d, "offset", path), f"{path}.offset"))
    if kind == "slab":
        _reject_unknown(d, {"type", "axis", "lo", "hi"}, path)
        axis = _integer(_require(d, "axis", path), f"{path}.axis")
        if not 0 <= axis < dim:
            raise SceneError(f"{path}.axis", f"axis must be in [0, {dim}), got {axis}")
        lo = _finite_number(_require(d, "lo", path), f"{path}.lo")
        hi = _finite_number(_require(d, "hi", path), f"{path}.hi")
        if not lo < hi:
            raise SceneError(f"{path}.lo", f"need lo < hi, got [{lo}, {hi}]")
        return Slab(axis, lo, hi)
    raise SceneError(f"{path}.type", f"unknown shape type {kind!r}")


def _parse_fan(d, geometry: GeometryKind, source, path: str) -> Fan:
    if not isinstance(d, dict):
        raise SceneError(path, "expected an object")
    if "grid" in d:
        _reject_unknown(d, {"grid"}, path)
        g = d["grid"]
        if not isinstance(g, dict):
            raise SceneError(f"{path}.grid", "expected an object")
        _reject_unknown(g, {"rings", "segments"}, f"{path}.grid")
        rings = _integer(_require(g, "rings", f"{path}.grid"), f"{path}.grid.rings")
        segments = _integer(_require(g, "segments", f"{path}.grid"), f"{path}.grid.segments")
        if geometry is not GeometryKind.EUCLIDEAN3:
            raise SceneError(f"{path}.grid", "grid fans require euclidean3 geometry")
        try:
            return Fan(source=source, rings=rings, segments=segments)
        except ValueError as e:
            raise SceneError(f"{path}.grid", str(e)) from e
    _reject_unknown(d, {"count", "angle_from", "angle_to"}, path)
    count = _integer(_require(d, "count", path), f"{path}.count")
    if count < 3:
        raise SceneError(f"{path}.count", f"fan needs at least 3 rays, got {count}")
    angle_from = _finite_number(d.get("angle_from", 0.0), f"{path}.angle_from")
    angle_to = _finite_number(d.get("angle_to", 2.0 * math.pi), f"{path}.angle_to")
    if geometry is GeometryKind.EUCLIDEAN3:
        raise SceneError(path, "euclidean3 geometry requires a grid fan")
    try:
        return Fan(source=source, count=count, angle_from=angle_from, angle_to=angle_to)
    except ValueError as e:
        raise SceneError(path, str(e)) from e


def parse_scene(data) -> SceneFile:
    """Parse and validate a scene document from bytes or text."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as e:
        raise SceneError("", f"syntax error at line {e.lineno} column {e.colno}: {e.msg}") from e
    if not isinstance(doc, dict):
        raise SceneError("", "top level must be an object")

    _reject_unknown(doc, {"version", "geometry", "default_n", "regions", "source",
                          "time", "tir_mode", "projection"}, "")
    version = _integer(_require(doc, "version", ""), "version")
    if version != SCHEMA_VERSION:
        raise SceneError("version", f"unsupported schema version {version}")

    gname = _require(doc, "geometry", "")
    if gname not in _GEOMETRY_NAMES:
        raise SceneError("geometry", f"unknown geometry {gname!r}; expected one of {sorted(_GEOMETRY_NAMES)}")
    geometry = _GEOMETRY_NAMES[gname]
    dim = geometry.dim

    default_n = _positive(_require(doc, "default_n", ""), "default_n")

    regions = []
    raw_regions = doc.get("regions", [])
    if not isinstance(raw_regions, list):
        raise SceneError("regions", "expected a list")
    for i, rd in enumerate(raw_regions):
        rpath = f"regions[{i}]"
        if not isinstance(rd, dict):
            raise SceneError(rpath, "expected an object")
        _reject_unknown(rd, {"shape", "n"}, rpath)
        shape = _parse_shape(_require(rd, "shape", rpath), dim, f"{rpath}.shape")
        n = _positive(_require(rd, "n", rpath), f"{rpath}.n")
        regions.append(Region(shape, n))

    src = _require(doc, "source", "")
    if not isinstance(src, dict):
        raise SceneError("source", "expected an object")
    _reject_unknown(src, {"position", "fan"}, "source")
    position = _vector(_require(src, "position", "source"), dim, "source.position")
    if geometry.hyperbolic and position[1] <= 0.0:
        raise SceneError("source.position", f"half-plane source needs y > 0, got y = {position[1]}")
    fan = _parse_fan(_require(src, "fan", "source"), geometry, np.array(position), "source.fan")

    tm = _require(doc, "time", "")
    if not isinstance(tm, dict):
        raise SceneError("time", "expected an object")
    _reject_unknown(tm, {"t_max", "dt", "front_times", "front_every"}, "time")
    t_max = _positive(_require(tm, "t_max", "time"), "time.t_max")
    dt = _positive(_require(tm, "dt", "time"), "time.dt")
    front_times = None
    front_every = None
    if "front_times" in tm and "front_every" in tm:
        raise SceneError("time", "give either front_times or front_every, not both")
    if "front_times" in tm:
        raw = tm["front_times"]
        if not isinstance(raw, list):
            raise SceneError("time.front_times", "expected a list of numbers")
        front_times = tuple(_finite_number(v, f"time.front_times[{i}]") for i, v in enumerate(raw))
        for i, tf in enumerate(front_times):
            if tf < 0.0 or tf > t_max:
                raise SceneError(f"time.front_times[{i}]", f"front time {tf} outside [0, {t_max}]")
    elif "front_every" in tm:
        front_every = _positive(tm["front_every"], "time.front_every")

    tir_mode = doc.get("tir_mode", "terminate")
    if tir_mode not in _TIR_MODES:
        raise SceneError("tir_mode", f"expected one of {_TIR_MODES}, got {tir_mode!r}")
    projection = doc.get("projection", "chart")
    if projection not in _PROJECTIONS:
        raise SceneError("projection", f"expected one of {_PROJECTIONS}, got {projection!r}")
    if projection == "poincare-disc" and not geometry.hyperbolic:
        raise SceneError("projection", "poincare-disc projection requires the hyperbolic geometry")

    return SceneFile(
        geometry=geometry,
        default_n=default_n,
        regions=tuple(regions),
        source=np.array(position),
        fan=fan,
        t_max=t_max,
        dt=dt,
        front_times=front_times,
        front_every=front_every,
        tir_mode=tir_mode,
        projection=projection,
        version=version,
    )


def emit_scene(sf: SceneFile) -> bytes:
    """Serialize a scene document; parse(emit(parse(x))) is semantically x."""
    regions = []
    for r in sf.regions:
        if isinstance(r.shape, HalfSpace):
            shape = {"type": "half-space", "normal": list(r.shape.normal), "offset": r.shape.offset}
        else:
            shape = {"type": "slab", "axis": r.shape.axis, "lo": r.shape.lo, "hi": r.shape.hi}
        regions.append({"shape": shape, "n": r.index})
    fan: dict = {}
    if sf.fan.is_grid:
        fan["grid"] = {"rings": sf.fan.rings, "segments": sf.fan.segments}
    else:
        fan = {"count": sf.fan.count, "angle_from": sf.fan.angle_from, "angle_to": sf.fan.angle_to}
    time: dict = {"t_max": sf.t_max, "dt": sf.dt}
    if sf.front_times is not None:
        time["front_times"] = list(sf.front_times)
    elif sf.front_every is not None:
        time["front_every"] = sf.front_every
    doc = {
        "version": sf.version,
        "geometry": sf.geometry.value,
        "default_n": sf.default_n,
        "regions": regions,
        "source": {"position": [float(c) for c in sf.source], "fan": fan},
        "time": time,
        "tir_mode": sf.tir_mode,
        "projection": sf.projection,
    }
    return (json.dumps(doc, indent=2) + "\n").encode("utf-8")
