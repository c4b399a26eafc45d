"""Deterministic CSV and SVG emission for traced rays and fronts.

Numbers in CSV are printed with 17 significant digits so double-precision
values round-trip exactly; both emitters are pure functions of their inputs,
so repeated runs produce byte-identical files.
"""

from __future__ import annotations

import numpy as np

from .geometry import GeometryKind, HalfSpace, Slab, to_poincare_disc
from .scenefile import SceneFile


def _num(x: float) -> str:
    return format(float(x), ".17g")


def emit_csv(rays, fronts) -> tuple:
    """(rays.csv bytes, fronts.csv bytes) for the traced outputs."""
    dim = rays[0].base.shape[1] if rays else 2
    fdim = rays[0].fiber.shape[1] if rays else 1
    coord_names = ["x", "y", "z"][:dim]
    fiber_names = [f"fiber{i}" for i in range(fdim)]

    lines = ["ray_id,t," + ",".join(coord_names + fiber_names) + ",n_local,event"]
    for rid, ray in enumerate(rays):
        for k in range(ray.t.size):
            cells = [str(rid), _num(ray.t[k])]
            cells += [_num(c) for c in ray.base[k]]
            cells += [_num(c) for c in ray.fiber[k]]
            cells.append(_num(ray.n_local[k]))
            cells.append(ray.event_labels[k])
            lines.append(",".join(cells))
    rays_csv = ("\n".join(lines) + "\n").encode("utf-8")

    lines = ["front_t,launch_index," + ",".join(coord_names)]
    for front in sorted(fronts, key=lambda f: f.t):
        for li, p in zip(front.launch_indices, front.points):
            lines.append(",".join([_num(front.t), str(int(li))] + [_num(c) for c in p]))
    fronts_csv = ("\n".join(lines) + "\n").encode("utf-8")
    return rays_csv, fronts_csv


def _svg_num(x: float) -> str:
    return format(float(x), ".6f")


def _project_points(pts: np.ndarray, disc: bool) -> np.ndarray:
    if disc:
        return np.array([to_poincare_disc(p) for p in pts])
    return pts[:, :2]


def _clip_halfplane(poly, normal, offset):
    """Sutherland-Hodgman clip of a polygon against normal . p >= offset."""
    out = []
    m = len(poly)
    for i in range(m):
        a, b = poly[i], poly[(i + 1) % m]
        da = normal[0] * a[0] + normal[1] * a[1] - offset
        db = normal[0] * b[0] + normal[1] * b[1] - offset
        if da >= 0:
            out.append(a)
            if db < 0:
                w = da / (da - db)
                out.append((a[0] + w * (b[0] - a[0]), a[1] + w * (b[1] - a[1])))
        elif db >= 0:
            w = da / (da - db)
            out.append((a[0] + w * (b[0] - a[0]), a[1] + w * (b[1] - a[1])))
    return out


def _densify(poly, per_edge: int = 64):
    out = []
    m = len(poly)
    for i in range(m):
        a, b = np.array(poly[i]), np.array(poly[(i + 1) % m])
        for k in range(per_edge):
            out.append(tuple(a + (k / per_edge) * (b - a)))
    return out


def _region_polygon(shape, bounds, dim: int):
    """Region footprint clipped to the plotting window (first two coordinates)."""
    (x0, x1), (y0, y1) = bounds
    window = [(x0, y0), (x1, y0), (x1, y1), (x0, y1)]
    if isinstance(shape, HalfSpace):
        n2 = shape.normal[:2]
        return _clip_halfplane(window, n2, shape.offset)
    if isinstance(shape, Slab):
        if shape.axis > 1:
            return window  # slab along z: covers the whole plotted window
        lo = [(1.0, 0.0), (0.0, 1.0)][shape.axis]
        poly = _clip_halfplane(window, lo, shape.lo)
        return _clip_halfplane(poly, (-lo[0], -lo[1]), -shape.hi)
    raise TypeError(f"unknown region shape {type(shape).__name__}")


def emit_svg(scene_file: SceneFile, rays, fronts) -> bytes:
    """Figure with gray region shading, solid ray polylines and dashed fronts.

    For hyperbolic scenes with the poincare-disc projection every plotted point
    is mapped through the Cayley transform and the unit circle is drawn.
    """
    disc = scene_file.projection == "poincare-disc"
    dim = scene_file.geometry.dim

    plotted = []
    ray_paths = []
    for ray in rays:
        pts = _project_points(ray.base, disc)
        ray_paths.append(pts)
        plotted.append(pts)
    front_paths = []
    for front in sorted(fronts, key=lambda f: f.t):
        if front.points.shape[0] >= 2:
            pts = _project_points(front.points, disc)
            front_paths.append((pts, front.closed))
            plotted.append(pts)
    plotted.append(_project_points(scene_file.source[None, :], disc))

    if disc:
        x0 = y0 = -1.05
        x1 = y1 = 1.05
    else:
        allpts = np.vstack(plotted)
        x0, y0 = allpts.min(axis=0)
        x1, y1 = allpts.max(axis=0)
        pad = 0.05 * max(x1 - x0, y1 - y0, 1e-9)
        x0, x1, y0, y1 = x0 - pad, x1 + pad, y0 - pad, y1 + pad

    w, h = x1 - x0, y1 - y0
    stroke = 0.004 * max(w, h)

    def pt(p):
        # SVG y axis points down
        return f"{_svg_num(p[0])},{_svg_num(-p[1])}"

    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="{_svg_num(x0)} {_svg_num(-y1)} '
        f'{_svg_num(w)} {_svg_num(h)}" width="640" height="{int(round(640 * h / w))}">',
    ]

    for region in scene_file.regions:
        if disc:
            hyper_window = ((-50.0, 50.0), (1e-6, 50.0))
            poly = _region_polygon(region.shape, hyper_window, dim)
            if len(poly) >= 3:
                poly = [tuple(to_poincare_disc(p)) for p in _densify(poly)]
        else:
            poly = _region_polygon(region.shape, ((x0, x1), (y0, y1)), dim)
        if len(poly) >= 3:
            parts.append(f'<polygon class="region" points="{" ".join(pt(p) for p in poly)}" '
                         'fill="#c8c8c8" fill-opacity="0.55" stroke="none"/>')

    if disc:
        parts.append(f'<circle cx="0" cy="0" r="1" fill="none" stroke="#000000" '
                     f'stroke-width="{_svg_num(stroke)}"/>')

    for pts in ray_paths:
        parts.append(f'<polyline class="ray" points="{" ".join(pt(p) for p in pts)}" '
                     f'fill="none" stroke="#1f77b4" stroke-width="{_svg_num(stroke)}"/>')

    for pts, closed in front_paths:
        tag = "polygon" if closed else "polyline"
        parts.append(f'<{tag} class="front" points="{" ".join(pt(p) for p in pts)}" '
                     f'fill="none" stroke="#d62728" stroke-width="{_svg_num(stroke)}" '
                     f'stroke-dasharray="{_svg_num(3 * stroke)} {_svg_num(2 * stroke)}"/>')

    src = _project_points(scene_file.source[None, :], disc)[0]
    parts.append(f'<circle cx="{_svg_num(src[0])}" cy="{_svg_num(-src[1])}" '
                 f'r="{_svg_num(1.5 * stroke)}" fill="#000000"/>')
    parts.append("</svg>")
    return ("\n".join(parts) + "\n").encode("utf-8")
