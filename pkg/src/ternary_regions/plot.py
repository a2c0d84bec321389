"""SVG rendering of 2-D region partitions.

Cell polygons are computed exactly (pairwise line intersections filtered
by feasibility) and only turned into decimals when written out.  Each
merged region becomes one ``<path>`` whose subpaths are its cells.
"""

from __future__ import annotations

import hashlib
import math
from fractions import Fraction
from typing import List, Sequence, Tuple
from xml.sax.saxutils import escape

from .netcore import BoxDomain, DimensionError
from .regions import RegionCell, merge_cells

Point = Tuple[Fraction, Fraction]


def _cramer(r1, r2):
    (a1, b1), (a2, b2) = r1, r2
    det = a1[0] * a2[1] - a1[1] * a2[0]
    if det == 0:
        return None
    x = (b1 * a2[1] - a1[1] * b2) / det
    y = (a1[0] * b2 - b1 * a2[0]) / det
    return (x, y)


def polygon(rows: Sequence[Tuple[Sequence[Fraction], Fraction]]) -> List[Point]:
    """Vertices of the bounded polygon ``{a . x <= b}``, counter-clockwise."""
    verts = set()
    for i in range(len(rows)):
        for j in range(i + 1, len(rows)):
            pt = _cramer(rows[i], rows[j])
            if pt is None:
                continue
            if all(a[0] * pt[0] + a[1] * pt[1] <= b for a, b in rows):
                verts.add(pt)
    if len(verts) < 3:
        return sorted(verts)
    cx = sum(v[0] for v in verts) / len(verts)
    cy = sum(v[1] for v in verts) / len(verts)
    # centroid is exact; the angle is only used for ordering
    return sorted(verts, key=lambda v: math.atan2(float(v[1] - cy), float(v[0] - cx)))


def cell_polygon(cell: RegionCell, domain: BoxDomain) -> List[Point]:
    return polygon([h.as_row() for h in cell.halfspaces] + domain.halfspaces())


def polygon_area(poly: Sequence[Point]) -> Fraction:
    n = len(poly)
    twice = sum(poly[i][0] * poly[(i + 1) % n][1] - poly[(i + 1) % n][0] * poly[i][1]
                for i in range(n))
    return abs(Fraction(twice)) / 2


def _color(key: str) -> str:
    return "#" + hashlib.sha1(key.encode()).hexdigest()[:6]


def plot_regions_svg(cells: Sequence[RegionCell], domain: BoxDomain, *, size: int = 480,
                     precision: int = 9) -> str:
    """One ``<path class="region">`` per merged region, colour keyed by its affine map."""
    if domain.dim != 2:
        raise DimensionError("region plots need a 2-D domain")
    if not domain.bounded:
        raise DimensionError("region plots need a bounded domain")
    (x0, y0), (x1, y1) = domain.lower, domain.upper
    sx = Fraction(size) / (x1 - x0)
    sy = Fraction(size) / (y1 - y0)

    def fmt(v: Fraction) -> str:
        return f"{float(v):.{precision}g}"

    def to_px(p: Point) -> str:
        # SVG y grows downwards
        return f"{fmt((p[0] - x0) * sx)},{fmt((y1 - p[1]) * sy)}"

    regions = merge_cells(cells, domain)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">',
        f"<title>{len(regions)} linear regions</title>",
    ]
    for idx, members in enumerate(regions):
        affine = cells[members[0]].affine
        key = repr(affine.to_json())
        d = []
        for i in members:
            poly = cell_polygon(cells[i], domain)
            if len(poly) < 3:
                continue
            d.append("M" + " L".join(to_px(p) for p in poly) + " Z")
        parts.append(
            f'<path class="region" data-region="{idx}" data-cells="{len(members)}" '
            f'fill="{_color(key)}" stroke="#222" stroke-width="0.5" d="{" ".join(d)}">'
            f"<title>{escape(key)}</title></path>")
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
