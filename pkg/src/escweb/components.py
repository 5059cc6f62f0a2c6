"""Connected components of the complement mask: labelling, diameters, boundary loops."""
from __future__ import annotations

from dataclasses import dataclass, field

import numba
import numpy as np

from .geometry import RectR
from .orbits import OutcomeClass
from .raster import GridSpec, RegionMask
from .reports import Report


class BorderComponent(ValueError):
    """The component touches the grid border, so its outer loop is not closed in the window."""


@dataclass
class ComponentRecord:
    id: int
    pixel_count: int
    touches_border: bool
    bbox: tuple  # (row_min, col_min, row_max, col_max), inclusive
    diameter: float
    boundary_loop: list | None = field(default=None, repr=False)

    @property
    def bounded(self) -> bool:
        return not self.touches_border

    def as_dict(self, with_loop: bool = False) -> dict:
        out = {"id": self.id, "pixel_count": self.pixel_count,
               "touches_border": self.touches_border, "bbox": list(self.bbox),
               "diameter": self.diameter}
        if with_loop and self.boundary_loop is not None:
            out["boundary_loop"] = [[x, y] for x, y in self.boundary_loop]
        return out


# ----------------------------------------------------------------------------
# labelling


@numba.njit(cache=True)
def _find(parent, i):
    root = i
    while parent[root] != root:
        root = parent[root]
    while parent[i] != root:
        parent[i], i = root, parent[i]
    return root


@numba.njit(cache=True)
def _label4(sel):
    """Two-pass union-find labelling; labels numbered 1.. in raster order of first pixel."""
    h, w = sel.shape
    prov = np.zeros((h, w), np.int32)
    parent = np.zeros(h * w // 2 + 2, np.int32)
    nxt = 1
    for r in range(h):
        for c in range(w):
            if not sel[r, c]:
                continue
            up = prov[r - 1, c] if r > 0 else 0
            left = prov[r, c - 1] if c > 0 else 0
            if up == 0 and left == 0:
                if nxt >= parent.size:
                    grown = np.zeros(parent.size * 2, np.int32)
                    grown[: parent.size] = parent
                    parent = grown
                parent[nxt] = nxt
                prov[r, c] = nxt
                nxt += 1
            elif up == 0:
                prov[r, c] = left
            elif left == 0:
                prov[r, c] = up
            else:
                ru = _find(parent, up)
                rl = _find(parent, left)
                if ru < rl:
                    parent[rl] = ru
                elif rl < ru:
                    parent[ru] = rl
                prov[r, c] = ru if ru < rl else rl
    # final ids in order of first appearance
    final = np.zeros(nxt, np.int32)
    count = 0
    out = np.zeros((h, w), np.int32)
    for r in range(h):
        for c in range(w):
            p = prov[r, c]
            if p == 0:
                continue
            root = _find(parent, p)
            if final[root] == 0:
                count += 1
                final[root] = count
            out[r, c] = final[root]
    return out, count


def label_array(selected: np.ndarray) -> tuple[np.ndarray, int]:
    """4-connected labels of a boolean array (0 = background)."""
    sel = np.ascontiguousarray(selected, dtype=np.bool_)
    if sel.ndim != 2:
        raise ValueError("expected a 2-D mask")
    return _label4(sel)


# ----------------------------------------------------------------------------
# convex hull and diameter


def convex_hull(points: np.ndarray) -> np.ndarray:
    """Monotone-chain hull, counter-clockwise, without repeated first point."""
    pts = np.unique(np.asarray(points, dtype=np.float64).reshape(-1, 2), axis=0)
    if len(pts) <= 2:
        return pts

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower, upper = [], []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    for p in pts[::-1]:
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return np.array(lower[:-1] + upper[:-1])


def hull_diameter(hull: np.ndarray, chunk: int = 512) -> float:
    """Largest pairwise distance of hull vertices.

    Exact over all vertex pairs, in row chunks. Lattice hulls have few vertices,
    and unlike rotating calipers this cannot skip a pair on near-parallel edges.
    """
    h = np.asarray(hull, dtype=float)
    best = 0.0
    for s in range(0, len(h), chunk):
        d = h[s:s + chunk, None, :] - h[None, :, :]
        best = max(best, float(np.sqrt((d * d).sum(axis=-1)).max()))
    return best


def diameter_of_points(points: np.ndarray) -> float:
    return hull_diameter(convex_hull(points))


# ----------------------------------------------------------------------------
# boundary tracing

_E, _S, _W, _N = (1, 0), (0, 1), (-1, 0), (0, -1)


def _right(d):
    return (-d[1], d[0])


def _left(d):
    return (d[1], -d[0])


def _pixel_in(comp, vx, vy, qx, qy):
    """Is the pixel in quadrant (qx, qy) of corner (vx, vy) part of ``comp``?"""
    col = vx if qx > 0 else vx - 1
    row = vy if qy > 0 else vy - 1
    if row < 0 or col < 0 or row >= comp.shape[0] or col >= comp.shape[1]:
        return False
    return bool(comp[row, col])


def trace_pixel_loop(comp: np.ndarray) -> list[tuple[int, int]]:
    """Outer crack loop of a 4-connected pixel set, as corner coordinates ``(col, row)``.

    The walk keeps the set on its right in image coordinates (row axis
    pointing down); only turning vertices are kept and the first vertex is
    repeated at the end.
    """
    rows, cols = np.nonzero(comp)
    if rows.size == 0:
        raise ValueError("empty component")
    start = (int(cols[0]), int(rows[0]))  # top-left corner of the first pixel in scan order
    v, d = start, _E
    loop = [start]
    limit = 4 * comp.size + 8
    for _ in range(limit):
        r = _right(d)
        lf = _left(d)
        ahead_right = _pixel_in(comp, v[0], v[1], d[0] + r[0], d[1] + r[1])
        ahead_left = _pixel_in(comp, v[0], v[1], d[0] + lf[0], d[1] + lf[1])
        if not ahead_right:
            nd = r
        elif ahead_left:
            nd = lf
        else:
            nd = d
        if nd != d and v != loop[-1]:
            loop.append(v)
        d = nd
        v = (v[0] + d[0], v[1] + d[1])
        if v == start and d == _N:
            # back at the start corner arriving upward; next move is east again
            loop.append(start)
            return loop
    raise RuntimeError("boundary walk did not close")


def loop_edges(loop) -> list[tuple[tuple[int, int], tuple[int, int]]]:
    """Unit edges ``(vertex, direction)`` along a corner loop."""
    out = []
    for (x0, y0), (x1, y1) in zip(loop[:-1], loop[1:]):
        dx = (x1 > x0) - (x1 < x0)
        dy = (y1 > y0) - (y1 < y0)
        for s in range(abs(x1 - x0) + abs(y1 - y0)):
            out.append(((x0 + s * dx, y0 + s * dy), (dx, dy)))
    return out


def collar_pixels(loop, shape) -> list[tuple[int, int]]:
    """Pixels ``(row, col)`` across each loop edge on the side away from the component."""
    seen, out = set(), []
    for (vx, vy), d in loop_edges(loop):
        lf = _left(d)
        qx, qy = d[0] + lf[0], d[1] + lf[1]
        col = vx if qx > 0 else vx - 1
        row = vy if qy > 0 else vy - 1
        if 0 <= row < shape[0] and 0 <= col < shape[1] and (row, col) not in seen:
            seen.add((row, col))
            out.append((row, col))
    return out


def winding_number(poly: np.ndarray, p) -> int:
    """Winding number of a closed polygon (first == last) around point ``p``."""
    poly = np.asarray(poly, dtype=np.float64)
    x, y = p
    wn = 0
    for (x0, y0), (x1, y1) in zip(poly[:-1], poly[1:]):
        cross = (x1 - x0) * (y - y0) - (x - x0) * (y1 - y0)
        if y0 <= y < y1 and cross > 0:
            wn += 1
        elif y1 <= y < y0 and cross < 0:
            wn -= 1
    return wn


# ----------------------------------------------------------------------------
# records


@dataclass
class LabelledMask:
    mask: RegionMask
    labels: np.ndarray
    components: list[ComponentRecord]
    complement_classes: frozenset

    def component_pixels(self, comp_id: int) -> np.ndarray:
        return self.labels == comp_id

    def bounded(self) -> list[ComponentRecord]:
        return [c for c in self.components if c.bounded]


def _normalise_classes(classes) -> frozenset:
    if classes is None:
        classes = {OutcomeClass.VIOLATED}
    out = frozenset(OutcomeClass[c] if isinstance(c, str) else OutcomeClass(c) for c in classes)
    if not out:
        raise ValueError("complement classes must be non-empty")
    return out


def label_components(mask: RegionMask, complement_classes=None,
                     trace_loops: bool = True) -> LabelledMask:
    """4-connected components of the pixels whose class is in ``complement_classes``.

    Components are numbered in raster order of their first pixel. Loops are
    traced for components that do not touch the border.
    """
    classes = _normalise_classes(complement_classes)
    sel = np.isin(mask.classes, [int(c) for c in classes])
    labels, n = label_array(sel)
    spec = mask.spec
    h, w = labels.shape
    records = []
    if n == 0:
        return LabelledMask(mask, labels, records, classes)
    flat = labels.ravel()
    rows, cols = np.divmod(np.arange(flat.size), w)
    on = flat > 0
    lab, rr, cc = flat[on], rows[on], cols[on]
    counts = np.bincount(lab, minlength=n + 1)
    rmin = np.full(n + 1, h); np.minimum.at(rmin, lab, rr)
    rmax = np.full(n + 1, -1); np.maximum.at(rmax, lab, rr)
    cmin = np.full(n + 1, w); np.minimum.at(cmin, lab, cc)
    cmax = np.full(n + 1, -1); np.maximum.at(cmax, lab, cc)
    # hull candidates: leftmost and rightmost pixel of every (component, row)
    key = lab.astype(np.int64) * h + rr
    order = np.argsort(key, kind="stable")
    key_s, cc_s = key[order], cc[order]
    starts = np.flatnonzero(np.r_[True, key_s[1:] != key_s[:-1]])
    ends = np.r_[starts[1:], key_s.size] - 1
    seg_lab = key_s[starts] // h
    seg_row = key_s[starts] % h
    lefts, rights = cc_s[starts], cc_s[ends]
    bounds = np.r_[0, np.cumsum(np.bincount(seg_lab, minlength=n + 1))]
    xc, yc = spec.xs(), spec.ys()
    for i in range(1, n + 1):
        sl = slice(bounds[i], bounds[i + 1])
        pr = np.r_[seg_row[sl], seg_row[sl]]
        pc = np.r_[lefts[sl], rights[sl]]
        diam = diameter_of_points(np.column_stack([xc[pc], yc[pr]]))
        border = bool(rmin[i] == 0 or cmin[i] == 0 or rmax[i] == h - 1 or cmax[i] == w - 1)
        records.append(ComponentRecord(i, int(counts[i]), border,
                                       (int(rmin[i]), int(cmin[i]), int(rmax[i]), int(cmax[i])),
                                       float(diam)))
    lm = LabelledMask(mask, labels, records, classes)
    if trace_loops:
        for rec in records:
            if rec.bounded:
                rec.boundary_loop = trace_boundary(rec, lm)
    return lm


def _component_window(rec: ComponentRecord, labels: np.ndarray):
    r0, c0, r1, c1 = rec.bbox
    return labels[r0:r1 + 1, c0:c1 + 1] == rec.id, r0, c0


def trace_boundary(rec: ComponentRecord, labelled: LabelledMask) -> list[tuple[float, float]]:
    """Outer boundary of a bounded component as a counter-clockwise plane polygon."""
    if rec.touches_border:
        raise BorderComponent(f"component {rec.id} touches the grid border")
    comp, r0, c0 = _component_window(rec, labelled.labels)
    loop = trace_pixel_loop(comp)
    spec = labelled.mask.spec
    xs, ys = spec.to_plane([c + c0 for c, _ in loop], [r + r0 for _, r in loop])
    # the walk is clockwise on screen and in the plane; reverse for counter-clockwise
    return [(float(x), float(y)) for x, y in zip(xs[::-1], ys[::-1])]


def collar_check(rec: ComponentRecord, labelled: LabelledMask) -> dict:
    """Classes of the pixels just outside the outer loop of a bounded component."""
    if rec.touches_border:
        raise BorderComponent(f"component {rec.id} touches the grid border")
    comp, r0, c0 = _component_window(rec, labelled.labels)
    loop = trace_pixel_loop(comp)
    loop = [(x + c0, y + r0) for x, y in loop]
    pix = collar_pixels(loop, labelled.labels.shape)
    cls = np.array([labelled.mask.classes[r, c] for r, c in pix], dtype=np.int8)
    tally = {c.name: int(np.sum(cls == c)) for c in OutcomeClass}
    in_complement = int(np.isin(cls, [int(c) for c in labelled.complement_classes]).sum())
    return {"component": rec.id, "collar_pixels": len(pix), "classes": tally,
            "complement_in_collar": in_complement, "ok": in_complement == 0}


# ----------------------------------------------------------------------------
# reports


def _bbox_plane(rec: ComponentRecord, spec: GridSpec):
    r0, c0, r1, c1 = rec.bbox
    x0, y1 = spec.to_plane(c0, r0)
    x1, y0 = spec.to_plane(c1 + 1, r1 + 1)
    return float(x0), float(x1), float(y0), float(y1)


def diameter_bound_check(labelled: LabelledMask, rect0: RectR, bound: float = 12.0) -> Report:
    """Bounded components whose pixel extent misses the open rectangle ``rect0`` have diameter < bound."""
    spec = labelled.mask.spec
    checked, excluded_rect, excluded_border, failures = 0, 0, 0, []
    for rec in labelled.components:
        if rec.touches_border:
            excluded_border += 1
            continue
        x0, x1, y0, y1 = _bbox_plane(rec, spec)
        meets = (x0 < rect0.half_width and x1 > -rect0.half_width
                 and y0 < rect0.half_height and y1 > -rect0.half_height)
        if meets:
            excluded_rect += 1
            continue
        checked += 1
        if not rec.diameter < bound:
            failures.append(rec.as_dict())
    return Report("diameter_bound", not failures,
                  {"bound": bound, "rect0": rect0.as_dict(), "checked": checked,
                   "excluded_meets_rect0": excluded_rect, "excluded_border": excluded_border},
                  failures)


def spiders_web_evidence(mask: RegionMask, complement_classes=None,
                         labelled: LabelledMask | None = None) -> Report:
    """Summary of bounded complement components in a mask."""
    if labelled is None:
        labelled = label_components(mask, complement_classes, trace_loops=False)
    bounded = labelled.bounded()
    largest = max(bounded, key=lambda r: (r.diameter, -r.id), default=None)
    total = mask.classes.size
    details = {
        "components": len(labelled.components),
        "bounded_components": len(bounded),
        "largest_bounded_diameter": largest.diameter if largest else 0.0,
        "largest_bounded_id": largest.id if largest else None,
        "range_exceeded_fraction": float(np.mean(mask.classes == OutcomeClass.RANGE_EXCEEDED)),
        "budget_exhausted_fraction": float(np.mean(mask.classes == OutcomeClass.BUDGET_EXHAUSTED)),
        "complement_pixels": int(sum(r.pixel_count for r in labelled.components)),
        "pixels": int(total),
        "complement_classes": sorted(c.name for c in labelled.complement_classes),
    }
    notes = [] if bounded else ["no evidence: no bounded complement component in the window"]
    return Report("spiders_web_evidence", bool(bounded), details, [], notes)
