import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays
from scipy import ndimage

from escweb import Family, OutcomeClass
from escweb.components import (BorderComponent, collar_check, convex_hull, diameter_bound_check,
                               diameter_of_points, label_array, label_components,
                               spiders_web_evidence, trace_boundary, trace_pixel_loop,
                               winding_number)
from escweb.geometry import RectR
from escweb.raster import GridSpec, RegionMask

from _oracles import brute_diameter, flood_labels

V, M = int(OutcomeClass.VIOLATED), int(OutcomeClass.MEMBER)
bool_grids = arrays(np.bool_, st.tuples(st.integers(1, 14), st.integers(1, 14)))


def make_mask(classes, window=None):
    classes = np.asarray(classes, np.int8)
    h, w = classes.shape
    window = window or (0.0, float(w), 0.0, float(h))
    z = np.zeros(classes.shape)
    return RegionMask(GridSpec(window, w, h), classes, z.astype(np.int32), z.astype(np.int8))


def from_selected(sel):
    return make_mask(np.where(sel, V, M))


def signed_area(poly):
    p = np.asarray(poly)
    return 0.5 * np.sum(p[:-1, 0] * p[1:, 1] - p[1:, 0] * p[:-1, 1])


# ----------------------------------------------------------------------------
# labelling

@settings(max_examples=150, deadline=None)
@given(sel=bool_grids)
def test_labels_match_flood_fill_exactly(sel):
    labels, n = label_array(sel)
    ref, nref = flood_labels(sel)
    assert n == nref and np.array_equal(labels, ref)


@settings(max_examples=150, deadline=None)
@given(sel=bool_grids)
def test_labels_match_scipy_partition(sel):
    labels, n = label_array(sel)
    ref, nref = ndimage.label(sel)  # default structure is 4-connected
    assert n == nref
    # same partition: a bijection between label sets
    pairs = set(zip(labels[sel].tolist(), ref[sel].tolist()))
    assert len(pairs) == n


@settings(max_examples=100, deadline=None)
@given(sel=bool_grids)
def test_partition_and_idempotence(sel):
    mask = from_selected(sel)
    a = label_components(mask)
    b = label_components(mask)
    assert sum(r.pixel_count for r in a.components) == int(sel.sum())
    assert [r.as_dict(with_loop=True) for r in a.components] == \
        [r.as_dict(with_loop=True) for r in b.components]
    h, w = sel.shape
    for r in a.components:
        pix = a.labels == r.id
        rows, cols = np.nonzero(pix)
        border = rows.min() == 0 or cols.min() == 0 or rows.max() == h - 1 or cols.max() == w - 1
        assert r.touches_border == bool(border)
        assert r.bbox == (rows.min(), cols.min(), rows.max(), cols.max())


def test_uniform_member_mask_is_empty():
    lm = label_components(make_mask(np.full((5, 5), M)))
    assert lm.components == []


def test_single_interior_pixel():
    cls = np.full((3, 3), M)
    cls[1, 1] = V
    lm = label_components(make_mask(cls))
    (rec,) = lm.components
    assert rec.pixel_count == 1 and not rec.touches_border and rec.diameter == 0
    loop = rec.boundary_loop
    assert len(loop) == 5 and loop[0] == loop[-1]
    assert sorted(set(loop)) == [(1.0, 1.0), (1.0, 2.0), (2.0, 1.0), (2.0, 2.0)]
    assert signed_area(loop) == pytest.approx(1.0)  # counter-clockwise, unit area


def test_diagonal_pixels_are_separate():
    cls = np.full((4, 4), M)
    cls[1, 1] = cls[2, 2] = V
    assert len(label_components(make_mask(cls)).components) == 2


def test_complement_classes_selection():
    cls = np.array([[M, M, M], [M, 2, M], [M, M, M]])
    assert label_components(make_mask(cls)).components == []
    lm = label_components(make_mask(cls), {"BUDGET_EXHAUSTED"})
    assert len(lm.components) == 1
    with pytest.raises(ValueError):
        label_components(make_mask(cls), set())


# ----------------------------------------------------------------------------
# diameter

@settings(max_examples=150, deadline=None)
@given(pts=arrays(np.float64, st.tuples(st.integers(1, 40), st.just(2)),
                  elements=st.floats(-100, 100, allow_nan=False)))
def test_hull_diameter_matches_pairwise(pts):
    assert diameter_of_points(pts) == pytest.approx(brute_diameter(pts), rel=1e-9, abs=1e-9)
    hull = convex_hull(pts)
    assert len(hull) <= len(pts)


def test_diameter_with_parallel_hull_edges():
    # a parallelogram hull whose caliper areas tie up to rounding
    sx, sy = 1.0752605014640797, 1.5
    pix = [(1, 1), (0, 2), (1, 2), (0, 3), (1, 3), (0, 4)]
    pts = np.array([((c + 0.5) * sx, (4.5 - r) * sy) for c, r in pix])
    assert diameter_of_points(pts) == pytest.approx(math.hypot(sx, 3 * sy), rel=1e-12)


@settings(max_examples=200, deadline=None)
@given(ij=arrays(np.int64, st.tuples(st.integers(1, 30), st.just(2)), elements=st.integers(0, 6)),
       sx=st.floats(0.1, 3), sy=st.floats(0.1, 3))
def test_hull_diameter_on_lattices(ij, sx, sy):
    pts = ij * np.array([sx, sy])
    assert diameter_of_points(pts) == pytest.approx(brute_diameter(pts), rel=1e-9, abs=1e-12)


@settings(max_examples=80, deadline=None)
@given(sel=bool_grids, sx=st.floats(0.1, 3), sy=st.floats(0.1, 3))
def test_component_diameter_matches_all_pixel_pairs(sel, sx, sy):
    h, w = sel.shape
    mask = make_mask(np.where(sel, V, M), (0.0, w * sx, 0.0, h * sy))
    lm = label_components(mask, trace_loops=False)
    xs, ys = mask.spec.xs(), mask.spec.ys()
    for r in lm.components:
        rows, cols = np.nonzero(lm.labels == r.id)
        ref = brute_diameter(np.column_stack([xs[cols], ys[rows]]))
        assert r.diameter == pytest.approx(ref, rel=1e-9, abs=1e-12)
        r0, c0, r1, c1 = r.bbox
        bw, bh = (c1 - c0) * sx, (r1 - r0) * sy
        assert r.diameter <= math.hypot(bw, bh) + 1e-9
        assert r.diameter >= max(bw, bh) - max(sx, sy) - 1e-9


# ----------------------------------------------------------------------------
# loops

@settings(max_examples=100, deadline=None)
@given(sel=arrays(np.bool_, st.tuples(st.integers(3, 14), st.integers(3, 14))))
def test_loops_close_enclose_and_have_clean_collars(sel):
    sel = sel.copy()
    sel[0, :] = sel[-1, :] = sel[:, 0] = sel[:, -1] = False
    mask = from_selected(sel)
    lm = label_components(mask)
    for rec in lm.components:
        loop = rec.boundary_loop
        assert loop[0] == loop[-1]
        assert signed_area(loop) > 0
        rows, cols = np.nonzero(lm.labels == rec.id)
        for r, c in zip(rows, cols):
            x, y = mask.spec.xs()[c], mask.spec.ys()[r]
            assert winding_number(np.array(loop), (x, y)) == 1
        assert collar_check(rec, lm)["ok"]


def test_trace_pixel_loop_of_l_shape():
    comp = np.array([[1, 0], [1, 1]], bool)
    loop = trace_pixel_loop(comp)
    assert loop[0] == loop[-1] and len(loop) == 7  # six corners plus closure


def test_border_component_rejected():
    cls = np.full((3, 3), M)
    cls[0, 1] = V
    lm = label_components(make_mask(cls))
    (rec,) = lm.components
    assert rec.touches_border and rec.boundary_loop is None
    with pytest.raises(BorderComponent):
        trace_boundary(rec, lm)
    with pytest.raises(BorderComponent):
        collar_check(rec, lm)


# ----------------------------------------------------------------------------
# reports

def test_diameter_check_scope():
    # 40 x 40 grid over [-20, 20]^2; rect0 with m = 1 is |x| < 1, |y| < 2 pi
    cls = np.full((40, 40), M)
    cls[18:22, 19:21] = V           # meets rect0
    cls[2:5, 2:20] = V              # bar away from rect0, diameter > 12
    cls[0, 30:33] = V               # touches the border
    mask = make_mask(cls, (-20.0, 20.0, -20.0, 20.0))
    lm = label_components(mask)
    rep = diameter_bound_check(lm, RectR(1, 0, Family.FATOU))
    d = rep.details
    assert (d["checked"], d["excluded_meets_rect0"], d["excluded_border"]) == (1, 1, 1)
    assert not rep.passed and rep.failures[0]["diameter"] == pytest.approx(math.hypot(17, 2))
    cls[2:5, 2:20] = M
    cls[2:5, 2:8] = V
    assert diameter_bound_check(label_components(make_mask(cls, (-20.0, 20.0, -20.0, 20.0))),
                                RectR(1, 0, Family.FATOU)).passed


def test_evidence_on_member_mask():
    rep = spiders_web_evidence(make_mask(np.full((6, 6), M)))
    assert not rep.passed and rep.details["bounded_components"] == 0
    assert any("no evidence" in n for n in rep.notes)


def test_default_render_has_enclosed_component(fatou_mask):
    lm = label_components(fatou_mask)
    rep = spiders_web_evidence(fatou_mask, labelled=lm)
    assert rep.passed and rep.details["bounded_components"] >= 1
    largest = max(lm.bounded(), key=lambda r: r.diameter)
    assert largest.diameter > 1
    poly = np.array(trace_boundary(largest, lm))
    rows, cols = np.nonzero(lm.labels == largest.id)
    pick = np.random.default_rng(0).choice(rows.size, size=min(300, rows.size), replace=False)
    xs, ys = fatou_mask.spec.xs(), fatou_mask.spec.ys()
    for i in pick:
        assert winding_number(poly, (xs[cols[i]], ys[rows[i]])) == 1
    assert collar_check(largest, lm)["ok"]


def test_bergweiler_render_evidence(bergweiler_mask):
    assert spiders_web_evidence(bergweiler_mask).details["bounded_components"] >= 1
