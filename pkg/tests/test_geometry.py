import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from anyref.geometry import (
    BinaryMask,
    Box,
    Dims,
    FreeForm,
    InvalidPolygonError,
    NormBox,
    NormPoint,
    OutOfBoundsError,
    Point,
    UndefinedIoUError,
    denormalize_shape,
    iou,
    is_simple_polygon,
    normalize_shape,
    raster_scan_order,
    rasterize_polygon,
)

from oracles import box_mask_oracle, iou_oracle

DIMS_GRID = [Dims(1, 1), Dims(3, 7), Dims(999, 1001), Dims(1024, 768), Dims(4096, 4096), Dims(1000, 1000), Dims(17, 4093)]


# -- normalize / denormalize ----------------------------------------------------


def test_normalize_unit_scale():
    assert normalize_shape(Point(100, 50), Dims(1000, 1000)) == NormPoint(100, 50)


def test_normalize_origin():
    assert normalize_shape(Point(0, 0), Dims(37, 5)) == NormPoint(0, 0)


def test_normalize_near_far_edge():
    # floor(1999.9 * 1000 / 2000) = floor(999.95) = 999
    assert normalize_shape(Point(1999.9, 0), Dims(2000, 100)) == NormPoint(999, 0)


def test_normalize_box_far_edge_clamps():
    assert normalize_shape(Box(0, 0, 2000, 100), Dims(2000, 100)) == NormBox(0, 0, 999, 999)


def test_normalize_freeform_uses_bounding_box():
    poly = FreeForm(((10, 20), (50, 25), (30, 80)))
    assert normalize_shape(poly, Dims(100, 100)) == NormBox(100, 200, 500, 800)


@pytest.mark.parametrize("shape", [Point(-1, 0), Point(100, 5), Box(0, 0, 101, 10)])
def test_normalize_out_of_bounds(shape):
    with pytest.raises(OutOfBoundsError):
        normalize_shape(shape, Dims(100, 100))


def test_denormalize_cell_centres():
    assert denormalize_shape(NormPoint(0, 0), Dims(1000, 1000)) == Point(0.5, 0.5)
    assert denormalize_shape(NormBox(0, 0, 999, 999), Dims(1000, 1000)) == Box(0.5, 0.5, 999.5, 999.5)


@pytest.mark.parametrize("dims", DIMS_GRID)
def test_round_trip_every_coordinate(dims):
    for v in range(1000):
        p = NormPoint(v, 999 - v)
        assert normalize_shape(denormalize_shape(p, dims), dims) == p


def test_round_trip_sampled_shapes():
    rng = np.random.default_rng(0)
    for _ in range(4000):
        dims = DIMS_GRID[rng.integers(len(DIMS_GRID))]
        if rng.random() < 0.5:
            n = NormPoint(*map(int, rng.integers(0, 1000, 2)))
        else:
            xs = sorted(map(int, rng.integers(0, 1000, 2)))
            ys = sorted(map(int, rng.integers(0, 1000, 2)))
            n = NormBox(xs[0], ys[0], xs[1], ys[1])
        assert normalize_shape(denormalize_shape(n, dims), dims) == n


@settings(max_examples=300)
@given(st.integers(1, 5000), st.integers(1, 5000), st.floats(0, 1, exclude_max=True), st.floats(0, 1, exclude_max=True))
def test_normalize_in_range(w, h, fx, fy):
    dims = Dims(w, h)
    n = normalize_shape(Point(fx * w, fy * h), dims)
    assert 0 <= n.x <= 999 and 0 <= n.y <= 999
    back = denormalize_shape(n, dims)
    assert abs(back.x - fx * w) <= w / 1000 + 0.5


def test_normalize_fuzz_10k():
    rng = np.random.default_rng(1)
    for _ in range(10_000):
        w, h = map(int, rng.integers(1, 4097, 2))
        x, y = rng.random() * w, rng.random() * h
        n = normalize_shape(Point(min(x, math.nextafter(w, 0)), min(y, math.nextafter(h, 0))), Dims(w, h))
        assert 0 <= n.x <= 999 and 0 <= n.y <= 999


def test_norm_coords_validated():
    with pytest.raises(ValueError):
        NormPoint(1000, 0)
    with pytest.raises(ValueError):
        NormBox(5, 0, 4, 0)


# -- IoU -------------------------------------------------------------------------


def test_iou_examples():
    a = Box(0, 0, 10, 10)
    assert iou(a, a) == 1.0
    assert iou(a, Box(20, 20, 30, 30)) == 0.0
    # inter 50, union 150
    assert iou(a, Box(5, 0, 15, 10)) == pytest.approx(1 / 3, abs=1e-9)


def test_iou_zero_area_pair_is_an_error():
    with pytest.raises(UndefinedIoUError):
        iou(Box(1, 1, 1, 1), Box(2, 2, 2, 5))


def test_iou_zero_area_against_real_box():
    assert iou(Box(1, 1, 1, 1), Box(0, 0, 4, 4)) == 0.0


boxes = st.tuples(st.floats(0, 100), st.floats(0, 100), st.floats(0, 100), st.floats(0, 100)).map(
    lambda t: Box(min(t[0], t[2]), min(t[1], t[3]), max(t[0], t[2]), max(t[1], t[3]))
)


@given(boxes, boxes)
def test_iou_properties(a, b):
    if a.area == 0 and b.area == 0:
        return
    v = iou(a, b)
    assert 0 <= v <= 1
    assert v == iou(b, a)
    assert v == pytest.approx(iou_oracle(a.as_list(), b.as_list()), abs=1e-12)
    if a.area > 0:
        assert iou(a, a) == 1.0


# -- rasterization ---------------------------------------------------------------


def test_rasterize_square():
    m = rasterize_polygon([(0, 0), (4, 0), (4, 4), (0, 4)], Dims(8, 8))
    assert m.count == 16
    assert np.array_equal(m.bits, box_mask_oracle(0, 0, 4, 4, 8, 8))


def test_rasterize_degenerate_triangle():
    m = rasterize_polygon([(0.1, 0.1), (0.4, 0.1), (0.1, 0.4)], Dims(8, 8))
    assert m.count == 0 and m.degenerate


def test_rasterize_full_canvas():
    m = rasterize_polygon([(0, 0), (8, 0), (8, 6), (0, 6)], Dims(8, 6))
    assert m.bits.all() and m.count == 48


def test_rasterize_too_few_vertices():
    with pytest.raises(InvalidPolygonError):
        rasterize_polygon([(0, 0), (1, 1)], Dims(4, 4))


def test_rasterize_concave_even_odd():
    # U shape: the notch (columns 2..3, rows 0..2) stays empty
    poly = [(0, 0), (2, 0), (2, 3), (4, 3), (4, 0), (6, 0), (6, 5), (0, 5)]
    m = rasterize_polygon(poly, Dims(6, 5))
    assert not m.bits[0:3, 2:4].any()
    assert m.count == 30 - 6


@settings(max_examples=200)
@given(st.integers(1, 64), st.integers(1, 64), st.data())
def test_rasterize_box_matches_oracle(w, h, data):
    x0 = data.draw(st.floats(0, w))
    x1 = data.draw(st.floats(x0, w))
    y0 = data.draw(st.floats(0, h))
    y1 = data.draw(st.floats(y0, h))
    m = rasterize_polygon([(x0, y0), (x1, y0), (x1, y1), (x0, y1)], Dims(w, h))
    assert np.array_equal(m.bits, box_mask_oracle(x0, y0, x1, y1, w, h))


def test_simple_polygon_checks():
    assert is_simple_polygon([(0, 0), (4, 0), (4, 4), (0, 4)])
    assert not is_simple_polygon([(0, 0), (4, 4), (4, 0), (0, 4)])  # bow tie
    assert not is_simple_polygon([(0, 0), (4, 0), (2, 0)])  # folds back on itself
    with pytest.raises(InvalidPolygonError):
        FreeForm(((0, 0), (4, 4), (4, 0), (0, 4)))


def test_binary_mask_flags():
    m = BinaryMask(Dims(2, 2), np.zeros((2, 2), dtype=bool))
    assert m.degenerate and m.count == 0


# -- raster order ---------------------------------------------------------------


def test_raster_scan_example():
    bs = [Box(10, 10, 20, 20), Box(100, 5, 110, 15), Box(40, 10, 50, 20)]
    assert raster_scan_order(bs) == [1, 0, 2]


def test_raster_scan_singleton_and_ties():
    assert raster_scan_order([Box(1, 2, 3, 4)]) == [0]
    assert raster_scan_order([Box(1, 2, 3, 4), Box(1, 2, 3, 4)]) == [0, 1]


@given(st.lists(boxes, max_size=30))
def test_raster_scan_is_sorted_permutation(bs):
    order = raster_scan_order(bs)
    assert sorted(order) == list(range(len(bs)))
    keys = [(bs[i].y_min, bs[i].x_min, bs[i].x_max, bs[i].y_max, i) for i in order]
    assert keys == sorted(keys)
