import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from anyref.anyres import (
    GridConfig,
    assemble,
    default_catalog,
    resize_bilinear,
    select_grid,
    tile,
    token_count,
    within_budget,
)
from anyref.geometry import Dims

from oracles import catalog_oracle, effective_area_oracle, select_grid_oracle

S = 336
CATALOG = default_catalog(6)
GRIDS = [(g.rows, g.cols) for g in CATALOG]


def test_catalog_default():
    # 8 listed grids, 6 of them non-square, plus their transposes
    assert len(CATALOG) == 14
    assert GridConfig(2, 3) in CATALOG and GridConfig(3, 2) in CATALOG
    assert len(set(CATALOG)) == 14
    assert GRIDS == catalog_oracle(6)


def test_catalog_small():
    assert default_catalog(1) == [GridConfig(1, 1)]
    assert [(g.rows, g.cols) for g in default_catalog(4)] == [
        (1, 1), (1, 2), (1, 3), (1, 4), (2, 2), (2, 1), (3, 1), (4, 1)
    ]


@pytest.mark.parametrize("max_cells", range(1, 9))
def test_catalog_matches_filter_oracle(max_cells):
    assert [(g.rows, g.cols) for g in default_catalog(max_cells)] == catalog_oracle(max_cells)


@pytest.mark.parametrize("w,h,expected", [(336, 336, (1, 1)), (800, 600, (2, 3)), (224, 224, (1, 1)), (672, 336, (1, 2))])
def test_select_grid_examples(w, h, expected):
    assert select_grid_oracle(w, h, GRIDS, S) == expected
    g = select_grid(Dims(w, h), CATALOG, S)
    assert (g.rows, g.cols) == expected


def test_select_grid_matches_oracle_random():
    rng = np.random.default_rng(2024)
    for w, h in rng.integers(32, 4097, size=(1000, 2)):
        g = select_grid(Dims(int(w), int(h)), CATALOG, S)
        assert (g.rows, g.cols) == select_grid_oracle(int(w), int(h), GRIDS, S)


@pytest.mark.parametrize("grid", CATALOG, ids=str)
def test_exact_fit_selects_itself(grid):
    dims = Dims(grid.cols * S, grid.rows * S)
    assert select_grid(dims, CATALOG, S) == grid


@settings(max_examples=200)
@given(st.integers(32, 1500), st.integers(32, 1500), st.integers(1, 4))
def test_scale_consistency(w, h, k):
    small = select_grid(Dims(w, h), CATALOG, S)
    big = select_grid(Dims(k * w, k * h), CATALOG, S)
    eff_small = effective_area_oracle(w, h, (small.rows, small.cols), S)
    eff_big = effective_area_oracle(k * w, k * h, (big.rows, big.cols), S)
    assert eff_big >= eff_small * (1 - 1e-12)


def test_token_count():
    assert token_count(GridConfig(1, 1), 64) == 128
    assert token_count(GridConfig(2, 3), 64) == 448
    assert within_budget(GridConfig(2, 3), 64, 1280)
    assert not within_budget(GridConfig(2, 3), 576, 1280)
    with pytest.raises(ValueError):
        token_count(GridConfig(1, 1), 0)


def _random_image(rng, w, h):
    return rng.integers(0, 256, size=(h, w, 3), dtype=np.uint8)


def test_tile_identity_grid():
    img = _random_image(np.random.default_rng(0), 500, 400)
    g, patches, layout = tile(img, GridConfig(1, 1), S)
    assert len(patches) == 1
    assert np.array_equal(patches[0], g)
    assert layout.canvas == Dims(S, S) and layout.source == Dims(500, 400)


def test_tile_exact_fit_halves():
    img = _random_image(np.random.default_rng(1), 672, 336)
    grid = select_grid(Dims(672, 336), CATALOG, S)
    assert grid == GridConfig(1, 2)
    _, patches, _ = tile(img, grid, S)
    assert np.array_equal(patches[0], img[:, :336])
    assert np.array_equal(patches[1], img[:, 336:])
    assert np.array_equal(assemble(patches, grid), img)


@pytest.mark.parametrize("grid", CATALOG, ids=str)
def test_tile_uniform_colour(grid):
    img = np.empty((123, 457, 3), dtype=np.uint8)
    img[:] = (17, 200, 91)
    g, patches, _ = tile(img, grid, S)
    assert len(patches) == grid.cells
    for p in [g, *patches]:
        assert p.shape == (S, S, 3)
        assert (p == (17, 200, 91)).all()


@pytest.mark.parametrize("grid", CATALOG, ids=str)
def test_patches_reassemble_canvas(grid):
    img = _random_image(np.random.default_rng(grid.cells), 301, 211)
    _, patches, layout = tile(img, grid, 28)
    canvas = resize_bilinear(img, layout.canvas.width, layout.canvas.height)
    assert np.array_equal(assemble(patches, grid), canvas)


def test_resize_matches_half_pixel_formula():
    # 1-D ramp 0, 100 resized 2 -> 4: sources -0.25(clamped 0), 0.25, 0.75, 1.25(clamped 1)
    row = np.array([[[0.0], [100.0]]])
    out = resize_bilinear(row, 4, 1)[0, :, 0]
    assert np.allclose(out, [0, 25, 75, 100], atol=0, rtol=0)
