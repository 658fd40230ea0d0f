import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from tilebin import (
    InvalidArgumentError,
    TileRect,
    crop_tile,
    manifest_records,
    plan_tiles,
    read_tile_manifest,
    tile_key,
    unpad_region,
    write_tile_manifest,
)
from tilebin.geometry import plan_from_records

from oracles import coverage_canvas


def test_default_plan_2048():
    plan = plan_tiles(2048, 2048, 1024, 0.10)
    assert plan.stride == 921
    assert sorted({t.x0 for t in plan.tiles}) == [0, 921, 1842]
    assert sorted({t.y0 for t in plan.tiles}) == [0, 921, 1842]
    assert len(plan.tiles) == 9
    assert (coverage_canvas(plan) >= 1).all()


def test_row_major_order():
    plan = plan_tiles(2048, 2048, 1024, 0.10)
    positions = [(t.row_index, t.col_index) for t in plan.tiles]
    assert positions == [(r, c) for r in range(3) for c in range(3)]
    for t in plan.tiles:
        assert t.x0 == t.col_index * plan.stride
        assert t.y0 == t.row_index * plan.stride


def test_small_image_single_tile():
    plan = plan_tiles(1000, 800, 1024, 0.10)
    assert len(plan.tiles) == 1
    assert plan.tiles[0] == TileRect(0, 0, 0, 0, 1024)


def test_one_pixel_wider_than_window_forces_second_column():
    plan = plan_tiles(1025, 1024, 1024, 0.10)
    assert sorted({t.x0 for t in plan.tiles}) == [0, 921]
    assert sorted({t.y0 for t in plan.tiles}) == [0]
    assert len(plan.tiles) == 2
    assert (coverage_canvas(plan) >= 1).all()


@pytest.mark.parametrize(
    "width,height,window,overlap",
    [(0, 100, 64, 0.1), (100, 0, 64, 0.1), (100, 100, 1, 0.1), (100, 100, 64, 1.0),
     (100, 100, 64, -0.1)],
)
def test_plan_rejects_bad_arguments(width, height, window, overlap):
    with pytest.raises(InvalidArgumentError):
        plan_tiles(width, height, window, overlap)


@settings(max_examples=150, deadline=None)
@given(
    width=st.integers(1, 300),
    height=st.integers(1, 300),
    window=st.integers(2, 128),
    overlap=st.floats(0.0, 0.9),
)
def test_plan_covers_every_pixel(width, height, window, overlap):
    plan = plan_tiles(width, height, window, overlap)
    assert (coverage_canvas(plan) >= 1).all()
    # determinism: identical inputs give identical tile lists
    assert plan_tiles(width, height, window, overlap) == plan


@settings(max_examples=80, deadline=None)
@given(
    width=st.integers(1, 4096),
    height=st.integers(1, 4096),
    window=st.integers(2, 2048),
    seed=st.integers(0, 2**16),
)
def test_plan_covers_sampled_pixels_at_full_ranges(width, height, window, seed):
    stride = max(1, int(window * 0.9))
    assume((width // stride + 2) * (height // stride + 2) <= 40_000)
    plan = plan_tiles(width, height, window, 0.10)
    xs = sorted({t.x0 for t in plan.tiles})
    ys = sorted({t.y0 for t in plan.tiles})
    rng = np.random.default_rng(seed)
    for _ in range(64):
        x = int(rng.integers(0, width))
        y = int(rng.integers(0, height))
        assert any(ox <= x < ox + window for ox in xs)
        assert any(oy <= y < oy + window for oy in ys)


@settings(max_examples=100, deadline=None)
@given(width=st.integers(1, 4096), height=st.integers(1, 4096))
def test_default_overlap_at_least_ten_percent(width, height):
    plan = plan_tiles(width, height, 1024, 0.10)
    assert plan.window - plan.stride >= 0.10 * plan.window
    xs = sorted({t.x0 for t in plan.tiles})
    assert xs[0] == 0
    for a, b in zip(xs, xs[1:]):
        assert b - a == plan.stride
    assert xs[-1] + plan.window >= width


def test_crop_pads_with_zeros():
    img = np.full((100, 100), 50, np.uint8)
    tile = crop_tile(img, TileRect(0, 0, 0, 0, 128), 128)
    assert tile.shape == (128, 128)
    assert (tile[:100, :100] == 50).all()
    assert (tile[100:, :] == 0).all()
    assert (tile[:, 100:] == 0).all()


def test_crop_interior_is_identity():
    rng = np.random.default_rng(7)
    img = rng.integers(0, 256, (64, 64, 3), dtype=np.uint8)
    tile = crop_tile(img, TileRect(0, 0, 8, 4, 16), 16)
    assert (tile == img[4:20, 8:24]).all()


def test_crop_rejects_rect_outside_image():
    img = np.zeros((32, 32), np.uint8)
    with pytest.raises(InvalidArgumentError):
        crop_tile(img, TileRect(0, 0, 32, 0, 16), 16)


def test_crop_roundtrip_covers_every_pixel():
    rng = np.random.default_rng(11)
    img = rng.integers(0, 256, (180, 260), dtype=np.uint8)
    plan = plan_tiles(260, 180, 64, 0.10)
    seen = np.zeros_like(img, dtype=bool)
    for rect in plan.tiles:
        tile = crop_tile(img, rect, plan.window)
        vw, vh = unpad_region(rect, plan)
        sub = img[rect.y0 : rect.y0 + vh, rect.x0 : rect.x0 + vw]
        assert (tile[:vh, :vw] == sub).all()
        assert (tile[vh:, :] == 0).all() and (tile[:, vw:] == 0).all()
        seen[rect.y0 : rect.y0 + vh, rect.x0 : rect.x0 + vw] = True
    assert seen.all()


def test_unpad_region_examples():
    plan = plan_tiles(2048, 2048, 1024, 0.10)
    assert unpad_region(plan.tile_at(0, 0), plan) == (1024, 1024)
    assert unpad_region(plan.tile_at(2, 2), plan) == (206, 206)
    single = plan_tiles(1000, 800, 1024, 0.10)
    assert unpad_region(single.tiles[0], single) == (1000, 800)


def test_unpad_rejects_foreign_rect():
    plan = plan_tiles(2048, 2048, 1024, 0.10)
    with pytest.raises(InvalidArgumentError):
        unpad_region(TileRect(5, 5, 0, 0, 1024), plan)


def test_manifest_roundtrip(tmp_path):
    plan = plan_tiles(1400, 1900, 1024, 0.10)
    records = manifest_records("img_0001", plan)
    path = tmp_path / "tiles.jsonl"
    write_tile_manifest(path, records)
    loaded = read_tile_manifest(path)
    assert loaded == records
    rebuilt = plan_from_records(loaded, 0.10)
    assert rebuilt == plan


def test_manifest_field_names(tmp_path):
    import json

    plan = plan_tiles(64, 64, 32, 0.10)
    path = tmp_path / "tiles.jsonl"
    write_tile_manifest(path, manifest_records("x", plan))
    first = json.loads(path.read_text().splitlines()[0])
    assert set(first) == {
        "image_id", "row_index", "col_index", "x0", "y0",
        "window", "image_width", "image_height",
    }


def test_tile_key_format():
    assert tile_key("part_07", 2, 11) == "part_07__r2_c11"
