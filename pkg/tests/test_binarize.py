import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tilebin import (
    InvalidArgumentError,
    MebinConfig,
    coarse_mask,
    combine_or,
    connected_components,
    mebin_threshold,
    threshold_mean3std,
)

from oracles import flood_fill_label


# --- mean + 3 std ------------------------------------------------------------


def test_mean3std_constant_map_is_empty():
    mask, t = threshold_mean3std(np.full((32, 32), 4.2))
    assert t == pytest.approx(4.2)
    assert not mask.any()


def test_mean3std_gaussian_tail_fraction():
    rng = np.random.default_rng(123)
    values = rng.standard_normal((1000, 1000))
    mask, _ = threshold_mean3std(values)
    fraction = mask.mean()
    assert abs(fraction - 0.00135) < 0.0005


def test_mean3std_single_spike():
    values = np.zeros((100, 100))
    values[3, 7] = 1000.0
    mask, t = threshold_mean3std(values)
    # mean = 0.1, std = sqrt(100 - 0.01), t ~ 30.1
    assert t == pytest.approx(0.1 + 3 * np.sqrt(99.99))
    assert mask.sum() == 1 and mask[3, 7]


def test_mean3std_affine_covariance():
    rng = np.random.default_rng(5)
    values = rng.standard_normal((64, 64))
    mask, t = threshold_mean3std(values)
    mask2, t2 = threshold_mean3std(3.5 * values + 11.0)
    assert np.array_equal(mask, mask2)
    assert t2 == pytest.approx(3.5 * t + 11.0)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**16), t_lo=st.floats(-1, 1), t_hi=st.floats(-1, 1))
def test_strict_threshold_monotone(seed, t_lo, t_hi):
    # binarization with a strictly-greater rule is antitone in the threshold
    lo, hi = sorted((t_lo, t_hi))
    values = np.random.default_rng(seed).uniform(-2, 2, (16, 16))
    assert not ((values > hi) & ~(values > lo)).any()


# --- adaptive (stable component count) rule -----------------------------------


def test_mebin_zero_map_yields_nothing():
    mask, threshold = mebin_threshold(np.zeros((32, 32)))
    assert threshold is None
    assert not mask.any()


def test_mebin_recovers_planted_blobs():
    rng = np.random.default_rng(11)
    values = rng.uniform(0.0, 0.1, (64, 64))
    values[5:15, 5:15] = 0.9
    values[30:40, 30:40] = 0.9
    values[50:60, 5:15] = 0.9
    mask, threshold = mebin_threshold(values)
    assert threshold is not None
    _, count, stats = connected_components(mask, 8)
    assert count == 3
    assert all(s.area >= 64 for s in stats)


def test_mebin_count_sweep_against_brute_force():
    # c(tau) computed level by level must match a literal per-tau recount
    rng = np.random.default_rng(3)
    values = rng.uniform(0.0, 0.1, (48, 48))
    values[4:12, 4:12] = 0.9
    values[20:30, 33:43] = 0.85
    cfg = MebinConfig(levels=64)
    vmin, vmax = values.min(), values.max()
    norm = np.floor((values - vmin) * ((cfg.levels - 1) / (vmax - vmin)) + 0.5).astype(int)

    def count_at(tau):
        _, n, stats = connected_components(norm > tau, cfg.connectivity)
        return sum(1 for s in stats if s.area >= cfg.min_area)

    brute = np.array([count_at(t) for t in range(cfg.levels)])
    # longest stable nonzero run, tie to larger tau, pick the upper end
    best = None
    i = 0
    while i < cfg.levels:
        j = i
        while j + 1 < cfg.levels and brute[j + 1] == brute[i]:
            j += 1
        if brute[i] >= 1 and (best is None or j - i + 1 >= best[0]):
            best = (j - i + 1, i, j)
        i = j + 1
    expected_tau = best[2]
    expected_threshold = vmin + expected_tau * (vmax - vmin) / (cfg.levels - 1)

    mask, threshold = mebin_threshold(values, cfg)
    assert threshold == pytest.approx(expected_threshold)
    assert np.array_equal(mask, norm > expected_tau)


def test_mebin_min_area_filters_small_blob():
    values = np.zeros((32, 32))
    values[10, 10:13] = 0.9  # 3 pixels < min_area 5
    mask, threshold = mebin_threshold(values, MebinConfig(min_area=5))
    assert threshold is None
    assert not mask.any()


def test_mebin_scale_invariance():
    rng = np.random.default_rng(21)
    values = rng.uniform(0.0, 0.2, (48, 48))
    values[10:20, 10:20] = 1.0
    cfg = MebinConfig()
    mask_a, _ = mebin_threshold(values, cfg)
    mask_b, _ = mebin_threshold(7.25 * values + 3.0, cfg)
    assert np.array_equal(mask_a, mask_b)
    assert mask_a.any()


def test_mebin_midpoint_pick_is_looser_or_equal():
    rng = np.random.default_rng(8)
    values = rng.uniform(0.0, 0.1, (48, 48))
    values[8:20, 8:20] = 0.9
    upper, t_upper = mebin_threshold(values, MebinConfig(pick="upper_end"))
    mid, t_mid = mebin_threshold(values, MebinConfig(pick="midpoint"))
    assert t_mid <= t_upper
    assert not (upper & ~mid).any()  # lower threshold keeps at least as much


# --- OR fusion ---------------------------------------------------------------


def test_or_with_empty_is_identity():
    rng = np.random.default_rng(2)
    b = rng.random((16, 16)) > 0.5
    assert np.array_equal(combine_or(np.zeros_like(b), b), b)


def test_or_idempotent():
    rng = np.random.default_rng(3)
    a = rng.random((16, 16)) > 0.5
    assert np.array_equal(combine_or(a, a), a)


def test_or_superset_of_both():
    rng = np.random.default_rng(4)
    a = rng.random((64, 64)) > 0.5
    b = rng.random((64, 64)) > 0.5
    out = combine_or(a, b)
    assert out.sum() >= max(a.sum(), b.sum())
    assert not (a & ~out).any() and not (b & ~out).any()


def test_or_rejects_shape_mismatch():
    with pytest.raises(InvalidArgumentError):
        combine_or(np.zeros((4, 4), bool), np.zeros((4, 5), bool))


def test_coarse_mask_constant_map_empty():
    fused, stat_t, adaptive_t = coarse_mask(np.full((16, 16), 3.0))
    assert not fused.any()
    assert adaptive_t is None


def test_coarse_mask_contains_both_branches():
    rng = np.random.default_rng(9)
    values = rng.uniform(0, 0.1, (48, 48))
    values[5:15, 5:15] = 1.0
    fused, _, _ = coarse_mask(values)
    stat_mask, _ = threshold_mean3std(values)
    adaptive_mask, _ = mebin_threshold(values)
    assert not (stat_mask & ~fused).any()
    assert not (adaptive_mask & ~fused).any()


# --- connected components ----------------------------------------------------


def test_components_empty_mask():
    labels, count, stats = connected_components(np.zeros((8, 8), bool), 8)
    assert count == 0 and stats == [] and not labels.any()


def test_components_diagonal_pixels():
    mask = np.zeros((4, 4), bool)
    mask[1, 1] = mask[2, 2] = True
    assert connected_components(mask, 8)[1] == 1
    assert connected_components(mask, 4)[1] == 2


def test_components_first_encounter_order_and_boxes():
    mask = np.zeros((6, 8), bool)
    mask[4:6, 0:2] = True   # encountered second
    mask[0, 5] = True       # encountered first
    labels, count, stats = connected_components(mask, 8)
    assert count == 2
    assert labels[0, 5] == 1 and labels[4, 0] == 2
    assert (stats[0].x_min, stats[0].y_min, stats[0].x_max, stats[0].y_max) == (5, 0, 5, 0)
    assert (stats[1].x_min, stats[1].y_min, stats[1].x_max, stats[1].y_max) == (0, 4, 1, 5)
    assert stats[0].area == 1 and stats[1].area == 4


@settings(max_examples=120, deadline=None)
@given(seed=st.integers(0, 2**32), connectivity=st.sampled_from([4, 8]),
       density=st.floats(0.1, 0.9))
def test_components_match_flood_fill(seed, connectivity, density):
    mask = np.random.default_rng(seed).random((12, 12)) < density
    labels, count, stats = connected_components(mask, connectivity)
    ref_labels, ref_count = flood_fill_label(mask, connectivity)
    assert count == ref_count
    assert np.array_equal(labels, ref_labels)  # identical, not merely isomorphic
    areas = np.bincount(labels.ravel(), minlength=count + 1)
    assert all(s.area == areas[s.label] for s in stats)
    for s in stats:
        ys, xs = np.nonzero(labels == s.label)
        assert (xs.min(), ys.min(), xs.max(), ys.max()) == (s.x_min, s.y_min, s.x_max, s.y_max)
