"""Per-tile scoring and full-resolution map merging.

The statistical scorer learns a robust per-pixel location/scale model
(median and scaled MAD) per grid position from normal training tiles.
Tile score maps are then placed back into image coordinates, averaging
where windows overlap and ignoring zero-padded window areas.
"""

import numpy as np

from tilebin import crop_tile, fit_stat_scorer, merge_maps, plan_tiles, score_tile
from tilebin.geometry import manifest_records

WINDOW = 64
W, H = 150, 120

plan = plan_tiles(W, H, WINDOW, 0.10)
records = manifest_records("demo", plan)
print(f"{W}x{H} image, window {WINDOW}: {len(plan.tiles)} tiles")

normal = np.full((H, W), 100, np.uint8)
training = []
for rec in records:
    training.append((crop_tile(normal, rec.rect, WINDOW), (rec.row_index, rec.col_index)))
scorer = fit_stat_scorer(training, model_resolution=WINDOW)

defective = normal.copy()
defective[40:48, 90:102] = 205  # planted defect

tile_maps = []
for rec in records:
    tile = crop_tile(defective, rec.rect, WINDOW)
    tile_maps.append((rec.rect, score_tile(scorer, tile, rec)))

merged = merge_maps(tile_maps, plan)
print(f"merged map {merged.shape[1]}x{merged.shape[0]}: "
      f"background score {merged[0, 0]:.3g}, defect score {merged[44, 95]:.3g}")
hot = merged > merged.mean() + 3 * merged.std()
ys, xs = np.nonzero(hot)
print(f"hot region rows {ys.min()}..{ys.max()}, cols {xs.min()}..{xs.max()} "
      f"({hot.sum()} px, planted 96 px)")
