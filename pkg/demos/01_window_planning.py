"""Overlapping-window planning and zero-padded cropping.

High-resolution inspection images are decomposed into fixed-size square
windows laid out on a stride lattice. The stride is floor(window * 0.9) at
the default 10% overlap, so neighboring windows always share at least a
tenth of their width, and windows on the far edges extend past the image
and get zero-padded when cropped.
"""

import numpy as np

from tilebin import crop_tile, plan_tiles, unpad_region

for width, height in [(2048, 2048), (1400, 1900), (2448, 2048), (1000, 800)]:
    plan = plan_tiles(width, height, window=1024, overlap_fraction=0.10)
    rows, cols = plan.grid_shape
    print(f"{width}x{height}: stride {plan.stride}, grid {rows}x{cols}, "
          f"{len(plan.tiles)} tiles")
    for t in plan.tiles[:3]:
        vw, vh = unpad_region(t, plan)
        print(f"  tile r{t.row_index}c{t.col_index} at ({t.x0}, {t.y0}), "
              f"valid {vw}x{vh} of {plan.window}")

print()
print("cropping pads past the edge with zeros:")
image = np.full((1000, 800), 50, np.uint8)
plan = plan_tiles(800, 1000, window=1024)
tile = crop_tile(image, plan.tiles[0], plan.window)
print(f"  tile shape {tile.shape}; image area mean {tile[:1000, :800].mean():.1f}, "
      f"padded area max {tile[:, 800:].max()}")
