"""Photometric augmentation: Gaussian noise, then exposure scaling.

Half of a training batch (by default) gets zero-mean noise with sigma 15
gray levels followed by a brightness factor 2**lambda with lambda drawn
uniformly from [-0.2, 0.2]. Every random draw is keyed by (seed, tile
index), so results never depend on batch order or parallelism.
"""

import numpy as np

from tilebin import AugmentParams, add_gaussian_noise, adjust_exposure, augment_tile

rng = np.random.default_rng(0)
tile = np.full((256, 256), 128, np.uint8)

noised = add_gaussian_noise(tile, 15.0, np.random.default_rng(1))
print(f"noise only:     mean {noised.mean():7.2f}  std {noised.std():5.2f}")

for lam in (-0.2, 0.0, 0.2):
    exposed = adjust_exposure(tile, lam)
    print(f"exposure {lam:+.1f}:  128 -> {exposed[0, 0]}")

params = AugmentParams(seed=42)
batch = [rng.integers(0, 256, (64, 64), dtype=np.uint8) for _ in range(1000)]
records = [augment_tile(t, i, params)[1] for i, t in enumerate(batch)]
applied = [r for r in records if r.applied]
lams = [r.lam for r in applied]
print(f"\nbatch of {len(batch)}: {len(applied)} augmented "
      f"(lambda range {min(lams):+.3f} .. {max(lams):+.3f})")

again = [augment_tile(t, i, params)[1] for i, t in enumerate(batch)]
print("reproducible:", all(a == b for a, b in zip(records, again)))
