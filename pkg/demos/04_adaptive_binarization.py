"""Turning a continuous anomaly map into a binary mask.

Two rules run side by side and their masks are OR-ed:

* mean + 3*std of the map, a per-image statistical threshold;
* the adaptive rule, which quantizes the map, counts area-filtered
  connected components at every level, and picks a threshold from the
  longest run of levels with a stable nonzero count.

The statistical rule handles big obvious defects; the adaptive rule keeps
subtle low-score defects that sit below mean+3std.
"""

import numpy as np

from tilebin import (
    MebinConfig,
    coarse_mask,
    connected_components,
    mebin_threshold,
    threshold_mean3std,
)

rng = np.random.default_rng(7)
values = rng.uniform(0.0, 0.02, (128, 128))
values[10:40, 10:40] = 1.0    # strong defect, large enough to inflate the std
values[80:88, 90:98] = 0.6    # subtle defect, below this map's mean+3std

stat_mask, stat_t = threshold_mean3std(values)
adaptive_mask, adaptive_t = mebin_threshold(values, MebinConfig())
fused, _, _ = coarse_mask(values)

for name, mask in [("mean+3std", stat_mask), ("adaptive", adaptive_mask), ("fused", fused)]:
    _, count, stats = connected_components(mask, 8)
    areas = [s.area for s in stats]
    print(f"{name:10s}: {count} component(s), areas {areas}")
print(f"thresholds: statistical {stat_t:.4f}, adaptive {adaptive_t:.4f}")
print("fused contains both branches:",
      bool(not (stat_mask & ~fused).any() and not (adaptive_mask & ~fused).any()))
