"""Box-prompted mask refinement.

Every connected component of the coarse mask becomes a tight bounding-box
prompt for a promptable segmenter, which answers with up to three
confidence-ranked candidate masks per box. Categories fuse candidates
differently: union of all three to minimize misses, or only the top
candidate for precision. Without a segmenter endpoint the null handle
keeps each box's source component, making refinement a safe no-op.
"""

import numpy as np

from tilebin import (
    NullSegmenter,
    RefineMode,
    default_refine_mode,
    extract_boxes,
    refine_mask,
)

mask = np.zeros((32, 32), bool)
mask[4:10, 4:7] = True
mask[9, 4:14] = True       # L-shaped defect
mask[20:24, 20:24] = True  # square defect
image = np.full((32, 32), 120, np.uint8)

boxes = extract_boxes(mask)
for b in boxes:
    print(f"component {b.source_component_label}: box "
          f"({b.x_min}, {b.y_min}) .. ({b.x_max}, {b.y_max})")


class TwoCandidateSegmenter:
    """Answers every box with its rectangle plus a one-pixel-dilated rectangle."""

    def segment(self, image_path, boxes, image_shape):
        out = []
        for b in boxes:
            tight = np.zeros(image_shape, bool)
            tight[b.y_min : b.y_max + 1, b.x_min : b.x_max + 1] = True
            loose = np.zeros(image_shape, bool)
            loose[max(0, b.y_min - 1) : b.y_max + 2, max(0, b.x_min - 1) : b.x_max + 2] = True
            out.append([(tight, 0.9), (loose, 0.4)])
        return out


seg = TwoCandidateSegmenter()
top = refine_mask(mask, image, seg, RefineMode.TOP_CONFIDENCE)
union = refine_mask(mask, image, seg, RefineMode.OR_OF_THREE)
skip = refine_mask(mask, image, seg, RefineMode.SKIP)
null = refine_mask(mask, image, NullSegmenter(), RefineMode.TOP_CONFIDENCE)

print(f"\ncoarse {mask.sum()} px | top-confidence {top.sum()} px | "
      f"or-of-three {union.sum()} px | skip {skip.sum()} px | null {null.sum()} px")
print("or-of-three is a superset of top-confidence:", bool(not (top & ~union).any()))
print("null segmenter is the identity:", bool(np.array_equal(null, mask)))

print("\nper-category defaults:")
for category in ("fabric", "walnuts", "rice", "vial", "sheet_metal"):
    print(f"  {category:12s} -> {default_refine_mode(category).value}")
