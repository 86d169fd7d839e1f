"""Class label constants.

The binary decision everywhere in the pipeline is mask vs. no-mask. The
canonical order (no_mask, mask) fixes confusion-matrix indexing and the
sign convention of scores: higher score = more mask-like.
"""

LABEL_NO_MASK = "no_mask"
LABEL_MASK = "mask"

#: Canonical label order used for confusion matrices: index 0 = no_mask.
LABEL_ORDER = (LABEL_NO_MASK, LABEL_MASK)
