"""Voxel subsetting by region of interest.

A voxel is identified by its column index in a response matrix; masks are
:class:`~latent_decode.dataio.RoiMask` objects.
"""

from __future__ import annotations

import numpy as np

from . import dataio
from .dataio import RoiMask
from .errors import EmptyInput, EmptyMask, IndexOutOfRange


def select_voxels(y, mask):
    y = dataio.as_matrix(y, "responses")
    if len(mask) == 0:
        raise EmptyMask(f"ROI {mask.name!r} has no voxels")
    if mask.indices[-1] >= y.shape[1]:
        raise IndexOutOfRange(f"ROI {mask.name!r} references voxel {mask.indices[-1]} "
                              f"but responses have {y.shape[1]} columns")
    return np.ascontiguousarray(y[:, list(mask.indices)])


def union_masks(masks, name):
    masks = list(masks)
    if not masks:
        raise EmptyInput("union needs at least one mask")
    merged = set()
    for m in masks:
        merged.update(m.indices)
    return RoiMask(name, tuple(sorted(merged)))
