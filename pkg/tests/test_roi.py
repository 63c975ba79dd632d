import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from latent_decode import roi
from latent_decode.dataio import RoiMask
from latent_decode.errors import EmptyInput, EmptyMask, IndexOutOfRange


def test_select():
    assert roi.select_voxels([[7, 8, 9]], RoiMask("a", (0, 2))).tolist() == [[7, 9]]


def test_select_full_mask(rng):
    y = rng.standard_normal((3, 5))
    assert np.array_equal(roi.select_voxels(y, RoiMask("all", range(5))), y)


def test_select_errors():
    with pytest.raises(IndexOutOfRange):
        roi.select_voxels(np.zeros((1, 3)), RoiMask("a", (0, 3)))
    with pytest.raises(EmptyMask):
        roi.select_voxels(np.zeros((1, 3)), RoiMask("a", ()))


@pytest.mark.parametrize("masks, expected", [
    ([(0, 1), (1, 2)], (0, 1, 2)),
    ([(4, 6)], (4, 6)),
    ([(0,), (5,)], (0, 5)),
])
def test_union(masks, expected):
    out = roi.union_masks([RoiMask(f"m{i}", m) for i, m in enumerate(masks)], "VC")
    assert out == RoiMask("VC", expected)


def test_union_empty():
    with pytest.raises(EmptyInput):
        roi.union_masks([], "VC")


index_sets = st.sets(st.integers(0, 40), max_size=15)


@settings(max_examples=60, deadline=None)
@given(index_sets, index_sets, index_sets)
def test_union_algebra(a, b, c):
    A, B, C = (RoiMask(n, sorted(s)) for n, s in zip("abc", (a, b, c)))
    u = roi.union_masks
    assert u([A, A], "x") == u([A], "x")
    assert u([A, B], "x") == u([B, A], "x")
    assert u([u([A, B], "t"), C], "x") == u([A, u([B, C], "t")], "x")


@settings(max_examples=40, deadline=None)
@given(index_sets.filter(bool), index_sets.filter(bool))
def test_union_selects_both(a, b):
    y = np.arange(41.0)[None, :] * np.ones((2, 1))
    A, B = RoiMask("a", sorted(a)), RoiMask("b", sorted(b))
    cols = set(roi.select_voxels(y, roi.union_masks([A, B], "u"))[0])
    assert cols == set(roi.select_voxels(y, A)[0]) | set(roi.select_voxels(y, B)[0])
