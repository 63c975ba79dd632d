import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from latent_decode import dataio
from latent_decode.dataio import ImageSet, RoiMask
from latent_decode.errors import (
    DuplicateIndex,
    EmptyDirectory,
    FormatError,
    MixedDimensions,
    NonFiniteValue,
    UnsupportedFormat,
)

from conftest import pgm_bytes


def test_read_csv_simple(tmp_path):
    p = tmp_path / "m.csv"
    p.write_text("1,2\n3,4")
    m = dataio.read_matrix(p)
    assert m.shape == (2, 2)
    assert m.ravel().tolist() == [1, 2, 3, 4]


def test_read_ldm_zero_matrix(tmp_path):
    p = tmp_path / "z.ldm"
    p.write_bytes(b"LDM1" + struct.pack("<II", 1, 3) + struct.pack("<3d", 0.0, 0.0, 0.0))
    m = dataio.read_matrix(p)
    assert m.shape == (1, 3)
    assert np.all(m == 0)


def test_ldm_layout_single_value(tmp_path):
    p = tmp_path / "one.ldm"
    dataio.write_matrix(np.array([[42.0]]), p)
    data = p.read_bytes()
    assert len(data) == 20
    assert data[:4] == b"LDM1"
    assert struct.unpack("<IId", data[4:]) == (1, 1, 42.0)


def test_csv_identity_text(tmp_path):
    p = tmp_path / "i.csv"
    dataio.write_matrix(np.eye(2), p)
    rows = [[float(t) for t in line.split(",")] for line in p.read_text().splitlines()]
    assert rows == [[1, 0], [0, 1]]


def test_ldm_roundtrip_bit_exact(tmp_path, rng):
    m = rng.standard_normal((7, 5))
    p = tmp_path / "r.ldm"
    dataio.write_matrix(m, p)
    back = dataio.read_matrix(p)
    assert back.tobytes() == m.tobytes()


def test_csv_roundtrip(tmp_path, rng):
    m = rng.standard_normal((100, 3)) * 1e3
    p = tmp_path / "r.csv"
    dataio.write_matrix(m, p)
    assert np.max(np.abs(dataio.read_matrix(p) - m)) < 1e-12


@pytest.mark.parametrize("text, exc", [
    ("1,2\n3", FormatError),
    ("1,x\n3,4", FormatError),
    ("", FormatError),
    ("1,nan", NonFiniteValue),
    ("inf,1", NonFiniteValue),
])
def test_csv_errors(tmp_path, text, exc):
    p = tmp_path / "bad.csv"
    p.write_text(text)
    with pytest.raises(exc):
        dataio.read_matrix(p)


@pytest.mark.parametrize("data", [
    b"LDM2" + struct.pack("<IId", 1, 1, 1.0),
    b"LDM1" + struct.pack("<II", 2, 2) + b"\0" * 8,
    b"LDM1\x01",
    b"LDM1" + struct.pack("<IId", 0, 1, 1.0),
])
def test_ldm_format_errors(tmp_path, data):
    p = tmp_path / "bad.ldm"
    p.write_bytes(data)
    with pytest.raises(FormatError):
        dataio.read_matrix(p)


def test_ldm_nan_rejected(tmp_path):
    p = tmp_path / "nan.ldm"
    p.write_bytes(b"LDM1" + struct.pack("<IId", 1, 1, float("nan")))
    with pytest.raises(NonFiniteValue):
        dataio.read_matrix(p)


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        dataio.read_matrix(tmp_path / "nope.ldm")


finite = st.floats(allow_nan=False, allow_infinity=False, width=64)


@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(1, 6), st.integers(1, 6)), elements=finite))
def test_roundtrip_property(tmp_path_factory, m):
    d = tmp_path_factory.mktemp("rt")
    dataio.write_matrix(m, d / "m.ldm")
    dataio.write_matrix(m, d / "m.csv")
    assert dataio.read_matrix(d / "m.ldm").tobytes() == m.tobytes()
    # 17 significant digits reproduce every double exactly
    assert np.array_equal(dataio.read_matrix(d / "m.csv"), m)


# ---------------------------------------------------------------- images


def test_single_grey_pixel(tmp_path):
    (tmp_path / "a.pgm").write_bytes(pgm_bytes([[255]]))
    s = dataio.read_image_set(tmp_path)
    assert s.geometry == (1, 1, 1)
    assert s.images.tolist() == [[1.0]]


def test_rgb_interleaved(tmp_path):
    (tmp_path / "a.ppm").write_bytes(pgm_bytes(np.array([[[0, 0, 0], [255, 255, 255]]])))
    s = dataio.read_image_set(tmp_path)
    assert s.geometry == (1, 2, 3)
    assert s.images.tolist() == [[0, 0, 0, 1, 1, 1]]


def test_lexicographic_order(tmp_path):
    (tmp_path / "b.pgm").write_bytes(pgm_bytes(np.full((2, 2), 10)))
    (tmp_path / "a.pgm").write_bytes(pgm_bytes(np.full((2, 2), 200)))
    s = dataio.read_image_set(tmp_path)
    assert s.names == ("a.pgm", "b.pgm")
    assert np.allclose(s.images[0], 200 / 255)


def test_header_comments(tmp_path):
    (tmp_path / "c.pgm").write_bytes(b"P5\n# made by hand\n2 1\n# max\n255\n\x00\x80")
    s = dataio.read_image_set(tmp_path)
    assert s.images.tolist() == [[0.0, 128 / 255]]


def test_mixed_dimensions(tmp_path):
    (tmp_path / "a.pgm").write_bytes(pgm_bytes(np.zeros((2, 2))))
    (tmp_path / "b.pgm").write_bytes(pgm_bytes(np.zeros((2, 3))))
    with pytest.raises(MixedDimensions):
        dataio.read_image_set(tmp_path)


@pytest.mark.parametrize("data", [b"P2\n1 1\n255\n0", b"P5\n1 1\n65535\n\0\0", b"GIF89a"])
def test_unsupported(tmp_path, data):
    (tmp_path / "x.pgm").write_bytes(data)
    with pytest.raises(UnsupportedFormat):
        dataio.read_image_set(tmp_path)


def test_empty_directory(tmp_path):
    with pytest.raises(EmptyDirectory):
        dataio.read_image_set(tmp_path)


def test_truncated_raster(tmp_path):
    (tmp_path / "t.pgm").write_bytes(b"P5\n2 2\n255\n\0\0\0")
    with pytest.raises(FormatError):
        dataio.read_image_set(tmp_path)


def test_image_values_in_unit_interval(tmp_path, rng):
    for i in range(3):
        (tmp_path / f"{i}.ppm").write_bytes(pgm_bytes(rng.integers(0, 256, (4, 5, 3))))
    s = dataio.read_image_set(tmp_path)
    assert s.images.min() >= 0 and s.images.max() <= 1


@pytest.mark.parametrize("shape", [(3, 4), (3, 4, 3)])
def test_netpbm_byte_roundtrip(tmp_path, rng, shape):
    src, out = tmp_path / "src", tmp_path / "out"
    src.mkdir()
    ext = "pgm" if len(shape) == 2 else "ppm"
    raw = pgm_bytes(rng.integers(0, 256, shape))
    (src / f"a.{ext}").write_bytes(raw)
    s = dataio.read_image_set(src)
    dataio.write_image_set(s, out, names=s.names)
    assert (out / f"a.{ext}").read_bytes() == raw
    assert np.array_equal(dataio.read_image_set(out).images, s.images)


def test_to_bytes_rounds_half_away():
    assert dataio.to_bytes(np.array([0.5 / 255, 1.5 / 255, -0.2, 1.3])).tolist() == [1, 2, 0, 255]


def test_imageset_geometry_check():
    with pytest.raises(ValueError):
        ImageSet(np.zeros((1, 5)), 2, 2, 1)


# ---------------------------------------------------------------- ROI masks


def test_roi_sorted(tmp_path):
    p = tmp_path / "v1.txt"
    p.write_text("V1\n0\n2\n1")
    assert dataio.read_roi_mask(p) == RoiMask("V1", (0, 1, 2))


def test_roi_duplicate(tmp_path):
    p = tmp_path / "v1.txt"
    p.write_text("V1\n3\n3")
    with pytest.raises(DuplicateIndex):
        dataio.read_roi_mask(p)


def test_roi_empty_is_valid(tmp_path):
    p = tmp_path / "e.txt"
    p.write_text("EMPTY\n")
    m = dataio.read_roi_mask(p)
    assert m.name == "EMPTY" and m.indices == ()


@pytest.mark.parametrize("text", ["", "V1\n-1", "V1\n1.5", "V1\nabc"])
def test_roi_format_errors(tmp_path, text):
    p = tmp_path / "bad.txt"
    p.write_text(text)
    with pytest.raises(FormatError):
        dataio.read_roi_mask(p)


def test_roi_roundtrip(tmp_path):
    m = RoiMask("FFA", (3, 9, 12))
    dataio.write_roi_mask(m, tmp_path / "f.txt")
    assert dataio.read_roi_mask(tmp_path / "f.txt") == m


def test_roimask_rejects_unsorted():
    with pytest.raises(FormatError):
        RoiMask("x", (2, 1))
