"""Matrix, image-set, ROI-mask and key=value file I/O.

Matrices are plain ``float64`` 2-D numpy arrays (row = stimulus/sample,
column = dimension/voxel/pixel). Two on-disk encodings are supported:

* ``ldm``: little-endian binary. Bytes 0-3 are ASCII ``LDM1``, bytes 4-7 a
  u32 row count, bytes 8-11 a u32 column count, followed by
  ``rows * cols`` f64 values in row-major order. Total size is
  ``12 + 8 * rows * cols``.
* ``csv``: comma separated, one row per line, no header, values written
  with 17 significant digits so doubles survive the round trip.

Images are binary netpbm files (P5 grey, P6 RGB) with maxval 255.
"""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    DuplicateIndex,
    EmptyDirectory,
    FormatError,
    MixedDimensions,
    NonFiniteValue,
    ShapeMismatch,
    UnsupportedFormat,
)

LDM_MAGIC = b"LDM1"
_LDM_HEADER = struct.Struct("<4sII")
_FORMATS = ("csv", "ldm")


def as_matrix(a, name="matrix"):
    """Return ``a`` as a C-contiguous float64 2-D array, rejecting NaN/Inf."""
    m = np.ascontiguousarray(a, dtype=np.float64)
    if m.ndim != 2:
        raise ShapeMismatch(f"{name} must be 2-D, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise NonFiniteValue(f"{name} contains NaN or Inf")
    return m


def detect_format(path, fmt=None):
    """Resolve a matrix format: explicit ``fmt`` wins, else ``.csv`` suffix means csv, else ldm."""
    if fmt is not None:
        if fmt not in _FORMATS:
            raise FormatError(f"unknown matrix format {fmt!r}; expected one of {_FORMATS}")
        return fmt
    return "csv" if str(path).lower().endswith(".csv") else "ldm"


# ---------------------------------------------------------------- matrices


def read_matrix(path, fmt=None):
    path = Path(path)
    fmt = detect_format(path, fmt)
    if fmt == "ldm":
        m = _decode_ldm(path.read_bytes(), str(path))
    else:
        m = _parse_csv(path.read_text(encoding="utf-8"), str(path))
    if not np.all(np.isfinite(m)):
        bad = np.argwhere(~np.isfinite(m))[0]
        raise NonFiniteValue(f"{path}: non-finite value at row {bad[0]}, column {bad[1]}")
    return m


def write_matrix(m, path, fmt=None):
    m = as_matrix(m)
    if m.shape[0] == 0 or m.shape[1] == 0:
        raise ShapeMismatch(f"cannot write empty matrix of shape {m.shape}")
    path = Path(path)
    fmt = detect_format(path, fmt)
    if fmt == "ldm":
        path.write_bytes(encode_ldm(m))
    else:
        lines = [",".join(format(v, ".17g") for v in row) for row in m.tolist()]
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def encode_ldm(m):
    m = as_matrix(m)
    rows, cols = m.shape
    return _LDM_HEADER.pack(LDM_MAGIC, rows, cols) + m.astype("<f8").tobytes(order="C")


def _decode_ldm(data, source):
    if len(data) < _LDM_HEADER.size:
        raise FormatError(f"{source}: truncated LDM header ({len(data)} bytes)")
    magic, rows, cols = _LDM_HEADER.unpack_from(data)
    if magic != LDM_MAGIC:
        raise FormatError(f"{source}: bad magic {magic!r}, expected {LDM_MAGIC!r}")
    if rows == 0 or cols == 0:
        raise FormatError(f"{source}: empty matrix {rows}x{cols}")
    expected = _LDM_HEADER.size + 8 * rows * cols
    if len(data) != expected:
        raise FormatError(f"{source}: size mismatch, header says {rows}x{cols} "
                          f"({expected} bytes) but file has {len(data)} bytes")
    payload = np.frombuffer(data, dtype="<f8", offset=_LDM_HEADER.size, count=rows * cols)
    return payload.astype(np.float64).reshape(rows, cols)


def _parse_csv(text, source):
    lines = text.splitlines()
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines:
        raise FormatError(f"{source}: empty CSV")
    rows = []
    for lineno, line in enumerate(lines, start=1):
        tokens = line.split(",")
        if rows and len(tokens) != len(rows[0]):
            raise FormatError(f"{source}:{lineno}: ragged row, expected {len(rows[0])} "
                              f"fields, got {len(tokens)}")
        try:
            rows.append([float(t) for t in tokens])
        except ValueError:
            raise FormatError(f"{source}:{lineno}: non-numeric token in {line!r}") from None
    return np.array(rows, dtype=np.float64)


# ---------------------------------------------------------------- netpbm images


@dataclass(frozen=True)
class ImageSet:
    """Images flattened one per row; RGB pixels channel-interleaved, values in [0, 1]."""

    images: np.ndarray
    height: int
    width: int
    channels: int
    names: tuple = field(default=(), compare=False)

    def __post_init__(self):
        if self.channels not in (1, 3):
            raise UnsupportedFormat(f"channels must be 1 or 3, got {self.channels}")
        if self.images.ndim != 2 or self.images.shape[1] != self.height * self.width * self.channels:
            raise ShapeMismatch(f"image matrix {self.images.shape} does not match geometry "
                                f"{self.height}x{self.width}x{self.channels}")

    @property
    def geometry(self):
        return (self.height, self.width, self.channels)

    def __len__(self):
        return self.images.shape[0]


def _header_tokens(data, count, source):
    """Read ``count`` whitespace-separated header tokens, skipping '#' comments."""
    tokens, pos, n = [], 0, len(data)
    while len(tokens) < count:
        while pos < n and data[pos:pos + 1].isspace():
            pos += 1
        if pos < n and data[pos:pos + 1] == b"#":
            while pos < n and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < n and not data[pos:pos + 1].isspace() and data[pos:pos + 1] != b"#":
            pos += 1
        if start == pos:
            raise FormatError(f"{source}: truncated netpbm header")
        tokens.append(data[start:pos])
    if pos >= n or not data[pos:pos + 1].isspace():
        raise FormatError(f"{source}: missing whitespace after netpbm header")
    return tokens, pos + 1


def read_netpbm(path):
    """Read one binary P5/P6 file. Returns ``(pixels uint8 array (h, w, c), channels)``."""
    path = Path(path)
    data = path.read_bytes()
    magic = data[:2]
    if magic in (b"P1", b"P2", b"P3", b"P4"):
        raise UnsupportedFormat(f"{path}: netpbm type {magic.decode()} is not supported (P5/P6 only)")
    if magic not in (b"P5", b"P6"):
        raise UnsupportedFormat(f"{path}: not a binary netpbm file")
    tokens, offset = _header_tokens(data[2:], 3, str(path))
    offset += 2
    try:
        width, height, maxval = (int(t) for t in tokens)
    except ValueError:
        raise FormatError(f"{path}: non-integer netpbm header field") from None
    if maxval != 255:
        raise UnsupportedFormat(f"{path}: maxval {maxval} is not supported (255 only)")
    if width <= 0 or height <= 0:
        raise FormatError(f"{path}: invalid dimensions {width}x{height}")
    channels = 1 if magic == b"P5" else 3
    size = width * height * channels
    raster = data[offset:offset + size]
    if len(raster) != size:
        raise FormatError(f"{path}: raster has {len(raster)} bytes, expected {size}")
    pixels = np.frombuffer(raster, dtype=np.uint8).reshape(height, width, channels)
    return pixels, channels


def write_netpbm(pixels, path):
    """Write a uint8 array of shape (h, w) or (h, w, c) with c in {1, 3}."""
    pixels = np.asarray(pixels)
    if pixels.dtype != np.uint8:
        raise FormatError(f"netpbm pixels must be uint8, got {pixels.dtype}")
    if pixels.ndim == 2:
        pixels = pixels[:, :, None]
    height, width, channels = pixels.shape
    magic = {1: "P5", 3: "P6"}.get(channels)
    if magic is None:
        raise UnsupportedFormat(f"cannot write {channels}-channel image")
    header = f"{magic}\n{width} {height}\n255\n".encode("ascii")
    Path(path).write_bytes(header + np.ascontiguousarray(pixels).tobytes())


def read_image_set(directory):
    directory = Path(directory)
    names = sorted(p.name for p in directory.iterdir() if p.is_file())
    if not names:
        raise EmptyDirectory(f"{directory}: no image files")
    rows, geometry = [], None
    for name in names:
        pixels, channels = read_netpbm(directory / name)
        g = (pixels.shape[0], pixels.shape[1], channels)
        if geometry is None:
            geometry = g
        elif g != geometry:
            raise MixedDimensions(f"{directory / name}: geometry {g} differs from {geometry}")
        rows.append(pixels.reshape(-1))
    images = np.stack(rows).astype(np.float64) / 255.0
    return ImageSet(images, *geometry, names=tuple(names))


def to_bytes(images):
    """Clamp to [0, 1], scale by 255 and round half away from zero."""
    scaled = np.clip(np.asarray(images, dtype=np.float64), 0.0, 1.0) * 255.0
    return np.floor(scaled + 0.5).astype(np.uint8)


def write_image_set(image_set, directory, names=None):
    """Write each row as a P5/P6 file; default names are ``img_00000.pgm`` (or ``.ppm``)."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    h, w, c = image_set.geometry
    ext = "pgm" if c == 1 else "ppm"
    if names is None:
        names = [f"img_{i:05d}.{ext}" for i in range(len(image_set))]
    if len(names) != len(image_set):
        raise ShapeMismatch(f"{len(names)} names for {len(image_set)} images")
    raw = to_bytes(image_set.images)
    for name, row in zip(names, raw):
        write_netpbm(row.reshape(h, w, c), directory / name)
    return [directory / n for n in names]


# ---------------------------------------------------------------- ROI masks


@dataclass(frozen=True)
class RoiMask:
    """Named set of voxel column indices, strictly increasing."""

    name: str
    indices: tuple = ()

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        if any(i < 0 for i in idx):
            raise FormatError(f"ROI {self.name!r}: negative voxel index")
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise FormatError(f"ROI {self.name!r}: indices must be strictly increasing")
        object.__setattr__(self, "indices", idx)

    @classmethod
    def from_indices(cls, name, indices):
        """Build a mask from unordered indices, rejecting duplicates."""
        idx = sorted(int(i) for i in indices)
        for a, b in zip(idx, idx[1:]):
            if a == b:
                raise DuplicateIndex(f"ROI {name!r}: duplicate voxel index {a}")
        return cls(name, tuple(idx))

    def __len__(self):
        return len(self.indices)


def read_roi_mask(path):
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines or not lines[0].strip():
        raise FormatError(f"{path}: missing ROI name line")
    name = lines[0].strip()
    indices = []
    for lineno, line in enumerate(lines[1:], start=2):
        line = line.strip()
        if not line:
            continue
        try:
            value = int(line)
        except ValueError:
            raise FormatError(f"{path}:{lineno}: not an integer: {line!r}") from None
        if value < 0:
            raise FormatError(f"{path}:{lineno}: negative index {value}")
        indices.append(value)
    return RoiMask.from_indices(name, indices)


def write_roi_mask(mask, path):
    body = "".join(f"{i}\n" for i in mask.indices)
    Path(path).write_text(f"{mask.name}\n{body}", encoding="utf-8")


# ---------------------------------------------------------------- key=value text


def read_kv(path):
    """Parse ``key=value`` lines; blank lines and ``#`` comments are ignored."""
    out = {}
    path = Path(path)
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            raise FormatError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        out[key.strip()] = value.strip()
    return out


def write_kv(pairs, path):
    Path(path).write_text("".join(f"{k}={v}\n" for k, v in pairs.items()), encoding="utf-8")


def ensure_parent(path):
    parent = os.path.dirname(os.fspath(path))
    if parent:
        os.makedirs(parent, exist_ok=True)
