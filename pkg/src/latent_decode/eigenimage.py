"""PCA eigen-image codec: fit components on an image corpus, project, reconstruct."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import dataio
from .dataio import ImageSet
from .errors import DegenerateData, FormatError, KTooLarge, ShapeMismatch

DEFAULT_K = 120


@dataclass
class EigenImageModel:
    mean_pixel: np.ndarray          # (p,)
    components: np.ndarray          # k x p, orthonormal rows
    explained_variance: np.ndarray  # (k,), non-increasing
    height: int
    width: int
    channels: int

    @property
    def k(self):
        return self.components.shape[0]

    @property
    def n_pixels(self):
        return self.components.shape[1]

    def save(self, prefix):
        prefix = str(prefix)
        dataio.ensure_parent(prefix)
        dataio.write_matrix(self.mean_pixel[None, :], prefix + ".mean.ldm", "ldm")
        dataio.write_matrix(self.components, prefix + ".components.ldm", "ldm")
        dataio.write_matrix(self.explained_variance[None, :], prefix + ".var.ldm", "ldm")
        dataio.write_kv({"height": self.height, "width": self.width,
                         "channels": self.channels, "k": self.k}, prefix + ".meta.txt")

    @classmethod
    def load(cls, prefix):
        prefix = str(prefix)
        meta = dataio.read_kv(prefix + ".meta.txt")
        try:
            h, w, c, k = (int(meta[key]) for key in ("height", "width", "channels", "k"))
        except (KeyError, ValueError) as exc:
            raise FormatError(f"{prefix}.meta.txt: bad or missing field ({exc})") from None
        model = cls(
            mean_pixel=dataio.read_matrix(prefix + ".mean.ldm", "ldm").reshape(-1),
            components=dataio.read_matrix(prefix + ".components.ldm", "ldm"),
            explained_variance=dataio.read_matrix(prefix + ".var.ldm", "ldm").reshape(-1),
            height=h, width=w, channels=c,
        )
        if model.components.shape != (k, h * w * c) or model.mean_pixel.shape != (h * w * c,):
            raise FormatError(f"{prefix}: model arrays do not match meta geometry")
        return model


def _fix_signs(components):
    # largest-magnitude entry of each row made positive; argmax picks the lowest index on ties
    lead = np.argmax(np.abs(components), axis=1)
    signs = np.where(components[np.arange(len(components)), lead] < 0, -1.0, 1.0)
    return components * signs[:, None]


def fit_pca(images, k=DEFAULT_K):
    """Fit the top-``k`` principal components of an :class:`ImageSet` (or raw matrix)."""
    if isinstance(images, ImageSet):
        data, geometry = images.images, images.geometry
    else:
        data = dataio.as_matrix(images, "images")
        geometry = (1, data.shape[1], 1)
    n, p = data.shape
    if k < 1 or k > min(n - 1, p):
        raise KTooLarge(f"k={k} must be in [1, min(n_images-1, n_pixels)] = [1, {min(n - 1, p)}]")
    if np.all(data == data[0]):
        raise DegenerateData("all images are identical; no variance to decompose")
    mean = data.mean(axis=0)
    centered = data - mean
    _, s, vt = np.linalg.svd(centered, full_matrices=False)
    components = _fix_signs(vt[:k])
    return EigenImageModel(mean_pixel=mean, components=np.ascontiguousarray(components),
                           explained_variance=s[:k] ** 2 / n,
                           height=geometry[0], width=geometry[1], channels=geometry[2])


def project(model, images):
    images = dataio.as_matrix(images, "images")
    if images.shape[1] != model.n_pixels:
        raise ShapeMismatch(f"images have {images.shape[1]} pixels, model expects {model.n_pixels}")
    return (images - model.mean_pixel) @ model.components.T


def reconstruct(model, coeffs, clamp=False):
    coeffs = dataio.as_matrix(coeffs, "coefficients")
    if coeffs.shape[1] != model.k:
        raise ShapeMismatch(f"coefficients have {coeffs.shape[1]} columns, model has k={model.k}")
    pixels = coeffs @ model.components + model.mean_pixel
    if clamp:
        np.clip(pixels, 0.0, 1.0, out=pixels)
    return pixels


def to_image_set(model, pixels, names=()):
    return ImageSet(dataio.as_matrix(pixels), model.height, model.width, model.channels,
                    names=tuple(names))
