"""Linear latent-to-voxel encoder and its inversion.

Training fits ``Y = X_aug @ W`` where ``X_aug`` is the latent matrix with a
trailing constant-one bias column. Decoding inverts the fitted map for new
responses, ``X = Y W^T (W W^T)^{-1}``, solving rather than inverting.

All standard deviations use the population (divide-by-n) convention.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.linalg import cho_solve
from scipy.linalg.lapack import dpocon, dpotrf

from . import dataio
from .errors import DecodeWarning, FormatError, ShapeMismatch, SingularSystem, TooFewRows

RCOND_MIN = 1e-12
JITTER_SCALE = 1e-10


@dataclass
class EncoderMap:
    w: np.ndarray                   # (d+1) x nv, last row is the bias
    train_latent_mean: np.ndarray   # (d,)
    train_latent_std: np.ndarray    # (d,)
    ridge_lambda: float = 0.0
    fit_residual_rms: float = 0.0

    def __post_init__(self):
        self.w = dataio.as_matrix(self.w, "W")
        self.train_latent_mean = np.asarray(self.train_latent_mean, dtype=np.float64).reshape(-1)
        self.train_latent_std = np.asarray(self.train_latent_std, dtype=np.float64).reshape(-1)
        d = self.latent_dim
        if self.train_latent_mean.shape != (d,) or self.train_latent_std.shape != (d,):
            raise ShapeMismatch(f"latent statistics must have length {d}")
        if np.any(self.train_latent_std < 0):
            raise ShapeMismatch("train_latent_std must be non-negative")

    @property
    def latent_dim(self):
        return self.w.shape[0] - 1

    @property
    def n_voxels(self):
        return self.w.shape[1]

    def save(self, prefix):
        """Write ``<prefix>.w.ldm``, ``.mean.ldm``, ``.std.ldm`` and ``.meta.txt``."""
        prefix = str(prefix)
        dataio.ensure_parent(prefix)
        dataio.write_matrix(self.w, prefix + ".w.ldm", "ldm")
        dataio.write_matrix(self.train_latent_mean[None, :], prefix + ".mean.ldm", "ldm")
        dataio.write_matrix(self.train_latent_std[None, :], prefix + ".std.ldm", "ldm")
        dataio.write_kv({
            "latent_dim": self.latent_dim,
            "n_voxels": self.n_voxels,
            "ridge_lambda": repr(float(self.ridge_lambda)),
            "fit_residual_rms": repr(float(self.fit_residual_rms)),
        }, prefix + ".meta.txt")

    @classmethod
    def load(cls, prefix):
        prefix = str(prefix)
        meta = dataio.read_kv(prefix + ".meta.txt")
        try:
            latent_dim = int(meta["latent_dim"])
            n_voxels = int(meta["n_voxels"])
            ridge = float(meta["ridge_lambda"])
            rms = float(meta["fit_residual_rms"])
        except (KeyError, ValueError) as exc:
            raise FormatError(f"{prefix}.meta.txt: bad or missing field ({exc})") from None
        emap = cls(
            w=dataio.read_matrix(prefix + ".w.ldm", "ldm"),
            train_latent_mean=dataio.read_matrix(prefix + ".mean.ldm", "ldm"),
            train_latent_std=dataio.read_matrix(prefix + ".std.ldm", "ldm"),
            ridge_lambda=ridge,
            fit_residual_rms=rms,
        )
        if (emap.latent_dim, emap.n_voxels) != (latent_dim, n_voxels):
            raise FormatError(f"{prefix}: meta says {latent_dim}+1 x {n_voxels}, "
                              f"W is {emap.w.shape}")
        return emap


@dataclass(frozen=True)
class DecodeOptions:
    center_test: bool = True
    rescale: bool = True
    drop_bias: bool = True


def augment_bias(x):
    x = dataio.as_matrix(x, "latents")
    return np.hstack([x, np.ones((x.shape[0], 1))])


def _cholesky(a):
    """Upper Cholesky factor of symmetric ``a`` and its reciprocal 1-norm condition estimate.

    Returns ``(None, 0.0)`` when ``a`` is not numerically positive definite.
    """
    c, info = dpotrf(a, lower=0, clean=1)
    if info != 0:
        return None, 0.0
    anorm = np.abs(a).sum(axis=0).max()
    rcond, info = dpocon(c, anorm)
    if info != 0:
        return None, 0.0
    return c, float(rcond)


def fit_encoder(x_aug, y, ridge_lambda=0.0):
    """Penalized least squares fit of ``y ~ x_aug @ W`` through the normal equations.

    The ridge penalty applies to the latent rows of ``W`` only; the bias row
    (last column of ``x_aug``) is left unpenalized.
    """
    x_aug = dataio.as_matrix(x_aug, "x_aug")
    y = dataio.as_matrix(y, "responses")
    if x_aug.shape[0] != y.shape[0]:
        raise ShapeMismatch(f"latents have {x_aug.shape[0]} rows ({x_aug.shape[0]}x{x_aug.shape[1]}) "
                            f"but responses have {y.shape[0]} ({y.shape[0]}x{y.shape[1]})")
    if x_aug.shape[1] < 2:
        raise ShapeMismatch("x_aug needs at least one latent column plus the bias column")
    if not np.all(x_aug[:, -1] == 1.0):
        raise ShapeMismatch("last column of x_aug must be the all-ones bias column")
    if not ridge_lambda >= 0:
        raise ValueError(f"ridge_lambda must be >= 0, got {ridge_lambda}")
    n, p = x_aug.shape
    if ridge_lambda == 0 and n < p:
        raise SingularSystem(f"{n} samples cannot determine {p} coefficients without ridge")

    gram = x_aug.T @ x_aug
    if ridge_lambda > 0:
        gram[np.arange(p - 1), np.arange(p - 1)] += ridge_lambda
    c, rcond = _cholesky(gram)
    if c is None or rcond < RCOND_MIN:
        raise SingularSystem(f"normal equations are singular (rcond={rcond:.3g})")
    w = cho_solve((c, False), x_aug.T @ y)

    resid = x_aug @ w - y
    rms = float(np.sqrt(np.sum(resid * resid) / resid.size))
    latents = x_aug[:, :-1]
    return EncoderMap(w=w, train_latent_mean=latents.mean(axis=0),
                      train_latent_std=latents.std(axis=0),
                      ridge_lambda=float(ridge_lambda), fit_residual_rms=rms)


def center_test_responses(y_test):
    y_test = dataio.as_matrix(y_test, "test responses")
    if y_test.shape[0] < 2:
        raise TooFewRows(f"centering needs at least 2 test rows, got {y_test.shape[0]}")
    return y_test - y_test.mean(axis=0)


def rescale_latents(x_pred, emap):
    """Standardize each predicted dimension, then map it onto the training mean/std."""
    x_pred = dataio.as_matrix(x_pred, "predicted latents")
    if x_pred.shape[1] != emap.latent_dim:
        raise ShapeMismatch(f"predicted latents have {x_pred.shape[1]} columns, "
                            f"map has latent_dim {emap.latent_dim}")
    if x_pred.shape[0] < 2:
        raise TooFewRows(f"rescaling needs at least 2 rows, got {x_pred.shape[0]}")
    mu = x_pred.mean(axis=0)
    sigma = x_pred.std(axis=0)
    constant = np.ptp(x_pred, axis=0) == 0
    if np.any(constant):
        warnings.warn(f"constant predicted latent dimensions {np.flatnonzero(constant).tolist()} "
                      "set to the training mean", DecodeWarning, stacklevel=2)
    safe = np.where(constant, 1.0, sigma)
    out = (x_pred - mu) / safe * emap.train_latent_std + emap.train_latent_mean
    out[:, constant] = emap.train_latent_mean[constant]
    return out


def decode_latents(emap, y_test, opts=DecodeOptions()):
    """Predict latent vectors from responses with ``Y W^T (W W^T)^{-1}``.

    Returns an ``m x d`` matrix, or ``m x (d+1)`` with the bias column last
    when ``opts.drop_bias`` is false.
    """
    y = dataio.as_matrix(y_test, "test responses")
    if y.shape[1] != emap.n_voxels:
        raise ShapeMismatch(f"responses have {y.shape[1]} voxels, map expects {emap.n_voxels}")
    if opts.center_test:
        y = center_test_responses(y)
    w = emap.w
    gram = w @ w.T
    c, rcond = _cholesky(gram)
    if c is None or rcond < RCOND_MIN:
        eps = JITTER_SCALE * np.trace(gram) / gram.shape[0]
        warnings.warn(f"W W^T is ill-conditioned (rcond={rcond:.3g}); adding jitter {eps:.3g} * I",
                      DecodeWarning, stacklevel=2)
        c, _ = _cholesky(gram + eps * np.eye(gram.shape[0]))
        if c is None:
            raise SingularSystem("W W^T is singular even after jitter")
    x = cho_solve((c, False), w @ y.T).T

    if opts.rescale:
        x[:, :-1] = rescale_latents(x[:, :-1], emap)
    if opts.drop_bias:
        x = x[:, :-1]
    return np.ascontiguousarray(x)
