"""Synthetic ground-truth datasets and brute-force oracles.

Random numbers come from numpy's ``PCG64`` bit generator seeded with the
config seed; normals use numpy's ``Generator.standard_normal`` (ziggurat).
Draw order is fixed: training latents, test latents, ``W_true``, training
noise, test noise. Repetition ``r`` of a sweep uses seed ``seed + r``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from . import linmap, metrics, roi
from .dataio import RoiMask
from .errors import ConfigInvalid, ShapeMismatch, TooFewRows, ZeroVariance
from .linmap import DecodeOptions
from .metrics import PairwiseReport

# accuracy is evaluated on unrescaled predictions, with test-set centering
EVAL_OPTIONS = DecodeOptions(center_test=True, rescale=False, drop_bias=True)


@dataclass(frozen=True)
class SynthConfig:
    n_train: int = 300
    n_test: int = 50
    latent_dim: int = 20
    n_voxels: int = 200
    noise_sigma: float = 1.0
    seed: int = 0
    n_groups: int = 1

    def __post_init__(self):
        for name in ("n_train", "n_test", "latent_dim", "n_voxels", "n_groups"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)) or value < 1:
                raise ConfigInvalid(f"{name} must be a positive integer, got {value!r}")
        d = self.latent_dim
        if self.n_train < d + 1:
            raise ConfigInvalid(f"n_train={self.n_train} must be >= latent_dim+1={d + 1}")
        if self.n_voxels < d + 1:
            raise ConfigInvalid(f"n_voxels={self.n_voxels} must be >= latent_dim+1={d + 1}")
        if self.n_test < 2:
            raise ConfigInvalid("n_test must be >= 2 for pairwise evaluation")
        if not (math.isfinite(self.noise_sigma) and self.noise_sigma >= 0):
            raise ConfigInvalid(f"noise_sigma must be finite and >= 0, got {self.noise_sigma}")
        if self.n_groups > min(d, self.n_voxels):
            raise ConfigInvalid(f"n_groups={self.n_groups} exceeds latent_dim or n_voxels")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ConfigInvalid(f"seed must fit in an unsigned 64-bit integer, got {self.seed}")

    @classmethod
    def from_mapping(cls, values):
        """Build from string or typed values keyed by field name (``-`` accepted for ``_``)."""
        known = {f.name: f.type for f in fields(cls)}
        kwargs = {}
        for key, raw in values.items():
            name = key.replace("-", "_")
            if name not in known:
                raise ConfigInvalid(f"unknown synth config key {key!r}")
            try:
                kwargs[name] = float(raw) if name == "noise_sigma" else int(raw)
            except (TypeError, ValueError):
                raise ConfigInvalid(f"bad value for {key}: {raw!r}") from None
        return cls(**kwargs)

    def as_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass
class SynthDataset:
    config: SynthConfig
    w_true: np.ndarray      # (d+1) x nv
    x_train: np.ndarray     # n_train x (d+1), bias last
    x_test: np.ndarray      # n_test x (d+1)
    y_train: np.ndarray
    y_test: np.ndarray
    voxel_groups: list = field(default_factory=list)

    @property
    def noise_sigma(self):
        return self.config.noise_sigma

    @property
    def seed(self):
        return self.config.seed

    @property
    def latents_train(self):
        return self.x_train[:, :-1]

    @property
    def latents_test(self):
        return self.x_test[:, :-1]


def _blocks(size, parts):
    return np.array_split(np.arange(size), parts)


def generate(config):
    """Draw a dataset with ``Y = X_aug W_true + noise``.

    Noise on voxel ``v`` is Gaussian with std ``noise_sigma * s_v`` where
    ``s_v`` is the population std of that voxel's noiseless signal over the
    training and test rows together. With ``n_groups > 1`` the voxels are
    split into contiguous near-equal groups, each driven only by its own
    contiguous block of latent dimensions (the bias row is shared).
    """
    c = config
    d, nv = c.latent_dim, c.n_voxels
    rng = np.random.Generator(np.random.PCG64(int(c.seed)))
    lat_train = rng.standard_normal((c.n_train, d))
    lat_test = rng.standard_normal((c.n_test, d))
    w_true = rng.standard_normal((d + 1, nv)) / math.sqrt(d + 1)

    groups = []
    if c.n_groups > 1:
        vox_blocks, lat_blocks = _blocks(nv, c.n_groups), _blocks(d, c.n_groups)
        keep = np.zeros((d, nv), dtype=bool)
        for g, (vb, lb) in enumerate(zip(vox_blocks, lat_blocks), start=1):
            keep[np.ix_(lb, vb)] = True
            groups.append(RoiMask(f"G{g}", tuple(int(i) for i in vb)))
        w_true[:d][~keep] = 0.0

    x_train = linmap.augment_bias(lat_train)
    x_test = linmap.augment_bias(lat_test)
    s_train = x_train @ w_true
    s_test = x_test @ w_true
    scale = c.noise_sigma * np.vstack([s_train, s_test]).std(axis=0)
    y_train = s_train + rng.standard_normal(s_train.shape) * scale
    y_test = s_test + rng.standard_normal(s_test.shape) * scale
    return SynthDataset(c, w_true, x_train, x_test, y_train, y_test, groups)


def decode_accuracy(dataset, mask=None, opts=EVAL_OPTIONS, ridge_lambda=0.0):
    """Fit on the training split (optionally restricted to ``mask``), decode the test split, score it."""
    y_train, y_test = dataset.y_train, dataset.y_test
    if mask is not None:
        y_train, y_test = roi.select_voxels(y_train, mask), roi.select_voxels(y_test, mask)
    emap = linmap.fit_encoder(dataset.x_train, y_train, ridge_lambda)
    pred = linmap.decode_latents(emap, y_test, opts)
    if not opts.drop_bias:
        pred = pred[:, :-1]
    return metrics.pairwise_decoding_accuracy(dataset.latents_test, pred)


# ---------------------------------------------------------------- oracle


def _naive_pearson(a, b):
    n = len(a)
    ma = sum(a) / n
    mb = sum(b) / n
    sab = saa = sbb = 0.0
    for x, y in zip(a, b):
        sab += (x - ma) * (y - mb)
        saa += (x - ma) ** 2
        sbb += (y - mb) ** 2
    return sab / math.sqrt(saa * sbb)


def oracle_pairwise(v, p):
    """Brute-force pairwise decoding accuracy over Python lists, independent of :mod:`metrics`."""
    v = np.asarray(v, dtype=np.float64).tolist()
    p = np.asarray(p, dtype=np.float64).tolist()
    if len(v) != len(p) or any(len(a) != len(b) for a, b in zip(v, p)):
        raise ShapeMismatch("original and predicted must have the same shape")
    n = len(v)
    if n < 2:
        raise TooFewRows("need at least two items")
    for name, rows in (("original", v), ("predicted", p)):
        for i, row in enumerate(rows):
            if max(row) == min(row):
                raise ZeroVariance(f"{name} row {i} has zero variance", row=i)
    correct = ties = pairs = 0
    for i in range(n - 1):
        for j in range(i + 1, n):
            pairs += 1
            same = _naive_pearson(v[i], p[i]) + _naive_pearson(v[j], p[j])
            cross = _naive_pearson(v[i], p[j]) + _naive_pearson(v[j], p[i])
            if same > cross:
                correct += 1
            elif same == cross:
                ties += 1
    return PairwiseReport(n_items=n, n_pairs=pairs, n_correct=correct, n_ties=ties)


# ---------------------------------------------------------------- sweep


@dataclass
class SweepResult:
    records: list    # (sigma, rep, accuracy)
    summary: list    # (sigma, mean_accuracy, std_accuracy), population std

    def write_csv(self, path):
        lines = ["sigma,rep,accuracy"]
        lines += [f"{s!r},{r},{a!r}" for s, r, a in self.records]
        for s, mean, std in self.summary:
            lines.append(f"{s!r},mean,{mean!r}")
            lines.append(f"{s!r},std,{std!r}")
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def noise_sweep(base_config, sigmas, repetitions, opts=EVAL_OPTIONS):
    sigmas = [float(s) for s in sigmas]
    if not sigmas:
        raise ConfigInvalid("sigmas must be non-empty")
    if repetitions < 1:
        raise ConfigInvalid(f"repetitions must be >= 1, got {repetitions}")
    records, summary = [], []
    for sigma in sigmas:
        accs = []
        for rep in range(repetitions):
            cfg = replace(base_config, noise_sigma=sigma, seed=base_config.seed + rep)
            acc = decode_accuracy(generate(cfg), opts=opts).accuracy
            records.append((sigma, rep, acc))
            accs.append(acc)
        summary.append((sigma, float(np.mean(accs)), float(np.std(accs))))
    return SweepResult(records, summary)
