"""Evaluation measures: Pearson correlation, pairwise decoding accuracy,
pix-comp and mean correlation distance in a feature space.

Pairwise accuracy scores each unordered item pair ``(i, j)`` as correct when

    c(v_i, p_i) + c(v_j, p_j) > c(v_i, p_j) + c(v_j, p_i)

and divides the number of correct pairs by ``n (n - 1) / 2``. Exact ties score
zero and are reported separately.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import dataio
from .errors import FormatError, GeometryMismatch, LengthMismatch, ShapeMismatch, TooFewRows, ZeroVariance

CSV_HEADER = ("item_count", "pair_count", "correct", "ties", "accuracy")


@dataclass(frozen=True)
class PairwiseReport:
    n_items: int
    n_pairs: int
    n_correct: int
    n_ties: int

    @property
    def accuracy(self):
        return self.n_correct / self.n_pairs

    def as_dict(self):
        return {
            "items": self.n_items,
            "pairs": self.n_pairs,
            "correct": self.n_correct,
            "ties": self.n_ties,
            "accuracy": f"{self.accuracy:.6f}",
        }

    def to_text(self):
        return "".join(f"{k}={v}\n" for k, v in self.as_dict().items())

    def csv_row(self):
        return [self.n_items, self.n_pairs, self.n_correct, self.n_ties, f"{self.accuracy:.6f}"]

    @classmethod
    def from_kv(cls, kv, source="report"):
        try:
            report = cls(int(kv["items"]), int(kv["pairs"]), int(kv["correct"]), int(kv["ties"]))
        except (KeyError, ValueError) as exc:
            raise FormatError(f"{source}: not a pairwise report ({exc})") from None
        if report.n_pairs != report.n_items * (report.n_items - 1) // 2 or \
                report.n_correct + report.n_ties > report.n_pairs or report.n_pairs == 0:
            raise FormatError(f"{source}: inconsistent pairwise counts")
        return report

    @classmethod
    def read(cls, path):
        return cls.from_kv(dataio.read_kv(path), str(path))


def _deviations(m, name):
    """Row deviations from the row mean and their sums of squares."""
    constant = np.ptp(m, axis=1) == 0
    if np.any(constant):
        row = int(np.flatnonzero(constant)[0])
        raise ZeroVariance(f"{name} row {row} has zero variance", row=row)
    dev = m - m.mean(axis=1, keepdims=True)
    return dev, np.sum(dev * dev, axis=1)


def _rowwise_r(a, b, names=("first", "second")):
    # sxy / sqrt(sxx * syy) returns exactly 1.0 for identical rows
    da, sa = _deviations(a, names[0])
    db, sb = _deviations(b, names[1])
    return np.clip(np.sum(da * db, axis=1) / np.sqrt(sa * sb), -1.0, 1.0)


def pearson(a, b):
    a = np.asarray(a, dtype=np.float64).reshape(-1)
    b = np.asarray(b, dtype=np.float64).reshape(-1)
    if a.shape != b.shape:
        raise LengthMismatch(f"vectors have lengths {a.size} and {b.size}")
    if a.size < 2:
        raise LengthMismatch("Pearson correlation needs at least 2 entries")
    return float(_rowwise_r(a[None, :], b[None, :], ("first vector", "second vector"))[0])


def correlation_matrix(v, p):
    """``C[i, j] = pearson(v[i], p[j])`` for all row pairs."""
    dv, sv = _deviations(v, "original")
    dp, sp = _deviations(p, "predicted")
    return np.clip((dv @ dp.T) / np.sqrt(np.outer(sv, sp)), -1.0, 1.0)


def _check_pair(v, p):
    v = dataio.as_matrix(v, "original")
    p = dataio.as_matrix(p, "predicted")
    if v.shape != p.shape:
        raise ShapeMismatch(f"original {v.shape} and predicted {p.shape} differ in shape")
    if v.shape[1] < 2:
        raise ShapeMismatch("vectors need at least 2 entries for Pearson correlation")
    return v, p


def pairwise_decoding_accuracy(v, p):
    v, p = _check_pair(v, p)
    n = v.shape[0]
    if n < 2:
        raise TooFewRows(f"pairwise accuracy needs at least 2 items, got {n}")
    c = correlation_matrix(v, p)
    diag = np.diag(c)
    iu, ju = np.triu_indices(n, k=1)
    matched = diag[iu] + diag[ju]
    crossed = c[iu, ju] + c[ju, iu]
    return PairwiseReport(n_items=n, n_pairs=iu.size,
                          n_correct=int(np.count_nonzero(matched > crossed)),
                          n_ties=int(np.count_nonzero(matched == crossed)))


def pixcomp(orig, recon):
    """Pairwise decoding accuracy on flattened pixels of two :class:`ImageSet` objects."""
    if orig.geometry != recon.geometry or len(orig) != len(recon):
        raise GeometryMismatch(f"original {len(orig)}x{orig.geometry} vs "
                               f"reconstructed {len(recon)}x{recon.geometry}")
    return pairwise_decoding_accuracy(orig.images, recon.images)


def feature_distance(f_orig, f_recon):
    """Mean over rows of ``1 - pearson(f_orig[i], f_recon[i])``."""
    f_orig, f_recon = _check_pair(f_orig, f_recon)
    r = _rowwise_r(f_orig, f_recon, ("original", "reconstructed"))
    return float(np.mean(1.0 - r))


def write_report_csv(report, path):
    """One header line plus one data row: item_count, pair_count, correct, ties, accuracy."""
    Path(path).write_text(",".join(CSV_HEADER) + "\n" + ",".join(map(str, report.csv_row())) + "\n",
                          encoding="utf-8")
