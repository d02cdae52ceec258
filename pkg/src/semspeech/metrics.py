"""Recognition and distribution metrics: CER, WER, FDSD and KDSD."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError, UndefinedRateError

# Acceptability thresholds from a listening survey run with a particular
# recognizer as feature extractor; values do not transfer to other extractors.
FDSD_ACCEPTABLE = 10.0
KDSD_ACCEPTABLE = 0.012


@dataclass(frozen=True)
class EditOps:
    substitutions: int
    deletions: int
    insertions: int
    reference_length: int

    @property
    def distance(self) -> int:
        return self.substitutions + self.deletions + self.insertions


def edit_ops(ref, hyp) -> EditOps:
    """Unit-cost Levenshtein alignment with operation counts.

    Among minimal alignments the backtrace prefers substitution (or match),
    then deletion, then insertion.
    """
    ref, hyp = list(ref), list(hyp)
    n, m = len(ref), len(hyp)
    d = np.zeros((n + 1, m + 1), dtype=np.int64)
    d[:, 0] = np.arange(n + 1)
    d[0, :] = np.arange(m + 1)
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            cost = 0 if ref[i - 1] == hyp[j - 1] else 1
            d[i, j] = min(d[i - 1, j - 1] + cost, d[i - 1, j] + 1, d[i, j - 1] + 1)
    s = dl = ins = 0
    i, j = n, m
    while i > 0 or j > 0:
        if i > 0 and j > 0:
            cost = 0 if ref[i - 1] == hyp[j - 1] else 1
            if d[i, j] == d[i - 1, j - 1] + cost:
                s += cost
                i, j = i - 1, j - 1
                continue
        if i > 0 and d[i, j] == d[i - 1, j] + 1:
            dl += 1
            i -= 1
        else:
            ins += 1
            j -= 1
    return EditOps(s, dl, ins, n)


def _prep(text: str) -> str:
    return " ".join(text.lower().split())


def cer(ref_text: str, hyp_text: str) -> float:
    """Character error rate; spaces count as characters."""
    ref, hyp = _prep(ref_text), _prep(hyp_text)
    if not ref:
        raise UndefinedRateError("CER undefined for an empty reference")
    ops = edit_ops(ref, hyp)
    return ops.distance / ops.reference_length


def wer(ref_text: str, hyp_text: str) -> float:
    ref, hyp = _prep(ref_text).split(), _prep(hyp_text).split()
    if not ref:
        raise UndefinedRateError("WER undefined for an empty reference")
    ops = edit_ops(ref, hyp)
    return ops.distance / ops.reference_length


def corpus_error_rates(refs, hyps) -> tuple[float, float]:
    """Corpus CER and WER: total edits over total reference length."""
    c_err = c_n = w_err = w_n = 0
    for r, h in zip(refs, hyps, strict=True):
        r, h = _prep(r), _prep(h)
        co = edit_ops(r, h)
        wo = edit_ops(r.split(), h.split())
        c_err += co.distance
        c_n += co.reference_length
        w_err += wo.distance
        w_n += wo.reference_length
    if c_n == 0 or w_n == 0:
        raise UndefinedRateError("empty reference corpus")
    return c_err / c_n, w_err / w_n


def sqrtm_psd(a) -> np.ndarray:
    """Principal square root of a symmetric PSD matrix via eigendecomposition."""
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidArgumentError("matrix must be square")
    if np.max(np.abs(a - a.T), initial=0.0) > 1e-8:
        raise InvalidArgumentError("matrix is not symmetric")
    w, v = np.linalg.eigh((a + a.T) / 2.0)
    if w.size and w.min() < -1e-10 * max(1.0, abs(w).max()):
        raise InvalidArgumentError(f"matrix has a negative eigenvalue {w.min():.3e}")
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.T


def _check_pair(d, d_hat):
    d = np.asarray(d, dtype=np.float64)
    d_hat = np.asarray(d_hat, dtype=np.float64)
    if d.ndim != 2 or d_hat.ndim != 2 or d.shape[1] != d_hat.shape[1]:
        raise InvalidArgumentError(f"feature matrices do not share a width: {d.shape} vs {d_hat.shape}")
    if d.shape[0] < 2 or d_hat.shape[0] < 2:
        raise InvalidArgumentError("need at least two rows in each feature matrix")
    if not (np.all(np.isfinite(d)) and np.all(np.isfinite(d_hat))):
        raise InvalidArgumentError("feature matrices must be finite")
    return d, d_hat


def fdsd(d, d_hat) -> float:
    """Frechet distance between Gaussian fits of two feature matrices (rows = samples)."""
    d, d_hat = _check_pair(d, d_hat)
    mu1, mu2 = d.mean(axis=0), d_hat.mean(axis=0)
    s1 = np.atleast_2d(np.cov(d, rowvar=False))
    s2 = np.atleast_2d(np.cov(d_hat, rowvar=False))
    r1 = sqrtm_psd(s1)
    middle = r1 @ s2 @ r1
    cross = sqrtm_psd((middle + middle.T) / 2.0)
    total = float(np.sum((mu1 - mu2) ** 2) + np.trace(s1) + np.trace(s2) - 2.0 * np.trace(cross))
    return math.sqrt(max(total, 0.0))


def poly_kernel(a, b) -> np.ndarray:
    """(a b^T / V + 1)^3 for row matrices a, b of width V."""
    v = a.shape[1]
    return (a @ b.T / v + 1.0) ** 3


def kdsd(d, d_hat) -> float:
    """Unbiased squared MMD with the cubic polynomial kernel (may be slightly negative)."""
    d, d_hat = _check_pair(d, d_hat)
    u, uh = d.shape[0], d_hat.shape[0]
    kxx = poly_kernel(d, d)
    kyy = poly_kernel(d_hat, d_hat)
    kxy = poly_kernel(d, d_hat)
    xx = (kxx.sum() - np.trace(kxx)) / (u * (u - 1))
    yy = (kyy.sum() - np.trace(kyy)) / (uh * (uh - 1))
    return float(xx + yy - 2.0 * kxy.sum() / (u * uh))
