"""Distribution diagnostics: histograms over [-1, 1], KL divergence,
moment summaries and gradient norms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

HIST_RANGE = (-1.0, 1.0)
DEFAULT_BINS = 20
KL_EPS = 1e-10


@dataclass(frozen=True)
class Histogram:
    """Uniform-bin histogram over [-1, 1] with normalized probabilities."""

    bin_count: int
    counts: np.ndarray
    probabilities: np.ndarray

    def __post_init__(self):
        if self.counts.shape != (self.bin_count,) or self.probabilities.shape != (self.bin_count,):
            raise ValueError("histogram arrays do not match bin_count")
        total = float(self.probabilities.sum())
        if abs(total - 1.0) > 1e-12 or np.any(self.probabilities < 0):
            raise ValueError(f"probabilities must be nonnegative and sum to 1, sum={total}")


@dataclass(frozen=True)
class DistributionSummary:
    """Mean, population std and quartiles of a sample set."""

    mean: float
    std: float
    median: float
    q1: float
    q3: float

    def __post_init__(self):
        if not (self.q1 <= self.median <= self.q3):
            raise ValueError(f"quartiles out of order: {self.q1}, {self.median}, {self.q3}")
        if self.std < 0:
            raise ValueError(f"std must be >= 0, got {self.std}")


def histogram(samples, bins: int = DEFAULT_BINS) -> Histogram:
    """Bin samples into `bins` uniform bins over [-1, 1].

    Values are clamped into range first; the last bin is right-closed.
    """
    arr = np.asarray(samples, dtype=float).ravel()
    if arr.size == 0:
        raise ValueError("cannot histogram an empty sample set")
    if bins < 1:
        raise ValueError(f"bins must be >= 1, got {bins}")
    arr = np.clip(arr, *HIST_RANGE)
    counts, _ = np.histogram(arr, bins=bins, range=HIST_RANGE)
    return Histogram(bin_count=bins, counts=counts, probabilities=counts / arr.size)


def kl_divergence(p: Histogram, q: Histogram, eps: float = KL_EPS) -> float:
    """KL(p || q) with symmetric eps smoothing, clamped at 0 from below."""
    if p.bin_count != q.bin_count:
        raise ValueError(f"bin mismatch: {p.bin_count} vs {q.bin_count}")
    if eps <= 0:
        raise ValueError(f"eps must be > 0, got {eps}")
    pp = p.probabilities + eps
    qq = q.probabilities + eps
    return max(0.0, float(np.sum(p.probabilities * np.log(pp / qq))))


def summarize(samples) -> DistributionSummary:
    """Mean, population std, median and quartiles (linear interpolation)."""
    arr = np.asarray(samples, dtype=float).ravel()
    if arr.size == 0:
        raise ValueError("cannot summarize an empty sample set")
    q1, med, q3 = np.quantile(arr, [0.25, 0.5, 0.75])
    return DistributionSummary(
        mean=float(arr.mean()),
        std=float(arr.std()),
        median=float(med),
        q1=float(q1),
        q3=float(q3),
    )


def grad_norm(grads) -> float:
    """Euclidean norm over every entry of an array or list of arrays."""
    if isinstance(grads, np.ndarray):
        grads = [grads]
    total = 0.0
    for g in grads:
        arr = np.asarray(g, dtype=float)
        total += float(np.sum(arr * arr))
    return float(np.sqrt(total))
