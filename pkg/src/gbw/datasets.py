"""Synthetic matrix generators and covariance ingestion.

Generators take an explicit ``numpy.random.Generator`` so that every
experiment is reproducible from a single seed.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .linalg import SpdMatrix, SpdValidationError, _sym

__all__ = [
    "random_orthogonal",
    "random_sym",
    "random_spd",
    "make_spd_with_condition",
    "two_class_spd_dataset",
    "gmm_synthetic",
    "CovarianceSample",
    "ingest_covariances",
]


def random_orthogonal(rng: np.random.Generator, n: int) -> np.ndarray:
    """Haar-distributed orthogonal matrix via QR with sign correction."""
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.sign(np.diag(r))


def random_sym(rng: np.random.Generator, n: int, scale: float = 1.0) -> np.ndarray:
    """Random symmetric matrix with independent Gaussian entries."""
    return _sym(rng.standard_normal((n, n))) * scale


def random_spd(rng: np.random.Generator, n: int, cond: float | None = None) -> SpdMatrix:
    """Random SPD matrix.

    Without ``cond``, eigenvalues are drawn uniformly from [0.5, 2.5] in a
    random orthogonal basis.  With ``cond``, eigenvalues are log-spaced in
    [1/sqrt(cond), sqrt(cond)] so the condition number is exactly ``cond``.
    """
    if cond is None:
        w = rng.uniform(0.5, 2.5, size=n)
    else:
        if cond < 1.0:
            raise ValueError("cond must be >= 1")
        half = 0.5 * np.log10(cond)
        w = np.logspace(-half, half, num=n)
    q = random_orthogonal(rng, n)
    return SpdMatrix(_sym((q * w) @ q.T))


def make_spd_with_condition(rng: np.random.Generator, n: int, cond: float) -> SpdMatrix:
    """SPD matrix with eigenvalues log-spaced in [1/sqrt(cond), sqrt(cond)]."""
    return random_spd(rng, n, cond=cond)


def two_class_spd_dataset(
    rng: np.random.Generator,
    n: int,
    per_class: int,
    ridge: float = 0.1,
) -> tuple[list[SpdMatrix], np.ndarray]:
    """Two classes of SPD matrices with distinct spectra.

    Each sample is Q^T B_k Q + ridge * I for a fresh random orthogonal Q,
    where B_0 and B_1 are fixed diagonal matrices with separated eigenvalue
    ranges.  Returns the samples and the 0/1 label vector.
    """
    b0 = np.diag(np.linspace(0.5, 1.5, n))
    b1 = np.diag(np.linspace(2.5, 4.0, n))
    samples: list[SpdMatrix] = []
    labels = np.repeat([0, 1], per_class)
    for lab in labels:
        q = random_orthogonal(rng, n)
        base = b0 if lab == 0 else b1
        samples.append(SpdMatrix(_sym(q.T @ base @ q) + ridge * np.eye(n)))
    return samples, labels


def gmm_synthetic(
    rng: np.random.Generator,
    n: int,
    n_samples: int,
    k: int = 2,
) -> np.ndarray:
    """Zero-mean Gaussian mixture draws with well-separated component spectra.

    Component j has covariance Q_j diag(w_j) Q_j^T with eigenvalue ranges
    spread multiplicatively, so the precision matrices the fit recovers are
    distinguishable.  Rows are shuffled; the returned array is (n_samples, n).
    """
    covs = []
    for j in range(k):
        scale = 0.5 * (2.5**j)
        w = rng.uniform(scale, 2.0 * scale, size=n)
        q = random_orthogonal(rng, n)
        covs.append(_sym((q * w) @ q.T))
    counts = np.full(k, n_samples // k)
    counts[: n_samples % k] += 1
    chunks = [
        rng.multivariate_normal(np.zeros(n), covs[j], size=counts[j]) for j in range(k)
    ]
    data = np.vstack(chunks)
    rng.shuffle(data)
    return data


@dataclass(frozen=True)
class CovarianceSample:
    """One ingested covariance with its class label."""

    label: str
    cov: SpdMatrix


def ingest_covariances(
    path,
    group_size: int = 50,
    ridge_scale: float = 1e-6,
) -> list[CovarianceSample]:
    """Build per-label covariance matrices from a delimited vector file.

    The file holds one observation per row: a class label followed by the
    feature vector.  Rows of each label are taken in file order and split
    into groups of ``group_size``; each full group becomes one sample
    covariance (denominator N-1) with a ridge of
    ``ridge_scale * mean(diag)`` added to the diagonal so the output is
    strictly PD even for degenerate groups.  A trailing group smaller than
    two observations is dropped.

    Raises ValueError on malformed rows, inconsistent dimensions, or a
    ``group_size`` below 2.
    """
    if group_size < 2:
        raise ValueError(f"group_size must be >= 2, got {group_size}")
    by_label: dict[str, list[np.ndarray]] = {}
    order: list[str] = []
    with open(path, newline="") as fh:
        for i, row in enumerate(csv.reader(fh)):
            if not row:
                continue
            if len(row) < 3:
                raise ValueError(f"row {i}: expected label plus at least 2 features")
            label = row[0].strip()
            try:
                vec = np.array([float(v) for v in row[1:]], dtype=float)
            except ValueError as exc:
                raise ValueError(f"row {i}: non-numeric feature value") from exc
            if not np.all(np.isfinite(vec)):
                raise ValueError(f"row {i}: non-finite feature value")
            if label not in by_label:
                by_label[label] = []
                order.append(label)
            prev = by_label[label]
            if prev and prev[0].shape != vec.shape:
                raise ValueError(f"row {i}: inconsistent feature dimension")
            prev.append(vec)
    out: list[CovarianceSample] = []
    for label in order:
        rows = by_label[label]
        for start in range(0, len(rows), group_size):
            chunk = rows[start : start + group_size]
            if len(chunk) < 2:
                continue
            block = np.vstack(chunk)
            cov = np.cov(block, rowvar=False)
            cov = np.atleast_2d(_sym(cov))
            mean_diag = float(np.mean(np.diag(cov)))
            eps = ridge_scale * (mean_diag if mean_diag > 0.0 else 1.0)
            try:
                spd = SpdMatrix(cov + eps * np.eye(cov.shape[0]))
            except SpdValidationError:
                floor = ridge_scale * max(mean_diag, 1.0) + abs(
                    float(np.linalg.eigvalsh(cov)[0])
                )
                spd = SpdMatrix(cov + floor * np.eye(cov.shape[0]))
            out.append(CovarianceSample(label=label, cov=spd))
    return out
