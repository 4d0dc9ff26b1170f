"""Term-weighting schemes: TF-IDF, BTF-IDF, TF-ICF and the per-document
likelihood-ratio contribution ``lambda_ij`` with its sigmoid transform.

All logarithms are natural.  The cell-level functions accept scalars or
broadcastable numpy arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np
import scipy.sparse as sp
from scipy.special import gammaln

from . import _io
from .corpus import CollectionStats, TermDocumentMatrix, TermStats, compute_stats
from .errors import BurstyError, DomainError, InvalidPenalty

__all__ = [
    "SCHEMES",
    "PenaltyParams",
    "WeightMatrix",
    "LambdaConstants",
    "tf_idf",
    "btf_idf",
    "tf_icf",
    "lambda_ij",
    "sigmoid",
    "weigh_collection",
    "weight_blocks",
]

SCHEMES = ("tfidf", "btfidf", "tficf", "lambda", "sigmoid_lambda")


@dataclass(frozen=True)
class PenaltyParams:
    """Gamma penalty on the precision, by mean ``mu`` and variance ``sigma2``."""

    mu: float
    sigma2: float
    eta2: float = field(init=False)

    def __post_init__(self):
        if not (self.mu > 0 and math.isfinite(self.mu)):
            raise InvalidPenalty(f"mu must be positive, got {self.mu}")
        if not (self.sigma2 > 0 and math.isfinite(self.sigma2)):
            raise InvalidPenalty(f"sigma2 must be positive, got {self.sigma2}")
        object.__setattr__(self, "mu", float(self.mu))
        object.__setattr__(self, "sigma2", float(self.sigma2))
        object.__setattr__(self, "eta2", self.mu * self.mu / self.sigma2)

    @property
    def shape(self) -> float:
        return self.eta2

    @property
    def rate(self) -> float:
        return self.mu / self.sigma2


def tf_idf(n_ij, b_i, d):
    """``n_ij * log(d / b_i)``."""
    return n_ij * np.log(d / np.asarray(b_i, dtype=float))


def btf_idf(n_ij, b_i, d):
    """``b_ij * log(d / b_i)`` with ``b_ij = [n_ij > 0]``."""
    return (np.asarray(n_ij) > 0) * np.log(d / np.asarray(b_i, dtype=float))


def tf_icf(n_ij, n_i, n):
    """``n_ij * log(n / n_i)``."""
    return n_ij * np.log(n / np.asarray(n_i, dtype=float))


def sigmoid(x):
    """Logistic function, evaluated without overflow for any sign of ``x``."""
    arr = np.asarray(x, dtype=float)
    out = np.empty_like(arr)
    pos = arr >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-arr[pos]))
    ex = np.exp(arr[~pos])
    out[~pos] = ex / (1.0 + ex)
    return float(out) if out.ndim == 0 else out


def _log_fact_over_power(n_ij):
    """``log(n_ij! / n_ij ** b_ij)`` with ``0 ** 0 = 1``."""
    n_ij = np.asarray(n_ij, dtype=float)
    return gammaln(n_ij + 1.0) - np.log(np.where(n_ij > 0, n_ij, 1.0))


@dataclass(frozen=True, eq=False)
class LambdaConstants:
    """Per-term pieces of ``lambda_ij`` that depend only on collection
    statistics and the penalty, computed once per term.

    With ``A_i = b_i + n_not_i``::

        lambda_ij = n_ij*icf_i - b_ij*idf_i + log(n_ij!/n_ij^b_ij)
                    + (n_ij - b_ij)*excess_i + n_j*length_i
                    - b_ij*log(mu) + offset_i

    where ``offset_i`` collects the ``1/(2d)``-scaled block.
    """

    icf: np.ndarray
    idf: np.ndarray
    excess: np.ndarray
    length: np.ndarray
    log_mu: float
    offset: np.ndarray
    guard_active: np.ndarray

    @classmethod
    def from_stats(cls, stats: CollectionStats, penalty: PenaltyParams) -> LambdaConstants:
        b = stats.b.astype(float)
        n_i = stats.n_i.astype(float)
        if np.any(b < 1):
            raise DomainError("every term needs b_i >= 1 (compact the matrix first)")
        n, d = float(stats.n), float(stats.d)
        area = b + (n - n_i)
        r = n_i - b + 1.0
        eta2 = penalty.eta2
        gap = eta2 - r
        block = (
            (eta2 - 2.0 * r + 1.0) * np.log(np.maximum(1.0, gap))
            - (eta2 - 1.5) * math.log(eta2)
            + r
        )
        log_mu = math.log(penalty.mu)
        return cls(
            icf=np.log(n / n_i),
            idf=np.log(d / b),
            excess=np.log(area / (d * penalty.sigma2)),
            length=np.log(n / area),
            log_mu=log_mu,
            offset=(block - log_mu) / (2.0 * d),
            guard_active=gap <= 1.0,
        )

    def cell(self, i, n_ij, n_j):
        n_ij = np.asarray(n_ij, dtype=float)
        b_ij = (n_ij > 0).astype(float)
        return (
            n_ij * self.icf[i]
            - b_ij * self.idf[i]
            + _log_fact_over_power(n_ij)
            + (n_ij - b_ij) * self.excess[i]
            + n_j * self.length[i]
            - b_ij * self.log_mu
            + self.offset[i]
        )

    def dense(self, counts: sp.csr_matrix, n_j: np.ndarray) -> np.ndarray:
        """Dense ``(rows, m)`` block of ``lambda_ij`` for CSR document rows."""
        out = np.multiply.outer(np.asarray(n_j, dtype=float), self.length)
        out += self.offset
        coo = counts.tocoo()
        k = coo.data.astype(float)
        cols = coo.col
        out[coo.row, cols] += (
            k * self.icf[cols]
            - self.idf[cols]
            + _log_fact_over_power(k)
            + (k - 1.0) * self.excess[cols]
            - self.log_mu
        )
        return out


def lambda_ij(n_ij, n_j, term: TermStats, d: int, penalty: PenaltyParams):
    """Contribution of one term in one document to the PLR statistic.

    Uses ``max(1, eta^2 - r_i)`` inside the logarithm of the constant
    block, so it is defined even where the closed-form precision is not.
    """
    if term.b < 1:
        raise DomainError("b_i must be >= 1")
    n = term.n_i + term.n_not
    if term.n_i >= n:
        raise DomainError("need n_i < n")
    stats = CollectionStats(
        d=d, m=1, n=n, doc_lengths=np.empty(0),
        b=np.array([term.b]), n_i=np.array([term.n_i]),
    )
    value = LambdaConstants.from_stats(stats, penalty).cell(0, n_ij, n_j)
    return float(value) if np.ndim(value) == 0 else value


@dataclass(frozen=True, eq=False)
class WeightMatrix:
    """Weights laid out documents-by-terms, like the count matrix.

    ``values`` is CSR for the count-proportional schemes (zero where the
    term is absent) and a dense array for the lambda schemes.
    """

    scheme: str
    vocab: tuple[str, ...]
    docs: tuple[str, ...]
    values: sp.csr_matrix | np.ndarray
    config: dict = field(default_factory=dict)

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def get(self, i: int, j: int) -> float:
        return float(self.values[j, i])

    def to_dense(self) -> np.ndarray:
        return self.values.toarray() if sp.issparse(self.values) else np.asarray(self.values)

    def to_csv(self) -> str:
        if sp.issparse(self.values):
            coo = self.values.tocoo()
            order = np.lexsort((coo.row, coo.col))
            rows = (
                (self.vocab[i], self.docs[j], float(w))
                for i, j, w in zip(coo.col[order], coo.row[order], coo.data[order])
            )
        else:
            vals = self.values
            rows = (
                (self.vocab[i], self.docs[j], float(vals[j, i]))
                for i in range(vals.shape[1]) for j in range(vals.shape[0])
            )
        return _io.csv_text(("term", "doc", "weight"), rows, meta=self.config)

    def to_json(self) -> dict:
        dense = not sp.issparse(self.values)
        coo = sp.coo_matrix(self.values)
        if dense:
            cells = [[int(i), int(j), float(self.values[j, i])]
                     for i in range(self.shape[1]) for j in range(self.shape[0])]
        else:
            order = np.lexsort((coo.row, coo.col))
            cells = [[int(i), int(j), float(w)]
                     for i, j, w in zip(coo.col[order], coo.row[order], coo.data[order])]
        return {
            "schema": "bursty.weights",
            "schema_version": _io.SCHEMA_VERSION,
            "config": self.config,
            "scheme": self.scheme,
            "vocab": list(self.vocab),
            "docs": list(self.docs),
            "dense": dense,
            "triplets": cells,
        }


def _normalize_scheme(scheme: str) -> str:
    key = scheme.replace("-", "_").lower()
    if key not in SCHEMES:
        raise DomainError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")
    return key


def _sparse_weights(counts: sp.csr_matrix, factor: np.ndarray, binary: bool) -> sp.csr_matrix:
    out = counts.astype(float)
    if binary:
        out.data[:] = 1.0
    out.data *= factor[out.indices]
    return out


def weight_blocks(
    matrix: TermDocumentMatrix,
    scheme: str,
    stats: CollectionStats | None = None,
    penalty: PenaltyParams | None = None,
    block_size: int = 512,
) -> Iterator[tuple[slice, sp.csr_matrix | np.ndarray]]:
    """Yield ``(row_slice, weights)`` blocks over the documents of ``matrix``.

    ``stats`` defaults to the matrix's own statistics; pass training-split
    statistics to weight held-out documents.  Lambda blocks are dense, so
    large collections should be consumed block by block.
    """
    scheme = _normalize_scheme(scheme)
    stats = compute_stats(matrix) if stats is None else stats
    if stats.m != matrix.m:
        raise DomainError("statistics and matrix disagree on vocabulary size")
    if scheme in ("tfidf", "btfidf", "tficf"):
        with np.errstate(divide="ignore"):
            if scheme == "tficf":
                factor = np.log(stats.n / stats.n_i.astype(float))
            else:
                factor = np.log(stats.d / stats.b.astype(float))
        if np.any(~np.isfinite(factor)):
            raise DomainError("a vocabulary term never occurs in the reference statistics")
        weights = _sparse_weights(matrix.counts, factor, binary=scheme == "btfidf")
        yield slice(0, matrix.d), weights
        return
    if penalty is None:
        raise InvalidPenalty("lambda schemes need penalty parameters")
    const = LambdaConstants.from_stats(stats, penalty)
    for start in range(0, matrix.d, block_size):
        rows = slice(start, min(start + block_size, matrix.d))
        try:
            block = const.dense(matrix.counts[rows], matrix.doc_lengths[rows])
        except BurstyError as exc:
            raise type(exc)(f"documents {rows.start}..{rows.stop}: {exc}") from exc
        if scheme == "sigmoid_lambda":
            block = sigmoid(block)
        yield rows, block


def weigh_collection(
    matrix: TermDocumentMatrix,
    scheme: str,
    penalty: PenaltyParams | None = None,
    stats: CollectionStats | None = None,
) -> WeightMatrix:
    scheme = _normalize_scheme(scheme)
    blocks = [w for _, w in weight_blocks(matrix, scheme, stats, penalty)]
    if scheme in ("tfidf", "btfidf", "tficf"):
        values = blocks[0]
    else:
        values = np.vstack(blocks) if blocks else np.empty((0, matrix.m))
    config = {"scheme": scheme}
    if penalty is not None:
        config.update(mu=penalty.mu, sigma2=penalty.sigma2)
    return WeightMatrix(scheme, matrix.vocab, matrix.docs, values, config)
