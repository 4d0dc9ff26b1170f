"""Penalized likelihood-ratio statistic for word burstiness.

``lambda_i`` compares a binomial null (one term probability ``n_i/n`` for
every document) with the penalized approximate beta-binomial alternative
evaluated at its closed-form estimates.  Two evaluations are provided:

* :func:`plr_reference` plugs the estimates into both log-likelihoods and
  uses the exact log-gamma in the penalty;
* :func:`plr_approx` is the expanded closed form in which TF-ICF and
  BTF-IDF appear, with the penalty's ``log Gamma(eta^2)`` replaced by its
  Stirling expansion.

They differ by the Stirling remainder, about ``1/(12 eta^2)``, when
``mu = n/d``.

The penalty log-density enters the statistic once, not doubled along with
the likelihood terms; the expanded closed form is derived that way.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from . import _io
from ._parallel import pmap
from .betabinom import (
    ConcentrationParams,
    approx_loglik,
    exact_loglik,
    gamma_log_density,
    penalized_mle,
)
from .corpus import (
    TargetComplementView,
    TermDocumentMatrix,
    TermStats,
    compute_stats,
    target_complement,
)
from .errors import (
    BurstyError,
    ComplementAbsent,
    DegenerateNull,
    DomainError,
    GuardViolated,
    PrecisionNonPositive,
)
from .weights import PenaltyParams

__all__ = [
    "LOG_SQRT_2PI",
    "PlrRow",
    "PlrReport",
    "CorrelationStudy",
    "binomial_null_loglik",
    "plr_reference",
    "plr_approx",
    "stirling_log_gamma_penalty",
    "plr_report",
    "pearson",
    "correlation_study",
]

LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


def binomial_null_loglik(view: TargetComplementView) -> float:
    """Binomial log-likelihood at ``theta = n_i / n``."""
    n_ij = view.n_ij.astype(float)
    n_j = view.n_j.astype(float)
    n_i, n = n_ij.sum(), n_j.sum()
    if n_i <= 0 or n_i >= n:
        raise DegenerateNull(f"theta = {n_i:g}/{n:g} is degenerate")
    rest = n_j - n_ij
    terms = (
        gammaln(n_j + 1.0) - gammaln(n_ij + 1.0) - gammaln(rest + 1.0)
        + n_ij * math.log(n_i / n) + rest * math.log((n - n_i) / n)
    )
    return math.fsum(terms)


def plr_reference(
    view: TargetComplementView,
    penalty: PenaltyParams,
    exact: bool = False,
    term_id: int | str | None = None,
) -> float:
    """``-2 * (null - alternative)`` over documents, plus the exact gamma
    log-penalty at the closed-form precision.

    With ``exact=True`` the alternative's document terms use the exact
    beta-binomial PMF instead of the approximation (diagnostics only).
    """
    stats = view.stats
    alpha = penalized_mle(stats, penalty, term_id)
    null = binomial_null_loglik(view)
    alt = exact_loglik(view, alpha) if exact else approx_loglik(view, alpha)
    return -2.0 * (null - alt) + gamma_log_density(alpha.alpha_0i, penalty)


def _log_fact_over_power(counts: np.ndarray) -> np.ndarray:
    counts = counts.astype(float)
    return gammaln(counts + 1.0) - np.log(np.where(counts > 0, counts, 1.0))


def plr_approx(
    term: TermStats,
    d: int,
    counts,
    penalty: PenaltyParams,
    term_id: int | str | None = None,
) -> float:
    """Expanded statistic in terms of TF-ICF, BTF-IDF and collection
    statistics.

    ``counts`` are the term's per-document counts ``n_ij``; zeros may be
    included or omitted.  Requires ``eta^2 > r_i``.
    """
    eta2, r = penalty.eta2, term.r
    if eta2 <= r:
        raise GuardViolated(term_id, eta2, r)
    if term.b < 1:
        raise DomainError("b_i must be >= 1")
    counts = np.asarray(counts)
    counts = counts[counts > 0].astype(float)
    n = term.n_i + term.n_not
    b, n_i = term.b, term.n_i
    area = b + term.n_not
    per_doc = math.fsum(
        counts * math.log(n / n_i) - math.log(d / b) + _log_fact_over_power(counts)
    )
    return math.fsum([
        2.0 * per_doc,
        2.0 * n * math.log(n / area),
        2.0 * (n_i - b) * math.log(area / (d * penalty.sigma2)),
        -(2.0 * b + 1.0) * math.log(penalty.mu),
        (eta2 - 2.0 * r + 1.0) * math.log(eta2 - r),
        float(r),
        -(eta2 - 1.5) * math.log(eta2),
        -LOG_SQRT_2PI,
    ])


def stirling_log_gamma_penalty(r: int, penalty: PenaltyParams) -> float:
    """Gamma log-penalty at the closed-form precision with ``log Gamma(eta^2)``
    replaced by its leading Stirling terms."""
    eta2 = penalty.eta2
    if eta2 <= r:
        raise GuardViolated(None, eta2, r)
    return (
        (eta2 - 1.0) * math.log(eta2 - r) - math.log(penalty.mu) + r
        - (eta2 - 1.5) * math.log(eta2) - LOG_SQRT_2PI
    )


@dataclass(frozen=True)
class PlrRow:
    term: str
    lam: float
    lam_approx: float
    alpha: ConcentrationParams | None
    guard_active: bool
    excluded: bool
    reason: str = ""


@dataclass(frozen=True)
class PlrReport:
    rows: tuple[PlrRow, ...]
    penalty: PenaltyParams
    config: dict

    @property
    def excluded(self) -> list[PlrRow]:
        return [row for row in self.rows if row.excluded]

    def top(self, k: int | None = None, by: str = "lam") -> list[PlrRow]:
        """Included rows sorted by decreasing statistic."""
        kept = [row for row in self.rows if not row.excluded]
        kept.sort(key=lambda row: getattr(row, by), reverse=True)
        return kept if k is None else kept[:k]

    def _records(self, rows):
        for row in rows:
            a = row.alpha
            yield (
                row.term, row.lam, row.lam_approx,
                a.alpha_i if a else float("nan"), a.alpha_not_i if a else float("nan"),
                int(row.guard_active), row.reason if row.excluded else "",
            )

    def to_csv(self, sort: bool = False) -> str:
        rows = self.top() + self.excluded if sort else self.rows
        header = ("term", "lambda", "lambda_approx", "alpha_i", "alpha_not_i", "guard_active", "excluded")
        return _io.csv_text(header, self._records(rows), meta=self.config)

    def to_json(self, sort: bool = False) -> dict:
        rows = self.top() + self.excluded if sort else self.rows
        return {
            "schema": "bursty.plr",
            "schema_version": _io.SCHEMA_VERSION,
            "config": self.config,
            "terms": [
                {
                    "term": r.term, "lambda": r.lam, "lambda_approx": r.lam_approx,
                    "alpha_i": r.alpha.alpha_i if r.alpha else None,
                    "alpha_not_i": r.alpha.alpha_not_i if r.alpha else None,
                    "alpha_0i": r.alpha.alpha_0i if r.alpha else None,
                    "guard_active": r.guard_active, "excluded": r.excluded, "reason": r.reason,
                }
                for r in rows
            ],
        }


def _compressed_view(matrix: TermDocumentMatrix, i: int) -> TargetComplementView:
    """Documents containing term ``i`` plus one pooled document for all the
    others.  Every null and approximate-alternative term is linear in
    ``n_j`` when ``n_ij = 0``, so pooling leaves both log-likelihoods
    unchanged while costing O(b_i) instead of O(d)."""
    rows, vals = matrix.term_column(i)
    n_j = matrix.doc_lengths[rows]
    rest = matrix.n - int(n_j.sum())
    if rest > 0:
        return TargetComplementView.from_counts(np.append(vals, 0), np.append(n_j, rest), i)
    return TargetComplementView.from_counts(vals, n_j, i)


def plr_report(
    matrix: TermDocumentMatrix,
    penalty: PenaltyParams,
    exact: bool = False,
    workers: int | None = None,
) -> PlrReport:
    """Both statistics and the estimates for every term.

    Terms with ``eta^2 <= r_i`` (no positive precision estimate), a
    degenerate null or a document made only of the term are excluded with
    a reason instead of raising.
    """
    stats = compute_stats(matrix)

    def one(i):
        name = matrix.vocab[i]
        term = stats.term(i)
        guard = penalty.eta2 - term.r <= 1.0
        try:
            view = target_complement(matrix, i) if exact else _compressed_view(matrix, i)
            alpha = penalized_mle(term, penalty, name)
            lam = plr_reference(view, penalty, exact=exact, term_id=name)
            _, counts = matrix.term_column(i)
            lam_approx = plr_approx(term, stats.d, counts, penalty, name)
        except PrecisionNonPositive:
            return PlrRow(name, math.nan, math.nan, None, guard, True, "precision_nonpositive")
        except DegenerateNull:
            return PlrRow(name, math.nan, math.nan, None, guard, True, "degenerate_null")
        except ComplementAbsent:
            return PlrRow(name, math.nan, math.nan, None, guard, True, "complement_absent")
        return PlrRow(name, lam, lam_approx, alpha, guard, False)

    rows = tuple(pmap(one, range(matrix.m), workers))
    config = {"mu": penalty.mu, "sigma2": penalty.sigma2, "eta2": penalty.eta2, "exact": exact}
    return PlrReport(rows, penalty, config)


def pearson(x, y) -> float:
    """Two-pass Pearson correlation."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size != y.size or x.size < 2:
        raise DomainError("need two equal-length samples of size >= 2")
    dx = x - x.mean()
    dy = y - y.mean()
    denom = math.sqrt(float(dx @ dx) * float(dy @ dy))
    if denom == 0:
        raise DomainError("zero variance")
    return float(dx @ dy) / denom


@dataclass(frozen=True)
class CorrelationStudy:
    terms: tuple[str, ...]
    lam: np.ndarray
    tfidf_total: np.ndarray
    r: float
    excluded: tuple[str, ...]

    def to_csv(self, meta: dict | None = None) -> str:
        rows = zip(self.terms, map(float, self.lam), map(float, self.tfidf_total))
        meta = dict(meta or {}, pearson_r=self.r, excluded=len(self.excluded))
        return _io.csv_text(("term", "lambda", "tfidf_total"), rows, meta)


def correlation_study(matrix: TermDocumentMatrix, penalty: PenaltyParams) -> CorrelationStudy:
    """Pair each term's closed-form statistic with its summed TF-IDF.

    Terms violating ``eta^2 > r_i`` are left out and listed in
    ``excluded``; terms absent from the collection are ignored.
    """
    stats = compute_stats(matrix)
    names, lams, totals, excluded = [], [], [], []
    for i in range(matrix.m):
        if stats.b[i] < 1:
            continue
        term = stats.term(i)
        _, counts = matrix.term_column(i)
        try:
            lam = plr_approx(term, stats.d, counts, penalty, matrix.vocab[i])
        except BurstyError:
            excluded.append(matrix.vocab[i])
            continue
        names.append(matrix.vocab[i])
        lams.append(lam)
        totals.append(float(counts.sum()) * math.log(stats.d / term.b))
    lam_arr = np.array(lams)
    tot_arr = np.array(totals)
    return CorrelationStudy(tuple(names), lam_arr, tot_arr, pearson(lam_arr, tot_arr), tuple(excluded))
