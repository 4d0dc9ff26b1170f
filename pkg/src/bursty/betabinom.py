"""Beta-binomial likelihoods for a target-complement collection.

Covers the exact PMF, the small-``alpha_i`` / large-``alpha_not_i``
approximation, the gamma penalty on the precision ``alpha_0i``, the
closed-form penalized estimates and per-term numeric fits of the exact
model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import betaln, digamma, gammaln

from . import _io
from ._parallel import pmap
from .corpus import TargetComplementView, TermDocumentMatrix, TermStats, target_complement
from .errors import BurstyError, DomainError, PrecisionNonPositive
from .optimize import bfgs_maximize
from .weights import PenaltyParams

__all__ = [
    "ConcentrationParams",
    "FitReport",
    "AssumptionSummary",
    "bb_log_pmf",
    "bb_log_pmf_approx",
    "gamma_log_density",
    "approx_loglik",
    "penalized_loglik",
    "exact_loglik",
    "penalized_mle",
    "fit_term_mle",
    "fit_all_terms",
    "assumption_report",
    "fits_to_csv",
]


@dataclass(frozen=True)
class ConcentrationParams:
    alpha_i: float
    alpha_not_i: float
    alpha_0i: float = field(init=False)

    def __post_init__(self):
        if not (self.alpha_i > 0 and self.alpha_not_i > 0):
            raise DomainError(
                f"concentrations must be positive, got ({self.alpha_i}, {self.alpha_not_i})"
            )
        object.__setattr__(self, "alpha_i", float(self.alpha_i))
        object.__setattr__(self, "alpha_not_i", float(self.alpha_not_i))
        object.__setattr__(self, "alpha_0i", self.alpha_i + self.alpha_not_i)

    def scaled(self, c: float) -> ConcentrationParams:
        return ConcentrationParams(c * self.alpha_i, c * self.alpha_not_i)


def _check_support(n_ij, n_j):
    n_ij = np.asarray(n_ij)
    n_j = np.asarray(n_j)
    if np.any(n_ij < 0) or np.any(n_ij > n_j):
        raise DomainError("n_ij must lie in {0, ..., n_j}")
    return n_ij.astype(float), n_j.astype(float)


# Largest (values x terms) grid summed term by term in _log_rising_ratio.
_PAIRWISE_LIMIT = 1 << 20


def _log_rising_ratio(x, y, m):
    """``log[(x)_m / (y)_m]`` for rising factorials, elementwise.

    Summing ``log((x + t) / (y + t))`` factor by factor avoids subtracting
    two large log-gamma values, which costs about ``eps * lgamma(y + m)``
    in absolute accuracy.  Very large inputs fall back to log-gamma
    differences.
    """
    x, y, m = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float), np.asarray(m, float))
    top = int(m.max()) if m.size else 0
    if m.size * top > _PAIRWISE_LIMIT:
        return gammaln(x + m) - gammaln(x) - gammaln(y + m) + gammaln(y)
    t = np.arange(top, dtype=float)
    xt = x[..., None] + t
    yt = y[..., None] + t
    step = (x - y)[..., None] / yt
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(np.abs(step) < 0.5, np.log1p(step), np.log(xt) - np.log(yt))
    return np.sum(terms, axis=-1, where=t < m[..., None])


def bb_log_pmf(n_ij, n_j, params: ConcentrationParams):
    """Exact beta-binomial log-probability of ``n_ij`` target occurrences in
    a document of length ``n_j``."""
    k, n = _check_support(n_ij, n_j)
    a, b = params.alpha_i, params.alpha_not_i
    out = (
        -np.log(n + 1.0) - betaln(n - k + 1.0, k + 1.0)
        + _log_rising_ratio(a, a + b, k)
        + _log_rising_ratio(b, a + b + k, n - k)
    )
    return float(out) if np.ndim(out) == 0 else out


def bb_log_pmf_approx(n_ij, n_j, params: ConcentrationParams):
    """Log of the approximation ``n_j!/n_not! * (a_i/n_ij)^b_ij *
    a_not^n_not / a_0^n_j``.

    Accurate only when ``alpha_i << 1`` and ``alpha_not_i >> 1``; outside
    that regime it is still evaluated, just not close to the exact value.
    """
    k, n = _check_support(n_ij, n_j)
    rest = n - k
    if np.any(rest < 1):
        raise DomainError("the complement must occur in every document (n_not_ij >= 1)")
    present = k > 0
    out = (
        gammaln(n + 1.0) - gammaln(rest + 1.0)
        + np.where(present, math.log(params.alpha_i) - np.log(np.where(present, k, 1.0)), 0.0)
        + rest * math.log(params.alpha_not_i)
        - n * math.log(params.alpha_0i)
    )
    return float(out) if np.ndim(out) == 0 else out


def gamma_log_density(alpha_0i, penalty: PenaltyParams):
    """Log-density of the gamma penalty with mean ``mu`` and variance
    ``sigma2`` (shape ``mu^2/sigma2``, rate ``mu/sigma2``)."""
    x = np.asarray(alpha_0i, dtype=float)
    if np.any(x <= 0):
        raise DomainError("precision must be positive")
    k, rate = penalty.eta2, penalty.rate
    out = k * math.log(rate) - gammaln(k) + (k - 1.0) * np.log(x) - rate * x
    return float(out) if out.ndim == 0 else out


def approx_loglik(view: TargetComplementView, params: ConcentrationParams) -> float:
    """Unpenalized approximate log-likelihood of the whole collection."""
    return math.fsum(np.atleast_1d(bb_log_pmf_approx(view.n_ij, view.n_j, params)))


def penalized_loglik(
    view: TargetComplementView, params: ConcentrationParams, penalty: PenaltyParams
) -> float:
    """Approximate collection log-likelihood plus the gamma log-penalty on
    ``alpha_0i`` (added once, at collection level)."""
    return approx_loglik(view, params) + gamma_log_density(params.alpha_0i, penalty)


def exact_loglik(view: TargetComplementView, params: ConcentrationParams) -> float:
    return math.fsum(np.atleast_1d(bb_log_pmf(view.n_ij, view.n_j, params)))


def penalized_mle(
    term: TermStats, penalty: PenaltyParams, term_id: int | str | None = None
) -> ConcentrationParams:
    """Closed-form maximizer of the penalized approximate likelihood.

    ``alpha_0 = (sigma2/mu) * (eta^2 - r_i)`` split in proportion
    ``b_i : n_not_i``.  Raises :class:`PrecisionNonPositive` unless
    ``eta^2 > r_i``.
    """
    if term.b < 1:
        raise DomainError("b_i must be >= 1")
    eta2 = penalty.eta2
    r = term.r
    if eta2 <= r:
        raise PrecisionNonPositive(term_id, eta2, r)
    alpha_0 = penalty.sigma2 / penalty.mu * (eta2 - r)
    denom = term.b + term.n_not
    if term.n_not < 1:
        raise DomainError("the complement never occurs (n_not_i = 0)")
    return ConcentrationParams(alpha_0 * term.b / denom, alpha_0 * term.n_not / denom)


# --------------------------------------------------------------------------- numeric fits


@dataclass(frozen=True)
class FitReport:
    params: ConcentrationParams | None
    converged: bool
    iterations: int
    loglik: float
    boundary: bool = False
    message: str = ""
    term: str | None = None


def _grouped(view: TargetComplementView):
    """Unique (n_ij, n_j) pairs with multiplicities."""
    pairs = np.column_stack([view.n_ij, view.n_j])
    uniq, weights = np.unique(pairs, axis=0, return_counts=True)
    return uniq[:, 0].astype(float), uniq[:, 1].astype(float), weights.astype(float)


def fit_term_mle(
    view: TargetComplementView,
    init: tuple[float, float] = (1.0, 1.0),
    tol: float = 1e-8,
    max_iter: int = 500,
    term: str | None = None,
) -> FitReport:
    """Maximize the exact beta-binomial likelihood over ``(alpha_i,
    alpha_not_i)`` by BFGS in log-parameter space.

    ``tol`` bounds the gradient of the per-document mean log-likelihood.
    A failed fit is returned with ``converged=False`` rather than raised.
    ``boundary`` flags drift toward the binomial limit (``alpha_0 > 1e6``)
    or a vanishing target concentration (``alpha_i < 1e-10``).
    """
    k, n, w = _grouped(view)
    rest = n - k
    const = float(np.dot(w, gammaln(n + 1) - gammaln(k + 1) - gammaln(rest + 1)))
    scale = 1.0 / w.sum()

    def fun(u):
        a, b = np.exp(u)
        if not (np.isfinite(a) and np.isfinite(b)) or a <= 0 or b <= 0:
            return -np.inf
        terms = (
            gammaln(k + a) - gammaln(a) + gammaln(rest + b) - gammaln(b)
            + gammaln(a + b) - gammaln(n + a + b)
        )
        return scale * float(np.dot(w, terms))

    def grad(u):
        a, b = np.exp(u)
        shared = digamma(a + b) - digamma(n + a + b)
        ga = np.dot(w, digamma(k + a) - digamma(a) + shared)
        gb = np.dot(w, digamma(rest + b) - digamma(b) + shared)
        return scale * np.array([a * ga, b * gb])

    x0 = np.log(np.asarray(init, dtype=float))
    res = bfgs_maximize(fun, grad, x0, gtol=tol, max_iter=max_iter)
    a, b = np.exp(res.x)
    loglik = res.fun / scale + const
    try:
        params = ConcentrationParams(a, b)
    except DomainError:
        return FitReport(None, False, res.iterations, loglik, True, "parameters underflowed", term)
    boundary = params.alpha_0i > 1e6 or params.alpha_i < 1e-10
    return FitReport(params, res.converged, res.iterations, loglik, boundary, res.message, term)


def fit_all_terms(
    matrix: TermDocumentMatrix, workers: int | None = None, **kwargs
) -> list[FitReport]:
    """Independent exact fits for every term, in vocabulary order."""

    def one(i):
        try:
            view = target_complement(matrix, i)
        except BurstyError as exc:
            return FitReport(None, False, 0, float("nan"), False, str(exc), matrix.vocab[i])
        return fit_term_mle(view, term=matrix.vocab[i], **kwargs)

    return pmap(one, range(matrix.m), workers)


@dataclass(frozen=True)
class AssumptionSummary:
    n_terms: int
    frac_alpha_small: float
    frac_alpha_not_large: float
    thresholds: tuple[float, float]
    log_alpha_hist: tuple[np.ndarray, np.ndarray]
    log_alpha_not_hist: tuple[np.ndarray, np.ndarray]

    def to_json(self) -> dict:
        return {
            "n_terms": self.n_terms,
            "frac_alpha_small": self.frac_alpha_small,
            "frac_alpha_not_large": self.frac_alpha_not_large,
            "thresholds": list(self.thresholds),
            "log_alpha_hist": {"counts": self.log_alpha_hist[0].tolist(),
                               "edges": self.log_alpha_hist[1].tolist()},
            "log_alpha_not_hist": {"counts": self.log_alpha_not_hist[0].tolist(),
                                   "edges": self.log_alpha_not_hist[1].tolist()},
        }


def assumption_report(
    fits: list[FitReport], thresholds: tuple[float, float] = (0.1, 10.0), bins: int = 50
) -> AssumptionSummary:
    """Share of fitted terms with ``alpha_i < thresholds[0]`` and
    ``alpha_not_i > thresholds[1]``, plus natural-log histograms.

    Terms whose fit produced no parameters are left out of the counts.
    """
    fitted = [f.params for f in fits if f.params is not None]
    if not fitted:
        raise DomainError("no fitted terms")
    a = np.array([p.alpha_i for p in fitted])
    b = np.array([p.alpha_not_i for p in fitted])
    small, large = thresholds
    return AssumptionSummary(
        n_terms=len(fitted),
        frac_alpha_small=float(np.mean(a < small)),
        frac_alpha_not_large=float(np.mean(b > large)),
        thresholds=(small, large),
        log_alpha_hist=np.histogram(np.log(a), bins=bins),
        log_alpha_not_hist=np.histogram(np.log(b), bins=bins),
    )


def fits_to_csv(fits: list[FitReport], meta: dict | None = None) -> str:
    rows = []
    for f in fits:
        a = f.params.alpha_i if f.params else float("nan")
        b = f.params.alpha_not_i if f.params else float("nan")
        rows.append((f.term, a, b, int(f.converged), float(f.loglik)))
    return _io.csv_text(("term", "alpha_i", "alpha_not_i", "converged", "loglik"), rows, meta)
