"""Word-burstiness statistics: beta-binomial models with a gamma penalty on
the precision, a penalized likelihood-ratio statistic per term, the
TF-IDF family of weights, corpus simulators and a Naive Bayes harness."""

from .betabinom import (
    ConcentrationParams,
    FitReport,
    approx_loglik,
    assumption_report,
    bb_log_pmf,
    bb_log_pmf_approx,
    exact_loglik,
    fit_all_terms,
    fit_term_mle,
    gamma_log_density,
    penalized_loglik,
    penalized_mle,
)
from .classify import (
    ClassificationReport,
    NbModel,
    evaluate,
    fit_evaluate,
    predict,
    sensitivity_grid,
    train_nb,
)
from .corpus import (
    CollectionStats,
    TargetComplementView,
    TermDocumentMatrix,
    TermStats,
    build_matrix,
    compute_stats,
    preprocess,
    split,
    target_complement,
)
from .errors import (
    AllDocumentsEmpty,
    BurstyError,
    ComplementAbsent,
    DegenerateNull,
    DomainError,
    GuardViolated,
    InvalidPenalty,
    MalformedInput,
    NotConverged,
    PrecisionNonPositive,
    SingleClass,
)
from .plr import correlation_study, plr_approx, plr_reference, plr_report
from .simulate import SimConfig, sample_bb_collection, sample_dm_corpus
from .weights import PenaltyParams, WeightMatrix, lambda_ij, sigmoid, weigh_collection

__version__ = "0.1.0"
