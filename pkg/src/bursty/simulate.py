"""Seeded generators for Dirichlet-multinomial corpora and beta-binomial
target-complement collections.

Randomness comes from numpy's Philox (a 64-bit-keyed counter-based
generator).  Every document draws from its own stream keyed by
``(seed, 1, j)`` and the concentration vector from ``(seed, 0)``, so
output depends only on the configuration and seed.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .corpus import TargetComplementView, TermDocumentMatrix
from .errors import DomainError, MalformedInput

__all__ = ["SimConfig", "stream", "draw_alpha", "dirichlet", "sample_dm_corpus", "sample_bb_collection"]


def stream(seed: int, *key: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, *key])))


@dataclass(frozen=True)
class SimConfig:
    """Dirichlet-multinomial corpus settings.

    ``doc_length`` is a fixed length or ``(trials, p)`` for binomial
    lengths.  ``alpha`` is an explicit concentration vector; when it is
    empty, ``m`` values are drawn from Gamma(``alpha_gamma[0]``,
    scale=``alpha_gamma[1]``).
    """

    m: int = 250
    d: int = 500
    doc_length: int | tuple[int, float] = (150, 0.5)
    alpha: tuple[float, ...] = ()
    alpha_gamma: tuple[float, float] = (0.5, 0.3)
    seed: int = 0

    KEYS = ("m", "d", "doc_length", "alpha", "alpha_gamma", "seed")

    def __post_init__(self):
        if isinstance(self.doc_length, list):
            object.__setattr__(self, "doc_length", tuple(self.doc_length))
        object.__setattr__(self, "alpha", tuple(float(a) for a in self.alpha))
        object.__setattr__(self, "alpha_gamma", tuple(float(a) for a in self.alpha_gamma))
        if self.m < 1 or self.d < 1:
            raise DomainError("m and d must be positive")
        if self.alpha:
            if len(self.alpha) != self.m or min(self.alpha) <= 0:
                raise DomainError("alpha must hold m positive values")
        elif min(self.alpha_gamma) <= 0:
            raise DomainError("gamma shape and scale must be positive")
        if isinstance(self.doc_length, tuple):
            trials, p = self.doc_length
            if trials < 1 or not 0 < p <= 1:
                raise DomainError("binomial length needs trials >= 1 and 0 < p <= 1")
        elif self.doc_length < 1:
            raise DomainError("doc_length must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise DomainError("seed must be an unsigned 64-bit integer")

    def to_json(self) -> dict:
        out = asdict(self)
        out["doc_length"] = list(self.doc_length) if isinstance(self.doc_length, tuple) else self.doc_length
        out["alpha"] = list(self.alpha)
        out["alpha_gamma"] = list(self.alpha_gamma)
        return out

    @classmethod
    def from_json(cls, obj: dict) -> SimConfig:
        unknown = set(obj) - set(cls.KEYS)
        if unknown:
            raise MalformedInput(f"unknown simulation keys: {sorted(unknown)}")
        obj = dict(obj)
        if isinstance(obj.get("doc_length"), list):
            obj["doc_length"] = tuple(obj["doc_length"])
        for key in ("alpha", "alpha_gamma"):
            if key in obj:
                obj[key] = tuple(obj[key])
        return cls(**obj)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), sort_keys=True, indent=2) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> SimConfig:
        try:
            return cls.from_json(json.loads(Path(path).read_text()))
        except json.JSONDecodeError as exc:
            raise MalformedInput(str(exc), str(path), exc.lineno) from exc


def draw_alpha(config: SimConfig) -> np.ndarray:
    if config.alpha:
        return np.array(config.alpha)
    shape, scale = config.alpha_gamma
    alpha = stream(config.seed, 0).gamma(shape, scale, size=config.m)
    # shape < 1 gammas put mass at denormal values; keep Dirichlet draws finite
    return np.maximum(alpha, 1e-300)


def _doc_length(config: SimConfig, rng: np.random.Generator) -> int:
    if not isinstance(config.doc_length, tuple):
        return int(config.doc_length)
    trials, p = config.doc_length
    while True:
        length = int(rng.binomial(trials, p))
        if length >= 1:
            return length


def dirichlet(alpha, rng: np.random.Generator) -> np.ndarray:
    """One Dirichlet draw, renormalized so the components sum to 1 to
    within rounding."""
    theta = rng.dirichlet(alpha)
    return theta / theta.sum()


def sample_dm_corpus(config: SimConfig) -> TermDocumentMatrix:
    """``theta_j ~ Dir(alpha)``, ``n_j ~ Mult(n_j, theta_j)`` per document.

    The vocabulary keeps all ``m`` terms (``t000``...), including any that
    happen not to occur; call ``.compact()`` before computing weights.
    """
    alpha = draw_alpha(config)
    rows = []
    for j in range(config.d):
        rng = stream(config.seed, 1, j)
        length = _doc_length(config, rng)
        rows.append(rng.multinomial(length, dirichlet(alpha, rng)))
    counts = sp.csr_matrix(np.vstack(rows))
    width = len(str(config.m - 1))
    vocab = tuple(f"t{i:0{width}d}" for i in range(config.m))
    docs = tuple(f"d{j:0{len(str(config.d - 1))}d}" for j in range(config.d))
    return TermDocumentMatrix(vocab, docs, counts)


def sample_bb_collection(
    d: int, n_j, alpha_i: float, alpha_not_i: float, seed: int
) -> TargetComplementView:
    """Per document ``theta ~ Beta(alpha_i, alpha_not_i)`` and
    ``n_ij ~ Bin(n_j, theta)``.  ``n_j`` is a length or a length per
    document.  Documents made only of the target are kept."""
    if d < 1 or alpha_i <= 0 or alpha_not_i <= 0:
        raise DomainError("need d >= 1 and positive concentrations")
    lengths = np.broadcast_to(np.asarray(n_j, dtype=np.int64), (d,)).copy()
    if lengths.min() < 1:
        raise DomainError("document lengths must be >= 1")
    counts = np.empty(d, dtype=np.int64)
    for j in range(d):
        rng = stream(seed, 1, j)
        counts[j] = rng.binomial(lengths[j], rng.beta(alpha_i, alpha_not_i))
    return TargetComplementView.from_counts(counts, lengths, require_complement=False)
