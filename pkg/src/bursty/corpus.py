"""Bag-of-words collections: preprocessing, the sparse term-document
matrix, collection statistics and the target-complement view.

Notation follows the usual term/document convention: ``i`` indexes terms
(``0 <= i < m``) and ``j`` indexes documents (``0 <= j < d``).  The count
matrix itself is stored documents-by-terms (CSR, one row per document),
which is the layout every downstream consumer iterates over.
"""

from __future__ import annotations

import csv
import re
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from . import _io
from .errors import AllDocumentsEmpty, ComplementAbsent, DomainError, MalformedInput

__all__ = [
    "preprocess",
    "load_stopwords",
    "default_stopwords",
    "TermDocumentMatrix",
    "TermStats",
    "CollectionStats",
    "TargetComplementView",
    "build_matrix",
    "compute_stats",
    "target_complement",
    "split",
    "read_directory",
    "read_delimited",
    "read_triplets",
    "write_triplets",
    "matrix_to_json",
    "matrix_from_json",
    "stats_to_json",
]

# Digits and apostrophes are deleted in place ("x1y" -> "xy", "don't" -> "dont");
# any other non-letter separates tokens ("cat--and" -> "cat and").
_DELETE = re.compile(r"[0-9'’]")
_SEPARATE = re.compile(r"[^a-z\s]+")


def preprocess(text: str, stopwords: Iterable[str] = frozenset()) -> list[str]:
    """Lowercase, strip non-alphabetic characters, split on whitespace and
    drop stopwords.  Token order is preserved."""
    text = _SEPARATE.sub(" ", _DELETE.sub("", text.lower()))
    stop = stopwords if isinstance(stopwords, (set, frozenset)) else frozenset(stopwords)
    return [tok for tok in text.split() if tok not in stop]


def load_stopwords(path: str | Path) -> frozenset[str]:
    """One word per line; blank lines and ``#`` comments are ignored."""
    words = set()
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line and not line.startswith("#"):
                words.add(line.lower())
    return frozenset(words)


def default_stopwords() -> frozenset[str]:
    """The bundled English list (the 318-word Glasgow list shipped by scikit-learn)."""
    ref = resources.files("bursty") / "data" / "english_stopwords.txt"
    with resources.as_file(ref) as path:
        return load_stopwords(path)


@dataclass(frozen=True, eq=False)
class TermDocumentMatrix:
    """Immutable sparse counts ``n_ij`` with cached marginals.

    ``counts`` has shape ``(d, m)``; stored entries are strictly positive.
    ``dropped`` lists ids of input documents that were discarded because
    they had no tokens left.
    """

    vocab: tuple[str, ...]
    docs: tuple[str, ...]
    counts: sp.csr_matrix
    labels: tuple[str, ...] | None = None
    dropped: tuple[str, ...] = ()
    doc_lengths: np.ndarray = field(init=False, repr=False)
    term_totals: np.ndarray = field(init=False, repr=False)
    doc_freqs: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        counts = sp.csr_matrix(self.counts, dtype=np.int64)
        counts.sum_duplicates()
        counts.eliminate_zeros()
        counts.sort_indices()
        d, m = len(self.docs), len(self.vocab)
        if counts.shape != (d, m):
            raise DomainError(f"counts shape {counts.shape} != (d={d}, m={m})")
        if counts.nnz and counts.data.min() < 0:
            raise DomainError("negative count")
        if self.labels is not None and len(self.labels) != d:
            raise DomainError("labels length differs from number of documents")
        doc_lengths = np.asarray(counts.sum(axis=1)).ravel()
        if d and doc_lengths.min() < 1:
            raise DomainError("every document needs at least one token")
        csc = counts.tocsc()
        term_totals = np.asarray(csc.sum(axis=0)).ravel()
        doc_freqs = np.diff(csc.indptr)
        for arr in (counts.data, counts.indices, counts.indptr, doc_lengths, term_totals, doc_freqs):
            arr.flags.writeable = False
        object.__setattr__(self, "vocab", tuple(self.vocab))
        object.__setattr__(self, "docs", tuple(self.docs))
        if self.labels is not None:
            object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "dropped", tuple(self.dropped))
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "doc_lengths", doc_lengths)
        object.__setattr__(self, "term_totals", term_totals)
        object.__setattr__(self, "doc_freqs", doc_freqs)
        object.__setattr__(self, "_csc", csc)

    @property
    def d(self) -> int:
        return len(self.docs)

    @property
    def m(self) -> int:
        return len(self.vocab)

    @property
    def n(self) -> int:
        return int(self.doc_lengths.sum())

    def count(self, i: int, j: int) -> int:
        """``n_ij``: occurrences of term ``i`` in document ``j``."""
        return int(self.counts[j, i])

    def term_column(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        """(document indices, counts) of the documents containing term ``i``."""
        csc = self._csc
        lo, hi = csc.indptr[i], csc.indptr[i + 1]
        return csc.indices[lo:hi], csc.data[lo:hi]

    def term_index(self, term: str) -> int:
        try:
            return self._index[term]
        except AttributeError:
            object.__setattr__(self, "_index", {t: k for k, t in enumerate(self.vocab)})
            return self._index[term]

    def subset(self, rows: Sequence[int]) -> TermDocumentMatrix:
        """Documents ``rows`` (in the given order), same vocabulary."""
        rows = np.asarray(rows, dtype=np.int64)
        labels = None if self.labels is None else tuple(self.labels[k] for k in rows)
        return TermDocumentMatrix(
            self.vocab, tuple(self.docs[k] for k in rows), self.counts[rows], labels
        )

    def align(self, vocab: Sequence[str]) -> TermDocumentMatrix:
        """Re-express the counts over ``vocab``.

        Terms outside ``vocab`` are discarded; documents left empty are
        dropped and listed in ``dropped``.
        """
        index = {t: k for k, t in enumerate(vocab)}
        old_to_new = np.array([index.get(t, -1) for t in self.vocab], dtype=np.int64)
        coo = self.counts.tocoo()
        keep = old_to_new[coo.col] >= 0
        mat = sp.csr_matrix(
            (coo.data[keep], (coo.row[keep], old_to_new[coo.col[keep]])),
            shape=(self.d, len(vocab)),
        )
        lengths = np.asarray(mat.sum(axis=1)).ravel()
        rows = np.flatnonzero(lengths > 0)
        dropped = self.dropped + tuple(self.docs[k] for k in np.flatnonzero(lengths == 0))
        labels = None if self.labels is None else tuple(self.labels[k] for k in rows)
        return TermDocumentMatrix(
            tuple(vocab), tuple(self.docs[k] for k in rows), mat[rows], labels, dropped
        )

    def compact(self) -> TermDocumentMatrix:
        """Drop vocabulary terms that occur in no document."""
        keep = np.flatnonzero(self.doc_freqs > 0)
        if len(keep) == self.m:
            return self
        return TermDocumentMatrix(
            tuple(self.vocab[k] for k in keep), self.docs, self.counts[:, keep],
            self.labels, self.dropped,
        )

    def equals(self, other: TermDocumentMatrix) -> bool:
        return (
            self.vocab == other.vocab
            and self.docs == other.docs
            and self.labels == other.labels
            and (self.counts != other.counts).nnz == 0
        )


@dataclass(frozen=True)
class TermStats:
    b: int
    n_i: int
    n_not: int

    @property
    def r(self) -> int:
        return self.n_i - self.b + 1


@dataclass(frozen=True, eq=False)
class CollectionStats:
    """Collection-level quantities plus per-term arrays ``b``, ``n_i``."""

    d: int
    m: int
    n: int
    doc_lengths: np.ndarray
    b: np.ndarray
    n_i: np.ndarray

    @property
    def mean_doc_length(self) -> float:
        return self.n / self.d

    @property
    def n_not(self) -> np.ndarray:
        return self.n - self.n_i

    @property
    def r(self) -> np.ndarray:
        return self.n_i - self.b + 1

    def term(self, i: int) -> TermStats:
        if self.b[i] < 1:
            raise DomainError(f"term {i} does not occur in the collection")
        return TermStats(int(self.b[i]), int(self.n_i[i]), int(self.n - self.n_i[i]))

    @property
    def per_term(self) -> list[TermStats]:
        return [self.term(i) for i in range(self.m)]


def compute_stats(matrix: TermDocumentMatrix) -> CollectionStats:
    return CollectionStats(
        d=matrix.d,
        m=matrix.m,
        n=matrix.n,
        doc_lengths=matrix.doc_lengths,
        b=matrix.doc_freqs.astype(np.int64),
        n_i=matrix.term_totals.astype(np.int64),
    )


@dataclass(frozen=True, eq=False)
class TargetComplementView:
    """Per-document pairs ``(n_ij, n_not_ij)`` for one target term."""

    target: int
    n_ij: np.ndarray
    n_j: np.ndarray

    @property
    def n_not(self) -> np.ndarray:
        return self.n_j - self.n_ij

    @property
    def pairs(self) -> np.ndarray:
        return np.column_stack([self.n_ij, self.n_not])

    @property
    def stats(self) -> TermStats:
        n_i = int(self.n_ij.sum())
        return TermStats(int(np.count_nonzero(self.n_ij)), n_i, int(self.n_j.sum()) - n_i)

    @classmethod
    def from_counts(
        cls, n_ij, n_j, target: int = -1, require_complement: bool = True
    ) -> TargetComplementView:
        """Validate counts; ``require_complement=False`` admits documents made
        only of the target (simulated data), which the approximate model
        cannot score."""
        n_ij = np.asarray(n_ij, dtype=np.int64)
        n_j = np.asarray(n_j, dtype=np.int64)
        if n_ij.shape != n_j.shape:
            raise DomainError("n_ij and n_j differ in shape")
        if np.any(n_ij < 0) or np.any(n_ij > n_j):
            raise DomainError("need 0 <= n_ij <= n_j")
        full = np.flatnonzero(n_ij >= n_j)
        if require_complement and len(full):
            raise ComplementAbsent(int(full[0]), target)
        return cls(target, n_ij, n_j)


def target_complement(matrix: TermDocumentMatrix, i: int) -> TargetComplementView:
    if not 0 <= i < matrix.m:
        raise DomainError(f"term index {i} out of range")
    n_ij = np.zeros(matrix.d, dtype=np.int64)
    rows, vals = matrix.term_column(i)
    n_ij[rows] = vals
    return TargetComplementView.from_counts(n_ij, matrix.doc_lengths, target=i)


def build_matrix(documents: Iterable[tuple]) -> TermDocumentMatrix:
    """Count tokens per document.

    ``documents`` yields ``(id, label, tokens)`` or ``(id, tokens)``.  The
    vocabulary is the sorted set of all tokens.  Documents without tokens
    are dropped and reported in ``matrix.dropped``.
    """
    ids, labels, bags, dropped = [], [], [], []
    for item in documents:
        if len(item) == 2:
            doc_id, tokens = item
            label = None
        else:
            doc_id, label, tokens = item
        if not tokens:
            dropped.append(str(doc_id))
            continue
        ids.append(str(doc_id))
        labels.append(label)
        bags.append(Counter(tokens))
    if not ids:
        raise AllDocumentsEmpty("no document has any token after preprocessing")
    vocab = sorted(set().union(*bags))
    index = {t: k for k, t in enumerate(vocab)}
    rows, cols, vals = [], [], []
    for j, bag in enumerate(bags):
        for term, c in bag.items():
            rows.append(j)
            cols.append(index[term])
            vals.append(c)
    counts = sp.csr_matrix((vals, (rows, cols)), shape=(len(ids), len(vocab)), dtype=np.int64)
    if all(lab is None for lab in labels):
        label_tuple = None
    elif any(lab is None for lab in labels):
        raise MalformedInput("some documents have labels and others do not")
    else:
        label_tuple = tuple(str(lab) for lab in labels)
    return TermDocumentMatrix(tuple(vocab), tuple(ids), counts, label_tuple, tuple(dropped))


def split(
    matrix: TermDocumentMatrix, train_fraction: float, seed: int
) -> tuple[TermDocumentMatrix, TermDocumentMatrix]:
    """Random document-level train/test partition (not stratified).

    The training matrix keeps only terms that occur in it; the test matrix
    is aligned to that vocabulary, so unseen terms vanish and any test
    document left empty is dropped.
    """
    if not 0.0 < train_fraction < 1.0:
        raise DomainError("train_fraction must lie in (0, 1)")
    d = matrix.d
    n_train = int(round(train_fraction * d))
    if d >= 2:
        n_train = min(max(n_train, 1), d - 1)
    rng = np.random.Generator(np.random.Philox(seed))
    perm = rng.permutation(d)
    train = matrix.subset(np.sort(perm[:n_train])).compact()
    test = matrix.subset(np.sort(perm[n_train:])) if n_train < d else None
    if test is None:
        raise DomainError("test split would be empty")
    return train, test.align(train.vocab)


# --------------------------------------------------------------------------- readers


def read_directory(
    root: str | Path, stopwords: Iterable[str] = frozenset()
) -> TermDocumentMatrix:
    """``root/<label>/<doc>`` files; the document id is ``<label>/<doc>``."""
    root = Path(root)
    if not root.is_dir():
        raise MalformedInput("not a directory", str(root))
    stop = frozenset(stopwords)
    docs = []
    for label_dir in sorted(p for p in root.iterdir() if p.is_dir()):
        for path in sorted(p for p in label_dir.iterdir() if p.is_file()):
            text = path.read_text(encoding="utf-8", errors="replace")
            docs.append((f"{label_dir.name}/{path.name}", label_dir.name, preprocess(text, stop)))
    if not docs:
        raise MalformedInput("no label/document files found", str(root))
    return build_matrix(docs)


def read_delimited(
    path: str | Path, stopwords: Iterable[str] = frozenset(), delimiter: str | None = None
) -> TermDocumentMatrix:
    """Delimited file with header ``id,label,text`` (tab-separated if the
    suffix is ``.tsv``).  An empty label column means unlabelled."""
    path = Path(path)
    if delimiter is None:
        delimiter = "\t" if path.suffix.lower() == ".tsv" else ","
    stop = frozenset(stopwords)
    docs = []
    with open(path, encoding="utf-8", errors="replace", newline="") as fh:
        reader = csv.reader(_skip_comments(fh), delimiter=delimiter)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header[:3]] != ["id", "label", "text"]:
            raise MalformedInput("expected header id,label,text", str(path), 1)
        for lineno, row in enumerate(reader, start=2):
            if len(row) != 3:
                raise MalformedInput(f"expected 3 columns, got {len(row)}", str(path), lineno)
            doc_id, label, text = row
            docs.append((doc_id, label or None, preprocess(text, stop)))
    return build_matrix(docs)


def _skip_comments(lines):
    for line in lines:
        if not line.startswith("#"):
            yield line


def _read_lines(path: Path) -> list[str]:
    with open(path, encoding="utf-8") as fh:
        return [line.rstrip("\n") for line in fh if not line.startswith("#")]


def read_triplets(
    path: str | Path, vocab_path: str | Path, docs_path: str | Path | None = None
) -> TermDocumentMatrix:
    """Whitespace-separated ``i j count`` triplets (0-based indices) plus a
    vocabulary file with one term per line.  The optional documents file
    holds ``id<TAB>label`` lines; without it ids are ``doc<j>``."""
    path = Path(path)
    vocab = [t for t in _read_lines(Path(vocab_path)) if t]
    rows, cols, vals = [], [], []
    with open(path, encoding="utf-8") as fh:
        seen_header = False
        for lineno, line in enumerate(fh, start=1):
            if line.startswith("#") or not line.strip():
                continue
            parts = line.split()
            if not seen_header:
                if parts != ["i", "j", "count"]:
                    raise MalformedInput("expected header 'i j count'", str(path), lineno)
                seen_header = True
                continue
            if len(parts) != 3:
                raise MalformedInput(f"expected 3 fields, got {len(parts)}", str(path), lineno)
            try:
                i, j, c = (int(p) for p in parts)
            except ValueError:
                raise MalformedInput(f"non-integer field in {line.strip()!r}", str(path), lineno)
            if i < 0 or i >= len(vocab) or j < 0 or c < 0:
                raise MalformedInput(f"index or count out of range in {line.strip()!r}", str(path), lineno)
            rows.append(j)
            cols.append(i)
            vals.append(c)
        if not seen_header:
            raise MalformedInput("missing header 'i j count'", str(path))
    if docs_path is not None:
        entries = [line.split("\t") for line in _read_lines(Path(docs_path)) if line]
        ids = [e[0] for e in entries]
        labels = [e[1] if len(e) > 1 and e[1] else None for e in entries]
        if rows and max(rows) >= len(ids):
            raise MalformedInput("document index beyond documents file", str(path))
    else:
        d = max(rows) + 1 if rows else 0
        ids = [f"doc{j}" for j in range(d)]
        labels = [None] * d
    counts = sp.csr_matrix((vals, (rows, cols)), shape=(len(ids), len(vocab)), dtype=np.int64)
    lengths = np.asarray(counts.sum(axis=1)).ravel()
    keep = np.flatnonzero(lengths > 0)
    if not len(keep):
        raise AllDocumentsEmpty("no document has a positive count")
    kept_labels = [labels[k] for k in keep]
    label_tuple = None if all(x is None for x in kept_labels) else tuple(str(x) for x in kept_labels)
    return TermDocumentMatrix(
        tuple(vocab), tuple(ids[k] for k in keep), counts[keep], label_tuple,
        tuple(ids[k] for k in np.flatnonzero(lengths == 0)),
    )


# --------------------------------------------------------------------------- writers


def write_triplets(
    matrix: TermDocumentMatrix, directory: str | Path, meta: dict | None = None
) -> dict[str, Path]:
    """Write ``triplets.txt``, ``vocab.txt`` and ``docs.tsv`` into ``directory``.

    Triplets are sorted by term then document, so output is byte-stable.
    """
    directory = Path(directory)
    coo = matrix.counts.tocoo()
    order = np.lexsort((coo.row, coo.col))
    lines = [_io.meta_line(meta), "i j count\n"]
    lines.extend(f"{i} {j} {c}\n" for i, j, c in zip(coo.col[order], coo.row[order], coo.data[order]))
    paths = {
        "triplets": directory / "triplets.txt",
        "vocab": directory / "vocab.txt",
        "docs": directory / "docs.tsv",
    }
    _io.write_text(paths["triplets"], "".join(lines))
    _io.write_text(paths["vocab"], "".join(t + "\n" for t in matrix.vocab))
    labels = matrix.labels or [""] * matrix.d
    _io.write_text(paths["docs"], "".join(f"{i}\t{lab}\n" for i, lab in zip(matrix.docs, labels)))
    return paths


def matrix_to_json(matrix: TermDocumentMatrix, meta: dict | None = None) -> dict:
    coo = matrix.counts.tocoo()
    order = np.lexsort((coo.row, coo.col))
    return {
        "schema": "bursty.matrix",
        "schema_version": _io.SCHEMA_VERSION,
        "config": meta or {},
        "vocab": list(matrix.vocab),
        "docs": list(matrix.docs),
        "labels": None if matrix.labels is None else list(matrix.labels),
        "dropped": list(matrix.dropped),
        "triplets": [
            [int(i), int(j), int(c)]
            for i, j, c in zip(coo.col[order], coo.row[order], coo.data[order])
        ],
    }


def matrix_from_json(obj: dict) -> TermDocumentMatrix:
    if obj.get("schema") != "bursty.matrix":
        raise MalformedInput("not a bursty.matrix document")
    trip = np.asarray(obj["triplets"], dtype=np.int64).reshape(-1, 3)
    shape = (len(obj["docs"]), len(obj["vocab"]))
    counts = sp.csr_matrix((trip[:, 2], (trip[:, 1], trip[:, 0])), shape=shape)
    labels = obj.get("labels")
    return TermDocumentMatrix(
        tuple(obj["vocab"]), tuple(obj["docs"]), counts,
        None if labels is None else tuple(labels), tuple(obj.get("dropped", ())),
    )


def stats_to_json(stats: CollectionStats, vocab: Sequence[str], meta: dict | None = None) -> dict:
    return {
        "schema": "bursty.stats",
        "schema_version": _io.SCHEMA_VERSION,
        "config": meta or {},
        "d": stats.d,
        "m": stats.m,
        "n": stats.n,
        "mean_doc_length": stats.mean_doc_length,
        "doc_lengths": stats.doc_lengths.tolist(),
        "terms": [
            {"term": t, "b": int(b), "n": int(ni), "n_not": int(stats.n - ni), "r": int(ni - b + 1)}
            for t, b, ni in zip(vocab, stats.b, stats.n_i)
        ],
    }
