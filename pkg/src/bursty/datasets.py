"""Loaders for the public text-categorization benchmarks.

Both return ``(train, test)`` matrices with the test split aligned to the
training vocabulary.  Neither dataset ships with the package:

* 20 Newsgroups is fetched through scikit-learn (optional dependency,
  network access on first use, cached afterwards);
* R8 is read from ``$BURSTY_R8_DIR``, which must hold ``train.txt`` and
  ``test.txt`` with one ``label<TAB>text`` document per line.

:class:`DatasetUnavailable` is raised when a source cannot be reached.
"""

from __future__ import annotations

import os
from pathlib import Path
from typing import Iterable

from .corpus import TermDocumentMatrix, build_matrix, default_stopwords, preprocess
from .errors import BurstyError, MalformedInput

__all__ = ["DatasetUnavailable", "load_20newsgroups", "load_r8", "from_texts"]

R8_ENV = "BURSTY_R8_DIR"


class DatasetUnavailable(BurstyError):
    exit_code = 12


def from_texts(
    train: Iterable[tuple[str, str]],
    test: Iterable[tuple[str, str]],
    stopwords=None,
) -> tuple[TermDocumentMatrix, TermDocumentMatrix]:
    """Build aligned matrices from ``(label, text)`` pairs."""
    stop = default_stopwords() if stopwords is None else stopwords

    def docs(pairs, prefix):
        for k, (label, text) in enumerate(pairs):
            yield f"{prefix}{k}", label, preprocess(text, stop)

    train_m = build_matrix(docs(train, "train/"))
    test_m = build_matrix(docs(test, "test/"))
    return train_m, test_m.align(train_m.vocab)


def load_20newsgroups(data_home: str | None = None, stopwords=None):
    """The standard by-date split with headers, footers and quotes kept."""
    try:
        from sklearn.datasets import fetch_20newsgroups
    except ImportError as exc:
        raise DatasetUnavailable("scikit-learn is required (pip install artifact[datasets])") from exc
    try:
        parts = [fetch_20newsgroups(subset=s, data_home=data_home) for s in ("train", "test")]
    except Exception as exc:  # network or cache failures surface as assorted types
        raise DatasetUnavailable(f"20 Newsgroups could not be fetched: {exc}") from exc
    pairs = [
        [(p.target_names[t], text) for t, text in zip(p.target, p.data)] for p in parts
    ]
    return from_texts(pairs[0], pairs[1], stopwords)


def _read_labelled(path: Path) -> list[tuple[str, str]]:
    out = []
    with open(path, encoding="utf-8", errors="replace") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            label, sep, text = line.partition("\t")
            if not sep:
                raise MalformedInput("expected label<TAB>text", str(path), lineno)
            out.append((label, text))
    return out


def load_r8(root: str | Path | None = None, stopwords=None):
    root = root or os.environ.get(R8_ENV)
    if not root:
        raise DatasetUnavailable(f"set {R8_ENV} to a directory with train.txt and test.txt")
    root = Path(root)
    files = [root / "train.txt", root / "test.txt"]
    missing = [str(f) for f in files if not f.is_file()]
    if missing:
        raise DatasetUnavailable(f"missing R8 files: {missing}")
    return from_texts(_read_labelled(files[0]), _read_labelled(files[1]), stopwords)
