"""Character n-gram vocabularies and sparse count feature matrices."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

PAD_START = "^"
PAD_END = "$"


class EmptyVocabularyError(Exception):
    pass


class BadFeatureIdError(Exception):
    pass


@dataclass(frozen=True)
class NGramSpec:
    """Which n-gram orders to extract (each n in 1..4) and whether words are
    wrapped in boundary sentinels first."""

    n_values: tuple[int, ...]
    boundary_padding: bool = False

    def __post_init__(self):
        ns = tuple(sorted(set(int(n) for n in self.n_values)))
        if not ns:
            raise ValueError("n_values must be non-empty")
        for n in ns:
            if not 1 <= n <= 4:
                raise ValueError(f"n={n} outside the supported range 1..4")
        object.__setattr__(self, "n_values", ns)

    @property
    def label(self) -> str:
        return "+".join(str(n) for n in self.n_values)

    @classmethod
    def from_label(cls, label: str, boundary_padding: bool = False) -> "NGramSpec":
        return cls(tuple(int(p) for p in label.split("+")), boundary_padding)


def extract_ngrams(word: str, n: int, padding: bool = False) -> Counter:
    """All contiguous length-n substrings of the word as a multiset.

    With padding, the word is wrapped as ^word$ first. A word shorter than
    n (without padding) yields an empty multiset.
    """
    if not 1 <= n <= 4:
        raise ValueError(f"n={n} outside the supported range 1..4")
    if not word:
        raise ValueError("word must be non-empty")
    if padding:
        word = PAD_START + word + PAD_END
    return Counter(word[i : i + n] for i in range(len(word) - n + 1))


def word_ngrams(word: str, spec: NGramSpec) -> Counter:
    grams: Counter = Counter()
    for n in spec.n_values:
        grams.update(extract_ngrams(word, n, spec.boundary_padding))
    return grams


@dataclass(frozen=True)
class Vocabulary:
    """Ordered gram -> feature id map for one n-gram profile.

    Grams are sorted by (length, string), so ids are reproducible for any
    corpus ordering.
    """

    spec: NGramSpec
    grams: tuple[str, ...]
    index: dict[str, int] = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "index", {g: i for i, g in enumerate(self.grams)})
        if len(self.index) != len(self.grams):
            raise ValueError("duplicate grams in vocabulary")

    def __len__(self) -> int:
        return len(self.grams)


def build_vocabulary(corpus, spec: NGramSpec, min_count: int = 1) -> Vocabulary:
    """Union of n-grams over all corpus words, pruned by corpus frequency.

    Frequency counts every occurrence inside every word type (one word
    containing "na" twice contributes 2). Grams below min_count are
    dropped; an empty survivor set raises EmptyVocabularyError.
    """
    if not corpus:
        raise ValueError("corpus must be non-empty")
    freq: Counter = Counter()
    for word in corpus:
        freq.update(word_ngrams(word.surface, spec))
    grams = tuple(sorted((g for g, c in freq.items() if c >= min_count), key=lambda g: (len(g), g)))
    if not grams:
        raise EmptyVocabularyError(f"no gram reaches min_count={min_count}")
    return Vocabulary(spec, grams)


@dataclass
class FeatureMatrix:
    """Sparse instances x features count matrix with an aligned label vector.

    Entries are parallel (rows, cols, counts) arrays sorted by (row, col)
    with unique (row, col) pairs and strictly positive counts.
    """

    n_rows: int
    n_cols: int
    rows: np.ndarray
    cols: np.ndarray
    counts: np.ndarray
    labels: np.ndarray

    def row_items(self, i: int):
        """(col, count) pairs of row i; rows are contiguous in the arrays."""
        lo = np.searchsorted(self.rows, i, side="left")
        hi = np.searchsorted(self.rows, i, side="right")
        return zip(self.cols[lo:hi].tolist(), self.counts[lo:hi].tolist())


def featurize(corpus, vocab: Vocabulary) -> FeatureMatrix:
    """Count matrix: entry (i, j) = occurrences of gram j in word i.

    Grams absent from the vocabulary are ignored; labels are copied from
    the corpus words.
    """
    rows, cols, counts = [], [], []
    labels = np.empty(len(corpus), dtype=np.int64)
    for i, word in enumerate(corpus):
        labels[i] = int(word.tag)
        grams = word_ngrams(word.surface, vocab.spec)
        found = sorted(
            (vocab.index[g], c) for g, c in grams.items() if g in vocab.index
        )
        for j, c in found:
            rows.append(i)
            cols.append(j)
            counts.append(c)
    return FeatureMatrix(
        n_rows=len(corpus),
        n_cols=len(vocab),
        rows=np.asarray(rows, dtype=np.int64),
        cols=np.asarray(cols, dtype=np.int64),
        counts=np.asarray(counts, dtype=np.int64),
        labels=labels,
    )


def project_columns(X: FeatureMatrix, keep) -> FeatureMatrix:
    """Keep the listed feature columns, reindexed to 0..k-1 in keep order."""
    keep = list(keep)
    if len(set(keep)) != len(keep):
        raise BadFeatureIdError("duplicate feature ids in keep list")
    for j in keep:
        if not 0 <= j < X.n_cols:
            raise BadFeatureIdError(f"feature id {j} outside 0..{X.n_cols - 1}")
    remap = np.full(X.n_cols, -1, dtype=np.int64)
    for new, old in enumerate(keep):
        remap[old] = new
    mask = remap[X.cols] >= 0 if len(X.cols) else np.zeros(0, dtype=bool)
    rows = X.rows[mask]
    cols = remap[X.cols[mask]]
    counts = X.counts[mask]
    order = np.lexsort((cols, rows))
    return FeatureMatrix(X.n_rows, len(keep), rows[order], cols[order], counts[order], X.labels.copy())


def take_rows(X: FeatureMatrix, row_idx) -> FeatureMatrix:
    """Row view in row_idx order (labels follow)."""
    row_idx = np.asarray(row_idx, dtype=np.int64)
    remap = np.full(X.n_rows, -1, dtype=np.int64)
    remap[row_idx] = np.arange(len(row_idx))
    mask = remap[X.rows] >= 0 if len(X.rows) else np.zeros(0, dtype=bool)
    rows = remap[X.rows[mask]]
    cols = X.cols[mask]
    counts = X.counts[mask]
    order = np.lexsort((cols, rows))
    return FeatureMatrix(
        len(row_idx), X.n_cols, rows[order], cols[order], counts[order], X.labels[row_idx]
    )


def save_vocabulary(vocab: Vocabulary, path, header_lines=()) -> None:
    """One gram per line in canonical order; the line number is the id.

    The spec is recorded in '#' comments so the file round-trips.
    """
    with open(path, "w", encoding="utf-8") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        fh.write(f"# n_values={vocab.spec.label}\n")
        fh.write(f"# boundary_padding={int(vocab.spec.boundary_padding)}\n")
        for gram in vocab.grams:
            fh.write(gram + "\n")


def load_vocabulary(path) -> Vocabulary:
    n_values = None
    padding = False
    grams = []
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        if raw.startswith("#"):
            body = raw[1:].strip()
            if body.startswith("n_values="):
                n_values = body.split("=", 1)[1]
            elif body.startswith("boundary_padding="):
                padding = bool(int(body.split("=", 1)[1]))
            continue
        if raw:
            grams.append(raw)
    if n_values is None:
        raise ValueError(f"{path}: missing n_values header")
    return Vocabulary(NGramSpec.from_label(n_values, padding), tuple(grams))


def write_coordinate(X: FeatureMatrix, path, header_lines=()) -> None:
    """Debug export: `row col count` triples in canonical order."""
    with open(path, "w", encoding="utf-8") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        fh.write(f"# shape={X.n_rows} {X.n_cols}\n")
        for r, c, v in zip(X.rows.tolist(), X.cols.tolist(), X.counts.tolist()):
            fh.write(f"{r} {c} {v}\n")
