"""Corpus ingestion: tweet cleaning, word-level annotations, dedup statistics.

The pipeline turns raw social-media lines into lowercase ASCII word tokens,
and annotated word lists into a deduplicated corpus of labeled word types.
"""

from __future__ import annotations

import enum
import json
import re
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path


class Tag(enum.IntEnum):
    """Word-level language tag.

    The integer order EN < HI < NE is the canonical class order used by
    every tie rule in the toolkit.
    """

    EN = 0
    HI = 1
    NE = 2

    @classmethod
    def parse(cls, text: str) -> "Tag":
        try:
            return cls[text]
        except KeyError:
            raise ValueError(f"unknown tag {text!r} (expected one of EN, HI, NE)") from None


TAG_NAMES = tuple(t.name for t in Tag)

_SURFACE_RE = re.compile(r"[a-z]+\Z")
_URL_RE = re.compile(r"(?:https?://|www\.)\S+", re.IGNORECASE)
_HANDLE_RE = re.compile(r"@\w+")


class CorpusError(Exception):
    """Base class for corpus loading/validation failures."""


class ParseError(CorpusError):
    def __init__(self, path, line_no: int, message: str):
        super().__init__(f"{path}:{line_no}: {message}")
        self.path = path
        self.line_no = line_no


class ConflictingLabelError(CorpusError):
    def __init__(self, surface: str, tags):
        super().__init__(f"word {surface!r} carries conflicting tags {sorted(t.name for t in tags)}")
        self.surface = surface
        self.tags = tags


@dataclass(frozen=True)
class RawTweet:
    id: str
    text: str


@dataclass(frozen=True)
class LabeledWord:
    """A unique word type with its language tag.

    occurrence_count is the number of times the surface appeared in the
    raw stream (1 for freshly loaded, pre-dedup rows).
    """

    surface: str
    tag: Tag
    occurrence_count: int = 1


@dataclass
class CorpusStats:
    total_tokens: int
    unique_words: int
    per_tag_counts: dict[Tag, int] = field(default_factory=dict)
    removed_redundant: int = 0


def default_stopword_path() -> Path:
    return Path(str(resources.files("hinglish_lid").joinpath("data/stopwords_en.txt")))


def load_stopwords(path=None) -> set[str]:
    """One word per line; blank lines and '#' comments are skipped."""
    p = Path(path) if path is not None else default_stopword_path()
    words = set()
    for line in p.read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        words.add(line.lower())
    return words


def _is_ascii_letter(ch: str) -> bool:
    return "a" <= ch <= "z" or "A" <= ch <= "Z"


def _clean_chars(text: str) -> str:
    # Emoticon/punctuation removal: keep ASCII alphanumerics, '#' (hashtags
    # are expanded later), whitespace, and non-ASCII letters (so that whole
    # tokens carrying foreign-script letters can be dropped at token level).
    kept = []
    for ch in text:
        if _is_ascii_letter(ch) or "0" <= ch <= "9" or ch == "#":
            kept.append(ch)
        elif ch.isspace():
            kept.append(" ")
        elif ch.isalpha():  # non-ASCII letter, decided at token level
            kept.append(ch)
    return "".join(kept)


def preprocess_tweet(raw: RawTweet, stopwords: set[str]) -> list[str]:
    """Clean one tweet into lowercase ASCII word tokens.

    Steps, in order: strip URLs/handles/emoticons/punctuation, drop tokens
    containing non-ASCII letters, expand hashtags to their text body, case
    fold, drop stopwords. Tokens that are not purely a-z (digits, URL
    remnants) are dropped as well. Degenerate input yields an empty list.
    """
    text = _URL_RE.sub(" ", raw.text)
    text = _HANDLE_RE.sub(" ", text)
    text = _clean_chars(text)
    tokens = []
    for tok in text.split():
        if not tok.isascii():
            continue
        tok = tok.replace("#", "")
        tok = tok.lower()
        if not _SURFACE_RE.match(tok):
            continue
        if "http" in tok:  # residue of a mangled link
            continue
        if tok in stopwords:
            continue
        tokens.append(tok)
    return tokens


def build_labeled_corpus(
    words, strict: bool = False
) -> tuple[list[LabeledWord], CorpusStats]:
    """Deduplicate (token, Tag) pairs into labeled word types plus stats.

    Duplicate occurrences beyond the first are counted as redundant. A
    surface seen under two different tags keeps the majority tag (ties
    resolved by the canonical EN < HI < NE order) unless strict is set,
    which raises ConflictingLabelError instead. Output is sorted by
    surface so downstream feature ids are reproducible.
    """
    tag_counts: dict[str, Counter] = {}
    total = 0
    for surface, tag in words:
        if not _SURFACE_RE.match(surface):
            raise ValueError(f"surface {surface!r} is not a lowercase a-z word")
        total += 1
        tag_counts.setdefault(surface, Counter())[Tag(tag)] += 1

    out = []
    per_tag = {t: 0 for t in Tag}
    for surface in sorted(tag_counts):
        counts = tag_counts[surface]
        if len(counts) > 1 and strict:
            raise ConflictingLabelError(surface, set(counts))
        best = max(counts.items(), key=lambda kv: (kv[1], -kv[0]))[0]
        occurrences = sum(counts.values())
        out.append(LabeledWord(surface, best, occurrences))
        per_tag[best] += 1

    stats = CorpusStats(
        total_tokens=total,
        unique_words=len(out),
        per_tag_counts=per_tag,
        removed_redundant=total - len(out),
    )
    return out, stats


def load_annotated_tsv(path) -> list[LabeledWord]:
    """Parse `surface<TAB>tag` lines into words in file order (pre-dedup).

    '#' lines are comments, blank lines are skipped. Malformed rows and
    unknown tags raise ParseError with the offending line number.
    """
    out = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ParseError(path, line_no, f"expected 2 tab-separated fields, got {len(parts)}")
            surface, tag_text = parts
            try:
                tag = Tag.parse(tag_text)
            except ValueError as exc:
                raise ParseError(path, line_no, str(exc)) from None
            if not _SURFACE_RE.match(surface):
                raise ParseError(path, line_no, f"surface {surface!r} is not a lowercase a-z word")
            out.append(LabeledWord(surface, tag, 1))
    return out


def load_raw_tweets(path, fmt: str = "text") -> tuple[list[RawTweet], int]:
    """Load raw tweets, one per line.

    fmt 'text': the whole line is the text, the id is the line number.
    fmt 'jsonl': each line is a JSON object with 'id' and 'text' fields.
    Returns (tweets, skipped_empty_lines).
    """
    tweets = []
    skipped = 0
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                skipped += 1
                continue
            if fmt == "text":
                tweets.append(RawTweet(str(line_no), line))
            elif fmt == "jsonl":
                try:
                    obj = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise ParseError(path, line_no, f"bad JSON: {exc}") from None
                if not isinstance(obj, dict) or "id" not in obj or "text" not in obj:
                    raise ParseError(path, line_no, "JSON object must have 'id' and 'text' fields")
                if not str(obj["text"]).strip():
                    skipped += 1
                    continue
                tweets.append(RawTweet(str(obj["id"]), str(obj["text"])))
            else:
                raise ValueError(f"unknown raw tweet format {fmt!r}")
    return tweets, skipped


def format_stats(stats: CorpusStats) -> str:
    """Render corpus statistics as key=value lines."""
    lines = [
        f"total_tokens={stats.total_tokens}",
        f"unique_words={stats.unique_words}",
    ]
    for tag in Tag:
        lines.append(f"words_{tag.name.lower()}={stats.per_tag_counts.get(tag, 0)}")
    lines.append(f"removed_redundant={stats.removed_redundant}")
    return "\n".join(lines) + "\n"
