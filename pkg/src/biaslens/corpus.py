"""Data model for taxonomy-coded catalog descriptions.

Covers JSONL ingestion with validation, canonical serialization,
rule-based tokenization (lowercased surfaces, original-text offsets),
BIO tag conversion for sequence models, and seeded fold assignment
for cross-validation.
"""
from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .errors import (
    AlignmentError,
    DuplicateId,
    EmptyText,
    MalformedRecord,
    OffsetOutOfRange,
    OverlapConflict,
    TooFewDescriptions,
    UnknownLabel,
)


class Category(str, Enum):
    LINGUISTIC = "Linguistic"
    PERSON_NAME = "PersonName"
    CONTEXTUAL = "Contextual"


class CodeLabel(str, Enum):
    """The ten taxonomy codes.  Enumeration order is load-bearing: injected
    feature blocks and report rows follow it everywhere."""

    GENDERED_PRONOUN = "GenderedPronoun"
    GENDERED_ROLE = "GenderedRole"
    GENERALIZATION = "Generalization"
    FEMININE = "Feminine"
    MASCULINE = "Masculine"
    NON_BINARY = "NonBinary"
    UNKNOWN = "Unknown"
    OCCUPATION = "Occupation"
    OMISSION = "Omission"
    STEREOTYPE = "Stereotype"

    @property
    def category(self) -> Category:
        return _CATEGORY[self]


_CATEGORY = {
    CodeLabel.GENDERED_PRONOUN: Category.LINGUISTIC,
    CodeLabel.GENDERED_ROLE: Category.LINGUISTIC,
    CodeLabel.GENERALIZATION: Category.LINGUISTIC,
    CodeLabel.FEMININE: Category.PERSON_NAME,
    CodeLabel.MASCULINE: Category.PERSON_NAME,
    CodeLabel.NON_BINARY: Category.PERSON_NAME,
    CodeLabel.UNKNOWN: Category.PERSON_NAME,
    CodeLabel.OCCUPATION: Category.CONTEXTUAL,
    CodeLabel.OMISSION: Category.CONTEXTUAL,
    CodeLabel.STEREOTYPE: Category.CONTEXTUAL,
}

# Label groups consumed by the three classifier families.
LC_LABELS = (CodeLabel.GENDERED_PRONOUN, CodeLabel.GENDERED_ROLE,
             CodeLabel.GENERALIZATION)
PNOC_LABELS = (CodeLabel.FEMININE, CodeLabel.MASCULINE, CodeLabel.NON_BINARY,
               CodeLabel.UNKNOWN, CodeLabel.OCCUPATION)
# Codes a trained sequence model passes downstream (NonBinary never appears
# in training data, so its predictions are not part of the injected block).
PNOC_INJECTED_LABELS = (CodeLabel.FEMININE, CodeLabel.MASCULINE,
                        CodeLabel.UNKNOWN, CodeLabel.OCCUPATION)
OSC_LABELS = (CodeLabel.OMISSION, CodeLabel.STEREOTYPE)


class MetadataField(str, Enum):
    TITLE = "Title"
    SCOPE_AND_CONTENTS = "Scope and Contents"
    BIOGRAPHICAL_HISTORICAL = "Biographical / Historical"
    PROCESSING_INFORMATION = "Processing Information"


SOURCE_AGGREGATE = "aggregate"


def coder_source(coder_id: str) -> str:
    return f"coder:{coder_id}"


def model_source(cascade_id: str) -> str:
    return f"model:{cascade_id}"


def valid_source(source: str) -> bool:
    if source == SOURCE_AGGREGATE:
        return True
    kind, _, rest = source.partition(":")
    return kind in ("coder", "model") and bool(rest)


@dataclass(frozen=True, order=True)
class AnnotationSpan:
    """A labeled character span.  Offsets index the original-case text;
    start inclusive, end exclusive."""

    start: int
    end: int
    label: CodeLabel
    source: str = SOURCE_AGGREGATE

    def overlaps(self, other: "AnnotationSpan") -> bool:
        return self.start < other.end and other.start < self.end


@dataclass(frozen=True)
class Description:
    id: str
    fonds_id: str
    fonds_title: str
    field: MetadataField
    text: str
    languages: tuple[str, ...] = ()
    annotations: tuple[AnnotationSpan, ...] = ()


Corpus = list[Description]


class Token(NamedTuple):
    surface: str  # lowercased
    start: int
    end: int


@dataclass(frozen=True)
class TokenizedDescription:
    tokens: tuple[Token, ...]
    # (first, past-last) token index ranges; they partition the token list
    sentences: tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class FoldAssignment:
    k: int
    seed: int
    folds: tuple[frozenset[str], ...]

    def fold_of(self, description_id: str) -> int:
        for i, ids in enumerate(self.folds):
            if description_id in ids:
                return i
        raise KeyError(description_id)


# --------------------------------------------------------------------------
# JSONL ingestion and canonical serialization

_RECORD_KEYS = ("id", "fonds_id", "fonds_title", "field", "text", "languages",
                "annotations")


def _parse_annotation(raw: dict, text_len: int, desc_id: str) -> AnnotationSpan:
    label_raw = raw.get("label", "")
    try:
        label = CodeLabel(label_raw)
    except ValueError:
        raise UnknownLabel(str(label_raw)) from None
    start, end = raw.get("start"), raw.get("end")
    if not (isinstance(start, int) and isinstance(end, int)):
        raise OffsetOutOfRange(desc_id, "non-integer offsets")
    if not (0 <= start < end <= text_len):
        raise OffsetOutOfRange(desc_id, f"({start},{end}) with text length {text_len}")
    source = raw.get("source", SOURCE_AGGREGATE)
    if not (isinstance(source, str) and valid_source(source)):
        raise MalformedRecord(0, f"bad annotation source {source!r}")
    return AnnotationSpan(start=start, end=end, label=label, source=source)


def record_to_description(rec: dict, *, strip_field_prefix: bool = False) -> Description:
    for key in ("id", "fonds_id", "fonds_title", "field", "text"):
        if key not in rec:
            raise MalformedRecord(0, f"missing key {key!r}")
    try:
        meta_field = MetadataField(rec["field"])
    except ValueError:
        raise MalformedRecord(0, f"unknown metadata field {rec['field']!r}") from None
    text = rec["text"]
    if not isinstance(text, str):
        raise MalformedRecord(0, "text is not a string")
    if strip_field_prefix:
        prefix = f"{meta_field.value}:"
        if text.startswith(prefix):
            text = text[len(prefix):].lstrip()
    languages = rec.get("languages", [])
    if not isinstance(languages, list):
        raise MalformedRecord(0, "languages is not a list")
    annotations = tuple(
        _parse_annotation(a, len(text), rec["id"])
        for a in rec.get("annotations", [])
    )
    return Description(
        id=rec["id"],
        fonds_id=rec["fonds_id"],
        fonds_title=rec["fonds_title"],
        field=meta_field,
        text=text,
        languages=tuple(languages),
        annotations=annotations,
    )


def description_to_record(d: Description) -> dict:
    return {
        "id": d.id,
        "fonds_id": d.fonds_id,
        "fonds_title": d.fonds_title,
        "field": d.field.value,
        "text": d.text,
        "languages": list(d.languages),
        "annotations": [
            {"start": a.start, "end": a.end, "label": a.label.value,
             "source": a.source}
            for a in sorted(d.annotations)
        ],
    }


def load_corpus(path: str | Path, format: str = "jsonl", *,
                strip_field_prefix: bool = False) -> Corpus:
    """Read a corpus file, one description per line (jsonl is the only
    wire format).

    Raises MalformedRecord / DuplicateId / UnknownLabel / OffsetOutOfRange
    with the offending line number where applicable.
    """
    if format != "jsonl":
        raise ValueError(f"unsupported corpus format {format!r}")
    corpus: Corpus = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedRecord(line_no, f"invalid JSON: {exc.msg}") from None
            if not isinstance(rec, dict):
                raise MalformedRecord(line_no, "record is not an object")
            try:
                d = record_to_description(rec, strip_field_prefix=strip_field_prefix)
            except MalformedRecord as exc:
                raise MalformedRecord(line_no, exc.reason) from None
            if d.id in seen:
                raise DuplicateId(d.id)
            seen.add(d.id)
            corpus.append(d)
    return corpus


def dumps_description(d: Description) -> str:
    return json.dumps(description_to_record(d), ensure_ascii=False,
                      separators=(",", ":"))


def save_corpus(corpus: Corpus, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for d in corpus:
            fh.write(dumps_description(d))
            fh.write("\n")


def corpus_hash(corpus: Corpus) -> str:
    h = hashlib.sha256()
    for d in corpus:
        h.update(dumps_description(d).encode("utf-8"))
        h.update(b"\n")
    return h.hexdigest()


# --------------------------------------------------------------------------
# Tokenization

# Words are unicode alphanumeric runs; every other non-space character is a
# token of its own, so punctuation survives as tokens.
_TOKEN_RE = re.compile(r"[^\W_]+|[^\w\s]|_", re.UNICODE)

_SENTENCE_PUNCT = ".!?"

# Guard list for the sentence splitter; compared lowercased, sans period.
ABBREVIATIONS = frozenset(
    ("dr", "mr", "mrs", "ms", "prof", "st", "no", "vol", "ed"))


def _preceding_word(text: str, idx: int) -> str:
    j = idx
    while j > 0 and (text[j - 1].isalnum() or text[j - 1] == "_"):
        j -= 1
    return text[j:idx]


def _sentence_char_spans(text: str) -> list[tuple[int, int]]:
    spans: list[tuple[int, int]] = []
    start = 0
    i = 0
    n = len(text)
    while i < n:
        if text[i] in _SENTENCE_PUNCT:
            j = i + 1
            while j < n and text[j] in _SENTENCE_PUNCT:
                j += 1
            k = j
            while k < n and text[k].isspace():
                k += 1
            abbrev = (text[i] == "." and j == i + 1
                      and _preceding_word(text, i).lower() in ABBREVIATIONS)
            if k > j and k < n and text[k].isupper() and not abbrev:
                spans.append((start, j))
                start = j
            i = j
        else:
            i += 1
    if start < n:
        spans.append((start, n))
    return spans


def preprocess(d: Description) -> TokenizedDescription:
    """Tokenize a description: lowercased surfaces, punctuation and stop
    words kept, offsets into the original text, rule-based sentence split."""
    if not d.text:
        raise EmptyText(d.id)
    tokens: list[Token] = []
    sentences: list[tuple[int, int]] = []
    for lo, hi in _sentence_char_spans(d.text):
        first = len(tokens)
        for m in _TOKEN_RE.finditer(d.text, lo, hi):
            tokens.append(Token(m.group().lower(), m.start(), m.end()))
        if len(tokens) > first:
            sentences.append((first, len(tokens)))
    return TokenizedDescription(tuple(tokens), tuple(sentences))


# --------------------------------------------------------------------------
# BIO conversion

def merge_same_label(spans: Iterable[AnnotationSpan]) -> list[AnnotationSpan]:
    """Merge overlapping spans that carry the same label."""
    by_label: dict[CodeLabel, list[AnnotationSpan]] = {}
    for s in spans:
        by_label.setdefault(s.label, []).append(s)
    merged: list[AnnotationSpan] = []
    for label in sorted(by_label, key=lambda l: l.value):
        group = sorted(by_label[label], key=lambda s: (s.start, s.end))
        cur = group[0]
        for s in group[1:]:
            if s.start < cur.end:  # strict overlap; adjacency stays separate
                if s.end > cur.end:
                    cur = AnnotationSpan(cur.start, s.end, label, cur.source)
            else:
                merged.append(cur)
                cur = s
        merged.append(cur)
    merged.sort(key=lambda s: (s.start, s.end, s.label.value))
    return merged


def _overlapping_token_range(t: TokenizedDescription, span: AnnotationSpan
                             ) -> tuple[int, int]:
    """Token index range [a, b) of tokens sharing >=1 char with the span."""
    a = None
    b = 0
    for idx, tok in enumerate(t.tokens):
        if tok.start < span.end and span.start < tok.end:
            if a is None:
                a = idx
            b = idx + 1
    return (a, b) if a is not None else (0, 0)


def to_bio(d: Description, t: TokenizedDescription,
           labels: Iterable[CodeLabel]) -> list[str]:
    """Per-token BIO tags for the selected labels.  Same-label overlaps are
    merged first; a token claimed by two different labels raises
    OverlapConflict."""
    label_set = set(labels)
    selected = [s for s in d.annotations if s.label in label_set]
    tags = ["O"] * len(t.tokens)
    owner: list[CodeLabel | None] = [None] * len(t.tokens)
    for span in merge_same_label(selected):
        a, b = _overlapping_token_range(t, span)
        for idx in range(a, b):
            if owner[idx] is not None and owner[idx] != span.label:
                raise OverlapConflict(d.id, (span.start, span.end))
        for idx in range(a, b):
            if owner[idx] is None:
                # idx > a only happens mid-run, or when the run's first token
                # was already claimed by an overlapping same-label span.
                tags[idx] = ("I-" if idx > a else "B-") + span.label.value
                owner[idx] = span.label
    return tags


def bio_to_spans(tags: Sequence[str], t: TokenizedDescription,
                 source: str = SOURCE_AGGREGATE) -> list[AnnotationSpan]:
    """Inverse of to_bio with token-derived character offsets.  Malformed
    sequences (I after O, label switches without B, unknown tag text) are
    repaired rather than rejected."""
    if len(tags) != len(t.tokens):
        raise AlignmentError(
            f"{len(tags)} tags for {len(t.tokens)} tokens")
    spans: list[AnnotationSpan] = []
    cur_label: CodeLabel | None = None
    cur_range: tuple[int, int] | None = None

    def close():
        nonlocal cur_label, cur_range
        if cur_label is not None:
            a, b = cur_range
            spans.append(AnnotationSpan(t.tokens[a].start, t.tokens[b].end,
                                        cur_label, source))
        cur_label = None
        cur_range = None

    for idx, tag in enumerate(tags):
        if tag == "O" or "-" not in tag:
            close()
            continue
        prefix, _, name = tag.partition("-")
        try:
            label = CodeLabel(name)
        except ValueError:
            close()
            continue
        if prefix == "I" and cur_label == label:
            cur_range = (cur_range[0], idx)
        else:  # B, or repaired I with no open run of the same label
            close()
            cur_label = label
            cur_range = (idx, idx)
    close()
    return spans


# --------------------------------------------------------------------------
# Fold assignment

def make_folds(corpus: Corpus, k: int = 5, seed: int = 22) -> FoldAssignment:
    """Seeded uniform shuffle then contiguous chunks; sizes differ by <=1."""
    n = len(corpus)
    if n < k:
        raise TooFewDescriptions(f"{n} descriptions for {k} folds")
    rng = np.random.default_rng(seed)
    order = rng.permutation(n)
    base, extra = divmod(n, k)
    folds: list[frozenset[str]] = []
    pos = 0
    for i in range(k):
        size = base + (1 if i < extra else 0)
        folds.append(frozenset(corpus[j].id for j in order[pos:pos + size]))
        pos += size
    return FoldAssignment(k=k, seed=seed, folds=tuple(folds))


def save_folds(folds: FoldAssignment, path: str | Path) -> None:
    payload = {"k": folds.k, "seed": folds.seed,
               "folds": [sorted(ids) for ids in folds.folds]}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, ensure_ascii=False, indent=2, sort_keys=True)
        fh.write("\n")


def load_folds(path: str | Path) -> FoldAssignment:
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    return FoldAssignment(
        k=payload["k"], seed=payload["seed"],
        folds=tuple(frozenset(ids) for ids in payload["folds"]))
