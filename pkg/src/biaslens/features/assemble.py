"""Per-token and per-document feature assembly, including the injected
feature blocks that wire cascade stages together.

Injected blocks always follow CodeLabel enumeration order so train and
predict can never disagree on the layout.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from ..corpus import AnnotationSpan, CodeLabel, Description, TokenizedDescription
from ..errors import AlignmentError, ForeignSpan
from .embeddings import EmbeddingModel, embed_token
from .tfidf import TfidfModel, transform

_LABEL_ORDER = {label: i for i, label in enumerate(CodeLabel)}


def canonical_label_order(labels: Iterable[CodeLabel]) -> tuple[CodeLabel, ...]:
    return tuple(sorted(set(labels), key=_LABEL_ORDER.__getitem__))


@dataclass
class TokenFeatureRow:
    embedding: np.ndarray
    start_of_sentence: bool
    end_of_sentence: bool
    bias: float = 1.0
    injected: dict[CodeLabel, bool] = field(default_factory=dict)


def assemble_token_features(
        t: TokenizedDescription, m: EmbeddingModel,
        injected: Sequence[Iterable[CodeLabel]] | None = None,
        injected_labels: Iterable[CodeLabel] = (),
) -> list[list[TokenFeatureRow]]:
    """Feature rows grouped by sentence.  `injected`, when given, is one
    label collection per token across the whole description."""
    labels = canonical_label_order(injected_labels)
    if injected is not None and len(injected) != len(t.tokens):
        raise AlignmentError(
            f"{len(injected)} injected entries for {len(t.tokens)} tokens")
    sentences: list[list[TokenFeatureRow]] = []
    for lo, hi in t.sentences:
        rows: list[TokenFeatureRow] = []
        for idx in range(lo, hi):
            tok = t.tokens[idx]
            flags: dict[CodeLabel, bool] = {}
            if labels:
                present = set(injected[idx]) if injected is not None else set()
                flags = {lab: lab in present for lab in labels}
            rows.append(TokenFeatureRow(
                embedding=embed_token(m, tok.surface),
                start_of_sentence=idx == lo,
                end_of_sentence=idx == hi - 1,
                injected=flags,
            ))
        sentences.append(rows)
    return sentences


def token_feature_names(dim: int,
                        injected_labels: Iterable[CodeLabel] = ()) -> list[str]:
    names = [f"emb_{i}" for i in range(dim)]
    names += ["start_of_sentence", "end_of_sentence", "bias"]
    names += [f"injected_{lab.value}" for lab in canonical_label_order(injected_labels)]
    return names


def pack_token_features(sentences: Sequence[Sequence[TokenFeatureRow]],
                        injected_labels: Iterable[CodeLabel] = ()
                        ) -> list[np.ndarray]:
    """One float64 (n_tokens, dim + 3 + n_injected) matrix per sentence."""
    labels = canonical_label_order(injected_labels)
    packed = []
    for rows in sentences:
        if not rows:
            packed.append(np.zeros((0, 0)))
            continue
        dim = len(rows[0].embedding)
        X = np.zeros((len(rows), dim + 3 + len(labels)), dtype=np.float64)
        for i, row in enumerate(rows):
            X[i, :dim] = row.embedding
            X[i, dim] = 1.0 if row.start_of_sentence else 0.0
            X[i, dim + 1] = 1.0 if row.end_of_sentence else 0.0
            X[i, dim + 2] = row.bias
            for j, lab in enumerate(labels):
                X[i, dim + 3 + j] = 1.0 if row.injected.get(lab, False) else 0.0
        packed.append(X)
    return packed


@dataclass
class DocFeatureVector:
    tfidf: sp.csr_matrix  # 1 x V
    injected: dict[CodeLabel, tuple[float, float]]  # label -> (presence, ln(1+count))
    injected_labels: tuple[CodeLabel, ...]


def assemble_doc_features(d: Description, tfidf_model: TfidfModel,
                          injected_spans: Sequence[AnnotationSpan] | None = None,
                          injected_labels: Iterable[CodeLabel] = (),
                          tokenized: TokenizedDescription | None = None
                          ) -> DocFeatureVector:
    labels = canonical_label_order(injected_labels)
    counts = {lab: 0 for lab in labels}
    if injected_spans:
        for span in injected_spans:
            if not (0 <= span.start < span.end <= len(d.text)):
                raise ForeignSpan(d.id)
            if span.label in counts:
                counts[span.label] += 1
    injected = {
        lab: ((1.0 if c else 0.0), math.log1p(c)) for lab, c in counts.items()
    }
    row = transform(tfidf_model, tokenized if tokenized is not None else d)
    return DocFeatureVector(tfidf=row, injected=injected, injected_labels=labels)


def doc_feature_width(n_tfidf: int, injected_labels: Iterable[CodeLabel]) -> int:
    return n_tfidf + 2 * len(canonical_label_order(injected_labels))


def pack_doc_features(vectors: Sequence[DocFeatureVector]) -> sp.csr_matrix:
    """Stack doc vectors into (n, V + 2L): tfidf block then per label
    (presence, magnitude) pairs in enumeration order."""
    if not vectors:
        return sp.csr_matrix((0, 0), dtype=np.float64)
    labels = vectors[0].injected_labels
    rows = []
    for v in vectors:
        if v.injected_labels != labels:
            raise AlignmentError("inconsistent injected label blocks")
        if labels:
            extra = np.empty(2 * len(labels), dtype=np.float64)
            for j, lab in enumerate(labels):
                extra[2 * j], extra[2 * j + 1] = v.injected[lab]
            rows.append(sp.hstack(
                [v.tfidf, sp.csr_matrix(extra[None, :])], format="csr"))
        else:
            rows.append(v.tfidf)
    return sp.vstack(rows, format="csr")
