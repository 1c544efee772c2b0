"""Synthetic catalog corpora with planted lexicons.

Every classifier family gets a fully separable signal: fixed word lists
decide token codes, title+name patterns decide person-name spans, and
marker words decide the document codes.  Held-out scores on these corpora
are limited only by the models, which makes them usable as training
benchmarks.  Used by the test suite and the kernel benchmark.
"""
from __future__ import annotations

import numpy as np

from .corpus import AnnotationSpan, CodeLabel, Corpus, Description, MetadataField

PRONOUNS = ("he", "she", "his", "her", "him", "herself", "himself", "hers")
ROLES = ("lady", "wife", "husband", "father", "mother", "widow", "ladies", "son")
GENERALIZATIONS = ("mankind", "manpower", "forefathers", "brotherhood", "chairmen")
TITLES_FEMININE = ("mrs", "miss", "madame")
TITLES_MASCULINE = ("mr", "sir", "monsieur")
NAMES = ("anderson", "bell", "carlyle", "dunlop", "elliot", "fraser", "grant",
         "hastie", "irvine", "johnstone", "keir", "lamont", "mackay", "napier",
         "ogilvie", "pringle", "ramsay", "sinclair", "turnbull", "urquhart")
OCCUPATIONS = ("surgeon", "professor", "librarian", "botanist", "engraver",
               "minister", "architect")
OMISSION_MARKERS = ("unnamed", "uncredited")
STEREOTYPE_MARKERS = ("devoted", "dutiful", "charming")
FILLER = ("records", "letters", "papers", "collection", "university", "notes",
          "volume", "study", "report", "documents", "archive", "history",
          "lecture", "society", "journal", "account", "of", "the", "and", "in",
          "from", "with", "on", "about", "concerning", "1873", "1901",
          "edinburgh")
FONDS_TITLES = ("Papers of the Medical School", "Town Council Minutes",
                "Missionary Correspondence", "Botanical Survey Records",
                "Student Society Archives", "Estate and Household Books",
                "Lecture Notes Collection", "Photographic Albums")
LANGUAGE_POOL = ("English", "French", "German", "Latin", "Scottish Gaelic")

_FIELDS = tuple(MetadataField)


def _pieces_for_sentence(rng: np.random.Generator) -> list[tuple[list[str], CodeLabel | None]]:
    pieces: list[tuple[list[str], CodeLabel | None]] = []
    n_filler = int(rng.integers(5, 10))
    for _ in range(n_filler):
        pieces.append(([str(rng.choice(FILLER))], None))
    if rng.random() < 0.8:
        pieces.append(([str(rng.choice(PRONOUNS))], CodeLabel.GENDERED_PRONOUN))
    if rng.random() < 0.5:
        pieces.append(([str(rng.choice(ROLES))], CodeLabel.GENDERED_ROLE))
    if rng.random() < 0.35:
        pieces.append(([str(rng.choice(GENERALIZATIONS))],
                       CodeLabel.GENERALIZATION))
    person = rng.random()
    if person < 0.3:
        pieces.append(([str(rng.choice(TITLES_FEMININE)),
                        str(rng.choice(NAMES))], CodeLabel.FEMININE))
    elif person < 0.6:
        pieces.append(([str(rng.choice(TITLES_MASCULINE)),
                        str(rng.choice(NAMES))], CodeLabel.MASCULINE))
    elif person < 0.8:
        pieces.append(([str(rng.choice(NAMES))], CodeLabel.UNKNOWN))
    if rng.random() < 0.4:
        pieces.append(([str(rng.choice(OCCUPATIONS))], CodeLabel.OCCUPATION))
    perm = rng.permutation(len(pieces))
    return [pieces[i] for i in perm]


def synthetic_corpus(n: int, seed: int = 7, n_fonds: int = 8) -> Corpus:
    rng = np.random.default_rng(seed)
    n_fonds = min(n_fonds, len(FONDS_TITLES))
    fonds_langs = [
        sorted(rng.choice(LANGUAGE_POOL, size=int(rng.integers(1, 3)),
                          replace=False).tolist())
        for _ in range(n_fonds)
    ]
    corpus: list[Description] = []
    for i in range(n):
        fonds = int(rng.integers(0, n_fonds))
        n_sentences = int(rng.integers(1, 4))
        text_parts: list[str] = []
        annotations: list[AnnotationSpan] = []
        pos = 0
        has_omission = rng.random() < 0.3
        has_stereotype = rng.random() < 0.2
        for s in range(n_sentences):
            pieces = _pieces_for_sentence(rng)
            if s == 0 and has_omission:
                pieces.insert(int(rng.integers(0, len(pieces) + 1)),
                              ([str(rng.choice(OMISSION_MARKERS))],
                               CodeLabel.OMISSION))
            if s == 0 and has_stereotype:
                pieces.insert(int(rng.integers(0, len(pieces) + 1)),
                              ([str(rng.choice(STEREOTYPE_MARKERS))],
                               CodeLabel.STEREOTYPE))
            first_in_sentence = True
            for tokens, label in pieces:
                span_start = None
                for tok in tokens:
                    if first_in_sentence:
                        tok = tok.capitalize()
                        first_in_sentence = False
                    elif text_parts:
                        text_parts.append(" ")
                        pos += 1
                    if span_start is None:
                        span_start = pos
                    text_parts.append(tok)
                    pos += len(tok)
                if label is not None:
                    annotations.append(AnnotationSpan(span_start, pos, label))
            text_parts.append(". ") if s < n_sentences - 1 else text_parts.append(".")
            pos += 2 if s < n_sentences - 1 else 1
        text = "".join(text_parts)
        corpus.append(Description(
            id=f"d{i:05d}",
            fonds_id=f"F{fonds:03d}",
            fonds_title=FONDS_TITLES[fonds],
            field=_FIELDS[int(rng.integers(0, len(_FIELDS)))],
            text=text,
            languages=tuple(fonds_langs[fonds]),
            annotations=tuple(sorted(annotations)),
        ))
    return corpus


def perturbed_coders(corpus: Corpus, n_coders: int, seed: int = 13,
                     drop: float = 0.15, widen: float = 0.2
                     ) -> dict[str, dict[str, list[AnnotationSpan]]]:
    """Imperfect per-coder copies of the gold annotations: some spans are
    dropped, some get their right edge widened (still overlapping)."""
    rng = np.random.default_rng(seed)
    coders: dict[str, dict[str, list[AnnotationSpan]]] = {}
    for c in range(n_coders):
        name = f"coder{c + 1}"
        per_desc: dict[str, list[AnnotationSpan]] = {}
        for d in corpus:
            spans = []
            for span in d.annotations:
                if rng.random() < drop:
                    continue
                end = span.end
                if rng.random() < widen:
                    end = min(len(d.text), end + int(rng.integers(1, 4)))
                spans.append(AnnotationSpan(span.start, end, span.label,
                                            f"coder:{name}"))
            per_desc[d.id] = spans
        coders[name] = per_desc
    return coders
