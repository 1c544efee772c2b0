"""Subword-aware word embeddings.

Skip-gram with negative sampling over character n-gram buckets (n in 3..6,
FNV-1a hashed).  Training is single-threaded and fully seeded: window
reductions, negative draws, and the learning-rate schedule are generated
up front per sentence, so a fixed seed reproduces the model exactly.
"""
from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .. import kernels
from ..corpus import Corpus, Description, TokenizedDescription, preprocess
from ..errors import EmptyCorpus

NGRAM_MIN = 3
NGRAM_MAX = 6
DEFAULT_BUCKETS = 200_000
DEFAULT_LR = 0.025
_MAGIC = b"BLEM"
_VERSION = 1


def _fnv1a(data: bytes) -> int:
    h = 0x811C9DC5
    for b in data:
        h = ((h ^ b) * 0x01000193) & 0xFFFFFFFF
    return h


def char_ngram_ids(token: str, buckets: int) -> list[int]:
    """Hashed bucket ids of the wrapped token's character n-grams.
    Repeated n-grams keep their multiplicity."""
    wrapped = f"<{token}>"
    ids = []
    for n in range(NGRAM_MIN, NGRAM_MAX + 1):
        for i in range(len(wrapped) - n + 1):
            ids.append(_fnv1a(wrapped[i:i + n].encode("utf-8")) % buckets)
    return ids


@dataclass
class EmbeddingModel:
    dim: int
    window: int
    epochs: int
    negatives: int
    min_count: int
    seed: int
    buckets: int
    lr: float
    vocab: dict[str, int]
    vec_word: np.ndarray   # (V, dim) float32
    vec_ngram: np.ndarray  # (buckets, dim) float32

    def lookup(self, token: str) -> np.ndarray:
        return embed_token(self, token)

    @property
    def config(self) -> dict:
        return {"dim": self.dim, "window": self.window, "epochs": self.epochs,
                "negatives": self.negatives, "min_count": self.min_count,
                "seed": self.seed, "buckets": self.buckets, "lr": self.lr}


def embed_token(m: EmbeddingModel, token: str) -> np.ndarray:
    """In-vocab: word vector plus the mean of its n-gram vectors.
    Out of vocab: mean of n-gram vectors.  No n-grams at all: zeros."""
    gram_ids = char_ngram_ids(token, m.buckets) if token else []
    out = np.zeros(m.dim, dtype=np.float32)
    if gram_ids:
        out += m.vec_ngram[gram_ids].mean(axis=0)
    idx = m.vocab.get(token)
    if idx is not None:
        out += m.vec_word[idx]
    return out


def _sentence_surfaces(corpus: Corpus,
                       tokenized: dict[str, TokenizedDescription] | None
                       ) -> list[list[str]]:
    sentences = []
    for d in corpus:
        t = tokenized[d.id] if tokenized else preprocess(d)
        for lo, hi in t.sentences:
            sentences.append([tok.surface for tok in t.tokens[lo:hi]])
    return sentences


def train_embeddings(corpus: Corpus, dim: int = 100, window: int = 5,
                     epochs: int = 5, negatives: int = 5, min_count: int = 1,
                     seed: int = 22, buckets: int = DEFAULT_BUCKETS,
                     lr: float = DEFAULT_LR,
                     tokenized: dict[str, TokenizedDescription] | None = None
                     ) -> EmbeddingModel:
    if not corpus:
        raise EmptyCorpus("cannot train embeddings on an empty corpus")
    sentences = _sentence_surfaces(corpus, tokenized)

    counts: dict[str, int] = {}
    for sent in sentences:
        for tok in sent:
            counts[tok] = counts.get(tok, 0) + 1
    vocab_items = sorted(
        ((tok, c) for tok, c in counts.items() if c >= min_count),
        key=lambda kv: (-kv[1], kv[0]))
    vocab = {tok: i for i, (tok, _) in enumerate(vocab_items)}
    V = len(vocab)
    if V == 0:
        raise EmptyCorpus("no token reaches min_count")

    # per-vocab-word n-gram bucket ids, flattened for the kernel
    offsets = np.zeros(V + 1, dtype=np.int64)
    flat: list[int] = []
    for tok, i in vocab.items():
        ids = char_ngram_ids(tok, buckets)
        flat.extend(ids)
        offsets[i + 1] = len(ids)
    np.cumsum(offsets, out=offsets)
    ngrams_flat = np.asarray(flat, dtype=np.int32)

    # unigram^0.75 noise distribution
    freq = np.array([c for _, c in vocab_items], dtype=np.float64) ** 0.75
    cdf = np.cumsum(freq / freq.sum())

    rng = np.random.default_rng(np.random.SeedSequence(seed))
    vec_word = ((rng.random((V, dim), dtype=np.float32) - 0.5) / dim)
    vec_ngram = ((rng.random((buckets, dim), dtype=np.float32) - 0.5) / dim)
    vec_out = np.zeros((V, dim), dtype=np.float32)

    id_sentences = []
    for sent in sentences:
        ids = np.array([vocab[t] for t in sent if t in vocab], dtype=np.int32)
        if len(ids):
            id_sentences.append(ids)
    total = epochs * sum(len(s) for s in id_sentences)
    if total == 0:
        raise EmptyCorpus("no trainable tokens")

    done = 0
    for _ in range(epochs):
        for ids in id_sentences:
            n = len(ids)
            reduced = rng.integers(1, window + 1, size=n).astype(np.int32)
            pairs = 0
            for i in range(n):
                b = int(reduced[i])
                pairs += min(n, i + b + 1) - max(0, i - b) - 1
            draws = np.searchsorted(
                cdf, rng.random(max(pairs, 1) * negatives), side="right"
            ).astype(np.int32)
            progress = (np.arange(n, dtype=np.float64) + done) / total
            alphas = lr * np.maximum(1.0 - progress, 1e-4)
            kernels.sgns_sentence(vec_word, vec_ngram, vec_out, ids,
                                  ngrams_flat, offsets, reduced, draws,
                                  alphas, negatives)
            done += n

    return EmbeddingModel(dim=dim, window=window, epochs=epochs,
                          negatives=negatives, min_count=min_count, seed=seed,
                          buckets=buckets, lr=lr, vocab=vocab,
                          vec_word=vec_word, vec_ngram=vec_ngram)


def save_embeddings(m: EmbeddingModel, path: str | Path) -> None:
    """Binary layout: magic, version, dim, vocab size, bucket count, config
    JSON, length-prefixed vocab strings, then the float32 vector rows."""
    cfg = json.dumps({"window": m.window, "epochs": m.epochs,
                      "negatives": m.negatives, "min_count": m.min_count,
                      "seed": m.seed, "lr": m.lr},
                     sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<IIII", _VERSION, m.dim, len(m.vocab), m.buckets))
        fh.write(struct.pack("<I", len(cfg)))
        fh.write(cfg)
        for tok in m.vocab:  # insertion order == id order
            raw = tok.encode("utf-8")
            fh.write(struct.pack("<H", len(raw)))
            fh.write(raw)
        fh.write(np.ascontiguousarray(m.vec_word, dtype="<f4").tobytes())
        fh.write(np.ascontiguousarray(m.vec_ngram, dtype="<f4").tobytes())


def load_embeddings(path: str | Path) -> EmbeddingModel:
    with open(path, "rb") as fh:
        if fh.read(4) != _MAGIC:
            raise ValueError(f"{path}: not an embedding model file")
        version, dim, V, buckets = struct.unpack("<IIII", fh.read(16))
        if version != _VERSION:
            raise ValueError(f"{path}: unsupported version {version}")
        (cfg_len,) = struct.unpack("<I", fh.read(4))
        cfg = json.loads(fh.read(cfg_len).decode("utf-8"))
        vocab: dict[str, int] = {}
        for i in range(V):
            (tok_len,) = struct.unpack("<H", fh.read(2))
            vocab[fh.read(tok_len).decode("utf-8")] = i
        vec_word = np.frombuffer(fh.read(V * dim * 4), dtype="<f4"
                                 ).reshape(V, dim).copy()
        vec_ngram = np.frombuffer(fh.read(buckets * dim * 4), dtype="<f4"
                                  ).reshape(buckets, dim).copy()
    return EmbeddingModel(dim=dim, window=cfg["window"], epochs=cfg["epochs"],
                          negatives=cfg["negatives"],
                          min_count=cfg["min_count"], seed=cfg["seed"],
                          buckets=buckets, lr=cfg["lr"], vocab=vocab,
                          vec_word=vec_word, vec_ngram=vec_ngram)
