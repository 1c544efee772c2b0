"""Append-only decision log with crash durability.

One JSON line per decision, sequence-numbered, flushed and fsynced before
the caller is told the write succeeded.  The in-memory indexes (history per
description, idempotency keys, latest decision per target) are rebuilt from
the log on startup, so an acknowledged decision survives a process kill.
"""
from __future__ import annotations

import json
import os
import threading
import time
from dataclasses import dataclass
from pathlib import Path

from ..corpus import AnnotationSpan, CodeLabel, Corpus, Description, coder_source

VERDICTS = ("accept", "reject", "unsure")


@dataclass(frozen=True)
class StoredDecision:
    seq: int
    decision_id: str
    idempotency_key: str | None
    timestamp: float
    description_id: str
    start: int
    end: int
    label: str
    verdict: str
    note: str
    reviewer: str

    @property
    def target(self) -> tuple[str, int, int, str]:
        return (self.description_id, self.start, self.end, self.label)

    def to_dict(self) -> dict:
        return {
            "seq": self.seq,
            "decision_id": self.decision_id,
            "idempotency_key": self.idempotency_key,
            "timestamp": self.timestamp,
            "description_id": self.description_id,
            "span": {"start": self.start, "end": self.end, "label": self.label},
            "verdict": self.verdict,
            "note": self.note,
            "reviewer": self.reviewer,
        }


def _body_fingerprint(description_id: str, start: int, end: int, label: str,
                      verdict: str, note: str, reviewer: str) -> str:
    return json.dumps([description_id, start, end, label, verdict, note,
                       reviewer], sort_keys=True)


class DecisionStore:
    """Single-writer decision log; all mutation goes through one lock."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._decisions: list[StoredDecision] = []
        self._by_description: dict[str, list[StoredDecision]] = {}
        self._by_key: dict[str, tuple[str, StoredDecision]] = {}
        self._next_seq = 1
        if self.path.exists():
            self._replay()

    def _replay(self) -> None:
        with open(self.path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                rec = json.loads(line)
                span = rec["span"]
                d = StoredDecision(
                    seq=rec["seq"], decision_id=rec["decision_id"],
                    idempotency_key=rec.get("idempotency_key"),
                    timestamp=rec["timestamp"],
                    description_id=rec["description_id"],
                    start=span["start"], end=span["end"], label=span["label"],
                    verdict=rec["verdict"], note=rec.get("note", ""),
                    reviewer=rec.get("reviewer", ""))
                self._index(d)
                self._next_seq = max(self._next_seq, d.seq + 1)

    def _index(self, d: StoredDecision) -> None:
        self._decisions.append(d)
        self._by_description.setdefault(d.description_id, []).append(d)
        if d.idempotency_key:
            self._by_key[d.idempotency_key] = (
                _body_fingerprint(d.description_id, d.start, d.end, d.label,
                                  d.verdict, d.note, d.reviewer), d)

    def append(self, description_id: str, start: int, end: int, label: str,
               verdict: str, note: str, reviewer: str,
               idempotency_key: str | None = None
               ) -> tuple[StoredDecision, bool]:
        """Durably record one decision.  Returns (decision, created); a
        replay of a known idempotency key with the same body returns the
        stored decision with created=False, a different body raises
        KeyError."""
        if verdict not in VERDICTS:
            raise ValueError(f"invalid verdict {verdict!r}")
        fingerprint = _body_fingerprint(description_id, start, end, label,
                                        verdict, note, reviewer)
        with self._lock:
            if idempotency_key and idempotency_key in self._by_key:
                stored_fp, stored = self._by_key[idempotency_key]
                if stored_fp != fingerprint:
                    raise KeyError(
                        f"idempotency key {idempotency_key!r} reused with a"
                        " different body")
                return stored, False
            d = StoredDecision(
                seq=self._next_seq, decision_id=f"dec-{self._next_seq:08d}",
                idempotency_key=idempotency_key, timestamp=time.time(),
                description_id=description_id, start=start, end=end,
                label=label, verdict=verdict, note=note, reviewer=reviewer)
            line = json.dumps(d.to_dict(), ensure_ascii=False,
                              separators=(",", ":"))
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(line + "\n")
                fh.flush()
                os.fsync(fh.fileno())
            self._next_seq += 1
            self._index(d)
            return d, True

    def history(self, description_id: str) -> list[StoredDecision]:
        with self._lock:
            return list(self._by_description.get(description_id, []))

    def all_decisions(self) -> list[StoredDecision]:
        with self._lock:
            return list(self._decisions)

    def reviewed_ids(self) -> set[str]:
        with self._lock:
            return set(self._by_description)

    def latest_per_target(self) -> dict[tuple[str, int, int, str], StoredDecision]:
        """Later sequence numbers supersede earlier ones on the same target;
        every raw decision stays in the log."""
        latest: dict[tuple[str, int, int, str], StoredDecision] = {}
        for d in self.all_decisions():
            latest[d.target] = d
        return latest


def export_accepted(store: DecisionStore, corpus: Corpus) -> list[Description]:
    """Corpus-augmentation records: descriptions carrying their accepted
    spans (latest decision per target wins), span source set to the
    reviewer.  Descriptions with no accepted span are omitted."""
    by_id = {d.id: d for d in corpus}
    accepted: dict[str, list[AnnotationSpan]] = {}
    for decision in store.latest_per_target().values():
        if decision.verdict != "accept":
            continue
        if decision.description_id not in by_id:
            continue
        accepted.setdefault(decision.description_id, []).append(AnnotationSpan(
            start=decision.start, end=decision.end,
            label=CodeLabel(decision.label),
            source=coder_source(decision.reviewer or "reviewer")))
    out: list[Description] = []
    for d in corpus:
        if d.id in accepted:
            out.append(Description(
                id=d.id, fonds_id=d.fonds_id, fonds_title=d.fonds_title,
                field=d.field, text=d.text, languages=d.languages,
                annotations=tuple(sorted(accepted[d.id]))))
    return out


def merge_accepted(store: DecisionStore, corpus: Corpus) -> list[Description]:
    """Full corpus with accepted spans appended to the original
    annotations (the review-export merge used for retraining)."""
    augmented = {d.id: d for d in export_accepted(store, corpus)}
    out: list[Description] = []
    for d in corpus:
        extra = augmented.get(d.id)
        if extra is None:
            out.append(d)
        else:
            merged = tuple(sorted(set(d.annotations) | set(extra.annotations)))
            out.append(Description(
                id=d.id, fonds_id=d.fonds_id, fonds_title=d.fonds_title,
                field=d.field, text=d.text, languages=d.languages,
                annotations=merged))
    return out
