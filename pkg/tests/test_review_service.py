from __future__ import annotations

import io
import threading

import pytest
from fastapi.testclient import TestClient

from biaslens.cascade import PredRecord
from biaslens.corpus import CodeLabel, load_corpus
from biaslens.review.service import create_app
from biaslens.review.store import DecisionStore, export_accepted, merge_accepted
from biaslens.synthetic import synthetic_corpus

OMIT = CodeLabel.OMISSION
STEREO = CodeLabel.STEREOTYPE


@pytest.fixture()
def setup(tmp_path):
    corpus = synthetic_corpus(12, seed=41)
    scores = [0.9, 0.4, 0.7, -0.2]
    records = []
    for d, s in zip(corpus[:4], scores):
        records.append(PredRecord(
            id=d.id, start=0, end=len(d.text), label=OMIT,
            source="model:c2", fold=0, stage="osc",
            confidence=1.0 / (1.0 + pow(2.718281828, -s)), score=s))
    # one span-level flag on the first description
    d0 = corpus[0]
    records.append(PredRecord(id=d0.id, start=0, end=2,
                              label=CodeLabel.GENDERED_PRONOUN,
                              source="model:c2", fold=0, stage="lc",
                              confidence=0.8))
    store = DecisionStore(tmp_path / "decisions.jsonl")
    app = create_app(corpus, records, store)
    return corpus, records, store, TestClient(app), tmp_path


def test_queue_ordered_by_confidence_then_id(setup):
    corpus, records, store, client, _ = setup
    resp = client.get("/queue")
    assert resp.status_code == 200
    items = resp.json()["items"]
    confs = [it["confidence"] for it in items]
    assert confs == sorted(confs, reverse=True)
    # queue order equals raw-score order (logistic is monotone)
    scores = {r.id: r.score for r in records if r.score is not None}
    osc_sorted = sorted(scores, key=lambda i: -scores[i])
    queue_ids = [it["description_id"] for it in items]
    assert [i for i in queue_ids if i in scores] == osc_sorted


def test_queue_filters_and_errors(setup):
    corpus, records, store, client, _ = setup
    assert client.get("/queue", params={"label": "Bogus"}).status_code == 400
    assert client.get("/queue", params={"fonds": "nope"}).status_code == 400
    assert client.get("/queue", params={"status": "odd"}).status_code == 400
    ok = client.get("/queue", params={"label": "Omission"})
    assert ok.status_code == 200
    assert all(any(f["label"] == "Omission" for f in it["flags"])
               for it in ok.json()["items"])
    empty = client.get("/queue", params={"label": "Stereotype"})
    assert empty.status_code == 200 and empty.json()["items"] == []


def test_queue_pagination_disjoint_and_exhaustive(setup):
    corpus, records, store, client, _ = setup
    total = client.get("/queue").json()["total"]
    seen = []
    offset = 0
    while True:
        page = client.get("/queue", params={"limit": 2, "offset": offset}).json()
        ids = [it["description_id"] for it in page["items"]]
        assert not set(ids) & set(seen)
        seen += ids
        offset += 2
        if not page["items"]:
            break
    assert len(seen) == total


def test_queue_503_without_run():
    app = create_app([], [], None)
    client = TestClient(app)
    assert client.get("/queue").status_code == 503


def test_description_detail_and_404(setup):
    corpus, records, store, client, _ = setup
    d = corpus[0]
    resp = client.get(f"/descriptions/{d.id}")
    assert resp.status_code == 200
    body = resp.json()
    assert body["text"] == d.text
    assert len(body["model_spans"]) == 2
    for span in body["model_spans"] + body["gold_spans"]:
        assert 0 <= span["start"] < span["end"] <= len(d.text)
    assert {s["stage"] for s in body["model_spans"]} == {"osc", "lc"}
    assert client.get("/descriptions/zzz").status_code == 404


def _decision_body(corpus, records, verdict="accept"):
    d = corpus[0]
    return {"description_id": d.id,
            "span": {"start": 0, "end": 2, "label": "GenderedPronoun"},
            "verdict": verdict, "note": "looks right", "reviewer": "avery"}


def test_post_decision_validation(setup):
    corpus, records, store, client, _ = setup
    body = _decision_body(corpus, records)
    assert client.post("/decisions", json={**body, "verdict": "maybe"}
                       ).status_code == 422
    assert client.post("/decisions", json={**body, "description_id": "zzz"}
                       ).status_code == 404
    bad_span = {**body, "span": {"start": 1, "end": 3,
                                 "label": "GenderedPronoun"}}
    assert client.post("/decisions", json=bad_span).status_code == 404


def test_post_decision_appears_in_history(setup):
    corpus, records, store, client, _ = setup
    body = _decision_body(corpus, records)
    resp = client.post("/decisions", json=body,
                       headers={"Idempotency-Key": "k1"})
    assert resp.status_code == 201
    hist = client.get(f"/descriptions/{corpus[0].id}").json()["decisions"]
    assert len(hist) == 1 and hist[0]["verdict"] == "accept"
    # queue status flips to reviewed
    items = client.get("/queue", params={"status": "reviewed"}).json()["items"]
    assert corpus[0].id in {it["description_id"] for it in items}


def test_idempotent_replay_and_conflict(setup):
    corpus, records, store, client, _ = setup
    body = _decision_body(corpus, records)
    first = client.post("/decisions", json=body,
                        headers={"Idempotency-Key": "same"})
    again = client.post("/decisions", json=body,
                        headers={"Idempotency-Key": "same"})
    assert first.status_code == 201 and again.status_code == 200
    assert first.json()["decision_id"] == again.json()["decision_id"]
    assert len(store.history(corpus[0].id)) == 1
    other = {**body, "verdict": "reject"}
    conflict = client.post("/decisions", json=other,
                           headers={"Idempotency-Key": "same"})
    assert conflict.status_code == 409


def test_decision_survives_restart(setup):
    corpus, records, store, client, tmp_path = setup
    body = _decision_body(corpus, records)
    assert client.post("/decisions", json=body).status_code == 201
    # a fresh store over the same log stands in for a process restart
    revived = DecisionStore(tmp_path / "decisions.jsonl")
    hist = revived.history(corpus[0].id)
    assert len(hist) == 1 and hist[0].verdict == "accept"
    app2 = create_app(corpus, records, revived)
    client2 = TestClient(app2)
    resp = client2.get(f"/descriptions/{corpus[0].id}")
    assert len(resp.json()["decisions"]) == 1


def test_concurrent_posts_all_durable_with_total_order(setup):
    corpus, records, store, client, tmp_path = setup
    whole = {"description_id": corpus[0].id, "label": "Omission",
             "verdict": "unsure", "note": "", "reviewer": ""}
    span = _decision_body(corpus, records)

    def post(body, n):
        for i in range(n):
            r = client.post("/decisions", json={**body, "note": f"n{i}"})
            assert r.status_code == 201

    threads = [threading.Thread(target=post, args=(whole, 8)),
               threading.Thread(target=post, args=(span, 8))]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    decisions = store.all_decisions()
    assert len(decisions) == 16
    seqs = [d.seq for d in decisions]
    assert seqs == sorted(seqs) and len(set(seqs)) == 16
    revived = DecisionStore(tmp_path / "decisions.jsonl")
    assert len(revived.all_decisions()) == 16


def test_reviewing_never_reorders_unreviewed_items(setup):
    corpus, records, store, client, _ = setup
    before = [it["description_id"]
              for it in client.get("/queue").json()["items"]]
    decided = before[1]
    flag = next(r for r in records if r.id == decided and r.stage == "osc")
    client.post("/decisions", json={
        "description_id": decided,
        "span": {"start": flag.start, "end": flag.end,
                 "label": flag.label.value},
        "verdict": "reject", "note": "", "reviewer": "lee"})
    after = [it["description_id"]
             for it in client.get("/queue").json()["items"]]
    assert after == before  # full ordering is status-independent
    pending = [it["description_id"] for it in
               client.get("/queue", params={"status": "pending"}).json()["items"]]
    assert pending == [i for i in before if i != decided]


def test_export_policies(setup, tmp_path):
    corpus, records, store, client, _ = setup
    assert client.get("/export", params={"policy": "odd"}).status_code == 400
    # no decisions yet: empty export
    assert client.get("/export").text == ""
    body = _decision_body(corpus, records)
    client.post("/decisions", json=body)  # accept
    # accept then reject on the same whole-description target: excluded
    whole = {"description_id": corpus[1].id, "label": "Omission",
             "verdict": "accept", "note": "", "reviewer": "kim"}
    client.post("/decisions", json=whole)
    client.post("/decisions", json={**whole, "verdict": "reject"})
    text = client.get("/export").text
    path = tmp_path / "export.jsonl"
    path.write_text(text)
    exported = load_corpus(path)
    assert [d.id for d in exported] == [corpus[0].id]
    (span,) = exported[0].annotations
    assert span.label is CodeLabel.GENDERED_PRONOUN
    assert span.source == "coder:avery"


def test_merge_accepted_keeps_whole_corpus(setup, tmp_path):
    corpus, records, store, client, _ = setup
    client.post("/decisions", json=_decision_body(corpus, records))
    merged = merge_accepted(store, corpus)
    assert len(merged) == len(corpus)
    extra = set(merged[0].annotations) - set(corpus[0].annotations)
    assert len(extra) == 1 and next(iter(extra)).source == "coder:avery"
