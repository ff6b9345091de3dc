import json
import shutil

import pytest
from fastapi.testclient import TestClient

from beliefmap.analysis import run_analysis
from beliefmap.config import AnalysisConfig, analysis_config_to_mapping
from beliefmap.corpus import dumps_corpus
from beliefmap.mapgen import find_snippet
from beliefmap.server import create_app
from beliefmap.sim import SimConfig
from beliefmap.synth import generate_synthetic_corpus, paper_shaped_spec

from conftest import make_post


@pytest.fixture
def client(tmp_path):
    app = create_app(store_dir=str(tmp_path / "store"))
    with TestClient(app) as c:
        c.store_dir = tmp_path / "store"
        yield c


@pytest.fixture(scope="module")
def demo_corpus_text():
    spec = paper_shaped_spec(posts_per_room=20)
    return dumps_corpus(generate_synthetic_corpus(spec, seed=11))


def _default_config():
    return analysis_config_to_mapping(AnalysisConfig())


def _upload(client, text):
    resp = client.post("/corpora", content=text.encode("utf-8"))
    assert resp.status_code == 201, resp.text
    return resp.json()


# -- POST /corpora --------------------------------------------------------------

def test_upload_two_line_corpus(client):
    text = make_post("p1").to_record() + "\n" + make_post("p2", minute=1).to_record() + "\n"
    body = _upload(client, text)
    assert body["counts"] == {"groups": 1, "posts": 2}
    assert body["corpus_id"].startswith("c")


def test_upload_empty_body_zero_counts(client):
    body = _upload(client, "")
    assert body["counts"] == {"groups": 0, "posts": 0}


def test_upload_eleven_percent_malformed_is_400(client):
    lines = [make_post(f"p{i}", minute=i).to_record() for i in range(89)]
    lines += [f"broken {i}" for i in range(11)]
    resp = client.post("/corpora", content="\n".join(lines).encode("utf-8"))
    assert resp.status_code == 400
    body = resp.json()
    assert body["code"] == "corpus_integrity"
    assert len(body["details"]) == 11
    assert body["details"][0].startswith("line ")


def test_upload_is_content_addressed(client):
    text = make_post("p1").to_record() + "\n"
    id1 = _upload(client, text)["corpus_id"]
    id2 = _upload(client, text)["corpus_id"]
    assert id1 == id2


# -- POST /corpora/{id}/analyses --------------------------------------------------

def test_analysis_on_demo_corpus(client, demo_corpus_text):
    corpus_id = _upload(client, demo_corpus_text)["corpus_id"]
    resp = client.post(f"/corpora/{corpus_id}/analyses", json=_default_config())
    assert resp.status_code == 201, resp.text
    body = resp.json()
    assert body["status"] == "done"
    assert len(body["place_labels"]) == 4
    assert body["sequence_count"] == 4


def test_analysis_unknown_corpus_404(client):
    resp = client.post("/corpora/cdeadbeef/analyses", json=_default_config())
    assert resp.status_code == 404
    assert resp.json()["code"] == "unknown_corpus"


def test_analysis_invalid_config_422_with_field(client, demo_corpus_text):
    corpus_id = _upload(client, demo_corpus_text)["corpus_id"]
    cfg = _default_config()
    cfg["markers"]["similarity_threshold"] = 1.01
    resp = client.post(f"/corpora/{corpus_id}/analyses", json=cfg)
    assert resp.status_code == 422
    details = resp.json()["details"]
    assert any(d["field"] == "markers.similarity_threshold" for d in details)


def test_analysis_missing_key_422(client, demo_corpus_text):
    corpus_id = _upload(client, demo_corpus_text)["corpus_id"]
    cfg = _default_config()
    del cfg["terms"]["depth"]
    resp = client.post(f"/corpora/{corpus_id}/analyses", json=cfg)
    assert resp.status_code == 422
    assert "terms.depth" in resp.json()["message"]


def test_analysis_idempotent_resubmission(client, demo_corpus_text):
    corpus_id = _upload(client, demo_corpus_text)["corpus_id"]
    r1 = client.post(f"/corpora/{corpus_id}/analyses", json=_default_config()).json()
    r2 = client.post(f"/corpora/{corpus_id}/analyses", json=_default_config()).json()
    assert r1 == r2


def test_failed_run_visible_and_409_on_map(client):
    # No dm markers anywhere -> the pipeline fails, run lands in failed state.
    text = "\n".join(make_post(f"p{i}", minute=i, text=f"short chat {i}").to_record()
                     for i in range(5))
    corpus_id = _upload(client, text)["corpus_id"]
    resp = client.post(f"/corpora/{corpus_id}/analyses", json=_default_config())
    assert resp.status_code == 201
    body = resp.json()
    assert body["status"] == "failed"
    assert body["error"]
    run_id = body["run_id"]
    resp = client.get(f"/analyses/{run_id}/map")
    assert resp.status_code == 409
    assert resp.json()["code"] == "run_failed"


# -- GET endpoints -----------------------------------------------------------------

def _run(client, demo_corpus_text, config=None):
    corpus_id = _upload(client, demo_corpus_text)["corpus_id"]
    resp = client.post(f"/corpora/{corpus_id}/analyses",
                       json=config or _default_config())
    body = resp.json()
    assert body["status"] == "done"
    return corpus_id, body


def test_get_map_dot_and_structured(client, demo_corpus_text):
    _, run = _run(client, demo_corpus_text)
    resp = client.get(f"/analyses/{run['run_id']}/map", params={"format": "dot"})
    assert resp.status_code == 200
    assert resp.headers["content-type"].startswith("text/")
    assert resp.text.startswith("digraph")
    resp = client.get(f"/analyses/{run['run_id']}/map",
                      params={"format": "structured"})
    assert resp.json()["format"] == "beliefmap/v1"
    resp = client.get(f"/analyses/{run['run_id']}/map", params={"format": "png"})
    assert resp.status_code == 422


def test_get_map_unknown_run_404(client):
    resp = client.get("/analyses/rnope/map")
    assert resp.status_code == 404


def test_get_convergence(client, demo_corpus_text):
    _, run = _run(client, demo_corpus_text)
    body = client.get(f"/analyses/{run['run_id']}/convergence").json()
    ks = body["convergence"]["per_k"]
    assert [e["k"] for e in ks] == [1, 2, 3, 4]
    for e in ks:
        assert e["min"] <= e["median"] <= e["max"]


def test_sequence_posts_unknowns_and_filters(client, demo_corpus_text):
    corpus_id, run = _run(client, demo_corpus_text)
    run_id = run["run_id"]
    assert client.get(f"/analyses/{run_id}/sequences/99/posts").status_code == 404
    assert client.get(f"/analyses/{run_id}/sequences/0/posts",
                      params={"group": "nope"}).status_code == 404
    resp = client.get(f"/analyses/{run_id}/sequences/0/posts",
                      params={"group": "group1",
                              "contains": "zz-never-used-term"})
    assert resp.status_code == 200
    assert resp.json() == []


def test_sequence_posts_contains_matches_snippet_oracle(client, demo_corpus_text):
    corpus_id, run = _run(client, demo_corpus_text)
    triple = run["place_labels"][0].split("-")
    resp = client.get(f"/analyses/{run['run_id']}/sequences/0/posts",
                      params={"group": "group1", "contains": ",".join(triple)})
    rows = resp.json()
    assert rows
    lengths = [len(r["text"]) for r in rows]
    assert lengths == sorted(lengths)

    # cross-check against find_snippet on the same slice
    spec = paper_shaped_spec(posts_per_room=20)
    corpus = generate_synthetic_corpus(spec, seed=11)
    result = run_analysis(corpus, AnalysisConfig())
    posts_by_id = {p.post_id: p for p in corpus.posts}
    seq_posts = [posts_by_id[pid] for sl in result.slices
                 if sl.sequence_index == 0 and sl.group_id == "group1"
                 for pid in sl.post_ids]
    snip = find_snippet(seq_posts, triple)
    assert rows[0]["post_id"] == snip.post_id
    assert rows[0]["text"].startswith(snip.text)  # pre-truncation post


def test_statelessness_rerun_after_delete(client, demo_corpus_text):
    _, run = _run(client, demo_corpus_text)
    run_id = run["run_id"]
    dot1 = client.get(f"/analyses/{run_id}/map", params={"format": "dot"}).text
    shutil.rmtree(client.store_dir / "runs" / run_id)
    _, run2 = _run(client, demo_corpus_text)
    assert run2["run_id"] == run_id
    dot2 = client.get(f"/analyses/{run_id}/map", params={"format": "dot"}).text
    assert dot1 == dot2


# -- POST /simulations ---------------------------------------------------------------

def test_simulation_fixed_seed_same_corpus_id(client):
    cfg = {"dimensions": 2, "agent_count": 10, "sih": 0.0, "steps": 50,
           "seed": 5}
    id1 = client.post("/simulations", json=cfg).json()["posts_corpus_id"]
    id2 = client.post("/simulations", json=cfg).json()["posts_corpus_id"]
    assert id1 == id2


def test_simulation_stampede_regime(client):
    cfg = SimConfig(dimensions=2, agent_count=100, sih=2.0, steps=2000,
                    post_interval=2000, seed=0).to_mapping()
    resp = client.post("/simulations", json=cfg)
    assert resp.status_code == 201
    body = resp.json()
    assert body["regime"]["regime"] == "stampede"
    assert 0 <= body["comparison"]["node_jaccard"] <= 1


def test_simulation_zero_steps(client):
    cfg = {"steps": 0, "agent_count": 5, "seed": 1}
    body = client.post("/simulations", json=cfg).json()
    assert body["reconstruction"]["nodes"] == []
    assert body["comparison"] == {"node_jaccard": 0.0, "edge_jaccard": 0.0}


def test_simulation_invalid_config_422(client):
    resp = client.post("/simulations", json={"sih": -1.0})
    assert resp.status_code == 422
    resp = client.post("/simulations", json={"bogus_knob": 3})
    assert resp.status_code == 422
    resp = client.post("/simulations", json={"agent_count": 10000, "steps": 10000})
    assert resp.status_code == 422
