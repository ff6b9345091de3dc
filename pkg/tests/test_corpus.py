import json
from datetime import timedelta

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from beliefmap.corpus import (Corpus, dumps_corpus, format_timestamp,
                              gameplay_window, load_corpus, parse_corpus,
                              parse_timestamp, save_corpus, tokenize)
from beliefmap.errors import CorpusIntegrityError, WindowError

from conftest import T0, make_post


# -- tokenize ----------------------------------------------------------------

def test_tokenize_basic_rule_application():
    assert tokenize("Goblin! Attacks the ORC.") == ["goblin", "attacks", "the", "orc"]


def test_tokenize_keeps_apostrophes_drops_short():
    assert tokenize("I-I… can't") == ["can't"]


def test_tokenize_keeps_digit_tokens():
    # "d20" is removed later by stop-word filtering, not by the tokenizer.
    assert tokenize("d20 roll: 17") == ["d20", "roll", "17"]


@settings(max_examples=100, deadline=None)
@given(st.text(max_size=200))
def test_tokenize_idempotent_on_own_output(text):
    once = tokenize(text)
    assert tokenize(" ".join(once)) == once
    for tok in once:
        assert len(tok) >= 2
        assert all(c in "abcdefghijklmnopqrstuvwxyz0123456789'" for c in tok)


# -- timestamps --------------------------------------------------------------

def test_timestamp_round_trip_millisecond_precision():
    text = "2025-03-01T12:00:00.123Z"
    assert format_timestamp(parse_timestamp(text)) == text


def test_timestamp_accepts_offset_form():
    assert parse_timestamp("2025-03-01T12:00:00.000+00:00") == T0


# -- parse / save / load -----------------------------------------------------

def test_empty_file_is_empty_corpus(tmp_path):
    path = tmp_path / "empty.jsonl"
    path.write_text("", "utf-8")
    corpus = load_corpus(path)
    assert len(corpus) == 0
    assert corpus.groups == []


def test_two_good_one_malformed_loads_with_reject(tmp_path):
    good1 = make_post("p1").to_record()
    good2 = make_post("p2", minute=1).to_record()
    path = tmp_path / "c.jsonl"
    path.write_text(good1 + "\nnot json at all\n" + good2 + "\n", "utf-8")
    corpus = load_corpus(path)
    assert len(corpus) == 2
    rejects_path = tmp_path / "c.jsonl.rejects"
    assert rejects_path.exists()
    rejects = [json.loads(line) for line in rejects_path.read_text("utf-8").splitlines()]
    assert len(rejects) == 1
    assert rejects[0]["line"] == 2


def test_integrity_error_above_ten_percent():
    lines = [make_post(f"p{i}", minute=i).to_record() for i in range(10)]
    lines += ["broken", "{also broken"]
    with pytest.raises(CorpusIntegrityError) as err:
        parse_corpus("\n".join(lines))
    assert err.value.bad_lines == [11, 12]


def test_malformed_field_variants_rejected():
    bad = [
        '{"post_id": "x"}',
        json.dumps({"post_id": "x", "group_id": "g", "player_id": "p",
                    "role": "npc", "timestamp": "2025-03-01T12:00:00.000Z",
                    "text": "hi there"}),
        json.dumps({"post_id": "x", "group_id": "g", "player_id": "p",
                    "role": "player", "timestamp": "2025-03-01T12:00:00.000Z",
                    "text": "   "}),
    ]
    corpus, rejects = parse_corpus(make_post("ok").to_record() + "\n" + bad[0] + "\n")
    assert len(corpus) == 1 and len(rejects) == 1
    for line in bad[1:]:
        _, rejects = parse_corpus(make_post("ok").to_record() + "\n" + line + "\n")
        assert len(rejects) == 1


def test_duplicate_post_id_rejected():
    record = make_post("dup").to_record()
    corpus, rejects = parse_corpus(record + "\n" + record + "\n")
    assert len(corpus) == 1
    assert len(rejects) == 1
    assert "duplicate" in rejects[0].reason


def test_round_trip_identity(tmp_path, tiny_corpus):
    path = tmp_path / "round.jsonl"
    save_corpus(tiny_corpus, path)
    assert load_corpus(path) == tiny_corpus


def test_posts_sorted_by_group_time_ingestion():
    p_late = make_post("z1", group="g1", minute=5)
    p_early = make_post("z2", group="g1", minute=1)
    p_other = make_post("z3", group="g0", minute=9)
    text = "\n".join(p.to_record() for p in (p_late, p_early, p_other))
    corpus, _ = parse_corpus(text)
    assert [p.post_id for p in corpus.posts] == ["z3", "z2", "z1"]


def test_equal_timestamps_keep_ingestion_order():
    a = make_post("t1", minute=0, text="first form")
    b = make_post("t2", minute=0, text="second form")
    corpus, _ = parse_corpus(a.to_record() + "\n" + b.to_record() + "\n")
    assert [p.post_id for p in corpus.posts] == ["t1", "t2"]


# -- gameplay window ---------------------------------------------------------

def test_window_spanning_all_posts_is_identity(tiny_corpus):
    out = gameplay_window(tiny_corpus, {"g1": ("a1", "a3"), "g2": ("b1", "b3")})
    assert out == tiny_corpus


def test_window_of_zero_width_keeps_exactly_that_post(tiny_corpus):
    out = gameplay_window(tiny_corpus, {"g1": ("a2", "a2")})
    g1 = [p.post_id for p in out.posts if p.group_id == "g1"]
    assert g1 == ["a2"]
    # untouched group passes through
    assert [p.post_id for p in out.posts if p.group_id == "g2"] == ["b1", "b2", "b3"]


def test_window_trims_pregame_posts_against_filter_oracle():
    posts = [make_post(f"pre{i}", minute=i, text=f"offtopic chat {i} here")
             for i in range(10)]
    posts += [make_post(f"game{i}", minute=100 + i, text=f"in game move {i}")
              for i in range(90)]
    corpus = Corpus(posts)
    out = gameplay_window(corpus, {"g1": ("game0", "game89")})
    lo = T0 + timedelta(minutes=100)
    hi = T0 + timedelta(minutes=189)
    expected = [p.post_id for p in posts if lo <= p.timestamp <= hi]
    assert [p.post_id for p in out.posts] == expected
    assert len(out) == 90


def test_window_missing_marker_names_group(tiny_corpus):
    with pytest.raises(WindowError, match="g2"):
        gameplay_window(tiny_corpus, {"g2": ("a1", "b3")})  # a1 is in g1


def test_dumps_field_order_fixed(tiny_corpus):
    first_line = dumps_corpus(tiny_corpus).splitlines()[0]
    keys = list(json.loads(first_line))
    assert keys == ["post_id", "group_id", "player_id", "role", "timestamp", "text"]


def test_token_stream_invariants(tiny_corpus):
    from beliefmap.corpus import tokenize_post
    for post in tiny_corpus.posts:
        stream = tokenize_post(post)
        assert stream.post_id == post.post_id
        for tok in stream.tokens:
            assert len(tok) >= 2
            assert all(c in "abcdefghijklmnopqrstuvwxyz0123456789'" for c in tok)
