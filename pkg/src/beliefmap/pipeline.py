"""Sequential bag-of-words analysis: sequence slicing against the marker
alignment, term scoring (bow / tf-idf / co-occurrence centrality), place and
space term extraction, the subset convergence study, and the preliminary
even-split analysis."""

from __future__ import annotations

import itertools
import math
from collections import Counter
from collections.abc import Mapping
from dataclasses import dataclass, field

import numpy as np

from .corpus import Corpus, Post, ROLE_PLAYER, tokenize
from .errors import ConfigError, PipelineError
from .markers import MarkerAlignment
from .stopwords import StopWordList

MODE_BOW = "bow"
MODE_TFIDF = "tfidf"
MODE_CENTRALITY = "centrality"
MODES = (MODE_BOW, MODE_TFIDF, MODE_CENTRALITY)

_CENTRALITY_ITERATIONS = 100


@dataclass(frozen=True)
class SequenceSlice:
    group_id: str
    sequence_index: int
    bucket_index: int
    post_ids: tuple[str, ...]


@dataclass(frozen=True)
class TermList:
    scope: str
    mode: str
    depth: int
    entries: tuple[tuple[str, float], ...]

    @property
    def terms(self) -> tuple[str, ...]:
        return tuple(t for t, _ in self.entries)

    def top_terms(self, k: int) -> tuple[str, ...]:
        return self.terms[:k]

    def label(self, k: int = 3) -> str:
        return "-".join(self.top_terms(k))


def split_buckets(items: list, buckets: int) -> list[list]:
    """Split into `buckets` contiguous runs differing in size by at most one,
    earlier buckets taking the remainder."""
    if buckets < 1:
        raise ConfigError("buckets_per_sequence must be >= 1")
    base, extra = divmod(len(items), buckets)
    out = []
    start = 0
    for b in range(buckets):
        size = base + (1 if b < extra else 0)
        out.append(items[start:start + size])
        start += size
    return out


def slice_sequences(corpus: Corpus, alignment: MarkerAlignment,
                    buckets_per_sequence: int = 1) -> list[SequenceSlice]:
    """Per group, sequence s holds the posts strictly after marker s and
    strictly before marker s+1 (the tail after the last marker forms the
    final sequence); each sequence splits into contiguous buckets."""
    if buckets_per_sequence < 1:
        raise ConfigError("buckets_per_sequence must be >= 1")
    slices: list[SequenceSlice] = []
    for group_id, posts in corpus.by_group().items():
        positions = []
        index_of = {p.post_id: i for i, p in enumerate(posts)}
        for cluster in alignment.clusters:
            pid = cluster.posts.get(group_id)
            if pid is None or pid not in index_of:
                raise PipelineError(
                    f"alignment names no marker post for group {group_id!r}")
            positions.append(index_of[pid])
        for s, start in enumerate(positions):
            end = positions[s + 1] if s + 1 < len(positions) else len(posts)
            ids = [p.post_id for p in posts[start + 1:end]]
            for b, bucket in enumerate(split_buckets(ids, buckets_per_sequence)):
                slices.append(SequenceSlice(group_id, s, b, tuple(bucket)))
    slices.sort(key=lambda s: (s.sequence_index, s.group_id, s.bucket_index))
    return slices


def empty_slice_warnings(slices: list[SequenceSlice]) -> list[str]:
    return [
        f"empty bucket: group {s.group_id} sequence {s.sequence_index} "
        f"bucket {s.bucket_index}"
        for s in slices if not s.post_ids
    ]


def _rank(scores: dict[str, float], depth: int, scope: str, mode: str) -> TermList:
    entries = sorted(((t, s) for t, s in scores.items() if s > 0),
                     key=lambda e: (-e[1], e[0]))[:depth]
    return TermList(scope=scope, mode=mode, depth=depth,
                    entries=tuple((t, float(s)) for t, s in entries))


def score_terms(docs, mode: str, stopwords: frozenset[str], depth: int,
                scope: str = "") -> TermList:
    """Rank terms from token documents (or a raw count mapping, for bow).

    All modes drop stop words first, rank score-descending with
    lexicographic tie-break, then truncate to `depth`. tf-idf scores
    sum(tf * ln(N/df)) over posts, so a term in every post scores zero;
    centrality is damping-free power iteration on the post co-occurrence
    graph, L1-normalized.
    """
    if depth < 1:
        raise ConfigError("depth must be >= 1")
    if mode not in MODES:
        raise ConfigError(f"unknown term scoring mode {mode!r}")
    if isinstance(docs, Mapping):
        if mode != MODE_BOW:
            raise PipelineError(f"{mode} scoring needs per-post documents, not counts")
        counts = {t: float(n) for t, n in docs.items() if t not in stopwords}
        return _rank(counts, depth, scope, mode)

    docs = [[t for t in doc if t not in stopwords] for doc in docs]
    if mode == MODE_BOW:
        counts = Counter()
        for doc in docs:
            counts.update(doc)
        return _rank(dict(counts), depth, scope, mode)

    if mode == MODE_TFIDF:
        n_docs = len(docs)
        total = Counter()
        df = Counter()
        for doc in docs:
            total.update(doc)
            df.update(set(doc))
        scores = {t: total[t] * math.log(n_docs / df[t]) for t in total}
        return _rank(scores, depth, scope, mode)

    # Centrality over the term co-occurrence graph: edge weight = number of
    # posts where both terms appear.
    terms = sorted({t for doc in docs for t in doc})
    if not terms:
        return TermList(scope=scope, mode=mode, depth=depth, entries=())
    index = {t: i for i, t in enumerate(terms)}
    adj = np.zeros((len(terms), len(terms)))
    for doc in docs:
        present = sorted({index[t] for t in doc})
        for i, a in enumerate(present):
            for b in present[i + 1:]:
                adj[a, b] += 1.0
                adj[b, a] += 1.0
    # Lazy iteration (A + I): same principal eigenvector as A, but immune to
    # the period-two oscillation plain power iteration hits on bipartite
    # co-occurrence graphs (e.g. a hub-and-spokes fixture).
    x = np.full(len(terms), 1.0 / len(terms))
    for _ in range(_CENTRALITY_ITERATIONS):
        nxt = adj @ x + x
        norm = nxt.sum()
        if norm <= 0:
            x = np.zeros(len(terms))
            break
        x = nxt / norm
    if adj.sum() == 0:
        x = np.zeros(len(terms))
    return _rank({t: float(x[index[t]]) for t in terms}, depth, scope, mode)


def _docs_for(corpus_posts: dict[str, Post], post_ids, include_dm: bool) -> list[list[str]]:
    docs = []
    for pid in post_ids:
        post = corpus_posts[pid]
        if post.role != ROLE_PLAYER and not include_dm:
            continue
        docs.append(tokenize(post.text))
    return docs


def extract_places(corpus: Corpus, slices: list[SequenceSlice],
                   sequence_index: int, stopwords: StopWordList,
                   depth: int = 20, mode: str = MODE_BOW,
                   include_dm: bool = False) -> TermList:
    """Pool token counts across every group's buckets for one sequence and
    rank them; the top three entries label the place."""
    posts_by_id = {p.post_id: p for p in corpus.posts}
    ids = [pid for s in slices if s.sequence_index == sequence_index
           for pid in s.post_ids]
    docs = _docs_for(posts_by_id, ids, include_dm)
    if not docs:
        raise PipelineError(f"sequence {sequence_index} has no countable posts")
    return score_terms(docs, mode, stopwords.combined, depth,
                       scope=f"places:{sequence_index}")


def extract_spaces(corpus: Corpus, slices: list[SequenceSlice],
                   group_id: str, sequence_index: int, places: TermList,
                   stopwords: StopWordList, top: int = 3,
                   mode: str = MODE_BOW, include_dm: bool = False) -> TermList:
    """Group-specific top terms for one sequence after excluding the
    cross-group place list (at its full depth) and the stop words."""
    posts_by_id = {p.post_id: p for p in corpus.posts}
    ids = [pid for s in slices
           if s.sequence_index == sequence_index and s.group_id == group_id
           for pid in s.post_ids]
    docs = _docs_for(posts_by_id, ids, include_dm)
    excluded = stopwords.combined | set(places.terms)
    return score_terms(docs, mode, excluded, top,
                       scope=f"spaces:{group_id}:{sequence_index}")


@dataclass(frozen=True)
class ConvergencePair:
    subset_a: tuple[str, ...]
    subset_b: tuple[str, ...]
    diff: int


@dataclass(frozen=True)
class KStats:
    k: int
    pairs: tuple[ConvergencePair, ...]
    minimum: float
    q1: float
    median: float
    q3: float
    maximum: float


@dataclass(frozen=True)
class ConvergenceReport:
    mode: str  # "pairwise" or "vs_full"
    label_depth: int
    per_k: tuple[KStats, ...]

    def stats_for(self, k: int) -> KStats:
        for ks in self.per_k:
            if ks.k == k:
                return ks
        raise KeyError(k)


def triple_difference(triples_a: dict[int, tuple[str, ...]],
                      triples_b: dict[int, tuple[str, ...]]) -> int:
    """Sum over sequences of how many of A's label terms B lacks."""
    total = 0
    for s in triples_a:
        total += len(set(triples_a[s]) - set(triples_b.get(s, ())))
    return total


def _subset_triples(seq_group_counts: dict[int, dict[str, Counter]],
                    subset: tuple[str, ...], stopwords: frozenset[str],
                    label_depth: int) -> dict[int, tuple[str, ...]]:
    triples = {}
    for s, by_group in seq_group_counts.items():
        pooled = Counter()
        for g in subset:
            pooled.update(by_group.get(g, Counter()))
        ranked = sorted(((t, n) for t, n in pooled.items()
                         if t not in stopwords and n > 0),
                        key=lambda e: (-e[1], e[0]))
        triples[s] = tuple(t for t, _ in ranked[:label_depth])
    return triples


def convergence_study(corpus: Corpus, alignment: MarkerAlignment,
                      stopwords: StopWordList, label_depth: int = 3,
                      mode: str = "pairwise",
                      include_dm: bool = False) -> ConvergenceReport:
    """How much the per-sequence label triples differ between group subsets.

    For each subset size k in 1..G-1, every unordered pair of distinct
    k-subsets is compared: diff = sum over sequences of the label terms in
    one subset's triple missing from the other's. Mode "vs_full" instead
    compares each k-subset against the all-groups triple.
    """
    groups = corpus.groups
    if len(groups) < 2:
        raise PipelineError("convergence study needs at least 2 groups")
    if mode not in ("pairwise", "vs_full"):
        raise ConfigError(f"unknown convergence mode {mode!r}")

    slices = slice_sequences(corpus, alignment, buckets_per_sequence=1)
    posts_by_id = {p.post_id: p for p in corpus.posts}
    seq_group_counts: dict[int, dict[str, Counter]] = {}
    for sl in slices:
        counts = seq_group_counts.setdefault(sl.sequence_index, {}).setdefault(
            sl.group_id, Counter())
        for doc in _docs_for(posts_by_id, sl.post_ids, include_dm):
            counts.update(doc)

    combined = stopwords.combined
    full_triples = _subset_triples(seq_group_counts, tuple(groups), combined,
                                   label_depth)
    per_k = []
    for k in range(1, len(groups)):
        subsets = [tuple(c) for c in itertools.combinations(groups, k)]
        triples = {s: _subset_triples(seq_group_counts, s, combined, label_depth)
                   for s in subsets}
        pairs = []
        if mode == "pairwise":
            for a, b in itertools.combinations(subsets, 2):
                diff = max(triple_difference(triples[a], triples[b]),
                           triple_difference(triples[b], triples[a]))
                pairs.append(ConvergencePair(a, b, diff))
        else:
            for a in subsets:
                diff = max(triple_difference(triples[a], full_triples),
                           triple_difference(full_triples, triples[a]))
                pairs.append(ConvergencePair(a, tuple(groups), diff))
        diffs = [p.diff for p in pairs]
        q = np.percentile(diffs, [0, 25, 50, 75, 100])
        per_k.append(KStats(k=k, pairs=tuple(pairs),
                            minimum=float(q[0]), q1=float(q[1]),
                            median=float(q[2]), q3=float(q[3]),
                            maximum=float(q[4])))
    return ConvergenceReport(mode=mode, label_depth=label_depth,
                             per_k=tuple(per_k))


@dataclass(frozen=True)
class PreliminaryReport:
    group_id: str
    splits: int
    retained: dict[str, tuple[TermList, ...]]  # player -> one TermList per split
    headlines: tuple[TermList, ...]  # one per split
    warnings: tuple[str, ...]

    def headline_text(self, split: int) -> str:
        return ", ".join(self.headlines[split].terms)


def preliminary_even_split(corpus: Corpus, group_id: str,
                           stopwords: StopWordList, splits: int = 5,
                           top_fraction: float = 0.25,
                           headline_size: int = 2) -> PreliminaryReport:
    """Early-look analysis on one group: each player's posts divide into
    equal contiguous splits; per split the top fraction of the player's
    distinct terms by tf-idf (their posts as documents) are retained, and
    term centrality over all players' posts, restricted to the retained
    union, yields the split's headline terms."""
    if splits < 1:
        raise ConfigError("splits must be >= 1")
    posts = [p for p in corpus.posts
             if p.group_id == group_id and p.role == ROLE_PLAYER]
    if not posts:
        raise PipelineError(f"group {group_id!r} has no player posts")
    combined = stopwords.combined

    by_player: dict[str, list[Post]] = {}
    for p in posts:
        by_player.setdefault(p.player_id, []).append(p)

    warnings = []
    retained: dict[str, tuple[TermList, ...]] = {}
    split_docs: list[list[list[str]]] = [[] for _ in range(splits)]
    split_keep: list[set[str]] = [set() for _ in range(splits)]
    for player in sorted(by_player):
        own = by_player[player]
        if len(own) < splits:
            warnings.append(
                f"player {player} has {len(own)} posts for {splits} splits; "
                "some buckets are empty")
        buckets = split_buckets(own, splits)
        lists = []
        for b, bucket in enumerate(buckets):
            docs = [tokenize(p.text) for p in bucket]
            split_docs[b].extend(docs)
            distinct = {t for doc in docs for t in doc if t not in combined}
            ranked = score_terms(docs, MODE_TFIDF, combined,
                                 depth=max(1, len(distinct) or 1),
                                 scope=f"player:{player}:{b}")
            keep = math.ceil(top_fraction * len(distinct)) if distinct else 0
            kept = TermList(scope=ranked.scope, mode=ranked.mode,
                            depth=ranked.depth, entries=ranked.entries[:keep])
            split_keep[b].update(kept.terms)
            lists.append(kept)
        retained[player] = tuple(lists)

    headlines = []
    for b in range(splits):
        allowed = split_keep[b]
        docs = [[t for t in doc if t in allowed] for doc in split_docs[b]]
        headlines.append(score_terms(docs, MODE_CENTRALITY, frozenset(),
                                     depth=headline_size,
                                     scope=f"headline:{group_id}:{b}"))
    return PreliminaryReport(group_id=group_id, splits=splits,
                             retained=retained, headlines=tuple(headlines),
                             warnings=tuple(warnings))
