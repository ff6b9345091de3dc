"""Cross-group marker alignment: find the near-verbatim dm texts (room
introductions) that every group received, linking posts whose token sets
exceed a Jaccard threshold and keeping only clusters with exactly one post
per group in a temporally consistent order."""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime

from .corpus import Corpus, Post, ROLE_DM, tokenize
from .errors import AlignmentError


def jaccard(a: set[str], b: set[str]) -> float:
    if not a and not b:
        return 0.0
    return len(a & b) / len(a | b)


@dataclass(frozen=True)
class MarkerCluster:
    posts: dict[str, str]  # group_id -> post_id
    representative_text: str
    timestamp: datetime  # earliest member timestamp

    def __eq__(self, other) -> bool:
        return (isinstance(other, MarkerCluster)
                and self.posts == other.posts
                and self.representative_text == other.representative_text
                and self.timestamp == other.timestamp)


@dataclass
class MarkerAlignment:
    clusters: list[MarkerCluster]
    diagnostics: list[str] = field(default_factory=list)

    @property
    def sequence_count(self) -> int:
        # Posts after marker k and before marker k+1 are sequence k; the tail
        # after the last marker is the final sequence.
        return len(self.clusters)


def detect_markers(corpus: Corpus, similarity_threshold: float = 0.8,
                   min_tokens: int = 50) -> MarkerAlignment:
    groups = corpus.groups
    if not groups:
        raise AlignmentError("empty corpus has no markers")

    candidates: list[Post] = []
    by_group: dict[str, int] = {g: 0 for g in groups}
    token_sets: list[set[str]] = []
    for post in corpus.posts:
        if post.role != ROLE_DM:
            continue
        toks = tokenize(post.text)
        if len(toks) < min_tokens:
            continue
        candidates.append(post)
        token_sets.append(set(toks))
        by_group[post.group_id] += 1
    missing = sorted(g for g, n in by_group.items() if n == 0)
    if missing:
        raise AlignmentError(
            f"group(s) without dm marker candidates (>= {min_tokens} tokens): "
            f"{', '.join(missing)}")

    n = len(candidates)
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i in range(n):
        for j in range(i + 1, n):
            if candidates[i].group_id == candidates[j].group_id:
                continue
            if jaccard(token_sets[i], token_sets[j]) >= similarity_threshold:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[ri] = rj

    components: dict[int, list[int]] = {}
    for i in range(n):
        components.setdefault(find(i), []).append(i)

    diagnostics: list[str] = []
    full: list[MarkerCluster] = []
    partial: list[list[int]] = []
    for members in components.values():
        member_groups = [candidates[i].group_id for i in members]
        if sorted(member_groups) == groups:
            posts = {candidates[i].group_id: candidates[i].post_id for i in members}
            earliest = min(members, key=lambda i: (candidates[i].timestamp,
                                                   candidates[i].post_id))
            full.append(MarkerCluster(
                posts=posts,
                representative_text=candidates[earliest].text,
                timestamp=candidates[earliest].timestamp,
            ))
        else:
            partial.append(members)

    partial.sort(key=lambda m: (-len({candidates[i].group_id for i in m}),
                                sorted(candidates[i].post_id for i in m)))
    for members in partial[:20]:
        covered = sorted({candidates[i].group_id for i in members})
        ids = sorted(candidates[i].post_id for i in members)
        diagnostics.append(
            f"partial cluster covering {len(covered)}/{len(groups)} groups "
            f"({', '.join(covered)}): {', '.join(ids)}")

    if not full:
        raise AlignmentError(
            "no marker cluster covers all groups", diagnostics=diagnostics)

    full.sort(key=lambda c: (c.timestamp, sorted(c.posts.values())[0]))

    # Keep the largest subsequence of clusters whose per-group timestamps all
    # increase; clusters that cross another group's order are dropped.
    ts_by_id = {p.post_id: p.timestamp for p in corpus.posts}

    def precedes(a: MarkerCluster, b: MarkerCluster) -> bool:
        return all(ts_by_id[a.posts[g]] < ts_by_id[b.posts[g]] for g in groups)

    k = len(full)
    best_len = [1] * k
    prev = [-1] * k
    for j in range(k):
        for i in range(j):
            if precedes(full[i], full[j]) and best_len[i] + 1 > best_len[j]:
                best_len[j] = best_len[i] + 1
                prev[j] = i
    end = max(range(k), key=lambda j: (best_len[j], -j))
    chain = []
    while end != -1:
        chain.append(full[end])
        end = prev[end]
    chain.reverse()
    dropped = [c for c in full if all(c is not kept for kept in chain)]
    for c in dropped:
        diagnostics.append(
            "dropped order-inconsistent marker cluster at "
            f"{c.timestamp.isoformat()}: {', '.join(sorted(c.posts.values()))}")
    return MarkerAlignment(clusters=chain, diagnostics=diagnostics)
