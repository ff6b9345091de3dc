"""End-to-end analysis orchestration shared by the CLI and the server:
stop-word induction, marker alignment, slicing, place/space extraction,
snippets, map assembly, and the convergence study — then the fixed-name
artifact files."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from . import mapgen
from .config import AnalysisConfig, analysis_config_to_mapping
from .corpus import Corpus, Post
from .errors import PipelineError
from .mapgen import BeliefMap, Snippet, build_map, find_snippet
from .markers import MarkerAlignment, detect_markers
from .pipeline import (ConvergenceReport, SequenceSlice, TermList,
                       convergence_study, empty_slice_warnings, extract_places,
                       extract_spaces, slice_sequences)
from .stopwords import StopWordList, induce_stopwords, load_base_list

ARTIFACT_NAMES = ("map.dot", "map.structured", "places.tsv", "spaces.tsv",
                  "convergence.tsv", "stopwords.txt", "diagnostics.txt")


@dataclass
class AnalysisResult:
    config: AnalysisConfig
    corpus: Corpus
    stopwords: StopWordList
    alignment: MarkerAlignment
    slices: list[SequenceSlice]
    places: dict[int, TermList]
    spaces: dict[tuple[int, str], TermList]
    snippets: dict[tuple[int, str], Snippet]
    belief_map: BeliefMap
    convergence: ConvergenceReport | None
    diagnostics: list[str] = field(default_factory=list)

    @property
    def sequence_count(self) -> int:
        return len(self.alignment.clusters)


def run_analysis(corpus: Corpus, config: AnalysisConfig) -> AnalysisResult:
    if config.groups_include:
        corpus = corpus.restricted_to(config.groups_include)
    if not corpus.posts:
        raise PipelineError("analysis corpus is empty")

    base = load_base_list(config.stopwords_base_path or None)
    stopwords = induce_stopwords(
        corpus, base,
        ratio_threshold=config.stopwords_ratio_threshold,
        min_count=config.stopwords_min_count,
        extra=config.stopwords_extra,
        include_dm=config.counts_include_dm)

    alignment = detect_markers(
        corpus,
        similarity_threshold=config.markers_similarity_threshold,
        min_tokens=config.markers_min_tokens)
    slices = slice_sequences(corpus, alignment,
                             buckets_per_sequence=config.slices_buckets_per_sequence)
    diagnostics = list(alignment.diagnostics)
    diagnostics.extend(empty_slice_warnings(slices))

    posts_by_id = {p.post_id: p for p in corpus.posts}
    groups = corpus.groups
    places: dict[int, TermList] = {}
    spaces: dict[tuple[int, str], TermList] = {}
    snippets: dict[tuple[int, str], Snippet] = {}
    for s in range(alignment.sequence_count):
        places[s] = extract_places(
            corpus, slices, s, stopwords,
            depth=config.terms_depth, mode=config.terms_mode,
            include_dm=config.counts_include_dm)
        for g in groups:
            spaces[(s, g)] = extract_spaces(
                corpus, slices, g, s, places[s], stopwords,
                top=config.terms_label_depth, mode=config.terms_mode,
                include_dm=config.counts_include_dm)
            seq_posts = [posts_by_id[pid] for sl in slices
                         if sl.sequence_index == s and sl.group_id == g
                         for pid in sl.post_ids]
            snip = None
            place_triple = places[s].top_terms(config.terms_label_depth)
            if place_triple:
                snip = find_snippet(seq_posts, place_triple)
            if snip is None and spaces[(s, g)].terms:
                snip = find_snippet(seq_posts, spaces[(s, g)].terms)
            if snip is not None:
                snippets[(s, g)] = snip

    belief_map = build_map(places, spaces, snippets,
                           sequence_count=alignment.sequence_count,
                           label_depth=config.terms_label_depth)
    convergence = None
    if len(groups) >= 2:
        convergence = convergence_study(
            corpus, alignment, stopwords,
            label_depth=config.terms_label_depth,
            include_dm=config.counts_include_dm)
    else:
        diagnostics.append("convergence study skipped: fewer than 2 groups")
    return AnalysisResult(
        config=config, corpus=corpus, stopwords=stopwords, alignment=alignment,
        slices=slices, places=places, spaces=spaces, snippets=snippets,
        belief_map=belief_map, convergence=convergence, diagnostics=diagnostics)


def _places_tsv(result: AnalysisResult) -> str:
    lines = ["sequence\trank\tterm\tscore"]
    for s in sorted(result.places):
        for rank, (term, score) in enumerate(result.places[s].entries, start=1):
            lines.append(f"{s}\t{rank}\t{term}\t{score:g}")
    return "\n".join(lines) + "\n"


def _spaces_tsv(result: AnalysisResult) -> str:
    lines = ["group\tsequence\trank\tterm\tscore"]
    for (s, g) in sorted(result.spaces, key=lambda k: (k[1], k[0])):
        for rank, (term, score) in enumerate(result.spaces[(s, g)].entries, start=1):
            lines.append(f"{g}\t{s}\t{rank}\t{term}\t{score:g}")
    return "\n".join(lines) + "\n"


def _convergence_tsv(result: AnalysisResult) -> str:
    lines = ["k\tpairs\tmin\tq1\tmedian\tq3\tmax"]
    if result.convergence is not None:
        for ks in result.convergence.per_k:
            lines.append(
                f"{ks.k}\t{len(ks.pairs)}\t{ks.minimum:g}\t{ks.q1:g}"
                f"\t{ks.median:g}\t{ks.q3:g}\t{ks.maximum:g}")
    return "\n".join(lines) + "\n"


def _diagnostics_text(result: AnalysisResult) -> str:
    lines = ["# markers"]
    for i, cluster in enumerate(result.alignment.clusters):
        members = ", ".join(f"{g}={cluster.posts[g]}"
                            for g in sorted(cluster.posts))
        lines.append(f"marker {i} at {cluster.timestamp.isoformat()}: {members}")
    lines.append("# warnings")
    lines.extend(result.diagnostics)
    return "\n".join(lines) + "\n"


def write_artifacts(result: AnalysisResult, outdir) -> list[str]:
    """Write the seven fixed-name artifacts; returns the file names."""
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "map.dot").write_text(
        mapgen.export_map(result.belief_map, mapgen.FORMAT_DOT), "utf-8")
    (out / "map.structured").write_text(
        mapgen.export_map(result.belief_map, mapgen.FORMAT_STRUCTURED), "utf-8")
    (out / "places.tsv").write_text(_places_tsv(result), "utf-8")
    (out / "spaces.tsv").write_text(_spaces_tsv(result), "utf-8")
    (out / "convergence.tsv").write_text(_convergence_tsv(result), "utf-8")
    (out / "stopwords.txt").write_text(result.stopwords.dumps(), "utf-8")
    (out / "diagnostics.txt").write_text(_diagnostics_text(result), "utf-8")
    return list(ARTIFACT_NAMES)


def result_to_obj(result: AnalysisResult) -> dict:
    """Full structured outputs for the run store and the HTTP responses."""
    conv = None
    if result.convergence is not None:
        conv = {
            "mode": result.convergence.mode,
            "label_depth": result.convergence.label_depth,
            "per_k": [
                {"k": ks.k, "pairs": len(ks.pairs), "min": ks.minimum,
                 "q1": ks.q1, "median": ks.median, "q3": ks.q3,
                 "max": ks.maximum}
                for ks in result.convergence.per_k
            ],
        }
    return {
        "config": analysis_config_to_mapping(result.config),
        "groups": result.corpus.groups,
        "sequence_count": result.sequence_count,
        "place_labels": [p.label for p in result.belief_map.places],
        "map": mapgen.belief_map_to_obj(result.belief_map),
        "convergence": conv,
        "diagnostics": result.diagnostics,
        "slices": [
            {"group": sl.group_id, "sequence": sl.sequence_index,
             "bucket": sl.bucket_index, "post_ids": list(sl.post_ids)}
            for sl in result.slices
        ],
        "markers": [
            {"index": i,
             "timestamp": c.timestamp.isoformat(),
             "posts": dict(sorted(c.posts.items()))}
            for i, c in enumerate(result.alignment.clusters)
        ],
    }
