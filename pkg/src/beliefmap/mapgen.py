"""Belief place/space map assembly, snippet retrieval, environment
reconstruction from simulator post logs, and dot/structured export."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .corpus import Post, tokenize
from .errors import MapgenError
from .pipeline import TermList
from .sim import AgentPost, Environment

SNIPPET_MAX_LEN = 160
ELLIPSIS = "\u2026"


@dataclass(frozen=True)
class Snippet:
    author: str
    text: str  # at most max_len characters; the ellipsis is added on display
    truncated: bool
    post_id: str

    def display(self) -> str:
        return self.text + ELLIPSIS if self.truncated else self.text


def find_snippet(posts: list[Post], terms, max_len: int = SNIPPET_MAX_LEN) -> Snippet | None:
    """Shortest post whose token set contains every given term (ties to the
    earliest timestamp), truncated to max_len characters."""
    wanted = set(terms)
    if not wanted:
        raise MapgenError("find_snippet needs at least one term")
    qualifying = [p for p in posts if wanted.issubset(set(tokenize(p.text)))]
    if not qualifying:
        return None
    best = min(qualifying, key=lambda p: (len(p.text), p.timestamp, p.post_id))
    truncated = len(best.text) > max_len
    return Snippet(author=best.player_id,
                   text=best.text[:max_len] if truncated else best.text,
                   truncated=truncated, post_id=best.post_id)


@dataclass(frozen=True)
class PlaceNode:
    sequence_index: int
    label: str
    terms: TermList


@dataclass
class BeliefMap:
    places: list[PlaceNode]
    # (sequence_index, group_id) -> up to three space terms / optional snippet
    spaces: dict[tuple[int, str], TermList] = field(default_factory=dict)
    snippets: dict[tuple[int, str], Snippet] = field(default_factory=dict)

    @property
    def groups(self) -> list[str]:
        gs = {g for _, g in self.spaces} | {g for _, g in self.snippets}
        return sorted(gs)

    def __eq__(self, other) -> bool:
        return (isinstance(other, BeliefMap)
                and self.places == other.places
                and self.spaces == other.spaces
                and self.snippets == other.snippets)


def build_map(places: dict[int, TermList],
              spaces: dict[tuple[int, str], TermList] | None = None,
              snippets: dict[tuple[int, str], Snippet] | None = None,
              sequence_count: int | None = None,
              label_depth: int = 3) -> BeliefMap:
    """One place node per sequence in order; space triples and snippets hang
    off their (place, group) pair. Missing places for any expected sequence
    is an error."""
    spaces = spaces or {}
    snippets = snippets or {}
    if sequence_count is None:
        sequence_count = (max(places) + 1) if places else 0
    if sequence_count < 1:
        raise MapgenError("a belief map needs at least one sequence")
    missing = [s for s in range(sequence_count) if s not in places]
    if missing:
        raise MapgenError(f"missing place terms for sequence(s) {missing}")
    for (s, g) in list(spaces) + list(snippets):
        if not (0 <= s < sequence_count):
            raise MapgenError(f"sequence {s} out of range for this map")
    nodes = [PlaceNode(sequence_index=s, label=places[s].label(label_depth),
                       terms=places[s])
             for s in range(sequence_count)]
    return BeliefMap(places=nodes, spaces=dict(spaces), snippets=dict(snippets))


@dataclass
class ReconstructedGraph:
    nodes: dict[str, int] = field(default_factory=dict)  # statement -> visits
    edges: dict[tuple[str, str], int] = field(default_factory=dict)

    def __eq__(self, other) -> bool:
        return (isinstance(other, ReconstructedGraph)
                and self.nodes == other.nodes and self.edges == other.edges)


@dataclass(frozen=True)
class GraphComparison:
    node_jaccard: float
    edge_jaccard: float


def reconstruct_environment(posts: list[AgentPost]) -> ReconstructedGraph:
    """Statement graph from agent trajectories: a node per distinct posted
    statement with visit counts, an undirected edge per consecutive pair of
    differing statements in any one agent's log."""
    graph = ReconstructedGraph()
    ordered = sorted(posts, key=lambda p: (p.agent_id, p.tick))
    prev_by_agent: dict[int, str] = {}
    for p in ordered:
        graph.nodes[p.statement] = graph.nodes.get(p.statement, 0) + 1
        prev = prev_by_agent.get(p.agent_id)
        if prev is not None and prev != p.statement:
            key = (prev, p.statement) if prev <= p.statement else (p.statement, prev)
            graph.edges[key] = graph.edges.get(key, 0) + 1
        prev_by_agent[p.agent_id] = p.statement
    return graph


def environment_graph(env: Environment) -> tuple[set[str], set[tuple[str, str]]]:
    """Ground truth: the first statement of every cell, with an undirected
    edge between axis-aligned neighbor cells."""
    first = {cell: env.statements_for(cell)[0] for cell in env.all_cells()}
    nodes = set(first.values())
    edges = set()
    for cell, stmt in first.items():
        for axis in range(env.dimensions):
            nb = list(cell)
            nb[axis] += 1
            if nb[axis] < env.cells_per_axis:
                other = first[tuple(nb)]
                edges.add((stmt, other) if stmt <= other else (other, stmt))
    return nodes, edges


def compare_graphs(recon: ReconstructedGraph, env: Environment) -> GraphComparison:
    """Node Jaccard against every cell's statement; edge Jaccard against the
    axis-neighbor adjacency restricted to cells with at least one visit."""
    if not recon.nodes:
        return GraphComparison(0.0, 0.0)
    gt_nodes, gt_edges = environment_graph(env)
    r_nodes = set(recon.nodes)
    node_j = len(r_nodes & gt_nodes) / len(r_nodes | gt_nodes)

    visited = gt_nodes & r_nodes
    if not visited:
        return GraphComparison(node_jaccard=node_j, edge_jaccard=0.0)
    gt_visited_edges = {(a, b) for a, b in gt_edges if a in visited and b in visited}
    r_edges = set(recon.edges)
    union = r_edges | gt_visited_edges
    edge_j = len(r_edges & gt_visited_edges) / len(union) if union else 1.0
    return GraphComparison(node_jaccard=node_j, edge_jaccard=edge_j)


def _dot_escape(s: str) -> str:
    return s.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n")


def _belief_map_dot(bm: BeliefMap) -> str:
    lines = ["digraph beliefmap {", "  rankdir=LR;"]
    for node in bm.places:
        snips = [f"{g}: {bm.snippets[(node.sequence_index, g)].display()}"
                 for g in sorted(g for s, g in bm.snippets if s == node.sequence_index)]
        tooltip = f', tooltip="{_dot_escape(" | ".join(snips))}"' if snips else ""
        lines.append(
            f'  "place_{node.sequence_index}" [shape=box, '
            f'label="{_dot_escape(node.label)}"{tooltip}];')
    for i in range(len(bm.places) - 1):
        lines.append(f'  "place_{i}" -> "place_{i + 1}";')
    for (s, g) in sorted(bm.spaces):
        terms = bm.spaces[(s, g)]
        snip = bm.snippets.get((s, g))
        tooltip = (f', tooltip="{_dot_escape(snip.display())}"' if snip else "")
        for i, term in enumerate(terms.terms):
            node_id = f"space_{s}_{g}_{i}"
            lines.append(
                f'  "{node_id}" [shape=ellipse, label="{_dot_escape(term)}"'
                f'{tooltip}];')
            lines.append(f'  "place_{s}" -> "{node_id}" [dir=none];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def _recon_dot(graph: ReconstructedGraph) -> str:
    lines = ["graph reconstruction {"]
    for stmt in sorted(graph.nodes):
        lines.append(
            f'  "{_dot_escape(stmt)}" [label="{_dot_escape(stmt)} '
            f'({graph.nodes[stmt]})"];')
    for (a, b) in sorted(graph.edges):
        lines.append(
            f'  "{_dot_escape(a)}" -- "{_dot_escape(b)}" '
            f'[label="{graph.edges[(a, b)]}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def _termlist_to_obj(tl: TermList) -> dict:
    return {"scope": tl.scope, "mode": tl.mode, "depth": tl.depth,
            "entries": [[t, s] for t, s in tl.entries]}


def _termlist_from_obj(obj: dict) -> TermList:
    return TermList(scope=obj["scope"], mode=obj["mode"], depth=obj["depth"],
                    entries=tuple((t, float(s)) for t, s in obj["entries"]))


def belief_map_to_obj(bm: BeliefMap) -> dict:
    return {
        "format": "beliefmap/v1",
        "places": [
            {"sequence": p.sequence_index, "label": p.label,
             "terms": _termlist_to_obj(p.terms)}
            for p in bm.places
        ],
        "spaces": [
            {"sequence": s, "group": g, "terms": _termlist_to_obj(bm.spaces[(s, g)])}
            for (s, g) in sorted(bm.spaces)
        ],
        "snippets": [
            {"sequence": s, "group": g, "author": sn.author, "text": sn.text,
             "truncated": sn.truncated, "post_id": sn.post_id}
            for (s, g) in sorted(bm.snippets)
            for sn in [bm.snippets[(s, g)]]
        ],
    }


def belief_map_from_obj(obj: dict) -> BeliefMap:
    if obj.get("format") != "beliefmap/v1":
        raise MapgenError("not a structured belief map document")
    places = [PlaceNode(sequence_index=p["sequence"], label=p["label"],
                        terms=_termlist_from_obj(p["terms"]))
              for p in obj["places"]]
    spaces = {(e["sequence"], e["group"]): _termlist_from_obj(e["terms"])
              for e in obj["spaces"]}
    snippets = {(e["sequence"], e["group"]): Snippet(
        author=e["author"], text=e["text"], truncated=e["truncated"],
        post_id=e["post_id"]) for e in obj["snippets"]}
    return BeliefMap(places=places, spaces=spaces, snippets=snippets)


def reconstruction_to_obj(graph: ReconstructedGraph) -> dict:
    return {
        "format": "reconstruction/v1",
        "nodes": [[s, graph.nodes[s]] for s in sorted(graph.nodes)],
        "edges": [[a, b, graph.edges[(a, b)]] for a, b in sorted(graph.edges)],
    }


def reconstruction_from_obj(obj: dict) -> ReconstructedGraph:
    if obj.get("format") != "reconstruction/v1":
        raise MapgenError("not a structured reconstruction document")
    graph = ReconstructedGraph()
    graph.nodes = {s: int(n) for s, n in obj["nodes"]}
    graph.edges = {(a, b): int(n) for a, b, n in obj["edges"]}
    return graph


FORMAT_DOT = "dot"
FORMAT_STRUCTURED = "structured"


def export_map(obj, fmt: str) -> str:
    """Serialize a BeliefMap or ReconstructedGraph as dot text or as the
    lossless structured (JSON) document."""
    if fmt == FORMAT_DOT:
        if isinstance(obj, BeliefMap):
            return _belief_map_dot(obj)
        if isinstance(obj, ReconstructedGraph):
            return _recon_dot(obj)
        raise MapgenError(f"cannot export {type(obj).__name__} as dot")
    if fmt == FORMAT_STRUCTURED:
        if isinstance(obj, BeliefMap):
            data = belief_map_to_obj(obj)
        elif isinstance(obj, ReconstructedGraph):
            data = reconstruction_to_obj(obj)
        else:
            raise MapgenError(f"cannot export {type(obj).__name__}")
        return json.dumps(data, indent=2, sort_keys=True, ensure_ascii=False) + "\n"
    raise MapgenError(f"unknown export format {fmt!r}")


def import_structured(text: str):
    """Parse a structured export back into its map or reconstruction."""
    obj = json.loads(text)
    fmt = obj.get("format", "")
    if fmt == "beliefmap/v1":
        return belief_map_from_obj(obj)
    if fmt == "reconstruction/v1":
        return reconstruction_from_obj(obj)
    raise MapgenError(f"unknown structured format {fmt!r}")


def format_for_path(path: str, fmt: str | None = None) -> str:
    """Pick the export format from an explicit flag or the file extension."""
    if fmt is not None:
        return fmt
    name = str(path).lower()
    if name.endswith(".dot"):
        return FORMAT_DOT
    if name.endswith(".json") or name.endswith(".structured"):
        return FORMAT_STRUCTURED
    raise MapgenError(f"cannot infer export format from {path!r}")
