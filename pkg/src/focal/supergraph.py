"""Levi-form fact subgraphs merged into a document supergraph.

Each extracted triplet becomes three atoms (entity, predicate, entity) wired
with five intra-fact relation types; entity atoms whose spans overlap
mentions of one coreference cluster are linked both ways; an optional global
atom connects to every other atom.  Seven relation types total: the five
intra-fact ones, ``coref``, and ``global``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .extraction import Span, Triplet, extract_triplets

REL_DEFAULT_IN = "default-in"
REL_DEFAULT_OUT = "default-out"
REL_REVERSE_IN = "reverse-in"
REL_REVERSE_OUT = "reverse-out"
REL_SELF = "self"
REL_COREF = "coref"
REL_GLOBAL = "global"

RELATION_TYPES = (
    REL_DEFAULT_IN,
    REL_DEFAULT_OUT,
    REL_REVERSE_IN,
    REL_REVERSE_OUT,
    REL_SELF,
    REL_COREF,
    REL_GLOBAL,
)
RELATION_INDEX = {rel: i for i, rel in enumerate(RELATION_TYPES)}

INTRA_FACT_RELS = frozenset(
    {REL_DEFAULT_IN, REL_DEFAULT_OUT, REL_REVERSE_IN, REL_REVERSE_OUT, REL_SELF}
)
CROSS_FACT_RELS = frozenset({REL_COREF, REL_GLOBAL, REL_SELF})


@dataclass(frozen=True)
class NodeAtom:
    node_id: int
    kind: str  # "entity" | "predicate" | "global"
    span: Span | None  # None for the global atom
    surface: str


@dataclass(frozen=True)
class TypedEdge:
    src: int
    dst: int
    rel: str


@dataclass
class Supergraph:
    nodes: list = field(default_factory=list)
    edges: list = field(default_factory=list)
    fact_index: dict = field(default_factory=dict)  # fact position -> node ids

    @property
    def n_nodes(self):
        return len(self.nodes)

    @property
    def global_id(self):
        for node in self.nodes:
            if node.kind == "global":
                return node.node_id
        return None

    def edges_with_rel(self, rel):
        return [e for e in self.edges if e.rel == rel]


def _surface(span, sentences):
    sent = sentences.get(span.sent_id)
    if sent is None:
        return ""
    return " ".join(t.text for t in sent.tokens[span.start : span.end])


def build_fact_levi(triplet: Triplet, sentences=None):
    """One fact as a 3-node Levi subgraph with 7 typed edges.

    Node ids are local (0 = subject entity, 1 = predicate, 2 = object
    entity); edges run subject->predicate (default-in), predicate->object
    (default-out), predicate->subject (reverse-in), object->predicate
    (reverse-out), plus one self edge per node.
    """
    sentences = sentences or {}
    nodes = [
        NodeAtom(0, "entity", triplet.subject, _surface(triplet.subject, sentences)),
        NodeAtom(1, "predicate", triplet.predicate, _surface(triplet.predicate, sentences)),
        NodeAtom(2, "entity", triplet.object, _surface(triplet.object, sentences)),
    ]
    edges = [
        TypedEdge(0, 1, REL_DEFAULT_IN),
        TypedEdge(1, 2, REL_DEFAULT_OUT),
        TypedEdge(1, 0, REL_REVERSE_IN),
        TypedEdge(2, 1, REL_REVERSE_OUT),
        TypedEdge(0, 0, REL_SELF),
        TypedEdge(1, 1, REL_SELF),
        TypedEdge(2, 2, REL_SELF),
    ]
    return Supergraph(nodes=nodes, edges=edges, fact_index={0: (0, 1, 2)})


def assemble_supergraph(facts, coref_mentions=(), include_global=True):
    """Merge fact subgraphs, link coreferent entity atoms, add the global atom.

    ``facts`` is a sequence of :func:`build_fact_levi` outputs;
    ``coref_mentions`` is an iterable of ``(cluster_id, Span)``.  Entity atoms
    overlapping mentions of a shared cluster are joined by a ``coref`` edge in
    both directions.  With ``include_global`` the global atom is connected to
    and from every other atom.
    """
    sg = Supergraph()
    for fact_pos, fact in enumerate(facts):
        offset = len(sg.nodes)
        for node in fact.nodes:
            sg.nodes.append(
                NodeAtom(offset + node.node_id, node.kind, node.span, node.surface)
            )
        for edge in fact.edges:
            sg.edges.append(TypedEdge(offset + edge.src, offset + edge.dst, edge.rel))
        sg.fact_index[fact_pos] = tuple(offset + nid for nid in fact.fact_index[0])

    clusters = {}
    for cluster_id, span in coref_mentions:
        clusters.setdefault(cluster_id, []).append(span)
    linked = set()
    for cluster_id in sorted(clusters):
        members = []
        for node in sg.nodes:
            if node.kind != "entity" or node.span is None:
                continue
            if any(node.span.overlaps(m) for m in clusters[cluster_id]):
                members.append(node.node_id)
        for i, u in enumerate(members):
            for v in members[i + 1 :]:
                if (u, v) in linked:
                    continue
                linked.add((u, v))
                sg.edges.append(TypedEdge(u, v, REL_COREF))
                sg.edges.append(TypedEdge(v, u, REL_COREF))

    if include_global:
        gid = len(sg.nodes)
        sg.nodes.append(NodeAtom(gid, "global", None, "<global>"))
        for node_id in range(gid):
            sg.edges.append(TypedEdge(gid, node_id, REL_GLOBAL))
            sg.edges.append(TypedEdge(node_id, gid, REL_GLOBAL))
    return sg


def assemble_entity_graph(triplets, sentences=None, coref_mentions=(), include_global=True):
    """Degraded variant: one atom per distinct entity span, no predicates.

    Entity atoms carry self edges only; cross-atom structure comes from
    coreference and the global atom.  Used by the named-entity ablation.
    """
    sentences = sentences or {}
    sg = Supergraph()
    seen = {}
    for trip in triplets:
        for span in (trip.subject, trip.object):
            key = (span.sent_id, span.start, span.end)
            if key in seen:
                continue
            nid = len(sg.nodes)
            seen[key] = nid
            sg.nodes.append(NodeAtom(nid, "entity", span, _surface(span, sentences)))
            sg.edges.append(TypedEdge(nid, nid, REL_SELF))

    clusters = {}
    for cluster_id, span in coref_mentions:
        clusters.setdefault(cluster_id, []).append(span)
    for cluster_id in sorted(clusters):
        members = [
            n.node_id
            for n in sg.nodes
            if n.span is not None and any(n.span.overlaps(m) for m in clusters[cluster_id])
        ]
        for i, u in enumerate(members):
            for v in members[i + 1 :]:
                sg.edges.append(TypedEdge(u, v, REL_COREF))
                sg.edges.append(TypedEdge(v, u, REL_COREF))

    if include_global:
        gid = len(sg.nodes)
        sg.nodes.append(NodeAtom(gid, "global", None, "<global>"))
        for node_id in range(gid):
            sg.edges.append(TypedEdge(gid, node_id, REL_GLOBAL))
            sg.edges.append(TypedEdge(node_id, gid, REL_GLOBAL))
    return sg


def example_mentions(example, include_options=True):
    """All coreference mentions of a document as ``(cluster_id, Span)``."""
    sentences = list(example.context_sentences) + [example.question]
    if include_options:
        for option in example.options:
            sentences.extend(option)
    out = []
    for sent in sentences:
        for m in sent.coref_mentions:
            out.append((m.cluster_id, Span(sent.sent_id, m.span[0], m.span[1])))
    return out


def supergraph_for_example(
    example,
    option_index,
    include_global=True,
    include_coref=True,
    entity_only=False,
):
    """Build the supergraph for one (example, option) pair.

    Facts come from the context sentences plus the chosen option's sentences;
    coreference mentions are document-scoped.

    Returns ``(supergraph, context_triplets, option_triplets)``.
    """
    sentences = {s.sent_id: s for s in example.all_sentences()}
    context_triplets = []
    for sent in example.context_sentences:
        context_triplets.extend(extract_triplets(sent, source="context"))
    option_triplets = []
    for sent in example.options[option_index]:
        option_triplets.extend(extract_triplets(sent, source=f"option:{option_index}"))
    triplets = context_triplets + option_triplets
    mentions = example_mentions(example) if include_coref else ()
    if entity_only:
        sg = assemble_entity_graph(triplets, sentences, mentions, include_global)
    else:
        facts = [build_fact_levi(t, sentences) for t in triplets]
        sg = assemble_supergraph(facts, mentions, include_global)
    return sg, context_triplets, option_triplets


def export_dot(sg: Supergraph) -> str:
    """GraphViz DOT text; deterministic node and edge ordering."""
    if not sg.nodes and not sg.edges:
        return "digraph S { }"
    lines = ["digraph S {"]
    for node in sorted(sg.nodes, key=lambda n: n.node_id):
        label = f"{node.surface} ({node.kind})".replace('"', '\\"')
        lines.append(f'  n{node.node_id} [label="{label}"];')
    for edge in sorted(sg.edges, key=lambda e: (e.src, e.dst, e.rel)):
        lines.append(f'  n{edge.src} -> n{edge.dst} [label="{edge.rel}"];')
    lines.append("}")
    return "\n".join(lines)


def graph_stats(sg: Supergraph) -> dict:
    by_rel = {rel: 0 for rel in RELATION_TYPES}
    for edge in sg.edges:
        by_rel[edge.rel] += 1
    return {
        "nodes": sg.n_nodes,
        "edges": len(sg.edges),
        "facts": len(sg.fact_index),
        "fact_edges": sum(by_rel[r] for r in INTRA_FACT_RELS),
        "coref_edges": by_rel[REL_COREF],
        "global_edges": by_rel[REL_GLOBAL],
    }
