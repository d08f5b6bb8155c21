"""Ground multi-hypergraph states.

A state is a set of labelled vertices and labelled hyperedges, both carrying
positive integer multiplicities.  A vertex of multiplicity k stands for k
indistinguishable entities of that label; an edge of multiplicity k stands
for k parallel relation instances over the same incidence multiset.

Conservation: a domain declares a set of edge labels (``conservation_labels``)
and a set of vertex labels (``conserved_vertex_labels``).  For every vertex
whose label participates, the multiplicities of incident conserved edges
(counting repeated incidence) must sum exactly to the vertex multiplicity,
i.e. every one of the k entities is accounted for by exactly one conserved
relation instance.  Non-participating vertices (locations, the agent, static
fixtures) are unconstrained.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import IntegrityError, StructuralError

Label = str


@dataclass(frozen=True, order=True)
class Vertex:
    id: str
    label: Label
    multiplicity: int = 1

    def __post_init__(self):
        if not self.id:
            raise StructuralError("vertex id must be non-empty")
        if not self.label:
            raise StructuralError(f"vertex {self.id!r}: label must be non-empty")
        if self.multiplicity < 1:
            raise StructuralError(f"vertex {self.id!r}: multiplicity must be >= 1")


@dataclass(frozen=True, order=True)
class Hyperedge:
    """A labelled hyperedge over a multiset of vertex ids.

    The incidence is a multiset: the same vertex id may appear repeatedly and
    the stored tuple is kept sorted, so two edges with the same label and the
    same id multiset compare equal regardless of construction order.
    """

    label: Label
    incidence: tuple[str, ...]
    multiplicity: int = 1

    def __post_init__(self):
        if not self.label:
            raise StructuralError("edge label must be non-empty")
        if not self.incidence:
            raise StructuralError(f"edge {self.label!r}: incidence must be non-empty")
        object.__setattr__(self, "incidence", tuple(sorted(self.incidence)))
        if self.multiplicity < 1:
            raise StructuralError(f"edge {self.label!r}: multiplicity must be >= 1")

    @property
    def key(self) -> tuple[Label, tuple[str, ...]]:
        return (self.label, self.incidence)


EdgeKey = tuple[Label, tuple[str, ...]]


def edge_key(label: Label, incidence: Iterable[str]) -> EdgeKey:
    return (label, tuple(sorted(incidence)))


class MultiHypergraph:
    """Immutable validated multi-hypergraph.

    Equality and hashing are structural (same ids, labels, multiplicities);
    use :func:`is_isomorphic` or canonical forms for identity up to renaming.
    """

    __slots__ = ("vertices", "edges", "conservation_labels", "conserved_vertex_labels",
                 "_by_id", "_mult", "_incident", "_canonical")

    def __init__(self, vertices: Iterable[Vertex], edges: Iterable[Hyperedge] = (),
                 conservation_labels: Iterable[Label] = (),
                 conserved_vertex_labels: Iterable[Label] = ()):
        verts = tuple(sorted(vertices))
        by_id: dict[str, Vertex] = {}
        for v in verts:
            if v.id in by_id:
                raise StructuralError(f"duplicate vertex id {v.id!r}")
            by_id[v.id] = v

        merged: dict[EdgeKey, int] = {}
        for e in edges:
            for vid in e.incidence:
                if vid not in by_id:
                    raise StructuralError(
                        f"edge {e.label!r} references unknown vertex {vid!r}")
            merged[e.key] = merged.get(e.key, 0) + e.multiplicity

        self.vertices = verts
        self.edges = tuple(Hyperedge(lbl, inc, m)
                           for (lbl, inc), m in sorted(merged.items()))
        self.conservation_labels = frozenset(conservation_labels)
        self.conserved_vertex_labels = frozenset(conserved_vertex_labels)
        self._by_id = by_id
        self._mult = {e.key: e.multiplicity for e in self.edges}
        incident: dict[str, list[Hyperedge]] = {v.id: [] for v in verts}
        for e in self.edges:
            for vid in set(e.incidence):
                incident[vid].append(e)
        self._incident = incident
        self._canonical = None
        self._check_conservation()

    def _check_conservation(self) -> None:
        if not self.conservation_labels or not self.conserved_vertex_labels:
            return
        for v in self.vertices:
            if v.label not in self.conserved_vertex_labels:
                continue
            total = sum(e.multiplicity * e.incidence.count(v.id)
                        for e in self._incident[v.id]
                        if e.label in self.conservation_labels)
            if total != v.multiplicity:
                raise IntegrityError(
                    f"vertex {v.id!r} ({v.label}): conserved edge multiplicities "
                    f"sum to {total}, expected {v.multiplicity}")

    # -- queries -----------------------------------------------------------

    def vertex(self, vid: str) -> Vertex:
        return self._by_id[vid]

    def has_vertex(self, vid: str) -> bool:
        return vid in self._by_id

    def edge_multiplicity(self, label: Label, incidence: Iterable[str]) -> int:
        return self._mult.get(edge_key(label, incidence), 0)

    def incident(self, vid: str) -> tuple[Hyperedge, ...]:
        return tuple(self._incident[vid])

    def edge_dict(self) -> dict[EdgeKey, int]:
        return dict(self._mult)

    def replace_edges(self, mults: Mapping[EdgeKey, int]) -> "MultiHypergraph":
        """New graph with the given edge-key multiplicities (zeroes dropped).

        Vertices are never created or destroyed by this operation.
        """
        edges = [Hyperedge(lbl, inc, m) for (lbl, inc), m in mults.items() if m > 0]
        return MultiHypergraph(self.vertices, edges,
                               self.conservation_labels, self.conserved_vertex_labels)

    def canonical_form(self):
        from .canon import canonical_form
        if self._canonical is None:
            self._canonical = canonical_form(self)
        return self._canonical

    # -- dunder ------------------------------------------------------------

    def __eq__(self, other):
        if not isinstance(other, MultiHypergraph):
            return NotImplemented
        return (self.vertices == other.vertices and self.edges == other.edges
                and self.conservation_labels == other.conservation_labels
                and self.conserved_vertex_labels == other.conserved_vertex_labels)

    def __hash__(self):
        return hash((self.vertices, self.edges))

    def __repr__(self):
        return (f"MultiHypergraph({len(self.vertices)} vertices, "
                f"{len(self.edges)} edges)")


def build_graph(vertices: Iterable[Vertex], edges: Iterable[Hyperedge] = (),
                conservation_labels: Iterable[Label] = (),
                conserved_vertex_labels: Iterable[Label] = ()) -> MultiHypergraph:
    """Validated constructor; see :class:`MultiHypergraph` for invariants."""
    return MultiHypergraph(vertices, edges, conservation_labels, conserved_vertex_labels)


def is_isomorphic(g1: MultiHypergraph, g2: MultiHypergraph) -> bool:
    """True iff some label/multiplicity-preserving vertex bijection maps the
    edge multiset of ``g1`` onto that of ``g2``."""
    return g1.canonical_form() == g2.canonical_form()
