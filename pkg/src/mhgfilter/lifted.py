"""Lifted multi-hypergraph states.

A lifted state compactly represents a uniform distribution over a set of
ground states that share their vertices and a fixed edge core but differ in
the multiplicities of *bounded* edges.  Each bounded edge carries an integer
interval [lower, upper]; exact-total constraints tie disjoint groups of
bounded edges to a fixed multiplicity sum.  A grounding picks one value per
bounded edge within its bounds such that every group total holds; the lifted
state denotes the uniform distribution over all such assignments.

Construction normalises the representation:

* fixed edges sharing a key with a bounded edge are absorbed into its bounds
  (support-preserving reparameterisation, group total shifted accordingly),
* bounds are tightened to the feasible hull within each constraint group,
* bounded edges with lower = upper become fixed edges (absent when zero),
* satisfied empty groups are dropped.

Infeasible constraints yield an *empty* lifted state (no groundings), which
is constructible but rejected wherever a belief requires non-empty support.
Conservation must hold in every grounding; the constructor verifies that the
conserved multiplicity sum of every participating vertex is constant across
the support and equal to the vertex multiplicity.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

from .canon import CanonicalForm, canonical_form_lifted as _canon_lifted
from .errors import EnumerationLimitError, IntegrityError, StructuralError
from .graphs import EdgeKey, Hyperedge, MultiHypergraph, Vertex, edge_key

DEFAULT_MAX_GROUNDINGS = 10 ** 6

__all__ = ["BoundedEdge", "TotalConstraint", "LiftedMultiHypergraph",
           "groundings", "count_groundings", "contains", "canonical_form_lifted",
           "DEFAULT_MAX_GROUNDINGS"]


@dataclass(frozen=True, order=True)
class BoundedEdge:
    """A hyperedge whose multiplicity is only known to lie in [lower, upper]."""

    label: str
    incidence: tuple[str, ...]
    lower: int
    upper: int

    def __post_init__(self):
        if not self.label:
            raise StructuralError("bounded edge label must be non-empty")
        if not self.incidence:
            raise StructuralError(f"bounded edge {self.label!r}: empty incidence")
        object.__setattr__(self, "incidence", tuple(sorted(self.incidence)))
        if self.lower < 0 or self.lower > self.upper:
            raise StructuralError(
                f"bounded edge {self.label!r}: bad bounds [{self.lower}, {self.upper}]")

    @property
    def key(self) -> EdgeKey:
        return (self.label, self.incidence)


@dataclass(frozen=True)
class TotalConstraint:
    """Exact multiplicity total over a group of bounded edges.

    Groups of distinct constraints are disjoint.  The name addresses the
    group from rule effects and is excluded from canonical forms.
    """

    name: str
    edge_keys: frozenset[EdgeKey]
    total: int

    def __post_init__(self):
        if self.total < 0:
            raise StructuralError(f"constraint {self.name!r}: negative total")
        object.__setattr__(self, "edge_keys", frozenset(self.edge_keys))


class LiftedMultiHypergraph:
    __slots__ = ("vertices", "fixed_edges", "bounded_edges", "constraints",
                 "conservation_labels", "conserved_vertex_labels", "is_empty",
                 "_by_id", "_fixed_mult", "_bounded_by_key", "_group_of",
                 "_canonical", "_count")

    def __init__(self, vertices: Iterable[Vertex],
                 fixed_edges: Iterable[Hyperedge] = (),
                 bounded_edges: Iterable[BoundedEdge] = (),
                 constraints: Iterable[TotalConstraint] = (),
                 conservation_labels: Iterable[str] = (),
                 conserved_vertex_labels: Iterable[str] = ()):
        verts = tuple(sorted(vertices))
        by_id: dict[str, Vertex] = {}
        for v in verts:
            if v.id in by_id:
                raise StructuralError(f"duplicate vertex id {v.id!r}")
            by_id[v.id] = v

        fixed: dict[EdgeKey, int] = {}
        for e in fixed_edges:
            self._check_incidence(e.label, e.incidence, by_id)
            fixed[e.key] = fixed.get(e.key, 0) + e.multiplicity

        bounds: dict[EdgeKey, tuple[int, int]] = {}
        for b in bounded_edges:
            self._check_incidence(b.label, b.incidence, by_id)
            if b.key in bounds:
                raise StructuralError(f"duplicate bounded edge {b.key!r}")
            bounds[b.key] = (b.lower, b.upper)

        groups: dict[str, tuple[set[EdgeKey], int]] = {}
        owner: dict[EdgeKey, str] = {}
        for c in constraints:
            if c.name in groups:
                raise StructuralError(f"duplicate constraint name {c.name!r}")
            for k in c.edge_keys:
                if k not in bounds:
                    raise StructuralError(
                        f"constraint {c.name!r} references unknown bounded edge {k!r}")
                if k in owner:
                    raise StructuralError(
                        f"bounded edge {k!r} appears in constraints "
                        f"{owner[k]!r} and {c.name!r}")
                owner[k] = c.name
            groups[c.name] = (set(c.edge_keys), c.total)

        # absorb fixed multiplicity into co-keyed bounds
        for k in list(bounds):
            f = fixed.pop(k, 0)
            if f:
                lo, up = bounds[k]
                bounds[k] = (lo + f, up + f)
                if k in owner:
                    keys, t = groups[owner[k]]
                    groups[owner[k]] = (keys, t + f)

        empty = False
        changed = True
        while changed and not empty:
            changed = False
            for name in sorted(groups):
                keys, t = groups[name]
                los = {k: bounds[k][0] for k in keys}
                ups = {k: bounds[k][1] for k in keys}
                if sum(los.values()) > t or sum(ups.values()) < t:
                    empty = True
                    break
                for k in sorted(keys):
                    lo = max(los[k], t - sum(ups[j] for j in keys if j != k))
                    up = min(ups[k], t - sum(los[j] for j in keys if j != k))
                    if (lo, up) != bounds[k]:
                        bounds[k] = (lo, up)
                        changed = True
            if empty:
                break
            for k in sorted(bounds):
                lo, up = bounds[k]
                if lo == up:
                    del bounds[k]
                    changed = True
                    if lo > 0:
                        fixed[k] = fixed.get(k, 0) + lo
                    if k in owner:
                        name = owner.pop(k)
                        keys, t = groups[name]
                        keys.discard(k)
                        groups[name] = (keys, t - lo)
            for name in sorted(groups):
                keys, t = groups[name]
                if not keys:
                    if t != 0:
                        empty = True
                    del groups[name]

        self.vertices = verts
        self.fixed_edges = tuple(Hyperedge(lbl, inc, m)
                                 for (lbl, inc), m in sorted(fixed.items()) if m > 0)
        self.bounded_edges = tuple(BoundedEdge(lbl, inc, lo, up)
                                   for (lbl, inc), (lo, up) in sorted(bounds.items()))
        self.constraints = tuple(sorted(
            (TotalConstraint(name, frozenset(keys), t)
             for name, (keys, t) in groups.items()),
            key=lambda c: (sorted(c.edge_keys), c.name)))
        self.conservation_labels = frozenset(conservation_labels)
        self.conserved_vertex_labels = frozenset(conserved_vertex_labels)
        self.is_empty = empty
        self._by_id = by_id
        self._fixed_mult = {e.key: e.multiplicity for e in self.fixed_edges}
        self._bounded_by_key = {b.key: b for b in self.bounded_edges}
        self._group_of = {}
        for c in self.constraints:
            for k in c.edge_keys:
                self._group_of[k] = c
        self._canonical = None
        self._count = None
        if not empty:
            self._check_conservation()

    @staticmethod
    def _check_incidence(label, incidence, by_id):
        for vid in incidence:
            if vid not in by_id:
                raise StructuralError(
                    f"edge {label!r} references unknown vertex {vid!r}")

    def _check_conservation(self) -> None:
        if not self.conservation_labels or not self.conserved_vertex_labels:
            return
        for v in self.vertices:
            if v.label not in self.conserved_vertex_labels:
                continue
            lo_total = up_total = sum(
                e.multiplicity * e.incidence.count(v.id)
                for e in self.fixed_edges if e.label in self.conservation_labels)
            grouped: dict[str, list[tuple[int, int, int]]] = {}
            for b in self.bounded_edges:
                coef = (b.incidence.count(v.id)
                        if b.label in self.conservation_labels else 0)
                c = self._group_of.get(b.key)
                if c is not None:
                    grouped.setdefault(c.name, []).append((b.lower, b.upper, coef))
                elif coef:
                    lo_total += b.lower * coef
                    up_total += b.upper * coef
            for c in self.constraints:
                members = grouped.get(c.name, [])
                if not any(coef for _, _, coef in members):
                    continue
                mn, mx = _group_coef_range(members, c.total)
                lo_total += mn
                up_total += mx
            if lo_total != up_total or lo_total != v.multiplicity:
                raise IntegrityError(
                    f"vertex {v.id!r} ({v.label}): conserved multiplicity sum "
                    f"ranges over [{lo_total}, {up_total}] across groundings, "
                    f"expected exactly {v.multiplicity}")

    # -- queries -----------------------------------------------------------

    def vertex(self, vid: str) -> Vertex:
        return self._by_id[vid]

    def fixed_multiplicity(self, label: str, incidence: Iterable[str]) -> int:
        return self._fixed_mult.get(edge_key(label, incidence), 0)

    def bounded_edge(self, label: str, incidence: Iterable[str]) -> BoundedEdge | None:
        return self._bounded_by_key.get(edge_key(label, incidence))

    def group_of(self, key: EdgeKey) -> TotalConstraint | None:
        return self._group_of.get(key)

    def skeleton(self) -> MultiHypergraph:
        """The fixed part as a ground graph (conservation not enforced:
        bounded edges may carry part of a conserved sum)."""
        return MultiHypergraph(self.vertices, self.fixed_edges,
                               self.conservation_labels, ())

    @classmethod
    def from_graph(cls, g: MultiHypergraph) -> "LiftedMultiHypergraph":
        return cls(g.vertices, g.edges, (), (),
                   g.conservation_labels, g.conserved_vertex_labels)

    def rebuild(self, *, fixed: Mapping[EdgeKey, int] | None = None,
                bounded: Iterable[BoundedEdge] | None = None,
                constraints: Iterable[TotalConstraint] | None = None
                ) -> "LiftedMultiHypergraph":
        """New lifted state over the same vertices with replaced parts."""
        fixed_edges = (self.fixed_edges if fixed is None else
                       [Hyperedge(lbl, inc, m) for (lbl, inc), m in fixed.items() if m > 0])
        return LiftedMultiHypergraph(
            self.vertices, fixed_edges,
            self.bounded_edges if bounded is None else bounded,
            self.constraints if constraints is None else constraints,
            self.conservation_labels, self.conserved_vertex_labels)

    # -- grounding ---------------------------------------------------------

    def count_groundings(self) -> int:
        """Number of groundings, via per-group bounded-composition counting."""
        if self.is_empty:
            return 0
        if self._count is None:
            total = 1
            free = set(self._bounded_by_key) - set(self._group_of)
            for k in free:
                b = self._bounded_by_key[k]
                total *= b.upper - b.lower + 1
            for c in self.constraints:
                bounds = [(self._bounded_by_key[k].lower, self._bounded_by_key[k].upper)
                          for k in sorted(c.edge_keys)]
                total *= _count_compositions(bounds, c.total)
            self._count = total
        return self._count

    def _iter_assignments(self) -> Iterator[dict[EdgeKey, int]]:
        free = sorted(set(self._bounded_by_key) - set(self._group_of))
        free_ranges = [[(k, v) for v in range(self._bounded_by_key[k].lower,
                                              self._bounded_by_key[k].upper + 1)]
                       for k in free]
        group_choices = []
        for c in self.constraints:
            keys = sorted(c.edge_keys)
            bounds = [(self._bounded_by_key[k].lower, self._bounded_by_key[k].upper)
                      for k in keys]
            group_choices.append([list(zip(keys, comp))
                                  for comp in _compositions(bounds, c.total)])
        for parts in itertools.product(*free_ranges, *group_choices):
            assignment: dict[EdgeKey, int] = {}
            for part in parts:
                if isinstance(part, tuple):
                    assignment[part[0]] = part[1]
                else:
                    assignment.update(part)
            yield assignment

    def _ground(self, assignment: Mapping[EdgeKey, int]) -> MultiHypergraph:
        mults = dict(self._fixed_mult)
        for k, v in assignment.items():
            if v:
                mults[k] = mults.get(k, 0) + v
        edges = [Hyperedge(lbl, inc, m) for (lbl, inc), m in mults.items()]
        return MultiHypergraph(self.vertices, edges,
                               self.conservation_labels, self.conserved_vertex_labels)

    def iter_groundings(self, max_groundings: int = DEFAULT_MAX_GROUNDINGS
                        ) -> Iterator[MultiHypergraph]:
        if self.is_empty:
            return
        n = self.count_groundings()
        if n > max_groundings:
            raise EnumerationLimitError(n, max_groundings)
        for assignment in self._iter_assignments():
            yield self._ground(assignment)

    def groundings(self, max_groundings: int = DEFAULT_MAX_GROUNDINGS
                   ) -> list[MultiHypergraph]:
        """All groundings, sorted by canonical form.

        Assignments are pairwise distinct by construction; no isomorphism
        collapse is applied here (see the belief expansion for merging).
        """
        out = list(self.iter_groundings(max_groundings))
        out.sort(key=lambda g: g.canonical_form().data)
        return out

    def contains(self, g: MultiHypergraph,
                 max_groundings: int = DEFAULT_MAX_GROUNDINGS) -> bool:
        if self.is_empty:
            return False
        mine = sorted((v.label, v.multiplicity) for v in self.vertices)
        theirs = sorted((v.label, v.multiplicity) for v in g.vertices)
        if mine != theirs:
            return False
        target = g.canonical_form()
        return any(h.canonical_form() == target
                   for h in self.iter_groundings(max_groundings))

    def canonical_form(self) -> CanonicalForm:
        if self._canonical is None:
            if self.is_empty:
                self._canonical = CanonicalForm(b"\x00empty")
            else:
                self._canonical = _canon_lifted(self)
        return self._canonical

    def __repr__(self):
        if self.is_empty:
            return "LiftedMultiHypergraph(empty)"
        return (f"LiftedMultiHypergraph({len(self.vertices)} vertices, "
                f"{len(self.fixed_edges)} fixed, {len(self.bounded_edges)} bounded, "
                f"{len(self.constraints)} constraints)")


def _group_coef_range(members: list[tuple[int, int, int]], total: int
                      ) -> tuple[int, int]:
    """Min/max of sum(coef*x) over assignments with sum(x)=total within bounds.

    Greedy is exact: the objective is linear over an integral transportation
    polytope, so extremes fill slack in coefficient order.
    """
    base = sum(lo for lo, _, _ in members)
    surplus = total - base

    def extreme(order: list[tuple[int, int, int]]) -> int:
        val = sum(lo * c for lo, _, c in members)
        left = surplus
        for lo, up, c in order:
            add = min(left, up - lo)
            val += add * c
            left -= add
        return val

    asc = sorted(members, key=lambda m: m[2])
    return extreme(asc), extreme(asc[::-1])


def _count_compositions(bounds: list[tuple[int, int]], total: int) -> int:
    ways = {0: 1}
    for lo, up in bounds:
        new: dict[int, int] = {}
        for s, w in ways.items():
            for v in range(lo, min(up, total - s) + 1):
                new[s + v] = new.get(s + v, 0) + w
        ways = new
    return ways.get(total, 0)


def _compositions(bounds: list[tuple[int, int]], total: int
                  ) -> Iterator[tuple[int, ...]]:
    """All tuples within the given bounds summing to total, ascending order."""
    suffix_lo = [0] * (len(bounds) + 1)
    suffix_up = [0] * (len(bounds) + 1)
    for i in range(len(bounds) - 1, -1, -1):
        suffix_lo[i] = suffix_lo[i + 1] + bounds[i][0]
        suffix_up[i] = suffix_up[i + 1] + bounds[i][1]

    def rec(i: int, remaining: int, prefix: tuple[int, ...]):
        if i == len(bounds):
            if remaining == 0:
                yield prefix
            return
        lo, up = bounds[i]
        lo = max(lo, remaining - suffix_up[i + 1])
        up = min(up, remaining - suffix_lo[i + 1])
        for v in range(lo, up + 1):
            yield from rec(i + 1, remaining - v, prefix + (v,))

    yield from rec(0, total, ())


# -- functional wrappers ------------------------------------------------------

def groundings(l: LiftedMultiHypergraph,
               max_groundings: int = DEFAULT_MAX_GROUNDINGS) -> list[MultiHypergraph]:
    return l.groundings(max_groundings)


def count_groundings(l: LiftedMultiHypergraph) -> int:
    return l.count_groundings()


def contains(l: LiftedMultiHypergraph, g: MultiHypergraph,
             max_groundings: int = DEFAULT_MAX_GROUNDINGS) -> bool:
    return l.contains(g, max_groundings)


def canonical_form_lifted(l: LiftedMultiHypergraph) -> CanonicalForm:
    return l.canonical_form()
