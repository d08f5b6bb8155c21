"""Canonical byte forms for ground and lifted states.

The canonical form of a state is a versioned byte string that is identical
for two states exactly when they are isomorphic (a label- and
multiplicity-preserving vertex bijection mapping one edge structure onto the
other).  It is computed by iterative colour refinement over vertex signatures
with backtracking individualisation on ties; the returned bytes are the
minimum serialisation over all leaves of the search tree.

Byte layout (all integers fixed-width big-endian):

* version tag byte: ``0x01`` ground, ``0x02`` lifted
* ``u32`` vertex count, then per vertex a ``u32`` length-prefixed record:
  ``u16`` label length, label UTF-8, ``u64`` multiplicity
* ``u32`` edge count, then per edge a ``u32`` length-prefixed record:
  ``u16`` label length, label UTF-8, ``u32`` arity, arity x ``u32`` canonical
  vertex index (ascending), ``u64`` multiplicity
* lifted forms append a bounded-edge section (as edges but with ``u64`` lower
  and ``u64`` upper instead of multiplicity) and a constraint section:
  ``u64`` total, ``u32`` group size, then ascending ``u32`` indices into the
  bounded-edge record list

Records within each section appear in ascending bytewise order.  Pinned
variants (used internally to deduplicate rule matches up to automorphism) use
the reserved tag ``0xFE``/``0xFF`` and additionally encode the pin index of
each vertex; they are never exposed as public canonical forms.
"""

from __future__ import annotations

import hashlib
from collections import Counter
from dataclasses import dataclass
from struct import pack
from typing import Callable, Mapping

__all__ = ["CanonicalForm", "canonical_form", "canonical_form_lifted",
           "pinned_form", "pinned_form_lifted"]


@dataclass(frozen=True, order=True)
class CanonicalForm:
    data: bytes

    def digest(self, length: int = 12) -> str:
        """Short stable hex digest for logs and reports."""
        return hashlib.sha256(self.data).hexdigest()[:length]

    def __repr__(self):
        return f"CanonicalForm({self.digest()})"


def _label_rec(label: str) -> bytes:
    raw = label.encode("utf-8")
    return pack(">H", len(raw)) + raw


class _Structure:
    """Prepared view of a state for the refinement search.

    ``edges`` holds (descriptor, incidence-index-tuple) pairs where the
    descriptor is any totally ordered hashable summary of the edge apart from
    its incidence; descriptors take part in vertex signatures.
    """

    def __init__(self, n: int, init_keys: list[bytes],
                 edges: list[tuple[tuple, tuple[int, ...]]],
                 serialize: Callable[[list[int]], bytes]):
        self.n = n
        self.init_keys = init_keys
        self.edges = edges
        self.serialize = serialize
        incident: list[list[tuple[int, int]]] = [[] for _ in range(n)]
        for ei, (_, inc) in enumerate(edges):
            for vi, occ in Counter(inc).items():
                incident[vi].append((ei, occ))
        self.incident = incident


def _ranked(keys) -> list[int]:
    palette = {k: r for r, k in enumerate(sorted(set(keys)))}
    return [palette[k] for k in keys]


def _refine(st: _Structure, colors: list[int]) -> list[int]:
    while True:
        eco = [tuple(sorted(Counter(colors[j] for j in inc).items()))
               for _, inc in st.edges]
        sigs = []
        for i in range(st.n):
            row = sorted((st.edges[e][0], occ, eco[e]) for e, occ in st.incident[i])
            sigs.append((colors[i], tuple(row)))
        new = _ranked(sigs)
        if new == colors:
            return colors
        colors = new


def _canonical_bytes(st: _Structure) -> bytes:
    best: bytes | None = None

    def rec(colors: list[int]) -> None:
        nonlocal best
        counts = Counter(colors)
        target = min((c for c, k in counts.items() if k > 1), default=None)
        if target is None:
            b = st.serialize(colors)
            if best is None or b < best:
                best = b
            return
        for v in range(st.n):
            if colors[v] != target:
                continue
            split = [c * 2 for c in colors]
            split[v] -= 1
            rec(_refine(st, _ranked(split)))

    rec(_refine(st, _ranked(st.init_keys)))
    assert best is not None
    return best


# -- ground states ----------------------------------------------------------

def _ground_structure(g, pins: Mapping[str, int] | None, version: int) -> _Structure:
    verts = g.vertices
    n = len(verts)
    idx = {v.id: i for i, v in enumerate(verts)}
    vrecs = []
    for v in verts:
        rec = _label_rec(v.label) + pack(">Q", v.multiplicity)
        if pins is not None:
            # 0 means unpinned, so stored pin indices are shifted up by one
            rec += pack(">I", pins[v.id] + 1 if v.id in pins else 0)
        vrecs.append(rec)
    edges = [((0, e.label, e.multiplicity), tuple(idx[x] for x in e.incidence))
             for e in g.edges]

    def serialize(colors: list[int]) -> bytes:
        order = sorted(range(n), key=lambda i: colors[i])
        pos = {i: r for r, i in enumerate(order)}
        out = [bytes([version]), pack(">I", n)]
        for i in order:
            out.append(pack(">I", len(vrecs[i])))
            out.append(vrecs[i])
        erecs = []
        for (_, label, mult), inc in edges:
            rec = (_label_rec(label) + pack(">I", len(inc))
                   + b"".join(pack(">I", k) for k in sorted(pos[j] for j in inc))
                   + pack(">Q", mult))
            erecs.append(rec)
        out.append(pack(">I", len(erecs)))
        for rec in sorted(erecs):
            out.append(pack(">I", len(rec)))
            out.append(rec)
        return b"".join(out)

    return _Structure(n, vrecs, edges, serialize)


def canonical_form(g) -> CanonicalForm:
    """Canonical form of a ground multi-hypergraph (layout version 1)."""
    return CanonicalForm(_canonical_bytes(_ground_structure(g, None, 0x01)))


def pinned_form(g, pins: Mapping[str, int]) -> bytes:
    """Canonical bytes of ``g`` with distinguished (pinned) vertices.

    Two pin assignments yield equal bytes iff some automorphism of ``g`` maps
    one onto the other.  Internal helper for match deduplication.
    """
    return _canonical_bytes(_ground_structure(g, pins, 0xFE))


# -- lifted states ----------------------------------------------------------

def _lifted_structure(l, pins: Mapping[str, int] | None, version: int) -> _Structure:
    verts = l.vertices
    n = len(verts)
    idx = {v.id: i for i, v in enumerate(verts)}

    fixed = [((0, e.label, e.multiplicity), tuple(idx[x] for x in e.incidence))
             for e in l.fixed_edges]
    bounded = [((1, b.label, b.lower, b.upper), tuple(idx[x] for x in b.incidence))
               for b in l.bounded_edges]
    edges = fixed + bounded

    # constraint profile folded into the initial colours (colour-independent)
    profile: dict[int, list[tuple[int, int, int]]] = {i: [] for i in range(n)}
    bkeys = {b.key: b for b in l.bounded_edges}
    for c in l.constraints:
        members = [bkeys[k] for k in sorted(c.edge_keys)]
        touched: Counter[int] = Counter()
        for b in members:
            for vid in b.incidence:
                touched[idx[vid]] += 1
        for vi, occ in touched.items():
            profile[vi].append((c.total, len(members), occ))

    vrecs = []
    init_keys = []
    for i, v in enumerate(verts):
        rec = _label_rec(v.label) + pack(">Q", v.multiplicity)
        if pins is not None:
            # 0 means unpinned, so stored pin indices are shifted up by one
            rec += pack(">I", pins[v.id] + 1 if v.id in pins else 0)
        vrecs.append(rec)
        extra = b"".join(pack(">QIQ", t, s, o) for t, s, o in sorted(profile[i]))
        init_keys.append(rec + extra)

    def serialize(colors: list[int]) -> bytes:
        order = sorted(range(n), key=lambda i: colors[i])
        pos = {i: r for r, i in enumerate(order)}
        out = [bytes([version]), pack(">I", n)]
        for i in order:
            out.append(pack(">I", len(vrecs[i])))
            out.append(vrecs[i])

        frecs = []
        for e in l.fixed_edges:
            rec = (_label_rec(e.label) + pack(">I", len(e.incidence))
                   + b"".join(pack(">I", k)
                              for k in sorted(pos[idx[x]] for x in e.incidence))
                   + pack(">Q", e.multiplicity))
            frecs.append(rec)
        out.append(pack(">I", len(frecs)))
        for rec in sorted(frecs):
            out.append(pack(">I", len(rec)))
            out.append(rec)

        brecs = []
        for b in l.bounded_edges:
            rec = (_label_rec(b.label) + pack(">I", len(b.incidence))
                   + b"".join(pack(">I", k)
                              for k in sorted(pos[idx[x]] for x in b.incidence))
                   + pack(">QQ", b.lower, b.upper))
            brecs.append((rec, b.key))
        brecs.sort()
        bpos = {key: r for r, (_, key) in enumerate(brecs)}
        out.append(pack(">I", len(brecs)))
        for rec, _ in brecs:
            out.append(pack(">I", len(rec)))
            out.append(rec)

        crecs = []
        for c in l.constraints:
            refs = sorted(bpos[k] for k in c.edge_keys)
            crecs.append(pack(">QI", c.total, len(refs))
                         + b"".join(pack(">I", r) for r in refs))
        out.append(pack(">I", len(crecs)))
        for rec in sorted(crecs):
            out.append(pack(">I", len(rec)))
            out.append(rec)
        return b"".join(out)

    return _Structure(n, init_keys, edges, serialize)


def canonical_form_lifted(l) -> CanonicalForm:
    """Canonical form of a lifted multi-hypergraph (layout version 2).

    Equal forms imply identical ground-support distributions; constraint
    group names are deliberately excluded so states differing only in group
    naming merge.
    """
    return CanonicalForm(_canonical_bytes(_lifted_structure(l, None, 0x02)))


def pinned_form_lifted(l, pins: Mapping[str, int]) -> bytes:
    return _canonical_bytes(_lifted_structure(l, pins, 0xFF))
