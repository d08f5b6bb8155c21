"""Rewriting rules over ground and lifted multi-hypergraph states.

A rule consists of a pattern (vertex variables with label and multiplicity
requirements plus minimum edge multiplicities), a deterministic effect
(retract and assert edge deltas, with optional per-edge caps acting as
capacity guards), and optionally a lifted effect that asserts one edge into
one of several capacity-limited slots.

Ground semantics: a rule is applicable via every injective assignment of its
pattern variables whose effect can be applied; for rules with a lifted
effect, each (assignment, free slot) pair is a separate option.  Applying a
rule picks uniformly among its options.

Lifted semantics: ``lifted_apply`` pushes a rule through a lifted state and
returns the exact distribution over successor lifted states, together with
the number of groundings in which the rule is applicable.  Three strategies
are used, most specific first:

* slot aggregation for lifted effects whose slots all have capacity one,
  keeping a single successor per branch (the source of state compression),
* interval shifting when the match set is provably constant across all
  groundings and the effect moves bounded intervals rigidly,
* exact fallback: enumerate groundings, apply the rule in each, and merge
  the results by canonical form.

All three agree with the ground semantics exactly; the fallback is the
definition, the other two are proved-equal fast paths with checked
preconditions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Union

from .errors import EffectError, StructuralError
from .graphs import EdgeKey, MultiHypergraph, Vertex, edge_key
from .lifted import (DEFAULT_MAX_GROUNDINGS, BoundedEdge, LiftedMultiHypergraph,
                     TotalConstraint)

State = Union[MultiHypergraph, LiftedMultiHypergraph]

__all__ = ["PatternVertex", "PatternEdge", "Pattern", "EffectEdge", "Effect",
           "SlotTemplate", "LiftedEffect", "Rule", "Match", "LiftedApplyResult",
           "find_matches", "apply", "ground_options", "successors", "lifted_apply"]


@dataclass(frozen=True)
class PatternVertex:
    """A vertex variable; label may be exact, a set of options, or None (any)."""

    var: str
    label: Union[str, frozenset[str], None] = None
    min_multiplicity: int = 1

    def __post_init__(self):
        if not self.var:
            raise StructuralError("pattern variable name must be non-empty")
        if self.min_multiplicity < 1:
            raise StructuralError(f"pattern vertex {self.var!r}: min multiplicity < 1")
        if isinstance(self.label, (set, frozenset)):
            object.__setattr__(self, "label", frozenset(self.label))

    def admits(self, v: Vertex) -> bool:
        if v.multiplicity < self.min_multiplicity:
            return False
        if self.label is None:
            return True
        if isinstance(self.label, frozenset):
            return v.label in self.label
        return v.label == self.label


@dataclass(frozen=True)
class PatternEdge:
    label: str
    vars: tuple[str, ...]
    min_multiplicity: int = 1

    def __post_init__(self):
        object.__setattr__(self, "vars", tuple(self.vars))
        if not self.vars:
            raise StructuralError(f"pattern edge {self.label!r}: no variables")
        if self.min_multiplicity < 1:
            raise StructuralError(f"pattern edge {self.label!r}: min multiplicity < 1")


@dataclass(frozen=True)
class Pattern:
    vertices: tuple[PatternVertex, ...] = ()
    edges: tuple[PatternEdge, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(self.vertices))
        object.__setattr__(self, "edges", tuple(self.edges))
        declared = [pv.var for pv in self.vertices]
        if len(declared) != len(set(declared)):
            raise StructuralError("duplicate pattern variable")
        known = set(declared)
        for pe in self.edges:
            for var in pe.vars:
                if var not in known:
                    raise StructuralError(
                        f"pattern edge {pe.label!r} uses undeclared variable {var!r}")


@dataclass(frozen=True)
class EffectEdge:
    """An edge delta; vars may name pattern variables or literal vertex ids.

    ``cap`` (asserts only) rejects applications that would push the edge
    multiplicity above the cap, acting as a declarative capacity guard.
    """

    label: str
    vars: tuple[str, ...]
    multiplicity: int = 1
    cap: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "vars", tuple(self.vars))
        if self.multiplicity < 1:
            raise StructuralError(f"effect edge {self.label!r}: multiplicity < 1")
        if self.cap is not None and self.cap < 0:
            raise StructuralError(f"effect edge {self.label!r}: negative cap")


@dataclass(frozen=True)
class Effect:
    retract: tuple[EffectEdge, ...] = ()
    assert_: tuple[EffectEdge, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "retract", tuple(self.retract))
        object.__setattr__(self, "assert_", tuple(self.assert_))


@dataclass(frozen=True)
class SlotTemplate:
    """One slot a lifted effect may fill: an edge key template with capacity."""

    label: str
    incidence: tuple[str, ...]
    capacity: int = 1

    def __post_init__(self):
        object.__setattr__(self, "incidence", tuple(self.incidence))
        if self.capacity < 1:
            raise StructuralError(f"slot {self.label!r}: capacity < 1")


@dataclass(frozen=True)
class LiftedEffect:
    """Assert one edge into an unknown slot, tracked by a constraint group.

    ``apply_bounds`` exposes the raw interval arithmetic (total bumped by
    ``total_delta``, uppers bumped by ``per_edge_upper_delta`` and clipped to
    the new total when ``cap_to_total``).  ``lifted_apply`` only uses it when
    its exactness precondition holds, unless ``unchecked`` is set; unchecked
    effects exist for testing divergence detection and are never exact.
    """

    group: str
    slots: tuple[SlotTemplate, ...] = ()
    total_delta: int = 1
    per_edge_upper_delta: int = 1
    cap_to_total: bool = True
    unchecked: bool = False

    def __post_init__(self):
        object.__setattr__(self, "slots", tuple(self.slots))
        if not self.group:
            raise StructuralError("lifted effect needs a group name")
        if not self.slots:
            raise StructuralError(f"lifted effect {self.group!r}: no slots")
        if self.total_delta < 1:
            raise StructuralError(f"lifted effect {self.group!r}: total_delta < 1")

    def apply_bounds(self, bounds: Iterable[tuple[int, int]], total: int
                     ) -> tuple[list[tuple[int, int]], int]:
        new_total = total + self.total_delta
        out = []
        for lo, up in bounds:
            up = up + self.per_edge_upper_delta
            if self.cap_to_total:
                up = min(up, new_total)
            out.append((lo, up))
        return out, new_total


@dataclass(frozen=True)
class Rule:
    name: str
    pattern: Pattern = field(default_factory=Pattern)
    effect: Effect = field(default_factory=Effect)
    lifted_effect: LiftedEffect | None = None

    def __post_init__(self):
        if not self.name:
            raise StructuralError("rule name must be non-empty")


@dataclass(frozen=True, order=True)
class Match:
    """An injective variable assignment, plus the chosen slot for lifted rules."""

    assignment: tuple[tuple[str, str], ...]
    placement: EdgeKey | None = None

    def __post_init__(self):
        object.__setattr__(self, "assignment", tuple(sorted(self.assignment)))

    def as_dict(self) -> dict[str, str]:
        return dict(self.assignment)

    def get(self, var: str) -> str:
        for k, v in self.assignment:
            if k == var:
                return v
        raise KeyError(var)


# -- multiplicity views --------------------------------------------------------

def _floor_mult(state: State, key: EdgeKey) -> int:
    """Multiplicity guaranteed in every grounding (equals the ground value)."""
    if isinstance(state, MultiHypergraph):
        return state.edge_multiplicity(*key)
    b = state._bounded_by_key.get(key)
    return state._fixed_mult.get(key, 0) + (b.lower if b else 0)


def _ceil_mult(state: State, key: EdgeKey) -> int:
    if isinstance(state, MultiHypergraph):
        return state.edge_multiplicity(*key)
    b = state._bounded_by_key.get(key)
    return state._fixed_mult.get(key, 0) + (b.upper if b else 0)


def _resolve(entry: str, assignment: Mapping[str, str], state: State) -> str:
    vid = assignment.get(entry, entry)
    if isinstance(state, MultiHypergraph):
        if not state.has_vertex(vid):
            raise EffectError(f"unknown vertex {vid!r} in effect")
    elif vid not in state._by_id:
        raise EffectError(f"unknown vertex {vid!r} in effect")
    return vid


def _effect_key(e: EffectEdge, assignment: Mapping[str, str], state: State) -> EdgeKey:
    return edge_key(e.label, [_resolve(x, assignment, state) for x in e.vars])


def _slot_key(s: SlotTemplate, assignment: Mapping[str, str], state: State) -> EdgeKey:
    return edge_key(s.label, [_resolve(x, assignment, state) for x in s.incidence])


# -- matching ------------------------------------------------------------------

def _raw_matches(pattern: Pattern, state: State, optimistic: bool) -> list[Match]:
    """All injective assignments satisfying the pattern conditions.

    On lifted states, conditions read guaranteed multiplicities (optimistic
    False) or maximal ones (optimistic True); the two coincide on ground
    states.
    """
    verts = state.vertices
    mult = _ceil_mult if optimistic else _floor_mult
    pvs = list(pattern.vertices)
    # most-constrained-first static order keeps backtracking shallow
    candidates = {pv.var: sorted((v.id for v in verts if pv.admits(v)))
                  for pv in pvs}
    pvs.sort(key=lambda pv: len(candidates[pv.var]))
    edges_by_last: dict[str, list[PatternEdge]] = {}
    order_index = {pv.var: i for i, pv in enumerate(pvs)}
    for pe in pattern.edges:
        last = max(pe.vars, key=lambda v: order_index[v]) if pe.vars else None
        if last is None:
            continue
        edges_by_last.setdefault(last, []).append(pe)

    out: list[Match] = []
    assignment: dict[str, str] = {}
    used: set[str] = set()

    def backtrack(i: int):
        if i == len(pvs):
            out.append(Match(tuple(assignment.items())))
            return
        pv = pvs[i]
        for vid in candidates[pv.var]:
            if vid in used:
                continue
            assignment[pv.var] = vid
            used.add(vid)
            ok = True
            for pe in edges_by_last.get(pv.var, ()):
                key = edge_key(pe.label, [assignment[x] for x in pe.vars])
                if mult(state, key) < pe.min_multiplicity:
                    ok = False
                    break
            if ok:
                backtrack(i + 1)
            del assignment[pv.var]
            used.discard(vid)

    backtrack(0)
    out.sort()
    return out


def _effect_feasible(rule: Rule, state: State, match: Match, optimistic: bool) -> bool:
    """Whether retracts stay non-negative and caps hold (in every grounding
    for optimistic False, in the loosest grounding for optimistic True)."""
    assignment = match.as_dict()
    mult = _ceil_mult if optimistic else _floor_mult
    delta: dict[EdgeKey, int] = {}
    for e in rule.effect.retract:
        k = _effect_key(e, assignment, state)
        delta[k] = delta.get(k, 0) - e.multiplicity
    for k, d in delta.items():
        if mult(state, k) + d < 0:
            return False
    for e in rule.effect.assert_:
        k = _effect_key(e, assignment, state)
        delta[k] = delta.get(k, 0) + e.multiplicity
        if e.cap is not None and mult(state, k) + delta[k] > e.cap:
            return False
    return True


def _free_slot_keys(rule: Rule, g: MultiHypergraph, match: Match) -> list[EdgeKey]:
    assignment = match.as_dict()
    free = []
    for s in rule.lifted_effect.slots:
        k = _slot_key(s, assignment, g)
        if g.edge_multiplicity(*k) + 1 <= s.capacity:
            free.append(k)
    return free


def find_matches(rule: Rule, state: State) -> list[Match]:
    """All applicable injective matches of the rule's pattern, sorted.

    A match counts as applicable only if the effect can actually fire: no
    retraction below zero, no cap exceeded, and for lifted-effect rules at
    least one slot free.  On lifted states, applicability means applicable
    in every grounding.
    """
    matches = [m for m in _raw_matches(rule.pattern, state, optimistic=False)
               if _effect_feasible(rule, state, m, optimistic=False)]
    if rule.lifted_effect is not None:
        if isinstance(state, MultiHypergraph):
            matches = [m for m in matches if _free_slot_keys(rule, state, m)]
        else:
            kept = []
            for m in matches:
                info = _slot_census(rule.lifted_effect, state, m)
                if info is not None:
                    ok = info.free_count >= 1
                else:
                    assignment = m.as_dict()
                    ok = any(
                        _ceil_mult(state, _slot_key(s, assignment, state)) + 1
                        <= s.capacity
                        for s in rule.lifted_effect.slots)
                if ok:
                    kept.append(m)
            matches = kept
    return matches


def ground_options(rule: Rule, g: MultiHypergraph) -> list[Match]:
    """The rule's equally likely application options in a ground state."""
    matches = find_matches(rule, g)
    if rule.lifted_effect is None:
        return matches
    out = []
    for m in matches:
        for k in _free_slot_keys(rule, g, m):
            out.append(Match(m.assignment, placement=k))
    out.sort()
    return out


def apply(rule: Rule, g: MultiHypergraph, match: Match) -> MultiHypergraph:
    """Apply the rule's effect at the given match; raises EffectError when the
    match is not applicable in g."""
    assignment = match.as_dict()
    mults = g.edge_dict()
    for e in rule.effect.retract:
        k = _effect_key(e, assignment, g)
        have = mults.get(k, 0)
        if have < e.multiplicity:
            raise EffectError(
                f"rule {rule.name!r}: cannot retract {e.multiplicity} of {k!r} "
                f"(present: {have})")
        mults[k] = have - e.multiplicity
    for e in rule.effect.assert_:
        k = _effect_key(e, assignment, g)
        mults[k] = mults.get(k, 0) + e.multiplicity
        if e.cap is not None and mults[k] > e.cap:
            raise EffectError(
                f"rule {rule.name!r}: asserting {k!r} exceeds cap {e.cap}")
    if rule.lifted_effect is not None:
        if match.placement is None:
            raise EffectError(f"rule {rule.name!r}: lifted effect needs a placement")
        slots = {_slot_key(s, assignment, g): s for s in rule.lifted_effect.slots}
        if match.placement not in slots:
            raise EffectError(
                f"rule {rule.name!r}: placement {match.placement!r} is not a slot")
        cap = slots[match.placement].capacity
        mults[match.placement] = mults.get(match.placement, 0) + 1
        if mults[match.placement] > cap:
            raise EffectError(
                f"rule {rule.name!r}: slot {match.placement!r} is full")
    return g.replace_edges(mults)


def successors(rule: Rule, g: MultiHypergraph) -> list[tuple[MultiHypergraph, float]]:
    """Successor distribution of the rule in g: uniform over its options,
    grouped by canonical form.  Empty when the rule is not applicable."""
    options = ground_options(rule, g)
    if not options:
        return []
    grouped: dict[bytes, tuple[MultiHypergraph, int]] = {}
    for m in options:
        h = apply(rule, g, m)
        key = h.canonical_form().data
        if key in grouped:
            grouped[key] = (grouped[key][0], grouped[key][1] + 1)
        else:
            grouped[key] = (h, 1)
    n = len(options)
    return [(h, c / n) for _, (h, c) in sorted(grouped.items())]


# -- lifted application --------------------------------------------------------

@dataclass(frozen=True)
class LiftedApplyResult:
    """Successor lifted states with probabilities, plus applicability counts.

    ``outputs`` is conditional on the rule being applicable; ``n_applicable``
    of the ``n_groundings`` groundings admit at least one option.  Callers
    split the source state when 0 < n_applicable < n_groundings.
    """

    outputs: tuple[tuple[LiftedMultiHypergraph, float], ...]
    n_applicable: int
    n_groundings: int


@dataclass(frozen=True)
class _SlotCensus:
    all_keys: tuple[EdgeKey, ...]
    members: tuple[EdgeKey, ...]      # live group members among the slot keys
    empties: tuple[EdgeKey, ...]      # slot keys with no occupant and no bound
    group_total: int
    free_count: int                   # empties + members - total, per grounding


def _slot_census(le: LiftedEffect, l: LiftedMultiHypergraph, match: Match
                 ) -> _SlotCensus | None:
    """Classify the rule's slot keys in l; None when the aggregation
    precondition fails (fallback required)."""
    if le.total_delta != 1 or le.per_edge_upper_delta != 1 or not le.cap_to_total:
        return None
    assignment = match.as_dict()
    keys = []
    for s in le.slots:
        if s.capacity != 1:
            return None
        keys.append(_slot_key(s, assignment, l))
    if len(set(keys)) != len(keys):
        return None
    group = next((c for c in l.constraints if c.name == le.group), None)
    members: list[EdgeKey] = []
    empties: list[EdgeKey] = []
    for k in keys:
        b = l._bounded_by_key.get(k)
        f = l._fixed_mult.get(k, 0)
        if b is not None:
            if group is None or k not in group.edge_keys or f or (b.lower, b.upper) != (0, 1):
                return None
            members.append(k)
        elif f == 0:
            empties.append(k)
        elif f != 1:
            return None
    if group is not None and set(group.edge_keys) - set(keys):
        return None          # foreign members: free-slot count not constant
    total = group.total if group is not None else 0
    return _SlotCensus(tuple(keys), tuple(members), tuple(empties), total,
                       len(empties) + len(members) - total)


def _shift_effect(rule: Rule, l: LiftedMultiHypergraph, match: Match
                  ) -> tuple[dict[EdgeKey, int], dict[EdgeKey, tuple[int, int]],
                             dict[str, int]] | None:
    """Compute the effect as rigid interval shifts; None when not legal.

    Returns (new fixed multiplicities, new bounds, group total deltas).
    Legal iff every retract is covered by fixed multiplicity plus the lower
    bound, and every cap verdict is identical across groundings.
    """
    assignment = match.as_dict()
    fixed = {k: m for k, m in l._fixed_mult.items()}
    shift: dict[EdgeKey, int] = {}
    for e in rule.effect.retract:
        k = _effect_key(e, assignment, l)
        need = e.multiplicity
        take = min(fixed.get(k, 0), need)
        fixed[k] = fixed.get(k, 0) - take
        need -= take
        if need:
            b = l._bounded_by_key.get(k)
            if b is None or b.lower + shift.get(k, 0) < need:
                return None
            shift[k] = shift.get(k, 0) - need
    for e in rule.effect.assert_:
        k = _effect_key(e, assignment, l)
        if l._bounded_by_key.get(k) is not None or shift.get(k, 0):
            shift[k] = shift.get(k, 0) + e.multiplicity
        else:
            fixed[k] = fixed.get(k, 0) + e.multiplicity
        if e.cap is not None:
            b = l._bounded_by_key.get(k)
            base = fixed.get(k, 0) + shift.get(k, 0)
            lo_v = base + (b.lower if b else 0)
            up_v = base + (b.upper if b else 0)
            if (lo_v > e.cap) != (up_v > e.cap):
                return None  # verdict varies across groundings
            if up_v > e.cap:
                return None  # infeasible everywhere; caller filtered already
    bounds: dict[EdgeKey, tuple[int, int]] = {}
    group_delta: dict[str, int] = {}
    for k, d in shift.items():
        b = l._bounded_by_key.get(k)
        if b is None:
            # assert onto a previously fixed-only key stays fixed
            fixed[k] = fixed.get(k, 0) + d
            continue
        bounds[k] = (b.lower + d, b.upper + d)
        c = l._group_of.get(k)
        if c is not None:
            group_delta[c.name] = group_delta.get(c.name, 0) + d
    return fixed, bounds, group_delta


def _rebuild(l: LiftedMultiHypergraph, fixed: Mapping[EdgeKey, int],
             bounds: Mapping[EdgeKey, tuple[int, int]],
             group_delta: Mapping[str, int],
             extra_group: TotalConstraint | None = None
             ) -> LiftedMultiHypergraph:
    bedges = []
    for b in l.bounded_edges:
        lo, up = bounds.get(b.key, (b.lower, b.upper))
        bedges.append(BoundedEdge(b.label, b.incidence, lo, up))
    for k, (lo, up) in bounds.items():
        if k not in l._bounded_by_key:
            bedges.append(BoundedEdge(k[0], k[1], lo, up))
    constraints = [TotalConstraint(c.name, c.edge_keys,
                                   c.total + group_delta.get(c.name, 0))
                   for c in l.constraints]
    if extra_group is not None:
        constraints.append(extra_group)
    return l.rebuild(fixed=fixed, bounded=bedges, constraints=constraints)


def _grouped_outputs(pairs: list[tuple[LiftedMultiHypergraph, float]]
                     ) -> tuple[tuple[LiftedMultiHypergraph, float], ...]:
    grouped: dict[bytes, tuple[LiftedMultiHypergraph, float]] = {}
    for state, w in pairs:
        key = state.canonical_form().data
        if key in grouped:
            grouped[key] = (grouped[key][0], grouped[key][1] + w)
        else:
            grouped[key] = (state, w)
    return tuple(v for _, v in sorted(grouped.items()))


def _fallback(rule: Rule, l: LiftedMultiHypergraph, max_groundings: int
              ) -> LiftedApplyResult:
    """Definitionally exact path: enumerate, apply, relift by canonical form."""
    weights: dict[bytes, tuple[MultiHypergraph, float]] = {}
    n_app = 0
    n_tot = 0
    applied: list[tuple[MultiHypergraph, int]] = []
    for g in l.iter_groundings(max_groundings):
        n_tot += 1
        options = ground_options(rule, g)
        if options:
            n_app += 1
            applied.append((g, len(options)))
            for m in options:
                h = apply(rule, g, m)
                key = h.canonical_form().data
                w = 1.0 / len(options)
                if key in weights:
                    weights[key] = (weights[key][0], weights[key][1] + w)
                else:
                    weights[key] = (h, w)
    if n_app == 0:
        return LiftedApplyResult((), 0, n_tot)
    outputs = [(LiftedMultiHypergraph.from_graph(h), w / n_app)
               for _, (h, w) in sorted(weights.items())]
    return LiftedApplyResult(tuple(outputs), n_app, n_tot)


def _apply_unchecked(rule: Rule, l: LiftedMultiHypergraph, match: Match
                     ) -> LiftedMultiHypergraph:
    """Raw interval arithmetic on the effect's group; exact only by accident."""
    le = rule.lifted_effect
    group = next((c for c in l.constraints if c.name == le.group), None)
    if group is None:
        raise EffectError(f"rule {rule.name!r}: no constraint group {le.group!r}")
    keys = sorted(group.edge_keys)
    pairs = [(l._bounded_by_key[k].lower, l._bounded_by_key[k].upper) for k in keys]
    new_pairs, new_total = le.apply_bounds(pairs, group.total)
    shift = _shift_effect(rule, l, match)
    if shift is None:
        raise EffectError(f"rule {rule.name!r}: effect not expressible as shifts")
    fixed, bounds, group_delta = shift
    for k, (lo, up) in zip(keys, new_pairs):
        bounds[k] = (lo, up)
    group_delta[le.group] = group_delta.get(le.group, 0) + (new_total - group.total)
    return _rebuild(l, fixed, bounds, group_delta)


def lifted_apply(rule: Rule, l: LiftedMultiHypergraph,
                 max_groundings: int = DEFAULT_MAX_GROUNDINGS) -> LiftedApplyResult:
    """Exact successor distribution of the rule over a lifted state."""
    if l.is_empty:
        return LiftedApplyResult((), 0, 0)
    pess = _raw_matches(rule.pattern, l, optimistic=False)
    opt = _raw_matches(rule.pattern, l, optimistic=True)
    if pess != opt:
        return _fallback(rule, l, max_groundings)

    feasible: list[Match] = []
    for m in pess:
        lo_ok = _effect_feasible(rule, l, m, optimistic=False)
        up_ok = _effect_feasible(rule, l, m, optimistic=True)
        if lo_ok != up_ok:
            return _fallback(rule, l, max_groundings)
        if lo_ok:
            feasible.append(m)

    n_tot = l.count_groundings()

    if rule.lifted_effect is not None and rule.lifted_effect.unchecked:
        if not feasible:
            return LiftedApplyResult((), 0, n_tot)
        outs = [( _apply_unchecked(rule, l, m), 1.0 / len(feasible))
                for m in feasible]
        return LiftedApplyResult(_grouped_outputs(outs), n_tot, n_tot)

    if rule.lifted_effect is not None:
        per_match = []
        for m in feasible:
            census = _slot_census(rule.lifted_effect, l, m)
            if census is None:
                return _fallback(rule, l, max_groundings)
            per_match.append((m, census))
        per_match = [(m, c) for m, c in per_match if c.free_count > 0]
        if not per_match:
            return LiftedApplyResult((), 0, n_tot)
        total_options = sum(c.free_count for _, c in per_match)
        outs: list[tuple[LiftedMultiHypergraph, float]] = []
        for m, census in per_match:
            shift = _shift_effect(rule, l, m)
            if shift is None:
                return _fallback(rule, l, max_groundings)
            fixed, bounds, group_delta = shift
            le = rule.lifted_effect
            touched = (le.group in group_delta
                       or any(k in bounds for k in census.all_keys)
                       or any(fixed.get(k, 0) != l._fixed_mult.get(k, 0)
                              for k in census.all_keys))
            if touched:
                # the plain effect interferes with the slot bookkeeping
                return _fallback(rule, l, max_groundings)
            m_count = len(census.members)
            if census.group_total == 0 and m_count == 0:
                # fresh group over every open slot: uniform single successor
                new_members = census.empties
                extra = TotalConstraint(le.group, frozenset(new_members), 1)
                b2 = dict(bounds)
                for k in new_members:
                    b2[k] = (0, 1)
                outs.append((_rebuild(l, fixed, b2, group_delta, extra),
                             len(new_members) / total_options))
            else:
                if m_count - census.group_total > 0:
                    gd = dict(group_delta)
                    gd[le.group] = gd.get(le.group, 0) + 1
                    outs.append((_rebuild(l, fixed, bounds, gd),
                                 (m_count - census.group_total) / total_options))
                for k in census.empties:
                    f2 = dict(fixed)
                    f2[k] = f2.get(k, 0) + 1
                    outs.append((_rebuild(l, f2, bounds, group_delta),
                                 1.0 / total_options))
        return LiftedApplyResult(_grouped_outputs(outs), n_tot, n_tot)

    if not feasible:
        return LiftedApplyResult((), 0, n_tot)
    outs = []
    for m in feasible:
        shift = _shift_effect(rule, l, m)
        if shift is None:
            return _fallback(rule, l, max_groundings)
        fixed, bounds, group_delta = shift
        outs.append((_rebuild(l, fixed, bounds, group_delta), 1.0 / len(feasible)))
    return LiftedApplyResult(_grouped_outputs(outs), n_tot, n_tot)
