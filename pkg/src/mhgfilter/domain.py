"""Domain definitions, serialization formats, and trace generation.

A domain bundles everything the filter needs: the vertex/edge vocabulary,
the observation schema (which vertex is the agent, which labels express
position and holding, which labels are observable as held counts), the
conservation declaration, the initial state, the rules, and the action
model.  Two assembly scenes ship built in: ``mini`` (small enough for the
ground reference filter) and ``bookshelf`` (large enough that only the
lifted filter is practical).

Domains are stored as JSON (format tag ``mhg-domain/1``); traces as JSON
lines, one annotation per line with the action name, the agent's location
before and after, and the held-item counts before and after (absent labels
mean zero).
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .errors import ParseError, StructuralError
from .filtering import ActionModel, agent_location
from .graphs import Hyperedge, MultiHypergraph, Vertex
from .lifted import BoundedEdge, LiftedMultiHypergraph, TotalConstraint
from .rewrite import (Effect, EffectEdge, LiftedEffect, Pattern, PatternEdge,
                      PatternVertex, Rule, SlotTemplate, ground_options, apply)

DOMAIN_FORMAT = "mhg-domain/1"

__all__ = ["AnnotationTuple", "Domain", "parse_domain", "serialize_domain",
           "parse_trace", "format_trace", "generate_trace", "held_counts",
           "mini_bookshelf_domain", "bookshelf_domain", "builtin_domain",
           "BUILTIN_DOMAINS", "DOMAIN_FORMAT"]


@dataclass(frozen=True)
class AnnotationTuple:
    """One observed step: action name, agent location and held-item counts
    on both sides of the transition."""

    action: str
    loc_t: str
    loc_next: str
    held_t: Mapping[str, int] = field(default_factory=dict)
    held_next: Mapping[str, int] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"action": self.action, "loc_t": self.loc_t,
                "loc_next": self.loc_next,
                "held_t": dict(sorted(self.held_t.items())),
                "held_next": dict(sorted(self.held_next.items()))}


@dataclass(frozen=True)
class Domain:
    name: str
    agent_id: str
    location_labels: frozenset[str]
    agent_location_labels: frozenset[str]
    holdable_labels: frozenset[str]
    conservation_labels: frozenset[str]
    conserved_vertex_labels: frozenset[str]
    initial_state: LiftedMultiHypergraph
    rules: tuple[Rule, ...]
    action_model: ActionModel = field(default_factory=ActionModel)
    at_label: str = "at"
    holds_label: str = "holds"

    def __post_init__(self):
        names = [r.name for r in self.rules]
        if len(names) != len(set(names)):
            raise StructuralError(f"domain {self.name!r}: duplicate rule name")
        if not self.agent_location_labels <= self.location_labels:
            raise StructuralError(
                f"domain {self.name!r}: agent locations must be locations")
        by_label: dict[str, list[Vertex]] = {}
        for v in self.initial_state.vertices:
            by_label.setdefault(v.label, []).append(v)
        object.__setattr__(self, "_by_label", by_label)

    def vertices_with_label(self, label: str) -> tuple[Vertex, ...]:
        return tuple(self._by_label.get(label, ()))

    def rule(self, name: str) -> Rule:
        for r in self.rules:
            if r.name == name:
                return r
        raise KeyError(name)


# -- domain JSON ---------------------------------------------------------------

def _req(obj: dict, key: str, source: str):
    if key not in obj:
        raise ParseError(f"missing key {key!r}", source)
    return obj[key]


def _pattern_vertex(pv: dict, source: str) -> PatternVertex:
    label = pv.get("label")
    any_of = pv.get("label_any_of")
    if label is not None and any_of is not None:
        raise ParseError("pattern vertex has both label and label_any_of", source)
    return PatternVertex(_req(pv, "var", source),
                         frozenset(any_of) if any_of is not None else label,
                         int(pv.get("min_multiplicity", 1)))


def parse_domain(data: dict, source: str = "<domain>") -> Domain:
    if not isinstance(data, dict):
        raise ParseError("domain document must be an object", source)
    if data.get("format") != DOMAIN_FORMAT:
        raise ParseError(f"unsupported domain format {data.get('format')!r}; "
                         f"expected {DOMAIN_FORMAT!r}", source)
    try:
        labels = data.get("labels", {})
        conservation = data.get("conservation", {})
        vertices = [Vertex(_req(v, "id", source), _req(v, "label", source),
                           int(v.get("multiplicity", 1)))
                    for v in _req(data, "vertices", source)]
        edges = [Hyperedge(_req(e, "label", source),
                           tuple(_req(e, "incidence", source)),
                           int(e.get("multiplicity", 1)))
                 for e in data.get("edges", ())]
        bounded = [BoundedEdge(_req(b, "label", source),
                               tuple(_req(b, "incidence", source)),
                               int(_req(b, "lower", source)),
                               int(_req(b, "upper", source)))
                   for b in data.get("bounded_edges", ())]
        constraints = [
            TotalConstraint(
                _req(c, "name", source),
                frozenset((label, tuple(sorted(inc)))
                          for label, inc in _req(c, "edges", source)),
                int(_req(c, "total", source)))
            for c in data.get("constraints", ())]
        rules = []
        for r in _req(data, "rules", source):
            pat = r.get("pattern", {})
            pattern = Pattern(
                tuple(_pattern_vertex(pv, source)
                      for pv in pat.get("vertices", ())),
                tuple(PatternEdge(_req(pe, "label", source),
                                  tuple(_req(pe, "vars", source)),
                                  int(pe.get("min_multiplicity", 1)))
                      for pe in pat.get("edges", ())))
            eff = r.get("effect", {})

            def _effect_edges(entries):
                return tuple(
                    EffectEdge(_req(e, "label", source),
                               tuple(_req(e, "vars", source)),
                               int(e.get("multiplicity", 1)),
                               None if e.get("cap") is None else int(e["cap"]))
                    for e in entries)

            effect = Effect(_effect_edges(eff.get("retract", ())),
                            _effect_edges(eff.get("assert", ())))
            lifted = None
            if r.get("lifted_effect") is not None:
                le = r["lifted_effect"]
                lifted = LiftedEffect(
                    _req(le, "group", source),
                    tuple(SlotTemplate(_req(s, "label", source),
                                       tuple(_req(s, "incidence", source)),
                                       int(s.get("capacity", 1)))
                          for s in _req(le, "slots", source)),
                    int(le.get("total_delta", 1)),
                    int(le.get("per_edge_upper_delta", 1)),
                    bool(le.get("cap_to_total", True)),
                    bool(le.get("unchecked", False)))
            rules.append(Rule(_req(r, "name", source), pattern, effect, lifted))
        am = data.get("action_model", {})
        action_model = ActionModel(
            dict(am.get("weights", {})),
            {loc: dict(tbl) for loc, tbl in am.get("by_location", {}).items()})
        conservation_labels = frozenset(conservation.get("edges", ()))
        conserved_vertex_labels = frozenset(conservation.get("vertices", ()))
        initial = LiftedMultiHypergraph(
            vertices, edges, bounded, constraints,
            conservation_labels, conserved_vertex_labels)
        return Domain(
            name=str(data.get("name", source)),
            agent_id=_req(data, "agent", source),
            location_labels=frozenset(_req(labels, "locations", source)),
            agent_location_labels=frozenset(_req(labels, "agent_locations", source)),
            holdable_labels=frozenset(_req(labels, "holdable", source)),
            conservation_labels=conservation_labels,
            conserved_vertex_labels=conserved_vertex_labels,
            initial_state=initial,
            rules=tuple(rules),
            action_model=action_model,
            at_label=str(data.get("at_label", "at")),
            holds_label=str(data.get("holds_label", "holds")))
    except ParseError:
        raise
    except (StructuralError, KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad domain document: {exc}", source) from exc


def serialize_domain(domain: Domain) -> dict:
    init = domain.initial_state

    def _label_spec(pv: PatternVertex) -> dict:
        out: dict = {"var": pv.var}
        if isinstance(pv.label, frozenset):
            out["label_any_of"] = sorted(pv.label)
        elif pv.label is not None:
            out["label"] = pv.label
        if pv.min_multiplicity != 1:
            out["min_multiplicity"] = pv.min_multiplicity
        return out

    def _effect_edges(edges):
        out = []
        for e in edges:
            d = {"label": e.label, "vars": list(e.vars)}
            if e.multiplicity != 1:
                d["multiplicity"] = e.multiplicity
            if e.cap is not None:
                d["cap"] = e.cap
            out.append(d)
        return out

    rules = []
    for r in domain.rules:
        rd: dict = {"name": r.name, "pattern": {
            "vertices": [_label_spec(pv) for pv in r.pattern.vertices],
            "edges": [{"label": pe.label, "vars": list(pe.vars),
                       **({"min_multiplicity": pe.min_multiplicity}
                          if pe.min_multiplicity != 1 else {})}
                      for pe in r.pattern.edges]}}
        if r.effect.retract or r.effect.assert_:
            rd["effect"] = {}
            if r.effect.retract:
                rd["effect"]["retract"] = _effect_edges(r.effect.retract)
            if r.effect.assert_:
                rd["effect"]["assert"] = _effect_edges(r.effect.assert_)
        if r.lifted_effect is not None:
            le = r.lifted_effect
            rd["lifted_effect"] = {
                "group": le.group,
                "slots": [{"label": s.label, "incidence": list(s.incidence),
                           **({"capacity": s.capacity} if s.capacity != 1 else {})}
                          for s in le.slots],
                **({"total_delta": le.total_delta} if le.total_delta != 1 else {}),
                **({"per_edge_upper_delta": le.per_edge_upper_delta}
                   if le.per_edge_upper_delta != 1 else {}),
                **({"cap_to_total": le.cap_to_total} if not le.cap_to_total else {}),
                **({"unchecked": True} if le.unchecked else {})}
        rules.append(rd)

    out = {
        "format": DOMAIN_FORMAT,
        "name": domain.name,
        "agent": domain.agent_id,
        "labels": {"locations": sorted(domain.location_labels),
                   "agent_locations": sorted(domain.agent_location_labels),
                   "holdable": sorted(domain.holdable_labels)},
        "conservation": {"edges": sorted(domain.conservation_labels),
                         "vertices": sorted(domain.conserved_vertex_labels)},
        "vertices": [{"id": v.id, "label": v.label,
                      **({"multiplicity": v.multiplicity}
                         if v.multiplicity != 1 else {})}
                     for v in init.vertices],
        "edges": [{"label": e.label, "incidence": list(e.incidence),
                   **({"multiplicity": e.multiplicity}
                      if e.multiplicity != 1 else {})}
                  for e in init.fixed_edges],
        "rules": rules,
    }
    if init.bounded_edges:
        out["bounded_edges"] = [
            {"label": b.label, "incidence": list(b.incidence),
             "lower": b.lower, "upper": b.upper} for b in init.bounded_edges]
    if init.constraints:
        out["constraints"] = [
            {"name": c.name,
             "edges": sorted([label, list(inc)] for label, inc in c.edge_keys),
             "total": c.total} for c in init.constraints]
    am: dict = {}
    if domain.action_model.weights:
        am["weights"] = dict(sorted(domain.action_model.weights.items()))
    if domain.action_model.by_location:
        am["by_location"] = {loc: dict(sorted(tbl.items()))
                             for loc, tbl in
                             sorted(domain.action_model.by_location.items())}
    if am:
        out["action_model"] = am
    if domain.at_label != "at":
        out["at_label"] = domain.at_label
    if domain.holds_label != "holds":
        out["holds_label"] = domain.holds_label
    return out


# -- trace JSONL ---------------------------------------------------------------

def parse_trace(text: str, source: str = "<trace>") -> list[AnnotationTuple]:
    out = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"bad JSON: {exc.msg}", source, lineno) from exc
        if not isinstance(obj, dict):
            raise ParseError("annotation must be an object", source, lineno)
        try:
            held_t = {str(k): int(v) for k, v in obj.get("held_t", {}).items()}
            held_next = {str(k): int(v)
                         for k, v in obj.get("held_next", {}).items()}
            out.append(AnnotationTuple(str(obj["action"]), str(obj["loc_t"]),
                                       str(obj["loc_next"]), held_t, held_next))
        except (KeyError, TypeError, ValueError, AttributeError) as exc:
            raise ParseError(f"bad annotation: {exc}", source, lineno) from exc
    return out


def format_trace(trace: Iterable[AnnotationTuple]) -> str:
    return "".join(json.dumps(t.to_dict(), sort_keys=True) + "\n" for t in trace)


# -- built-in scenes -----------------------------------------------------------

def _walk_rule(agent_locations: frozenset[str]) -> Rule:
    return Rule("walk",
                Pattern((PatternVertex("A", "agent"),
                         PatternVertex("X", agent_locations),
                         PatternVertex("Y", agent_locations)),
                        (PatternEdge("at", ("A", "X")),)),
                Effect(retract=(EffectEdge("at", ("A", "X")),),
                       assert_=(EffectEdge("at", ("A", "Y")),)))


def _take_rule(holdable: frozenset[str], agent_locations: frozenset[str]) -> Rule:
    return Rule("take",
                Pattern((PatternVertex("A", "agent"),
                         PatternVertex("I", holdable),
                         PatternVertex("L", agent_locations)),
                        (PatternEdge("at", ("A", "L")),
                         PatternEdge("at", ("I", "L")))),
                Effect(retract=(EffectEdge("at", ("I", "L")),),
                       assert_=(EffectEdge("holds", ("A", "I")),)))


def _put_down_rule(holdable: frozenset[str],
                   agent_locations: frozenset[str]) -> Rule:
    return Rule("putDown",
                Pattern((PatternVertex("A", "agent"),
                         PatternVertex("I", holdable),
                         PatternVertex("L", agent_locations)),
                        (PatternEdge("at", ("A", "L")),
                         PatternEdge("holds", ("A", "I")))),
                Effect(retract=(EffectEdge("holds", ("A", "I")),),
                       assert_=(EffectEdge("at", ("I", "L")),)))


def _install_rule(slot_ids: Sequence[str]) -> Rule:
    return Rule("installEccentric",
                Pattern((PatternVertex("A", "agent"),
                         PatternVertex("E", "eccentric"),
                         PatternVertex("S", "screwdriver"),
                         PatternVertex("T", "table")),
                        (PatternEdge("at", ("A", "T")),
                         PatternEdge("holds", ("A", "E")),
                         PatternEdge("holds", ("A", "S")))),
                Effect(retract=(EffectEdge("holds", ("A", "E")),)),
                LiftedEffect("installed_eccentrics",
                             tuple(SlotTemplate("at", ("E", sid))
                                   for sid in slot_ids)))


def mini_bookshelf_domain() -> Domain:
    """Two boards, four eccentric screws, one screwdriver; small enough to
    filter by exhaustive ground enumeration."""
    slot_ids = ("slot_a1", "slot_a2", "slot_b1", "slot_b2")
    agent_locations = frozenset({"floor", "table"})
    holdable = frozenset({"eccentric", "screwdriver"})
    vertices = [Vertex("agent", "agent"),
                Vertex("floor", "floor"), Vertex("table", "table"),
                Vertex("board_a", "board_a"), Vertex("board_b", "board_b"),
                Vertex("eccentric", "eccentric", 4),
                Vertex("screwdriver", "screwdriver")]
    vertices += [Vertex(s, s) for s in slot_ids]
    edges = [Hyperedge("at", ("agent", "floor")),
             Hyperedge("at", ("eccentric", "table"), 4),
             Hyperedge("at", ("screwdriver", "table")),
             Hyperedge("has", ("board_a", "slot_a1")),
             Hyperedge("has", ("board_a", "slot_a2")),
             Hyperedge("has", ("board_b", "slot_b1")),
             Hyperedge("has", ("board_b", "slot_b2"))]
    uninstall = Rule(
        "uninstall",
        Pattern((PatternVertex("A", "agent"),
                 PatternVertex("E", "eccentric"),
                 PatternVertex("S", "screwdriver"),
                 PatternVertex("T", "table"),
                 PatternVertex("SL", frozenset(slot_ids))),
                (PatternEdge("at", ("A", "T")),
                 PatternEdge("holds", ("A", "S")),
                 PatternEdge("at", ("E", "SL")))),
        Effect(retract=(EffectEdge("at", ("E", "SL")),),
               assert_=(EffectEdge("holds", ("A", "E")),)))
    conservation_labels = frozenset({"at", "holds"})
    conserved = frozenset({"eccentric", "screwdriver"})
    initial = LiftedMultiHypergraph(vertices, edges, (), (),
                                    conservation_labels, conserved)
    return Domain(
        name="mini",
        agent_id="agent",
        location_labels=frozenset({"floor", "table", *slot_ids}),
        agent_location_labels=agent_locations,
        holdable_labels=holdable,
        conservation_labels=conservation_labels,
        conserved_vertex_labels=conserved,
        initial_state=initial,
        rules=(_walk_rule(agent_locations),
               _take_rule(holdable, agent_locations),
               _put_down_rule(holdable, agent_locations),
               _install_rule(slot_ids),
               uninstall))


def bookshelf_domain() -> Domain:
    """Full assembly scene: 56 components (7 boards, 40 screws, 9 tools)."""
    boards = ("shelf_top", "shelf_bottom", "shelf_middle", "side_left",
              "side_right", "back_panel", "base_plate")
    tools = ("screwdriver", "hammer", "allen_key", "wrench", "drill",
             "pencil", "ruler", "clamp", "spirit_level")
    screws = (("eccentric", 14), ("dowel", 14), ("bolt", 12))
    slot_ids = tuple(f"slot_{i}" for i in range(1, 15))
    adjacency = (("side_left", "shelf_top"), ("side_left", "shelf_bottom"),
                 ("side_right", "shelf_top"), ("side_right", "shelf_bottom"),
                 ("side_left", "shelf_middle"), ("side_right", "shelf_middle"),
                 ("back_panel", "shelf_top"), ("back_panel", "shelf_bottom"),
                 ("back_panel", "side_left"), ("back_panel", "side_right"),
                 ("base_plate", "shelf_bottom"), ("base_plate", "side_left"),
                 ("base_plate", "side_right"))
    agent_locations = frozenset({"floor", "table"})
    holdable = frozenset(label for label, _ in screws) | frozenset(tools)
    vertices = [Vertex("agent", "agent"),
                Vertex("floor", "floor"), Vertex("table", "table")]
    vertices += [Vertex(b, b) for b in boards]
    vertices += [Vertex(s, s) for s in slot_ids]
    vertices += [Vertex(label, label, mult) for label, mult in screws]
    vertices += [Vertex(t, t) for t in tools]
    edges = [Hyperedge("at", ("agent", "floor"))]
    edges += [Hyperedge("at", (label, "table"), mult) for label, mult in screws]
    edges += [Hyperedge("at", (t, "table")) for t in tools]
    edges += [Hyperedge("adjacent", pair) for pair in adjacency]
    # two eccentric slots per board
    for i, sid in enumerate(slot_ids):
        edges.append(Hyperedge("has", (boards[i % 7], sid)))
    connect = Rule(
        "connectBoards",
        Pattern((PatternVertex("A", "agent"),
                 PatternVertex("B", "bolt"),
                 PatternVertex("W", "wrench"),
                 PatternVertex("T", "table"),
                 PatternVertex("B1", frozenset(boards)),
                 PatternVertex("B2", frozenset(boards))),
                (PatternEdge("at", ("A", "T")),
                 PatternEdge("holds", ("A", "B")),
                 PatternEdge("holds", ("A", "W")),
                 PatternEdge("adjacent", ("B1", "B2")))),
        Effect(retract=(EffectEdge("holds", ("A", "B")),),
               assert_=(EffectEdge("connected", ("B", "B1", "B2"), cap=1),)))
    conservation_labels = frozenset({"at", "holds", "connected"})
    conserved = holdable
    initial = LiftedMultiHypergraph(vertices, edges, (), (),
                                    conservation_labels, conserved)
    return Domain(
        name="bookshelf",
        agent_id="agent",
        location_labels=frozenset({"floor", "table", *slot_ids}),
        agent_location_labels=agent_locations,
        holdable_labels=holdable,
        conservation_labels=conservation_labels,
        conserved_vertex_labels=conserved,
        initial_state=initial,
        rules=(_walk_rule(agent_locations),
               _take_rule(holdable, agent_locations),
               _put_down_rule(holdable, agent_locations),
               _install_rule(slot_ids),
               connect))


BUILTIN_DOMAINS = {"mini": mini_bookshelf_domain, "bookshelf": bookshelf_domain}


def builtin_domain(name: str) -> Domain:
    try:
        return BUILTIN_DOMAINS[name]()
    except KeyError:
        raise ParseError(f"unknown built-in domain {name!r}; "
                         f"available: {sorted(BUILTIN_DOMAINS)}", name) from None


# -- trace generation ----------------------------------------------------------

def held_counts(domain: Domain, g: MultiHypergraph) -> dict[str, int]:
    out = {}
    for label in sorted(domain.holdable_labels):
        c = sum(g.edge_multiplicity(domain.holds_label, (domain.agent_id, v.id))
                for v in domain.vertices_with_label(label))
        if c:
            out[label] = c
    return out


def _pick_install_heavy(domain: Domain, g: MultiHypergraph, rng: random.Random,
                        options_by_rule: dict[str, list]) -> tuple[Rule, object]:
    """Greedy choice: install when possible, otherwise work toward installing."""
    def pick(rule_name, want=None):
        opts = options_by_rule.get(rule_name, [])
        if want is not None:
            opts = [m for m in opts if want(m)]
        if not opts:
            return None
        return domain.rule(rule_name), opts[rng.randrange(len(opts))]

    choice = pick("installEccentric")
    if choice:
        return choice
    have_sd = g.edge_multiplicity(domain.holds_label,
                                  (domain.agent_id, "screwdriver")) > 0
    at_table = agent_location(domain, g) == "table"
    if not at_table:
        choice = pick("walk", lambda m: m.get("Y") == "table")
        if choice:
            return choice
    if not have_sd:
        choice = pick("take", lambda m: m.get("I") == "screwdriver")
        if choice:
            return choice
    choice = pick("take", lambda m: m.get("I") == "eccentric")
    if choice:
        return choice
    applicable = [(r, m) for r in domain.rules
                  for m in options_by_rule.get(r.name, ())]
    return applicable[rng.randrange(len(applicable))]


def generate_trace(domain: Domain, seed: int, length: int,
                   corrupt_at: int | None = None, policy: str = "uniform"
                   ) -> tuple[list[AnnotationTuple], bool]:
    """Simulate the ground dynamics and record the annotation trace.

    ``policy`` is "uniform" (rules weighted by the action model, option
    uniform within the rule) or "install_heavy" (greedy assembly: acquire
    the screwdriver, then alternate taking and installing eccentrics).
    Returns the trace and whether it was truncated by a dead end.
    ``corrupt_at`` overwrites the held-count observation of that step with
    an impossible value, making the trace inconsistent exactly there.
    """
    if policy not in ("uniform", "install_heavy"):
        raise ValueError(f"unknown policy {policy!r}")
    rng = random.Random(seed)
    grounds = domain.initial_state.groundings()
    g = grounds[rng.randrange(len(grounds))]
    trace: list[AnnotationTuple] = []
    truncated = False
    for _ in range(length):
        options_by_rule = {}
        for rule in domain.rules:
            opts = ground_options(rule, g)
            if opts:
                options_by_rule[rule.name] = opts
        if not options_by_rule:
            truncated = True
            break
        if policy == "install_heavy":
            rule, match = _pick_install_heavy(domain, g, rng, options_by_rule)
        else:
            loc = agent_location(domain, g)
            names = sorted(options_by_rule)
            weights = [domain.action_model.rule_weight(n, loc) for n in names]
            if sum(weights) <= 0:
                truncated = True
                break
            name = rng.choices(names, weights=weights)[0]
            opts = options_by_rule[name]
            rule, match = domain.rule(name), opts[rng.randrange(len(opts))]
        loc_t = agent_location(domain, g)
        held_t = held_counts(domain, g)
        g2 = apply(rule, g, match)
        trace.append(AnnotationTuple(rule.name, loc_t,
                                     agent_location(domain, g2),
                                     held_t, held_counts(domain, g2)))
        g = g2
    if corrupt_at is not None and 0 <= corrupt_at < len(trace):
        t = trace[corrupt_at]
        bad_label = sorted(domain.holdable_labels)[0]
        trace[corrupt_at] = AnnotationTuple(t.action, t.loc_t, t.loc_next,
                                            t.held_t, {bad_label: 9999})
    return trace, truncated
