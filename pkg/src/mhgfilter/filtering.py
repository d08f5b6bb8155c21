"""Recursive filtering over lifted multi-hypergraph beliefs.

A belief is a finite weighted mixture of lifted states, each denoting a
uniform distribution over its groundings; weights sum to one.  Filtering
alternates prediction (push the belief through the rule dynamics under an
action model) and update (condition on an observed annotation: the action
name, the agent's location before and after, and the held-item counts before
and after; every component is observed exactly or not at all, so observation
factors are counting fractions rather than noisy likelihoods).

Exactness contract: prediction splits a belief entry into its groundings
whenever some rule is applicable in only part of them, so each surviving
entry has a grounding-independent applicable-rule set; conditioning either
keeps a particle whole (0/1 factor), tightens one bounded interval (exact
fractional factor, successors recomputed from the tightened predecessor), or
falls back to enumeration.  Entries left without any applicable rule are
dropped with a warning and the remaining mass is renormalised.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence, Union

from .errors import IntegrityError, TraceInconsistencyError
from .graphs import EdgeKey, MultiHypergraph, edge_key
from .lifted import DEFAULT_MAX_GROUNDINGS, BoundedEdge, LiftedMultiHypergraph
from .rewrite import Rule, lifted_apply

logger = logging.getLogger("mhgfilter")

State = Union[MultiHypergraph, LiftedMultiHypergraph]

__all__ = ["ActionModel", "Belief", "Particle", "JointPrediction", "StepStats",
           "FilterResult", "agent_location", "consistent", "predict", "update",
           "filter_trace"]


@dataclass(frozen=True)
class ActionModel:
    """Rule choice probabilities, optionally conditioned on agent location.

    Every rule gets base weight 1, overridden by ``weights`` and then by the
    ``by_location`` table for the agent's current location.  Probabilities
    are normalised over the applicable rules of the concrete state, so an
    inapplicable rule never receives mass.
    """

    weights: Mapping[str, float] = field(default_factory=dict)
    by_location: Mapping[str, Mapping[str, float]] = field(default_factory=dict)

    def rule_weight(self, rule_name: str, location: str | None) -> float:
        w = self.weights.get(rule_name, 1.0)
        if location is not None and location in self.by_location:
            w = self.by_location[location].get(rule_name, w)
        if w < 0:
            raise IntegrityError(f"negative action weight for {rule_name!r}")
        return w


class Belief:
    """Weighted mixture of non-empty lifted states, merged by canonical form.

    Weights are normalised on construction; an all-zero or empty mixture is
    rejected.
    """

    __slots__ = ("entries",)

    def __init__(self, entries: Iterable[tuple[LiftedMultiHypergraph, float]]):
        merged: dict[bytes, tuple[LiftedMultiHypergraph, float]] = {}
        for state, w in entries:
            if w < 0:
                raise IntegrityError("negative belief weight")
            if w == 0:
                continue
            if state.is_empty:
                raise IntegrityError("belief entry with empty support")
            key = state.canonical_form().data
            if key in merged:
                merged[key] = (merged[key][0], merged[key][1] + w)
            else:
                merged[key] = (state, w)
        total = sum(w for _, w in merged.values())
        if not merged or total <= 0:
            raise IntegrityError("belief has no mass")
        self.entries = tuple((s, w / total) for _, (s, w) in sorted(merged.items()))

    @classmethod
    def from_state(cls, state: LiftedMultiHypergraph) -> "Belief":
        return cls([(state, 1.0)])

    @classmethod
    def from_graph(cls, g: MultiHypergraph) -> "Belief":
        return cls([(LiftedMultiHypergraph.from_graph(g), 1.0)])

    def total_weight(self) -> float:
        return sum(w for _, w in self.entries)

    def ground_count(self) -> int:
        return sum(s.count_groundings() for s, _ in self.entries)

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __repr__(self):
        return f"Belief({len(self.entries)} entries, {self.ground_count()} groundings)"


@dataclass(frozen=True)
class Particle:
    """One predecessor hypothesis with one rule and its successor distribution.

    ``weight`` is the joint mass of (predecessor, rule); the successor
    distribution ``outputs`` sums to one within the particle.  Keeping the
    successors attached lets the update recompute them exactly when the
    predecessor gets tightened by the observation.
    """

    prev: LiftedMultiHypergraph
    rule: Rule
    weight: float
    outputs: tuple[tuple[LiftedMultiHypergraph, float], ...]


@dataclass(frozen=True)
class JointPrediction:
    """Joint distribution over (predecessor, rule, successor) triples."""

    particles: tuple[Particle, ...]
    dropped_mass: float = 0.0

    def total_weight(self) -> float:
        return sum(p.weight for p in self.particles)


@dataclass(frozen=True)
class StepStats:
    step: int
    action: str | None
    lifted_count: int
    ground_count: int
    log_z: float
    mode: str
    dropped_mass: float = 0.0

    def to_dict(self) -> dict:
        return {"step": self.step, "action": self.action,
                "lifted_count": self.lifted_count,
                "ground_count": self.ground_count,
                "log_z": self.log_z, "mode": self.mode,
                "dropped_mass": self.dropped_mass}


@dataclass(frozen=True)
class FilterResult:
    beliefs: tuple[Belief, ...]
    stats: tuple[StepStats, ...]
    log_likelihood: float
    warnings: tuple[str, ...] = ()


# -- observation schema --------------------------------------------------------

def agent_location(domain, state: State) -> str | None:
    """The agent's location vertex id, or None when not uniquely fixed."""
    if isinstance(state, MultiHypergraph):
        items = state.edge_dict().items()
    else:
        items = state._fixed_mult.items()
    found = None
    for (label, incidence), mult in items:
        if label != domain.at_label or domain.agent_id not in incidence:
            continue
        others = [v for v in incidence if v != domain.agent_id]
        if len(incidence) != 2 or mult != 1 or found is not None:
            return None
        found = others[0]
    return found


def _conditions(domain, loc: str, held: Mapping[str, int]
                ) -> list[tuple[tuple[EdgeKey, ...], int]]:
    """Exact-count conditions (key set, required total) for one observation side."""
    conds = [((edge_key(domain.at_label, (domain.agent_id, loc)),), 1)]
    for label in sorted(domain.holdable_labels):
        keys = tuple(edge_key(domain.holds_label, (domain.agent_id, v.id))
                     for v in domain.vertices_with_label(label))
        conds.append((keys, int(held.get(label, 0))))
    for label in sorted(held):
        if label not in domain.holdable_labels:
            conds.append(((), int(held[label])))  # unknown label: only 0 satisfiable
    return conds


def _ground_consistent(domain, g: MultiHypergraph, loc: str,
                       held: Mapping[str, int]) -> bool:
    if not g.has_vertex(loc):
        return False
    for keys, required in _conditions(domain, loc, held):
        if sum(g.edge_multiplicity(*k) for k in keys) != required:
            return False
    return True


def _condition_state(domain, l: LiftedMultiHypergraph, loc: str,
                     held: Mapping[str, int],
                     max_groundings: int = DEFAULT_MAX_GROUNDINGS
                     ) -> tuple[float, list[tuple[LiftedMultiHypergraph, float]], bool]:
    """Condition a lifted state on one observation side.

    Returns (fraction of groundings that are consistent, replacement states
    with relative weights summing to one, changed flag).  Fixed edges give
    0/1 verdicts; a single bounded key gives an exact interval tightening;
    anything else is resolved by enumeration.
    """
    if loc not in l._by_id:
        return 0.0, [], True
    work = l
    frac = 1.0
    deferred: list[tuple[tuple[EdgeKey, ...], int]] = []
    changed = False
    for keys, required in _conditions(domain, loc, held):
        fixed_sum = sum(work._fixed_mult.get(k, 0)
                        for k in keys if k not in work._bounded_by_key)
        bounded = [k for k in keys if k in work._bounded_by_key]
        if not bounded:
            if fixed_sum != required:
                return 0.0, [], True
        elif len(bounded) == 1:
            k = bounded[0]
            b = work._bounded_by_key[k]
            v = required - fixed_sum
            if v < b.lower or v > b.upper:
                return 0.0, [], True
            if (v, v) != (b.lower, b.upper):
                before = work.count_groundings()
                new_bounds = [bb if bb.key != k else
                              BoundedEdge(bb.label, bb.incidence, v, v)
                              for bb in work.bounded_edges]
                tightened = work.rebuild(bounded=new_bounds)
                if tightened.is_empty:
                    return 0.0, [], True
                frac *= tightened.count_groundings() / before
                work = tightened
                changed = True
        else:
            deferred.append((keys, required))
    if deferred:
        survivors: dict[bytes, tuple[MultiHypergraph, int]] = {}
        total = 0
        for g in work.iter_groundings(max_groundings):
            total += 1
            if all(sum(g.edge_multiplicity(*k) for k in keys) == required
                   for keys, required in deferred):
                key = g.canonical_form().data
                if key in survivors:
                    survivors[key] = (survivors[key][0], survivors[key][1] + 1)
                else:
                    survivors[key] = (g, 1)
        kept = sum(c for _, c in survivors.values())
        if kept == 0:
            return 0.0, [], True
        frac *= kept / total
        states = [(LiftedMultiHypergraph.from_graph(g), c / kept)
                  for _, (g, c) in sorted(survivors.items())]
        return frac, states, True
    return frac, [(work, 1.0)], changed


def consistent(domain, annotation, x_t: State, rule: Rule, x_next: State) -> bool:
    """Whether the annotation can co-occur with the transition.

    Ground states give the exact 0/1 answer; lifted states answer whether
    any grounding pair is consistent.
    """
    if rule.name != annotation.action:
        return False

    def side(state: State, loc: str, held: Mapping[str, int]) -> bool:
        if isinstance(state, MultiHypergraph):
            return _ground_consistent(domain, state, loc, held)
        frac, _, _ = _condition_state(domain, state, loc, held)
        return frac > 0

    return (side(x_t, annotation.loc_t, annotation.held_t)
            and side(x_next, annotation.loc_next, annotation.held_next))


# -- prediction ----------------------------------------------------------------

def predict(domain, belief: Belief,
            max_groundings: int = DEFAULT_MAX_GROUNDINGS) -> JointPrediction:
    """Push the belief through one step of the rule dynamics.

    Entries whose groundings disagree on some rule's applicability are split
    into grounding singletons first, so every particle's rule probability is
    well defined.  Entries with no applicable rule at all are dropped (dead
    ends) and the prediction is renormalised.
    """
    queue: list[tuple[LiftedMultiHypergraph, float]] = list(belief.entries)
    particles: list[Particle] = []
    dropped = 0.0
    while queue:
        state, w = queue.pop()
        results = []
        split = False
        for rule in domain.rules:
            r = lifted_apply(rule, state, max_groundings)
            if 0 < r.n_applicable < r.n_groundings:
                split = True
                break
            results.append((rule, r))
        if split:
            n = state.count_groundings()
            for g in state.iter_groundings(max_groundings):
                queue.append((LiftedMultiHypergraph.from_graph(g), w / n))
            continue
        loc = agent_location(domain, state)
        applicable = [(rule, r) for rule, r in results if r.n_applicable > 0]
        if not applicable:
            logger.warning("dead end: no applicable rule; dropping %g belief mass", w)
            dropped += w
            continue
        weights = [domain.action_model.rule_weight(rule.name, loc)
                   for rule, _ in applicable]
        total_w = sum(weights)
        if total_w <= 0:
            logger.warning("dead end: zero action mass; dropping %g belief mass", w)
            dropped += w
            continue
        for (rule, r), rw in zip(applicable, weights):
            if rw == 0:
                continue
            particles.append(Particle(state, rule, w * rw / total_w, r.outputs))
    if not particles:
        return JointPrediction((), dropped)
    scale = 1.0 / sum(p.weight for p in particles)
    particles = [Particle(p.prev, p.rule, p.weight * scale, p.outputs)
                 for p in particles]
    particles.sort(key=lambda p: (p.rule.name, p.prev.canonical_form().data))
    return JointPrediction(tuple(particles), dropped)


# -- update --------------------------------------------------------------------

def update(domain, annotation, joint: JointPrediction, step: int = 0,
           max_groundings: int = DEFAULT_MAX_GROUNDINGS
           ) -> tuple[Belief, float]:
    """Condition the joint prediction on one annotation.

    Returns the posterior belief over the successor state and the step
    evidence Z; raises when no mass survives.
    """
    posterior: dict[bytes, tuple[LiftedMultiHypergraph, float]] = {}
    z = 0.0
    for p in joint.particles:
        if p.rule.name != annotation.action:
            continue
        f_prev, prevs, changed = _condition_state(
            domain, p.prev, annotation.loc_t, annotation.held_t, max_groundings)
        if f_prev == 0.0:
            continue
        if not changed:
            branches = [(p.outputs, 1.0)]
        else:
            branches = []
            for tight, rel in prevs:
                r = lifted_apply(p.rule, tight, max_groundings)
                if r.n_applicable == 0:
                    continue
                # applicability is grounding-independent on the particle's
                # predecessor, hence also on any subset of its groundings
                branches.append((r.outputs, rel))
        for outputs, rel in branches:
            for succ, prob in outputs:
                f_next, nexts, _ = _condition_state(
                    domain, succ, annotation.loc_next, annotation.held_next,
                    max_groundings)
                if f_next == 0.0:
                    continue
                base = p.weight * f_prev * rel * prob * f_next
                for out, out_rel in nexts:
                    mass = base * out_rel
                    if mass == 0.0:
                        continue
                    key = out.canonical_form().data
                    if key in posterior:
                        posterior[key] = (posterior[key][0], posterior[key][1] + mass)
                    else:
                        posterior[key] = (out, mass)
                z += base
    if z <= 0.0 or not posterior:
        raise TraceInconsistencyError(step, annotation.action)
    return Belief(posterior.values()), z


# -- trace filtering -----------------------------------------------------------

def filter_trace(domain, trace: Sequence, initial: Belief | None = None,
                 max_groundings: int = DEFAULT_MAX_GROUNDINGS) -> FilterResult:
    """Run the filter over a whole annotation trace.

    Produces one belief per prefix (index 0 is the initial belief) and one
    stats record per step; the log likelihood accumulates log Z over steps.
    Raises TraceInconsistencyError with the offending step index when an
    annotation kills all mass.
    """
    belief = initial if initial is not None else Belief.from_state(domain.initial_state)
    beliefs = [belief]
    stats = [StepStats(0, None, len(belief), belief.ground_count(), 0.0, "lifted")]
    warnings: list[str] = []
    log_likelihood = 0.0
    for i, annotation in enumerate(trace):
        joint = predict(domain, belief, max_groundings)
        if joint.dropped_mass:
            warnings.append(f"step {i}: dropped {joint.dropped_mass:g} dead-end mass")
        if not joint.particles:
            raise TraceInconsistencyError(i, annotation.action)
        belief, z = update(domain, annotation, joint, step=i,
                           max_groundings=max_groundings)
        log_likelihood += math.log(z)
        beliefs.append(belief)
        stats.append(StepStats(i + 1, annotation.action, len(belief),
                               belief.ground_count(), math.log(z), "lifted",
                               joint.dropped_mass))
    return FilterResult(tuple(beliefs), tuple(stats), log_likelihood,
                        tuple(warnings))
