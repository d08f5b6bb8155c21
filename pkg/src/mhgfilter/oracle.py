"""Ground-enumeration reference filter.

This is the second, independent route to the same posterior: expand every
belief into explicit ground states, push each through the rule options
directly, and condition with exact 0/1 checks.  It shares no probability
arithmetic with the lifted filter (no interval tightening, no bound
shifting), which is what makes agreement between the two a meaningful
correctness check.  It is exponential in the number of unknowns and only
suitable for small scenes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import IntegrityError, TraceInconsistencyError
from .filtering import (Belief, FilterResult, StepStats, _ground_consistent,
                        agent_location, logger)
from .graphs import MultiHypergraph
from .lifted import DEFAULT_MAX_GROUNDINGS, LiftedMultiHypergraph
from .rewrite import Rule, successors

__all__ = ["expand", "GroundBelief", "GroundFilterResult", "ground_filter_trace",
           "compare", "ComparisonReport", "total_variation"]


def expand(l: LiftedMultiHypergraph,
           max_groundings: int = DEFAULT_MAX_GROUNDINGS
           ) -> list[tuple[MultiHypergraph, float]]:
    """Uniform distribution over the groundings, merged by canonical form."""
    merged: dict[bytes, tuple[MultiHypergraph, int]] = {}
    n = 0
    for g in l.iter_groundings(max_groundings):
        n += 1
        key = g.canonical_form().data
        if key in merged:
            merged[key] = (merged[key][0], merged[key][1] + 1)
        else:
            merged[key] = (g, 1)
    return [(g, c / n) for _, (g, c) in sorted(merged.items())]


class GroundBelief:
    """Normalised weighted set of ground states, merged by canonical form."""

    __slots__ = ("entries",)

    def __init__(self, entries: Iterable[tuple[MultiHypergraph, float]]):
        merged: dict[bytes, tuple[MultiHypergraph, float]] = {}
        for g, w in entries:
            if w <= 0:
                continue
            key = g.canonical_form().data
            if key in merged:
                merged[key] = (merged[key][0], merged[key][1] + w)
            else:
                merged[key] = (g, w)
        total = sum(w for _, w in merged.values())
        if not merged or total <= 0:
            raise IntegrityError("ground belief has no mass")
        self.entries = tuple((g, w / total) for _, (g, w) in sorted(merged.items()))

    @classmethod
    def from_belief(cls, belief: Belief,
                    max_groundings: int = DEFAULT_MAX_GROUNDINGS) -> "GroundBelief":
        out = []
        for l, w in belief.entries:
            for g, p in expand(l, max_groundings):
                out.append((g, w * p))
        return cls(out)

    def as_dict(self) -> dict[bytes, float]:
        return {g.canonical_form().data: w for g, w in self.entries}

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)


@dataclass(frozen=True)
class GroundFilterResult:
    beliefs: tuple[GroundBelief, ...]
    stats: tuple[StepStats, ...]
    log_likelihood: float
    warnings: tuple[str, ...] = ()


def ground_filter_trace(domain, trace: Sequence,
                        initial: GroundBelief | None = None,
                        max_groundings: int = DEFAULT_MAX_GROUNDINGS
                        ) -> GroundFilterResult:
    """Filter a trace entirely in ground space (the reference semantics)."""
    if initial is None:
        initial = GroundBelief(expand(domain.initial_state, max_groundings))
    belief = initial
    beliefs = [belief]
    stats = [StepStats(0, None, len(belief), len(belief), 0.0, "ground")]
    warnings: list[str] = []
    log_likelihood = 0.0
    succ_cache: dict[tuple[str, bytes], list[tuple[MultiHypergraph, float]]] = {}

    def rule_successors(rule: Rule, g: MultiHypergraph):
        key = (rule.name, g.canonical_form().data)
        if key not in succ_cache:
            succ_cache[key] = successors(rule, g)
        return succ_cache[key]

    for i, annotation in enumerate(trace):
        # predict
        particles: list[tuple[MultiHypergraph, Rule, float,
                              list[tuple[MultiHypergraph, float]]]] = []
        dropped = 0.0
        for g, w in belief.entries:
            per_rule = [(rule, rule_successors(rule, g)) for rule in domain.rules]
            applicable = [(rule, outs) for rule, outs in per_rule if outs]
            if not applicable:
                logger.warning(
                    "ground dead end: no applicable rule; dropping %g mass", w)
                dropped += w
                continue
            loc = agent_location(domain, g)
            rws = [domain.action_model.rule_weight(rule.name, loc)
                   for rule, _ in applicable]
            total_w = sum(rws)
            if total_w <= 0:
                dropped += w
                continue
            for (rule, outs), rw in zip(applicable, rws):
                if rw:
                    particles.append((g, rule, w * rw / total_w, outs))
        if dropped:
            warnings.append(f"step {i}: dropped {dropped:g} dead-end mass")
        total = sum(w for _, _, w, _ in particles)
        if total <= 0:
            raise TraceInconsistencyError(i, annotation.action)
        # update
        posterior: dict[bytes, tuple[MultiHypergraph, float]] = {}
        z = 0.0
        for g, rule, w, outs in particles:
            w /= total
            if rule.name != annotation.action:
                continue
            if not _ground_consistent(domain, g, annotation.loc_t,
                                      annotation.held_t):
                continue
            for h, p in outs:
                if not _ground_consistent(domain, h, annotation.loc_next,
                                          annotation.held_next):
                    continue
                mass = w * p
                key = h.canonical_form().data
                if key in posterior:
                    posterior[key] = (posterior[key][0], posterior[key][1] + mass)
                else:
                    posterior[key] = (h, mass)
                z += mass
        if z <= 0 or not posterior:
            raise TraceInconsistencyError(i, annotation.action)
        belief = GroundBelief(posterior.values())
        log_likelihood += math.log(z)
        beliefs.append(belief)
        stats.append(StepStats(i + 1, annotation.action, len(belief), len(belief),
                               math.log(z), "ground", dropped))
    return GroundFilterResult(tuple(beliefs), tuple(stats), log_likelihood,
                              tuple(warnings))


@dataclass(frozen=True)
class ComparisonReport:
    per_step_tv: tuple[float, ...]
    max_tv: float
    log_likelihood_lifted: float
    log_likelihood_ground: float
    tolerance: float

    @property
    def log_likelihood_gap(self) -> float:
        return abs(self.log_likelihood_lifted - self.log_likelihood_ground)

    @property
    def divergent(self) -> bool:
        return (self.max_tv > self.tolerance
                or self.log_likelihood_gap > self.tolerance)


def total_variation(p: dict[bytes, float], q: dict[bytes, float]) -> float:
    keys = set(p) | set(q)
    return 0.5 * sum(abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in keys)


def compare(domain, trace: Sequence,
            max_groundings: int = DEFAULT_MAX_GROUNDINGS,
            tolerance: float = 1e-9) -> ComparisonReport:
    """Run both filters over the trace and report per-step belief distance."""
    from .filtering import filter_trace
    lifted = filter_trace(domain, trace, max_groundings=max_groundings)
    ground = ground_filter_trace(domain, trace, max_groundings=max_groundings)
    tvs = []
    for lb, gb in zip(lifted.beliefs, ground.beliefs):
        tvs.append(total_variation(
            GroundBelief.from_belief(lb, max_groundings).as_dict(),
            gb.as_dict()))
    return ComparisonReport(tuple(tvs), max(tvs), lifted.log_likelihood,
                            ground.log_likelihood, tolerance)
