"""Exact recursive filtering over rewriting multi-hypergraph states.

States are labeled multi-hypergraphs; dynamics are rewriting rules applied
uniformly over their matches; partial observations arrive as per-step
annotations.  Beliefs are kept as weighted lifted states (bounded-interval
edge multiplicities under exact-total constraints), which stay exponentially
smaller than the underlying ground support while producing exactly the same
posteriors as ground enumeration.
"""

from .canon import CanonicalForm, canonical_form, pinned_form
from .errors import (EffectError, EngineError, EnumerationLimitError,
                     IntegrityError, InputError, ParseError, StructuralError,
                     TraceInconsistencyError)
from .filtering import (ActionModel, Belief, FilterResult, JointPrediction,
                        Particle, StepStats, agent_location, consistent,
                        filter_trace, predict, update)
from .graphs import (EdgeKey, Hyperedge, Label, MultiHypergraph, Vertex,
                     build_graph, edge_key, is_isomorphic)
from .lifted import (DEFAULT_MAX_GROUNDINGS, BoundedEdge,
                     LiftedMultiHypergraph, TotalConstraint,
                     canonical_form_lifted, contains, count_groundings,
                     groundings)
from .domain import (AnnotationTuple, Domain, bookshelf_domain, builtin_domain,
                     format_trace, generate_trace, held_counts,
                     mini_bookshelf_domain, parse_domain, parse_trace,
                     serialize_domain)
from .oracle import (ComparisonReport, GroundBelief, GroundFilterResult,
                     compare, expand, ground_filter_trace, total_variation)
from .rewrite import (Effect, EffectEdge, LiftedApplyResult, LiftedEffect,
                      Match, Pattern, PatternEdge, PatternVertex, Rule,
                      SlotTemplate, apply, find_matches, ground_options,
                      lifted_apply, successors)

__version__ = "0.1.0"

__all__ = [
    "ActionModel", "AnnotationTuple", "Belief", "BoundedEdge", "CanonicalForm",
    "ComparisonReport", "DEFAULT_MAX_GROUNDINGS", "Domain", "EdgeKey",
    "Effect", "EffectEdge", "EffectError", "EngineError",
    "EnumerationLimitError", "FilterResult", "GroundBelief",
    "GroundFilterResult", "Hyperedge",
    "InputError", "IntegrityError", "JointPrediction", "Label",
    "LiftedApplyResult", "LiftedEffect", "LiftedMultiHypergraph", "Match",
    "MultiHypergraph", "ParseError", "Particle", "Pattern", "PatternEdge",
    "PatternVertex", "Rule", "SlotTemplate", "StepStats", "StructuralError",
    "TotalConstraint", "TraceInconsistencyError", "Vertex", "agent_location",
    "apply", "bookshelf_domain", "build_graph", "builtin_domain",
    "canonical_form", "canonical_form_lifted", "compare", "consistent",
    "contains", "count_groundings", "edge_key", "expand", "filter_trace",
    "find_matches", "format_trace", "generate_trace", "ground_filter_trace",
    "ground_options", "groundings", "held_counts", "is_isomorphic",
    "lifted_apply", "mini_bookshelf_domain", "parse_domain", "parse_trace",
    "pinned_form", "predict", "serialize_domain", "successors",
    "total_variation", "update", "__version__",
]
