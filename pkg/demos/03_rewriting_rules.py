"""Rewriting rules: ground application and its exact lifted counterpart.

A rule is a pattern (what must be present), an effect (edges retracted and
asserted), and optionally a lifted effect that places one new edge into an
unknown slot.  Applying a rule to a lifted state must give the same output
distribution as grounding first and applying to every ground state, and
this script checks that numerically on a small install step.
"""

from collections import defaultdict

from mhgfilter import (Effect, EffectEdge, Hyperedge, LiftedEffect,
                       LiftedMultiHypergraph, Pattern, PatternEdge,
                       PatternVertex, Rule, SlotTemplate, Vertex, build_graph,
                       expand, find_matches, ground_options, lifted_apply,
                       successors, total_variation)


def install_rule(slot_ids):
    """Retract a held screw and assert it installed in some free slot."""
    return Rule(
        "install",
        Pattern((PatternVertex("A", "agent"), PatternVertex("E", "screw")),
                (PatternEdge("holds", ("A", "E")),)),
        Effect(retract=(EffectEdge("holds", ("A", "E")),)),
        LiftedEffect("installed",
                     tuple(SlotTemplate("at", ("E", s)) for s in slot_ids)))


def workbench():
    return build_graph(
        [Vertex("agent", "agent"), Vertex("e", "screw", 2),
         Vertex("s1", "slot"), Vertex("s2", "slot"), Vertex("s3", "slot")],
        [Hyperedge("holds", ("agent", "e"), 2)],
        conservation_labels=("holds", "at"),
        conserved_vertex_labels=("screw",))


def main():
    rule = install_rule(["s1", "s2", "s3"])
    g = workbench()

    matches = find_matches(rule, g)
    print("pattern matches:", len(matches))
    for m in matches:
        print("  assignment:", m.as_dict())

    # Ground options multiply each match by its free slots.  All three
    # slots are empty and interchangeable, so the uniform choice over the
    # three options collapses to a single successor after merging.
    options = ground_options(rule, g)
    print("\nground options:", len(options))
    succ = successors(rule, g)
    print("distinct successors after canonical merge:")
    for out, p in succ:
        installed = sum(e.multiplicity for e in out.edges if e.label == "at")
        print(f"  p={p:.4f} installed={installed}")

    # The same step on a lifted state.  Start from the output of one
    # unobserved install: one screw somewhere among the three slots.
    l1 = lifted_apply(rule, LiftedMultiHypergraph.from_graph(g))
    assert l1.n_applicable == l1.n_groundings == 1
    state_after_one = l1.outputs[0][0]
    print("\nafter one unobserved install:")
    for b in state_after_one.bounded_edges:
        print(f"  {b.label}{b.incidence} in [{b.lower}, {b.upper}]")
    print("  ground support:", state_after_one.count_groundings())

    # Apply the rule again, now to a genuinely uncertain state.
    l2 = lifted_apply(rule, state_after_one)
    print("\nsecond application:")
    print("  applicable groundings:", l2.n_applicable, "of", l2.n_groundings)
    print("  lifted outputs:", len(l2.outputs))

    # Brute-force oracle: expand, push every grounding through the ground
    # semantics, and compare the two distributions over canonical forms.
    brute = defaultdict(float)
    for ground, w in expand(state_after_one):
        for out, p in successors(rule, ground):
            brute[out.canonical_form().data] += w * p
    lifted_dist = defaultdict(float)
    for out, p in l2.outputs:
        for ground, w in expand(out):
            lifted_dist[ground.canonical_form().data] += p * w
    tv = total_variation(dict(brute), dict(lifted_dist))
    print("  total variation vs ground enumeration:", tv)
    assert tv < 1e-12


if __name__ == "__main__":
    main()
