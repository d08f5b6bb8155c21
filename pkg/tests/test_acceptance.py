"""End-to-end acceptance suite.

Each test pins one externally promised behaviour of the package, with
tolerances and time budgets stated inline.  Everything here goes through
public entry points only; module-level details are covered by the unit
tests next door.
"""

from __future__ import annotations

import itertools
import json
import math
import random
import time

import pytest

from mhgfilter import (ActionModel, AnnotationTuple, BoundedEdge, Domain,
                       Effect, EffectEdge, Hyperedge, LiftedEffect,
                       LiftedMultiHypergraph, Pattern, PatternEdge,
                       PatternVertex, Rule, SlotTemplate, TotalConstraint,
                       TraceInconsistencyError, Vertex, bookshelf_domain,
                       compare, expand, filter_trace, generate_trace,
                       is_isomorphic, lifted_apply, mini_bookshelf_domain,
                       predict)
from mhgfilter.cli import main
from oracles import (brute_isomorphic, ground_pushforward,
                     lifted_distribution, random_graph, relabel, tv_distance)


def test_lifted_filter_matches_ground_enumeration_on_mini_traces():
    """20 seeded mini traces of length 20: per-step total variation between
    the lifted and the ground-enumeration posterior stays below 1e-9, the
    log likelihoods agree to 1e-9, and the whole sweep finishes in 30s."""
    domain = mini_bookshelf_domain()
    started = time.perf_counter()
    for seed in range(20):
        trace, _ = generate_trace(domain, seed=seed, length=20)
        report = compare(domain, trace)
        assert report.max_tv <= 1e-9, f"seed {seed}: tv {report.max_tv}"
        assert report.log_likelihood_gap <= 1e-9, f"seed {seed}"
        assert not report.divergent
    assert time.perf_counter() - started < 30.0


def test_interval_state_expands_to_uniform_thirds():
    """Bounds [0,2] and [0,4] under an exact total of 4 leave exactly the
    splits (0,4), (1,3), (2,2), each carrying probability 1/3."""
    state = LiftedMultiHypergraph(
        [Vertex("e", "screw", 4), Vertex("s1", "slot_a"), Vertex("s2", "slot_b")],
        [],
        [BoundedEdge("at", ("e", "s1"), 0, 2),
         BoundedEdge("at", ("e", "s2"), 0, 4)],
        [TotalConstraint("pile", frozenset({("at", ("e", "s1")),
                                            ("at", ("e", "s2"))}), 4)])
    entries = expand(state)
    assert len(entries) == 3
    for g, w in entries:
        assert abs(w - 1 / 3) <= 1e-12
    splits = sorted((g.edge_multiplicity("at", ("e", "s1")),
                     g.edge_multiplicity("at", ("e", "s2"))) for g, _ in entries)
    assert splits == [(0, 4), (1, 3), (2, 2)]


def five_slot_domain() -> Domain:
    slot_ids = tuple(f"s{i}" for i in range(1, 6))
    vertices = [Vertex("agent", "agent"), Vertex("table", "table"),
                Vertex("e", "eccentric", 2)]
    vertices += [Vertex(s, f"slot_{s}") for s in slot_ids]
    initial = LiftedMultiHypergraph(
        vertices,
        [Hyperedge("at", ("agent", "table")), Hyperedge("holds", ("agent", "e"), 2)],
        (), (), frozenset({"at", "holds"}), frozenset({"eccentric"}))
    install = Rule(
        "install",
        Pattern((PatternVertex("A", "agent"), PatternVertex("E", "eccentric")),
                (PatternEdge("holds", ("A", "E")),)),
        Effect(retract=(EffectEdge("holds", ("A", "E")),)),
        LiftedEffect("installed",
                     tuple(SlotTemplate("at", ("E", s)) for s in slot_ids)))
    return Domain(name="five_slots", agent_id="agent",
                  location_labels=frozenset({"table"}),
                  agent_location_labels=frozenset({"table"}),
                  holdable_labels=frozenset({"eccentric"}),
                  conservation_labels=frozenset({"at", "holds"}),
                  conserved_vertex_labels=frozenset({"eccentric"}),
                  initial_state=initial, rules=(install,),
                  action_model=ActionModel())


def test_two_unknown_installs_stay_one_lifted_state():
    """Two screws installed into five distinctly labelled slots without
    observing where: the posterior keeps a single lifted state whose support
    is exactly the C(5,2) = 10 placements."""
    domain = five_slot_domain()
    trace = [AnnotationTuple("install", "table", "table",
                             {"eccentric": 2}, {"eccentric": 1}),
             AnnotationTuple("install", "table", "table",
                             {"eccentric": 1}, {"eccentric": 0})]
    result = filter_trace(domain, trace)
    posterior = result.beliefs[-1]
    assert len(posterior) == 1
    state, weight = posterior.entries[0]
    assert weight == 1.0
    assert state.count_groundings() == math.comb(5, 2)
    entries = expand(state)
    assert len(entries) == math.comb(5, 2)
    occupied = sorted(
        tuple(sorted(s for s in ("s1", "s2", "s3", "s4", "s5")
                     if g.edge_multiplicity("at", ("e", s)) == 1))
        for g, _ in entries)
    assert occupied == sorted(itertools.combinations(
        ("s1", "s2", "s3", "s4", "s5"), 2))


def test_full_bookshelf_stays_compressed(tmp_path, capsys):
    """A 40-step assembly-heavy bookshelf trace filters in under 60s with at
    most 5 lifted states per step while covering over 10^3 ground states."""
    trace_path = tmp_path / "assembly.jsonl"
    report_path = tmp_path / "report.json"
    started = time.perf_counter()
    assert main(["gentrace", "--domain", "bookshelf", "--policy",
                 "install_heavy", "--seed", "11", "--length", "40",
                 "--output", str(trace_path)]) == 0
    assert main(["filter", "--domain", "bookshelf", "--trace", str(trace_path),
                 "--output", str(report_path)]) == 0
    elapsed = time.perf_counter() - started
    capsys.readouterr()
    report = json.loads(report_path.read_text())
    assert report["consistent"] is True
    assert report["totals"]["steps"] == 40
    assert report["totals"]["max_lifted"] <= 5
    assert report["totals"]["max_ground_equivalent"] > 10 ** 3
    assert report["totals"]["compression_ratio"] > 200
    assert elapsed < 60.0


def test_corrupted_traces_are_rejected_at_the_corrupted_step():
    """50 seeded mini traces filter cleanly; corrupting the held counts of a
    random step makes the filter fail at exactly that step, every time."""
    domain = mini_bookshelf_domain()
    rng = random.Random(17)
    detected = 0
    for seed in range(50):
        length = 10
        clean, _ = generate_trace(domain, seed=seed, length=length)
        filter_trace(domain, clean)  # must not raise
        k = rng.randrange(len(clean))
        corrupted, _ = generate_trace(domain, seed=seed, length=length,
                                      corrupt_at=k)
        with pytest.raises(TraceInconsistencyError) as exc:
            filter_trace(domain, corrupted)
        assert exc.value.step == k
        detected += 1
    assert detected == 50


def test_canonical_forms_are_isomorphism_invariants():
    """1000 random states keep their canonical bytes under vertex renaming,
    and canonical equality decides isomorphism exactly as the brute-force
    bijection search does on random pairs."""
    rng = random.Random(20260814)
    for _ in range(1000):
        g = random_graph(rng)
        assert relabel(g, rng).canonical_form() == g.canonical_form()
    agreements = 0
    for _ in range(300):
        g1 = random_graph(rng, n_vertices=rng.randrange(2, 7), n_edges=5)
        if rng.random() < 0.5:
            g2 = relabel(g1, rng)
        else:
            g2 = random_graph(rng, n_vertices=rng.randrange(2, 7), n_edges=5)
        assert is_isomorphic(g1, g2) == brute_isomorphic(g1, g2)
        agreements += 1
    assert agreements == 300


def harvest_states(domain, trace, found, max_count):
    """Collect posterior states and predicted successors along one trace."""
    result = filter_trace(domain, trace)
    for belief in result.beliefs:
        assert abs(belief.total_weight() - 1.0) <= 1e-12
        for state, _ in belief.entries:
            if state.count_groundings() <= max_count:
                found.setdefault(state.canonical_form().data, (domain, state))
        joint = predict(domain, belief)
        for p in joint.particles:
            for succ, _ in p.outputs:
                if succ.count_groundings() <= max_count:
                    found.setdefault(succ.canonical_form().data, (domain, succ))


def reachable_lifted_states():
    """Lifted states met while filtering generated traces: posteriors plus
    one-step predictions, deduplicated by canonical form.  Bookshelf states
    are subsampled to keep the brute-force comparison affordable."""
    mini_found: dict[bytes, tuple] = {}
    mini = mini_bookshelf_domain()
    for seed in range(8):
        for policy in ("uniform", "install_heavy"):
            trace, _ = generate_trace(mini, seed=seed, length=14, policy=policy)
            harvest_states(mini, trace, mini_found, 10 ** 6)
    book_found: dict[bytes, tuple] = {}
    book = bookshelf_domain()
    trace, _ = generate_trace(book, seed=0, length=8, policy="install_heavy")
    harvest_states(book, trace, book_found, 200)
    states = [mini_found[k] for k in sorted(mini_found)]
    states += [book_found[k] for k in sorted(book_found)][::5]
    return states


def test_lifted_application_commutes_with_grounding():
    """On at least 100 reachable lifted states, pushing the uniform grounding
    distribution through every rule agrees with the lifted application to
    1e-9 total variation, with identical applicability counts."""
    states = reachable_lifted_states()
    assert len(states) >= 100
    checked = 0
    for domain, state in states:
        for rule in domain.rules:
            dist, n_app, n_tot = ground_pushforward(rule, state)
            res = lifted_apply(rule, state)
            assert (res.n_applicable > 0) == (n_app > 0)
            if n_app == 0:
                continue
            assert (res.n_applicable, res.n_groundings) == (n_app, n_tot)
            assert tv_distance(lifted_distribution(res.outputs), dist) <= 1e-9
            checked += 1
    assert checked >= 100
