"""Dependency graph construction, reachability, and ordering.

The reachability and ordering operations are checked against brute-force
oracles on small random graphs: direct subset inclusion per node, and full
enumeration of valid topological orders.
"""

from __future__ import annotations

import itertools
import random
import textwrap

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_graph
from pdlagent.pdl import (
    CycleError,
    DependencyGraph,
    PdlDocument,
    UnknownNodeError,
    accessible_nodes,
    build_dependency_graph,
    parse_pdl,
    topological_order,
)


# -- oracles -----------------------------------------------------------------


def brute_force_accessible(graph: DependencyGraph, executed: set[str]):
    """Direct subset test per node, independent of accessible_nodes."""
    accessible = set()
    blocked = {}
    for node in graph.nodes:
        unmet = {pre for pre in graph.edges.get(node, frozenset()) if pre not in executed}
        if unmet:
            blocked[node] = unmet
        else:
            accessible.add(node)
    return accessible, blocked


def all_topological_orders(graph: DependencyGraph):
    """Every permutation that respects all precondition edges (small graphs only)."""
    nodes = sorted(graph.nodes)
    valid = []
    for perm in itertools.permutations(nodes):
        position = {name: i for i, name in enumerate(perm)}
        if all(
            position[pre] < position[node]
            for node in nodes
            for pre in graph.edges.get(node, frozenset())
        ):
            valid.append(list(perm))
    return valid


# -- construction ------------------------------------------------------------


def test_hospital_graph_edges(hospital_bundle):
    graph = hospital_bundle.graph
    assert graph.preconditions("register_hospital") == frozenset({"query_appointment"})
    assert graph.preconditions("query_appointment") == frozenset({"check_hospital", "check_department"})


def test_edgeless_document_builds_edgeless_graph():
    doc = parse_pdl(
        textwrap.dedent(
            """\
            Name: Flat
            Desc: No preconditions at all.

            APIs:
              - name: a
                request: []
                response: []
                precondition: []
              - name: b
                request: []
                response: []
                precondition: []

            ANSWERs: []

            Procedure: |
              API.a()
              API.b()
            """
        )
    )
    assert isinstance(doc, PdlDocument)
    graph = build_dependency_graph(doc)
    assert all(not graph.preconditions(n) for n in graph.nodes)


def test_fig2_chain_edges(fig2_bundle):
    graph = fig2_bundle.graph
    chain = [
        "check_hospital",
        "check_department",
        "query_appointment",
        "register_appointment",
        "recommend_other_hospitals",
    ]
    for pre, node in zip(chain, chain[1:]):
        assert graph.preconditions(node) == frozenset({pre})


def test_build_rejects_cycles():
    graph = DependencyGraph(nodes=frozenset({"a", "b"}), edges={"a": frozenset({"b"}), "b": frozenset({"a"})})
    with pytest.raises(CycleError):
        topological_order(graph)


# -- accessibility -----------------------------------------------------------


def test_accessible_empty_executed(hospital_bundle):
    graph = hospital_bundle.graph
    accessible, blocked = accessible_nodes(graph, set())
    assert "check_hospital" in accessible
    answer_nodes = {n.name for n in hospital_bundle.doc.answer_nodes}
    assert answer_nodes <= accessible  # every zero-precondition ANSWER node
    assert blocked["query_appointment"] == frozenset({"check_hospital", "check_department"})


def test_accessible_after_check_hospital(hospital_bundle):
    accessible, blocked = accessible_nodes(hospital_bundle.graph, {"check_hospital"})
    assert "check_department" in accessible
    assert blocked["register_hospital"] == frozenset({"query_appointment"})


def test_accessible_after_both_checks(hospital_bundle):
    accessible, _ = accessible_nodes(hospital_bundle.graph, {"check_hospital", "check_department"})
    assert "query_appointment" in accessible


def test_accessible_unknown_executed_raises(hospital_bundle):
    with pytest.raises(UnknownNodeError):
        accessible_nodes(hospital_bundle.graph, {"not_a_node"})


# -- topological order -------------------------------------------------------


def test_fig2_topological_order_deterministic(fig2_bundle):
    order = topological_order(fig2_bundle.graph)
    assert order == [
        "answer_out_of_workflow_questions",
        "check_hospital",
        "check_department",
        "query_appointment",
        "register_appointment",
        "inform_appointment_result",
        "recommend_other_hospitals",
        "request_information",
    ]
    chain = [
        "check_hospital",
        "check_department",
        "query_appointment",
        "register_appointment",
        "recommend_other_hospitals",
    ]
    positions = [order.index(name) for name in chain]
    assert positions == sorted(positions)


def test_edgeless_order_is_lexicographic():
    graph = DependencyGraph(nodes=frozenset({"c", "a", "b"}), edges={})
    assert topological_order(graph) == ["a", "b", "c"]


def test_diamond_order_against_enumeration_oracle():
    # b and c both need a; d needs b and c
    graph = DependencyGraph(
        nodes=frozenset({"a", "b", "c", "d"}),
        edges={"b": frozenset({"a"}), "c": frozenset({"a"}), "d": frozenset({"b", "c"})},
    )
    valid = all_topological_orders(graph)
    order = topological_order(graph)
    assert order in valid
    assert order[0] == "a" and order[-1] == "d"
    assert order.index("b") < order.index("c")  # lexicographic tie-break
    assert order == ["a", "b", "c", "d"]


# -- properties --------------------------------------------------------------


@settings(max_examples=150, deadline=None)
@given(seed=st.integers(min_value=0, max_value=10_000))
def test_accessible_matches_brute_force(seed):
    rng = random.Random(seed)
    graph = random_graph(rng)
    executed = set(rng.sample(sorted(graph.nodes), rng.randint(0, len(graph.nodes))))
    accessible, blocked = accessible_nodes(graph, executed)
    oracle_accessible, oracle_blocked = brute_force_accessible(graph, executed)
    assert set(accessible) == oracle_accessible
    assert {k: set(v) for k, v in blocked.items()} == oracle_blocked


@settings(max_examples=150, deadline=None)
@given(seed=st.integers(min_value=0, max_value=10_000))
def test_accessible_partition_and_monotonicity(seed):
    rng = random.Random(seed)
    graph = random_graph(rng)
    nodes = sorted(graph.nodes)
    small = set(rng.sample(nodes, rng.randint(0, len(nodes))))
    extra = set(rng.sample(nodes, rng.randint(0, len(nodes))))
    large = small | extra

    accessible_small, blocked_small = accessible_nodes(graph, small)
    accessible_large, _ = accessible_nodes(graph, large)
    # partition
    assert set(accessible_small) | set(blocked_small) == set(graph.nodes)
    assert set(accessible_small) & set(blocked_small) == set()
    # monotonicity
    assert set(accessible_small) <= set(accessible_large)


@settings(max_examples=150, deadline=None)
@given(seed=st.integers(min_value=0, max_value=10_000))
def test_topological_order_respects_every_edge(seed):
    rng = random.Random(seed)
    graph = random_graph(rng)
    order = topological_order(graph)
    assert sorted(order) == sorted(graph.nodes)
    position = {name: i for i, name in enumerate(order)}
    for node in graph.nodes:
        for pre in graph.preconditions(node):
            assert position[pre] < position[node]


def test_validated_documents_always_topo_sort():
    """Any document that validates cleanly yields a usable ordering."""
    from conftest import random_workflow_source
    from pdlagent.pdl import validate, errors_only

    rng = random.Random(551)
    for _ in range(50):
        doc = parse_pdl(random_workflow_source(rng))
        assert isinstance(doc, PdlDocument)
        assert errors_only(validate(doc)) == []
        graph = build_dependency_graph(doc)
        order = topological_order(graph)
        position = {name: i for i, name in enumerate(order)}
        for node in graph.nodes:
            for pre in graph.preconditions(node):
                assert position[pre] < position[node]
