"""Precondition dependency graph: construction, reachability, ordering."""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Iterable, Mapping

from .ast import PdlDocument


class CycleError(RuntimeError):
    """The precondition graph contains a cycle."""


class UnknownNodeError(KeyError):
    """A name was used that is not a node of the graph."""


@dataclass(frozen=True)
class DependencyGraph:
    """Nodes plus, for each node, the set of nodes that must run before it."""

    nodes: frozenset[str]
    edges: Mapping[str, frozenset[str]]

    def preconditions(self, node: str) -> frozenset[str]:
        if node not in self.nodes:
            raise UnknownNodeError(node)
        return self.edges.get(node, frozenset())


def build_dependency_graph(doc: PdlDocument) -> DependencyGraph:
    """Compile a document's precondition lists into a DependencyGraph.

    The caller is expected to have validated the document; a cyclic
    precondition set still raises CycleError here as a defensive check.
    """
    nodes = frozenset(doc.node_names())
    edges = {n.name: frozenset(n.preconditions) for n in doc.nodes()}
    graph = DependencyGraph(nodes=nodes, edges=edges)
    topological_order(graph)  # raises CycleError on bad input
    return graph


def accessible_nodes(
    graph: DependencyGraph, executed: Iterable[str]
) -> tuple[frozenset[str], dict[str, frozenset[str]]]:
    """Split the graph into accessible nodes and blocked nodes.

    A node is accessible iff all of its preconditions are in `executed`.
    Blocked nodes map to their currently unmet precondition sets; together
    the two results partition graph.nodes.
    """
    executed_set = frozenset(executed)
    unknown = executed_set - graph.nodes
    if unknown:
        raise UnknownNodeError(f"executed set references unknown nodes: {sorted(unknown)}")
    accessible = set()
    blocked: dict[str, frozenset[str]] = {}
    for node in graph.nodes:
        unmet = graph.edges.get(node, frozenset()) - executed_set
        if unmet:
            blocked[node] = frozenset(unmet)
        else:
            accessible.add(node)
    return frozenset(accessible), blocked


def topological_order(graph: DependencyGraph) -> list[str]:
    """Kahn's algorithm with a lexicographic tie-break for determinism."""
    indegree = {node: len(graph.edges.get(node, frozenset()) & graph.nodes) for node in graph.nodes}
    dependents: dict[str, list[str]] = {node: [] for node in graph.nodes}
    for node, preconditions in graph.edges.items():
        for pre in preconditions:
            if pre in dependents:
                dependents[pre].append(node)
    ready = [node for node, deg in indegree.items() if deg == 0]
    heapq.heapify(ready)
    order: list[str] = []
    while ready:
        node = heapq.heappop(ready)
        order.append(node)
        for dep in dependents[node]:
            indegree[dep] -= 1
            if indegree[dep] == 0:
                heapq.heappush(ready, dep)
    if len(order) != len(graph.nodes):
        remaining = sorted(set(graph.nodes) - set(order))
        raise CycleError(f"precondition cycle involving: {', '.join(remaining)}")
    return order
