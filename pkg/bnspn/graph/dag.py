"""
Directed acyclic graphs over integer node ids.

Dag is immutable; adjacency is derived from the edge set on demand through a
networkx DiGraph. Every operation iterates in ascending node id so results are
reproducible across runs.
"""

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple

import networkx as nx

from ..utils.errors import GraphError

NodeId = int
Edge = Tuple[NodeId, NodeId]
Ordering = Tuple[NodeId, ...]


@dataclass(frozen=True)
class Relatives:
    parents: FrozenSet[NodeId]
    children: FrozenSet[NodeId]
    ancestors: FrozenSet[NodeId]
    descendants: FrozenSet[NodeId]


@dataclass(frozen=True)
class Dag:
    node_count: int
    edges: FrozenSet[Edge] = field(default_factory=frozenset)

    def __post_init__(self):
        if self.node_count < 0:
            raise GraphError(f"node_count must be non-negative, got {self.node_count}")
        edges = frozenset((int(u), int(v)) for u, v in self.edges)
        object.__setattr__(self, "edges", edges)
        for u, v in edges:
            if not (0 <= u < self.node_count and 0 <= v < self.node_count):
                raise GraphError(f"edge ({u}, {v}) references a node outside 0..{self.node_count - 1}")
            if u == v:
                raise GraphError(f"self-loop on node {u}")
        # edges that all point forward cannot close a cycle
        if any(u > v for u, v in edges) and not nx.is_directed_acyclic_graph(self.graph):
            cycle = nx.find_cycle(self.graph)
            raise GraphError(f"graph contains a directed cycle: {cycle}")

    @classmethod
    def from_edges(cls, node_count: int, edges: Iterable[Edge]) -> "Dag":
        """Build a Dag, rejecting duplicate edges instead of silently merging them"""
        edge_list = [tuple(e) for e in edges]
        if len(set(edge_list)) != len(edge_list):
            seen: Set[Edge] = set()
            duplicates = sorted({e for e in edge_list if e in seen or seen.add(e)})
            raise GraphError(f"duplicate edges: {duplicates}")
        return cls(node_count, frozenset(edge_list))

    @cached_property
    def graph(self) -> nx.DiGraph:
        g = nx.DiGraph()
        g.add_nodes_from(range(self.node_count))
        g.add_edges_from(sorted(self.edges))
        return g

    @property
    def nodes(self) -> range:
        return range(self.node_count)

    def parents(self, v: NodeId) -> List[NodeId]:
        self._check_node(v)
        return sorted(self.graph.predecessors(v))

    def children(self, v: NodeId) -> List[NodeId]:
        self._check_node(v)
        return sorted(self.graph.successors(v))

    def adjacent(self, u: NodeId, v: NodeId) -> bool:
        return (u, v) in self.edges or (v, u) in self.edges

    def sorted_edges(self) -> List[Edge]:
        return sorted(self.edges)

    def with_edges(self, edges: Iterable[Edge]) -> "Dag":
        return Dag(self.node_count, self.edges | frozenset(edges))

    def without_edge(self, edge: Edge) -> "Dag":
        if edge not in self.edges:
            raise GraphError(f"edge {edge} not in graph")
        return Dag(self.node_count, self.edges - {edge})

    def is_connected(self) -> bool:
        if self.node_count == 0:
            return True
        return nx.is_weakly_connected(self.graph)

    def _check_node(self, v: NodeId) -> None:
        if not 0 <= v < self.node_count:
            raise GraphError(f"node {v} outside 0..{self.node_count - 1}")


def relatives(dag: Dag, v: NodeId) -> Relatives:
    """Parents, children, ancestors and descendants of v (v itself excluded)"""
    dag._check_node(v)
    return Relatives(
        parents=frozenset(dag.graph.predecessors(v)),
        children=frozenset(dag.graph.successors(v)),
        ancestors=frozenset(nx.ancestors(dag.graph, v)),
        descendants=frozenset(nx.descendants(dag.graph, v)),
    )


def v_structures(dag: Dag) -> Set[Tuple[NodeId, NodeId, NodeId]]:
    """Every (p1, collider, p2) with p1 < p2 non-adjacent parents of collider"""
    found = set()
    for collider in dag.nodes:
        for p1, p2 in itertools.combinations(dag.parents(collider), 2):
            if not dag.adjacent(p1, p2):
                found.add((p1, collider, p2))
    return found


def _check_disjoint(dag: Dag, x: Set[NodeId], z: Set[NodeId], y: Set[NodeId]) -> None:
    if not x or not y:
        raise GraphError("x and y must be nonempty")
    for v in x | y | z:
        dag._check_node(v)
    if x & y or x & z or y & z:
        raise GraphError(f"node sets must be pairwise disjoint: x={sorted(x)} z={sorted(z)} y={sorted(y)}")


def d_separated(dag: Dag, x: Iterable[NodeId], z: Iterable[NodeId], y: Iterable[NodeId]) -> bool:
    """Whether z d-separates x from y.

    Reachability over (node, direction) pairs: a trail arriving from a child
    travels "up", one arriving from a parent travels "down". Colliders pass a
    trail only when they or a descendant are observed, which is the same as
    being an ancestor-or-self of z.

    Args:
        dag: The graph
        x: Source nodes (nonempty)
        z: Observed nodes
        y: Target nodes (nonempty)

    Returns:
        True when no active trail connects x and y given z
    """
    x, z, y = set(x), set(z), set(y)
    _check_disjoint(dag, x, z, y)

    observed_ancestry = set(z)
    for node in z:
        observed_ancestry |= nx.ancestors(dag.graph, node)

    frontier = [(node, "up") for node in sorted(x)]
    visited = set()
    while frontier:
        node, direction = frontier.pop()
        if (node, direction) in visited:
            continue
        visited.add((node, direction))
        if node not in z and node in y:
            return False

        if direction == "up" and node not in z:
            frontier.extend((p, "up") for p in dag.graph.predecessors(node))
            frontier.extend((c, "down") for c in dag.graph.successors(node))
        elif direction == "down":
            if node not in z:
                frontier.extend((c, "down") for c in dag.graph.successors(node))
            if node in observed_ancestry:
                frontier.extend((p, "up") for p in dag.graph.predecessors(node))
    return True


def d_separated_by_paths(dag: Dag, x: Iterable[NodeId], z: Iterable[NodeId], y: Iterable[NodeId]) -> bool:
    """Exponential path-enumeration d-separation, kept as a cross-check for d_separated"""
    x, z, y = set(x), set(z), set(y)
    _check_disjoint(dag, x, z, y)
    skeleton = dag.graph.to_undirected()

    def blocked(path: Sequence[NodeId]) -> bool:
        for prev, mid, nxt in zip(path, path[1:], path[2:]):
            collider = (prev, mid) in dag.edges and (nxt, mid) in dag.edges
            if collider:
                if mid not in z and not (nx.descendants(dag.graph, mid) & z):
                    return True
            elif mid in z:
                return True
        return False

    for source in x:
        for target in y:
            for path in nx.all_simple_paths(skeleton, source, target):
                if not blocked(path):
                    return False
    return True


def validate_ordering(sequence: Iterable[NodeId], node_count: int) -> Ordering:
    order = tuple(int(v) for v in sequence)
    if sorted(order) != list(range(node_count)):
        raise GraphError(f"ordering {order} is not a permutation of 0..{node_count - 1}")
    return order


def is_topological(dag: Dag, order: Sequence[NodeId]) -> bool:
    position = {v: i for i, v in enumerate(order)}
    if len(position) != dag.node_count or set(position) != set(dag.nodes):
        return False
    return all(position[u] < position[v] for u, v in dag.edges)


def reverse_topological_orderings(dag: Dag) -> List[Ordering]:
    """All orderings listing every node after its children, lexicographically sorted"""
    if dag.node_count == 0:
        return [()]
    orders = nx.all_topological_sorts(dag.graph.reverse(copy=True))
    return sorted(tuple(order) for order in orders)


def moralization_edges(dag: Dag, prec: Sequence[NodeId]) -> Set[Edge]:
    """One pass of directed moralization edges, oriented along prec"""
    if not is_topological(dag, prec):
        raise GraphError(f"ordering {tuple(prec)} is not topological for the graph")
    position = {v: i for i, v in enumerate(prec)}
    added = set()
    for child in dag.nodes:
        for p1, p2 in itertools.combinations(dag.parents(child), 2):
            if dag.adjacent(p1, p2):
                continue
            added.add((p1, p2) if position[p1] < position[p2] else (p2, p1))
    return added


def moral_closure(dag: Dag, prec: Sequence[NodeId]) -> Dag:
    """Add moralization edges until none remain"""
    closure = dag
    while True:
        added = moralization_edges(closure, prec)
        if not added:
            return closure
        closure = closure.with_edges(added)


def reversed_ordering(order: Sequence[NodeId]) -> Ordering:
    return tuple(reversed(tuple(order)))


def default_elimination_order(dag: Dag) -> Optional[Ordering]:
    """The lexicographically smallest topological order, reversed"""
    if dag.node_count == 0:
        return None
    return reversed_ordering(nx.lexicographical_topological_sort(dag.graph))
