"""
Graphviz DOT rendering of DAGs, Bayesian networks and circuits.

Only the DOT source is produced; nothing is rendered, so the graphviz binaries
are not required. Nodes are emitted in ascending id and edges in sorted order.
"""

from typing import Optional, Sequence

from graphviz import Digraph

from ..graph.dag import Dag
from ..models.bayesnet import BayesNet, VariableKind
from ..models.circuit import (
    Circuit,
    IndicatorNode,
    OneNode,
    ParamNode,
    ProductNode,
    SumNode,
    TerminalNode,
    children_of,
)


def dag_to_dot(dag: Dag, names: Optional[Sequence[str]] = None, name: str = "dag",
               latent: Sequence[int] = ()) -> str:
    names = list(names) if names is not None else [str(v) for v in dag.nodes]
    graph = Digraph(name=name)
    for v in dag.nodes:
        if v in latent:
            graph.node(f"n{v}", names[v], shape="ellipse", style="dashed")
        else:
            graph.node(f"n{v}", names[v], shape="ellipse")
    for u, v in dag.sorted_edges():
        graph.edge(f"n{u}", f"n{v}")
    return graph.source


def bn_to_dot(bn: BayesNet, name: str = "bayesnet") -> str:
    latent = [i for i, v in enumerate(bn.variables) if v.kind is VariableKind.LATENT]
    return dag_to_dot(bn.dag, bn.names, name=name, latent=latent)


def _fmt(value: float) -> str:
    return f"{value:.4g}"


def circuit_to_dot(c: Circuit, name: str = "circuit") -> str:
    """Sums as "+" circles, products as "×" circles, leaves as boxes"""
    names = c.variable_names()
    graph = Digraph(name=name)
    for ref, node in enumerate(c.nodes):
        node_id = f"c{ref}"
        if isinstance(node, SumNode):
            graph.node(node_id, "+", shape="circle")
        elif isinstance(node, ProductNode):
            graph.node(node_id, "×", shape="circle")
        elif isinstance(node, IndicatorNode):
            graph.node(node_id, f"λ {names[node.variable]}={node.value}", shape="box")
        elif isinstance(node, TerminalNode):
            dist = ", ".join(_fmt(p) for p in node.distribution)
            graph.node(node_id, f"{names[node.variable]} [{dist}]", shape="box")
        elif isinstance(node, ParamNode):
            graph.node(node_id, f"θ {_fmt(node.value)}", shape="box")
        elif isinstance(node, OneNode):
            graph.node(node_id, "1", shape="box")
    for ref, node in enumerate(c.nodes):
        if isinstance(node, SumNode):
            for child, weight in zip(node.children, node.weights):
                graph.edge(f"c{ref}", f"c{child}", label=_fmt(weight))
        else:
            for child in children_of(node):
                graph.edge(f"c{ref}", f"c{child}")
    return graph.source
