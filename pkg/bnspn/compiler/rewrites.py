"""
Circuit rewrites turning an arithmetic circuit into a simplified SPN.

Every rewrite is a bottom-up rebuild that keeps sum child order, because the
k-th child of a sum is state k of its latent variable during decompilation.
"""

import math
from typing import Dict, Iterable, List, Tuple

from ..models.circuit import (
    NORMALIZATION_TOLERANCE,
    Circuit,
    CircuitBuilder,
    CircuitNode,
    IndicatorNode,
    NodeRef,
    OneNode,
    ParamNode,
    ProductNode,
    Stage,
    SumNode,
    TerminalNode,
    fingerprint,
    rebuild,
    scope,
)
from ..utils.errors import CompilationError
from ..utils.logger import get_logger

logger = get_logger("compiler.rewrites")

DEFAULT_FIXPOINT_CAP = 1000


def _product_or_child(builder: CircuitBuilder, children: List[NodeRef]) -> NodeRef:
    if not children:
        return builder.one()
    if len(children) == 1:
        return children[0]
    return builder.product(children)


def _flatten(c: Circuit) -> Tuple[Circuit, int]:
    fired = 0

    def visit(builder: CircuitBuilder, ref: NodeRef, node: CircuitNode) -> NodeRef:
        nonlocal fired
        if not isinstance(node, ProductNode):
            return builder.add(node)
        merged: List[NodeRef] = []
        for child in node.children:
            child_node = builder.nodes[child]
            if isinstance(child_node, ProductNode):
                merged.extend(child_node.children)
                fired += 1
            else:
                merged.append(child)
        if len(merged) == 1:
            fired += 1
        return _product_or_child(builder, merged)

    return rebuild(c, visit), fired


def flatten_products(spn: Circuit) -> Circuit:
    """Splice product children into their product parents; unary products collapse"""
    return _flatten(spn)[0]


def _partition_values(c: Circuit) -> List[float]:
    # every node evaluated with all indicators at 1
    values: List[float] = []
    for node in c.nodes:
        if isinstance(node, SumNode):
            values.append(sum(w * values[child] for child, w in zip(node.children, node.weights)))
        elif isinstance(node, ProductNode):
            values.append(math.prod(values[child] for child in node.children))
        elif isinstance(node, ParamNode):
            values.append(node.value)
        else:
            values.append(1.0)
    return values


def normalize_weights(spn: Circuit) -> Circuit:
    """Rescale sum weights so each sum totals 1.

    A child's partition value moves into the weight of the edge above it and
    the sum divides by its own, so every node computes its old value over its
    old partition. Queries normalized by the root are unchanged.

    Raises:
        CompilationError: if a sum carries no mass
    """
    partition = _partition_values(spn)

    def visit(builder: CircuitBuilder, ref: NodeRef, node: CircuitNode) -> NodeRef:
        if not isinstance(node, SumNode):
            return builder.add(node)
        original = spn.nodes[ref]
        masses = [w * partition[child] for child, w in zip(original.children, original.weights)]
        total = sum(masses)
        if total <= 0.0:
            raise CompilationError(f"sum {ref} has no mass to normalize")
        return builder.sum(node.children, [m / total for m in masses])

    rescaled = sum(
        1 for ref in spn.refs_of_type(SumNode)
        if abs(sum(spn.nodes[ref].weights) - 1.0) > NORMALIZATION_TOLERANCE
    )
    logger.info("Normalizing sum weights locally", sums=len(spn.refs_of_type(SumNode)),
                unnormalized=rescaled, root_partition=partition[spn.root])
    return rebuild(spn, visit)


def redistribute_parameters(ac: Circuit, normalize: bool = False) -> Circuit:
    """Fold Param leaves into the weights of the sum edges above them.

    With normalize, unnormalized sums are rescaled by normalize_weights
    instead of rejected.

    Raises:
        CompilationError: if a Param cannot be folded or a sum ends up unnormalized
    """
    if ac.stage is Stage.SPN and not ac.refs_of_type(ParamNode):
        return normalize_weights(ac) if normalize else ac
    flat = flatten_products(ac)

    def visit(builder: CircuitBuilder, ref: NodeRef, node: CircuitNode) -> NodeRef:
        if not isinstance(node, SumNode):
            return builder.add(node)
        children, weights = [], []
        for child, weight in zip(node.children, node.weights):
            child_node = builder.nodes[child]
            if isinstance(child_node, ParamNode):
                weight *= child_node.value
                child = builder.one()
            elif isinstance(child_node, ProductNode):
                params = [builder.nodes[g].value for g in child_node.children if isinstance(builder.nodes[g], ParamNode)]
                if params:
                    weight *= math.prod(params)
                    rest = [g for g in child_node.children if not isinstance(builder.nodes[g], ParamNode)]
                    child = _product_or_child(builder, rest)
            children.append(child)
            weights.append(weight)
        return builder.sum(children, weights)

    spn = rebuild(flat, visit, Stage.SPN)

    leftover = spn.refs_of_type(ParamNode)
    if leftover:
        raise CompilationError(f"parameter leaves {leftover} could not be folded into sum weights")
    if normalize:
        return normalize_weights(spn)
    for ref in spn.refs_of_type(SumNode):
        total = sum(spn.nodes[ref].weights)
        if abs(total - 1.0) > NORMALIZATION_TOLERANCE:
            raise CompilationError(
                f"sum {ref} weights total {total:.12g} after folding; unnormalized sum weights "
                f"(elimination order is not reverse topological)"
            )
    return spn


def marginalize(spn: Circuit, variables: Iterable[int]) -> Circuit:
    """Set every indicator of the given variables to 1 and constant-fold"""
    variables = frozenset(variables)
    if not variables:
        return spn
    outside = variables - scope(spn, spn.root)
    if outside:
        names = [spn.variables[v].name for v in sorted(outside)]
        raise CompilationError(f"cannot marginalize variables outside the root scope: {names}")

    def visit(builder: CircuitBuilder, ref: NodeRef, node: CircuitNode) -> NodeRef:
        if isinstance(node, (IndicatorNode, TerminalNode)) and node.variable in variables:
            return builder.one()
        if isinstance(node, ProductNode):
            kept = [child for child in node.children if not isinstance(builder.nodes[child], OneNode)]
            return _product_or_child(builder, kept)
        if isinstance(node, SumNode) and all(isinstance(builder.nodes[child], OneNode) for child in node.children):
            return builder.one()
        return builder.add(node)

    result = rebuild(spn, visit)
    logger.debug("Marginalized variables", variables=sorted(variables), nodes=len(result))
    return result


def _add_terminals(c: Circuit) -> Tuple[Circuit, int]:
    fired = 0

    def visit(builder: CircuitBuilder, ref: NodeRef, node: CircuitNode) -> NodeRef:
        nonlocal fired
        if not isinstance(node, SumNode):
            return builder.add(node)
        leaves = [builder.nodes[child] for child in node.children]
        if not all(isinstance(leaf, IndicatorNode) for leaf in leaves):
            return builder.add(node)
        variables = {leaf.variable for leaf in leaves}
        if len(variables) > 1:
            raise CompilationError(f"sum {ref} mixes indicators of variables {sorted(variables)}")
        variable = variables.pop()
        distribution = [0.0] * c.variables[variable].cardinality
        for leaf, weight in zip(leaves, node.weights):
            distribution[leaf.value] += weight
        fired += 1
        return builder.terminal(variable, distribution)

    return rebuild(c, visit), fired


def add_terminal_nodes(spn: Circuit) -> Circuit:
    """Replace sums over one variable's indicators with Terminal leaves"""
    return _add_terminals(spn)[0]


def _lump(c: Circuit) -> Tuple[Circuit, int]:
    fired = 0
    seen: Dict[Tuple[NodeRef, ...], NodeRef] = {}

    def visit(builder: CircuitBuilder, ref: NodeRef, node: CircuitNode) -> NodeRef:
        nonlocal fired
        if not isinstance(node, ProductNode):
            return builder.add(node)
        key = tuple(sorted(node.children))
        if key in seen:
            fired += 1
            return seen[key]
        seen[key] = builder.add(node)
        return seen[key]

    return rebuild(c, visit), fired


def lump_products(spn: Circuit) -> Circuit:
    """Merge products over identical child multisets into one shared node"""
    return _lump(spn)[0]


def simplify_fixpoint(spn: Circuit, cap: int = DEFAULT_FIXPOINT_CAP) -> Circuit:
    """Apply terminal conversion, flattening and lumping until nothing fires"""
    current = spn
    for iteration in range(1, cap + 1):
        before = current
        current, terminals = _add_terminals(current)
        current, flattened = _flatten(current)
        current, lumped = _lump(current)
        if terminals + flattened + lumped == 0:
            if fingerprint(current) != fingerprint(before):
                raise CompilationError("simplification reported a fixpoint but the circuit still changed")
            logger.debug("Simplification settled", iterations=iteration, nodes=len(current))
            return current
    raise CompilationError(f"simplification did not settle within {cap} iterations")

