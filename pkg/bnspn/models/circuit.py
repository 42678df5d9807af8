"""
Arithmetic circuits and sum-product networks.

A Circuit stores its nodes in a table ordered so that every child precedes
its parents; refs are indices into that table. Children may be shared, so a
circuit is a DAG rather than a tree. The same structure represents the
arithmetic-circuit stage (Param leaves, unnormalized sums) and the SPN stage.
"""

import hashlib
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple, Union

from ..utils.errors import ModelError
from .bayesnet import Variable

NodeRef = int
WEIGHT_DECIMALS = 12
NORMALIZATION_TOLERANCE = 1e-9


class Stage(Enum):
    AC = "ac"
    SPN = "spn"


@dataclass(frozen=True)
class SumNode:
    children: Tuple[NodeRef, ...]
    weights: Tuple[float, ...]

    def __post_init__(self):
        if len(self.children) != len(self.weights):
            raise ModelError("sum node needs one weight per child")
        if not self.children:
            raise ModelError("sum node without children")
        if any(w < 0 for w in self.weights):
            raise ModelError(f"negative sum weight in {self.weights}")


@dataclass(frozen=True)
class ProductNode:
    children: Tuple[NodeRef, ...]


@dataclass(frozen=True)
class IndicatorNode:
    variable: int
    value: int


@dataclass(frozen=True)
class ParamNode:
    value: float


@dataclass(frozen=True)
class TerminalNode:
    variable: int
    distribution: Tuple[float, ...]

    def __post_init__(self):
        if abs(sum(self.distribution) - 1.0) > NORMALIZATION_TOLERANCE:
            raise ModelError(f"terminal distribution {self.distribution} does not sum to 1")


@dataclass(frozen=True)
class OneNode:
    pass


CircuitNode = Union[SumNode, ProductNode, IndicatorNode, ParamNode, TerminalNode, OneNode]
LEAF_TYPES = (IndicatorNode, ParamNode, TerminalNode, OneNode)


def children_of(node: CircuitNode) -> Tuple[NodeRef, ...]:
    if isinstance(node, (SumNode, ProductNode)):
        return node.children
    return ()


def with_children(node: CircuitNode, children: Sequence[NodeRef]) -> CircuitNode:
    if isinstance(node, SumNode):
        return SumNode(tuple(children), node.weights)
    if isinstance(node, ProductNode):
        return ProductNode(tuple(children))
    return node


@dataclass(frozen=True)
class ValidityReport:
    complete: bool
    decomposable: bool
    violations: Tuple[str, ...] = ()

    @property
    def valid(self) -> bool:
        return self.complete and self.decomposable

    def to_dict(self) -> Dict:
        return {"complete": self.complete, "decomposable": self.decomposable, "violations": list(self.violations)}


@dataclass(frozen=True, eq=True)
class Circuit:
    nodes: Tuple[CircuitNode, ...]
    root: NodeRef
    stage: Stage
    variables: Tuple[Variable, ...]
    provenance: Dict[NodeRef, int] = field(default_factory=dict, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "variables", tuple(self.variables))
        if not 0 <= self.root < len(self.nodes):
            raise ModelError(f"root {self.root} outside node table of size {len(self.nodes)}")
        for ref, node in enumerate(self.nodes):
            for child in children_of(node):
                if not 0 <= child < ref:
                    raise ModelError(f"node {ref} references {child}; children must precede parents")
            if isinstance(node, (IndicatorNode, TerminalNode)):
                self._check_variable(node.variable)
                card = self.variables[node.variable].cardinality
                if isinstance(node, IndicatorNode) and not 0 <= node.value < card:
                    raise ModelError(f"indicator {ref} value {node.value} outside 0..{card - 1}")
                if isinstance(node, TerminalNode) and len(node.distribution) != card:
                    raise ModelError(f"terminal {ref} has {len(node.distribution)} entries for cardinality {card}")
        object.__setattr__(self, "_scopes", None)

    def _check_variable(self, variable: int) -> None:
        if not 0 <= variable < len(self.variables):
            raise ModelError(f"variable {variable} outside 0..{len(self.variables) - 1}")

    def __getitem__(self, ref: NodeRef) -> CircuitNode:
        if not 0 <= ref < len(self.nodes):
            raise ModelError(f"dangling node ref {ref}")
        return self.nodes[ref]

    def __len__(self) -> int:
        return len(self.nodes)

    def refs_of_type(self, *types) -> List[NodeRef]:
        return [ref for ref, node in enumerate(self.nodes) if isinstance(node, types)]

    def scopes(self) -> Tuple[FrozenSet[int], ...]:
        cached = getattr(self, "_scopes")
        if cached is None:
            computed: List[FrozenSet[int]] = []
            for node in self.nodes:
                if isinstance(node, (IndicatorNode, TerminalNode)):
                    computed.append(frozenset((node.variable,)))
                elif isinstance(node, (SumNode, ProductNode)):
                    computed.append(frozenset().union(*(computed[c] for c in node.children)))
                else:
                    computed.append(frozenset())
            cached = tuple(computed)
            object.__setattr__(self, "_scopes", cached)
        return cached

    def descendant_masks(self) -> List[int]:
        """Bitmask per node of itself and everything below it"""
        masks: List[int] = []
        for ref, node in enumerate(self.nodes):
            mask = 1 << ref
            for child in children_of(node):
                mask |= masks[child]
            masks.append(mask)
        return masks

    def variable_names(self) -> List[str]:
        return [v.name for v in self.variables]


def scope(c: Circuit, n: NodeRef) -> FrozenSet[int]:
    if not 0 <= n < len(c):
        raise ModelError(f"dangling node ref {n}")
    return c.scopes()[n]


def check_valid(c: Circuit) -> ValidityReport:
    """Completeness of sums and decomposability of products"""
    scopes = c.scopes()
    violations: List[str] = []
    complete = decomposable = True
    for ref, node in enumerate(c.nodes):
        if isinstance(node, SumNode):
            child_scopes = {scopes[child] for child in node.children}
            if len(child_scopes) > 1:
                complete = False
                violations.append(f"sum {ref}: children scopes differ {sorted(sorted(s) for s in child_scopes)}")
        elif isinstance(node, ProductNode):
            seen: set = set()
            for child in node.children:
                overlap = seen & scopes[child]
                if overlap:
                    decomposable = False
                    violations.append(f"product {ref}: variables {sorted(overlap)} appear under several children")
                    break
                seen |= scopes[child]
    return ValidityReport(complete, decomposable, tuple(violations))


def evaluate(c: Circuit, evidence: Dict[int, int]) -> float:
    """Root value with unassigned indicators and terminals set to 1"""
    for variable, value in evidence.items():
        c._check_variable(variable)
        card = c.variables[variable].cardinality
        if not 0 <= value < card:
            raise ModelError(f"state {value} of variable {c.variables[variable].name!r} outside 0..{card - 1}")

    values: List[float] = [0.0] * len(c.nodes)
    for ref, node in enumerate(c.nodes):
        if isinstance(node, SumNode):
            values[ref] = sum(w * values[child] for child, w in zip(node.children, node.weights))
        elif isinstance(node, ProductNode):
            values[ref] = math.prod(values[child] for child in node.children)
        elif isinstance(node, IndicatorNode):
            observed = evidence.get(node.variable)
            values[ref] = 1.0 if observed is None or observed == node.value else 0.0
        elif isinstance(node, TerminalNode):
            observed = evidence.get(node.variable)
            values[ref] = 1.0 if observed is None else node.distribution[observed]
        elif isinstance(node, ParamNode):
            values[ref] = node.value
        else:
            values[ref] = 1.0
    return float(values[c.root])


def _node_signature(node: CircuitNode, child_digests: Sequence[str]) -> str:
    round_ = lambda w: f"{round(w, WEIGHT_DECIMALS):.{WEIGHT_DECIMALS}f}"
    if isinstance(node, SumNode):
        pairs = sorted(f"{d}*{round_(w)}" for d, w in zip(child_digests, node.weights))
        return "S(" + ",".join(pairs) + ")"
    if isinstance(node, ProductNode):
        return "P(" + ",".join(sorted(child_digests)) + ")"
    if isinstance(node, IndicatorNode):
        return f"I({node.variable}={node.value})"
    if isinstance(node, ParamNode):
        return f"W({round_(node.value)})"
    if isinstance(node, TerminalNode):
        return f"T({node.variable}:" + ",".join(round_(p) for p in node.distribution) + ")"
    return "1"


def fingerprint(c: Circuit) -> str:
    """Canonical digest, insensitive to child order and node numbering.

    Node digests are Merkle hashes over sorted children; the count of
    distinct reachable digests is folded in so sharing changes the result.
    """
    digests: List[str] = []
    for node in c.nodes:
        signature = _node_signature(node, [digests[child] for child in children_of(node)])
        digests.append(hashlib.sha256(signature.encode()).hexdigest())
    reachable = {digests[ref] for ref in reachable_refs(c)}
    summary = f"{digests[c.root]}|{len(reachable)}|{c.stage.value}"
    return hashlib.sha256(summary.encode()).hexdigest()


def reachable_refs(c: Circuit) -> List[NodeRef]:
    """Refs reachable from the root, children before parents"""
    seen = {c.root}
    for ref in range(c.root, -1, -1):
        if ref in seen:
            seen.update(children_of(c.nodes[ref]))
    return sorted(seen)


class CircuitBuilder:
    """Appends nodes in topological order; indicator and One leaves are shared"""

    def __init__(self, variables: Iterable[Variable]):
        self.variables = tuple(variables)
        self.nodes: List[CircuitNode] = []
        self.provenance: Dict[NodeRef, int] = {}
        self._shared: Dict[CircuitNode, NodeRef] = {}

    def add(self, node: CircuitNode, origin: Optional[int] = None) -> NodeRef:
        if isinstance(node, (IndicatorNode, OneNode)) and node in self._shared:
            return self._shared[node]
        ref = len(self.nodes)
        self.nodes.append(node)
        if isinstance(node, (IndicatorNode, OneNode)):
            self._shared[node] = ref
        if origin is not None:
            self.provenance[ref] = origin
        return ref

    def indicator(self, variable: int, value: int) -> NodeRef:
        return self.add(IndicatorNode(variable, value))

    def one(self) -> NodeRef:
        return self.add(OneNode())

    def param(self, value: float) -> NodeRef:
        return self.add(ParamNode(float(value)))

    def product(self, children: Sequence[NodeRef]) -> NodeRef:
        return self.add(ProductNode(tuple(children)))

    def sum(self, children: Sequence[NodeRef], weights: Sequence[float], origin: Optional[int] = None) -> NodeRef:
        return self.add(SumNode(tuple(children), tuple(float(w) for w in weights)), origin)

    def terminal(self, variable: int, distribution: Sequence[float], origin: Optional[int] = None) -> NodeRef:
        return self.add(TerminalNode(variable, tuple(float(p) for p in distribution)), origin)

    def build(self, root: NodeRef, stage: Stage) -> Circuit:
        """Circuit over the nodes reachable from root, renumbered densely"""
        draft = Circuit(tuple(self.nodes), root, stage, self.variables)
        kept = reachable_refs(draft)
        renumber = {old: new for new, old in enumerate(kept)}
        nodes = tuple(with_children(self.nodes[old], [renumber[c] for c in children_of(self.nodes[old])]) for old in kept)
        provenance = {renumber[ref]: var for ref, var in self.provenance.items() if ref in renumber}
        return Circuit(nodes, renumber[root], stage, self.variables, provenance)


Visitor = Callable[[CircuitBuilder, NodeRef, CircuitNode], NodeRef]


def rebuild(c: Circuit, visit: Visitor, stage: Optional[Stage] = None) -> Circuit:
    """Bottom-up rewrite of every reachable node.

    visit receives the node with children already mapped to new refs and
    returns the ref standing in for it. Provenance follows a sum or terminal
    into its replacement when the replacement is itself a sum or terminal.
    """
    builder = CircuitBuilder(c.variables)
    mapping: Dict[NodeRef, NodeRef] = {}
    for ref in reachable_refs(c):
        node = c.nodes[ref]
        mapped = with_children(node, [mapping[child] for child in children_of(node)])
        new_ref = visit(builder, ref, mapped)
        mapping[ref] = new_ref
        origin = c.provenance.get(ref)
        if (
            origin is not None
            and new_ref not in builder.provenance
            and isinstance(builder.nodes[new_ref], (SumNode, TerminalNode))
        ):
            builder.provenance[new_ref] = origin
    return builder.build(mapping[c.root], stage or c.stage)


def node_counts(c: Circuit) -> Dict[str, int]:
    counts = {"sum": 0, "product": 0, "indicator": 0, "param": 0, "terminal": 0, "one": 0}
    names = {SumNode: "sum", ProductNode: "product", IndicatorNode: "indicator",
             ParamNode: "param", TerminalNode: "terminal", OneNode: "one"}
    for node in c.nodes:
        counts[names[type(node)]] += 1
    return counts
