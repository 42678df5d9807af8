"""
Discrete Bayesian networks, brute-force joints and I-map checks.
"""

import itertools
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from ..graph.dag import Dag, NodeId, d_separated
from ..utils.errors import CapacityError, GraphError, ModelError
from ..utils.logger import get_logger

logger = get_logger("bayesnet")

ROW_TOLERANCE = 1e-9
DEFAULT_JOINT_CAP = 2 ** 20


class VariableKind(Enum):
    OBSERVABLE = "observable"
    LATENT = "latent"


@dataclass(frozen=True)
class Variable:
    name: str
    cardinality: int = 2
    kind: VariableKind = VariableKind.OBSERVABLE

    def __post_init__(self):
        minimum = 1 if self.kind is VariableKind.LATENT else 2
        if self.cardinality < minimum:
            raise ModelError(f"variable {self.name!r} needs cardinality >= {minimum}, got {self.cardinality}")

    def to_dict(self) -> Dict:
        return {"name": self.name, "cardinality": self.cardinality, "kind": self.kind.value}


def assignments(cardinalities: Sequence[int]) -> Iterator[Tuple[int, ...]]:
    """Row-major assignments; the first variable varies slowest"""
    return itertools.product(*(range(c) for c in cardinalities))


@dataclass(frozen=True, eq=False)
class Cpt:
    """P(child | parents); one table row per parent assignment in row-major order"""
    child: NodeId
    parents: Tuple[NodeId, ...]
    table: np.ndarray

    def __post_init__(self):
        table = np.array(self.table, dtype=float)
        if table.ndim != 2:
            raise ModelError(f"CPT of node {self.child} must be two-dimensional")
        table.setflags(write=False)
        object.__setattr__(self, "table", table)
        object.__setattr__(self, "parents", tuple(self.parents))
        if np.any(table < 0):
            raise ModelError(f"CPT of node {self.child} has negative entries")
        row_sums = table.sum(axis=1)
        bad = np.flatnonzero(np.abs(row_sums - 1.0) > ROW_TOLERANCE)
        if bad.size:
            raise ModelError(f"CPT of node {self.child}: rows {bad.tolist()} do not sum to 1")

    def __eq__(self, other) -> bool:
        if not isinstance(other, Cpt):
            return NotImplemented
        return (
            self.child == other.child
            and self.parents == other.parents
            and self.table.shape == other.table.shape
            and bool(np.array_equal(self.table, other.table))
        )

    def __hash__(self) -> int:
        return hash((self.child, self.parents, self.table.shape))


@dataclass(frozen=True)
class BayesNet:
    variables: Tuple[Variable, ...]
    dag: Dag
    cpts: Tuple[Cpt, ...]

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "cpts", tuple(self.cpts))
        n = len(self.variables)
        if self.dag.node_count != n:
            raise ModelError(f"graph has {self.dag.node_count} nodes but {n} variables")
        names = [v.name for v in self.variables]
        if len(set(names)) != n:
            raise ModelError(f"variable names must be unique: {names}")
        if len(self.cpts) != n:
            raise ModelError(f"expected {n} CPTs, got {len(self.cpts)}")
        for node, cpt in enumerate(self.cpts):
            if cpt.child != node:
                raise ModelError(f"CPT at position {node} belongs to node {cpt.child}")
            if sorted(cpt.parents) != self.dag.parents(node):
                raise ModelError(
                    f"CPT parents {list(cpt.parents)} of {names[node]!r} differ from graph parents {self.dag.parents(node)}"
                )
            rows = math.prod(self.variables[p].cardinality for p in cpt.parents)
            expected = (rows, self.variables[node].cardinality)
            if cpt.table.shape != expected:
                raise ModelError(f"CPT of {names[node]!r} has shape {cpt.table.shape}, expected {expected}")

    @property
    def names(self) -> List[str]:
        return [v.name for v in self.variables]

    @property
    def cardinalities(self) -> List[int]:
        return [v.cardinality for v in self.variables]

    def index_of(self, name: str) -> NodeId:
        try:
            return self.names.index(name)
        except ValueError:
            raise ModelError(f"unknown variable {name!r}") from None

    def row_index(self, node: NodeId, assignment: Sequence[int]) -> int:
        """Row of node's CPT selected by a full assignment"""
        cpt = self.cpts[node]
        cards = [self.variables[p].cardinality for p in cpt.parents]
        values = [assignment[p] for p in cpt.parents]
        return int(np.ravel_multi_index(values, cards)) if cards else 0

    def probability(self, assignment: Sequence[int]) -> float:
        return float(np.prod([
            self.cpts[v].table[self.row_index(v, assignment), assignment[v]]
            for v in range(len(self.variables))
        ]))


@dataclass(frozen=True, eq=False)
class JointTable:
    """Explicit distribution over every full assignment; axis i is variable i"""
    variables: Tuple[str, ...]
    probabilities: np.ndarray

    def __post_init__(self):
        probabilities = np.asarray(self.probabilities, dtype=float)
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "probabilities", probabilities)
        if probabilities.ndim != len(self.variables):
            raise ModelError(f"table has {probabilities.ndim} axes for {len(self.variables)} variables")
        if np.any(probabilities < 0):
            raise ModelError("joint table has negative entries")
        total = float(probabilities.sum())
        if abs(total - 1.0) > ROW_TOLERANCE:
            raise ModelError(f"joint table mass is {total}, expected 1")

    @property
    def cardinalities(self) -> Tuple[int, ...]:
        return tuple(self.probabilities.shape)

    def entry(self, assignment: Sequence[int]) -> float:
        return float(self.probabilities[tuple(assignment)])

    def marginal(self, nodes: Sequence[NodeId]) -> np.ndarray:
        """Marginal array whose axes follow the order of nodes"""
        nodes = list(nodes)
        others = tuple(a for a in range(len(self.variables)) if a not in nodes)
        reduced = self.probabilities.sum(axis=others) if others else self.probabilities
        kept = sorted(nodes)
        return np.transpose(reduced, [kept.index(v) for v in nodes]) if nodes else reduced

    def probability_of(self, evidence: Dict[NodeId, int]) -> float:
        index = tuple(evidence.get(a, slice(None)) for a in range(len(self.variables)))
        return float(np.sum(self.probabilities[index]))


def joint_of_bn(bn: BayesNet, cap: int = DEFAULT_JOINT_CAP) -> JointTable:
    """Product of all CPTs over the full assignment space"""
    cards = bn.cardinalities
    space = math.prod(cards)
    if space > cap:
        raise CapacityError(f"joint over {len(cards)} variables has {space} entries, cap is {cap}")
    operands: List = []
    for cpt in bn.cpts:
        shape = [bn.variables[p].cardinality for p in cpt.parents] + [bn.variables[cpt.child].cardinality]
        operands.extend([cpt.table.reshape(shape), list(cpt.parents) + [cpt.child]])
    probabilities = np.einsum(*operands, list(range(len(cards))))
    return JointTable(tuple(bn.names), probabilities)


def is_independent(j: JointTable, x: Iterable[NodeId], z: Iterable[NodeId], y: Iterable[NodeId],
                   tol: float = ROW_TOLERANCE) -> bool:
    """Check P(x,y|z) = P(x|z) P(y|z) wherever P(z) > tol"""
    x, z, y = sorted(set(x)), sorted(set(z)), sorted(set(y))
    if set(x) & set(y) or set(x) & set(z) or set(y) & set(z):
        raise GraphError("independence query sets must be disjoint")
    if not x or not y:
        return True
    cards = j.cardinalities
    size = lambda nodes: math.prod(cards[v] for v in nodes)
    table = j.marginal(x + y + z).reshape(size(x), size(y), size(z))
    p_z = table.sum(axis=(0, 1))
    p_xz = table.sum(axis=1)
    p_yz = table.sum(axis=0)
    for k in np.flatnonzero(p_z > tol):
        joint = table[:, :, k] / p_z[k]
        product = np.outer(p_xz[:, k], p_yz[:, k]) / (p_z[k] ** 2)
        if np.max(np.abs(joint - product)) > tol:
            return False
    return True


def _disjoint_triples(n: int) -> Iterator[Tuple[List[int], List[int], List[int]]]:
    # 0 = unused, 1 = x, 2 = y, 3 = z; (x, y) and (y, x) are the same statement
    for labels in itertools.product(range(4), repeat=n):
        x = [v for v, lab in enumerate(labels) if lab == 1]
        y = [v for v, lab in enumerate(labels) if lab == 2]
        if not x or not y or x[0] > y[0]:
            continue
        z = [v for v, lab in enumerate(labels) if lab == 3]
        yield x, z, y


def is_imap(dag: Dag, j: JointTable, tol: float = ROW_TOLERANCE) -> bool:
    """Every independence d-separation reads off dag holds in j"""
    if dag.node_count != len(j.variables):
        raise ModelError(f"graph has {dag.node_count} nodes, joint has {len(j.variables)} variables")
    for x, z, y in _disjoint_triples(dag.node_count):
        if d_separated(dag, x, z, y) and not is_independent(j, x, z, y, tol):
            logger.debug("Independence violated", x=x, z=z, y=y)
            return False
    return True


def is_minimal_imap(dag: Dag, j: JointTable, tol: float = ROW_TOLERANCE) -> bool:
    """An I-map that stops being one when any single edge is removed"""
    if not is_imap(dag, j, tol):
        raise ModelError("is_minimal_imap requires an I-map")
    for edge in dag.sorted_edges():
        if is_imap(dag.without_edge(edge), j, tol):
            logger.debug("Removable edge found", edge=edge)
            return False
    return True


def _nonempty_subsets(pool: Sequence[int]) -> List[Tuple[int, ...]]:
    # bitmask order: {0}, {1}, {0,1}, {2}, ...
    return [
        tuple(v for bit, v in enumerate(pool) if mask >> bit & 1)
        for mask in range(1, 2 ** len(pool))
    ]


def family_size(n: int) -> int:
    _check_family_n(n)
    return math.prod(2 ** k - 1 for k in range(1, n))


def iter_family(n: int) -> Iterator[Dag]:
    """Each node i >= 1 picks a nonempty parent subset of its predecessors"""
    _check_family_n(n)
    choices = [_nonempty_subsets(list(range(i))) for i in range(1, n)]
    for parent_sets in itertools.product(*choices):
        edges = frozenset((p, child) for child, ps in enumerate(parent_sets, start=1) for p in ps)
        yield Dag(n, edges)


def enumerate_family(n: int) -> List[Dag]:
    return list(iter_family(n))


def family_member(n: int, index: int) -> Dag:
    """The index-th Dag of iter_family(n), decoded without enumerating"""
    total = family_size(n)
    if not 0 <= index < total:
        raise GraphError(f"family index {index} outside 0..{total - 1}")
    edges = set()
    # mixed radix, the first child is the most significant digit
    for child in range(n - 1, 0, -1):
        radix = 2 ** child - 1
        index, digit = divmod(index, radix)
        mask = digit + 1
        edges.update((p, child) for p in range(child) if mask >> p & 1)
    return Dag(n, frozenset(edges))


def _check_family_n(n: int) -> None:
    if not 2 <= n <= 7:
        raise GraphError(f"family size n must lie in 2..7, got {n}")


def default_names(n: int) -> List[str]:
    return [f"X{i + 1}" for i in range(n)]


def random_cpts(dag: Dag, cards: Sequence[int], seed: int,
                names: Optional[Sequence[str]] = None) -> BayesNet:
    """Strictly positive random CPTs, deterministic for a fixed seed"""
    if len(cards) != dag.node_count:
        raise ModelError(f"need {dag.node_count} cardinalities, got {len(cards)}")
    rng = np.random.default_rng(seed)
    names = list(names) if names is not None else default_names(dag.node_count)
    variables = tuple(Variable(name, int(card)) for name, card in zip(names, cards))
    cpts = []
    for node in dag.nodes:
        parents = tuple(dag.parents(node))
        rows = math.prod(cards[p] for p in parents)
        raw = rng.uniform(1e-3, 1.0, size=(rows, cards[node]))
        cpts.append(Cpt(node, parents, raw / raw.sum(axis=1, keepdims=True)))
    return BayesNet(variables, dag, tuple(cpts))
