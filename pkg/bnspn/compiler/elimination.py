"""
Variable elimination over circuit nodes.

Each CPT becomes a symbolic factor whose entries are circuit refs. Eliminating
a variable multiplies the factors mentioning it (Product nodes) and sums it
out (unit-weight Sum nodes), so the final scalar factor is the root of an
arithmetic circuit computing the network polynomial.
"""

from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

from ..graph.dag import validate_ordering
from ..models.bayesnet import BayesNet, assignments
from ..models.circuit import Circuit, CircuitBuilder, NodeRef, Stage
from ..utils.errors import CompilationError, GraphError
from ..utils.logger import get_logger

logger = get_logger("compiler.elimination")

Assignment = Tuple[int, ...]


@dataclass
class SymbolicFactor:
    """Factor over ascending variables whose entries are circuit refs"""
    variables: Tuple[int, ...]
    entries: Dict[Assignment, NodeRef]

    def lookup(self, full: Dict[int, int]) -> NodeRef:
        return self.entries[tuple(full[v] for v in self.variables)]


def _initial_factor(bn: BayesNet, node: int, builder: CircuitBuilder) -> SymbolicFactor:
    cpt = bn.cpts[node]
    variables = tuple(sorted(cpt.parents + (node,)))
    cards = [bn.variables[v].cardinality for v in variables]
    entries = {}
    for assignment in assignments(cards):
        full = dict(zip(variables, assignment))
        theta = cpt.table[bn.row_index(node, [full.get(v, 0) for v in range(len(bn.variables))]), full[node]]
        entries[assignment] = builder.product([builder.param(theta), builder.indicator(node, full[node])])
    return SymbolicFactor(variables, entries)


def _eliminate(bn: BayesNet, variable: int, factors: List[SymbolicFactor],
               builder: CircuitBuilder) -> SymbolicFactor:
    union = tuple(sorted(set().union(*(f.variables for f in factors))))
    kept = tuple(v for v in union if v != variable)
    card = bn.variables[variable].cardinality
    entries = {}
    for assignment in assignments([bn.variables[v].cardinality for v in kept]):
        full = dict(zip(kept, assignment))
        terms = []
        for value in range(card):
            full[variable] = value
            children = [f.lookup(full) for f in factors]
            terms.append(children[0] if len(children) == 1 else builder.product(children))
        entries[assignment] = builder.sum(terms, [1.0] * card, origin=variable)
    return SymbolicFactor(kept, entries)


def compile_to_ac(bn: BayesNet, sigma: Sequence[int]) -> Circuit:
    """Compile bn into an arithmetic circuit by eliminating variables in sigma order.

    Args:
        bn: The Bayesian network
        sigma: Elimination order, a permutation of the variable indices

    Returns:
        AC-stage circuit whose sums record the eliminated variable as provenance
    """
    n = len(bn.variables)
    if n == 0:
        raise CompilationError("cannot compile an empty network")
    try:
        sigma = validate_ordering(sigma, n)
    except GraphError as e:
        raise CompilationError(str(e)) from e

    builder = CircuitBuilder(bn.variables)
    pool = [_initial_factor(bn, node, builder) for node in range(n)]
    for variable in sigma:
        mentioning = sorted((f for f in pool if variable in f.variables), key=lambda f: f.variables)
        pool = [f for f in pool if variable not in f.variables]
        pool.append(_eliminate(bn, variable, mentioning, builder))
        logger.debug("Eliminated variable", variable=bn.variables[variable].name, factors=len(mentioning))

    roots = [f.entries[()] for f in pool]
    # disconnected networks leave one scalar factor per component
    root = roots[0] if len(roots) == 1 else builder.product(roots)
    return builder.build(root, Stage.AC)
