"""
Reference networks with seeded random CPTs.
"""

from typing import Optional

from ..graph.dag import Dag
from ..models.bayesnet import BayesNet, random_cpts
from ..utils.errors import ModelError

EXAMPLE_NAMES = ("A", "B", "C", "D", "E")
EXAMPLE_EDGES = ((0, 1), (1, 4), (2, 3), (3, 4))


def hmm_bn(steps: int = 3, seed: int = 0, cardinality: int = 2) -> BayesNet:
    """Hidden chain H1..Hk (nodes 0..k-1) emitting O1..Ok (nodes k..2k-1)"""
    if steps < 1:
        raise ModelError(f"an HMM needs at least one step, got {steps}")
    edges = [(t, t + 1) for t in range(steps - 1)]
    edges += [(t, steps + t) for t in range(steps)]
    names = [f"H{t + 1}" for t in range(steps)] + [f"O{t + 1}" for t in range(steps)]
    return random_cpts(Dag.from_edges(2 * steps, edges), [cardinality] * (2 * steps), seed, names)


def example_bn(seed: int = 0, cardinality: int = 2) -> BayesNet:
    """A -> B -> E <- D <- C: the v-structure at E makes B and D co-parents"""
    return random_cpts(Dag.from_edges(5, EXAMPLE_EDGES), [cardinality] * 5, seed, EXAMPLE_NAMES)


def chain_bn(n: int, seed: int = 0, cardinality: int = 2, names: Optional[list] = None) -> BayesNet:
    if n < 1:
        raise ModelError(f"a chain needs at least one node, got {n}")
    dag = Dag.from_edges(n, [(i, i + 1) for i in range(n - 1)])
    return random_cpts(dag, [cardinality] * n, seed, names)
