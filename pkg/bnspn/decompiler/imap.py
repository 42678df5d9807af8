"""
Conditioning sums, I-map structure and CPT extraction.

A sum S' conditions a node N when the children of S' do not all reach the
same subset of {N, twin(N)} in the augmented circuit. Each conditioning sum
contributes an edge from its latent to N's BN node.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Set, Tuple

import numpy as np

from ..graph.dag import Dag
from ..models.bayesnet import BayesNet, Cpt, Variable, VariableKind, assignments
from ..models.circuit import (
    IndicatorNode,
    NodeRef,
    SumNode,
    TerminalNode,
    children_of,
    evaluate,
)
from ..utils.errors import DecompilationError, GraphError
from ..utils.logger import get_logger
from .augment import AugmentedCircuit
from .regions import LatentVar, SumRegion

logger = get_logger("decompiler.imap")

ROW_MATCH_TOLERANCE = 1e-12


@dataclass(frozen=True)
class NodeOrigin:
    """What a decompiled BN node stands for"""
    kind: VariableKind
    latent: Optional[LatentVar] = None
    variable: Optional[int] = None
    regions: Tuple[SumRegion, ...] = ()

    def to_dict(self) -> Dict:
        if self.kind is VariableKind.LATENT:
            return {"kind": "latent", "latent": self.latent.name, "regions": [r.to_dict() for r in self.regions]}
        return {"kind": "observable", "variable": self.variable}


@dataclass
class DecompiledBn:
    variables: Tuple[Variable, ...]
    dag: Dag
    node_origin: Dict[int, NodeOrigin]
    members: Dict[int, Tuple[NodeRef, ...]]
    bn: Optional[BayesNet] = None
    augmented: Optional[AugmentedCircuit] = field(default=None, repr=False)
    regions: Tuple[SumRegion, ...] = ()

    @property
    def names(self) -> List[str]:
        return [v.name for v in self.variables]

    def node_of_latent(self, latent_id: int) -> int:
        for node, origin in self.node_origin.items():
            if origin.kind is VariableKind.LATENT and origin.latent.id == latent_id:
                return node
        raise DecompilationError(f"no BN node for latent {latent_id}")


def _reach_masks(aug: AugmentedCircuit) -> List[int]:
    return aug.circuit.descendant_masks()


def _check_target(aug: AugmentedCircuit, n: NodeRef) -> None:
    node = aug.circuit[n]
    if not isinstance(node, (SumNode, TerminalNode, IndicatorNode)):
        raise DecompilationError(f"node {n} is neither a sum nor a leaf")
    if isinstance(node, SumNode) and n not in aug.latent_of:
        raise DecompilationError(f"node {n} is a twin sum, not a sum of the original circuit")


def _conditioning(aug: AugmentedCircuit, n: NodeRef, masks: List[int]) -> Set[NodeRef]:
    targets = 1 << n
    latent = aug.latent_of.get(n)
    if latent is not None and latent.id in aug.twins:
        targets |= 1 << aug.twins[latent.id]
    found = set()
    for ref in aug.latent_of:
        if ref == n or not masks[ref] >> n & 1:
            continue
        reached = {masks[child] & targets for child in aug.circuit.nodes[ref].children}
        if len(reached) > 1:
            found.add(ref)
    return found


def conditioning_ancestors(aug: AugmentedCircuit, n: NodeRef) -> Set[NodeRef]:
    """Ancestor sums of n (augmented refs) whose children reach different subsets of {n, twin(n)}"""
    _check_target(aug, n)
    return _conditioning(aug, n, _reach_masks(aug))


def build_imap(aug: AugmentedCircuit, regions: List[SumRegion], latent_of: Dict[NodeRef, LatentVar]) -> DecompiledBn:
    """Structure of the decompiled BN: latents first, then observables"""
    circuit = aug.circuit
    latents = sorted(aug.latents.values(), key=lambda l: l.id)
    node_of_latent = {latent.id: i for i, latent in enumerate(latents)}

    leaf_refs: Dict[int, List[NodeRef]] = {}
    for _, ref in sorted(aug.node_map.items()):
        node = circuit.nodes[ref]
        if isinstance(node, (TerminalNode, IndicatorNode)):
            refs = leaf_refs.setdefault(node.variable, [])
            if ref not in refs:
                refs.append(ref)
    observables = sorted(leaf_refs)
    node_of_variable = {var: len(latents) + i for i, var in enumerate(observables)}

    variables = [Variable(l.name, l.cardinality, VariableKind.LATENT) for l in latents]
    variables += [circuit.variables[var] for var in observables]
    origin: Dict[int, NodeOrigin] = {}
    members: Dict[int, Tuple[NodeRef, ...]] = {}
    for latent in latents:
        node = node_of_latent[latent.id]
        latent_regions = tuple(r for r in regions if r.latent.id == latent.id)
        origin[node] = NodeOrigin(VariableKind.LATENT, latent=latent, regions=latent_regions)
        members[node] = tuple(sorted(aug.node_map[ref] for ref, l in latent_of.items() if l.id == latent.id))
    for var in observables:
        node = node_of_variable[var]
        origin[node] = NodeOrigin(VariableKind.OBSERVABLE, variable=var)
        members[node] = tuple(leaf_refs[var])

    masks = _reach_masks(aug)
    edges: Set[Tuple[int, int]] = set()
    for node, refs in members.items():
        per_member = []
        for ref in refs:
            parents = {node_of_latent[aug.latent_of[s].id] for s in _conditioning(aug, ref, masks)}
            per_member.append(frozenset(parents))
            for parent in parents:
                if parent == node:
                    raise DecompilationError(f"latent {variables[node].name} conditions itself")
                edges.add((parent, node))
        if origin[node].kind is VariableKind.LATENT and len(set(per_member)) > 1:
            logger.warning(
                "Region members disagree on conditioning latents",
                latent=variables[node].name,
                per_member=[sorted(variables[p].name for p in s) for s in per_member],
            )

    try:
        dag = Dag(len(variables), frozenset(edges))
    except GraphError as e:
        raise DecompilationError(f"decompiled structure is cyclic: {e}") from e

    return DecompiledBn(tuple(variables), dag, origin, members, augmented=aug, regions=tuple(regions))


def _selected(aug: AugmentedCircuit, assignment: Dict[int, int]) -> Set[NodeRef]:
    """Nodes reached from the root when assigned latents pick a single child"""
    circuit = aug.circuit
    reached = {circuit.root}
    stack = [circuit.root]
    while stack:
        ref = stack.pop()
        node = circuit.nodes[ref]
        latent = aug.latent_of.get(ref)
        if isinstance(node, SumNode) and latent is not None and latent.id in assignment:
            nxt = [node.children[assignment[latent.id]]]
        else:
            nxt = children_of(node)
        for child in nxt:
            if child not in reached:
                reached.add(child)
                stack.append(child)
    return reached


def _row_of(aug: AugmentedCircuit, ref: NodeRef, cardinality: int) -> np.ndarray:
    node = aug.circuit.nodes[ref]
    if isinstance(node, SumNode):
        row = np.array(node.weights, dtype=float)
    elif isinstance(node, TerminalNode):
        row = np.array(node.distribution, dtype=float)
    else:
        row = np.zeros(cardinality)
        row[node.value] = 1.0
    return row / row.sum()


def _evaluated_row(aug: AugmentedCircuit, evidence: Dict[int, int], variable: int, cardinality: int) -> np.ndarray:
    base = evaluate(aug.circuit, evidence)
    if base <= 0:
        return np.full(cardinality, 1.0 / cardinality)
    row = np.array([evaluate(aug.circuit, {**evidence, variable: k}) for k in range(cardinality)]) / base
    return row / row.sum()


def extract_cpts(aug: AugmentedCircuit, imap: DecompiledBn) -> DecompiledBn:
    """Fill in CPTs: each parent assignment selects the member whose weights form the row"""
    dag = imap.dag
    cpts = []
    for node in dag.nodes:
        parents = tuple(dag.parents(node))
        parent_latents = [imap.node_origin[p].latent.id for p in parents]
        cardinality = imap.variables[node].cardinality
        origin = imap.node_origin[node]
        variable = origin.latent.id if origin.kind is VariableKind.LATENT else origin.variable
        member_set = set(imap.members[node])
        rows = []
        for values in assignments([imap.variables[p].cardinality for p in parents]):
            assignment = dict(zip(parent_latents, values))
            reached = _selected(aug, assignment)
            hits = sorted(member_set & reached)
            candidates = [_row_of(aug, ref, cardinality) for ref in hits]
            if not candidates:
                row = np.full(cardinality, 1.0 / cardinality)
            elif all(np.allclose(c, candidates[0], rtol=0, atol=ROW_MATCH_TOLERANCE) for c in candidates[1:]):
                row = candidates[0]
            else:
                logger.warning(
                    "Several region members selected; using evaluated conditional",
                    node=imap.variables[node].name,
                    assignment=values,
                    members=hits,
                )
                row = _evaluated_row(aug, assignment, variable, cardinality)
            rows.append(row)
        cpts.append(Cpt(node, parents, np.vstack(rows)))

    bn = BayesNet(imap.variables, dag, tuple(cpts))
    return DecompiledBn(imap.variables, dag, imap.node_origin, imap.members, bn, aug, imap.regions)
