"""
Augmentation: make every latent variable explicit in the circuit.

The k-th child C_k of a sum S with latent Z becomes Product(C_k, λ_{Z=k}).
For every region latent Z and every sum above some member of Z, a child that
reaches no member of Z is also multiplied by the twin sum of Z, a uniform
sum over Z's indicators, which keeps the circuit complete.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Tuple

from ..models.bayesnet import Variable, VariableKind
from ..models.circuit import (
    Circuit,
    CircuitBuilder,
    NodeRef,
    Stage,
    SumNode,
    check_valid,
    children_of,
    with_children,
)
from ..utils.errors import DecompilationError
from ..utils.logger import get_logger
from .regions import LatentVar, SumRegion

logger = get_logger("decompiler.augment")


@dataclass
class AugmentedCircuit:
    circuit: Circuit
    latent_indicators: Dict[Tuple[int, int], NodeRef]
    twins: Dict[int, NodeRef]
    node_map: Dict[NodeRef, NodeRef]
    latents: Dict[int, LatentVar]
    latent_of: Dict[NodeRef, LatentVar] = field(default_factory=dict)

    def latent_of_original(self, original_ref: NodeRef) -> LatentVar:
        return self.latent_of[self.node_map[original_ref]]


def augment(spn: Circuit, regions: List[SumRegion], latent_of: Dict[NodeRef, LatentVar]) -> AugmentedCircuit:
    """Attach latent indicators and twin sums.

    Args:
        spn: Valid SPN
        regions: Sum-regions from assign_latents
        latent_of: Latent of every sum in spn

    Returns:
        The augmented circuit; its variables extend spn's with one latent per id
    """
    latents = {latent.id: latent for latent in sorted({l for l in latent_of.values()}, key=lambda l: l.id)}
    variables = list(spn.variables)
    for latent_id, latent in latents.items():
        if latent_id != len(variables):
            raise DecompilationError(f"latent ids must follow the circuit variables, got {latent_id}")
        variables.append(Variable(latent.name, latent.cardinality, VariableKind.LATENT))

    masks = spn.descendant_masks()
    member_mask: Dict[int, int] = {}
    for region in regions:
        for member in region.members:
            member_mask[region.latent.id] = member_mask.get(region.latent.id, 0) | (1 << member)

    builder = CircuitBuilder(variables)
    indicators: Dict[Tuple[int, int], NodeRef] = {}
    twins: Dict[int, NodeRef] = {}
    wrappers: Dict[Tuple[NodeRef, Tuple[NodeRef, ...]], NodeRef] = {}
    node_map: Dict[NodeRef, NodeRef] = {}
    aug_latent_of: Dict[NodeRef, LatentVar] = {}

    def indicator(latent_id: int, state: int) -> NodeRef:
        if (latent_id, state) not in indicators:
            indicators[(latent_id, state)] = builder.indicator(latent_id, state)
        return indicators[(latent_id, state)]

    def twin(latent_id: int) -> NodeRef:
        if latent_id not in twins:
            card = latents[latent_id].cardinality
            twins[latent_id] = builder.sum([indicator(latent_id, k) for k in range(card)], [1.0 / card] * card)
        return twins[latent_id]

    for ref, node in enumerate(spn.nodes):
        mapped = with_children(node, [node_map[child] for child in children_of(node)])
        if not isinstance(node, SumNode):
            node_map[ref] = builder.add(mapped)
            continue

        own = latent_of[ref]
        # regions this sum sits above, excluding its own membership
        above = [
            latent_id for latent_id, mask in member_mask.items()
            if masks[ref] & mask & ~(1 << ref)
        ]
        children = []
        for k, child in enumerate(node.children):
            extras = [indicator(own.id, k)]
            extras.extend(twin(latent_id) for latent_id in above if not masks[child] & member_mask[latent_id])
            key = (node_map[child], tuple(extras))
            if key not in wrappers:
                wrappers[key] = builder.product([node_map[child]] + extras)
            children.append(wrappers[key])
        new_ref = builder.sum(children, node.weights, origin=spn.provenance.get(ref))
        node_map[ref] = new_ref
        aug_latent_of[new_ref] = own

    circuit = Circuit(tuple(builder.nodes), node_map[spn.root], Stage.SPN, tuple(variables), dict(builder.provenance))
    report = check_valid(circuit)
    if not report.valid:
        raise DecompilationError(f"augmentation broke validity: {'; '.join(report.violations)}")

    logger.debug("Augmented circuit", nodes=len(circuit), twins=len(twins), latents=len(latents))
    return AugmentedCircuit(circuit, indicators, twins, node_map, latents, aug_latent_of)
