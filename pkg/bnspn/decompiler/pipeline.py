"""
SPN to BN decompilation pipeline.
"""

import math
import numpy as np

from ..models.bayesnet import DEFAULT_JOINT_CAP, JointTable, VariableKind, assignments
from ..models.circuit import Circuit, Stage, check_valid, evaluate
from ..utils.errors import CapacityError, DecompilationError
from ..utils.logger import get_logger
from .augment import augment
from .imap import DecompiledBn, build_imap, extract_cpts
from .regions import RegionMode, assign_latents

logger = get_logger("decompiler")


def spn2bn(spn: Circuit, mode: RegionMode = RegionMode.LAYER_LOCAL) -> DecompiledBn:
    """Decompile a valid SPN into a Bayesian network over latents and observables"""
    if spn.stage is not Stage.SPN:
        raise DecompilationError("only SPN-stage circuits can be decompiled")
    report = check_valid(spn)
    if not report.valid:
        raise DecompilationError(f"circuit is not a valid SPN: {'; '.join(report.violations)}")

    regions, latent_of = assign_latents(spn, mode)
    aug = augment(spn, regions, latent_of)
    structure = build_imap(aug, regions, latent_of)
    decompiled = extract_cpts(aug, structure)
    logger.debug(
        "Decompiled circuit",
        latents=sum(1 for o in decompiled.node_origin.values() if o.kind is VariableKind.LATENT),
        nodes=decompiled.dag.node_count,
        edges=len(decompiled.dag.edges),
    )
    return decompiled


def augmented_joint(decompiled: DecompiledBn, cap: int = DEFAULT_JOINT_CAP) -> JointTable:
    """Joint over the decompiled BN's nodes, read off the augmented circuit"""
    aug = decompiled.augmented
    if aug is None:
        raise DecompilationError("decompiled network carries no augmented circuit")
    cards = [v.cardinality for v in decompiled.variables]
    space = math.prod(cards)
    if space > cap:
        raise CapacityError(f"augmented joint has {space} entries, cap is {cap}")

    circuit_variable = []
    for node in range(len(cards)):
        origin = decompiled.node_origin[node]
        circuit_variable.append(origin.latent.id if origin.kind is VariableKind.LATENT else origin.variable)

    table = np.zeros(cards)
    for values in assignments(cards):
        table[values] = evaluate(aug.circuit, dict(zip(circuit_variable, values)))
    return JointTable(tuple(decompiled.names), table)
