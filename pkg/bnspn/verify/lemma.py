"""
Brute-force check that a latent depends on its ancestor latents only through
its conditioning latents: P(Z | Z_A) = P(Z | Z_C), with A the latents of all
ancestor sums and C the latents of the conditioning sums.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from ..decompiler.imap import DecompiledBn
from ..decompiler.pipeline import augmented_joint, spn2bn
from ..decompiler.regions import RegionMode
from ..models.bayesnet import DEFAULT_JOINT_CAP, JointTable, VariableKind
from ..models.circuit import Circuit
from ..utils.logger import get_logger

logger = get_logger("verify.lemma")

LEMMA_TOLERANCE = 1e-9


@dataclass
class LatentDeviation:
    latent: str
    ancestors: List[str]
    conditioning: List[str]
    deviation: float

    def to_dict(self) -> Dict:
        return {
            "latent": self.latent,
            "ancestors": self.ancestors,
            "conditioning": self.conditioning,
            "deviation": self.deviation,
        }


@dataclass
class LemmaReport:
    tolerance: float
    latents: List[LatentDeviation] = field(default_factory=list)

    @property
    def max_deviation(self) -> float:
        return max((d.deviation for d in self.latents), default=0.0)

    @property
    def passed(self) -> bool:
        return self.max_deviation <= self.tolerance

    def to_dict(self) -> Dict:
        return {
            "passed": self.passed,
            "max_deviation": self.max_deviation,
            "tolerance": self.tolerance,
            "latents": [d.to_dict() for d in self.latents],
        }


def _ancestor_latent_nodes(decompiled: DecompiledBn, node: int) -> List[int]:
    aug = decompiled.augmented
    masks = aug.circuit.descendant_masks()
    found = set()
    for member in decompiled.members[node]:
        for ref, latent in aug.latent_of.items():
            if ref != member and masks[ref] >> member & 1:
                found.add(decompiled.node_of_latent(latent.id))
    found.discard(node)
    return sorted(found)


def _conditional(joint: JointTable, given: List[int], node: int) -> np.ndarray:
    table = joint.marginal(given + [node])
    totals = table.sum(axis=-1, keepdims=True)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(totals > 0, table / np.where(totals > 0, totals, 1.0), 0.0)


def _deviation(joint: JointTable, node: int, ancestors: List[int], conditioning: List[int], tol: float) -> float:
    given = sorted(set(ancestors) | set(conditioning))
    full = _conditional(joint, given, node)
    reduced = _conditional(joint, conditioning, node)
    support = joint.marginal(given) if given else np.array(1.0)
    worst = 0.0
    for index in np.ndindex(*support.shape):
        if support[index] <= tol:
            continue
        projected = tuple(index[given.index(c)] for c in conditioning)
        worst = max(worst, float(np.max(np.abs(full[index] - reduced[projected]))))
    return worst


def verify_lemma(spn: Circuit, decompiled: Optional[DecompiledBn] = None,
                 mode: RegionMode = RegionMode.LAYER_LOCAL,
                 cap: int = DEFAULT_JOINT_CAP, tol: float = LEMMA_TOLERANCE) -> LemmaReport:
    """Largest |P(Z|Z_A) - P(Z|Z_C)| per latent, computed from the augmented joint.

    Raises:
        CapacityError: if the augmented assignment space exceeds cap
    """
    if decompiled is None:
        decompiled = spn2bn(spn, mode)
    joint = augmented_joint(decompiled, cap)
    report = LemmaReport(tolerance=tol)
    names = decompiled.names
    for node, origin in sorted(decompiled.node_origin.items()):
        if origin.kind is not VariableKind.LATENT:
            continue
        ancestors = _ancestor_latent_nodes(decompiled, node)
        conditioning = decompiled.dag.parents(node)
        report.latents.append(LatentDeviation(
            latent=names[node],
            ancestors=[names[a] for a in ancestors],
            conditioning=[names[c] for c in conditioning],
            deviation=_deviation(joint, node, ancestors, conditioning, tol),
        ))
    logger.debug("Lemma check", latents=len(report.latents), max_deviation=report.max_deviation)
    return report
