"""
Sum-depth, sum-layers and sum-regions, and the latent variables they induce.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Dict, FrozenSet, List, Set, Tuple

from ..models.circuit import Circuit, NodeRef, SumNode, children_of, reachable_refs
from ..utils.errors import DecompilationError
from ..utils.logger import get_logger

logger = get_logger("decompiler.regions")


class RegionMode(Enum):
    LAYER_LOCAL = "layer-local"
    GLOBAL = "global"


@dataclass(frozen=True)
class LatentVar:
    id: int
    cardinality: int
    name: str

    def __post_init__(self):
        if self.cardinality < 1:
            raise DecompilationError(f"latent {self.name} needs at least one state")


@dataclass(frozen=True)
class SumRegion:
    depth: int
    scope: FrozenSet[int]
    members: Tuple[NodeRef, ...]
    latent: LatentVar

    def to_dict(self) -> Dict:
        return {
            "depth": self.depth,
            "scope": sorted(self.scope),
            "members": list(self.members),
            "latent": self.latent.name,
        }


def _sum_depths(spn: Circuit) -> Dict[NodeRef, int]:
    """Longest-path count of sums strictly above every reachable node"""
    reachable = set(reachable_refs(spn))
    depth: Dict[NodeRef, int] = {spn.root: 0}
    # parents have larger refs, so descending order visits them first
    for ref in sorted(reachable, reverse=True):
        node = spn.nodes[ref]
        below = depth[ref] + (1 if isinstance(node, SumNode) else 0)
        for child in children_of(node):
            depth[child] = max(depth.get(child, 0), below)
    return depth


def sum_depth(spn: Circuit, s: NodeRef) -> int:
    if not isinstance(spn[s], SumNode):
        raise DecompilationError(f"node {s} is not a sum")
    return _sum_depths(spn)[s]


def sum_layers(spn: Circuit) -> List[List[NodeRef]]:
    """Sums grouped by sum-depth, shallowest first, refs ascending"""
    depths = _sum_depths(spn)
    layers: Dict[int, List[NodeRef]] = {}
    for ref in sorted(depths):
        if isinstance(spn.nodes[ref], SumNode):
            layers.setdefault(depths[ref], []).append(ref)
    return [layers[d] for d in sorted(layers)]


def assign_latents(spn: Circuit, mode: RegionMode = RegionMode.LAYER_LOCAL
                   ) -> Tuple[List[SumRegion], Dict[NodeRef, LatentVar]]:
    """Group sums into regions and mint one latent variable per region.

    In GLOBAL mode a scope seen in an earlier layer reuses that layer's
    latent; LAYER_LOCAL keys regions by (depth, scope).

    Returns:
        Regions in discovery order and the latent of every sum
    """
    scopes = spn.scopes()
    first_variable = len(spn.variables)
    latents_by_key: Dict[Tuple, LatentVar] = {}
    depth_of_scope: Dict[FrozenSet[int], int] = {}
    groups: Dict[Tuple[int, FrozenSet[int]], List[NodeRef]] = {}
    recurring: Set[FrozenSet[int]] = set()
    # only global mode merges a recurring scope into one latent
    log_recurrence = logger.warning if mode is RegionMode.GLOBAL else logger.debug
    latent_of: Dict[NodeRef, LatentVar] = {}

    for depth, layer in enumerate(sum_layers(spn)):
        for ref in layer:
            sc = scopes[ref]
            if sc in depth_of_scope and depth_of_scope[sc] != depth and sc not in recurring:
                recurring.add(sc)
                log_recurrence(
                    "Scope recurs across sum-layers",
                    scope=sorted(spn.variables[v].name for v in sc),
                    first_depth=depth_of_scope[sc],
                    depth=depth,
                    mode=mode.value,
                )
            depth_of_scope.setdefault(sc, depth)
            key = (sc,) if mode is RegionMode.GLOBAL else (depth, sc)
            arity = len(spn.nodes[ref].children)
            if key not in latents_by_key:
                index = len(latents_by_key)
                latents_by_key[key] = LatentVar(first_variable + index, arity, f"Z{index + 1}")
            latent = latents_by_key[key]
            if latent.cardinality != arity:
                raise DecompilationError(
                    f"sum {ref} has {arity} children but shares latent {latent.name} "
                    f"of cardinality {latent.cardinality}"
                )
            latent_of[ref] = latent
            groups.setdefault((depth, sc), []).append(ref)

    regions = [
        SumRegion(depth, sc, tuple(members), latent_of[members[0]])
        for (depth, sc), members in groups.items()
    ]
    logger.debug("Assigned latents", regions=len(regions), latents=len(latents_by_key))
    return regions, latent_of


def parsimony(spn: Circuit, mode: RegionMode = RegionMode.LAYER_LOCAL) -> Dict[str, int]:
    """Sum count (one latent per sum) against the latents regions need"""
    regions, latent_of = assign_latents(spn, mode)
    return {
        "sum_nodes": len(latent_of),
        "regions": len(regions),
        "latents": len({latent.id for latent in latent_of.values()}),
    }
