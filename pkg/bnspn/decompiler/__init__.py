from .augment import AugmentedCircuit, augment
from .imap import DecompiledBn, NodeOrigin, build_imap, conditioning_ancestors, extract_cpts
from .pipeline import augmented_joint, spn2bn
from .regions import LatentVar, RegionMode, SumRegion, assign_latents, parsimony, sum_depth, sum_layers

__all__ = [
    "AugmentedCircuit",
    "DecompiledBn",
    "LatentVar",
    "NodeOrigin",
    "RegionMode",
    "SumRegion",
    "assign_latents",
    "augment",
    "augmented_joint",
    "build_imap",
    "conditioning_ancestors",
    "extract_cpts",
    "parsimony",
    "spn2bn",
    "sum_depth",
    "sum_layers",
]
