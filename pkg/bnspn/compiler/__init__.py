from .elimination import SymbolicFactor, compile_to_ac
from .pipeline import bn2spn
from .rewrites import (
    add_terminal_nodes,
    flatten_products,
    lump_products,
    marginalize,
    normalize_weights,
    redistribute_parameters,
    simplify_fixpoint,
)

__all__ = [
    "SymbolicFactor",
    "compile_to_ac",
    "redistribute_parameters",
    "normalize_weights",
    "marginalize",
    "add_terminal_nodes",
    "flatten_products",
    "lump_products",
    "simplify_fixpoint",
    "bn2spn",
]
