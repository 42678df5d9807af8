"""
bnspn: compile Bayesian networks into sum-product networks and decompile
them back, with a harness checking that the roundtrip yields the moral closure.
"""

from .compiler import bn2spn
from .decompiler import spn2bn

__version__ = "0.1.0"

__all__ = ["bn2spn", "spn2bn", "__version__"]
