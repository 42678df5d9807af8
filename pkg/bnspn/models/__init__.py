from .bayesnet import (
    BayesNet,
    Cpt,
    JointTable,
    Variable,
    VariableKind,
    enumerate_family,
    family_member,
    family_size,
    is_imap,
    is_independent,
    is_minimal_imap,
    iter_family,
    joint_of_bn,
    random_cpts,
)
from .circuit import Circuit, CircuitBuilder, Stage, check_valid, evaluate, fingerprint, scope
from .serialization import load_bn, load_circuit, load_model, save_bn, save_circuit

__all__ = [
    "BayesNet",
    "Circuit",
    "CircuitBuilder",
    "Cpt",
    "JointTable",
    "Stage",
    "Variable",
    "VariableKind",
    "check_valid",
    "enumerate_family",
    "evaluate",
    "family_member",
    "family_size",
    "fingerprint",
    "is_imap",
    "is_independent",
    "is_minimal_imap",
    "iter_family",
    "joint_of_bn",
    "load_bn",
    "load_circuit",
    "load_model",
    "random_cpts",
    "save_bn",
    "save_circuit",
    "scope",
]
