"""
BN to SPN compilation pipeline.
"""

import time
from typing import Iterable, Optional, Sequence

from ..models.bayesnet import BayesNet
from ..models.circuit import Circuit, check_valid
from ..utils.errors import CompilationError
from ..utils.logger import get_logger
from .elimination import compile_to_ac
from .rewrites import DEFAULT_FIXPOINT_CAP, marginalize, redistribute_parameters, simplify_fixpoint

logger = get_logger("compiler")


def bn2spn(bn: BayesNet, sigma: Sequence[int], marg: Iterable[int] = (),
           fixpoint_cap: Optional[int] = None, normalize: bool = False) -> Circuit:
    """Compile a Bayesian network into a valid, simplified SPN.

    Args:
        bn: Network to compile
        sigma: Elimination order; reverse topological orders give normalized sums
        marg: Variables whose indicators are set to 1 after compilation
        fixpoint_cap: Iteration cap for the simplification loop
        normalize: Rescale unnormalized sums instead of raising

    Returns:
        SPN-stage circuit with provenance on every sum
    """
    start_time = time.time()
    marg = frozenset(marg)
    ac = compile_to_ac(bn, sigma)
    spn = redistribute_parameters(ac, normalize)
    spn = marginalize(spn, marg)
    spn = simplify_fixpoint(spn, fixpoint_cap or DEFAULT_FIXPOINT_CAP)

    report = check_valid(spn)
    if not report.valid:
        raise CompilationError(f"compiled circuit is invalid: {'; '.join(report.violations)}")

    logger.debug(
        "Compiled network",
        sigma=[bn.variables[v].name for v in sigma],
        normalized=normalize,
        marginalized=sorted(bn.variables[v].name for v in marg),
        ac_nodes=len(ac),
        spn_nodes=len(spn),
        seconds=round(time.time() - start_time, 4),
    )
    return spn
