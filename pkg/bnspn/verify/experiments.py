"""
Enumeration sweep: every family BN of size n crossed with elimination orders.

In the default mode each BN is paired with the (n-1)! orders that eliminate
node 0 last, giving bn_count x (n-1)! trials. Only orders that are reverse
topological for their BN are must-pass; the rest compile with locally
normalized sum weights and are reported.
"""

import itertools
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from ..decompiler.regions import RegionMode
from ..graph.dag import Dag, Ordering, reverse_topological_orderings
from ..models.bayesnet import family_member, family_size, iter_family
from ..utils.errors import GraphError
from ..utils.logger import get_logger
from .coordinator import TrialCoordinator, TrialTask
from .roundtrip import MarginalizationPolicy, TrialRecord

logger = get_logger("verify.experiments")

MIN_N, MAX_N = 2, 7
# largest n swept exhaustively; beyond it a sample size is required
MAX_FULL_N = 6


class OrderingMode(Enum):
    NODE1_LAST = "node1-last"
    REV_TOPO = "rev-topo"


def node1_last_orderings(n: int) -> List[Ordering]:
    """Permutations of 1..n-1 in lexicographic order, each followed by node 0"""
    return [perm + (0,) for perm in itertools.permutations(range(1, n))]


def _nth_node1_last(n: int, index: int) -> Ordering:
    """The index-th entry of node1_last_orderings(n), decoded in factorial base"""
    pool = list(range(1, n))
    order = []
    for remaining in range(len(pool), 0, -1):
        digit, index = divmod(index, math.factorial(remaining - 1))
        order.append(pool.pop(digit))
    return tuple(order) + (0,)


def orderings_for(dag: Dag, mode: OrderingMode = OrderingMode.NODE1_LAST) -> List[Ordering]:
    if mode is OrderingMode.NODE1_LAST:
        return node1_last_orderings(dag.node_count)
    return reverse_topological_orderings(dag)


def _check_n(n: int) -> None:
    if not MIN_N <= n <= MAX_N:
        raise GraphError(f"n must lie in {MIN_N}..{MAX_N}, got {n}")


def plan_table_experiment(n: int, mode: OrderingMode = OrderingMode.NODE1_LAST) -> Dict[str, Any]:
    """Trial counts without running any pipeline.

    ordering_count is None in rev-topo mode, where it varies per BN.
    """
    _check_n(n)
    bn_count = family_size(n)
    if mode is OrderingMode.NODE1_LAST:
        ordering_count = math.factorial(n - 1)
        trial_count = bn_count * ordering_count
    else:
        ordering_count = None
        trial_count = sum(len(reverse_topological_orderings(dag)) for dag in iter_family(n))
    return {"n": n, "mode": mode.value, "bn_count": bn_count,
            "ordering_count": ordering_count, "trial_count": trial_count}


@dataclass
class ExperimentSummary:
    n: int
    mode: str
    policy: str
    bn_count: int
    ordering_count: Optional[int]
    trial_count: int
    match_count: int
    must_pass_count: int
    must_pass_failures: int
    idempotence_failures: int = 0
    normalized_count: int = 0
    sampled: bool = False
    records: List[TrialRecord] = field(default_factory=list, repr=False)

    @property
    def passed(self) -> bool:
        return self.must_pass_failures == 0 and self.idempotence_failures == 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "n": self.n,
            "mode": self.mode,
            "policy": self.policy,
            "bn_count": self.bn_count,
            "ordering_count": self.ordering_count,
            "trial_count": self.trial_count,
            "match_count": self.match_count,
            "must_pass_count": self.must_pass_count,
            "must_pass_failures": self.must_pass_failures,
            "idempotence_failures": self.idempotence_failures,
            "normalized_count": self.normalized_count,
            "sampled": self.sampled,
        }

    def to_frame(self) -> pd.DataFrame:
        columns = list(TrialRecord(0, 0, (), False, "").to_dict())
        return pd.DataFrame([r.to_dict() for r in self.records], columns=columns)

    def write_report(self, path: Union[str, Path]) -> None:
        self.to_frame().to_csv(path, index=False)

    def headline(self) -> str:
        headline = f"{self.trial_count} trials, {self.match_count} matches"
        if self.idempotence_failures:
            headline += f", {self.idempotence_failures} not idempotent"
        return headline


def _pairs(n: int, mode: OrderingMode, sample: Optional[int], seed: int) -> Iterable[Tuple[int, Ordering]]:
    if sample is None:
        for bn_index, dag in enumerate(iter_family(n)):
            for sigma in orderings_for(dag, mode):
                yield bn_index, sigma
        return

    rng = np.random.default_rng(seed)
    bn_count = family_size(n)
    if mode is OrderingMode.NODE1_LAST:
        per_bn = math.factorial(n - 1)
        total = bn_count * per_bn
        chosen = np.sort(rng.choice(total, size=min(sample, total), replace=False))
        for trial in chosen:
            bn_index, sigma_index = divmod(int(trial), per_bn)
            yield bn_index, _nth_node1_last(n, sigma_index)
    else:
        # one uniformly drawn reverse-topological order per sampled BN
        chosen = np.sort(rng.choice(bn_count, size=min(sample, bn_count), replace=False))
        for bn_index in chosen:
            orders = reverse_topological_orderings(family_member(n, int(bn_index)))
            yield int(bn_index), orders[int(rng.integers(len(orders)))]


def run_table_experiment(n: int, mode: OrderingMode = OrderingMode.NODE1_LAST,
                         policy: MarginalizationPolicy = MarginalizationPolicy.INTERNAL,
                         jobs: int = 1,
                         sample: Optional[int] = None,
                         seed: int = 0,
                         cardinality: int = 2,
                         check_idempotence: bool = False,
                         check_minimality: bool = False,
                         explicit: Sequence[int] = (),
                         region_mode: RegionMode = RegionMode.LAYER_LOCAL,
                         coordinator: Optional[TrialCoordinator] = None) -> ExperimentSummary:
    """Sweep the family of size n and tally moral-closure matches.

    Args:
        n: Family size, 2..7; n = 7 requires sample
        mode: Which elimination orders pair with each BN
        policy: Marginalization policy applied in every trial
        jobs: Worker processes
        sample: Number of trials drawn uniformly without replacement
        seed: Seeds both the sampling and the random CPTs (seed + bn_index)
        cardinality: States per variable
        check_idempotence: Also feed each matching closure back through the pipeline
        check_minimality: Also record whether each decompiled DAG is a minimal I-map

    Returns:
        Summary with records ordered by (bn_index, sigma)
    """
    _check_n(n)
    if sample is None and n > MAX_FULL_N:
        raise GraphError(f"n = {n} is too large to sweep exhaustively; pass a sample size")
    if sample is not None and sample < 1:
        raise GraphError(f"sample size must be positive, got {sample}")

    tasks = [
        TrialTask(
            n=n,
            bn_index=bn_index,
            sigma=sigma,
            policy=policy.value,
            seed=seed,
            cardinality=cardinality,
            explicit=tuple(explicit),
            region_mode=region_mode.value,
            check_idempotence=check_idempotence,
            check_minimality=check_minimality,
        )
        for bn_index, sigma in _pairs(n, mode, sample, seed)
    ]
    logger.info("Running sweep", n=n, mode=mode.value, policy=policy.value, trials=len(tasks), jobs=jobs)

    coordinator = coordinator or TrialCoordinator(jobs)
    records = [result.record for result in coordinator.execute(tasks)]

    must_pass = [r for r in records if r.must_pass]
    summary = ExperimentSummary(
        n=n,
        mode=mode.value,
        policy=policy.value,
        bn_count=family_size(n) if sample is None else len({r.bn_index for r in records}),
        ordering_count=math.factorial(n - 1) if mode is OrderingMode.NODE1_LAST else None,
        trial_count=len(records),
        match_count=sum(1 for r in records if r.closure_match),
        must_pass_count=len(must_pass),
        must_pass_failures=sum(1 for r in must_pass if not r.closure_match),
        idempotence_failures=sum(1 for r in must_pass if r.idempotent is False),
        normalized_count=sum(1 for r in records if r.normalized),
        sampled=sample is not None,
        records=records,
    )
    if not summary.passed:
        logger.warning("Must-pass trials failed", **summary.to_dict())
    return summary
