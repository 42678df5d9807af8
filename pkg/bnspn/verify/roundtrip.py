"""
BN -> SPN -> BN roundtrips and the moral-closure and idempotence checks.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple

from ..compiler.pipeline import bn2spn
from ..decompiler.imap import DecompiledBn
from ..decompiler.pipeline import augmented_joint, spn2bn
from ..decompiler.regions import RegionMode
from ..graph.dag import Dag, Edge, Ordering, is_topological, moral_closure, reversed_ordering, validate_ordering
from ..models.bayesnet import BayesNet, VariableKind, is_minimal_imap, random_cpts
from ..utils.errors import BnSpnError, CompilationError, DecompilationError, GraphError
from ..utils.logger import get_logger

logger = get_logger("verify.roundtrip")


class MarginalizationPolicy(Enum):
    INTERNAL = "internal"
    NONE = "none"
    EXPLICIT = "explicit"


def resolve_marginalized(bn: BayesNet, policy: MarginalizationPolicy = MarginalizationPolicy.INTERNAL,
                         explicit: Optional[Iterable[int]] = None) -> FrozenSet[int]:
    """Variables whose indicators are summed out after compilation"""
    if policy is MarginalizationPolicy.INTERNAL:
        return frozenset(v for v in bn.dag.nodes if bn.dag.children(v))
    if policy is MarginalizationPolicy.NONE:
        return frozenset()
    if explicit is None:
        raise GraphError("explicit marginalization policy needs a variable set")
    chosen = frozenset(int(v) for v in explicit)
    outside = sorted(v for v in chosen if not 0 <= v < bn.dag.node_count)
    if outside:
        raise GraphError(f"marginalized variables {outside} are not in the network")
    return chosen


@dataclass(frozen=True)
class Correspondence:
    """Decompiled BN node -> original variable"""
    mapping: Dict[int, int]

    @classmethod
    def from_decompiled(cls, decompiled: DecompiledBn) -> "Correspondence":
        """Latents take the variable the compiler recorded on their member sums"""
        provenance = decompiled.augmented.circuit.provenance if decompiled.augmented else {}
        mapping: Dict[int, int] = {}
        for node, origin in sorted(decompiled.node_origin.items()):
            if origin.kind is VariableKind.OBSERVABLE:
                mapping[node] = origin.variable
                continue
            recorded = {provenance.get(ref) for ref in decompiled.members[node]}
            if None in recorded:
                raise DecompilationError(f"latent {origin.latent.name} has member sums without provenance")
            if len(recorded) > 1:
                raise DecompilationError(
                    f"members of latent {origin.latent.name} come from different variables: {sorted(recorded)}"
                )
            mapping[node] = recorded.pop()

        claimed: Dict[int, int] = {}
        for node, variable in mapping.items():
            if variable in claimed:
                names = decompiled.names
                raise DecompilationError(
                    f"nodes {names[claimed[variable]]} and {names[node]} both map to variable {variable}"
                )
            claimed[variable] = node
        return cls(mapping)

    def variable_of(self, node: int) -> int:
        return self.mapping[node]

    def map_edges(self, dag: Dag) -> FrozenSet[Edge]:
        return frozenset((self.mapping[u], self.mapping[v]) for u, v in dag.edges)

    def to_dict(self, decompiled: DecompiledBn, bn: BayesNet) -> Dict[str, str]:
        return {decompiled.names[node]: bn.names[var] for node, var in sorted(self.mapping.items())}


def roundtrip(bn: BayesNet, sigma: Sequence[int],
              policy: MarginalizationPolicy = MarginalizationPolicy.INTERNAL,
              explicit: Optional[Iterable[int]] = None,
              mode: RegionMode = RegionMode.LAYER_LOCAL,
              fixpoint_cap: Optional[int] = None,
              normalize: bool = False) -> Tuple[DecompiledBn, Correspondence]:
    """Compile with bn2spn, decompile with spn2bn, and pin the node bijection"""
    marg = resolve_marginalized(bn, policy, explicit)
    spn = bn2spn(bn, sigma, marg, fixpoint_cap, normalize)
    decompiled = spn2bn(spn, mode)
    return decompiled, Correspondence.from_decompiled(decompiled)


def reference_order(dag: Dag, sigma: Sequence[int]) -> Ordering:
    """Topological order the closure is oriented along: sigma reversed when that is topological"""
    backwards = reversed_ordering(sigma)
    if is_topological(dag, backwards):
        return backwards
    return tuple(dag.nodes)


@dataclass
class TrialRecord:
    n: int
    bn_index: int
    sigma: Ordering
    sigma_is_reverse_topological: bool
    marginalization_policy: str
    closure_match: Optional[bool] = None
    added_edges: Optional[int] = None
    idempotent: Optional[bool] = None
    normalized: bool = False
    minimal_imap: Optional[bool] = None
    notes: str = ""

    @property
    def must_pass(self) -> bool:
        return self.sigma_is_reverse_topological and self.marginalization_policy == MarginalizationPolicy.INTERNAL.value

    def to_dict(self) -> Dict:
        return {
            "n": self.n,
            "bn_index": self.bn_index,
            "sigma": " ".join(str(v) for v in self.sigma),
            "sigma_is_reverse_topological": self.sigma_is_reverse_topological,
            "marginalization_policy": self.marginalization_policy,
            "closure_match": self.closure_match,
            "added_edges": self.added_edges,
            "idempotent": self.idempotent,
            "normalized": self.normalized,
            "minimal_imap": self.minimal_imap,
            "notes": self.notes,
        }


def _edge_names(edges: Iterable[Edge], names: List[str]) -> List[str]:
    return [f"{names[u]}->{names[v]}" for u, v in sorted(edges)]


def _minimality(decompiled: DecompiledBn) -> Optional[bool]:
    try:
        return is_minimal_imap(decompiled.dag, augmented_joint(decompiled))
    except BnSpnError as e:
        logger.debug("Minimality not decided", error=str(e))
        return None


def verify_moral_closure(bn: BayesNet, sigma: Sequence[int],
                         policy: MarginalizationPolicy = MarginalizationPolicy.INTERNAL,
                         bn_index: int = 0,
                         explicit: Optional[Iterable[int]] = None,
                         mode: RegionMode = RegionMode.LAYER_LOCAL,
                         check_minimality: bool = False) -> TrialRecord:
    """Compare the roundtrip's structure with the moral closure of bn's DAG.

    Orders that are not reverse topological leave unnormalized sums; those
    trials retry with local weight normalization and are flagged normalized.
    Reverse-topological orders never normalize. Pipeline errors do not
    propagate: they end up in the record's notes and the trial counts as a
    mismatch.

    Args:
        check_minimality: Also decide whether the decompiled DAG is a minimal
            I-map of the augmented joint; exponential in the node count
    """
    sigma = validate_ordering(sigma, bn.dag.node_count)
    prec = reference_order(bn.dag, sigma)
    record = TrialRecord(
        n=bn.dag.node_count,
        bn_index=bn_index,
        sigma=sigma,
        sigma_is_reverse_topological=prec == reversed_ordering(sigma),
        marginalization_policy=policy.value,
    )
    closure = moral_closure(bn.dag, prec)
    record.added_edges = len(closure.edges) - len(bn.dag.edges)

    try:
        try:
            decompiled, correspondence = roundtrip(bn, sigma, policy, explicit, mode)
        except CompilationError as e:
            if record.sigma_is_reverse_topological:
                raise
            logger.info("Retrying with normalized sum weights", bn_index=bn_index,
                        sigma=list(sigma), error=str(e))
            decompiled, correspondence = roundtrip(bn, sigma, policy, explicit, mode, normalize=True)
            record.normalized = True
    except BnSpnError as e:
        record.closure_match = False
        record.notes = f"{type(e).__name__}: {e}"
        logger.debug("Roundtrip failed", bn_index=bn_index, sigma=list(sigma), error=str(e))
        return record

    produced = correspondence.map_edges(decompiled.dag)
    record.closure_match = produced == closure.edges
    if check_minimality:
        record.minimal_imap = _minimality(decompiled)
    if not record.closure_match:
        missing: Set[Edge] = closure.edges - produced
        extra: Set[Edge] = produced - closure.edges
        record.notes = f"missing={_edge_names(missing, bn.names)} extra={_edge_names(extra, bn.names)}"
        if record.must_pass:
            logger.warning("Roundtrip differs from the moral closure", bn_index=bn_index,
                           sigma=list(sigma), notes=record.notes)
    return record


def verify_idempotence(bn: BayesNet, sigma: Sequence[int],
                       policy: MarginalizationPolicy = MarginalizationPolicy.INTERNAL,
                       seed: int = 0,
                       explicit: Optional[Iterable[int]] = None,
                       mode: RegionMode = RegionMode.LAYER_LOCAL,
                       normalize: bool = False) -> bool:
    """Feed the moral closure back through the pipeline and expect it unchanged"""
    sigma = validate_ordering(sigma, bn.dag.node_count)
    closure = moral_closure(bn.dag, reference_order(bn.dag, sigma))
    closure_bn = random_cpts(closure, bn.cardinalities, seed, bn.names)
    decompiled, correspondence = roundtrip(closure_bn, sigma, policy, explicit, mode, normalize=normalize)
    return correspondence.map_edges(decompiled.dag) == closure.edges


@dataclass
class RoundtripReport:
    """Human-facing summary of one roundtrip, for the CLI"""
    names: List[str]
    edges: List[Tuple[str, str]]
    correspondence: Dict[str, str]
    closure_edges: List[Tuple[str, str]] = field(default_factory=list)
    closure_match: bool = False

    def to_dict(self) -> Dict:
        return {
            "nodes": self.names,
            "edges": [list(e) for e in self.edges],
            "correspondence": self.correspondence,
            "closure_edges": [list(e) for e in self.closure_edges],
            "closure_match": self.closure_match,
        }


def roundtrip_report(bn: BayesNet, sigma: Sequence[int],
                     policy: MarginalizationPolicy = MarginalizationPolicy.INTERNAL,
                     explicit: Optional[Iterable[int]] = None,
                     mode: RegionMode = RegionMode.LAYER_LOCAL) -> RoundtripReport:
    """Decompiled edges named by the original variables they stand for"""
    decompiled, correspondence = roundtrip(bn, sigma, policy, explicit, mode)
    names = bn.names
    produced = correspondence.map_edges(decompiled.dag)
    closure = moral_closure(bn.dag, reference_order(bn.dag, sigma))
    return RoundtripReport(
        names=[names[correspondence.variable_of(node)] for node in decompiled.dag.nodes],
        edges=[(names[u], names[v]) for u, v in sorted(produced)],
        correspondence=correspondence.to_dict(decompiled, bn),
        closure_edges=[(names[u], names[v]) for u, v in sorted(closure.edges)],
        closure_match=produced == closure.edges,
    )
