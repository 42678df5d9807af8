from .coordinator import TrialCoordinator, TrialResult, TrialTask, run_trial
from .experiments import (
    ExperimentSummary,
    OrderingMode,
    node1_last_orderings,
    orderings_for,
    plan_table_experiment,
    run_table_experiment,
)
from .fixtures import chain_bn, example_bn, hmm_bn
from .lemma import LemmaReport, verify_lemma
from .roundtrip import (
    Correspondence,
    MarginalizationPolicy,
    TrialRecord,
    reference_order,
    resolve_marginalized,
    roundtrip,
    roundtrip_report,
    verify_idempotence,
    verify_moral_closure,
)

__all__ = [
    "Correspondence",
    "ExperimentSummary",
    "LemmaReport",
    "MarginalizationPolicy",
    "OrderingMode",
    "TrialCoordinator",
    "TrialRecord",
    "TrialResult",
    "TrialTask",
    "chain_bn",
    "example_bn",
    "hmm_bn",
    "node1_last_orderings",
    "orderings_for",
    "plan_table_experiment",
    "reference_order",
    "resolve_marginalized",
    "roundtrip",
    "roundtrip_report",
    "run_table_experiment",
    "run_trial",
    "verify_idempotence",
    "verify_lemma",
    "verify_moral_closure",
]
