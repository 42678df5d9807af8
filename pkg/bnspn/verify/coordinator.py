import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Tuple

from ..decompiler.regions import RegionMode
from ..graph.dag import Ordering, is_topological, reversed_ordering
from ..models.bayesnet import family_member, random_cpts
from ..monitoring.trial_monitor import TrialMonitor, trial_monitor
from ..utils.errors import BnSpnError, error_handler
from ..utils.logger import get_logger
from .roundtrip import MarginalizationPolicy, TrialRecord, verify_idempotence, verify_moral_closure

logger = get_logger("verify.coordinator")


@dataclass(frozen=True)
class TrialTask:
    """One (family member, elimination order) pair; picklable for worker processes"""
    n: int
    bn_index: int
    sigma: Ordering
    policy: str = MarginalizationPolicy.INTERNAL.value
    seed: int = 0
    cardinality: int = 2
    explicit: Tuple[int, ...] = ()
    region_mode: str = RegionMode.LAYER_LOCAL.value
    check_idempotence: bool = False
    check_minimality: bool = False


@dataclass
class TrialResult:
    task: TrialTask
    record: TrialRecord
    execution_time: float
    success: bool
    error: Optional[str] = None


def run_trial(task: TrialTask) -> TrialRecord:
    """Build the family member with seeded CPTs and check its roundtrip"""
    dag = family_member(task.n, task.bn_index)
    bn = random_cpts(dag, [task.cardinality] * task.n, task.seed + task.bn_index)
    policy = MarginalizationPolicy(task.policy)
    mode = RegionMode(task.region_mode)
    explicit = task.explicit if policy is MarginalizationPolicy.EXPLICIT else None
    record = verify_moral_closure(bn, task.sigma, policy, task.bn_index, explicit, mode, task.check_minimality)
    if task.check_idempotence and record.closure_match:
        try:
            record.idempotent = verify_idempotence(
                bn, task.sigma, policy, task.seed + task.bn_index, explicit, mode, record.normalized
            )
        except BnSpnError as e:
            record.idempotent = False
            record.notes = f"idempotence: {type(e).__name__}: {e}"
    return record


def _timed_trial(task: TrialTask) -> Tuple[TrialRecord, float]:
    start_time = time.perf_counter()
    record = run_trial(task)
    return record, time.perf_counter() - start_time


def _reverse_topological(task: TrialTask) -> bool:
    try:
        return is_topological(family_member(task.n, task.bn_index), reversed_ordering(task.sigma))
    except BnSpnError:
        return False


class TrialCoordinator:
    """
    Runs verification trials serially or across worker processes, returning
    results in task order
    """

    def __init__(self, jobs: int = 1, monitor: Optional[TrialMonitor] = None):
        self.jobs = max(1, int(jobs))
        self.monitor = monitor or trial_monitor
        self.performance_metrics: Dict[str, Any] = {
            'total_trials': 0,
            'successful_trials': 0,
            'failed_trials': 0,
            'avg_execution_time': 0.0,
        }

    def _update_avg_execution_time(self, execution_time: float) -> None:
        total = self.performance_metrics['total_trials']
        current_avg = self.performance_metrics['avg_execution_time']
        self.performance_metrics['avg_execution_time'] = ((current_avg * (total - 1)) + execution_time) / total

    def _failed(self, task: TrialTask, error: Exception) -> TrialResult:
        error_handler.handle_error(error, {'n': task.n, 'bn_index': task.bn_index, 'sigma': list(task.sigma)})
        record = TrialRecord(
            n=task.n,
            bn_index=task.bn_index,
            sigma=tuple(task.sigma),
            sigma_is_reverse_topological=_reverse_topological(task),
            marginalization_policy=task.policy,
            closure_match=False,
            notes=f"{type(error).__name__}: {error}",
        )
        return TrialResult(task, record, 0.0, success=False, error=str(error))

    def _collect(self, task: TrialTask, outcome: Tuple[TrialRecord, float]) -> TrialResult:
        record, execution_time = outcome
        return TrialResult(task, record, execution_time, success=True)

    def execute(self, tasks: List[TrialTask]) -> List[TrialResult]:
        """Run every task; a crashing trial becomes a failed, non-matching result"""
        if not tasks:
            return []
        results: List[TrialResult] = []
        if self.jobs == 1:
            for task in tasks:
                try:
                    results.append(self._collect(task, _timed_trial(task)))
                except Exception as e:
                    results.append(self._failed(task, e))
        else:
            with ProcessPoolExecutor(max_workers=self.jobs) as executor:
                futures = [executor.submit(_timed_trial, task) for task in tasks]
                for task, future in zip(tasks, futures):
                    try:
                        results.append(self._collect(task, future.result()))
                    except Exception as e:
                        results.append(self._failed(task, e))
            logger.debug("Parallel sweep finished", jobs=self.jobs, trials=len(tasks))

        for result in results:
            self.performance_metrics['total_trials'] += 1
            self.performance_metrics['successful_trials' if result.success else 'failed_trials'] += 1
            self._update_avg_execution_time(result.execution_time)
            self.monitor.record_trial(
                result.task.n,
                result.task.bn_index,
                result.execution_time,
                bool(result.record.closure_match),
                result.record.must_pass,
            )
        return results

    def get_performance_metrics(self) -> Dict[str, Any]:
        return {**self.performance_metrics, 'monitor': self.monitor.get_summary()}
