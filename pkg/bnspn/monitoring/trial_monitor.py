import time
from collections import defaultdict, deque
from dataclasses import dataclass
from typing import Any, Dict

import numpy as np


@dataclass
class TrialMetric:
    """Wall time and outcome of one verification trial"""
    n: int
    bn_index: int
    duration: float
    matched: bool
    must_pass: bool
    timestamp: float

    def to_dict(self) -> Dict[str, Any]:
        return {
            'n': self.n,
            'bn_index': self.bn_index,
            'duration': self.duration,
            'matched': self.matched,
            'must_pass': self.must_pass,
            'timestamp': self.timestamp,
        }


class TrialMonitor:
    """
    Timing and outcome tracker for verification sweeps
    """

    def __init__(self, max_history_size: int = 10000):
        self.trial_metrics: deque = deque(maxlen=max_history_size)
        self.counts: Dict[str, int] = defaultdict(int)
        self.monitoring_enabled = True

    def record_trial(self, n: int, bn_index: int, duration: float, matched: bool, must_pass: bool = False):
        if not self.monitoring_enabled:
            return
        self.trial_metrics.append(TrialMetric(n, bn_index, duration, matched, must_pass, time.time()))
        self.counts['trials'] += 1
        if not matched:
            self.counts['mismatches'] += 1
            if must_pass:
                self.counts['must_pass_failures'] += 1

    def get_summary(self) -> Dict[str, Any]:
        durations = [m.duration for m in self.trial_metrics]
        if not durations:
            return {'count': 0, 'mismatches': 0, 'must_pass_failures': 0}
        return {
            'count': self.counts['trials'],
            'mismatches': self.counts['mismatches'],
            'must_pass_failures': self.counts['must_pass_failures'],
            'mean': float(np.mean(durations)),
            'p50': float(np.percentile(durations, 50)),
            'p95': float(np.percentile(durations, 95)),
            'max': float(np.max(durations)),
        }

    def reset(self):
        self.trial_metrics.clear()
        self.counts.clear()


# Global monitor instance
trial_monitor = TrialMonitor()
