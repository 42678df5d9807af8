from .trial_monitor import TrialMetric, TrialMonitor, trial_monitor

__all__ = ["TrialMetric", "TrialMonitor", "trial_monitor"]
