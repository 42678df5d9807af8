"""
Exception hierarchy and error bookkeeping for the bnspn pipeline.
"""

from datetime import datetime
from typing import Any, Dict, List, Optional

from .logger import get_logger

logger = get_logger("errors")


class BnSpnError(ValueError):
    """Base class for every error raised by the pipeline"""


class GraphError(BnSpnError):
    """Invalid DAG, ordering, or node-set arguments"""


class ModelError(BnSpnError):
    """A BayesNet, CPT, joint table or circuit violates its invariants"""


class ModelFormatError(BnSpnError):
    """Malformed BN or SPN JSON input"""


class CapacityError(BnSpnError):
    """Assignment space exceeds the configured cap"""


class CompilationError(BnSpnError):
    """BN to SPN compilation failed"""


class DecompilationError(BnSpnError):
    """SPN to BN decompilation failed"""


class ConfigurationError(BnSpnError):
    """Environment configuration is invalid"""


class ErrorHandler:
    """Counts errors by type and keeps the most recent records"""

    def __init__(self, max_records: int = 100):
        self.error_counts: Dict[str, int] = {}
        self.last_errors: List[Dict[str, Any]] = []
        self.max_records = max_records

    def handle_error(self, error: Exception, context: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
        """Record an error and log it with context.

        Args:
            error: The exception that was raised
            context: Extra fields describing where it happened

        Returns:
            The stored error record
        """
        error_type = type(error).__name__
        self.error_counts[error_type] = self.error_counts.get(error_type, 0) + 1

        error_record = {
            "error_type": error_type,
            "message": str(error),
            "timestamp": datetime.now().isoformat(),
            "context": context or {},
            "count": self.error_counts[error_type],
        }

        self.last_errors.append(error_record)
        if len(self.last_errors) > self.max_records:
            self.last_errors.pop(0)

        logger.debug(
            f"Error recorded: {error_type}",
            error_message=str(error),
            context=context or {},
            count=self.error_counts[error_type],
        )
        return error_record

    def get_error_summary(self) -> Dict[str, Any]:
        return {
            "total_errors": sum(self.error_counts.values()),
            "error_types": dict(self.error_counts),
            "recent_errors": self.last_errors[-10:],
        }

    def reset(self) -> None:
        self.error_counts.clear()
        self.last_errors.clear()


error_handler = ErrorHandler()


def handle_error(error: Exception, context: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    """Handle error - main entry point"""
    return error_handler.handle_error(error, context)
