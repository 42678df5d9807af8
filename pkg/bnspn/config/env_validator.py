#!/usr/bin/env python3

"""
Environment Variable Validator for the BN/SPN compilation toolkit
Reads BNSPN_* settings (optionally from a .env file) and validates them
"""

import os
from dataclasses import dataclass
from datetime import datetime
from typing import Any, Callable, Dict, Optional

from dotenv import load_dotenv

from ..utils.errors import ConfigurationError
from ..utils.logger import get_logger, set_log_level

logger = get_logger("config")

REGION_MODES = ("layer-local", "global")
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")


@dataclass(frozen=True)
class Settings:
    """Validated runtime settings"""
    joint_cap: int = 2 ** 20
    tolerance: float = 1e-9
    region_mode: str = "layer-local"
    jobs: int = 1
    seed: int = 0
    cardinality: int = 2
    fixpoint_cap: int = 1000
    log_level: str = "WARNING"

    def to_dict(self) -> Dict[str, Any]:
        return {
            "joint_cap": self.joint_cap,
            "tolerance": self.tolerance,
            "region_mode": self.region_mode,
            "jobs": self.jobs,
            "seed": self.seed,
            "cardinality": self.cardinality,
            "fixpoint_cap": self.fixpoint_cap,
            "log_level": self.log_level,
        }


class EnvironmentValidator:
    """Validates BNSPN_* environment variables"""

    def __init__(self):
        self.optional_vars: Dict[str, Dict[str, Any]] = {
            "BNSPN_JOINT_CAP": {
                "description": "Largest assignment space a brute-force joint may enumerate",
                "type": int,
                "default": 2 ** 20,
                "field": "joint_cap",
                "validation": self._validate_positive,
            },
            "BNSPN_TOLERANCE": {
                "description": "Numeric tolerance for independence and normalization checks",
                "type": float,
                "default": 1e-9,
                "field": "tolerance",
                "validation": self._validate_tolerance,
            },
            "BNSPN_REGION_MODE": {
                "description": "Sum-region grouping: layer-local or global scope map",
                "type": str,
                "default": "layer-local",
                "field": "region_mode",
                "validation": self._choice_validator(REGION_MODES),
            },
            "BNSPN_JOBS": {
                "description": "Worker processes for enumeration sweeps",
                "type": int,
                "default": 1,
                "field": "jobs",
                "validation": self._validate_positive,
            },
            "BNSPN_SEED": {
                "description": "Seed for random CPT generation and sampling",
                "type": int,
                "default": 0,
                "field": "seed",
                "validation": self._validate_non_negative,
            },
            "BNSPN_CARDINALITY": {
                "description": "Variable cardinality used for enumerated networks",
                "type": int,
                "default": 2,
                "field": "cardinality",
                "validation": self._validate_cardinality,
            },
            "BNSPN_FIXPOINT_CAP": {
                "description": "Iteration cap for the simplification fixpoint",
                "type": int,
                "default": 1000,
                "field": "fixpoint_cap",
                "validation": self._validate_positive,
            },
            "BNSPN_LOG_LEVEL": {
                "description": "Log level for diagnostics on standard error",
                "type": str,
                "default": "WARNING",
                "field": "log_level",
                "validation": self._choice_validator(LOG_LEVELS),
            },
        }

        self.validation_results: Dict[str, Dict[str, Any]] = {}
        self.errors = []
        self.warnings = []

    def validate_all(self) -> Dict[str, Any]:
        """Validate all environment variables"""
        self.validation_results = {}
        self.errors = []
        self.warnings = []

        for var_name, config in self.optional_vars.items():
            self._validate_variable(var_name, config)

        validation_summary = {
            "success": len(self.errors) == 0,
            "timestamp": datetime.now().isoformat(),
            "total_variables": len(self.optional_vars),
            "errors": self.errors,
            "warnings": self.warnings,
            "variables": dict(self.validation_results),
        }

        if not validation_summary["success"]:
            logger.error("Environment validation failed", errors=self.errors)

        return validation_summary

    def _validate_variable(self, var_name: str, config: Dict[str, Any]):
        """Validate individual environment variable"""
        raw = os.environ.get(var_name)
        value: Any = config["default"] if raw in (None, "") else raw

        if isinstance(value, str) and config["type"] in (int, float):
            try:
                value = config["type"](value)
            except ValueError:
                self.errors.append({
                    "variable": var_name,
                    "error": f"Invalid {config['type'].__name__} value for {var_name}: {raw!r}",
                })
                return
        elif config["type"] is str:
            value = str(value)
            if var_name == "BNSPN_LOG_LEVEL":
                value = value.upper()

        validation_result = config["validation"](value)
        if not validation_result.get("valid"):
            self.errors.append({
                "variable": var_name,
                "error": f"Validation failed for {var_name}: {validation_result.get('error')}",
            })
            return

        if validation_result.get("warning"):
            self.warnings.append({"variable": var_name, "warning": validation_result["warning"]})
            logger.warning(f"Warning for {var_name}: {validation_result['warning']}")

        self.validation_results[var_name] = {
            "valid": True,
            "value": value,
            "from_environment": raw not in (None, ""),
            "description": config["description"],
        }

    def build_settings(self) -> Settings:
        """Validate and turn the environment into a Settings instance.

        Raises:
            ConfigurationError: when any variable fails validation
        """
        summary = self.validate_all()
        if not summary["success"]:
            details = "; ".join(e["error"] for e in summary["errors"])
            raise ConfigurationError(f"Invalid configuration: {details}")
        values = {
            self.optional_vars[name]["field"]: result["value"]
            for name, result in summary["variables"].items()
        }
        return Settings(**values)

    @staticmethod
    def _validate_positive(value: int) -> Dict[str, Any]:
        if value < 1:
            return {"valid": False, "error": "must be a positive integer"}
        return {"valid": True}

    @staticmethod
    def _validate_non_negative(value: int) -> Dict[str, Any]:
        if value < 0:
            return {"valid": False, "error": "must be non-negative"}
        return {"valid": True}

    @staticmethod
    def _validate_cardinality(value: int) -> Dict[str, Any]:
        if value < 2:
            return {"valid": False, "error": "cardinality must be at least 2"}
        if value > 4:
            return {"valid": True, "warning": "cardinality above 4 makes enumeration sweeps slow"}
        return {"valid": True}

    @staticmethod
    def _validate_tolerance(value: float) -> Dict[str, Any]:
        if not 0 < value < 1e-3:
            return {"valid": False, "error": "tolerance must lie in (0, 1e-3)"}
        return {"valid": True}

    @staticmethod
    def _choice_validator(choices) -> Callable[[str], Dict[str, Any]]:
        def validate(value: str) -> Dict[str, Any]:
            if value not in choices:
                return {"valid": False, "error": f"must be one of: {', '.join(choices)}"}
            return {"valid": True}
        return validate


env_validator = EnvironmentValidator()
_settings: Optional[Settings] = None


def validate_environment() -> Dict[str, Any]:
    """Validate environment variables - main entry point"""
    return env_validator.validate_all()


def get_settings(reload: bool = False) -> Settings:
    """Return process-wide settings, loading .env on first use"""
    global _settings
    if _settings is None or reload:
        load_dotenv()
        _settings = env_validator.build_settings()
        set_log_level(_settings.log_level)
    return _settings
