from .env_validator import Settings, get_settings, validate_environment

__all__ = ["Settings", "get_settings", "validate_environment"]
