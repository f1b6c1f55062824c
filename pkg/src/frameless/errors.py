class ConfigError(ValueError):
    """Bad scene, camera path or simulation configuration."""
