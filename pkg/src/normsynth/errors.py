"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Invalid configuration or parameters, raised before any computation starts."""


class DomainError(ValueError):
    """Input outside the mathematical domain of an operation."""
