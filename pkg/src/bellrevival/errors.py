class ConfigError(ValueError):
    """Invalid run configuration (CLI exit code 2)."""


class NumericalError(ArithmeticError):
    """A numerical step failed at a specific parameter point (CLI exit code 3)."""
