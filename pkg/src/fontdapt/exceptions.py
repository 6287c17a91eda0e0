"""Package-level error types shared by training and the CLI."""


class DivergenceError(FloatingPointError):
    """Training loss became non-finite (learning rate too high?)."""


class ProtocolError(ValueError):
    """Training protocol violated (e.g. supervised stage fed non-synthetic data)."""
