"""Root exception types; the CLI maps them to exit codes."""


class ConfigError(Exception):
    """Raised when an experiment or synth configuration is unusable (exit code 2)."""

    pass


class DataError(Exception):
    """Raised when input data cannot be processed (exit code 3)."""

    pass


class DegenerateSignal(DataError):
    """Raised when a signal has no variation to analyse (flat or dropped contact)."""

    pass


class SignalTooShort(DataError):
    """Raised when a signal is shorter than an operation requires."""

    pass
