"""Exception types shared across the simulator.

The CLI maps these to distinct exit codes: bad usage is 1, ConfigError is 2,
SimulationContractError is 3.
"""


class ConfigError(ValueError):
    """Invalid configuration value or combination; names the offending key."""


class SimulationContractError(RuntimeError):
    """An internal invariant was violated (illegal command, state corruption)."""


class TraceParseError(ValueError):
    """Malformed trace input. Carries the byte offset or line number."""

    def __init__(self, message: str, offset: int | None = None):
        super().__init__(message)
        self.offset = offset
