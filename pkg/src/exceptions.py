"""Error kinds raised by the RAIN library.

Outcomes that are part of normal operation (a DP violation report, a rejected MAC tag,
a halted round) are returned as values. These exceptions cover misuse and broken inputs.
"""


class RainError(Exception):
    """Base class for all RAIN errors."""


class DomainError(RainError, ValueError):
    """An input lies outside the domain an operation is defined on."""


class ProtocolError(RainError, RuntimeError):
    """A two-party protocol precondition was violated (triple reuse, headroom, mismatch)."""


class IntegrityError(RainError):
    """Integrity material is inconsistent (wrong-round key, corrupt transcript dump)."""


class ConfigError(RainError, ValueError):
    """An experiment configuration failed validation."""


class FatalAbortError(IntegrityError):
    """A MAC abort under the halt policy when the experiment treats aborts as fatal."""

    def __init__(self, message: str, round_index: int, batch_index: int):
        super().__init__(message)
        self.round_index = round_index
        self.batch_index = batch_index
