"""Exception types shared across the package.

Every error raised by the library derives from SpiketrackError so callers
(and the CLI) can distinguish validation failures from genuine bugs.
"""


class SpiketrackError(Exception):
    """Base class for all errors raised by spiketrack."""


class FormatError(SpiketrackError):
    """Malformed file: bad magic bytes, unsupported version, bad header."""


class TruncationError(SpiketrackError):
    """File payload shorter than the header promises."""

    def __init__(self, message: str, byte_offset: int):
        super().__init__(f"{message} (at byte offset {byte_offset})")
        self.byte_offset = byte_offset


class ValidationError(SpiketrackError):
    """Record-level contract violation (out-of-bounds pixel, bad polarity)."""


class OrderingError(SpiketrackError):
    """Events presented out of time order where sorted input is required."""


class ConsistencyError(SpiketrackError):
    """Header and payload disagree (count, time span)."""


class ParameterError(SpiketrackError):
    """Invalid configuration or argument value."""


class CalibrationError(SpiketrackError):
    """Bootstrap calibration could not establish reference positions."""


class AssociationError(SpiketrackError):
    """A detection could not be associated during calibration."""


class ConfigurationError(SpiketrackError):
    """A requested backend or option is not available."""


class ContractError(SpiketrackError):
    """A registered external component violated its interface contract."""


class DegenerateInputError(SpiketrackError):
    """Input admits no well-defined answer (e.g. rank-deficient alignment)."""


class SearchFailureError(SpiketrackError):
    """A probing motion exhausted its travel budget without triggering."""


class InputError(SpiketrackError):
    """Mismatched or inconsistent inputs to an evaluation routine."""
