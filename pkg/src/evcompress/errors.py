"""Exception taxonomy shared across the package."""


class EvCompressError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(EvCompressError, ValueError):
    """Input data violates a documented invariant (bad event, bad density, ...)."""


class CalibrationError(EvCompressError, ValueError):
    """Threshold calibration cannot proceed (e.g. empty density sample)."""


class ConfigurationError(EvCompressError, ValueError):
    """A configuration value is outside its documented domain."""


class ContractError(EvCompressError, ValueError):
    """A caller broke an operation precondition (mismatched lengths, wrong transform, ...)."""


class ParseError(EvCompressError, ValueError):
    """A text input could not be parsed; the message carries the line number."""


class FormatError(EvCompressError, ValueError):
    """A binary input is malformed; the message carries the byte offset."""


class MetricUndefinedError(EvCompressError, ValueError):
    """A metric has no defined value for the given inputs (e.g. one-sided empty mass)."""


class PipelineError(EvCompressError, RuntimeError):
    """A window failed during stream compression; the message carries the window index."""
