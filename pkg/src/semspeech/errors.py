"""Exception types shared across the package."""


class SemspeechError(Exception):
    """Base class for all package errors."""


class InvalidArgumentError(SemspeechError, ValueError):
    pass


class TooShortError(SemspeechError, ValueError):
    """Utterance shorter than a single analysis frame."""


class StateError(SemspeechError, RuntimeError):
    pass


class DegeneratePowerError(SemspeechError, ValueError):
    """A symbol vector with zero energy cannot be power normalized."""


class PreconditionError(SemspeechError, ValueError):
    pass


class NearSingularChannelError(SemspeechError, ValueError):
    pass


class UndefinedRateError(SemspeechError, ValueError):
    """Error rate requested against an empty reference."""


class CheckpointError(SemspeechError):
    pass


class MagicMismatchError(CheckpointError):
    pass


class VersionMismatchError(CheckpointError):
    pass


class TruncatedCheckpointError(CheckpointError):
    pass


class DivergenceError(SemspeechError, RuntimeError):
    """Training loss became non-finite."""


class DatasetError(SemspeechError):
    def __init__(self, message, failures=()):
        super().__init__(message)
        self.failures = list(failures)
