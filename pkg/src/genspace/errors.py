"""Exception hierarchy. Every class carries the CLI exit code it maps to."""


class GenspaceError(Exception):
    exit_code = 1


class CorpusError(GenspaceError):
    exit_code = 3


class UnknownTile(CorpusError):
    exit_code = 4

    def __init__(self, char, line, column, source=None):
        where = f"{source}:" if source else ""
        super().__init__(f"{where}line {line}, column {column}: unknown tile {char!r}")
        self.char = char
        self.line = line
        self.column = column


class MalformedRecord(CorpusError):
    exit_code = 5


class UnmappedTile(CorpusError):
    exit_code = 6


class InsufficientLevels(CorpusError):
    exit_code = 7

    def __init__(self, generator, available, required):
        super().__init__(
            f"generator {generator!r} has {available} levels, {required} required")
        self.generator = generator


class ConfigError(GenspaceError):
    exit_code = 8


class DomainMismatch(GenspaceError):
    exit_code = 9


class NetworkError(GenspaceError):
    exit_code = 10


class ShapeMismatch(NetworkError):
    exit_code = 11


class ChannelMismatch(ShapeMismatch):
    exit_code = 12


class ShapeUnderflow(NetworkError):
    exit_code = 13


class StaleCache(NetworkError):
    exit_code = 14


class NonFiniteLoss(NetworkError):
    exit_code = 15

    def __init__(self, epoch, loss):
        super().__init__(f"non-finite training loss {loss!r} at epoch {epoch}")
        self.epoch = epoch


class DegenerateData(GenspaceError):
    exit_code = 16


class ValidationError(GenspaceError):
    exit_code = 17


class AlignmentError(ValidationError):
    exit_code = 18


class LengthMismatch(ValidationError):
    exit_code = 19


class TooFewSamples(ValidationError):
    exit_code = 20


class NoCompletedRuns(GenspaceError):
    exit_code = 21
