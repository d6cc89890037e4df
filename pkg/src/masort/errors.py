"""Exception hierarchy shared by every module of the package."""


class MasortError(Exception):
    """Base class for all errors raised by masort."""


class InvalidInputError(MasortError, ValueError):
    """An argument violates an operation's preconditions."""


class ConfigurationError(MasortError, ValueError):
    """A configuration value lies outside its admissible range."""


class SequencingError(MasortError, RuntimeError):
    """Frames were fed to a stateful object out of order."""


class ParseError(MasortError, ValueError):
    """A file line could not be parsed.

    ``line`` is the 1-based line number when known.
    """

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        super().__init__(where + message)


class SchemaError(ParseError):
    """A file parsed but does not follow the declared schema."""


class AlignmentError(MasortError, ValueError):
    """Two input files disagree about which records exist."""


class UndefinedMetricError(MasortError, ValueError):
    """A metric is undefined for the given input (e.g. empty ground truth)."""
