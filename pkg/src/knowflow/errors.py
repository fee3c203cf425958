"""Exception hierarchy shared by every knowflow module."""


class KnowflowError(Exception):
    """Base class; ``category`` is what the CLI prints on failure."""

    category = "error"


class InvalidPairError(KnowflowError, ValueError):
    category = "invalid-pair"


class ParseError(KnowflowError, ValueError):
    category = "parse"

    def __init__(self, message, source=None, line=None):
        self.source = source
        self.line = line
        where = ""
        if source is not None:
            where = f"{source}"
        if line is not None:
            where = f"{where}:{line}" if where else f"line {line}"
        super().__init__(f"{where}: {message}" if where else message)


class ConflictError(ParseError):
    category = "conflict"


class SchemaError(KnowflowError, ValueError):
    category = "schema"

    def __init__(self, message, field=None):
        self.field = field
        super().__init__(f"field {field!r}: {message}" if field else message)


class UndefinedScoreError(KnowflowError, ZeroDivisionError):
    category = "undefined-score"


class UnknownPeriodError(KnowflowError, KeyError):
    category = "unknown-period"

    def __str__(self):
        return str(self.args[0]) if self.args else "unknown period"


class ConvergenceError(KnowflowError, RuntimeError):
    category = "convergence"

    def __init__(self, message, residual=None, iterations=None):
        self.residual = residual
        self.iterations = iterations
        super().__init__(message)


class NotApplicableError(KnowflowError, ValueError):
    category = "not-applicable"


class SynthSpecError(KnowflowError, ValueError):
    category = "synth-spec"


class ConfigError(KnowflowError, ValueError):
    category = "config"
