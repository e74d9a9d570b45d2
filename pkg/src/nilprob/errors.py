"""Exception hierarchy. Every error carries a short machine-readable ``code``."""


class NilprobError(Exception):
    code = "error"


class CapExceeded(NilprobError):
    code = "CapExceeded"


class InvalidElement(NilprobError):
    code = "InvalidElement"


class NotNormal(NilprobError):
    code = "NotNormal"


class NotPGroup(NilprobError):
    code = "NotPGroup"


class ArityMismatch(NilprobError):
    code = "ArityMismatch"


class ChainInvalid(NilprobError):
    code = "ChainInvalid"


class SizeCap(CapExceeded):
    code = "SizeCap"


class PreconditionFailed(NilprobError):
    code = "PreconditionFailed"


class NotCoprime(NilprobError):
    code = "NotCoprime"


class UnknownGroup(NilprobError):
    code = "UnknownGroup"


class NonIntegerResult(NilprobError):
    code = "NonIntegerResult"


class ParseError(NilprobError):
    code = "ParseError"

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ConfigError(NilprobError):
    """Invalid or incomplete command-line configuration."""
    code = "ConfigError"
