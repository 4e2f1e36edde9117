"""Exception types shared across the toolkit.

Every error that crosses the service boundary carries a short machine
kind (used as the ``error.kind`` field on the wire).
"""


class AsteditError(Exception):
    kind = "ERROR"


class SpecSyntaxError(AsteditError):
    """Malformed language-specification source."""

    kind = "SPEC_SYNTAX"

    def __init__(self, message, line=None, col=None):
        self.message = message
        self.line = line
        self.col = col
        where = "" if line is None else f" at line {line}, col {col}"
        super().__init__(f"{message}{where}")


class UnknownClass(AsteditError):
    kind = "UNKNOWN_CLASS"


class InvalidSpec(AsteditError):
    kind = "INVALID_SPEC"


class NotAPlaceholder(AsteditError):
    kind = "NOT_A_PLACEHOLDER"


class InvalidChoice(AsteditError):
    kind = "INVALID_CHOICE"


class LexicalError(AsteditError):
    """Terminal text or source text failed lexical validation."""

    kind = "LEXICAL"

    def __init__(self, message, span=None):
        self.span = span
        super().__init__(message)


class EmptyBuffer(AsteditError):
    kind = "EMPTY_BUFFER"


class TypeMismatch(AsteditError):
    kind = "TYPE_MISMATCH"


class IsRoot(AsteditError):
    kind = "IS_ROOT"


class UnknownNode(AsteditError):
    kind = "UNKNOWN_NODE"


class IllegalAlignment(AsteditError):
    kind = "ILLEGAL_ALIGNMENT"


class NoRule(AsteditError):
    kind = "NO_RULE"


class ParseError(AsteditError):
    """Concrete-syntax parse failure with a source span."""

    kind = "PARSE"

    def __init__(self, message, span=(0, 0)):
        self.span = span
        super().__init__(f"{message} at {span[0]}..{span[1]}")
        self.message = message


class ClassMismatch(AsteditError):
    """Text parsed, but as a construct of the wrong syntactic category."""

    kind = "CLASS_MISMATCH"


class IncompleteDocument(AsteditError):
    kind = "INCOMPLETE"


class UnknownName(AsteditError):
    kind = "UNKNOWN_NAME"


class StoreError(AsteditError):
    kind = "IO"


class ExternalFailure(AsteditError):
    kind = "EXTERNAL"

    def __init__(self, exit_code, output):
        self.exit_code = exit_code
        self.output = output
        super().__init__(f"external command failed with exit code {exit_code}")


class ProtocolError(AsteditError):
    kind = "PROTOCOL"
