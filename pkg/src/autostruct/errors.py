"""Exception hierarchy shared by every autostruct module."""


class AutostructError(Exception):
    """Base class for all errors raised by this package."""


class NotPrime(AutostructError, ValueError):
    pass


class EvenPrimeUnsupported(AutostructError, ValueError):
    pass


class InvalidDigit(AutostructError, ValueError):
    pass


class AlphabetMismatch(AutostructError, ValueError):
    pass


class TrackOutOfRange(AutostructError, IndexError):
    pass


class BudgetExceeded(AutostructError, RuntimeError):
    pass


class NotInDomain(AutostructError, ValueError):
    pass


class BadGenerator(AutostructError, ValueError):
    pass


class PresentationMismatch(AutostructError, ValueError):
    pass


class UnknownSymbol(AutostructError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else "unknown symbol"


class ArityError(AutostructError, ValueError):
    pass


class NotASentence(AutostructError, ValueError):
    pass


class DuplicateName(AutostructError, ValueError):
    pass


class FormulaSyntaxError(AutostructError, SyntaxError):
    """Formula parse failure with 1-based line and column."""

    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{message} at line {line}, column {col}")
        self.msg = message
        self.line = line
        self.col = col

    def __str__(self):
        return f"{self.msg} at line {self.line}, column {self.col}"


class FormatError(AutostructError, ValueError):
    """Malformed .aut/.baut/.pres input; ``line`` is 1-based when known."""

    def __init__(self, message: str, line: int | None = None):
        text = message if line is None else f"line {line}: {message}"
        super().__init__(text)
        self.line = line
