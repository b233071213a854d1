"""Exception hierarchy shared by every module."""


class PrevisionError(Exception):
    """Base class for errors raised by the engine."""


class InputError(PrevisionError, ValueError):
    """Malformed or out-of-range input (bad dimensions, unparsable numbers...)."""


class ContractError(PrevisionError):
    """A precondition about the market itself failed.

    Raised for instance when a hedging price is requested for an incoherent
    market; the offending :class:`~prevision.book.Book` is attached.
    """

    def __init__(self, message, book=None):
        super().__init__(message)
        self.book = book


class EngineDefect(PrevisionError, AssertionError):
    """Two independent routes disagreed. Never expected; always a bug."""
