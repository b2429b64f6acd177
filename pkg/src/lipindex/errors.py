"""Exception types shared across the package."""


class LipIndexError(Exception):
    """Base class for all errors raised by ``lipindex``."""


class InputError(LipIndexError, ValueError):
    """An argument violates a documented precondition."""


class DomainError(LipIndexError, ValueError):
    """A point lies outside the domain where an operation is defined."""


class UnsupportedKindError(LipIndexError, TypeError):
    """The operation has no implementation for this kind of space."""


class GenerationError(LipIndexError, RuntimeError):
    """A random generator exceeded its configured limits."""


class NotFoundError(LipIndexError, LookupError):
    """A search exhausted its budget without finding a witness.

    This is never a proof of absence. ``best`` holds the best candidate seen.
    """

    def __init__(self, msg, best=None):
        super().__init__(msg)
        self.best = best


class ParseError(InputError):
    """A space spec or input file could not be parsed.

    ``position`` is the 0-based character offset of the problem.
    """

    def __init__(self, msg, text="", position=0):
        self.text = text
        self.position = position
        pointer = ""
        if text:
            pointer = f"\n  {text}\n  {' ' * position}^"
        super().__init__(f"{msg} (at position {position}){pointer}")
