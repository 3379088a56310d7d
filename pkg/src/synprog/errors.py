"""Exception hierarchy shared by every synprog module."""


class SynprogError(Exception):
    """Base class; ``diagnostics`` carries whatever was measured before failing."""

    def __init__(self, message="", diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class PreconditionViolated(SynprogError, ValueError):
    pass


class NonCoprimeModuli(PreconditionViolated):
    pass


class NonCoprimeX(PreconditionViolated):
    pass


class NotPrime(PreconditionViolated):
    pass


class ElementNotInLattice(PreconditionViolated):
    pass


class GuardExceeded(SynprogError):
    """A configurable feasibility bound was hit (exit status 3 on the CLI)."""


class LatticeTooLarge(GuardExceeded):
    pass


class GrowthGuardExceeded(GuardExceeded):
    pass


class WindowError(SynprogError):
    pass


class EmptyWindow(WindowError):
    pass


class NotSyndeticInWindow(WindowError):
    pass


class NotTwoSyndetic(NotSyndeticInWindow):
    pass


class OutOfWindow(WindowError):
    pass


class SetFileError(WindowError):
    """Malformed set file."""


class RuleSyntaxError(SynprogError, ValueError):
    def __init__(self, message, offset):
        super().__init__(f"{message} at offset {offset}", {"offset": offset})
        self.offset = offset


class Inconclusive(SynprogError):
    """A finite window could not settle the question; never a disproof."""


class WindowTooSmall(Inconclusive):
    pass


class NotFoundInWindow(Inconclusive):
    pass


class TriveniOrderExhausted(SynprogError):
    """Growth demanded past |T(l) \\ {1}|: the finite lattice has no element left."""
