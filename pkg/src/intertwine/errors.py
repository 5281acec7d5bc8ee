"""Exception hierarchy shared by every module."""


class IntertwineError(Exception):
    pass


class InvalidArgument(IntertwineError, ValueError):
    pass


class UnsupportedDimension(InvalidArgument):
    pass


class PoleError(IntertwineError, ValueError):
    """Evaluation requested at (or numerically indistinguishable from) the pole."""


class QuadratureError(IntertwineError, ArithmeticError):
    pass


class ConvergenceError(QuadratureError):
    """Adaptive refinement hit its budget. ``best`` holds the last estimate."""

    def __init__(self, msg, best=None, err=None):
        super().__init__(msg)
        self.best = best
        self.err = err


class EvaluationError(QuadratureError):
    pass


class DivergenceError(QuadratureError):
    pass


class PrecisionError(QuadratureError):
    pass


class BlockedPrecondition(IntertwineError):
    """A runtime self-check that gates an operation did not pass."""


class UsageError(IntertwineError, ValueError):
    pass
