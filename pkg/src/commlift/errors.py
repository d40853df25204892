"""Exception hierarchy.

Every domain error carries a stable ``code`` (the class name) so the CLI can
emit it in structured error JSON.
"""


class CommliftError(Exception):
    @property
    def code(self) -> str:
        return type(self).__name__


class RingMismatch(CommliftError, ValueError):
    pass


class NotAUnit(CommliftError, ZeroDivisionError):
    pass


class NoSuchRoot(CommliftError, ValueError):
    pass


class NotInvertible(CommliftError, ValueError):
    pass


class ScalarModM(CommliftError, ValueError):
    pass


class FieldTooSmall(CommliftError, ValueError):
    pass


class DeterminantMismatch(CommliftError, ValueError):
    pass


class NotRegularSemisimple(CommliftError, ValueError):
    pass


class EigenvalueMismatch(CommliftError, ValueError):
    pass


class HypothesisViolated(CommliftError, ValueError):
    pass


class NotCovered(HypothesisViolated):
    """Scalar-mod-m target whose residue is not a primitive n-th root of 1."""


class DerivativeNotSurjective(CommliftError, ArithmeticError):
    pass


class InconsistentCongruence(CommliftError, ArithmeticError):
    pass


class NoBasePairFound(CommliftError, RuntimeError):
    pass


class BudgetExceeded(CommliftError, RuntimeError):
    pass


class PreconditionUnverified(CommliftError, RuntimeError):
    pass


class NotFound(CommliftError, LookupError):
    pass


class FormatError(CommliftError, ValueError):
    pass
