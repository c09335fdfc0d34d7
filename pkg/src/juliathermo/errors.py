"""Exception hierarchy.

``InputError`` subclasses map to CLI exit code 1, ``NumericalError``
subclasses to exit code 2.
"""


class JuliaThermoError(Exception):
    exit_code = 1


class InputError(JuliaThermoError, ValueError):
    exit_code = 1


class NumericalError(JuliaThermoError, ArithmeticError):
    exit_code = 2


class ZeroLeadingCoefficient(InputError):
    pass


class AlphabetMismatch(InputError):
    pass


class OutOfFamily(InputError):
    pass


class BudgetExceeded(InputError):
    pass


class NoConvergence(NumericalError):
    """Refinement did not reach tolerance; the best value is carried along."""

    def __init__(self, message, value=None, error_estimate=None, level=None):
        super().__init__(message)
        self.value = value
        self.error_estimate = error_estimate
        self.level = level


class ConvergenceBudget(NumericalError):
    pass


class BranchFailure(NumericalError):
    pass


class BranchAmbiguity(NumericalError):
    pass


class SingularIntegrand(NumericalError):
    pass


class NewtonDivergence(NumericalError):
    def __init__(self, message, angles=None):
        super().__init__(message)
        self.angles = list(angles) if angles is not None else []


class RootCountMismatch(NumericalError):
    pass


class BracketFailure(NumericalError):
    pass


class IllConditionedFit(NumericalError):
    pass


class NonMonotoneSequence(UserWarning):
    """Emitted when a sequence being extrapolated is not monotone."""
