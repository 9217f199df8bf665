"""Exception hierarchy. Everything raised on bad domain input derives from NalinError."""


class NalinError(Exception):
    """Base class for domain errors (the CLI maps these to exit code 1)."""


class GroupAxiomError(NalinError):
    pass


class UnknownGroup(NalinError):
    pass


class NotNormal(NalinError):
    pass


class NonAbelian(NalinError):
    pass


class Unsupported(NalinError):
    pass


class InvariantFailure(NalinError):
    pass


class NonIntegerMultiplicity(NalinError):
    pass


class HypothesisViolated(NalinError):
    pass


class BudgetExceeded(NalinError):
    pass


class MeanNotZero(NalinError):
    pass


class NotFolded(NalinError):
    pass


class DimOne(NalinError):
    pass


class NoPartner(NalinError):
    pass


class TooManyDistinctVars(NalinError):
    pass


class ShapeMismatch(NalinError):
    pass


class ParseError(NalinError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
