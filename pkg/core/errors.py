"""
Errors - Lab Exception Hierarchy
Every failure raised by the lab derives from LabError
"""


class LabError(Exception):
    """Root of all lab errors"""


class ParameterError(LabError, ValueError):
    """A pre-condition on an operation's parameters does not hold"""


class BudgetError(LabError):
    """A computation would exceed its enumeration or stream-length budget"""


class UsageError(LabError):
    """The command line could not be turned into a valid run configuration"""


class ConvergenceError(LabError):
    """
    Power iteration did not converge within its iteration budget

    Attributes:
        best_estimate: the last NormEstimate reached before giving up
    """

    def __init__(self, message: str, best_estimate=None):
        super().__init__(message)
        self.best_estimate = best_estimate


class TriangleInequalityError(LabError):
    """|G| <= |R| + |Z| violated beyond tolerance - signals a norm bug"""
