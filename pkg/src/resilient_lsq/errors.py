"""Exception hierarchy shared by all modules."""


class ResilientLSQError(Exception):
    """Base class for errors raised by this package."""


class InvalidInputError(ResilientLSQError, ValueError):
    pass


class InconsistentSystemError(ResilientLSQError):
    """Normal equations G x = h have no solution within tolerance."""


class UnboundedError(ResilientLSQError):
    pass


class SolverFailureError(ResilientLSQError):
    pass


class NotRootedError(ResilientLSQError):
    pass


class NotResilientError(ResilientLSQError):
    pass


class CapExceededError(ResilientLSQError):
    """An exhaustive enumeration would exceed its configured size cap."""


class InsufficientNeighborsError(ResilientLSQError):
    pass


class NoIntersectionError(ResilientLSQError):
    """The hull-intersection program is infeasible."""


class InvalidConfigError(ResilientLSQError, ValueError):
    pass
