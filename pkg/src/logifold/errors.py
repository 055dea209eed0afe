"""Exception hierarchy shared across the library."""


class LogifoldError(Exception):
    """Base class for all library errors."""


class DomainError(LogifoldError):
    """A mathematical precondition is violated (boundary point, support
    mismatch, incompatible label sets, missing truth labels, ...)."""


class ValidationError(LogifoldError):
    """Input data failed structural validation (bundles, configs)."""


class NoDataError(LogifoldError):
    """An operation received an empty batch; distinct from a zero result."""


class PropertyViolation(LogifoldError):
    """A randomized law-verification suite found a counterexample."""


class BoundWarning(UserWarning):
    """A threshold exceeds the agreement bound; semantics weaken but the
    computation proceeds."""
