class ValidationError(ValueError):
    """Input violates a documented invariant (norm, hermiticity, ...)."""


class ContractError(ValueError):
    """Operation called on an object outside its declared domain."""


class ConsistencyError(RuntimeError):
    """Two independent computations of the same quantity disagree."""
