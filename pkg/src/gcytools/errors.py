"""Exception types shared across the package."""


class ContractError(ValueError):
    """Operands violate a structural precondition (e.g. mismatched dimensions)."""


class DomainError(ValueError):
    """Input lies outside the domain of an operation (zero spinor, non-pure input, ...)."""


class NonRegularPointError(DomainError):
    """Moment-map differentials are dependent, or the action is not free at the point."""


class ReductionError(DomainError):
    """Pointwise reduction failed a consistency certificate."""


class ParseError(ValueError):
    """Malformed form literal or instance file. ``location`` points at the offending spot."""

    def __init__(self, message, location=None):
        self.location = location
        self.reason = message
        if location is not None:
            message = f"{message} (at {location})"
        super().__init__(message)
