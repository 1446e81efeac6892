"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Invalid physical parameters, labels or run settings."""


class NumericalContractError(ArithmeticError):
    """A numerical identity or precondition failed beyond its tolerance."""


class IntegratorError(RuntimeError):
    """Time integration produced an invalid state or could not meet tolerance.

    ``time`` is the sample or step time at which the failure was detected;
    ``partial`` optionally holds the trajectory sampled before the failure.
    """

    def __init__(self, message, time=None, partial=None):
        super().__init__(message)
        self.time = time
        self.partial = partial
