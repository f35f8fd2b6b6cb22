"""Exception hierarchy for aperylab."""


class AperyLabError(Exception):
    """Base class for all library errors."""


class NotPrime(AperyLabError, ValueError):
    pass


class LimitExceeded(AperyLabError, ValueError):
    """A modulus is outside the configured sanity limits."""


class NegativeValuation(AperyLabError, ArithmeticError):
    """Attempted to reduce a rational that is not p-integral."""


class NotInvertible(AperyLabError, ArithmeticError):
    pass


class PoleAtX(AperyLabError, ValueError):
    """The partial fraction sum has a term with vanishing denominator."""


class UnknownIdentity(AperyLabError, KeyError):
    pass


class UnknownCheck(AperyLabError, KeyError):
    pass


class PreconditionViolated(AperyLabError, ValueError):
    pass


class CostGated(PreconditionViolated):
    """The requested instance exceeds the cost cap and was not forced."""


class ChainConsistencyError(AperyLabError, AssertionError):
    """Suite results contradict the implication structure of the proofs."""


class BernoulliCacheError(AperyLabError, ValueError):
    """An on-disk Bernoulli table is malformed or fails the recurrence."""
