"""Exception hierarchy.

Every error raised by the library derives from :class:`HypocoerciveError`,
itself a :class:`ValueError`, so callers that only care about "bad input"
can catch one type. The CLI maps all of these to exit status 2.
"""


class HypocoerciveError(ValueError):
    pass


class InvalidInputError(HypocoerciveError):
    """Malformed, non-finite or out-of-range input."""


class StabilityError(HypocoerciveError):
    """A drift matrix has an eigenvalue with non-positive real part."""


class SingularityError(HypocoerciveError):
    """A matrix that must be invertible is numerically singular."""


class HypothesisError(HypocoerciveError):
    """A structural hypothesis of a decay bound is violated."""


class OrderingError(HypocoerciveError):
    """Two covariances are not ordered in the Loewner sense."""


class DegenerateInputError(HypocoerciveError):
    """The requested ratio is undefined (e.g. f already at equilibrium)."""


class PropernessError(HypocoerciveError):
    """An intertwining operator fails the proper-range condition."""


class DomainError(HypocoerciveError):
    """A vector lies outside the domain an operation is defined on."""
