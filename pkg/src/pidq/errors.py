class PIDQError(Exception):
    """Base class for errors raised by pidq."""


class ValidationError(PIDQError, ValueError):
    """Input data failed a structural or normalization check."""


class ArgumentError(PIDQError, ValueError):
    """An argument combination is not meaningful."""


class InfeasibleError(PIDQError, ValueError):
    """Marginal constraints admit no joint distribution."""


class StaleSolutionError(PIDQError, ValueError):
    """A supplied optimizer solution does not satisfy the marginals it is paired with."""


class MissingMarginalError(PIDQError, ValueError):
    """The unlabeled modality marginal p(x1, x2) is needed but absent."""
