"""Exception hierarchy.

Two families: :class:`DataError` for inputs that violate a contract
(bad shapes, zero rows, series too short) and :class:`NumericalError`
for computations that break down numerically. The CLI maps these to
exit codes 2 and 3.
"""


class SdpdError(Exception):
    """Base class for all package errors."""


class DataError(SdpdError, ValueError):
    """Input data or configuration violates a documented invariant."""


class NumericalError(SdpdError, ArithmeticError):
    """A numerical procedure failed or became ill-conditioned."""


class ZeroRow(DataError):
    pass


class BadSpec(DataError):
    pass


class TooShort(DataError):
    pass


class NotComputable(DataError):
    """Estimator cannot be formed for this data (e.g. VAR with T <= p)."""


class EmptySet(DataError):
    pass


class DegenerateMatrix(NumericalError):
    pass


class DegenerateModel(NumericalError):
    pass


class Explosion(NumericalError):
    pass


class NearSingular(NumericalError):
    pass


class Unidentified(NumericalError):
    pass


class NoRealRoot(NumericalError):
    pass


class DegenerateVariance(NumericalError):
    pass
