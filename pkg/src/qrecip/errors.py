"""Exception hierarchy shared by both evaluation backends."""


class QSeriesError(Exception):
    """Base class for every error raised by qrecip."""


class DivisionByZeroSeries(QSeriesError, ZeroDivisionError):
    """Divisor has no nonzero coefficient through its truncation order."""


class OrderExceeded(QSeriesError):
    """A coefficient was requested above the order the series guarantees."""


class PochInfiniteZero(QSeriesError):
    """An infinite q-product has an exactly vanishing factor."""


class InadmissibleSeries(QSeriesError):
    """Term q-orders do not diverge, so truncated summation is undefined."""

    def __init__(self, message, direction=None):
        super().__init__(message)
        self.direction = direction


class PoleInTerm(QSeriesError):
    """A denominator factor vanishes exactly inside the summation range."""


class NotAPerfectSquare(QSeriesError, ValueError):
    pass


class TerminationRequired(QSeriesError):
    """The terminating representation was requested without a q^-m parameter."""


class SingularLimit(QSeriesError):
    """A parameter sent to zero appears with a negative power outside a scaled Pochhammer."""


class ConstraintViolation(QSeriesError, ValueError):
    pass


class NoConvergence(QSeriesError):
    pass


class NonFinite(QSeriesError, ArithmeticError):
    pass


class NoAdmissibleSample(QSeriesError):
    pass


class UnknownIdentity(QSeriesError, KeyError):
    pass
