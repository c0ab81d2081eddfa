"""Exception types raised across the package.

The hierarchy is flat on purpose: callers usually either catch the base
class or let the error propagate, and the class name itself is the
diagnostic.  Validation problems (a model or request that can never be
served) and numerical problems (data that defeats a computation) both
derive from :class:`ArSelectError`.
"""


class ArSelectError(Exception):
    """Base class for every error raised by this package."""


# --- model validation -------------------------------------------------------

class NonStationaryError(ArSelectError):
    """Coefficients lie on or outside the stationarity boundary."""


class ZeroLeadCoefficientError(ArSelectError):
    """The highest-lag coefficient is zero, so the declared order is wrong."""


class NonPositiveVarianceError(ArSelectError):
    """The innovation variance must be strictly positive."""


class OutOfDomainError(ArSelectError):
    """A parameter falls outside the domain a formula is valid on."""


# --- population-level computations ------------------------------------------

class SingularYuleWalkerError(ArSelectError):
    """The Yule-Walker system for the autocovariances is numerically singular."""


class SingularGammaError(ArSelectError):
    """A population autocovariance matrix failed the conditioning guard."""


class InsufficientLagsError(ArSelectError):
    """An autocovariance table does not extend far enough for the request."""


class UnderspecifiedOrderError(ArSelectError):
    """The requested order is below the range a formula is defined on."""


class DegenerateHorizonError(ArSelectError):
    """Every projection coefficient vanishes at this horizon."""


# --- sample-based computations ----------------------------------------------

class TooFewObservationsError(ArSelectError):
    """The series is too short for the requested moment or fit."""


class SingularMomentError(ArSelectError):
    """A sample moment matrix is numerically singular."""


class NoValidStartError(ArSelectError):
    """No starting time passes the well-definedness probe for the APE sum."""


class LengthMismatchError(ArSelectError):
    """Two sequences that must align have different lengths."""


class SubsetTooLargeError(ArSelectError):
    """The lag window is too wide for exhaustive subset enumeration."""
