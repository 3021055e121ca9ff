"""Exception hierarchy shared by every proxcert module."""


class ProxCertError(Exception):
    """Base class for all errors raised by proxcert."""


class InvalidSpecError(ProxCertError, ValueError):
    """Malformed problem data (matrix shapes, spectra, labels, boxes)."""


class InvalidArgumentError(ProxCertError, ValueError):
    """A scalar argument is outside its admissible range."""


class InvalidConstantsError(ProxCertError, ValueError):
    """Curvature / PL constants are inconsistent (e.g. mu > L, eta*t > 1)."""


class DomainError(ProxCertError, ValueError):
    """A point lies outside dom g."""


class UnsupportedStructureError(ProxCertError, TypeError):
    """The operation needs a separable nonsmooth term."""


class NumericError(ProxCertError, ArithmeticError):
    """A non-finite value appeared where a finite one is required."""


class StartPointError(ProxCertError, ValueError):
    """The objective is not finite at the starting point."""


class SingularCoefficientError(ProxCertError, ZeroDivisionError):
    """The refined descent coefficient t / (2 (1 - mu t)) is unbounded."""


class DegenerateInterpolationError(ProxCertError, ZeroDivisionError):
    """The interpolation inequality has a vanishing L - mu denominator."""


class IncompleteRecordError(ProxCertError, ValueError):
    """A trace record lacks a field required by a check."""


class ConsistencyError(ProxCertError, ValueError):
    """A trace does not belong to the problem it is checked against."""


class DegenerateStartError(ProxCertError, ValueError):
    """The starting point is already stationary, so ratios are undefined."""


class BracketError(ProxCertError, ValueError):
    """A golden-section bracket does not enclose a minimizer."""
