"""Exception hierarchy shared across the package.

Everything derives from :class:`KPSError` so callers can catch one base.
Validation failures also inherit :class:`ValueError`; resource guards get
their own branch so the CLI can map them to a distinct exit code.
"""


class KPSError(Exception):
    """Base class for all package-specific errors."""


class ValidationError(KPSError, ValueError):
    """Bad argument or inconsistent input."""


class GuardError(KPSError):
    """A desk-scale resource guard was exceeded."""


# -- field ------------------------------------------------------------------

class NotPrimePowerError(ValidationError):
    """Field size has two or more distinct prime factors."""


class UnsupportedFieldError(ValidationError):
    """Prime-power size p^m with odd p and m > 1; only p = 2 extensions
    and prime fields are implemented."""


class TooLargeError(GuardError):
    """Field size above the 2^16 cap."""


class OutOfRangeError(ValidationError):
    """Element encoding outside [0, q)."""


# -- codes ------------------------------------------------------------------

class LengthExceedsFieldError(ValidationError):
    """Reed-Solomon length n larger than the field size."""


class BadMessageLengthError(ValidationError):
    """Message vector does not have k symbols."""


class GuardExceededError(GuardError):
    """Exhaustive enumeration or subset scan above the configured guard."""


# -- kps --------------------------------------------------------------------

class TooManyNodesError(ValidationError):
    """More nodes requested than the q^k ID space can hold."""


class BadLengthError(ValidationError):
    """Symbol vector length does not match the expected M*n (or n)."""


class LengthMismatchError(ValidationError):
    """Two key-index IDs of different length were compared."""


class PoolTooLargeError(GuardError):
    """Key pool size M*n*q above the 2^24 cap."""


class UnknownNodeError(ValidationError):
    """Node index not present in the deployment registry."""


# -- sim --------------------------------------------------------------------

class PopulationTooSmallError(ValidationError):
    """Population cannot supply a disjoint pair plus r colluders."""


class BadConfigError(ValidationError):
    """Trial or experiment configuration is invalid."""
