"""Error taxonomy shared by all modules."""


class WellposedError(Exception):
    """Base class for all library errors."""


class DimensionError(WellposedError):
    """Vector or matrix dimensions do not match the owning system."""


class DomainError(WellposedError):
    """A scalar argument is outside its documented domain."""


class SpectrumError(WellposedError):
    """A resolvent argument lies on (or left of) the spectrum."""


class StabilityError(WellposedError):
    """The spectrum violates the exponential stability requirement."""


class SchemaError(WellposedError):
    """A system description or CSV file is malformed."""


class CertificateIncompleteError(WellposedError):
    """A certificate needs a tail majorant the system does not declare."""


class PreconditionError(WellposedError):
    """An operation's stated precondition does not hold."""


class HorizonError(WellposedError):
    """A time window is too short for the requested step."""


class InternalError(WellposedError):
    """A state the implementation guards as impossible was reached."""
