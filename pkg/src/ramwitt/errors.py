"""Exception hierarchy with stable error codes.

Every error raised by the library carries a short machine-readable ``code``
so the CLI can surface failures without string matching.
"""

from __future__ import annotations


class RamwittError(Exception):
    """Base class for all library errors."""

    code = "ERROR"

    def __init__(self, message: str = ""):
        super().__init__(message or self.code)


class ConfigError(RamwittError):
    """Invalid ring or run configuration."""

    code = "CONFIG"


class RingMismatch(RamwittError):
    """Operands belong to different rings."""

    code = "RING_MISMATCH"


class Indivisible(RamwittError):
    """Exact division by a power of the uniformizer is impossible."""

    code = "INDIVISIBLE"


class InsufficientPrecision(RamwittError):
    """The requested quantity is not determined at the available precision."""

    code = "INSUFFICIENT_PRECISION"


class NotUnit(RamwittError):
    """Inversion of a non-unit was requested."""

    code = "NOT_UNIT"


class ConstantTerm(RamwittError):
    """Series composition requires the inner series to vanish at 0."""

    code = "CONSTANT_TERM"


class InexactDivision(RamwittError):
    """Series division left a nonzero remainder at the available precision."""

    code = "INEXACT"


class IntegralityFailure(RamwittError):
    """A division that theory guarantees to be exact failed.

    Raised by the universal-polynomial solver and the group-law recursion;
    always indicates an implementation bug, never bad user input.
    """

    code = "INTEGRALITY_FAILURE"


class BadFrobeniusSeries(RamwittError):
    """A Frobenius series must satisfy f = pi*T mod deg 2 and f = T^q mod pi."""

    code = "BAD_FROBENIUS_SERIES"


class Nonconvergence(RamwittError):
    """A degree step of a successive-approximation solver had no solution."""

    code = "NONCONVERGENCE"


class UndecidableAtPrecision(RamwittError):
    """A unit test on delta(d) could not be decided at current precision."""

    code = "UNDECIDABLE_AT_PRECISION"


class WitnessFailure(RamwittError):
    """An exactness certificate failed to verify; retry with larger truncation."""

    code = "WITNESS_FAILURE"


class DepthExceedsTower(RamwittError):
    """Requested tilt depth exceeds the available tower height."""

    code = "DEPTH_EXCEEDS_TOWER"


class InsufficientDepth(RamwittError):
    """theta needs more tilt depth than the input carries."""

    code = "INSUFFICIENT_DEPTH"


class NotEtale(RamwittError):
    """Operation requires an etale phi-module (unit structure determinant)."""

    code = "NOT_ETALE"


class NonMultiple(RamwittError):
    """Base change requires the target degree to be a multiple of the source."""

    code = "NON_MULTIPLE"


class IntegrityError(RamwittError):
    """A persisted artifact (e.g. polynomial cache) failed its checksum."""

    code = "INTEGRITY"
