"""
Errors raised by geopersist.

Every error carries the process exit code the CLI uses for it:
  1 — input error (bad model file, bad flags, wrong model for an operation)
  2 — precondition error (an inequality a construction needs does not hold)
  3 — verification failure (a certified property does not hold)

Verifiers report failures as data; only constructions and lookups raise.
"""

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_PRECONDITION = 2
EXIT_VERIFICATION = 3


class GeoPersistError(Exception):
    """Base class for all geopersist errors."""

    exit_code = EXIT_INPUT


# ── Input errors ──────────────────────────────────────────────────────────────

class DomainError(GeoPersistError):
    """A point, circle or sample belongs to a different model."""


class ModelFileError(GeoPersistError):
    """A model or sample description file cannot be parsed."""


class ValidationError(GeoPersistError):
    """Numeric input is malformed (asymmetric matrix, non-finite length, ...)."""


class ArgumentError(GeoPersistError):
    """Arguments are out of order or out of range (e.g. p >= q)."""


class UnsupportedModel(GeoPersistError):
    """The operation has no implementation for this model kind."""


class NoAnalyticCatalogue(UnsupportedModel):
    """Metric graphs have no closed-form catalogue of geodesic circles."""


class HorizonError(GeoPersistError):
    """A parameter lies beyond the horizon the filtration was built to."""


class CensoredMismatch(GeoPersistError):
    """Censored bars can only be matched to censored bars."""


class ComplexTooLarge(GeoPersistError):
    """The dense oracle refuses complexes above its size limit."""


# ── Precondition errors ───────────────────────────────────────────────────────

class PreconditionFailed(GeoPersistError):
    """An inequality required by a construction does not hold.

    `inequality` is the violated condition written out, e.g. "1 < 3*0.3".
    """

    exit_code = EXIT_PRECONDITION

    def __init__(self, inequality: str, detail: str = ""):
        self.inequality = inequality
        message = f"precondition violated: {inequality}"
        if detail:
            message += f" ({detail})"
        super().__init__(message)


class DensityViolation(PreconditionFailed):
    """A loop point is not within s of any sample point."""


class NotInitiallyConstant(PreconditionFailed):
    """Sample classes near r0 do not span G (sample too sparse)."""

    def __init__(self, detail: str):
        super().__init__("class coordinates span G", detail)


# ── Verification failures ─────────────────────────────────────────────────────

class ConstructionFailed(GeoPersistError):
    """A constructed simplex is too large although preconditions held."""

    exit_code = EXIT_VERIFICATION
