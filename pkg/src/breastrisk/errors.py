"""Exception taxonomy shared across the package."""


class BreastRiskError(Exception):
    """Base class for all domain errors raised by this package."""


class ParseError(BreastRiskError):
    """Malformed input row, field, or file."""


class ValidationError(BreastRiskError):
    """Structurally well-formed input that violates a domain invariant."""


class OutOfRange(BreastRiskError):
    """Requested age or interval outside the supported model range."""


class NoConvergence(BreastRiskError):
    """Iterative solver exceeded its iteration cap."""


class UnsupportedPedigree(BreastRiskError):
    """Pedigree with loops, missing links, or otherwise outside the supported class."""


class InvalidAges(BreastRiskError):
    """Event or censoring ages outside the supported range or ordering."""


class SurfaceOutOfRange(BreastRiskError):
    """Density reference surface does not cover the requested (age, BMI)."""


class MissingCensoringTime(BreastRiskError):
    """Operation requires a known potential censoring time for every record."""


class DegenerateCensorEstimate(BreastRiskError):
    """Censoring distribution cannot be estimated (no censoring events)."""


class NonPositiveE(BreastRiskError):
    """Expected count must be strictly positive."""


class EmptyGroup(BreastRiskError):
    """Grouped test requires at least two groups with positive expected counts."""


class InvalidSpec(BreastRiskError):
    """Simulation specification is inconsistent or incomplete."""
