"""Exception types shared across the package.

The CLI maps these onto exit codes: usage problems exit 1, input/validation
problems exit 2, internal consistency failures exit 3.
"""


class HubRouteError(Exception):
    """Base class for all package errors."""


class ParseError(HubRouteError):
    """A document could not be parsed at all (malformed syntax/schema)."""


class ValidationError(HubRouteError):
    """A parsed document or value violates an invariant."""


class GenerationError(HubRouteError):
    """Generator parameters cannot yield a valid network."""


class UnknownHub(HubRouteError):
    """A hub id does not exist in the network."""


class NoPath(HubRouteError):
    """Destination unreachable from origin regardless of budget."""


class DegenerateBearing(HubRouteError):
    """Bearing requested between coincident coordinates."""


class AmbiguousMidpoint(HubRouteError):
    """Midpoint requested for antipodal points."""


class NotOnPath(HubRouteError):
    """Hub is not part of the given path."""


class AlreadyAtDestination(HubRouteError):
    """Next hop requested at the final hub of a path."""


class EmptyCandidates(HubRouteError):
    """Policy invoked with no next-hop candidates."""


class ConfigError(HubRouteError):
    """Scenario or generator configuration is unusable."""


class MismatchedScenarios(HubRouteError):
    """Comparison requested between runs of different scenarios."""


class StallDetected(HubRouteError):
    """Event queue drained (or exploded) with shipments unaccounted for."""
