"""Exception hierarchy.

``ParseError`` covers malformed input text (CLI exit code 1), while
``InvariantError`` covers well-formed input that violates a domain rule
(CLI exit code 2).
"""


class FaceMeshError(Exception):
    """Base class for all package errors."""


class ParseError(FaceMeshError, ValueError):
    pass


class InvariantError(FaceMeshError, ValueError):
    pass


class TopologyError(InvariantError):
    pass


class TimestampError(InvariantError):
    """Timestamps must be strictly increasing within a stream."""
