"""Error types shared across the package."""

from __future__ import annotations


class DegenerateGeometryError(ValueError):
    """Feed/UE placement makes the propagation model meaningless.

    Raised e.g. when the feed lies in the surface plane or behind the
    reflecting face (non-positive projected aperture).
    """


class ModelInconsistencyError(RuntimeError):
    """A closed-form quantity violates its own validity conditions.

    Carries a ``details`` dict with the offending intermediate values so
    sweep drivers can report the failure without re-deriving it.
    """

    def __init__(self, message: str, details: dict | None = None):
        super().__init__(message)
        self.details = details or {}
