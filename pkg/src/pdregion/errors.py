"""Exception types shared across the toolkit."""

from __future__ import annotations


class PDRegionError(Exception):
    """Base class for toolkit errors."""


class ParseError(PDRegionError, ValueError):
    """Malformed transfer-function expression or system file.

    ``offset`` is the byte offset into the (UTF-8 encoded) source where the
    problem was detected, or ``None`` when it does not apply.
    """

    def __init__(self, message: str, offset: int | None = None, where: str | None = None):
        self.offset = offset
        self.where = where
        parts = [message]
        if offset is not None:
            parts.append(f"at byte {offset}")
        if where:
            parts.append(f"in {where}")
        super().__init__(" ".join(parts))


class ShapeError(PDRegionError, ValueError):
    pass


class PoleError(PDRegionError, ValueError):
    """Evaluation point coincides with a pole."""

    def __init__(self, message: str, entry: tuple[int, int] | None = None, magnitude: float = 0.0):
        self.entry = entry
        self.magnitude = magnitude
        super().__init__(message)


class SingularError(PDRegionError, ValueError):
    """``I - G(jw) sigma`` (or ``1 - sigma G``) is singular at the evaluation point."""


class PremiseError(PDRegionError, ValueError):
    """A precondition of an analysis is violated; ``witness`` locates it."""

    def __init__(self, message: str, witness: float | None = None):
        self.witness = witness
        super().__init__(message)


class WindingError(PDRegionError, ValueError):
    """Winding number could not be determined reliably."""
