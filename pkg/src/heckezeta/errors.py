"""Exception types shared across the package."""


class HeckeZetaError(Exception):
    """Base class for all library errors."""


class DomainError(HeckeZetaError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class BranchCutError(DomainError):
    """A complex power was requested with its base on the cut (-inf, 0]."""


class BoundaryError(DomainError):
    """A point fell within tolerance of an interval-partition boundary."""


class PoleError(DomainError):
    """Evaluation was requested at (or too close to) a pole."""


class ModeError(HeckeZetaError, ValueError):
    """The requested operator mode is invalid for this spectral parameter."""


class DiskConstructionError(HeckeZetaError, RuntimeError):
    """No admissible disk system was found; carries the violated inclusion."""


class ContainmentError(HeckeZetaError, RuntimeError):
    """A recursion visited a point outside its guaranteed region."""
