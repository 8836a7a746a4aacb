"""Exception types shared across the package."""


class NewtonPlaneError(Exception):
    """Base class for all package-specific errors."""


class ParseError(NewtonPlaneError):
    """Malformed polynomial text or map specification."""


class DegeneratePencil(NewtonPlaneError):
    """The two map components are linearly dependent."""


class EverywhereSingular(NewtonPlaneError):
    """det Df vanishes identically, so no Newton map exists."""


class WrongType(NewtonPlaneError):
    """Operation applied to a map of the wrong pencil type."""


class WrongDegree(NewtonPlaneError):
    """Polynomial degree outside the operation's domain."""


class NotGeneric(NewtonPlaneError):
    """Map is too close to a degenerate configuration (multiple roots, ...)."""


class NearSingular(NewtonPlaneError):
    """Evaluation point too close to the degeneracy curve of the map."""


class NearIndeterminate(NewtonPlaneError):
    """Evaluation point too close to a point of indeterminacy."""


class VerificationFailed(NewtonPlaneError):
    """A computed object failed its numerical self-check."""


class EmptyInput(NewtonPlaneError):
    """An operation that needs a nonempty point set received an empty one."""


class GridMismatch(NewtonPlaneError):
    """Two gridded results do not share the same geometry."""
