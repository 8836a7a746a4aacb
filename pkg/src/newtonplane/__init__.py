"""Newton maps of planar polynomial pairs.

Forward dynamics (basins of attraction, cycles, chaotic attractors), backward
dynamics (preimage trees, chaos-game attractor approximations), normal-form
classification of quadratic pairs, and batch rendering utilities.
"""

__version__ = "0.1.0"

from .errors import (
    DegeneratePencil,
    EmptyInput,
    EverywhereSingular,
    GridMismatch,
    NearIndeterminate,
    NearSingular,
    NewtonPlaneError,
    NotGeneric,
    ParseError,
    VerificationFailed,
    WrongDegree,
    WrongType,
)
from .poly2 import (
    AffineMap2,
    PencilType,
    PlanarMap,
    Poly2,
    format_poly,
    parse_map,
    parse_poly,
    pencil_type,
)

__all__ = [
    "AffineMap2",
    "DegeneratePencil",
    "EmptyInput",
    "EverywhereSingular",
    "GridMismatch",
    "NearIndeterminate",
    "NearSingular",
    "NewtonPlaneError",
    "NotGeneric",
    "ParseError",
    "PencilType",
    "PlanarMap",
    "Poly2",
    "VerificationFailed",
    "WrongDegree",
    "WrongType",
    "format_poly",
    "parse_map",
    "parse_poly",
    "pencil_type",
]
