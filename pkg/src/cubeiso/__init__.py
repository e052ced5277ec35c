"""Edge-isoperimetric analysis of functions on the discrete cube."""

from .core import (
    BooleanFunction,
    CoordinateOrdering,
    ProductMeasure,
    RealFunction,
    SymmetricProfile,
    decode_hex,
    encode_hex,
)

__all__ = [
    "BooleanFunction",
    "CoordinateOrdering",
    "ProductMeasure",
    "RealFunction",
    "SymmetricProfile",
    "decode_hex",
    "encode_hex",
]

__version__ = "0.1.0"
