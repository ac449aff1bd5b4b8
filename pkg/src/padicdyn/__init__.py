"""padicdyn: precision-tracked p-adic power series, Lubin-Tate formal groups,
and constructive verification that a full commuting family of p-adic power
series consists of endomorphisms of one formal group."""

from .padic import (
    KValue,
    NotUnitError,
    OKValue,
    PadicError,
    PrecisionError,
    ResidueValue,
    RingMismatchError,
    RingSpec,
    make_ring,
    ring_from_descriptor,
    ring_from_json,
)

__version__ = "0.1.0"

__all__ = [
    "KValue",
    "NotUnitError",
    "OKValue",
    "PadicError",
    "PrecisionError",
    "ResidueValue",
    "RingMismatchError",
    "RingSpec",
    "make_ring",
    "ring_from_descriptor",
    "ring_from_json",
]
