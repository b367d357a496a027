"""Classification and numerical evaluation of (1,2,2;1) Brascamp-Lieb forms
with one singular (Hilbert-type) kernel."""

from .datum import BLDatum, EquivalenceWitness, ExponentTriple, NormalForm
from .classifier import classify, cross_ratio
from .quadrature import QuadConfig, QuadResult

__version__ = "0.1.0"

__all__ = [
    "BLDatum",
    "EquivalenceWitness",
    "ExponentTriple",
    "NormalForm",
    "QuadConfig",
    "QuadResult",
    "classify",
    "cross_ratio",
]
