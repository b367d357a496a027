"""Projection data with dimension datum (1,2,2;1), their standard forms and
equivalence witnesses.

A datum ``(pi1, pi2, pi3, pi4)`` defines

    p.v. \\int f(pi1 v) G(pi2 v) H(pi3 v) / (pi4 v) dv,   v in R^3.

Witnesses are checked in the transposed convention: a witness
``(a1, a2, a3, a4, b)`` brings a datum to the normal form ``nf`` when
``b.T @ pi_j.T @ a_j.T`` equals the j-th target of ``nf`` for every j.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

from .exactla import (
    RationalMatrix,
    Subspace,
    contains,
    intersect,
    inverse,
    range_of_adjoint,
    rank,
    sum_span,
    to_rational,
)

__all__ = [
    "BLDatum",
    "NormalForm",
    "EquivalenceWitness",
    "ExponentTriple",
    "SubspaceProfile",
    "SingularWitness",
    "validate",
    "subspace_profile",
    "normal_form_targets",
    "datum_of",
    "apply_witness",
    "verify_witness",
    "inverse_witness",
    "compose_witness",
    "identity_witness",
    "random_witness",
    "constant_factor",
    "thtsp_datum",
    "printed_witness",
    "datum_to_json",
    "datum_from_json",
    "witness_to_json",
    "witness_from_json",
    "format_rational",
    "iter_normal_forms",
]

_SHAPES = {"pi1": (1, 3), "pi2": (2, 3), "pi3": (2, 3), "pi4": (1, 3)}
_RANKS = {"pi1": 1, "pi2": 2, "pi3": 2, "pi4": 1}


class SingularWitness(ValueError):
    pass


@dataclass(frozen=True)
class BLDatum:
    pi1: RationalMatrix
    pi2: RationalMatrix
    pi3: RationalMatrix
    pi4: RationalMatrix

    def __post_init__(self):
        for name, shape in _SHAPES.items():
            m = getattr(self, name)
            if not isinstance(m, RationalMatrix):
                m = RationalMatrix(m)
                object.__setattr__(self, name, m)
            if m.shape != shape:
                raise ValueError(f"{name} must be {shape[0]}x{shape[1]}, got {m.rows}x{m.cols}")

    @property
    def maps(self) -> tuple[RationalMatrix, RationalMatrix, RationalMatrix, RationalMatrix]:
        return self.pi1, self.pi2, self.pi3, self.pi4


@dataclass(frozen=True)
class NormalForm:
    tag: str
    beta: Fraction | None = None

    TAGS = ("Zero", "L1", "L2", "L3", "L4")

    def __post_init__(self):
        if self.tag not in self.TAGS:
            raise ValueError(f"unknown normal form {self.tag!r}")
        if self.tag == "L4":
            if self.beta is None:
                raise ValueError("L4 needs a beta")
            object.__setattr__(self, "beta", to_rational(self.beta))
        elif self.beta is not None:
            raise ValueError(f"{self.tag} takes no beta")

    @classmethod
    def parse(cls, text: str) -> "NormalForm":
        """Parse ``"L1"``, ``"Zero"`` or ``"L4:-2/3"``."""
        text = text.strip()
        if text.startswith("L4"):
            _, _, b = text.partition(":")
            if not b:
                raise ValueError("L4 needs a beta, e.g. L4:2")
            return cls("L4", to_rational(b))
        return cls(text)

    def __str__(self) -> str:
        return f"L4:{format_rational(self.beta)}" if self.tag == "L4" else self.tag


@dataclass(frozen=True)
class EquivalenceWitness:
    a1: RationalMatrix
    a2: RationalMatrix
    a3: RationalMatrix
    a4: RationalMatrix
    b: RationalMatrix

    def __post_init__(self):
        shapes = {"a1": (1, 1), "a2": (2, 2), "a3": (2, 2), "a4": (1, 1), "b": (3, 3)}
        for name, shape in shapes.items():
            m = getattr(self, name)
            if not isinstance(m, RationalMatrix):
                m = RationalMatrix(m)
                object.__setattr__(self, name, m)
            if m.shape != shape:
                raise ValueError(f"{name} must be {shape[0]}x{shape[1]}")

    @property
    def a(self) -> tuple[RationalMatrix, RationalMatrix, RationalMatrix, RationalMatrix]:
        return self.a1, self.a2, self.a3, self.a4

    def determinants(self) -> tuple[Fraction, ...]:
        return tuple(m.det() for m in (*self.a, self.b))

    def is_invertible(self) -> bool:
        return all(d != 0 for d in self.determinants())


@dataclass(frozen=True)
class ExponentTriple:
    p1: float
    p2: float
    p3: float

    def __post_init__(self):
        for p in (self.p1, self.p2, self.p3):
            if not (1 <= p <= math.inf):
                raise ValueError(f"exponent {p} outside [1, inf]")

    @classmethod
    def parse(cls, text: str) -> "ExponentTriple":
        parts = [s.strip() for s in text.split(",")]
        if len(parts) != 3:
            raise ValueError("expected three comma separated exponents")
        return cls(*(math.inf if s.lower() in ("inf", "infinity") else float(Fraction(s)) for s in parts))

    @property
    def inverses(self) -> tuple[float, float, float]:
        return tuple(0.0 if math.isinf(p) else 1.0 / p for p in (self.p1, self.p2, self.p3))

    def in_endpoint_range(self) -> bool:
        _, q2, q3 = self.inverses
        return (
            math.isinf(self.p1)
            and math.isclose(q2 + q3, 1.0, rel_tol=0, abs_tol=1e-12)
            and 1 < self.p2 < math.inf
            and 1 < self.p3 < math.inf
        )


@dataclass(frozen=True)
class SubspaceProfile:
    v1: Subspace
    v2: Subspace
    v3: Subspace
    v4: Subspace
    v2_eq_v3: bool
    v1_in_v2: bool
    v1_in_v3: bool
    v1_in_w_plus_v4: bool
    hypothesis: bool
    hypothesis_failures: tuple[int, ...] = ()

    @property
    def w(self) -> Subspace:
        """The intersection of V2 and V3."""
        return intersect(self.v2, self.v3)


def validate(d: BLDatum) -> list[str]:
    """Rank conditions that fail; an empty list means the datum is valid."""
    problems = []
    for name, want in _RANKS.items():
        r = rank(getattr(d, name))
        if r != want:
            problems.append(f"rank({name})={r} ≠ {want}")
    return problems


def subspace_profile(d: BLDatum) -> SubspaceProfile:
    v1, v2, v3, v4 = (range_of_adjoint(p) for p in d.maps)
    w = intersect(v2, v3)
    fails = tuple(j for j, v in ((1, v1), (2, v2), (3, v3)) if intersect(v4, v).dim != 0)
    return SubspaceProfile(
        v1=v1,
        v2=v2,
        v3=v3,
        v4=v4,
        v2_eq_v3=v2 == v3,
        v1_in_v2=contains(v2, v1),
        v1_in_v3=contains(v3, v1),
        v1_in_w_plus_v4=contains(sum_span(w, v4), v1),
        hypothesis=not fails,
        hypothesis_failures=fails,
    )


def normal_form_targets(nf: NormalForm) -> tuple[RationalMatrix, ...]:
    """The four matrices ``B^T Pi_j^T A_j^T`` of a standard form."""
    e1 = [[1], [0], [0]]
    e1e3 = [[1], [0], [1]]
    t2 = [[1, 0], [0, 1], [0, 0]]
    t4 = [[0], [0], [1]]
    if nf.tag == "Zero":
        t1, t3 = e1, t2
    elif nf.tag == "L1":
        t1, t3 = e1, [[1, 0], [0, 1], [0, 1]]
    elif nf.tag == "L2":
        t1, t3 = e1, [[1, 0], [0, 1], [1, 0]]
    elif nf.tag == "L3":
        t1, t3 = e1e3, [[1, 0], [0, 1], [0, 1]]
    else:
        t1, t3 = e1e3, [[1, 0], [0, 1], [nf.beta, 0]]
    return tuple(RationalMatrix(t) for t in (t1, t2, t3, t4))


def datum_of(nf: NormalForm) -> BLDatum:
    return BLDatum(*(t.T for t in normal_form_targets(nf)))


def apply_witness(d: BLDatum, w: EquivalenceWitness) -> BLDatum:
    """The equivalent datum ``pi'_j = a_j @ pi_j @ b``."""
    if not w.is_invertible():
        raise SingularWitness("witness has a singular component")
    return BLDatum(*(a @ p @ w.b for a, p in zip(w.a, d.maps)))


def verify_witness(d: BLDatum, w: EquivalenceWitness, nf: NormalForm) -> bool:
    if not w.is_invertible():
        return False
    targets = normal_form_targets(nf)
    return all(w.b.T @ p.T @ a.T == t for p, a, t in zip(d.maps, w.a, targets))


def inverse_witness(w: EquivalenceWitness) -> EquivalenceWitness:
    """Witness undoing ``w``: apply_witness(apply_witness(d, w), inverse) == d."""
    return EquivalenceWitness(*(inverse(m) for m in (*w.a, w.b)))


def compose_witness(first: EquivalenceWitness, second: EquivalenceWitness) -> EquivalenceWitness:
    """Witness equal to applying ``first`` and then ``second``."""
    a = [s @ f for f, s in zip(first.a, second.a)]
    return EquivalenceWitness(*a, first.b @ second.b)


def identity_witness() -> EquivalenceWitness:
    i1, i2, i3 = (RationalMatrix.identity(n) for n in (1, 2, 3))
    return EquivalenceWitness(i1, i2, i2, i1, i3)


def _random_invertible(rng: random.Random, n: int, lo: int, hi: int, rational: bool) -> RationalMatrix:
    while True:
        rows = []
        for _ in range(n):
            row = []
            for _ in range(n):
                num = rng.randint(lo, hi)
                den = rng.randint(1, 3) if rational else 1
                row.append(Fraction(num, den))
            rows.append(row)
        m = RationalMatrix(rows)
        if m.det() != 0:
            return m


def random_witness(seed: int, lo: int = -5, hi: int = 5, rational: bool = True) -> EquivalenceWitness:
    """A reproducible random invertible witness with small rational entries."""
    rng = random.Random(seed)
    a1 = _random_invertible(rng, 1, lo, hi, rational)
    a2 = _random_invertible(rng, 2, lo, hi, rational)
    a3 = _random_invertible(rng, 2, lo, hi, rational)
    a4 = _random_invertible(rng, 1, lo, hi, rational)
    b = _random_invertible(rng, 3, lo, hi, rational)
    return EquivalenceWitness(a1, a2, a3, a4, b)


def constant_factor(w: EquivalenceWitness, p: ExponentTriple) -> float:
    """Factor by which a bound's constant changes under the witness ``w``.

    |a4|^(1/p1 + 2/p2 + 2/p3 - 3) / (|det b| * prod_j |det a_j|^(1/p_j)),
    with 1/inf = 0.
    """
    dets = w.determinants()
    if any(x == 0 for x in dets):
        raise SingularWitness("witness has a singular component")
    q1, q2, q3 = p.inverses
    da1, da2, da3, a4, db = (abs(float(x)) for x in dets)
    num = a4 ** (q1 + 2 * q2 + 2 * q3 - 3)
    den = db * da1**q1 * da2**q2 * da3**q3
    return num / den


def thtsp_datum(alpha) -> BLDatum:
    """Datum of f(x + alpha y) G(y, z) H(z, x) / (x + y + z)."""
    a = to_rational(alpha)
    return BLDatum(
        RationalMatrix([[1, a, 0]]),
        RationalMatrix([[0, 1, 0], [0, 0, 1]]),
        RationalMatrix([[0, 0, 1], [1, 0, 0]]),
        RationalMatrix([[1, 1, 1]]),
    )


def printed_witness(alpha) -> EquivalenceWitness:
    """The explicit matrices printed for the special triangular form.

    For alpha != 1 they bring ``thtsp_datum(alpha)`` to L4(1 - alpha), with
    the second matrix printed as A2 taken as A3.  The alpha = 1 matrices
    are kept verbatim even though they do not reach L3.
    """
    a = to_rational(alpha)
    one = RationalMatrix([[1]])
    if a != 1:
        c = a - 1
        return EquivalenceWitness(
            one,
            RationalMatrix([[a - 1, -1], [0, 1]]),
            RationalMatrix([[-a, -a + 1], [1, 0]]),
            one,
            RationalMatrix([[-1 / c, -a / c, 1], [1 / c, 1 / c, 0], [0, 1, 0]]),
        )
    return EquivalenceWitness(
        one,
        RationalMatrix([[0, 1], [1, 0]]),
        RationalMatrix([[1, 0], [-1, -1]]),
        one,
        RationalMatrix([[-1, -1, 1], [0, 1, 0], [1, 0, 0]]),
    )


# -- JSON ---------------------------------------------------------------------


def format_rational(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _matrix_to_json(m: RationalMatrix) -> list[list[str]]:
    return [[format_rational(x) for x in row] for row in m]


def _matrix_from_json(rows) -> RationalMatrix:
    if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
        raise ValueError("matrix must be a non-empty list of rows")
    return RationalMatrix(rows)


def datum_to_json(d: BLDatum) -> dict:
    return {name: _matrix_to_json(getattr(d, name)) for name in _SHAPES}


def datum_from_json(obj) -> BLDatum:
    if isinstance(obj, str):
        obj = json.loads(obj)
    missing = [k for k in _SHAPES if k not in obj]
    if missing:
        raise ValueError(f"datum is missing {', '.join(missing)}")
    return BLDatum(*(_matrix_from_json(obj[k]) for k in _SHAPES))


def witness_to_json(w: EquivalenceWitness) -> dict:
    return {k: _matrix_to_json(getattr(w, k)) for k in ("a1", "a2", "a3", "a4", "b")}


def witness_from_json(obj) -> EquivalenceWitness:
    if isinstance(obj, str):
        obj = json.loads(obj)
    return EquivalenceWitness(*(_matrix_from_json(obj[k]) for k in ("a1", "a2", "a3", "a4", "b")))


def iter_normal_forms(betas=(-2, 0, Fraction(1, 3), 1, 7)) -> Iterator[NormalForm]:
    for tag in ("Zero", "L1", "L2", "L3"):
        yield NormalForm(tag)
    for b in betas:
        yield NormalForm("L4", b)
