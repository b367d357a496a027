"""Decide which standard form a (1,2,2;1) datum is equivalent to.

Every decision comes with an explicit witness.  All vector choices are
deterministic: spanning vectors are the first canonical basis vector of the
relevant subspace and every decomposition is an exact linear solve with free
variables set to zero.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

from .datum import (
    BLDatum,
    EquivalenceWitness,
    NormalForm,
    SubspaceProfile,
    normal_form_targets,
    subspace_profile,
    validate,
    verify_witness,
)
from .exactla import RationalMatrix, Subspace, inverse, solve, sum_span

__all__ = [
    "ClassificationResult",
    "ClassificationError",
    "HypothesisViolated",
    "InvalidDatum",
    "InternalDegeneracy",
    "CrossRatioUndefined",
    "classify",
    "cross_ratio",
    "equivalent",
]

Vec = tuple[Fraction, ...]


class ClassificationError(Exception):
    pass


class HypothesisViolated(ClassificationError):
    pass


class InvalidDatum(ClassificationError):
    pass


class InternalDegeneracy(ClassificationError):
    pass


class CrossRatioUndefined(ClassificationError):
    pass


@dataclass(frozen=True)
class ClassificationResult:
    normal_form: NormalForm
    witness: EquivalenceWitness
    profile: SubspaceProfile
    case: int


def _add(u: Vec, v: Vec) -> Vec:
    return tuple(a + b for a, b in zip(u, v))


def _scale(c, v: Vec) -> Vec:
    return tuple(c * a for a in v)


def _cols(*vecs: Vec) -> RationalMatrix:
    return RationalMatrix(list(zip(*vecs)))


def _coeffs(columns: list[Vec], target: Vec) -> tuple[Fraction, ...]:
    x = solve(_cols(*columns), target)
    if x is None:
        raise InternalDegeneracy("expected decomposition has no solution")
    return x.col(0)


def _split(v: Vec, plane: Subspace, line: Subspace) -> tuple[Vec, Vec]:
    """Write v = p + q with p in plane and q in line (plane + line = Q^3)."""
    a, b, c = _coeffs([*plane.vectors, line.first()], v)
    p = _add(_scale(a, plane.vectors[0]), _scale(b, plane.vectors[1]))
    return p, _scale(c, line.first())


def _completion(space: Subspace, v: Vec) -> Vec:
    """A basis vector of a plane that is independent of v."""
    for u in space.vectors:
        if Subspace([u, v]).dim == 2:
            return u
    raise InternalDegeneracy("plane has no vector independent of the given one")


def _nonzero(v: Vec, what: str) -> Vec:
    if all(x == 0 for x in v):
        raise InternalDegeneracy(f"{what} vanished")
    return v


def _case_vectors(pr: SubspaceProfile) -> tuple[int, NormalForm, tuple[Vec, Vec, Vec]]:
    v4 = pr.v4
    if pr.v2_eq_v3:
        if pr.v1_in_v2:
            v1 = pr.v1.first()
            v2 = _completion(pr.v2, v1)
            return 0, NormalForm("Zero"), (v1, v2, v4.first())
        v1, v3 = _split(pr.v1.first(), pr.v2, v4)
        _nonzero(v1, "V2 component of V1")
        _nonzero(v3, "V4 component of V1")
        v2 = _completion(pr.v2, v1)
        return 1, NormalForm("L4", 0), (v1, v2, v3)

    w = pr.w
    if pr.v1_in_v2 and pr.v1_in_v3:
        v1 = pr.v1.first()
        v = _completion(pr.v3, v1)
        v2, v3 = _split(v, pr.v2, v4)
        _nonzero(v3, "V4 component")
        return 2, NormalForm("L1"), (v1, v2, v3)
    if pr.v1_in_v2:
        v1 = pr.v1.first()
        # v1 + c w4 in V3
        _, _, c = _coeffs([*pr.v3.vectors, _scale(-1, v4.first())], v1)
        v3 = _nonzero(_scale(c, v4.first()), "V4 component")
        return 3, NormalForm("L2"), (v1, w.first(), v3)
    if pr.v1_in_v3:
        v1, v3 = _split(pr.v1.first(), pr.v2, v4)
        _nonzero(v3, "V4 component")
        return 4, NormalForm("L4", 1), (v1, w.first(), v3)
    if pr.v1_in_w_plus_v4:
        a, c = _coeffs([w.first(), v4.first()], pr.v1.first())
        v1 = _nonzero(_scale(a, w.first()), "W component")
        v3 = _nonzero(_scale(c, v4.first()), "V4 component")
        # v2 in V2 with v2 + v3 in V3
        x = solve(_cols(*pr.v2.vectors, *(_scale(-1, u) for u in pr.v3.vectors)), _scale(-1, v3))
        if x is None:
            raise InternalDegeneracy("no V2 vector completes v3 into V3")
        d1, d2 = x.col(0)[:2]
        v2 = _add(_scale(d1, pr.v2.vectors[0]), _scale(d2, pr.v2.vectors[1]))
        return 5, NormalForm("L3"), (v1, v2, v3)
    v1, v3 = _split(pr.v1.first(), pr.v2, v4)
    # v1 + beta v3 in V3
    _, _, mbeta = _coeffs([*pr.v3.vectors, _scale(-1, v3)], v1)
    beta = mbeta
    if beta in (0, 1):
        raise InternalDegeneracy(f"case 6 produced beta = {beta}")
    return 6, NormalForm("L4", beta), (v1, w.first(), v3)


def _witness_for(d: BLDatum, nf: NormalForm, vecs: tuple[Vec, Vec, Vec]) -> EquivalenceWitness:
    m = _cols(*vecs)
    try:
        minv = inverse(m)
    except ValueError as exc:
        raise InternalDegeneracy("constructed vectors are dependent") from exc
    b = minv.T
    a = []
    for p, t in zip(d.maps, normal_form_targets(nf)):
        # p^T a^T = m t, column by column
        rhs = m @ t
        cols = []
        for j in range(rhs.cols):
            x = solve(p.T, rhs.col(j))
            if x is None:
                raise InternalDegeneracy("target column is not in the range of the datum")
            cols.append(x.col(0))
        a.append(_cols(*cols).T)
    return EquivalenceWitness(*a, b)


def classify(d: BLDatum) -> ClassificationResult:
    problems = validate(d)
    if problems:
        raise InvalidDatum("; ".join(problems))
    pr = subspace_profile(d)
    if not pr.hypothesis:
        js = ", ".join(str(j) for j in pr.hypothesis_failures)
        raise HypothesisViolated(f"V4 meets V{js} nontrivially")
    case, nf, vecs = _case_vectors(pr)
    w = _witness_for(d, nf, vecs)
    if not verify_witness(d, w, nf):
        raise InternalDegeneracy(f"case {case} witness failed verification")
    return ClassificationResult(nf, w, pr, case)


def equivalent(d1: BLDatum, d2: BLDatum) -> bool:
    return classify(d1).normal_form == classify(d2).normal_form


# -- cross ratio ----------------------------------------------------------------


def _cross(u: Vec, v: Vec) -> Vec:
    return (
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    )


def _dot(u, v) -> Fraction:
    return sum((a * b for a, b in zip(u, v)), Fraction(0))


def _candidate_lines():
    pts = [tuple(Fraction(c) for c in p) for p in itertools.product(range(-2, 3), repeat=3)]
    for p, q in itertools.combinations(pts, 2):
        yield p, tuple(b - a for a, b in zip(p, q))


def _misses(p: Vec, d: Vec, w: Vec) -> bool:
    # the line p + s d meets span{w} iff p, d, w are linearly dependent
    # and d is not parallel to w (parallel lines through p != 0 miss it)
    if Subspace([p, d, w]).dim == 3:
        return True
    if Subspace([d, w]).dim == 1:
        return Subspace([p, w]).dim == 2
    return False


def cross_ratio(d: BLDatum) -> Fraction | float:
    """Cross ratio of the planes span(V1,W), V2, V3, span(V4,W), W = V2 ∩ V3.

    Coincident planes are legitimate; a vanishing denominator returns
    ``math.inf``.  Raises :class:`CrossRatioUndefined` when V2 = V3 or when
    V1 lies inside W (then span(V1, W) is not a plane).
    """
    pr = subspace_profile(d)
    if pr.v2_eq_v3:
        raise CrossRatioUndefined("V2 = V3, the pencil of planes is not defined")
    w = pr.w
    planes = [sum_span(pr.v1, w), pr.v2, pr.v3, sum_span(pr.v4, w)]
    if any(pl.dim != 2 for pl in planes):
        raise CrossRatioUndefined("span(V1, W) or span(V4, W) is not a plane")
    normals = [_cross(*pl.vectors) for pl in planes]
    wv = w.first()
    for p, direction in _candidate_lines():
        if not _misses(p, direction, wv):
            continue
        denoms = [_dot(n, direction) for n in normals]
        if any(x == 0 for x in denoms):
            continue
        s1, s2, s3, s4 = (-_dot(n, p) / dn for n, dn in zip(normals, denoms))
        den = (s1 - s2) * (s3 - s4)
        if den == 0:
            return math.inf
        return (s1 - s4) * (s3 - s2) / den
    raise CrossRatioUndefined("no admissible line found among lattice candidates")
