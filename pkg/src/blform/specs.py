"""Symbolic test functions on R and R^2.

Specs are small frozen dataclasses that evaluate vectorised over numpy
arrays: ``spec(x)`` for one variable, ``spec(x, y)`` for two.  One-variable
specs also report their jump/kink locations so quadrature can put panel
edges there.
"""

from __future__ import annotations

import functools
import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _kernels

__all__ = [
    "FunctionSpec",
    "ArityMismatch",
    "Gaussian",
    "Box",
    "SmoothBump",
    "SignWindow",
    "SignStep",
    "SmoothSign",
    "Constant",
    "LinfDilate",
    "Scale",
    "Translate",
    "Modulate",
    "BandlimitedM",
    "Table",
    "Sum",
    "Product",
    "Tensor",
    "Pullback",
    "SqrtSplit",
    "PiecewisePhase",
    "eval_spec",
    "spec_from_json",
    "spec_to_json",
    "smooth_step",
    "bandlimited_m_hat",
    "M_TABLE_TMAX",
]


class ArityMismatch(ValueError):
    pass


class FunctionSpec:
    arity: int = 1

    def __call__(self, *coords):
        if len(coords) != self.arity:
            raise ArityMismatch(f"{type(self).__name__} takes {self.arity} coordinate(s), got {len(coords)}")
        return self._eval(*(np.asarray(c, dtype=float) for c in coords))

    def _eval(self, *coords):
        raise NotImplementedError

    def breakpoints(self) -> tuple[float, ...]:
        return ()

    def to_json(self) -> dict:
        raise NotImplementedError

    # the integrand is real unless something modulates it
    is_real: bool = True


def _sorted_unique(values) -> tuple[float, ...]:
    return tuple(sorted({float(v) for v in values if math.isfinite(v)}))


@dataclass(frozen=True)
class Gaussian(FunctionSpec):
    """exp(-pi x^2 / a^2)."""

    a: float = 1.0

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError("Gaussian width must be positive")

    def _eval(self, x):
        return np.exp(-math.pi * (x / self.a) ** 2)

    def to_json(self):
        return {"type": "gaussian", "a": self.a}


@dataclass(frozen=True)
class Box(FunctionSpec):
    """Indicator of [lo, hi)."""

    lo: float = 0.0
    hi: float = 1.0

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError("Box needs lo < hi")

    def _eval(self, x):
        return ((x >= self.lo) & (x < self.hi)).astype(float)

    def breakpoints(self):
        return (self.lo, self.hi)

    def to_json(self):
        return {"type": "box", "lo": self.lo, "hi": self.hi}


def smooth_step(u):
    """C-infinity step: 0 for u <= 0, 1 for u >= 1."""
    u = np.clip(np.asarray(u, dtype=float), 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        a = np.where(u > 0, np.exp(-1.0 / np.where(u > 0, u, 1.0)), 0.0)
        b = np.where(u < 1, np.exp(-1.0 / np.where(u < 1, 1.0 - u, 1.0)), 0.0)
    return a / (a + b)


@dataclass(frozen=True)
class SmoothBump(FunctionSpec):
    """Fixed C-infinity bump: 1 on [-0.9, 0.9], 0 outside (-1, 1)."""

    def _eval(self, x):
        return smooth_step((1.0 - np.abs(x)) / 0.1)

    def breakpoints(self):
        return (-1.0, -0.9, 0.9, 1.0)

    def to_json(self):
        return {"type": "bump"}


@dataclass(frozen=True)
class SignWindow(FunctionSpec):
    """sgn(x) on [-M, M], zero outside."""

    M: float = 1.0

    def __post_init__(self):
        if not self.M > 0:
            raise ValueError("SignWindow needs M > 0")

    def _eval(self, x):
        return np.sign(x) * (np.abs(x) <= self.M)

    def breakpoints(self):
        return (-self.M, 0.0, self.M)

    def to_json(self):
        return {"type": "sign_window", "M": self.M}


@dataclass(frozen=True)
class SignStep(FunctionSpec):
    """-1 for x < -1, 0 on [-1, 2), 1 for x >= 2."""

    def _eval(self, x):
        return np.where(x < -1.0, -1.0, np.where(x < 2.0, 0.0, 1.0))

    def breakpoints(self):
        return (-1.0, 2.0)

    def to_json(self):
        return {"type": "sign_step"}


@dataclass(frozen=True)
class SmoothSign(FunctionSpec):
    """-1 for x <= -1, 1 for x >= 1, C-infinity and odd in between."""

    def _eval(self, x):
        return 2.0 * smooth_step(0.5 * (x + 1.0)) - 1.0

    def breakpoints(self):
        return (-1.0, 1.0)

    def to_json(self):
        return {"type": "smooth_sign"}


@dataclass(frozen=True)
class Constant(FunctionSpec):
    value: complex = 0.0
    arity: int = 1

    def _eval(self, *coords):
        shape = np.broadcast_shapes(*(np.shape(c) for c in coords))
        v = self.value
        if isinstance(v, complex) and v.imag == 0:
            v = v.real
        return np.full(shape, v)

    @property
    def is_real(self):
        return not (isinstance(self.value, complex) and self.value.imag != 0)

    def to_json(self):
        v = self.value
        val = [v.real, v.imag] if isinstance(v, complex) else v
        return {"type": "constant", "value": val, "arity": self.arity}


@dataclass(frozen=True)
class LinfDilate(FunctionSpec):
    """x -> f(x / N); keeps the sup norm."""

    N: float
    of: FunctionSpec

    def __post_init__(self):
        if not self.N > 0:
            raise ValueError("dilation factor must be positive")
        object.__setattr__(self, "arity", self.of.arity)

    def _eval(self, *coords):
        return self.of._eval(*(c / self.N for c in coords))

    @property
    def is_real(self):
        return self.of.is_real

    def breakpoints(self):
        return tuple(self.N * b for b in self.of.breakpoints())

    def to_json(self):
        return {"type": "linf_dilate", "N": self.N, "of": self.of.to_json()}


@dataclass(frozen=True)
class Scale(FunctionSpec):
    """c * f."""

    c: float
    of: FunctionSpec

    def __post_init__(self):
        object.__setattr__(self, "arity", self.of.arity)

    def _eval(self, *coords):
        return self.c * self.of._eval(*coords)

    @property
    def is_real(self):
        return self.of.is_real and not isinstance(self.c, complex)

    def breakpoints(self):
        return self.of.breakpoints()

    def to_json(self):
        return {"type": "scale", "c": self.c, "of": self.of.to_json()}


@dataclass(frozen=True)
class Translate(FunctionSpec):
    """x -> f(x - shift); ``shift`` has one entry per coordinate."""

    shift: tuple[float, ...]
    of: FunctionSpec

    def __post_init__(self):
        shift = tuple(float(s) for s in np.atleast_1d(self.shift))
        if len(shift) != self.of.arity:
            raise ArityMismatch("shift length must match the arity")
        object.__setattr__(self, "shift", shift)
        object.__setattr__(self, "arity", self.of.arity)

    def _eval(self, *coords):
        return self.of._eval(*(c - s for c, s in zip(coords, self.shift)))

    @property
    def is_real(self):
        return self.of.is_real

    def breakpoints(self):
        return tuple(b + self.shift[0] for b in self.of.breakpoints()) if self.arity == 1 else ()

    def to_json(self):
        return {"type": "translate", "shift": list(self.shift), "of": self.of.to_json()}


@dataclass(frozen=True)
class Modulate(FunctionSpec):
    """exp(2 pi i freq x) f(x)."""

    freq: float
    of: FunctionSpec

    def __post_init__(self):
        if self.of.arity != 1:
            raise ArityMismatch("Modulate acts on one-variable specs")

    is_real = False

    def _eval(self, x):
        return np.exp(2j * math.pi * self.freq * x) * self.of._eval(x)

    def breakpoints(self):
        return self.of.breakpoints()

    def to_json(self):
        return {"type": "modulate", "freq": self.freq, "of": self.of.to_json()}


# -- the weight m with Fourier support in [1/2, 3/2] ---------------------------------

M_TABLE_TMAX = 40.0
M_TABLE_STEP = 1e-3


def bandlimited_m_hat(xi):
    """Nonnegative C-infinity bump on (1/2, 3/2) with peak value 1."""
    u = 2.0 * (np.asarray(xi, dtype=float) - 1.0)
    inside = np.abs(u) < 1
    with np.errstate(divide="ignore", over="ignore"):
        val = np.exp(1.0 - 1.0 / np.where(inside, 1.0 - u * u, 1.0))
    return np.where(inside, val, 0.0)


@functools.lru_cache(maxsize=1)
def _m_table() -> np.ndarray:
    x, w = np.polynomial.legendre.leggauss(8)
    edges = np.linspace(0.5, 1.5, 65)
    mid = 0.5 * (edges[1:] + edges[:-1])[:, None]
    half = 0.5 * np.diff(edges)[:, None]
    xi = (mid + half * x).ravel()
    wxi = (half * w).ravel() * bandlimited_m_hat(xi)
    ts = np.arange(0.0, M_TABLE_TMAX + M_TABLE_STEP / 2, M_TABLE_STEP)
    return _kernels.fourier_synthesis(ts, xi, wxi)


@dataclass(frozen=True)
class BandlimitedM(FunctionSpec):
    """m(t) = int m_hat(xi) exp(2 pi i xi t) d xi with m_hat from
    :func:`bandlimited_m_hat`.

    Tabulated on [0, 40] with step 1e-3 and linearly interpolated, using
    m(-t) = conj(m(t)); zero beyond |t| = 40.
    """

    is_real = False

    def _eval(self, t):
        table = _m_table()
        a = np.abs(t) / M_TABLE_STEP
        i = np.minimum(a.astype(np.int64), table.size - 2)
        frac = a - i
        val = table[i] * (1 - frac) + table[i + 1] * frac
        val = np.where(np.abs(t) <= M_TABLE_TMAX, val, 0.0)
        return np.where(t < 0, np.conj(val), val)

    def to_json(self):
        return {"type": "bandlimited_m"}


@dataclass(frozen=True)
class Table(FunctionSpec):
    """Linear interpolation of samples on a uniform grid; zero outside."""

    x0: float
    dx: float
    values: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if len(self.values) < 2 or not self.dx > 0:
            raise ValueError("Table needs at least two samples and dx > 0")

    @functools.cached_property
    def _array(self):
        return np.asarray(self.values)

    def _eval(self, x):
        vals = self._array
        a = (x - self.x0) / self.dx
        inside = (a >= 0) & (a <= vals.size - 1)
        ac = np.clip(a, 0, vals.size - 1)
        i = np.minimum(ac.astype(np.int64), vals.size - 2)
        frac = ac - i
        return np.where(inside, vals[i] * (1 - frac) + vals[i + 1] * frac, 0.0)

    def breakpoints(self):
        return (self.x0, self.x0 + self.dx * (len(self.values) - 1))

    def to_json(self):
        return {"type": "table", "x0": self.x0, "dx": self.dx, "values": list(self.values)}


@dataclass(frozen=True)
class Sum(FunctionSpec):
    terms: tuple[FunctionSpec, ...]

    def __post_init__(self):
        _common_arity(self, self.terms)

    def _eval(self, *coords):
        out = self.terms[0]._eval(*coords)
        for t in self.terms[1:]:
            out = out + t._eval(*coords)
        return out

    @property
    def is_real(self):
        return all(t.is_real for t in self.terms)

    def breakpoints(self):
        return _sorted_unique(b for t in self.terms for b in t.breakpoints())

    def to_json(self):
        return {"type": "sum", "terms": [t.to_json() for t in self.terms]}


@dataclass(frozen=True)
class Product(FunctionSpec):
    terms: tuple[FunctionSpec, ...]

    def __post_init__(self):
        _common_arity(self, self.terms)

    def _eval(self, *coords):
        out = self.terms[0]._eval(*coords)
        for t in self.terms[1:]:
            out = out * t._eval(*coords)
        return out

    @property
    def is_real(self):
        return all(t.is_real for t in self.terms)

    def breakpoints(self):
        return _sorted_unique(b for t in self.terms for b in t.breakpoints())

    def to_json(self):
        return {"type": "product", "terms": [t.to_json() for t in self.terms]}


def _common_arity(spec, terms):
    terms = tuple(terms)
    if not terms:
        raise ValueError("needs at least one term")
    ar = {t.arity for t in terms}
    if len(ar) != 1:
        raise ArityMismatch("terms have different arities")
    object.__setattr__(spec, "terms", terms)
    object.__setattr__(spec, "arity", ar.pop())


@dataclass(frozen=True)
class Tensor(FunctionSpec):
    """(x, y) -> fx(x) fy(y)."""

    fx: FunctionSpec
    fy: FunctionSpec
    arity: int = field(default=2, init=False)

    def __post_init__(self):
        if self.fx.arity != 1 or self.fy.arity != 1:
            raise ArityMismatch("Tensor factors must be one-variable specs")

    def _eval(self, x, y):
        return self.fx._eval(x) * self.fy._eval(y)

    @property
    def is_real(self):
        return self.fx.is_real and self.fy.is_real

    def to_json(self):
        return {"type": "tensor", "fx": self.fx.to_json(), "fy": self.fy.to_json()}


@dataclass(frozen=True)
class Pullback(FunctionSpec):
    """X -> of(matrix @ X + offset).

    ``matrix`` has one row per argument of ``of`` and one column per
    coordinate of the pulled back spec.
    """

    matrix: tuple[tuple[float, ...], ...]
    of: FunctionSpec
    offset: tuple[float, ...] | None = None

    def __post_init__(self):
        m = tuple(tuple(float(v) for v in row) for row in self.matrix)
        if len(m) != self.of.arity:
            raise ArityMismatch("matrix needs one row per argument of the inner spec")
        ncols = {len(r) for r in m}
        if len(ncols) != 1 or ncols.pop() not in (1, 2):
            raise ArityMismatch("matrix must have 1 or 2 columns")
        off = tuple(float(v) for v in self.offset) if self.offset is not None else (0.0,) * len(m)
        if len(off) != len(m):
            raise ArityMismatch("offset length must match the matrix rows")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "offset", off)
        object.__setattr__(self, "arity", len(m[0]))

    def _eval(self, *coords):
        args = []
        for row, o in zip(self.matrix, self.offset):
            acc = o
            for a, c in zip(row, coords):
                if a != 0.0:
                    acc = acc + a * c
            if np.ndim(acc) == 0:
                acc = np.broadcast_to(np.asarray(acc, dtype=float), np.broadcast_shapes(*(np.shape(c) for c in coords)))
            args.append(acc)
        return self.of._eval(*args)

    @property
    def is_real(self):
        return self.of.is_real

    def breakpoints(self):
        if self.arity != 1 or self.of.arity != 1:
            return ()
        a, o = self.matrix[0][0], self.offset[0]
        if a == 0:
            return ()
        return _sorted_unique((b - o) / a for b in self.of.breakpoints())

    def to_json(self):
        out = {"type": "pullback", "matrix": [list(r) for r in self.matrix], "of": self.of.to_json()}
        if any(self.offset):
            out["offset"] = list(self.offset)
        return out


@dataclass(frozen=True)
class SqrtSplit(FunctionSpec):
    """|g|^(1/2) for sign=+1, sgn(g) |g|^(1/2) for sign=-1."""

    g: FunctionSpec
    sign: int = 1

    def __post_init__(self):
        if self.g.arity != 1 or not self.g.is_real:
            raise ArityMismatch("SqrtSplit needs a real one-variable spec")
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")

    def _eval(self, x):
        v = np.real(self.g._eval(x))
        r = np.sqrt(np.abs(v))
        return r if self.sign == 1 else np.sign(v) * r

    def breakpoints(self):
        return self.g.breakpoints()

    def to_json(self):
        return {"type": "sqrt_split", "g": self.g.to_json(), "sign": self.sign}


@dataclass(frozen=True)
class PiecewisePhase(FunctionSpec):
    """(u, v) -> exp(sign 2 pi i N(u) v) with N piecewise constant.

    ``pieces`` lists (lo, hi, frequency); N is zero off the pieces.
    """

    pieces: tuple[tuple[float, float, float], ...]
    sign: int = 1
    arity: int = field(default=2, init=False)

    is_real = False

    def __post_init__(self):
        pieces = tuple((float(a), float(b), float(f)) for a, b, f in self.pieces)
        for a, b, _ in pieces:
            if not a < b:
                raise ValueError("phase pieces need lo < hi")
        object.__setattr__(self, "pieces", pieces)

    def frequency(self, u):
        u = np.asarray(u, dtype=float)
        n = np.zeros(u.shape)
        for a, b, f in self.pieces:
            n = np.where((u >= a) & (u < b), f, n)
        return n

    def _eval(self, u, v):
        return np.exp(self.sign * 2j * math.pi * self.frequency(u) * v)

    def edges(self) -> tuple[float, ...]:
        return _sorted_unique(e for a, b, _ in self.pieces for e in (a, b))

    def to_json(self):
        return {"type": "phase", "pieces": [list(p) for p in self.pieces], "sign": self.sign}


def eval_spec(spec: FunctionSpec, point: Sequence[float] | float) -> complex:
    coords = np.atleast_1d(np.asarray(point, dtype=float))
    if coords.ndim != 1 or coords.size != spec.arity:
        raise ArityMismatch(f"spec has arity {spec.arity}, point has {coords.size} coordinate(s)")
    return complex(spec(*coords))


# -- JSON ---------------------------------------------------------------------


def spec_to_json(spec: FunctionSpec) -> dict:
    return spec.to_json()


def spec_from_json(obj) -> FunctionSpec:
    if isinstance(obj, str):
        obj = json.loads(obj)
    kind = obj.get("type")
    sub = spec_from_json
    if kind == "gaussian":
        return Gaussian(float(obj.get("a", 1.0)))
    if kind == "box":
        return Box(float(obj["lo"]), float(obj["hi"]))
    if kind == "bump":
        return SmoothBump()
    if kind == "sign_window":
        return SignWindow(float(obj["M"]))
    if kind == "sign_step":
        return SignStep()
    if kind == "smooth_sign":
        return SmoothSign()
    if kind == "constant":
        v = obj.get("value", 0.0)
        v = complex(*v) if isinstance(v, list) else v
        return Constant(v, int(obj.get("arity", 1)))
    if kind == "linf_dilate":
        return LinfDilate(float(obj["N"]), sub(obj["of"]))
    if kind == "scale":
        return Scale(float(obj["c"]), sub(obj["of"]))
    if kind == "translate":
        return Translate(tuple(np.atleast_1d(obj["shift"])), sub(obj["of"]))
    if kind == "modulate":
        return Modulate(float(obj["freq"]), sub(obj["of"]))
    if kind == "bandlimited_m":
        return BandlimitedM()
    if kind == "table":
        return Table(float(obj["x0"]), float(obj["dx"]), tuple(obj["values"]))
    if kind == "sum":
        return Sum(tuple(sub(t) for t in obj["terms"]))
    if kind == "product":
        return Product(tuple(sub(t) for t in obj["terms"]))
    if kind == "tensor":
        return Tensor(sub(obj["fx"]), sub(obj["fy"]))
    if kind == "pullback":
        return Pullback(tuple(map(tuple, obj["matrix"])), sub(obj["of"]), obj.get("offset"))
    if kind == "sqrt_split":
        return SqrtSplit(sub(obj["g"]), int(obj.get("sign", 1)))
    if kind == "phase":
        return PiecewisePhase(tuple(map(tuple, obj["pieces"])), int(obj.get("sign", 1)))
    raise ValueError(f"unknown function spec type {kind!r}")
