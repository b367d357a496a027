"""Truncated principal value forms on tensor quadrature grids.

Every singular integral is computed as

    int_eps^T  [ I(t) k(t) + I(-t) k(-t) ] dt

with the two signs of t summed at the same node, so an unpaired 1/t is never
sampled.  t uses log spaced panels between eps and T, the spatial axes use
composite Gauss-Legendre panels with edges at known jumps.  With
``refine=True`` the same integral is recomputed on a grid with half the
panels and the difference is reported as the error estimate.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from . import _kernels
from .datum import BLDatum, NormalForm
from .exactla import RationalMatrix, nullspace, solve
from .specs import BandlimitedM, FunctionSpec, M_TABLE_TMAX, PiecewisePhase, Pullback, SmoothBump

__all__ = [
    "QuadConfig",
    "QuadResult",
    "NotConverged",
    "Factor",
    "paired_form",
    "hilbert_pairing",
    "pv_form",
    "smoothed_form_4beta",
    "tht_form",
    "bht_form",
    "carleson_form",
    "trunc_special_form",
    "datum_form",
    "lp_norm",
    "gl_rule",
    "log_rule",
]

_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _gauss(order: int):
    if order not in _GL_CACHE:
        _GL_CACHE[order] = np.polynomial.legendre.leggauss(order)
    return _GL_CACHE[order]


@dataclass(frozen=True)
class QuadConfig:
    t_eps: float = 1e-3
    t_max: float = 1e3
    t_panels: int = 64
    xy_box: float = 12.0
    xy_points: int = 256
    refine: bool = True
    # extensions: Gauss order, tolerance, per-axis boxes and panel edges
    order: int = 8
    rtol: float = 1e-3
    atol: float = 1e-9
    bounds: tuple[tuple[float, float], ...] | None = None
    breaks: tuple[tuple[float, ...], ...] | None = None
    t_breaks: tuple[float, ...] = ()
    strict: bool = False

    def __post_init__(self):
        if not (0 < self.t_eps < self.t_max):
            raise ValueError("need 0 < t_eps < t_max")
        if self.t_panels < 4:
            raise ValueError("need at least 4 t panels")
        if self.xy_points < 16:
            raise ValueError("need at least 16 points per spatial axis")
        if not self.xy_box > 0 or self.order < 1:
            raise ValueError("xy_box and order must be positive")
        if self.bounds is not None:
            object.__setattr__(self, "bounds", tuple((float(a), float(b)) for a, b in self.bounds))
        if self.breaks is not None:
            object.__setattr__(self, "breaks", tuple(tuple(float(x) for x in b) for b in self.breaks))
        object.__setattr__(self, "t_breaks", tuple(float(x) for x in self.t_breaks))

    def coarse(self) -> "QuadConfig":
        """Half the panels on every axis; may go below the user minimums."""
        out = object.__new__(QuadConfig)
        out.__dict__.update(self.__dict__)
        object.__setattr__(out, "t_panels", max(2, self.t_panels // 2))
        object.__setattr__(out, "xy_points", max(self.order, self.xy_points // 2))
        return out

    def replace(self, **kw) -> "QuadConfig":
        return dataclasses.replace(self, **kw)

    def axis_bounds(self, axis: int) -> tuple[float, float]:
        if self.bounds is not None and axis < len(self.bounds):
            return self.bounds[axis]
        return (-self.xy_box, self.xy_box)

    def axis_breaks(self, axis: int) -> tuple[float, ...]:
        if self.breaks is not None and axis < len(self.breaks):
            return self.breaks[axis]
        return ()

    def to_json(self) -> dict:
        d = dataclasses.asdict(self)
        for k in ("bounds", "breaks"):
            if d[k] is not None:
                d[k] = [list(x) for x in d[k]]
        d["t_breaks"] = list(d["t_breaks"])
        return d

    @classmethod
    def from_json(cls, obj) -> "QuadConfig":
        if isinstance(obj, str):
            obj = json.loads(obj)
        kw = dict(obj)
        for k in ("bounds", "breaks"):
            if kw.get(k) is not None:
                kw[k] = tuple(tuple(x) for x in kw[k])
        if "t_breaks" in kw:
            kw["t_breaks"] = tuple(kw["t_breaks"])
        return cls(**kw)


@dataclass(frozen=True)
class QuadResult:
    value: complex
    error_estimate: float
    converged: bool
    refined: bool = True

    def to_json(self) -> dict:
        return {
            "value": [self.value.real, self.value.imag],
            "error_estimate": self.error_estimate,
            "converged": self.converged,
        }


class NotConverged(RuntimeError):
    def __init__(self, result: QuadResult, message: str = ""):
        super().__init__(message or f"refinement disagreement {result.error_estimate:.3g} above tolerance")
        self.result = result


def gl_rule(a: float, b: float, npoints: int, order: int = 8, breaks: Sequence[float] = ()):
    """Composite Gauss-Legendre rule on [a, b] with about ``npoints`` nodes."""
    npan = max(1, -(-npoints // order))
    edges = np.linspace(a, b, npan + 1)
    inner = [x for x in breaks if a < x < b]
    if inner:
        edges = np.unique(np.concatenate([edges, inner]))
        # drop slivers left next to a break
        keep = np.concatenate([[True], np.diff(edges) > 1e-12 * (b - a)])
        edges = edges[keep]
    return _panel_nodes(edges, order)


def log_rule(eps: float, tmax: float, panels: int, order: int = 8, breaks: Sequence[float] = ()):
    edges = np.geomspace(eps, tmax, panels + 1)
    inner = [x for x in breaks if eps < x < tmax]
    if inner:
        edges = np.unique(np.concatenate([edges, inner]))
        keep = np.concatenate([[True], np.diff(edges) > 1e-12 * edges[1:]])
        edges = edges[keep]
    return _panel_nodes(edges, order)


def _panel_nodes(edges, order):
    x, w = _gauss(order)
    mid = 0.5 * (edges[1:] + edges[:-1])[:, None]
    half = 0.5 * np.diff(edges)[:, None]
    return (mid + half * x).ravel(), (half * w).ravel()


def _finish(compute: Callable[[QuadConfig], complex], cfg: QuadConfig) -> QuadResult:
    value = complex(compute(cfg))
    if not cfg.refine:
        return QuadResult(value, 0.0, True, refined=False)
    coarse = complex(compute(cfg.coarse()))
    err = abs(value - coarse)
    ok = err <= cfg.atol + cfg.rtol * abs(value)
    res = QuadResult(value, err, bool(ok))
    if cfg.strict and not ok:
        raise NotConverged(res)
    return res


# -- the generic paired engine -------------------------------------------------------


@dataclass(frozen=True)
class Factor:
    """spec evaluated at  lin @ X + tco * t + off  (X the spatial point)."""

    spec: FunctionSpec
    lin: tuple[tuple[float, ...], ...]
    tco: tuple[float, ...]
    off: tuple[float, ...] | None = None

    def arrays(self, d):
        lin = np.zeros((self.spec.arity, 2))
        lin[:, :d] = np.asarray(self.lin, dtype=float).reshape(self.spec.arity, d)
        tco = np.asarray(self.tco, dtype=float).reshape(self.spec.arity)
        off = np.zeros(self.spec.arity) if self.off is None else np.asarray(self.off, dtype=float)
        return lin, tco, off


def _eval_factor(spec, lin, tco, off, X, tt):
    """Evaluate on the sub-grid the factor actually depends on."""
    args = []
    for i in range(spec.arity):
        acc = off[i]
        for j in range(2):
            if lin[i, j] != 0.0:
                acc = acc + lin[i, j] * X[j]
        if tt is not None and tco[i] != 0.0:
            acc = acc + tco[i] * tt
        args.append(acc)
    shape = np.broadcast_shapes(*(np.shape(a) for a in args))
    args = [np.broadcast_to(np.asarray(a, dtype=float), shape) for a in args]
    return spec._eval(*args)


def paired_form(factors: Sequence[Factor], dim: int, cfg: QuadConfig, kernel: Callable, t_nodes=None) -> complex:
    """sum over t nodes of kernel-weighted, spatially integrated products.

    ``kernel(t)`` gives the weight at signed t; both t and -t are used at
    every node.  ``t_nodes`` overrides the log rule on [eps, T].
    """
    if t_nodes is None:
        tn, tw = log_rule(cfg.t_eps, cfg.t_max, cfg.t_panels, cfg.order, cfg.t_breaks)
    else:
        tn, tw = t_nodes
    nodes, weights = [], []
    for a in range(dim):
        lo, hi = cfg.axis_bounds(a)
        n, w = gl_rule(lo, hi, cfg.xy_points, cfg.order, cfg.axis_breaks(a))
        nodes.append(n)
        weights.append(w)
    while len(nodes) < 2:
        nodes.append(np.zeros(1))
        weights.append(np.ones(1))
    X = (nodes[0][:, None], nodes[1][None, :])
    W = weights[0][:, None] * weights[1][None, :]

    static, dynamic = [], []
    for f in factors:
        lin, tco, off = f.arrays(dim)
        (dynamic if np.any(tco != 0) else static).append((f.spec, lin, tco, off))
    for spec, lin, tco, off in static:
        W = W * _eval_factor(spec, lin, tco, off, X, None)
    kp = tw * kernel(tn)
    km = tw * kernel(-tn)
    if not dynamic:
        return complex(np.sum(W) * (np.sum(kp) + np.sum(km)))

    X3 = (X[0][None], X[1][None])
    chunk = max(1, int(4_000_000 // W.size))
    total = 0j
    for s in range(0, tn.size, chunk):
        tt = tn[s : s + chunk][:, None, None]
        for sgn, kw in ((1.0, kp), (-1.0, km)):
            vals = [_eval_factor(spec, lin, tco, off, X3, sgn * tt) for spec, lin, tco, off in dynamic]
            total += _kernels.contract(vals, W, kw[s : s + chunk])
    return total


def _hilbert_kernel(t):
    return 1.0 / t


# -- named forms -------------------------------------------------------------------------


def hilbert_pairing(f: FunctionSpec, x: float, cfg: QuadConfig = QuadConfig()) -> QuadResult:
    """int_{eps <= |t| <= T} f(x + t) dt / t."""
    if f.arity != 1:
        raise ValueError("hilbert_pairing needs a one-variable spec")
    brk = tuple(abs(b - x) for b in f.breakpoints()) + cfg.t_breaks

    def run(c):
        tn, tw = log_rule(c.t_eps, c.t_max, c.t_panels, c.order, brk)
        return np.sum(tw / tn * (f(x + tn) - f(x - tn)))

    return _finish(run, cfg)


_FORM_FACTORS = {
    # (f, G, H) coefficient rows in the spatial variables (x, y) and t
    "L1": (([[1, 0]], [0]), ([[1, 0], [0, 1]], [0, 0]), ([[1, 0], [0, 1]], [0, 1])),
    "L2": (([[1, 0]], [0]), ([[1, 0], [0, 1]], [0, 0]), ([[1, 0], [0, 1]], [1, 0])),
    "L3": (([[1, 0]], [1]), ([[1, 0], [0, 1]], [0, 0]), ([[1, 0], [0, 1]], [0, 1])),
}


def _normal_form_factors(nf: NormalForm, f, G, H):
    if nf.tag == "L4":
        beta = float(nf.beta)
        rows = (([[1, 0]], [1]), ([[1, 0], [0, 1]], [0, 0]), ([[1, 0], [0, 1]], [beta, 0]))
    else:
        rows = _FORM_FACTORS[nf.tag]
    return [Factor(s, lin, tco) for s, (lin, tco) in zip((f, G, H), rows)]


def _check_arity(f, G, H):
    if f.arity != 1 or G.arity != 2 or H.arity != 2:
        raise ValueError("expected f of one variable and G, H of two")


def pv_form(nf: NormalForm, f: FunctionSpec, G: FunctionSpec, H: FunctionSpec, cfg: QuadConfig = QuadConfig()) -> QuadResult:
    """Truncated p.v. value of the standard form ``nf`` on (f, G, H).

    Spatial variables are (x, y); for example L4(beta) integrates
    f(x+t) G(x,y) H(x+beta t, y) / t.
    """
    _check_arity(f, G, H)
    if nf.tag == "Zero":
        # f(x) G(x,y) H(x,y) / t is odd in t, the symmetric truncation kills it
        return QuadResult(0j, 0.0, True, refined=cfg.refine)
    factors = _normal_form_factors(nf, f, G, H)
    return _finish(lambda c: paired_form(factors, 2, c, _hilbert_kernel), cfg)


def _m_t_rule(c: QuadConfig):
    # uniform panels: m oscillates with period about one
    npan = max(c.t_panels, int(2 * M_TABLE_TMAX))
    edges = np.linspace(0.0, M_TABLE_TMAX, npan + 1)
    return _panel_nodes(edges, c.order)


def smoothed_form_4beta(f, G, H, beta: float, cfg: QuadConfig = QuadConfig()) -> QuadResult:
    """int f(x+t) G(x,y) H(x+beta t, y) m(t) dt dx dy with the band limited m."""
    _check_arity(f, G, H)
    factors = _normal_form_factors(NormalForm("L4", Fraction(0)), f, G, H)
    factors[2] = Factor(H, ((1, 0), (0, 1)), (float(beta), 0.0))
    m = BandlimitedM()
    return _finish(lambda c: paired_form(factors, 2, c, m, t_nodes=_m_t_rule(c)), cfg)


def tht_form(F, G, H, cfg: QuadConfig = QuadConfig()) -> QuadResult:
    """p.v. int F(x,y) G(y,z) H(z,x) / (x+y+z).

    Computed in the variables (y, z, s) with s = x + y + z, so the kernel
    is 1/s and x = s - y - z (unit Jacobian).
    """
    if F.arity != 2 or G.arity != 2 or H.arity != 2:
        raise ValueError("tht_form takes three two-variable specs")
    factors = [
        Factor(F, ((-1, -1), (1, 0)), (1, 0)),
        Factor(G, ((1, 0), (0, 1)), (0, 0)),
        Factor(H, ((0, 1), (-1, -1)), (0, 1)),
    ]
    return _finish(lambda c: paired_form(factors, 2, c, _hilbert_kernel), cfg)


def bht_form(f, g, h, alpha: float, cfg: QuadConfig = QuadConfig()) -> QuadResult:
    """p.v. int f(x+t) g(x) h(x+alpha t) dt/t dx."""
    if f.arity != 1 or g.arity != 1 or h.arity != 1:
        raise ValueError("bht_form takes one-variable specs")
    factors = [Factor(f, ((1,),), (1,)), Factor(g, ((1,),), (0,)), Factor(h, ((1,),), (float(alpha),))]
    cfg = _with_breaks(cfg, 0, g.breakpoints())
    return _finish(lambda c: paired_form(factors, 1, c, _hilbert_kernel), cfg)


def carleson_form(f, g, phase: PiecewisePhase, cfg: QuadConfig = QuadConfig(), cutoff: FunctionSpec | None = None) -> QuadResult:
    """p.v. int f(x+t) exp(2 pi i N(x) t) g(x) [cutoff(t)] dt/t dx."""
    if f.arity != 1 or g.arity != 1:
        raise ValueError("carleson_form takes one-variable f and g")
    factors = [
        Factor(f, ((1,),), (1,)),
        Factor(g, ((1,),), (0,)),
        Factor(phase, ((1,), (0,)), (0, 1)),
    ]
    if cutoff is not None:
        factors.append(Factor(cutoff, ((0,),), (1,)))
    cfg = _with_breaks(cfg, 0, tuple(g.breakpoints()) + phase.edges())
    return _finish(lambda c: paired_form(factors, 1, c, _hilbert_kernel), cfg)


def trunc_special_form(f, G, H, alpha: float, cfg: QuadConfig = QuadConfig()) -> QuadResult:
    """p.v. int f(x + alpha y) phi(y) G(y,z) H(z,x) / (x+y+z), phi the SmoothBump.

    Same (y, z, s) variables as :func:`tht_form`.
    """
    _check_arity(f, G, H)
    a = float(alpha)
    factors = [
        Factor(f, ((a - 1, -1),), (1,)),
        Factor(SmoothBump(), ((1, 0),), (0,)),
        Factor(G, ((1, 0), (0, 1)), (0, 0)),
        Factor(H, ((0, 1), (-1, -1)), (0, 1)),
    ]
    cfg = _with_breaks(cfg, 0, SmoothBump().breakpoints())
    return _finish(lambda c: paired_form(factors, 2, c, _hilbert_kernel), cfg)


def datum_form(d: BLDatum, f, G, H, cfg: QuadConfig = QuadConfig()) -> QuadResult:
    """p.v. int_{R^3} f(P1 v) G(P2 v) H(P3 v) / (P4 v) dv for a datum (P1..P4).

    v = s u + y k1 + z k2 with P4 u = 1 and k1, k2 spanning ker P4.
    """
    _check_arity(f, G, H)
    p4 = d.pi4
    u = solve(p4, [1])
    if u is None:
        raise ValueError("the kernel map of the datum vanishes")
    k = nullspace(p4)
    frame = RationalMatrix([u.col(0), k[0], k[1]]).T
    jac = abs(float(frame.det()))
    factors = []
    for spec, p in zip((f, G, H), (d.pi1, d.pi2, d.pi3)):
        q = (p @ frame).to_float()
        factors.append(Factor(spec, tuple(map(tuple, q[:, 1:])), tuple(q[:, 0])))
    return _finish(lambda c: jac * paired_form(factors, 2, c, _hilbert_kernel), cfg)


def _with_breaks(cfg: QuadConfig, axis: int, extra) -> QuadConfig:
    extra = tuple(float(x) for x in extra)
    if not extra:
        return cfg
    ndim = max(axis + 1, len(cfg.breaks) if cfg.breaks else 0)
    br = [list(cfg.axis_breaks(a)) for a in range(ndim)]
    br[axis] = sorted(set(br[axis]) | set(extra))
    return cfg.replace(breaks=tuple(tuple(b) for b in br))


def lp_norm(s: FunctionSpec, p: float, dim: int | None = None, cfg: QuadConfig = QuadConfig()) -> float:
    """Grid L^p norm (sup over the grid for p = inf)."""
    dim = s.arity if dim is None else dim
    if dim != s.arity:
        raise ValueError("dim must match the spec arity")
    if not p >= 1:
        raise ValueError("p must lie in [1, inf]")
    axes = []
    for a in range(dim):
        lo, hi = cfg.axis_bounds(a)
        brk = cfg.axis_breaks(a) + (s.breakpoints() if dim == 1 else ())
        axes.append(gl_rule(lo, hi, 4 * cfg.xy_points, cfg.order, brk))
    if dim == 1:
        vals = np.abs(s(axes[0][0]))
        w = axes[0][1]
    else:
        vals = np.abs(s(axes[0][0][:, None], axes[1][0][None, :]))
        w = axes[0][1][:, None] * axes[1][1][None, :]
    if math.isinf(p):
        return float(np.max(vals))
    return float(np.sum(w * vals**p) ** (1.0 / p))


def pulled_back(spec: FunctionSpec, matrix) -> FunctionSpec:
    """spec composed with a linear map given as a float or exact matrix."""
    if isinstance(matrix, RationalMatrix):
        matrix = matrix.to_float()
    m = np.atleast_2d(np.asarray(matrix, dtype=float))
    return Pullback(tuple(map(tuple, m)), spec)
