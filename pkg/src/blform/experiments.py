"""Scripted numerical experiments: scaling sweeps, blow-up families and
reduction identities, with power-law fits and CSV/SVG output."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .datum import ExponentTriple, NormalForm, printed_witness
from .quadrature import (
    QuadConfig,
    bht_form,
    carleson_form,
    gl_rule,
    hilbert_pairing,
    log_rule,
    lp_norm,
    pv_form,
    smoothed_form_4beta,
    trunc_special_form,
)
from .specs import (
    BandlimitedM,
    Box,
    FunctionSpec,
    Gaussian,
    M_TABLE_TMAX,
    PiecewisePhase,
    Product,
    Pullback,
    Scale,
    SignStep,
    SignWindow,
    SmoothBump,
    SmoothSign,
    SqrtSplit,
    Table,
    Tensor,
    Translate,
    LinfDilate,
    bandlimited_m_hat,
)

__all__ = [
    "SweepResult",
    "VerdictReport",
    "NonPositiveData",
    "OracleFailure",
    "fit_power_law",
    "fit_linear",
    "gaussian_necessity_oracle",
    "exp_gaussian_necessity",
    "necessity_verdict",
    "tht_endpoint_construction",
    "tht_lower_bound_oracle",
    "exp_tht_endpoint",
    "exp_l40_blowup",
    "exp_l3_dilation",
    "exp_boundedness_sweep",
    "sign_family",
    "reduction_multiplier",
    "exp_reduction_bht",
    "carleson_cutoff",
    "carleson_construction",
    "exp_reduction_carleson",
    "sweep_to_csv",
    "sweep_to_svg",
    "sweep_from_csv",
    "tht_verdict",
    "l40_verdict",
    "l3_verdict",
]


class NonPositiveData(ValueError):
    pass


class OracleFailure(RuntimeError):
    pass


@dataclass
class SweepResult:
    name: str
    parameters: list[float]
    values: list[float]
    errors: list[float]
    slope: float
    r2: float
    lhs: list[float] = field(default_factory=list)
    rhs: list[float] = field(default_factory=list)
    ratio: list[float] = field(default_factory=list)
    intercept: float = 0.0
    notes: list[str] = field(default_factory=list)
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        n = len(self.parameters)
        if n < 3 or len(self.values) != n or len(self.errors) != n:
            raise ValueError("a sweep needs at least 3 points and equal-length columns")
        for col in (self.lhs, self.rhs, self.ratio):
            if col and len(col) != n:
                raise ValueError("optional columns must match the sweep length")

    def column(self, name: str) -> list[float]:
        vals = getattr(self, name)
        return vals if vals else [math.nan] * len(self.parameters)


@dataclass
class VerdictReport:
    name: str
    passed: bool
    diagnostics: list[str]
    sweeps: list[SweepResult] = field(default_factory=list)
    data: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.passed and not self.diagnostics:
            raise ValueError("a failing verdict needs at least one diagnostic")

    def summary(self) -> str:
        head = f"{self.name}: {'PASS' if self.passed else 'FAIL'}"
        return "\n".join([head] + ["  " + d for d in self.diagnostics])


def fit_linear(xs, ys) -> tuple[float, float, float]:
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.size < 3 or x.size != y.size:
        raise ValueError("need at least 3 paired points")
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    sst = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if sst == 0 else max(0.0, 1.0 - float(np.sum(resid**2)) / sst)
    return float(slope), float(intercept), min(r2, 1.0)


def fit_power_law(xs, ys) -> tuple[float, float, float]:
    """Least squares fit of ln y = slope ln x + intercept."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if np.any(x <= 0) or np.any(y <= 0):
        raise NonPositiveData("power-law fit needs positive data")
    return fit_linear(np.log(x), np.log(y))


def _sweep(name, params, values, errors, lhs=(), rhs=(), ratio=(), notes=(), log_x=True) -> SweepResult:
    fitter = fit_power_law if log_x else fit_linear
    slope, icpt, r2 = fitter(params, values)
    fl = lambda xs: [float(x) for x in xs]
    return SweepResult(name, fl(params), fl(values), fl(errors), slope, r2, fl(lhs), fl(rhs), fl(ratio), icpt, list(notes))


def _rng(seed):
    return np.random.default_rng(seed)


# -- Gaussian family for the smoothed form ---------------------------------------


def gaussian_necessity_oracle(beta: float, eps: float) -> float:
    """Closed form of the smoothed form on the Gaussian family.

    With f = exp(-pi x^2), G = H = exp(-pi (x^2 + eps y^2)) the x, y and t
    integrals are Gaussian, leaving (2 eps)^(-1/2) (3c)^(-1/2) times
    int m_hat(xi) exp(-pi xi^2 / c) d xi, c = (2 beta^2 - 2 beta + 2)/3.
    """
    c = (2 * beta * beta - 2 * beta + 2) / 3
    xn, xw = gl_rule(0.5, 1.5, 512, 8)
    integral = float(np.sum(xw * bandlimited_m_hat(xn) * np.exp(-math.pi * xn * xn / c)))
    return (2 * eps) ** -0.5 * (3 * c) ** -0.5 * integral


def _m_l1_norm() -> float:
    tn, tw = gl_rule(-M_TABLE_TMAX, M_TABLE_TMAX, 16000, 8)
    return float(np.sum(tw * np.abs(BandlimitedM()(tn))))


def exp_gaussian_necessity(beta: float, p2: float, p3: float, eps_list=(1, 1 / 4, 1 / 16, 1 / 64), cfg: QuadConfig | None = None, oracle_rtol: float = 1e-3):
    """LHS and RHS sweeps of the smoothed form against the norm product."""
    eps_list = [float(e) for e in eps_list]
    if len(eps_list) < 3 or any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise ValueError("eps_list must be decreasing with at least 3 entries")
    cfg = cfg or QuadConfig(xy_points=128)
    f = Gaussian()
    m1 = _m_l1_norm()
    lhs, errs, rhs, notes = [], [], [], []
    for eps in eps_list:
        G = Tensor(Gaussian(), Gaussian(1 / math.sqrt(eps)))
        yb = 6.5 / math.sqrt(eps)
        c = cfg.replace(bounds=((-6.5, 6.5), (-yb, yb)))
        r = smoothed_form_4beta(f, G, G, beta, c)
        val = abs(r.value)
        orc = gaussian_necessity_oracle(beta, eps)
        if abs(val - orc) > oracle_rtol * orc + r.error_estimate:
            raise OracleFailure(f"eps={eps}: quadrature {val:.10g} vs closed form {orc:.10g}")
        notes.append(f"eps={eps:g}: closed form {orc:.10g}")
        lhs.append(val)
        errs.append(r.error_estimate)
        ncfg = c.replace(xy_points=256)
        rhs.append(lp_norm(f, math.inf, 1, ncfg) * lp_norm(G, p2, 2, ncfg) * lp_norm(G, p3, 2, ncfg) * m1)
    ratio = [a / b for a, b in zip(lhs, rhs)]
    left = _sweep("gaussian-necessity-lhs", eps_list, lhs, errs, lhs, rhs, ratio, notes)
    right = _sweep("gaussian-necessity-rhs", eps_list, rhs, [0.0] * len(rhs), lhs, rhs, ratio)
    return left, right


def necessity_verdict(lhs: SweepResult, rhs: SweepResult, p2: float, p3: float) -> VerdictReport:
    expected = -0.5 * (1 / p2 + 1 / p3)
    diags = [
        f"LHS slope {lhs.slope:.4f} (want -0.50 +- 0.05)",
        f"RHS slope {rhs.slope:.4f} (want {expected:.4f} +- 0.02)",
    ]
    ok = abs(lhs.slope + 0.5) <= 0.05 and abs(rhs.slope - expected) <= 0.02
    ratio = lhs.ratio
    rslope = fit_power_law(lhs.parameters, ratio)[0]
    increasing = all(b > a for a, b in zip(ratio, ratio[1:]))
    diverges = increasing and rslope < -0.05
    endpoint = abs(1 / p2 + 1 / p3 - 1) < 1e-12
    diags.append(f"ratio slope {rslope:.4f}, {'diverges' if diverges else 'bounded'} (endpoint pair: {endpoint})")
    ok = ok and (diverges != endpoint)
    return VerdictReport("gaussian-necessity", ok, diags, [lhs, rhs], {"ratio_slope": rslope, "diverges": diverges})


# -- the triangular endpoint counterexample -------------------------------------


def tht_endpoint_construction(delta: float, p2: float = 2.0):
    """(F, G, H) with norms 1 in L^inf x L^p2 x L^p3, 1/p2 + 1/p3 = 1.

    F(x, y) = S(x + y) for the three-level step S, G a normalised thin slab
    in y, H a normalised slab along the anti-diagonal.
    """
    p3 = p2 / (p2 - 1)
    F = Pullback(((1, 1),), SignStep())
    G = Tensor(Scale(delta ** (-1 / p2), Box(-delta, 0)), Box(0, 1))
    H = Pullback(((1, 0), (1, 1)), Tensor(Box(0, 1), Scale(delta ** (-1 / p3), Box(0, delta))))
    return F, G, H


def tht_lower_bound_oracle(delta: float) -> float:
    """2 (ln(delta/2) - 1 + 2/delta): int_{2<=|t|<=delta} (1 - |t|/delta)/|t| dt."""
    return 2 * (math.log(delta / 2) - 1 + 2 / delta)


def _lower_bound_integral(g: FunctionSpec, h: FunctionSpec, t_lo: float, t_hi: float, cfg: QuadConfig) -> float:
    """int_{t_lo <= |t| <= t_hi} int g(y) h(y + t) dy dt / |t|, y-panels cut at every jump."""
    tn, tw = log_rule(t_lo, t_hi, cfg.t_panels, cfg.order)
    gb, hb = g.breakpoints(), h.breakpoints()
    lo, hi = min(gb + hb), max(gb + hb)
    total = 0.0
    for t, w in zip(tn, tw):
        for s in (t, -t):
            brk = gb + tuple(b - s for b in hb)
            yn, yw = gl_rule(lo - abs(s), hi + abs(s), 2 * cfg.order, cfg.order, brk)
            total += w / t * float(np.sum(yw * np.real(g(yn) * h(yn + s))))
    return total


def exp_tht_endpoint(delta_list=(1e2, 1e3, 1e4), p2: float = 2.0, cfg: QuadConfig | None = None, oracle_rtol: float = 0.01) -> SweepResult:
    cfg = cfg or QuadConfig()
    p3 = p2 / (p2 - 1)
    vals, errs, rhs, notes = [], [], [], []
    for d in delta_list:
        if d < 4:
            raise ValueError("delta must be at least 4")
        g = Scale(d ** (-1 / p2), Box(0, d))
        h = Scale(d ** (-1 / p3), Box(0, d))
        v = _lower_bound_integral(g, h, 2.0, d, cfg)
        coarse = _lower_bound_integral(g, h, 2.0, d, cfg.coarse())
        orc = tht_lower_bound_oracle(d)
        if abs(v - orc) > oracle_rtol * abs(orc):
            raise OracleFailure(f"delta={d}: quadrature {v:.10g} vs closed form {orc:.10g}")
        notes.append(f"delta={d:g}: closed form {orc:.10g}")
        vals.append(v)
        errs.append(abs(v - coarse))
        ncfg = QuadConfig(bounds=((-1.0, d + 1.0),), xy_points=64)
        rhs.append(lp_norm(g, p2, 1, ncfg) * lp_norm(h, p3, 1, ncfg))
    ratio = [v / r for v, r in zip(vals, rhs)]
    return _sweep("tht-endpoint", list(delta_list), vals, errs, vals, rhs, ratio, notes)


# -- unbounded standard forms ----------------------------------------------------------


def _gauss2():
    return Tensor(Gaussian(), Gaussian())


def exp_l40_blowup(M_list=(10, 100, 1000), G: FunctionSpec | None = None, H: FunctionSpec | None = None, family: str = "sign", cfg: QuadConfig | None = None) -> SweepResult:
    """|L4(0)(f_M, G, H)| against ln M; the fitted slope is per unit ln M."""
    G = G or _gauss2()
    H = H or _gauss2()
    base = cfg or QuadConfig(xy_points=128, xy_box=7.0)
    vals, errs, rhs = [], [], []
    for M in M_list:
        if M < 10:
            raise ValueError("M must be at least 10")
        f = SignWindow(M) if family == "sign" else Gaussian()
        c = base.replace(t_max=max(base.t_max, 10.0 * M), t_breaks=(M,))
        r = pv_form(NormalForm("L4", Fraction(0)), f, G, H, c)
        vals.append(abs(r.value))
        errs.append(r.error_estimate)
        rhs.append(lp_norm(f, math.inf, 1, base) * lp_norm(G, 2, 2, base) * lp_norm(H, 2, 2, base))
    gh = _pairing_2d(G, H, base)
    logs = [math.log(M) for M in M_list]
    slope, icpt, r2 = fit_linear(logs, vals)
    ratio = [v / r for v, r in zip(vals, rhs)]
    out = SweepResult("l40-blowup", list(M_list), vals, errs, slope, r2, vals, rhs, ratio, icpt)
    out.notes.append(f"int G H = {gh:.10g}; slope / int G H = {slope / gh if gh else math.nan:.6g}")
    out.extras.update(int_gh=gh)
    return out


def _pairing_2d(G, H, cfg: QuadConfig) -> float:
    axes = [gl_rule(*cfg.axis_bounds(a), 4 * cfg.xy_points, cfg.order, cfg.axis_breaks(a)) for a in range(2)]
    (xn, xw), (yn, yw) = axes
    vals = np.real(G(xn[:, None], yn[None, :]) * H(xn[:, None], yn[None, :]))
    return float(np.sum(xw[:, None] * yw[None, :] * vals))


def exp_l3_dilation(N_list=(16, 32, 64, 128, 256), f: FunctionSpec | None = None, g: FunctionSpec | None = None, cfg: QuadConfig | None = None) -> SweepResult:
    """value/N of L3 on the dilated split construction, and the norm product.

    ``values`` holds value/N, ``rhs`` the norm product ||f||_inf ||G||_2 ||H||_2
    whose power law slope is stored in ``notes``.
    """
    f = f or SignWindow(50.0)
    g = g or Box(0.0, 1.0)
    base = cfg or QuadConfig(xy_points=128)
    phi = SmoothBump()
    fb = f.breakpoints()
    gb = g.breakpoints()
    xlo, xhi = (min(gb), max(gb)) if gb else (-base.xy_box, base.xy_box)
    reach = max((abs(b) for b in fb), default=base.xy_box)
    vals, errs, lhs, rhs = [], [], [], []
    for N in N_list:
        if N < 4:
            raise ValueError("N must be at least 4")
        G = Tensor(SqrtSplit(g, -1), LinfDilate(N, phi))
        H = Tensor(SqrtSplit(g, 1), LinfDilate(N, phi))
        c = base.replace(
            bounds=((xlo, xhi), (-N, N)),
            breaks=((), (-0.9 * N, 0.9 * N)),
            t_max=max(base.t_max, 2 * N + reach + abs(xhi) + abs(xlo)),
            t_breaks=tuple(sorted({abs(b) for b in fb} | {abs(b) + 1 for b in fb})),
        )
        r = pv_form(NormalForm("L3"), f, G, H, c)
        vals.append(r.value.real / N)
        errs.append(r.error_estimate / N)
        lhs.append(r.value.real)
        ncfg = c.replace(xy_points=128)
        rhs.append(lp_norm(f, math.inf, 1, QuadConfig()) * lp_norm(G, 2, 2, ncfg) * lp_norm(H, 2, 2, ncfg))
    ratio = [a / b for a, b in zip(lhs, rhs)]
    nslope, _, _ = fit_power_law(N_list, rhs)
    limit = _l3_limit(f, g, phi, xlo, xhi)
    slope, icpt, r2 = fit_power_law(N_list, np.abs(vals))
    out = SweepResult("l3-dilation", list(N_list), vals, errs, slope, r2, lhs, rhs, ratio, icpt)
    out.notes += [f"norm product slope {nslope:.6f}", f"limit of value/N {limit:.10g}"]
    out.extras.update(norm_slope=nslope, limit=limit)
    return out


def _l3_limit(f, g, phi, xlo, xhi) -> float:
    """||phi||_2^2 int g(x) (p.v. int f(x+t) dt/t) dx."""
    c = QuadConfig(t_eps=1e-9, t_max=1e7, t_panels=128, refine=False)
    xn, xw = gl_rule(xlo, xhi, 64, 8, g.breakpoints())
    hv = np.array([hilbert_pairing(f, x, c).value.real for x in xn])
    return lp_norm(phi, 2) ** 2 * float(np.sum(xw * np.real(g(xn)) * hv))


# -- boundedness sweep --------------------------------------------------------------


def _random_gaussian(rng) -> FunctionSpec:
    width = float(np.exp(rng.uniform(math.log(0.5), math.log(2.0))))
    shift = float(rng.uniform(-2.0, 2.0))
    return Translate((shift,), Gaussian(width))


def _random_tensor(rng) -> FunctionSpec:
    return Tensor(_random_gaussian(rng), _random_gaussian(rng))


_FORM_CACHE: dict = {}


def sign_family(w: float) -> FunctionSpec:
    """Smooth odd function with sup norm 1: sign-like on 1 <= |x| <= 0.9 w,
    zero for |x| >= w.  Its Hilbert transform near 0 grows like 2 ln w."""
    return Product((SmoothSign(), LinfDilate(w, SmoothBump())))


def exp_boundedness_sweep(nf: NormalForm, p: ExponentTriple, seeds: int = 20, widths: Sequence[float] | None = None, seed: int = 0, cfg: QuadConfig | None = None) -> VerdictReport:
    """Ratio |form| / (||f||_inf ||G||_p2 ||H||_p3) over random Gaussian G, H
    and the smooth sign family f = sign_family(w) of growing width w.

    Random protocol: numpy default_rng(seed); per trial G then H, each a
    tensor of two Gaussians with log-uniform width in [0.5, 2] and uniform
    shift in [-2, 2].
    """
    if not p.in_endpoint_range():
        raise ValueError("exponents must lie in the endpoint range")
    widths = list(widths) if widths is not None else [float(w) for w in np.logspace(1, 3, 5)]
    base = cfg or QuadConfig(xy_points=64, xy_box=9.0, refine=False)
    rng = _rng(seed)
    p2, p3 = float(p.p2), float(p.p3)
    diags, worst_spread, worst_slope = [], 0.0, 0.0
    sweeps = []
    ok = True
    for trial in range(seeds):
        G, H = _random_tensor(rng), _random_tensor(rng)
        ng = lp_norm(G, p2, 2, base)
        nh = lp_norm(H, p3, 2, base)
        ratios, errs = [], []
        for w in widths:
            key = (nf, G, H, w, base)
            if key not in _FORM_CACHE:
                c = base.replace(t_max=max(base.t_max, 2.0 * w + 2 * base.xy_box))
                _FORM_CACHE[key] = pv_form(nf, sign_family(w), G, H, c)
            r = _FORM_CACHE[key]
            ratios.append(abs(r.value) / (ng * nh))
            errs.append(r.error_estimate / (ng * nh))
        if min(ratios) <= 0:
            ok = False
            diags.append(f"trial {trial}: vanishing ratio")
            continue
        s = _sweep(f"boundedness-{nf}-trial{trial}", widths, ratios, errs)
        sweeps.append(s)
        spread = max(ratios) / min(ratios)
        worst_spread = max(worst_spread, spread)
        worst_slope = max(worst_slope, abs(s.slope))
        if spread >= 5 or abs(s.slope) >= 0.1:
            ok = False
            diags.append(f"trial {trial}: max/min {spread:.3f}, slope {s.slope:.4f}")
    diags.insert(0, f"{nf} at {p}: worst max/min {worst_spread:.4f}, worst |slope| {worst_slope:.4f} over {seeds} trials")
    return VerdictReport(f"boundedness {nf}", ok, diags, sweeps, {"worst_spread": worst_spread, "worst_slope": worst_slope})


# -- reduction identities ------------------------------------------------------------


def reduction_multiplier(alpha: float, step: float = 1e-3) -> Table:
    """m(x) = int phi((x + y)/(alpha - 1)) phi(y)^2 dy as an interpolation table."""
    phi = SmoothBump()
    reach = abs(alpha - 1) + 1
    xs = np.arange(-reach, reach + step / 2, step)
    yn, yw = gl_rule(-1, 1, 256, 8, phi.breakpoints())
    vals = (phi((xs[:, None] + yn[None, :]) / (alpha - 1)) * phi(yn)[None, :] ** 2) @ yw
    return Table(float(xs[0]), step, tuple(vals))


def exp_reduction_bht(alpha: float, trials: int = 5, seed: int = 0, cfg: QuadConfig | None = None, rtol: float = 1e-3) -> VerdictReport:
    """Special form with (g x phi) o A2, (h x phi) o A3 against BHT with multiplier."""
    if alpha == 1:
        raise ValueError("alpha must differ from 1")
    w = printed_witness(Fraction(alpha).limit_denominator(10**6))
    a2, a3 = w.a2.to_float(), w.a3.to_float()
    detb = abs(float(w.b.det()))
    phi = SmoothBump()
    mult = reduction_multiplier(alpha)
    base = cfg or QuadConfig(xy_points=128, t_max=100.0)
    sp_cfg = base.replace(bounds=((-1, 1), (-1, 1)), breaks=((-0.9, 0.9), (-0.9, 0.9)))
    reach = abs(alpha - 1) + 1
    bht_cfg = base.replace(xy_points=2 * base.xy_points, bounds=((-reach, reach),))
    rng = _rng(seed)
    ok, diags, worst = True, [], 0.0
    for trial in range(trials):
        f, g, h = (_random_gaussian(rng) for _ in range(3))
        G = Pullback(tuple(map(tuple, a2)), Tensor(g, phi))
        H = Pullback(tuple(map(tuple, a3)), Tensor(h, phi))
        lhs = trunc_special_form(f, G, H, alpha, sp_cfg)
        rhs = bht_form(f, Product((g, mult)), h, 1 - alpha, bht_cfg)
        left = lhs.value / detb
        rel = abs(left - rhs.value) / max(abs(rhs.value), 1e-300)
        worst = max(worst, rel)
        if rel > rtol:
            ok = False
            diags.append(f"trial {trial}: {left:.10g} vs {rhs.value:.10g} (rel {rel:.2e})")
    xs = np.linspace(-reach - 0.5, reach + 0.5, 2001)
    mv = mult(xs)
    upper = 2 * abs(alpha - 1) + 2
    lower = min(2.0, 2 * abs(alpha - 1))
    diags.insert(0, f"alpha={alpha}: worst relative disagreement {worst:.2e} over {trials} trials")
    diags.append(f"multiplier range [{mv.min():.4f}, {mv.max():.4f}]; upper bound {upper:g} holds: {bool(mv.max() <= upper)}")
    diags.append(f"lower bound {lower:g} holds on the grid: {bool(mv.min() >= lower)} (multiplier has compact support)")
    return VerdictReport(f"reduce-bht alpha={alpha}", ok, diags, data={
        "worst_rel": worst,
        "m_max": float(mv.max()),
        "m_min": float(mv.min()),
        "upper_ok": bool(mv.max() <= upper),
        "lower_ok": bool(mv.min() >= lower),
    })


def carleson_cutoff(step: float = 1e-3) -> Table:
    """Phi(s) = int phi(y)^2 phi(s - y) dy, supported in [-2, 2]."""
    phi = SmoothBump()
    yn, yw = gl_rule(-1, 1, 256, 8, phi.breakpoints())
    ss = np.arange(-2.0, 2.0 + step / 2, step)
    return Table(-2.0, step, tuple((phi(yn) ** 2 * phi(ss[:, None] - yn[None, :])) @ yw))


def carleson_construction(g: FunctionSpec, phase: PiecewisePhase):
    """G(y, z), H(z, x) turning the special form at alpha = 1 into a
    Carleson form in the variable u = -z."""
    phi = SmoothBump()
    G = Product((
        Pullback(((0, -1), (1, 0)), phase),
        Pullback(((0, -1),), SqrtSplit(g, -1)),
        Pullback(((1, 0),), phi),
    ))
    H = Product((
        Pullback(((-1, 0), (1, 1)), phase),
        Pullback(((-1, 0),), SqrtSplit(g, 1)),
        Pullback(((1, 1),), phi),
    ))
    return G, H


def _random_phase(rng, steps: int, center: float = 0.0, span: float = 50.0) -> PiecewisePhase:
    freqs = rng.integers(-4, 5, size=steps).astype(float)
    if steps == 1:
        return PiecewisePhase(((-span, span, float(freqs[0])),))
    # cuts near the centre of g so every piece sees part of it
    cuts = np.sort(center + rng.uniform(-0.5, 0.5, size=steps - 1))
    edges = [-span, *cuts.tolist(), span]
    return PiecewisePhase(tuple((edges[i], edges[i + 1], float(freqs[i])) for i in range(steps)))


def exp_reduction_carleson(freq_steps: int = 1, trials: int = 5, seed: int = 0, cfg: QuadConfig | None = None, rtol: float = 1e-3, phases: Sequence[PiecewisePhase] | None = None) -> VerdictReport:
    """Special form at alpha = 1 against the Carleson form with cutoff Phi."""
    base = cfg or QuadConfig(xy_points=128, t_max=20.0)
    cutoff = carleson_cutoff()
    rng = _rng(seed)
    phi_l1 = lp_norm(SmoothBump(), 1)
    ok, diags, worst = True, [], 0.0
    for trial in range(trials):
        f, g = _random_gaussian(rng), _random_gaussian(rng)
        phase = phases[trial % len(phases)] if phases else _random_phase(rng, freq_steps, g.shift[0])
        G, H = carleson_construction(g, phase)
        edges = tuple(-e for e in phase.edges() if abs(e) < base.xy_box)
        lhs = trunc_special_form(f, G, H, 1.0, base.replace(bounds=((-1, 1), (-base.xy_box, base.xy_box)), breaks=((-0.9, 0.9), edges)))
        rhs = carleson_form(f, g, phase, base, cutoff=cutoff)
        rel = abs(lhs.value - rhs.value) / max(abs(rhs.value), 1e-300)
        worst = max(worst, rel)
        if rel > rtol:
            ok = False
            diags.append(f"trial {trial}: {lhs.value:.10g} vs {rhs.value:.10g} (rel {rel:.2e})")
        if trial == 0:
            # the uncut Carleson form times ||phi||_1, for comparison only
            plain = carleson_form(f, g, phase, base).value * phi_l1
            plain_rel = abs(lhs.value - plain) / max(abs(lhs.value), 1e-300)
    diags.insert(0, f"{freq_steps}-step phases: worst relative disagreement {worst:.2e} over {trials} trials")
    diags.append(f"||phi||_1 = {phi_l1:.10g}; cutoff Phi(0) = {float(cutoff(np.array(0.0))):.10g}")
    if trials:
        diags.append(f"trial 0 without the cutoff, times ||phi||_1: relative gap {plain_rel:.3e}")
    return VerdictReport(f"reduce-carleson steps={freq_steps}", ok, diags, data={"worst_rel": worst, "uncut_gap": plain_rel if trials else None})


# -- output -------------------------------------------------------------------------


def _fmt(x) -> str:
    return "nan" if x is None or (isinstance(x, float) and math.isnan(x)) else format(float(x), ".17g")


def sweep_to_csv(s: SweepResult, path=None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["parameter", "value", "error_estimate", "lhs", "rhs", "ratio"])
    for row in zip(s.parameters, s.values, s.errors, s.column("lhs"), s.column("rhs"), s.column("ratio")):
        w.writerow([_fmt(x) for x in row])
    text = buf.getvalue()
    if path is not None:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    return text


def sweep_from_csv(text: str, name: str = "sweep", log_x: bool = True) -> SweepResult:
    rows = list(csv.DictReader(io.StringIO(text)))
    col = lambda k: [float(r[k]) for r in rows]
    opt = lambda k: [] if all(r[k] == "nan" for r in rows) else col(k)
    return _sweep(name, col("parameter"), col("value"), col("error_estimate"), opt("lhs"), opt("rhs"), opt("ratio"), log_x=log_x)


def sweep_to_svg(s: SweepResult, path=None, width: int = 480, height: int = 360) -> str:
    """Single log-log pane: data points and the fitted line."""
    x = np.log10(np.asarray(s.parameters, dtype=float))
    y = np.log10(np.abs(np.asarray(s.values, dtype=float)))
    pad = 48
    x0, x1 = x.min(), x.max()
    y0, y1 = y.min(), y.max()
    x1 = x1 if x1 > x0 else x0 + 1
    y1 = y1 if y1 > y0 else y0 + 1
    px = lambda v: pad + (v - x0) / (x1 - x0) * (width - 2 * pad)
    py = lambda v: height - pad - (v - y0) / (y1 - y0) * (height - 2 * pad)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>',
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>',
        f'<text x="{width / 2:.1f}" y="{height - 12}" text-anchor="middle" font-size="12">log10 parameter</text>',
        f'<text x="14" y="{height / 2:.1f}" font-size="12" transform="rotate(-90 14 {height / 2:.1f})" text-anchor="middle">log10 |value|</text>',
        f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" font-size="13">{s.name}: slope {s.slope:.4f}</text>',
    ]
    # fitted line through the centroid in log10 coordinates
    icpt10 = np.mean(y) - s.slope * np.mean(x)
    parts.append(
        f'<line x1="{px(x0):.2f}" y1="{py(icpt10 + s.slope * x0):.2f}" x2="{px(x1):.2f}" y2="{py(icpt10 + s.slope * x1):.2f}" stroke="steelblue"/>'
    )
    for a, c in zip(x, y):
        parts.append(f'<circle cx="{px(a):.2f}" cy="{py(c):.2f}" r="3" fill="crimson"/>')
    parts.append("</svg>")
    text = "\n".join(parts) + "\n"
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text


# -- verdicts for the sweep experiments ------------------------------------------------


def tht_verdict(s: SweepResult) -> VerdictReport:
    flat = all(abs(r - 1.0) < 1e-6 for r in s.rhs)
    increasing = all(b > a for a, b in zip(s.ratio, s.ratio[1:]))
    diags = [f"norm products {['%.6g' % r for r in s.rhs]} (want 1)", f"ratios {['%.6g' % r for r in s.ratio]} increasing: {increasing}"]
    return VerdictReport("tht-endpoint", flat and increasing, diags + s.notes, [s])


def l40_verdict(s: SweepResult, band=(1.8, 2.2)) -> VerdictReport:
    gh = s.extras["int_gh"]
    k = s.slope / gh
    ok = band[0] <= k <= band[1]
    return VerdictReport("l40-blowup", ok, [f"slope vs ln M = {s.slope:.6g} = {k:.4f} x int G H (band {band})"], [s])


def l3_verdict(s: SweepResult, tol=0.1, norm_tol=0.05) -> VerdictReport:
    v = s.values
    succ = [b / a for a, b in zip(v, v[1:])]
    nslope = s.extras["norm_slope"]
    converging = abs(succ[-1] - 1) < tol and all(abs(b - 1) <= abs(a - 1) + 1e-12 for a, b in zip(succ, succ[1:]))
    ok = converging and abs(nslope - 1) <= norm_tol
    diags = [
        f"successive ratios of value/N {['%.4f' % r for r in succ]}",
        f"norm product slope {nslope:.4f} (want 1 +- {norm_tol})",
        f"value/N at largest N {v[-1]:.6g}, limit {s.extras['limit']:.6g}",
    ]
    return VerdictReport("l3-dilation", ok, diags, [s])
