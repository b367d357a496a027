import math
from fractions import Fraction

import numpy as np
import pytest

from blform import _kernels
from blform import datum as dm
from blform.classifier import classify
from blform.datum import NormalForm
from blform.quadrature import (
    NotConverged,
    QuadConfig,
    bht_form,
    carleson_form,
    datum_form,
    gl_rule,
    hilbert_pairing,
    log_rule,
    lp_norm,
    pulled_back,
    pv_form,
    smoothed_form_4beta,
    tht_form,
    trunc_special_form,
)
from blform.exactla import inverse
from blform.specs import (
    Box,
    Constant,
    Gaussian,
    LinfDilate,
    PiecewisePhase,
    Product,
    Pullback,
    Scale,
    SignWindow,
    SmoothBump,
    SqrtSplit,
    Tensor,
    Translate,
)


def sh(s, a=1.0):
    return Translate((s,), Gaussian(a))


F = sh(0.3, 1.2)
G = Tensor(sh(-0.4, 1.0), sh(0.2, 0.8))
H = Tensor(sh(0.5, 0.9), sh(-0.3, 1.1))
FAST = QuadConfig(xy_points=64, xy_box=8.0)


def gauss_product_integral(terms):
    """int prod exp(-pi (x - c)^2 / a^2) dx for (c, a) pairs."""
    P = sum(1 / a**2 for _, a in terms)
    S = sum(c / a**2 for c, a in terms)
    Q = sum(c * c / a**2 for c, a in terms)
    return np.sqrt(1 / P) * np.exp(-math.pi * (Q - S * S / P))


def l4_oracle(beta):
    yfac = gauss_product_integral([(0.2, 0.8), (-0.3, 1.1)])
    tn, tw = log_rule(1e-3, 1e3, 2000, 8)
    I = lambda t: gauss_product_integral([(0.3 - t, 1.2), (-0.4, 1.0), (0.5 - beta * t, 0.9)])
    return yfac * float(np.sum(tw * (I(tn) - I(-tn)) / tn))


# -- configuration -------------------------------------------------------------------


def test_config_invariants():
    for kw in ({"t_eps": 0}, {"t_eps": 2, "t_max": 1}, {"t_panels": 3}, {"xy_points": 8}):
        with pytest.raises(ValueError):
            QuadConfig(**kw)


def test_config_json_round_trip():
    c = QuadConfig(bounds=((0, 1), (-2, 2)), breaks=((0.5,), ()), t_breaks=(3.0,))
    assert QuadConfig.from_json(c.to_json()) == c


def test_rules_integrate_polynomials_and_logs():
    n, w = gl_rule(-1, 2, 32, 8, (0.25,))
    assert abs(np.sum(w * n**3) - (16 - 1) / 4) < 1e-12
    n, w = log_rule(1e-3, 1e3, 32)
    assert abs(np.sum(w / n) - math.log(1e6)) < 1e-10


# -- hilbert pairing --------------------------------------------------------------


def test_hilbert_pairing_of_even_function_vanishes():
    assert abs(hilbert_pairing(Gaussian(), 0.0).value) < 1e-14


@pytest.mark.parametrize("M", [10, 100, 1000])
def test_hilbert_log_law(M):
    r = hilbert_pairing(SignWindow(M), 0.0, QuadConfig(t_eps=1.0, t_max=1e4))
    assert abs(r.value.real - 2 * math.log(M)) < 1e-3 * 2 * math.log(M)


def test_hilbert_pairing_of_box():
    # int_{-2}^{-1} dt/t
    r = hilbert_pairing(Box(0, 1), 2.0)
    assert abs(r.value.real + math.log(2)) < 1e-10


def test_strict_raises_not_converged_with_value():
    cfg = QuadConfig(xy_points=16, t_panels=4, rtol=1e-12, atol=0.0, strict=True, xy_box=8.0)
    with pytest.raises(NotConverged) as info:
        pv_form(NormalForm("L4", Fraction(2)), F, G, H, cfg)
    assert info.value.result.value != 0


# -- norms ----------------------------------------------------------------------


def test_lp_norm_examples():
    assert abs(lp_norm(Gaussian(), 2) - 2**-0.25) < 1e-4
    d = 0.01
    for p in (1.5, 2, 3):
        assert abs(lp_norm(Scale(d ** (-1 / p), Box(0, d)), p) - 1) < 1e-9
    assert lp_norm(SignWindow(3), math.inf) == 1
    f, g = sh(0.2, 0.7), Box(-1, 1)
    cfg = QuadConfig(breaks=((), (-1.0, 1.0)))
    assert abs(lp_norm(Tensor(f, g), 3, cfg=cfg) - lp_norm(f, 3) * lp_norm(g, 3)) < 1e-6


# -- standard forms ---------------------------------------------------------------


@pytest.mark.parametrize("beta", [2.0, 0.5])
def test_l4_matches_gaussian_oracle(beta):
    r = pv_form(NormalForm("L4", Fraction(beta)), F, G, H, QuadConfig(xy_box=8.0))
    assert r.converged
    assert abs(r.value.real - l4_oracle(beta)) < 1e-7
    assert abs(r.value.imag) <= r.error_estimate + 1e-12


def test_l4_zero_annihilates_locally_constant_f():
    GG = Tensor(Gaussian(), Gaussian())
    r = pv_form(NormalForm("L4", Fraction(0)), Box(-9, 9), GG, GG, QuadConfig(t_max=5.0, xy_box=6.0, xy_points=64))
    assert abs(r.value) <= max(r.error_estimate, 1e-12)


def test_l4_one_bounded_by_norms():
    r = pv_form(NormalForm("L4", Fraction(1)), F, G, H, FAST)
    bound = lp_norm(F, math.inf) * lp_norm(G, 2) * lp_norm(H, 2)
    assert abs(r.value) <= 10 * bound


def test_zero_form_is_zero():
    assert pv_form(NormalForm("Zero"), F, G, H).value == 0


def test_l3_dilation_doubles_value():
    phi, g = SmoothBump(), Box(0, 1)
    vals = []
    for N in (8, 16):
        GN = Tensor(SqrtSplit(g, -1), LinfDilate(N, phi))
        HN = Tensor(SqrtSplit(g, 1), LinfDilate(N, phi))
        cfg = QuadConfig(bounds=((0, 1), (-N, N)), breaks=((), (-0.9 * N, 0.9 * N)), xy_points=64, t_max=2 * N + 20)
        vals.append(pv_form(NormalForm("L3"), Gaussian(), GN, HN, cfg).value.real)
    assert abs(vals[1] / vals[0] - 2) < 0.2


@pytest.mark.parametrize("nf", ["L1", "L2", "L3", "L4:2", "L4:0"])
def test_datum_form_agrees_with_standard_form(nf):
    nf = NormalForm.parse(nf)
    a = pv_form(nf, F, G, H, FAST)
    b = datum_form(dm.datum_of(nf), F, G, H, FAST)
    assert abs(a.value - b.value) < 1e-12


def test_witness_change_of_variables():
    # the special datum in its own coordinates against the pulled back standard form
    alpha = Fraction(2)
    d = dm.thtsp_datum(alpha)
    res = classify(d)
    w = res.witness
    cfg = QuadConfig(xy_points=96, xy_box=10.0)
    direct = datum_form(d, F, G, H, cfg)
    a4 = float(w.a4[0, 0])
    std_cfg = cfg.replace(t_eps=abs(a4) * cfg.t_eps, t_max=abs(a4) * cfg.t_max)
    moved = pv_form(
        res.normal_form,
        pulled_back(F, inverse(w.a1)),
        pulled_back(G, inverse(w.a2)),
        pulled_back(H, inverse(w.a3)),
        std_cfg,
    )
    scale = abs(float(w.b.det())) * a4
    assert abs(direct.value - scale * moved.value) <= 1e-6 + direct.error_estimate + abs(scale) * moved.error_estimate


def test_slice_consistency():
    # a non-tensor G: rotated Gaussian
    Grot = Pullback(((0.8, 0.6), (-0.6, 0.8)), Tensor(sh(0.3, 1.3), sh(-0.2, 0.7)))
    beta = 2.0
    cfg = QuadConfig(xy_points=96, xy_box=8.0)
    whole = pv_form(NormalForm("L4", Fraction(2)), F, Grot, H, cfg)
    yn, yw = gl_rule(-8.0, 8.0, 96, 8)
    total, err = 0j, 0.0
    c1 = QuadConfig(xy_points=96, xy_box=8.0)
    for y, w in zip(yn, yw):
        gy = Pullback(((1.0,), (0.0,)), Grot, (0.0, y))
        hy = Pullback(((1.0,), (0.0,)), H, (0.0, y))
        r = bht_form(F, gy, hy, beta, c1)
        total += w * r.value
        err += w * r.error_estimate
    assert abs(whole.value - total) <= whole.error_estimate + err + 1e-9


@pytest.mark.parametrize("levels", [[(16, 4), (32, 8), (64, 16)]])
@pytest.mark.parametrize("nf", ["L1", "L2", "L3", "L4:2", "L4:1/2"])
def test_refinement_halves_error(nf, levels):
    n = NormalForm.parse(nf)
    v = [pv_form(n, F, G, H, QuadConfig(xy_points=p, t_panels=t, xy_box=8.0, refine=False)).value for p, t in levels]
    assert abs(v[0] - v[1]) >= 2 * abs(v[1] - v[2])


# -- other forms ------------------------------------------------------------------


def test_bht_zero_g():
    assert bht_form(F, Constant(0.0), sh(0.1), 2.0, FAST).value == 0


def test_bht_against_naive_grid():
    g, h = sh(-0.2, 0.9), sh(0.4, 1.1)
    r = bht_form(F, g, h, 2.0, QuadConfig(xy_box=8.0))
    # independent uniform midpoint grid in x and a dense log grid in t
    x = np.linspace(-8, 8, 4001)[:-1] + 0.002
    t = np.geomspace(1e-3, 60, 6001)
    tm = np.sqrt(t[1:] * t[:-1])
    dt = np.diff(t)
    vals = F(x[None] + tm[:, None]) * g(x[None]) * h(x[None] + 2 * tm[:, None])
    vals -= F(x[None] - tm[:, None]) * g(x[None]) * h(x[None] - 2 * tm[:, None])
    naive = float(np.sum(dt / tm * vals.sum(axis=1) * 0.004))
    assert abs(r.value.real - naive) < 1e-4 * abs(naive) + r.error_estimate


def test_bht_alpha_zero_factorises():
    g, h = sh(-0.2, 0.9), sh(0.4, 1.1)
    r = bht_form(F, g, h, 0.0, QuadConfig(xy_box=8.0, xy_points=128))
    xn, xw = gl_rule(-8, 8, 128, 8)
    hf = np.array([hilbert_pairing(F, x).value.real for x in xn])
    assert abs(r.value.real - float(np.sum(xw * hf * g(xn) * h(xn)))) < 1e-8


def test_carleson_zero_phase_is_hilbert_pairing():
    g = sh(-0.2, 0.9)
    ph = PiecewisePhase(((-50.0, 50.0, 0.0),))
    r = carleson_form(F, g, ph, QuadConfig(xy_box=8.0, xy_points=128))
    b = bht_form(F, g, Constant(1.0), 0.0, QuadConfig(xy_box=8.0, xy_points=128))
    assert abs(r.value - b.value) < 1e-10


def test_carleson_linear_in_g_pieces():
    g = sh(0.1, 0.9)
    ph = PiecewisePhase(((-50.0, 0.3, 2.0), (0.3, 50.0, -1.0)))
    cfg = QuadConfig(xy_box=8.0, xy_points=128, t_max=100.0)
    whole = carleson_form(F, g, ph, cfg).value
    left = carleson_form(F, Product((g, Box(-50, 0.3))), ph, cfg).value
    right = carleson_form(F, Product((g, Box(0.3, 50))), ph, cfg).value
    assert abs(whole - left - right) < 1e-8


def test_carleson_constant_phase_bounded():
    rng = np.random.default_rng(3)
    ph = PiecewisePhase(((-50.0, 50.0, 5.0),))
    for _ in range(3):
        g = sh(rng.uniform(-1, 1), rng.uniform(0.5, 2))
        r = carleson_form(F, g, ph, QuadConfig(xy_box=8.0, xy_points=64, t_max=100.0))
        assert abs(r.value) <= 10 * lp_norm(g, 1)


def test_tht_zero_and_construction():
    from blform.experiments import tht_endpoint_construction, tht_lower_bound_oracle

    Fz, Gz, Hz = tht_endpoint_construction(100.0)
    assert tht_form(Constant(0.0, 2), Gz, Hz, QuadConfig(xy_points=32)).value == 0
    cfg = QuadConfig(bounds=((-100, 0), (0, 1)), t_eps=1e-2, t_max=204, xy_points=64, t_panels=32, t_breaks=(1, 2, 3, 100))
    r = tht_form(Fz, Gz, Hz, cfg)
    assert r.value.real >= 0.9 * tht_lower_bound_oracle(100.0)


def test_tht_symmetric_swap():
    A = Tensor(Gaussian(), Gaussian())
    B = Tensor(sh(0.3), sh(0.3))
    cfg = QuadConfig(xy_points=48, xy_box=6.0)
    assert abs(tht_form(A, B, A, cfg).value - tht_form(A, A, B, cfg).value) < 1e-3


def test_special_form_trivial_cases():
    cfg = QuadConfig(xy_points=32, bounds=((-1, 1), (-4, 4)))
    GG = Tensor(Gaussian(), Gaussian())
    assert trunc_special_form(Constant(0.0), GG, GG, 2.0, cfg).value == 0
    far = Tensor(Box(3, 4), Gaussian())  # y outside the bump support
    assert trunc_special_form(Gaussian(), far, GG, 2.0, cfg).value == 0


def test_smoothed_form_examples():
    G1 = Tensor(Gaussian(), Gaussian())
    cfg = QuadConfig(xy_points=64, xy_box=6.5)
    r2 = smoothed_form_4beta(Gaussian(), G1, G1, 2.0, cfg)
    assert r2.value.real > 0
    for beta in (0.0, 1.0):
        assert smoothed_form_4beta(Gaussian(), G1, G1, beta, cfg).value.real > 0


def test_backends_agree():
    before = _kernels.backend()
    try:
        out = []
        for b in ("numpy", "numba") if _kernels.numba is not None else ("numpy",):
            _kernels.set_backend(b)
            out.append(pv_form(NormalForm("L4", Fraction(2)), F, G, H, FAST).value)
        assert max(abs(v - out[0]) for v in out) < 1e-12
    finally:
        _kernels.set_backend(before)
