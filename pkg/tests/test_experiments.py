import math
from fractions import Fraction

import numpy as np
import pytest

from blform import experiments as ex
from blform.datum import ExponentTriple, NormalForm
from blform.quadrature import QuadConfig
from blform.specs import PiecewisePhase


def test_fit_power_law_examples():
    x = np.array([1.0, 2.0, 4.0, 8.0])
    s, _, r2 = ex.fit_power_law(x, x**2)
    assert abs(s - 2) < 1e-12 and abs(r2 - 1) < 1e-12
    assert abs(ex.fit_power_law(x, 7 / x)[0] + 1) < 1e-12
    rng = np.random.default_rng(0)
    xs = np.geomspace(1, 1e4, 20)
    noisy = xs**0.5 * (1 + 0.01 * rng.uniform(-1, 1, xs.size))
    assert abs(ex.fit_power_law(xs, noisy)[0] - 0.5) < 0.02


def test_fit_power_law_rejects_nonpositive():
    with pytest.raises(ex.NonPositiveData):
        ex.fit_power_law([1, 2, 3], [1, 0, 2])


def test_sweep_and_verdict_invariants():
    with pytest.raises(ValueError):
        ex.SweepResult("x", [1, 2], [1, 2], [0, 0], 0.0, 1.0)
    with pytest.raises(ValueError):
        ex.VerdictReport("x", False, [])


def test_csv_round_trip_and_determinism(tmp_path):
    s = ex._sweep("demo", [1.0, 2.0, 4.0], [1.0, 1 / 3, 0.1], [0.0, 1e-9, 2e-9], ratio=[1, 2, 3])
    text = ex.sweep_to_csv(s)
    assert text.splitlines()[0] == "parameter,value,error_estimate,lhs,rhs,ratio"
    back = ex.sweep_from_csv(text, "demo")
    assert back.values == s.values and back.ratio == s.ratio and back.lhs == []
    assert ex.sweep_to_csv(back) == text
    svg = ex.sweep_to_svg(s, tmp_path / "p.svg")
    assert svg.startswith("<svg") and (tmp_path / "p.svg").read_text() == svg


def test_gaussian_oracle_coefficient():
    # beta and 1 - beta give the same constant, beta = 0 and 1 agree
    assert math.isclose(ex.gaussian_necessity_oracle(0.0, 1.0), ex.gaussian_necessity_oracle(1.0, 1.0))
    assert math.isclose(ex.gaussian_necessity_oracle(3.0, 1.0), ex.gaussian_necessity_oracle(-2.0, 1.0))
    assert math.isclose(ex.gaussian_necessity_oracle(2.0, 0.25), 2 * ex.gaussian_necessity_oracle(2.0, 1.0))


def test_gaussian_necessity_degenerate_beta():
    cfg = QuadConfig(xy_points=96)
    lhs, rhs = ex.exp_gaussian_necessity(0.0, 2, 2, (1, 1 / 4, 1 / 16), cfg)
    assert abs(lhs.slope + 0.5) < 0.05
    assert ex.necessity_verdict(lhs, rhs, 2, 2).passed


def test_gaussian_necessity_rejects_bad_eps():
    with pytest.raises(ValueError):
        ex.exp_gaussian_necessity(2.0, 2, 2, (1, 1 / 4))
    with pytest.raises(ValueError):
        ex.exp_gaussian_necessity(2.0, 2, 2, (1 / 4, 1, 1 / 16))


def test_tht_endpoint_boundary_case():
    s = ex.exp_tht_endpoint((4.0, 10.0, 100.0))
    assert abs(s.values[0] - 2 * (math.log(2) - 1 + 0.5)) < 1e-10
    assert ex.tht_verdict(s).passed


def test_tht_other_exponent_keeps_norms_one():
    s = ex.exp_tht_endpoint((10.0, 100.0, 1000.0), p2=3.0)
    assert all(abs(r - 1) < 1e-9 for r in s.rhs)


def test_l40_gaussian_control_is_flat():
    s = ex.exp_l40_blowup((10, 100, 1000), family="gaussian", cfg=QuadConfig(xy_points=64, xy_box=7.0))
    assert abs(s.slope) < 1e-6


def test_l40_sign_family_slope():
    s = ex.exp_l40_blowup((10, 100, 1000), cfg=QuadConfig(xy_points=64, xy_box=7.0))
    assert ex.l40_verdict(s).passed


def test_l3_gaussian_control_converges():
    from blform.specs import Gaussian

    s = ex.exp_l3_dilation((8, 16, 32), f=Gaussian(), cfg=QuadConfig(xy_points=64))
    assert abs(s.values[-1] / s.extras["limit"] - 1) < 0.01
    assert abs(s.extras["norm_slope"] - 1) < 0.05


def test_boundedness_requires_endpoint_range():
    with pytest.raises(ValueError):
        ex.exp_boundedness_sweep(NormalForm("L1"), ExponentTriple.parse("inf,3,3"), seeds=1)


def test_boundedness_small():
    ok = ex.exp_boundedness_sweep(NormalForm("L4", Fraction(2)), ExponentTriple.parse("inf,2,2"), seeds=2)
    bad = ex.exp_boundedness_sweep(NormalForm("L4", Fraction(0)), ExponentTriple.parse("inf,2,2"), seeds=2)
    assert ok.passed and not bad.passed and bad.diagnostics


def test_reduction_bht_multiplier_bounds():
    rep = ex.exp_reduction_bht(-1.0, trials=1, cfg=QuadConfig(xy_points=64, t_max=100.0))
    assert rep.passed
    # upper bound holds, the lower bound does not: the multiplier has compact support
    assert rep.data["upper_ok"] and not rep.data["lower_ok"]
    assert rep.data["m_min"] == 0.0 and rep.data["m_max"] < 2


def test_reduction_bht_zero_f():
    from blform.quadrature import bht_form, trunc_special_form
    from blform.specs import Constant, Gaussian, Pullback, SmoothBump, Tensor

    G = Pullback(((1.0, -1.0), (0.0, 1.0)), Tensor(Gaussian(), SmoothBump()))
    cfg = QuadConfig(xy_points=32, bounds=((-1, 1), (-1, 1)))
    assert trunc_special_form(Constant(0.0), G, G, 2.0, cfg).value == 0
    assert bht_form(Constant(0.0), Gaussian(), Gaussian(), -1.0, cfg).value == 0


def test_reduction_carleson_zero_phase():
    zero = PiecewisePhase(((-50.0, 50.0, 0.0),))
    rep = ex.exp_reduction_carleson(1, trials=1, phases=[zero], cfg=QuadConfig(xy_points=64, t_max=20.0))
    assert rep.passed
    # the uncut form times ||phi||_1 is not the same number
    assert rep.data["uncut_gap"] > 1e-2
