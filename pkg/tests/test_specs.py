import math

import numpy as np
import pytest

from blform.specs import (
    ArityMismatch,
    BandlimitedM,
    Box,
    Constant,
    Gaussian,
    LinfDilate,
    Modulate,
    PiecewisePhase,
    Product,
    Pullback,
    Scale,
    SignStep,
    SignWindow,
    SmoothBump,
    SmoothSign,
    SqrtSplit,
    Sum,
    Table,
    Tensor,
    Translate,
    bandlimited_m_hat,
    eval_spec,
    spec_from_json,
)

ALL = [
    Gaussian(2.0),
    Box(-1.0, 3.0),
    SmoothBump(),
    SignWindow(5.0),
    SignStep(),
    SmoothSign(),
    Constant(2.5),
    LinfDilate(4.0, SmoothBump()),
    Scale(3.0, Gaussian()),
    Translate((1.5,), Gaussian()),
    Modulate(2.0, Gaussian()),
    BandlimitedM(),
    Table(0.0, 0.5, (1.0, 2.0, 0.0)),
    Sum((Gaussian(), Box(0, 1))),
    Product((Gaussian(), SignWindow(2))),
    Tensor(Gaussian(), Box(0, 1)),
    Pullback(((1, 1), (0, 1)), Tensor(Gaussian(), Gaussian()), (0.5, 0.0)),
    Pullback(((1, -1),), SignStep()),
    SqrtSplit(Translate((1.0,), Gaussian()), -1),
    PiecewisePhase(((-1.0, 0.0, 2.0), (0.0, 3.0, -1.0))),
]


def test_examples():
    assert eval_spec(Gaussian(1), 0.0) == 1
    assert [eval_spec(SignStep(), x) for x in (-2, 0, 3)] == [-1, 0, 1]
    assert 0 < eval_spec(SmoothBump(), 0.95).real < 1
    assert eval_spec(SmoothBump(), 0.5) == 1 and eval_spec(SmoothBump(), 1.0) == 0


def test_arity_mismatch():
    with pytest.raises(ArityMismatch):
        eval_spec(Gaussian(), (0.0, 1.0))
    with pytest.raises(ArityMismatch):
        Tensor(Tensor(Gaussian(), Gaussian()), Gaussian())


@pytest.mark.parametrize("spec", ALL, ids=lambda s: type(s).__name__)
def test_json_round_trip(spec):
    back = spec_from_json(spec.to_json())
    assert back == spec
    pts = [np.linspace(-3, 3, 7)] * spec.arity
    assert np.allclose(back(*pts), spec(*pts))


def test_invalid_parameters():
    for bad in (lambda: Box(1, 1), lambda: SignWindow(0), lambda: Gaussian(-1), lambda: LinfDilate(0, Gaussian())):
        with pytest.raises(ValueError):
            bad()


def test_linf_dilate_keeps_sup_and_moves_breaks():
    x = np.linspace(-10, 10, 2001)
    assert np.max(np.abs(LinfDilate(5, SmoothBump())(x))) == 1
    assert LinfDilate(5, SmoothBump()).breakpoints() == (-5.0, -4.5, 4.5, 5.0)


def test_pullback_breakpoints_1d():
    p = Pullback(((2.0,),), Box(0, 1), (1.0,))
    assert p.breakpoints() == (-0.5, 0.0)


def test_sqrt_split_recombines():
    g = Translate((0.5,), Product((Gaussian(), SignWindow(3))))
    x = np.linspace(-4, 4, 41)
    assert np.allclose(SqrtSplit(g, -1)(x) * SqrtSplit(g, 1)(x), g(x))


def test_bandlimited_m():
    m = BandlimitedM()
    t = np.array([0.3, 2.0, 7.5])
    assert np.allclose(m(-t), np.conj(m(t)))
    xi = np.linspace(0.5, 1.5, 20001)
    assert abs(m(np.array(0.0)) - np.trapezoid(bandlimited_m_hat(xi), xi)) < 1e-6
    assert m(np.array(41.0)) == 0
    assert bandlimited_m_hat(np.array([0.4, 1.6])).tolist() == [0.0, 0.0]


def test_piecewise_phase():
    ph = PiecewisePhase(((0.0, 1.0, 2.0),))
    assert np.isclose(ph(np.array(0.5), np.array(0.125)), 1j)
    assert ph(np.array(2.0), np.array(0.3)) == 1
    assert ph.edges() == (0.0, 1.0)
