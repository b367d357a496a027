import math
from fractions import Fraction

import pytest

from blform import datum as dm
from blform.datum import BLDatum, ExponentTriple, NormalForm
from blform.exactla import RationalMatrix


def test_validate_reports_rank_problems():
    d = BLDatum(RationalMatrix([[1, 0, 0]]), RationalMatrix([[0, 1, 0], [0, 2, 0]]), RationalMatrix([[0, 0, 1], [1, 0, 0]]), RationalMatrix([[1, 1, 1]]))
    problems = dm.validate(d)
    assert problems and "pi2" in problems[0]


def test_shape_is_checked():
    with pytest.raises(ValueError):
        BLDatum(RationalMatrix([[1, 0]]), RationalMatrix.identity(3), RationalMatrix.identity(3), RationalMatrix([[1, 1, 1]]))


def test_normal_form_parse_and_str():
    assert NormalForm.parse("L4:-2/3") == NormalForm("L4", Fraction(-2, 3))
    assert str(NormalForm("L4", Fraction(5))) == "L4:5"
    assert NormalForm.parse("L3").tag == "L3"


def test_exponent_triple():
    p = ExponentTriple.parse("inf,3,3/2")
    assert p.in_endpoint_range()
    assert not ExponentTriple.parse("inf,3,3").in_endpoint_range()
    assert not ExponentTriple.parse("2,2,2").in_endpoint_range()
    assert p.inverses[0] == 0.0


def test_datum_of_normal_form_is_fixed_by_identity():
    for nf in dm.iter_normal_forms():
        d = dm.datum_of(nf)
        assert dm.verify_witness(d, dm.identity_witness(), nf)


def test_witness_inverse_and_composition():
    w1, w2 = dm.random_witness(1), dm.random_witness(2)
    d = dm.datum_of(NormalForm("L2"))
    assert dm.apply_witness(dm.apply_witness(d, w1), dm.inverse_witness(w1)) == d
    assert dm.apply_witness(d, dm.compose_witness(w1, w2)) == dm.apply_witness(dm.apply_witness(d, w1), w2)


def test_random_witness_is_deterministic():
    assert dm.random_witness(7) == dm.random_witness(7)


def test_json_round_trip():
    d = dm.thtsp_datum(Fraction(3, 2))
    assert dm.datum_from_json(dm.datum_to_json(d)) == d
    w = dm.printed_witness(Fraction(2))
    assert dm.witness_from_json(dm.witness_to_json(w)) == w


@pytest.mark.parametrize("alpha", [2, 3, -1, Fraction(1, 2)])
def test_printed_witness_for_alpha_not_one(alpha):
    alpha = Fraction(alpha)
    d = dm.thtsp_datum(alpha)
    assert dm.verify_witness(d, dm.printed_witness(alpha), NormalForm("L4", 1 - alpha))


def test_printed_witness_for_alpha_one_is_verbatim_and_fails():
    # reproduced as printed; the classifier supplies a working one instead
    d = dm.thtsp_datum(Fraction(1))
    assert not dm.verify_witness(d, dm.printed_witness(Fraction(1)), NormalForm("L3"))


def test_constant_factor_identity_is_one():
    assert dm.constant_factor(dm.identity_witness(), ExponentTriple(math.inf, 2, 2)) == 1.0
