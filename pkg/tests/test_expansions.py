import json
import math
from fractions import Fraction as F

import pytest

from nnlab.errors import NotInUInfinityError, PrecisionError, ValueParseError
from nnlab.expansions import ExpansionKind, RationalInterval, certified_digits, cf_digits, cf_reconstruct, cylinder, \
    digit_frequency_survey, gauss_block_measure, gauss_partial_sum, in_u_infinity, lueroth_digits, \
    lueroth_reconstruct, parse_real, rational_orbit, sample_uniform


def test_parse_real_forms():
    assert parse_real("2/5").rational == F(2, 5)
    golden = parse_real("(sqrt(5)-1)/2")
    assert golden.form == 'surd' and golden.surd == (-1, 1, 2, 5)
    assert parse_real("sqrt(2)-1").surd == (-1, 1, 1, 2)
    assert parse_real("(-1+1*sqrt(2))/1").surd == (-1, 1, 1, 2)
    decimal = parse_real("0.4142~3")
    assert decimal.form == 'decimal' and decimal.error == F(1, 1000)
    assert parse_real("0.25").error == F(1, 100)
    assert parse_real("(sqrt(4))/4").rational == F(1, 2)


@pytest.mark.parametrize('text', ["", "3/2", "1/0", "sqrt(2)", "(1+sqrt(5))/2", "abc", "0.5+", "sqrt(2)-sqrt(3)"])
def test_parse_real_rejects(text):
    with pytest.raises(ValueParseError):
        parse_real(text)


def test_surd_enclosure_is_tight():
    box = parse_real("sqrt(2)-1").enclosure(128)
    assert box.lo < box.hi
    assert box.width < F(1, 2 ** 120)
    assert F(41421356, 10 ** 8) < box.lo and box.hi < F(41421357, 10 ** 8)


def test_cf_golden_and_silver():
    assert cf_digits("(sqrt(5)-1)/2", 500) == (1,) * 500
    assert cf_digits("sqrt(2)-1", 500) == (2,) * 500


def test_cf_sqrt3_is_periodic():
    digits = cf_digits("sqrt(3)-1", 500)
    assert digits == (1, 2) * 250


def test_cf_rational_not_in_u_infinity():
    with pytest.raises(NotInUInfinityError) as info:
        cf_digits("1/4", 3)
    assert info.value.step == 0
    with pytest.raises(NotInUInfinityError) as info:
        cf_digits("2/7", 5)
    assert info.value.step == 1
    assert not in_u_infinity(ExpansionKind.CF, F(2, 7))


def test_lueroth_examples():
    assert lueroth_digits("2/5", 200) == (2,) * 200
    assert lueroth_digits("7/10", 6) == (1, 2, 2, 2, 2, 2)
    with pytest.raises(NotInUInfinityError):
        lueroth_digits("1/3", 2)
    assert rational_orbit('lueroth', F(7, 10)) == ((1,), (2,))
    assert in_u_infinity('lueroth', F(2, 5))


def test_decimal_precision_limit():
    digits = cf_digits("0.41421356237~11", 4)
    assert digits == (2, 2, 2, 2)
    with pytest.raises(PrecisionError) as info:
        cf_digits("0.414~3", 30)
    assert info.value.index < 30


def test_cf_reconstruct_examples():
    assert cf_reconstruct([1]) == RationalInterval(F(1, 2), F(1))
    box = cf_reconstruct([2, 2])
    assert (box.lo, box.hi) == (F(2, 5), F(3, 7))
    assert box.contains(F(41421, 100000))


def test_cf_round_trip_width():
    digits = cf_digits("sqrt(2)-1", 50)
    box = cf_reconstruct(digits)
    assert box.width < F(1, 10 ** 15)
    enclosure = parse_real("sqrt(2)-1").enclosure(256)
    assert box.lo <= enclosure.lo and enclosure.hi <= box.hi


def test_lueroth_reconstruct_examples():
    assert lueroth_reconstruct([2]) == RationalInterval(F(1, 3), F(1, 2))
    assert lueroth_reconstruct([2, 2]).contains(F(2, 5))
    digits = (1, 3, 2, 5)
    width = lueroth_reconstruct(digits).width
    assert width == math.prod(F(1, d * (d + 1)) for d in digits)
    assert width <= F(1, 2 ** len(digits))


def certified_box(kind, value, count):
    bits = 128
    while True:
        box = parse_real(value).enclosure(bits)
        if len(certified_digits(kind, box, count)) >= count:
            return box
        bits *= 2


@pytest.mark.parametrize('kind, value', [('cf', "sqrt(2)-1"), ('cf', "sqrt(3)-1"), ('lueroth', "(sqrt(5)-1)/2"),
                                         ('lueroth', "sqrt(2)-1")])
def test_cylinders_nest(kind, value):
    expand = cf_digits if ExpansionKind.parse(kind) is ExpansionKind.CF else lueroth_digits
    digits = expand(value, 25)
    point = certified_box(kind, value, 25)
    assert tuple(certified_digits(kind, point, 25)) == digits
    previous = None
    for n in range(1, len(digits) + 1):
        box = cylinder(kind, digits[:n])
        assert point.issubset(box)
        if previous is not None:
            assert box.issubset(previous) and box.width < previous.width
        previous = box


def test_large_lueroth_digits_reconstruct():
    digits = lueroth_digits("(sqrt(5)-1)/2", 25)
    assert max(digits) > 2 ** 64
    box = lueroth_reconstruct(digits)
    assert box.width == math.prod(F(1, d * (d + 1)) for d in digits)


def test_digits_are_plain_ints():
    for digits in (lueroth_digits("(sqrt(5)-1)/2", 25), cf_digits("sqrt(3)-1", 40), sample_uniform(3, 30)):
        assert all(type(d) is int for d in digits)
        assert json.loads(json.dumps(list(digits))) == list(digits)
    box = parse_real("sqrt(2)-1").enclosure(128)
    assert type(box.lo.numerator) is int and type(box.hi.denominator) is int


def test_certified_digits_stop_on_ambiguity():
    box = RationalInterval(F(4, 10), F(6, 10))
    assert certified_digits('cf', box, 5) == []
    assert certified_digits('cf', RationalInterval(F(2, 5) + F(1, 100), F(2, 5) + F(2, 100)), 5)[:1] == [2]
    assert certified_digits('cf', RationalInterval(F(0), F(1, 2)), 5) == []


def test_unknown_system():
    with pytest.raises(ValueParseError):
        ExpansionKind.parse("beta")


def test_gauss_measure():
    one = gauss_block_measure(1)
    assert (one.num, one.den) == (4, 3)
    assert one.value == pytest.approx(0.415037, abs=1e-6)
    assert gauss_block_measure(2).value == pytest.approx(0.169925, abs=1e-6)
    values = [gauss_block_measure(b).value for b in range(1, 50)]
    assert all(v > 0 for v in values)
    assert all(a > b for a, b in zip(values, values[1:]))
    assert gauss_partial_sum(49) == pytest.approx(sum(values))
    assert 0.9998 <= gauss_partial_sum(10 ** 4) < 1


def test_sample_uniform_is_deterministic():
    first = sample_uniform(42, 100)
    assert first == sample_uniform(42, 100)
    assert len(first) == 100
    assert first != sample_uniform(43, 100)


def test_survey_small():
    survey = digit_frequency_survey(20, 500, seed=5)
    for digit, mean, std, expected in survey.rows():
        assert abs(mean - expected) <= 0.03


@pytest.mark.slow
def test_survey_acceptance():
    survey = digit_frequency_survey(200, 5000, seed=0)
    expected = {1: 0.4150, 2: 0.1699, 3: 0.0931}
    for digit, mean, std, gauss in survey.rows():
        assert gauss == pytest.approx(expected[digit], abs=1e-4)
        assert abs(mean - gauss) <= 0.01
