from fractions import Fraction

import pytest

from nestcast.numbers import (
    FLOAT,
    RATIONAL,
    as_mode,
    canonical_key,
    check_mode,
    format_number,
    parse_number,
)


def test_parse_number_forms():
    assert parse_number("1/3") == Fraction(1, 3)
    assert parse_number("0.25") == Fraction(1, 4)
    assert parse_number(3) == Fraction(3)
    assert parse_number(0.5) == Fraction(1, 2)
    with pytest.raises(ValueError):
        parse_number("one half")
    with pytest.raises(ValueError):
        parse_number(True)


def test_format_round_trip():
    for x in [Fraction(3, 7), Fraction(2), Fraction(0)]:
        assert parse_number(format_number(x)) == x


def test_canonical_key_rational_exact():
    a = canonical_key([Fraction(1, 3), Fraction(2, 3)], RATIONAL)
    b = canonical_key([Fraction(2, 6), Fraction(4, 6)], RATIONAL)
    assert a == b


def test_canonical_key_float_quantizes():
    a = canonical_key([1 / 3, 2 / 3], FLOAT)
    b = canonical_key([1 / 3 + 1e-15, 2 / 3 - 1e-15], FLOAT)
    assert a == b
    c = canonical_key([0.4, 0.6], FLOAT)
    assert a != c


def test_mode_checks():
    assert check_mode(RATIONAL) == RATIONAL
    with pytest.raises(ValueError):
        check_mode("symbolic")
    assert as_mode(Fraction(1, 2), FLOAT) == 0.5
    assert as_mode(Fraction(1, 2), RATIONAL) == Fraction(1, 2)
