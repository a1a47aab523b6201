import math

import pytest

from shellmodal.utils.formatting import (
    format_frequency,
    format_full_precision,
    format_percentage,
    format_relative_error,
    format_signed_frequency,
    signed_frequency,
)


def omega2_of(f):
    return math.copysign((2.0 * math.pi * f) ** 2, f)


def test_signed_frequency():
    assert signed_frequency(omega2_of(0.5)) == pytest.approx(0.5)
    assert signed_frequency(omega2_of(-0.02)) == pytest.approx(-0.02)
    assert signed_frequency(0.0) == 0.0


def test_format_signed_frequency():
    assert format_signed_frequency(omega2_of(0.07027)) == "0.07027"
    assert format_signed_frequency(omega2_of(-0.1)) == "-0.10000 (unstable)"
    assert format_signed_frequency("n/a") == "n/a"


def test_format_frequency():
    assert format_frequency(0.123456789, decimals=3) == "0.123"
    assert format_frequency(float("nan")) == "-"
    assert format_frequency("abc") == "abc"


def test_format_full_precision():
    assert float(format_full_precision(1.0 / 3.0)) == 1.0 / 3.0
    assert format_full_precision(None) == "None"


def test_format_percentage():
    assert format_percentage(0.027) == "2.70%"


def test_format_relative_error():
    assert format_relative_error(1.01, 1.0) == "+1.000%"
    assert format_relative_error(0.99, 1.0) == "-1.000%"
    assert format_relative_error(1.0, 0.0) == "N/A"
