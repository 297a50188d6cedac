from __future__ import annotations

import math

import numpy as np
import pytest

from kamforge.logvalue import ONE, ZERO, LogValue, lv_max, lv_min, lv_sum


def test_round_trip_across_representable_range():
    rng = np.random.default_rng(11)
    exponents = rng.uniform(-300, 300, size=500)
    mantissas = rng.uniform(1.0, 10.0, size=500)
    signs = rng.choice([-1.0, 1.0], size=500)
    for e, m, s in zip(exponents, mantissas, signs):
        x = s * m * 10.0**e
        back = LogValue.from_real(x).to_real()
        assert back == pytest.approx(x, rel=1e-15)


def test_zero_and_signs():
    assert LogValue.from_real(0.0) == ZERO
    assert ZERO.to_real() == 0.0
    assert (-ONE).sign == -1
    assert abs(-ONE) == ONE


def test_multiplication_adds_logs_exactly():
    a = LogValue.from_ln(500.0)
    b = LogValue.from_ln(400.0, sign=-1)
    c = a * b
    assert c.sign == -1
    assert c.log_magnitude == 900.0
    assert (c / b).isclose(a, rel=0)


def test_addition_against_floats():
    rng = np.random.default_rng(5)
    for _ in range(300):
        x, y = rng.uniform(-50, 50, size=2)
        lhs = (LogValue.from_real(x) + LogValue.from_real(y)).to_real()
        assert lhs == pytest.approx(x + y, rel=1e-13, abs=1e-13)


def test_subtraction_of_equal_values_is_zero():
    a = LogValue.from_real(3.7)
    assert (a - a) == ZERO


def test_pow_and_sqrt():
    a = LogValue.from_real(9.0)
    assert a.sqrt().to_real() == pytest.approx(3.0, rel=1e-15)
    assert (a**-2).to_real() == pytest.approx(1 / 81.0, rel=1e-14)
    with pytest.raises(ValueError):
        (-a) ** 0.5


def test_ordering_is_signed():
    vals = [LogValue.from_real(v) for v in (-1e5, -2.0, 0.0, 1e-30, 3.0)]
    assert vals == sorted(vals)
    assert lv_max(*vals).to_real() == 3.0
    assert lv_min(*vals).to_real() == -1e5


def test_huge_values_survive():
    big = LogValue.gamma(4000.0)  # far beyond double overflow
    assert big.value_if_representable() is None
    assert (big / big) == ONE
    assert big.log10 == pytest.approx(math.lgamma(4000.0) / math.log(10.0))


def test_sum_helper():
    total = lv_sum(LogValue.from_real(x) for x in (0.5, 0.25, 0.25))
    assert total.isclose(ONE, rel=1e-14)


def test_json_round_trip_fields():
    a = LogValue.from_real(-2.5e10)
    j = a.to_json()
    assert j["sign"] == -1
    assert j["value_if_representable"] == pytest.approx(-2.5e10)
