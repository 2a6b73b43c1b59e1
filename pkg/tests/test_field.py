import random

import pytest

from bispectral.errors import DivisionByZero, MixedBackend
from bispectral.field import (
    EXACT,
    ApproxField,
    ExactComplex,
    approx_equal,
    scalar_arith,
    scalar_from_json,
    scalar_to_json,
)


def ec(re, im=0):
    return ExactComplex(re, im)


def test_rational_addition():
    assert scalar_arith(ec("1/2"), ec("1/3"), "add") == ec("5/6")


def test_absorbing_zero():
    x = ec("7/3", "-2/5")
    assert scalar_arith(ec(0), x, "mul") == ec(0)


def test_conjugate_product():
    assert ec(2, 1) * ec(2, -1) == ec(5)


def test_exact_division_and_error():
    assert ec(1) / ec(2, 1) == ec("2/5", "-1/5")
    with pytest.raises(DivisionByZero):
        scalar_arith(ec(1), ec(0), "div")


def test_mixed_backend_rejected():
    with pytest.raises(MixedBackend):
        ec(1) + 0.5
    with pytest.raises(MixedBackend):
        scalar_arith(ec(1), 1.0 + 0j, "add")
    with pytest.raises(MixedBackend):
        approx_equal(ec(1), 1.0 + 0j)


def test_approx_equality_tolerance():
    f = ApproxField(tol=1e-9)
    assert approx_equal(1.0 + 0j, 1.0 + 1e-12 + 0j, f)
    assert not approx_equal(1.0 + 0j, 1.01 + 0j, f)
    with pytest.raises(DivisionByZero):
        scalar_arith(1.0 + 0j, 1e-12 + 0j, "div", f)


def test_exact_equality_is_literal():
    assert approx_equal(ec("1/3"), ec("1/3"))
    assert not approx_equal(ec("1/3"), ec("333333333/1000000000"))


def random_exact(rng):
    return ExactComplex(
        f"{rng.randint(-9, 9)}/{rng.randint(1, 7)}",
        f"{rng.randint(-9, 9)}/{rng.randint(1, 7)}",
    )


def test_field_axioms_random():
    rng = random.Random(20240517)
    for _ in range(200):
        a, b, c = (random_exact(rng) for _ in range(3))
        assert (a + b) + c == a + (b + c)
        assert a * (b + c) == a * b + a * c
        assert a + b == b + a
        assert a * b == b * a


def test_power_and_negative_power():
    a = ec("2/3", "1/3")
    assert a**3 == a * a * a
    assert a**-2 == ec(1) / (a * a)


def test_json_round_trip_exact():
    a = ec("-7/4", "22/7")
    j = scalar_to_json(a)
    assert j == {"re": "-7/4", "im": "22/7"}
    assert scalar_from_json(j, EXACT) == a


def test_json_round_trip_approx():
    f = ApproxField()
    v = 1.25 - 0.5j
    j = scalar_to_json(v)
    assert j == {"re": 1.25, "im": -0.5}
    assert scalar_from_json(j, f) == v


def test_json_exact_string_to_approx_field():
    f = ApproxField()
    assert scalar_from_json({"re": "1/2", "im": "0"}, f) == 0.5 + 0j
