import cmath
import random

import pytest

from bispectral.errors import ApproxBackendUnsupported, BispectralError
from bispectral.field import EXACT, ApproxField, ExactComplex
from bispectral.quasipoly import (
    LaurentSeries,
    Polynomial,
    QuasiPolynomial,
    RationalFunction,
    poly_from_json,
    poly_gcd,
    poly_roots,
    poly_to_json,
    tuple_admissible,
)

APPROX = ApproxField()


def P(*coeffs):
    return Polynomial(list(coeffs), EXACT)


def ec(re, im=0):
    return ExactComplex(re, im)


# ---------------------------------------------------------------- derivative


def test_derivative_product_rule():
    # d/dx (x e^x) = (x+1) e^x
    f = QuasiPolynomial([(ec(1), RationalFunction(P(0, 1)))], EXACT)
    df = f.derivative()
    assert df == QuasiPolynomial([(ec(1), RationalFunction(P(1, 1)))], EXACT)


def test_derivative_exponential():
    lam = ec("3/2")
    f = QuasiPolynomial.exponential(lam, EXACT)
    df = f.derivative()
    (l2, c2) = df.single_term()
    assert l2 == lam and c2 == RationalFunction(P(lam))


def test_second_derivative_of_x_squared():
    f = QuasiPolynomial.from_polynomial(P(0, 0, 1))
    d2 = f.derivative(2)
    assert d2 == QuasiPolynomial.from_polynomial(P(2))


def test_derivative_preserves_exponents():
    rng = random.Random(7)
    for _ in range(20):
        lams = random.Random(rng.random()).sample(range(-4, 5), 2)
        f = QuasiPolynomial(
            [
                (ec(lams[0]), RationalFunction(P(1, rng.randint(1, 5)))),
                (ec(lams[1]), RationalFunction(P(rng.randint(1, 5), 0, 1))),
            ],
            EXACT,
        )
        assert f.derivative().exponents() == f.exponents() or (
            lams[0] == 0 or lams[1] == 0
        )


# ---------------------------------------------------------------- expansion


def test_expand_simple_pole():
    f = QuasiPolynomial(
        [(ec(0), RationalFunction(P(1), P(ec(-2), ec(1))))], EXACT
    )  # 1/(x-2)
    le = f.expand_at(ec(2), 1)
    assert le.order() == -1
    part = le.parts[0]
    assert part.coeff(-1) == ec(1)
    assert part.coeff(0) == ec(0)
    assert part.coeff(1) == ec(0)


def test_expand_exponential_at_zero():
    f = QuasiPolynomial.exponential(ec(1), EXACT)
    le = f.expand_at(ec(0), 2)
    part = le.parts[0]
    assert le.order() == 0
    assert part.unit_exp == ec(0)
    assert part.coeff(0) == ec(1)
    assert part.coeff(1) == ec(1)
    assert part.coeff(2) == ec("1/2")


def test_expand_with_symbolic_unit():
    # (x+1)e^x at -1: order 1, leading coefficient carries the unit e^{-1}
    f = QuasiPolynomial([(ec(1), RationalFunction(P(1, 1)))], EXACT)
    le = f.expand_at(ec(-1), 1)
    assert le.order() == 1
    part = le.parts[0]
    assert part.unit_exp == ec(-1)
    assert part.coeff(1) == ec(1)


def _random_qp(rng, field):
    terms = []
    for lam in rng.sample([-2, -1, 0, 1, 2], rng.randint(1, 2)):
        num = Polynomial([rng.randint(-4, 4) for _ in range(rng.randint(1, 3))], field)
        if num.is_zero():
            num = Polynomial.one(field)
        den = Polynomial.one(field)
        if rng.random() < 0.4:
            den = Polynomial([-rng.randint(1, 3), 1], field)
        terms.append((field.scalar(lam), RationalFunction(num, den)))
    return QuasiPolynomial(terms, field)


def test_expansion_multiplicative():
    rng = random.Random(11)
    z0 = ec("1/2")
    for _ in range(25):
        f, g = _random_qp(rng, EXACT), _random_qp(rng, EXACT)
        if f.is_zero() or g.is_zero():
            continue
        K = 6
        ef, eg, efg = f.expand_at(z0, K), g.expand_at(z0, K), (f * g).expand_at(z0, K)
        assert (ef * eg).same_through(efg)


def _series_derivative(part):
    coeffs = []
    for k in range(part.lo, part.hi + 1):
        coeffs.append(part.coeff(k) * ExactComplex(k))
    return LaurentSeries(part.z0, part.lo - 1, coeffs, part.field, part.unit_exp)


def test_expansion_commutes_with_derivative():
    # the exponential is folded into each unit-tagged series, so the germ of
    # f' is the plain termwise t-derivative of the germ of f
    from bispectral.quasipoly import LocalExpansion

    rng = random.Random(13)
    z0 = ec(2)
    for _ in range(25):
        f = _random_qp(rng, EXACT)
        if f.is_zero():
            continue
        K = 6
        left = f.derivative().expand_at(z0, K - 1)
        raw = f.expand_at(z0, K)
        right = LocalExpansion(z0, [_series_derivative(p) for p in raw.parts], EXACT)
        assert left.same_through(right, hi=K - 1)


def test_derivative_matches_finite_difference():
    rng = random.Random(17)
    for _ in range(10):
        f = _random_qp(rng, EXACT)
        if f.is_zero():
            continue
        xf = 2.003
        val_direct = f.derivative().evaluate_float(xf)
        h = 1e-6
        val_fd = (f.evaluate_float(xf + h) - f.evaluate_float(xf - h)) / (2 * h)
        assert abs(val_direct - val_fd) < 1e-5 * max(1.0, abs(val_direct))


# ---------------------------------------------------------------- gcd


def test_gcd_examples():
    assert poly_gcd(P(-1, 0, 1), P(-1, 1)) == P(-1, 1)
    assert poly_gcd(P(0, 1), P(1, 1)) == P(1)
    assert poly_gcd(Polynomial.zero(EXACT), P(2, 4)) == P("1/2", 1).monic()


def test_gcd_rejects_approx():
    pa = Polynomial([1.0, 1.0], APPROX)
    with pytest.raises(ApproxBackendUnsupported):
        poly_gcd(pa, pa)


def test_gcd_divides_both():
    rng = random.Random(3)
    for _ in range(20):
        a = Polynomial([rng.randint(-3, 3) for _ in range(3)], EXACT)
        b = Polynomial([rng.randint(-3, 3) for _ in range(3)], EXACT)
        c = Polynomial([rng.randint(-3, 3) for _ in range(2)], EXACT)
        if a.is_zero() or b.is_zero() or c.is_zero():
            continue
        g = poly_gcd(a * c, b * c)
        assert ((a * c) % g).is_zero() and ((b * c) % g).is_zero()
        assert g.degree >= c.degree if poly_gcd(a, b).degree >= 0 else True


# ---------------------------------------------------------------- roots


def test_roots_quadratic_formula_oracle():
    p = P(1, -3, 1)  # x^2 - 3x + 1
    roots = poly_roots(p)
    expected = sorted(
        [(3 - 5**0.5) / 2, (3 + 5**0.5) / 2]
    )  # quadratic formula
    got = sorted(float(r.value.re) if r.exact else r.value.real for r in roots)
    assert all(r.multiplicity == 1 for r in roots)
    assert abs(got[0] - expected[0]) < 1e-9 and abs(got[1] - expected[1]) < 1e-9


def test_roots_double_root():
    p = P(1, -2, 1)  # (x-1)^2
    roots = poly_roots(p)
    assert len(roots) == 1
    assert roots[0].value == ec(1) and roots[0].multiplicity == 2 and roots[0].exact


def test_roots_gaussian():
    p = P(1, 0, 1)  # x^2 + 1
    roots = poly_roots(p)
    vals = {(r.value.re, r.value.im) for r in roots}
    assert all(r.exact and r.multiplicity == 1 for r in roots)
    assert vals == {(0, 1), (0, -1)}


def test_roots_reconstruct_polynomial():
    rng = random.Random(5)
    for _ in range(10):
        roots = [rng.randint(-3, 3) for _ in range(rng.randint(1, 4))]
        p = Polynomial.from_roots([ec(r) for r in roots], EXACT) * ec("3/2")
        got = poly_roots(p)
        rebuilt = Polynomial.one(EXACT)
        for r in got:
            assert r.exact
            rebuilt = rebuilt * Polynomial([-r.value, ec(1)], EXACT) ** r.multiplicity
        assert rebuilt == p.monic()


def test_roots_approx_backend():
    p = Polynomial([2.0, -3.0, 1.0], APPROX)  # (x-1)(x-2)
    roots = poly_roots(p)
    vals = sorted(r.value.real for r in roots)
    assert abs(vals[0] - 1) < 1e-8 and abs(vals[1] - 2) < 1e-8


# ---------------------------------------------------------------- plumbing


def test_poly_divmod_and_shift():
    p = P(1, 2, 3, 4)
    q = P(-1, 1)
    quo, rem = divmod(p, q)
    assert quo * q + rem == p
    s = p.shift(ec(2))
    x = ec("7/3")
    assert s.evaluate(x) == p.evaluate(x + ec(2))


def test_rational_function_reduction():
    f = RationalFunction(P(-1, 0, 1), P(-1, 1))  # (x^2-1)/(x-1) = x+1
    assert f.is_polynomial()
    assert f.as_polynomial() == P(1, 1)


def test_rational_series_at_pole():
    f = RationalFunction(P(1), P(0, 0, 1))  # 1/x^2
    lo, cs = f.series_at(ec(0), 2)
    assert lo == -2
    assert cs[0] == ec(1) and all(c == ec(0) for c in cs[1:])


def test_qp_json_round_trip():
    f = QuasiPolynomial(
        [
            (ec("1/2"), RationalFunction(P(1, 2), P(ec(-1), ec(1)))),
            (ec(0), RationalFunction(P(3))),
        ],
        EXACT,
    )
    j = f.to_json()
    assert QuasiPolynomial.from_json(j, EXACT) == f


def test_poly_json_round_trip():
    p = P("1/3", -2, 0, 5)
    assert poly_from_json(poly_to_json(p), EXACT) == p


def test_tuple_admissible():
    y1 = P(-6, 1)  # x - 6, no root at 0 or 1
    ok, _ = tuple_admissible([y1], [ec(0), ec(1)], EXACT)
    assert ok
    bad, reason = tuple_admissible([P(0, 1)], [ec(0)], EXACT)
    assert not bad and "vanishes" in reason
    dbl, reason = tuple_admissible([P(1, -2, 1) * P(1)], [], EXACT)
    assert not dbl and "multiple" in reason
    shared, reason = tuple_admissible([P(-1, 1), P(-1, 1)], [], EXACT)
    assert not shared and "share" in reason
