import cmath
import math
import random

from bispectral.field import EXACT, ApproxField, ExactComplex
from bispectral.generate import random_general_space, random_special_space, top_degree_special
from bispectral.quasipoly import Polynomial, QuasiPolynomial, RationalFunction
from bispectral.spaces import FunctionSpace
from bispectral.transform import (
    bispectral_dual,
    contour_transform,
    general_transform_checks,
    special_bispectral_dual,
    special_transform_checks,
)

APPROX = ApproxField()


def ec(re, im=0):
    return ExactComplex(re, im)


def P(*coeffs):
    return Polynomial(list(coeffs), EXACT)


def numeric_contour(f, z0, u, radius=0.3, samples=2048):
    """Trapezoid approximation of the residue of e^(u x) f(x) at z0."""
    total = 0j
    for k in range(samples):
        th = 2 * math.pi * k / samples
        x = complex(z0) + radius * cmath.exp(1j * th)
        total += (
            f.evaluate_float(x)
            * cmath.exp(u * x)
            * radius
            * cmath.exp(1j * th)
        )
    return total / samples


# ------------------------------------------------------ contour transform


def test_contour_simple_pole():
    z = ec("3/2")
    f = QuasiPolynomial(
        [(ec(0), RationalFunction(P(1), P(-z, 1)))], EXACT
    )
    g = contour_transform(f, z)
    lam, coef = g.single_term()
    assert lam == z
    assert coef.as_polynomial() == P(1)


def test_contour_double_pole():
    z = ec(2)
    f = QuasiPolynomial(
        [(ec(0), RationalFunction(P(1), P(-z, 1) * P(-z, 1)))], EXACT
    )
    g = contour_transform(f, z)
    lam, coef = g.single_term()
    assert lam == z
    assert coef.as_polynomial() == P(0, 1)


def test_contour_regular_point_is_zero():
    f = QuasiPolynomial(
        [(ec(0), RationalFunction(P(1), P(-1, 1)))], EXACT
    )
    assert contour_transform(f, ec(5)).is_zero()


def test_contour_matches_numeric_integral_exact_zero_lambda():
    rng = random.Random(41)
    z = ec(1)
    for _ in range(5):
        num = P(rng.randint(-3, 3), rng.randint(1, 3))
        f = QuasiPolynomial(
            [(ec(0), RationalFunction(num, P(-1, 1) * P(-1, 1)))], EXACT
        )
        g = contour_transform(f, z)
        for u in (0.3, -0.7 + 0.4j):
            direct = numeric_contour(f, 1.0, u)
            assert abs(g.evaluate_float(u) - direct) < 1e-6 * max(
                1.0, abs(direct)
            )


def test_contour_exponential_term_approx_keeps_unit():
    lam = 0.5 + 0j
    z = 1.0 + 0j
    f = QuasiPolynomial(
        [(lam, RationalFunction(Polynomial([1.0], APPROX), Polynomial([-1.0, 1.0], APPROX)))],
        APPROX,
    )
    g = contour_transform(f, z)
    _, coef = g.single_term()
    # residue of e^((u+lam)x)/(x-1) is e^(u+lam), i.e. q = e^lam constant
    assert abs(coef.as_polynomial().coeffs[0] - cmath.exp(lam)) < 1e-9
    for u in (0.2, 1.1 - 0.3j):
        direct = numeric_contour(f, z, u)
        assert abs(g.evaluate_float(u) - direct) < 1e-6 * max(1.0, abs(direct))


# ------------------------------------------------------ general transform


def one_xex():
    return FunctionSpace.from_pairs([(ec(0), P(1)), (ec(1), P(0, 1))], EXACT)


def test_general_dual_of_one_xex():
    res = bispectral_dual(one_xex())
    u_space = res.dual_space
    assert u_space.dim == 1
    expected = FunctionSpace.from_pairs([(ec(-1), P(1, -1))], EXACT, var="u")
    assert u_space.span_equals(expected)
    (z_a, polys), = res.components
    assert z_a == ec(-1)
    assert [p.degree for p in polys] == [1]


def test_general_transform_statements_on_random_spaces():
    rng = random.Random(42)
    for _ in range(6):
        v = random_general_space(rng)
        res = bispectral_dual(v)
        checks = general_transform_checks(v, res)
        assert all(val is not False for val in checks.values()), checks
        assert checks["operator_transpose"] is True


def test_general_round_trip_positive_degrees():
    rng = random.Random(43)
    for _ in range(6):
        v = random_general_space(rng)
        dual = bispectral_dual(v).dual_space
        back = bispectral_dual(dual).dual_space
        assert back.var == v.var
        assert back.span_equals(v)


# ------------------------------------------------------ special transform


def test_special_dual_worked_instance():
    # V = <1, (x-1)e^x> of type ((0,1),(0,1),(0,1),(1,0)); the dual is
    # spanned by u and e^u (derived by hand residue computation)
    sp = top_degree_special([ec(0), ec(1)], [ec(0), ec(1)], [1, 0])
    res = special_bispectral_dual(sp)
    expected = FunctionSpace.from_pairs(
        [(ec(0), P(0, 1)), (ec(1), P(1))], EXACT, var="u"
    )
    assert res.dual_space.span_equals(expected)
    dual_sp = res.special
    assert dual_sp.n == (1, 0) and dual_sp.m == (0, 1)


def test_special_transform_statements_random():
    rng = random.Random(44)
    for _ in range(8):
        sp = random_special_space(rng)
        res = special_bispectral_dual(sp)
        checks = special_transform_checks(sp, res)
        assert all(checks.values()), checks


def test_special_involution_random():
    rng = random.Random(45)
    for _ in range(8):
        sp = random_special_space(rng)
        dual_sp = special_bispectral_dual(sp).special
        back = special_bispectral_dual(dual_sp).special
        assert back.space.span_equals(sp.space)
        assert back.n == sp.n and back.m == sp.m


def test_wronskian_identity_swaps_on_dual():
    rng = random.Random(46)
    for _ in range(5):
        sp = random_special_space(rng)
        dual_sp = special_bispectral_dual(sp).special
        # the dual Wronskian polynomial has degree sum(n) at points lam
        w = dual_sp.space.wronskian_poly()
        assert w.degree == sum(sp.n)
        for lam_i, n_i in zip(sp.lam, sp.n):
            assert w.root_multiplicity(lam_i) == n_i


def test_special_transform_exact_vs_approx():
    sp = top_degree_special([ec(0), ec(1)], [ec(2), ec(-1)], [2, 1])
    exact_dual = special_bispectral_dual(sp).dual_space
    approx_sp = sp.space.to_approx()
    from bispectral.spaces import classify_special

    sp_a = classify_special(
        approx_sp,
        [complex(z) for z in sp.z],
        lam_order=[complex(l) for l in sp.lam],
    )
    approx_dual = special_bispectral_dual(sp_a).dual_space
    assert exact_dual.to_approx().span_equals(approx_dual)
