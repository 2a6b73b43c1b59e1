import random

import pytest

from bispectral.diffop import (
    DiffOperator,
    MonicOperator,
    extract_phi,
    factorized_from_tuple,
    monic_fundamental,
    regularize,
    special_fundamental,
)
from bispectral.errors import NonAdmissibleTuple, NotInPhiForm
from bispectral.field import EXACT, ExactComplex
from bispectral.generate import (
    random_general_space,
    random_special_space,
    top_degree_special,
)
from bispectral.quasipoly import Polynomial, QuasiPolynomial, RationalFunction, poly_gcd
from bispectral.spaces import FunctionSpace


def ec(re, im=0):
    return ExactComplex(re, im)


def P(*coeffs):
    return Polynomial(list(coeffs), EXACT)


def one_xex():
    return FunctionSpace.from_pairs([(ec(0), P(1)), (ec(1), P(0, 1))], EXACT)


# ----------------------------------------------------------- fundamental


def test_monic_fundamental_exponential_pair():
    l1, l2 = ec("1/2"), ec(-3)
    v = FunctionSpace.from_pairs([(l1, P(1)), (l2, P(1))], EXACT)
    op = monic_fundamental(v)
    # constant-coefficient factorization: (d-l1)(d-l2)
    assert op.abar(1) == RationalFunction(P(-(l1 + l2)))
    assert op.abar(2) == RationalFunction(P(l1 * l2))


def test_monic_fundamental_one_x():
    v = FunctionSpace.from_pairs([(ec(0), P(1)), (ec(0), P(0, 1))], EXACT)
    op = monic_fundamental(v)
    assert op.abar(1).is_zero() and op.abar(2).is_zero()


def test_monic_fundamental_one_xex():
    v = one_xex()
    op = monic_fundamental(v)
    # annihilation forces Abar_2 = 0 and Abar_1 = -(x+2)/(x+1)
    assert op.abar(1) == RationalFunction(P(-2, -1), P(1, 1))
    assert op.abar(2).is_zero()
    for b in v.basis:
        assert op.apply(b).is_zero()


def test_monic_fundamental_annihilates_random():
    rng = random.Random(31)
    for _ in range(6):
        v = random_general_space(rng)
        op = monic_fundamental(v)
        for b in v.canonical_basis():
            assert op.apply(b).is_zero()


# ----------------------------------------------------------- regularize


def test_regularize_no_singular_points():
    l1, l2 = ec(0), ec(1)
    v = FunctionSpace.from_pairs([(l1, P(1)), (l2, P(1))], EXACT)
    d = regularize(monic_fundamental(v), v)
    assert d.table == {(0, 2): ec(1), (0, 1): ec(-1)}


def test_regularize_one_xex():
    v = one_xex()
    d = regularize(monic_fundamental(v), v)
    # (x+1) d^2 - (x+2) d; annihilation forces the zero constant term
    assert d.x_coeff(2) == P(1, 1)
    assert d.x_coeff(1) == P(-2, -1)
    assert d.x_coeff(0).is_zero()
    for b in v.basis:
        assert d.apply(b).is_zero()


def test_regularized_coefficient_degrees():
    rng = random.Random(32)
    for _ in range(6):
        v = random_general_space(rng)
        d = regularize(monic_fundamental(v), v)
        m_total = sum(M for _z, _s, M, _m in v.singular_data())
        for j in range(d.order + 1):
            assert d.x_coeff(j).degree <= m_total
        # A_0 is the product over singular points
        assert d.x_coeff(d.order).monic() == v.regularization_multiplier().monic()
        # B_0 = prod (d - lam)^(block dim)
        b0 = d.b_poly(0)
        expect = Polynomial.one(EXACT)
        for lam, mult in v.exponent_multiplicities():
            expect = expect * P(-lam, 1) ** mult
        assert b0.monic() == expect.monic()


def test_b_polys_have_no_common_factor_for_positive_degrees():
    rng = random.Random(33)
    for _ in range(6):
        v = random_general_space(rng)
        assert all(min(degs) >= 1 for _l, degs in v.block_degree_sets())
        d = regularize(monic_fundamental(v), v)
        g = None
        for k in range(d.x_degree + 1):
            bk = d.b_poly(k)
            if bk.is_zero():
                continue
            g = bk if g is None else poly_gcd(g, bk)
        assert g is not None and g.degree == 0


def test_irregularity_read_from_exponents():
    # pole order of Abar_{M_a} at z_a equals M_a
    rng = random.Random(34)
    for _ in range(6):
        v = random_general_space(rng)
        op = monic_fundamental(v)
        for z, _seq, m_bar, _m in v.singular_data():
            assert op.abar(m_bar).den.root_multiplicity(z) == m_bar
            for i in range(m_bar + 1, op.order + 1):
                assert op.abar(i).den.root_multiplicity(z) <= m_bar


# ------------------------------------------------------ special operator


def test_special_fundamental_all_defects_one():
    sp = top_degree_special([ec(0), ec(1)], [ec(2), ec(3)], [1, 1])
    d_special = special_fundamental(sp)
    d_reg = regularize(monic_fundamental(sp.space), sp.space)
    assert d_special.proportional_to(d_reg)


def test_special_fundamental_b0():
    rng = random.Random(35)
    for _ in range(6):
        sp = random_special_space(rng)
        d = special_fundamental(sp)
        b0 = d.b_poly(0)
        expect = Polynomial.one(EXACT)
        for lam in sp.lam:
            expect = expect * P(-lam, 1)
        assert b0.monic() == expect.monic()
        for j in range(d.order + 1):
            assert d.x_coeff(j).degree <= sp.M


# ------------------------------------------------------------- swap


def test_swap_monomials():
    d = DiffOperator({(1, 1): ec(1), (0, 0): ec(3)}, EXACT, "x")
    s = d.bispectral_swap()
    assert s.var == "u"
    assert s.table == {(1, 1): ec(1), (0, 0): ec(3)}
    d2 = DiffOperator({(2, 1): ec(1)}, EXACT, "x")
    assert d2.bispectral_swap().table == {(1, 2): ec(1)}


def test_swap_constant_coefficient_operator():
    l1, l2 = ec(2), ec(5)
    d = DiffOperator(
        {(0, 2): ec(1), (0, 1): -(l1 + l2), (0, 0): l1 * l2}, EXACT, "x"
    )
    s = d.bispectral_swap()
    assert s.table == {(2, 0): ec(1), (1, 0): -(l1 + l2), (0, 0): l1 * l2}


def test_swap_involutive():
    rng = random.Random(36)
    for _ in range(10):
        table = {
            (rng.randint(0, 3), rng.randint(0, 3)): ec(rng.randint(-5, 5))
            for _ in range(6)
        }
        d = DiffOperator(table, EXACT, "x")
        assert d.bispectral_swap().bispectral_swap().table == d.table


# ------------------------------------------------------ formal conjugate


def test_formal_conjugate_basics():
    d = DiffOperator({(0, 1): ec(1)}, EXACT)  # d
    assert d.formal_conjugate().table == {(0, 1): ec(-1)}
    x = DiffOperator({(1, 0): ec(1)}, EXACT)
    assert x.formal_conjugate().table == {(1, 0): ec(1)}
    xd = DiffOperator({(1, 1): ec(1)}, EXACT)  # (x d)* = -x d - 1
    assert xd.formal_conjugate().table == {(1, 1): ec(-1), (0, 0): ec(-1)}


def test_formal_conjugate_involutive():
    rng = random.Random(37)
    for _ in range(10):
        table = {
            (rng.randint(0, 3), rng.randint(0, 3)): ec(rng.randint(-5, 5))
            for _ in range(6)
        }
        d = DiffOperator(table, EXACT)
        dd = d.formal_conjugate().formal_conjugate()
        assert dd.table == d.table


def test_conjugate_annihilates_regularized_conjugate():
    rng = random.Random(38)
    for _ in range(5):
        v = random_special_space(rng).space
        d = regularize(monic_fundamental(v), v)
        dagger = v.regularized_conjugate()
        dstar = d.formal_conjugate()
        for b in dagger.canonical_basis():
            assert dstar.apply(b).is_zero()


# ------------------------------------------------------------ factorized


def test_factorized_matches_displayed_product():
    # N = 2: ((d - ln'(e^(l1 x) (x-z1)^m1 (x-z2)^m2 / y)) (d - ln'(y e^(l2 x)))
    l1, l2 = ec(0), ec(1)
    z1, z2 = ec(0), ec(1)
    t = ec(5)
    y = P(-t, 1)
    op = factorized_from_tuple([y], [l1, l2], [z1, z2], [1, 1])
    w = P(0, 1) * P(-1, 1)  # (x-z1)(x-z2)
    a1 = RationalFunction(P(l1)) + RationalFunction(w.derivative(), w) - (
        RationalFunction(y.derivative(), y)
    )
    a2 = RationalFunction(P(l2)) + RationalFunction(y.derivative(), y)
    # (d - a1)(d - a2) = d^2 - (a1 + a2) d + (a1 a2 - a2')
    assert op.abar(1) == -(a1 + a2)
    assert op.abar(2) == a1 * a2 - a2.derivative()


def test_factorized_kills_last_element():
    l = [ec(0), ec("1/2"), ec(2)]
    z = [ec(1), ec(-1)]
    m = [2, 1]
    ys = [P(2, 1) * P(-3, 1), P(5, 1)]  # admissible: squarefree, coprime
    op = factorized_from_tuple(ys, l, z, m)
    f = QuasiPolynomial([(l[2], RationalFunction(ys[1]))], EXACT)
    assert op.apply(f).is_zero()


def test_factorized_rejects_bad_tuple():
    with pytest.raises(NonAdmissibleTuple):
        factorized_from_tuple(
            [P(0, 1)], [ec(0), ec(1)], [ec(0), ec(1)], [1, 1]
        )


# ------------------------------------------------------------- phi form


def test_extract_phi_constraints():
    lam = [ec(0), ec(1)]
    z = [ec(2), ec(3)]
    for m in ([1, 1], [2, 1], [2, 2]):
        sp = top_degree_special(lam, z, m)
        d = special_fundamental(sp)
        phi = extract_phi(d, lam, z)
        n = sp.n
        assert phi[1][0] + phi[1][1] == -ec(m[0])
        assert phi[0][0] + phi[0][1] == -ec(m[1])
        assert phi[0][1] + phi[1][1] == -ec(n[0])
        assert phi[0][0] + phi[1][0] == -ec(n[1])


def test_extract_phi_rejects_generic_operator():
    d = DiffOperator({(2, 2): ec(1), (2, 1): ec(1), (0, 0): ec(7)}, EXACT)
    with pytest.raises(NotInPhiForm):
        extract_phi(d, [ec(0), ec(1)], [ec(2), ec(3)])


# ------------------------------------------------------------- plumbing


def test_apply_respects_composition():
    rng = random.Random(39)
    for _ in range(8):
        t1 = {
            (rng.randint(0, 2), rng.randint(0, 2)): ec(rng.randint(-3, 3))
            for _ in range(4)
        }
        t2 = {
            (rng.randint(0, 2), rng.randint(0, 2)): ec(rng.randint(-3, 3))
            for _ in range(4)
        }
        d1, d2 = DiffOperator(t1, EXACT), DiffOperator(t2, EXACT)
        f = QuasiPolynomial(
            [(ec(rng.randint(-2, 2)), RationalFunction(P(1, 2, 1)))], EXACT
        )
        lhs = d1.compose(d2).apply(f)
        rhs = d1.apply(d2.apply(f))
        assert lhs == rhs


def test_operator_json_round_trip():
    d = DiffOperator({(1, 2): ec("3/4"), (0, 0): ec(-2, 1)}, EXACT, "u")
    j = d.to_json()
    assert DiffOperator.from_json(j, EXACT).table == d.table
    assert DiffOperator.from_json(j, EXACT).var == "u"


def test_proportionality():
    d = DiffOperator({(1, 1): ec(2), (0, 0): ec(4)}, EXACT)
    e = DiffOperator({(1, 1): ec(3), (0, 0): ec(6)}, EXACT)
    f = DiffOperator({(1, 1): ec(3), (0, 0): ec(5)}, EXACT)
    assert d.proportional_to(e)
    assert not d.proportional_to(f)
