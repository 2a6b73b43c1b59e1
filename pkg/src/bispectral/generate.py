"""Constructions of exact quasi-polynomial spaces with prescribed singular data.

Generic spaces with a prescribed exponent pattern only exist at critical
points of the associated product function, which are algebraic numbers; to
get exact rational instances we build spaces whose Wronskian is forced:

* ``top_degree_special``: ``<e^(lam_1 x), ..., e^(lam_{N-1} x), p e^(lam_N x)>``
  where ``p`` solves ``prod_i (d/dx + lam_N - lam_i) p = prod_a (x-z_a)^{m_a}``.
  The solve is triangular (the constant term of the operator is nonzero), so
  ``p`` is rational whenever the data is.  The result is a special space with
  degree vector ``(0, ..., 0, sum m)``.
* ``block_space``: one exponent carries the monomial block ``1, x, ...,
  x^(k-1)`` and a second carries the solved polynomial; a general
  quasi-polynomial space with a repeated exponent.
* multiplying any space by a polynomial ``h`` shifts every exponent sequence
  at a root of ``h`` up by its multiplicity, producing spaces with deeper
  irregularity and with all coefficient degrees positive.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import BispectralError
from .field import EXACT, ExactComplex
from .quasipoly import Polynomial, RationalFunction
from .spaces import FunctionSpace, classify_special


def solve_shifted_ode(mus, w):
    """The unique polynomial p with prod_i (d/dx + mu_i) p = w, all mu_i != 0.

    Uses (d/dx + mu)^-1 w = w/mu - w'/mu^2 + w''/mu^3 - ... (finite sum).
    """
    field = w.field
    p = w
    for mu in mus:
        mu = field.scalar(mu)
        if field.is_zero(mu):
            raise BispectralError("shifted ODE needs a nonzero shift")
        acc = Polynomial.zero(field)
        term = p
        sign = 1
        power = field.one / mu
        while not term.is_zero():
            acc = acc + term * (power if sign > 0 else -power)
            term = term.derivative()
            power = power / mu
            sign = -sign
        p = acc
    return p


def top_degree_special(lam, z, m, field=EXACT):
    """Special space with exponents lam, marked points z, defects m.

    Degree vector is ``(0, ..., 0, sum(m))``: the first N-1 directions carry
    constants, the last carries the solved polynomial.
    """
    lam = [field.scalar(v) for v in lam]
    z = [field.scalar(v) for v in z]
    n_dim = len(lam)
    if n_dim < 2:
        raise BispectralError("need at least two exponents")
    w = Polynomial.one(field)
    for za, ma in zip(z, m):
        w = w * Polynomial([-za, field.one], field) ** ma
    mus = [lam[-1] - l for l in lam[:-1]]
    p = solve_shifted_ode(mus, w)
    pairs = [(l, Polynomial.one(field)) for l in lam[:-1]] + [(lam[-1], p)]
    space = FunctionSpace.from_pairs(pairs, field)
    return classify_special(space, z, lam_order=lam)


def block_space(lam1, k, lam2, z, m, field=EXACT):
    """General space ``<x^j e^(lam1 x) : j < k> + <p e^(lam2 x)>`` whose
    singular points are exactly z with simple defects m."""
    lam1, lam2 = field.scalar(lam1), field.scalar(lam2)
    w = Polynomial.one(field)
    for za, ma in zip(z, m):
        w = w * Polynomial([-field.scalar(za), field.one], field) ** ma
    p = solve_shifted_ode([lam2 - lam1] * k, w)
    pairs = [(lam1, Polynomial.monomial(field, j)) for j in range(k)]
    pairs.append((lam2, p))
    return FunctionSpace.from_pairs(pairs, field)


def multiply_by_poly(space, h):
    """Multiply every basis element by the polynomial h."""
    return space.multiply(RationalFunction(h))


# ---------------------------------------------------------------------------
# randomized instances (deterministic given the rng)


def random_rational(rng, lo=-6, hi=6, max_den=3):
    num = rng.randint(lo, hi)
    den = rng.randint(1, max_den)
    return Fraction(num, den)


def distinct_rationals(rng, count, lo=-6, hi=6, max_den=3):
    vals = []
    guard = 0
    while len(vals) < count:
        guard += 1
        if guard > 1000:
            raise BispectralError("could not draw distinct rationals")
        v = random_rational(rng, lo, hi, max_den)
        if v not in vals:
            vals.append(v)
    return [ExactComplex(v) for v in vals]


def random_composition(rng, total, parts, allow_zero=False):
    """Nonnegative integers of the given length summing to ``total``."""
    lo = 0 if allow_zero else 1
    if total < parts * lo:
        raise BispectralError("composition infeasible")
    cuts = [rng.randint(lo, total - lo * (parts - 1)) if parts > 1 else total]
    rest = total - cuts[0]
    for i in range(1, parts):
        left = parts - i - 1
        if i == parts - 1:
            cuts.append(rest)
        else:
            c = rng.randint(lo, rest - lo * left)
            cuts.append(c)
            rest -= c
    return cuts


def random_special_space(rng, max_n=3, max_m=3, max_deg=4, field=EXACT):
    """Random special instance of the top-degree construction."""
    n_dim = rng.randint(2, max_n)
    m_pts = rng.randint(2, max_m)
    lam = distinct_rationals(rng, n_dim)
    z = distinct_rationals(rng, m_pts)
    total = rng.randint(m_pts, max_deg)
    m = random_composition(rng, total, m_pts, allow_zero=rng.random() < 0.3)
    return top_degree_special(lam, z, m, field)


def random_general_space(rng, max_deg=4, field=EXACT):
    """Random quasi-polynomial space with every coefficient degree positive.

    Draws a top-degree or block instance and multiplies by a linear factor,
    which also creates a singular point with a two-step exponent defect.
    """
    kind = rng.random()
    z = distinct_rationals(rng, 2)
    m = random_composition(rng, rng.randint(2, max(2, max_deg - 1)), 2, True)
    if kind < 0.5:
        lam = distinct_rationals(rng, rng.randint(2, 3))
        sp = top_degree_special(lam, z, m, field)
        space = sp.space
    else:
        lam = distinct_rationals(rng, 2)
        space = block_space(lam[0], rng.randint(2, 3), lam[1], z, m, field)
    w_candidates = [v for v in distinct_rationals(rng, 4) if all(
        not field.eq(v, zz) for zz in z)]
    w = w_candidates[0]
    h = Polynomial([-w, field.one], field)
    return multiply_by_poly(space, h)
