"""Univariate function algebra: polynomials, rational functions,
quasi-polynomials and local Laurent expansions.

A quasi-polynomial is a finite sum ``sum_i r_i(x) e^(lam_i x)`` with
rational-function coefficients ``r_i`` and distinct exponents ``lam_i``.
The class is closed under differentiation and multiplication, and local
expansions at a point keep the transcendental prefactors ``e^(lam*z0)``
as formal unit tags so that exact arithmetic stays exact.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import (
    ApproxBackendUnsupported,
    BispectralError,
    DivisionByZero,
    InsufficientPrecision,
    NoConvergence,
    PoleHit,
)
from .field import ExactComplex, common_field, scalar_from_json, scalar_to_json


class Polynomial:
    """Dense univariate polynomial, coefficients lowest-degree first."""

    __slots__ = ("coeffs", "field")

    def __init__(self, coeffs, field):
        cs = [field.scalar(c) for c in coeffs]
        # trim trailing (near-)zero coefficients
        if field.exact:
            while cs and not cs[-1]:
                cs.pop()
        else:
            scale = max([abs(c) for c in cs], default=0.0)
            while cs and abs(cs[-1]) <= field.tol * max(1.0, scale):
                cs.pop()
        self.coeffs = tuple(cs)
        self.field = field

    # -- constructors ------------------------------------------------
    @classmethod
    def zero(cls, field):
        return cls([], field)

    @classmethod
    def one(cls, field):
        return cls([field.one], field)

    @classmethod
    def x(cls, field):
        return cls([field.zero, field.one], field)

    @classmethod
    def constant(cls, c, field):
        return cls([field.scalar(c)], field)

    @classmethod
    def monomial(cls, field, k, coeff=None):
        c = field.one if coeff is None else field.scalar(coeff)
        return cls([field.zero] * k + [c], field)

    @classmethod
    def from_roots(cls, roots, field):
        p = cls.one(field)
        for r in roots:
            p = p * cls([-field.scalar(r), field.one], field)
        return p

    # -- basic structure ---------------------------------------------
    @property
    def degree(self):
        """Degree; -1 for the zero polynomial."""
        return len(self.coeffs) - 1

    def is_zero(self):
        return not self.coeffs

    def lc(self):
        if not self.coeffs:
            return self.field.zero
        return self.coeffs[-1]

    def coeff(self, k):
        if 0 <= k < len(self.coeffs):
            return self.coeffs[k]
        return self.field.zero

    def monic(self):
        if self.is_zero():
            return self
        inv = self.field.one / self.coeffs[-1]
        return Polynomial([c * inv for c in self.coeffs], self.field)

    # -- arithmetic ----------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, Polynomial):
            common_field(self.field, other.field)
            return other
        try:
            return Polynomial([self.field.scalar(other)], self.field)
        except Exception:
            return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        n = max(len(self.coeffs), len(o.coeffs))
        return Polynomial(
            [self.coeff(k) + o.coeff(k) for k in range(n)], self.field
        )

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __neg__(self):
        return Polynomial([-c for c in self.coeffs], self.field)

    def __mul__(self, other):
        if isinstance(other, (RationalFunction, QuasiPolynomial)):
            return NotImplemented
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if self.is_zero() or o.is_zero():
            return Polynomial.zero(self.field)
        out = [self.field.zero] * (len(self.coeffs) + len(o.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(o.coeffs):
                out[i + j] = out[i + j] + a * b
        return Polynomial(out, self.field)

    __rmul__ = __mul__

    def __pow__(self, n):
        if n < 0:
            raise ValueError("negative polynomial power")
        out = Polynomial.one(self.field)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __divmod__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if o.is_zero():
            raise DivisionByZero("polynomial division by zero")
        rem = list(self.coeffs)
        dq = len(rem) - len(o.coeffs)
        if dq < 0:
            return Polynomial.zero(self.field), self
        quo = [self.field.zero] * (dq + 1)
        inv = self.field.one / o.lc()
        for k in range(dq, -1, -1):
            c = rem[k + o.degree] * inv
            quo[k] = c
            for j, b in enumerate(o.coeffs):
                rem[k + j] = rem[k + j] - c * b
        return Polynomial(quo, self.field), Polynomial(rem, self.field)

    def __floordiv__(self, other):
        return divmod(self, other)[0]

    def __mod__(self, other):
        return divmod(self, other)[1]

    def divexact(self, other, rel_tol=1e-8):
        """Division that must be exact; the remainder is checked."""
        q, r = divmod(self, other)
        if self.field.exact:
            if not r.is_zero():
                raise BispectralError("division is not exact")
        else:
            scale = max([abs(c) for c in self.coeffs], default=0.0)
            bad = max([abs(c) for c in r.coeffs], default=0.0)
            if bad > rel_tol * max(1.0, scale):
                raise BispectralError(
                    f"division remainder too large ({bad:.3g})"
                )
        return q

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if self.field.exact:
            return self.coeffs == o.coeffs
        n = max(len(self.coeffs), len(o.coeffs))
        return all(self.field.eq(self.coeff(k), o.coeff(k)) for k in range(n))

    def __hash__(self):
        return hash((self.coeffs, self.field))

    # -- calculus ------------------------------------------------------
    def derivative(self, k=1):
        p = self
        for _ in range(k):
            p = Polynomial(
                [(i + 1) * c for i, c in enumerate(p.coeffs[1:])], p.field
            )
        return p

    def evaluate(self, x0):
        x0 = self.field.scalar(x0)
        acc = self.field.zero
        for c in reversed(self.coeffs):
            acc = acc * x0 + c
        return acc

    def shift(self, a):
        """Taylor shift: returns q with q(t) = p(t + a)."""
        a = self.field.scalar(a)
        out = Polynomial.zero(self.field)
        xa = Polynomial([a, self.field.one], self.field)
        for c in reversed(self.coeffs):
            out = out * xa + Polynomial([c], self.field)
        return out

    def scale_var(self, s):
        """Returns q with q(t) = p(s*t)."""
        s = self.field.scalar(s)
        pw = self.field.one
        out = []
        for c in self.coeffs:
            out.append(c * pw)
            pw = pw * s
        return Polynomial(out, self.field)

    def root_multiplicity(self, z0):
        """Multiplicity of z0 as a root (exact backend: exact division)."""
        z0 = self.field.scalar(z0)
        if self.is_zero():
            raise BispectralError("zero polynomial has no root multiplicity")
        lin = Polynomial([-z0, self.field.one], self.field)
        mult, p = 0, self
        while not p.is_zero():
            q, r = divmod(p, lin)
            if self.field.exact:
                if not r.is_zero():
                    break
            else:
                scale = max([abs(c) for c in p.coeffs], default=0.0)
                if max([abs(c) for c in r.coeffs], default=0.0) > 1e-6 * max(
                    1.0, scale
                ):
                    break
            mult, p = mult + 1, q
        return mult

    def to_float(self):
        return [complex(c) if isinstance(c, ExactComplex) else c for c in self.coeffs]

    def __repr__(self):
        if self.is_zero():
            return "Poly(0)"
        parts = []
        for i, c in enumerate(self.coeffs):
            if self.field.exact and not c:
                continue
            parts.append(f"({c})*x^{i}" if i else f"({c})")
        return "Poly(" + " + ".join(parts) + ")"


def poly_gcd(p, q):
    """Monic gcd of two polynomials (exact backend only)."""
    field = common_field(p.field, q.field)
    if not field.exact:
        raise ApproxBackendUnsupported("polynomial gcd needs exact arithmetic")
    a, b = p, q
    while not b.is_zero():
        a, b = b, a % b
    if a.is_zero():
        return a
    return a.monic()


def poly_lcm(p, q):
    if p.is_zero() or q.is_zero():
        return Polynomial.zero(p.field)
    g = poly_gcd(p, q)
    return ((p * q) // g).monic()


class RationalFunction:
    """Quotient of two polynomials, denominator monic; exact backend keeps
    numerator and denominator coprime."""

    __slots__ = ("num", "den", "field")

    def __init__(self, num, den=None, field=None):
        if isinstance(num, Polynomial):
            field = num.field if field is None else field
        if field is None:
            raise ValueError("field required")
        if not isinstance(num, Polynomial):
            num = Polynomial([field.scalar(num)], field)
        if den is None:
            den = Polynomial.one(field)
        elif not isinstance(den, Polynomial):
            den = Polynomial([field.scalar(den)], field)
        common_field(num.field, den.field)
        if den.is_zero():
            raise DivisionByZero("rational function with zero denominator")
        if num.is_zero():
            den = Polynomial.one(field)
        elif field.exact:
            g = poly_gcd(num, den)
            if g.degree > 0:
                num, den = num // g, den // g
        lc = den.lc()
        if field.exact and lc != field.one:
            inv = field.one / lc
            num = num * inv
            den = den * inv
        elif not field.exact and abs(lc - 1) > 1e-15:
            inv = 1.0 / lc
            num = num * inv
            den = den * inv
        self.num, self.den, self.field = num, den, field

    @classmethod
    def zero(cls, field):
        return cls(Polynomial.zero(field))

    @classmethod
    def one(cls, field):
        return cls(Polynomial.one(field))

    def is_zero(self):
        return self.num.is_zero()

    def is_polynomial(self):
        return self.den.degree == 0

    def as_polynomial(self):
        if self.den.degree != 0:
            return self.num.divexact(self.den)
        return self.num * (self.field.one / self.den.coeffs[0])

    def _coerce(self, other):
        if isinstance(other, RationalFunction):
            common_field(self.field, other.field)
            return other
        if isinstance(other, Polynomial):
            return RationalFunction(other)
        try:
            return RationalFunction(
                Polynomial([self.field.scalar(other)], self.field)
            )
        except Exception:
            return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return RationalFunction(
            self.num * o.den + o.num * self.den, self.den * o.den
        )

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __neg__(self):
        return RationalFunction(-self.num, self.den)

    def __mul__(self, other):
        if isinstance(other, QuasiPolynomial):
            return NotImplemented
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return RationalFunction(self.num * o.num, self.den * o.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if o.is_zero():
            raise DivisionByZero("division by the zero rational function")
        return RationalFunction(self.num * o.den, self.den * o.num)

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o / self

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return (self.num * o.den) == (o.num * self.den)

    def __hash__(self):
        return hash((self.num, self.den))

    def derivative(self, k=1):
        f = self
        for _ in range(k):
            f = RationalFunction(
                f.num.derivative() * f.den - f.num * f.den.derivative(),
                f.den * f.den,
            )
        return f

    def evaluate(self, x0):
        dv = self.den.evaluate(x0)
        if self.field.is_zero(dv, scale=_coeff_scale(self.den)):
            raise PoleHit(f"evaluation at a pole ({x0})")
        return self.num.evaluate(x0) / dv

    def order_at(self, z0):
        """Valuation at z0: root multiplicity in num minus in den."""
        if self.is_zero():
            raise BispectralError("zero rational function has no finite order")
        return self.num.root_multiplicity(z0) - self.den.root_multiplicity(z0)

    def series_at(self, z0, upto):
        """Laurent coefficients at z0 through order ``upto``.

        Returns ``(lo, coeffs)`` with coeffs[k] the coefficient of
        ``(x-z0)^(lo+k)``; the list covers orders lo..upto.
        """
        field = self.field
        z0 = field.scalar(z0)
        if self.is_zero():
            return 0, []
        s = self.den.root_multiplicity(z0)
        den_shift = self.den.shift(z0)
        d2 = Polynomial(den_shift.coeffs[s:], field)
        num_shift = self.num.shift(z0)
        lo = -s
        nterms = upto - lo + 1
        if nterms <= 0:
            return lo, []
        inv = _series_inverse(list(d2.coeffs), nterms, field)
        out = []
        ncoef = list(num_shift.coeffs)
        for k in range(nterms):
            acc = field.zero
            for i in range(min(k, len(ncoef) - 1) + 1):
                if k - i < len(inv):
                    acc = acc + ncoef[i] * inv[k - i]
            out.append(acc)
        return lo, out

    def to_float(self):
        f = self

        def ev(x):
            num = 0j
            for c in reversed(f.num.to_float()):
                num = num * x + c
            den = 0j
            for c in reversed(f.den.to_float()):
                den = den * x + c
            return num / den

        return ev

    def __repr__(self):
        if self.is_polynomial():
            return repr(self.as_polynomial())
        return f"({self.num!r})/({self.den!r})"


def _coeff_scale(p):
    if p.field.exact:
        return 1.0
    return max([abs(c) for c in p.coeffs], default=0.0)


def _series_inverse(coeffs, n, field):
    """First n coefficients of 1/sum(coeffs[k] t^k); coeffs[0] != 0."""
    if not coeffs or field.is_zero(
        coeffs[0], scale=max((field.abs(c) for c in coeffs), default=1.0)
    ):
        raise DivisionByZero("series inverse of a series with zero constant term")
    inv0 = field.one / coeffs[0]
    out = [inv0]
    for k in range(1, n):
        acc = field.zero
        for i in range(1, min(k, len(coeffs) - 1) + 1):
            acc = acc + coeffs[i] * out[k - i]
        out.append(-inv0 * acc)
    return out


# ---------------------------------------------------------------------------
# local expansions


class LaurentSeries:
    """Truncated Laurent expansion at a point, with an optional formal
    exponential prefactor.

    ``coeffs[k]`` is the coefficient of ``(x-z0)^(lo+k)``; the data is valid
    through order ``hi = lo + len(coeffs) - 1``.  ``unit_exp`` is a scalar
    ``mu`` recording a formal multiplier ``e^mu`` (kept symbolic on the exact
    backend, where ``e^mu`` is transcendental for ``mu != 0``).
    """

    __slots__ = ("z0", "lo", "coeffs", "unit_exp", "field")

    def __init__(self, z0, lo, coeffs, field, unit_exp=None):
        self.z0 = field.scalar(z0)
        self.lo = int(lo)
        self.coeffs = tuple(coeffs)
        self.unit_exp = field.zero if unit_exp is None else field.scalar(unit_exp)
        self.field = field

    @property
    def hi(self):
        return self.lo + len(self.coeffs) - 1

    def order(self):
        """Order of the leading nonzero coefficient, or None if the series
        vanishes through its window."""
        scale = (
            1.0
            if self.field.exact
            else max((abs(c) for c in self.coeffs), default=0.0)
        )
        for k, c in enumerate(self.coeffs):
            if not self.field.is_zero(c, scale=scale):
                return self.lo + k
        return None

    def coeff(self, order):
        if self.lo <= order <= self.hi:
            return self.coeffs[order - self.lo]
        return self.field.zero

    def leading(self):
        o = self.order()
        if o is None:
            raise InsufficientPrecision("series vanishes through its window")
        return self.coeff(o)

    def __mul__(self, other):
        if not isinstance(other, LaurentSeries):
            c = self.field.scalar(other)
            return LaurentSeries(
                self.z0, self.lo, [c * v for v in self.coeffs], self.field,
                self.unit_exp,
            )
        common_field(self.field, other.field)
        hi = min(self.lo + other.hi, other.lo + self.hi)
        lo = self.lo + other.lo
        n = hi - lo + 1
        if n <= 0:
            return LaurentSeries(
                self.z0, lo, [], self.field, self.unit_exp + other.unit_exp
            )
        out = [self.field.zero] * n
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                k = i + j
                if k < n:
                    out[k] = out[k] + a * b
        return LaurentSeries(
            self.z0, lo, out, self.field, self.unit_exp + other.unit_exp
        )

    __rmul__ = __mul__

    def __add__(self, other):
        if not isinstance(other, LaurentSeries):
            return NotImplemented
        if not self.field.eq(self.unit_exp, other.unit_exp):
            raise BispectralError("cannot add series with different unit factors")
        lo = min(self.lo, other.lo)
        hi = min(self.hi, other.hi)
        out = [self.coeff(k) + other.coeff(k) for k in range(lo, hi + 1)]
        return LaurentSeries(self.z0, lo, out, self.field, self.unit_exp)

    def __repr__(self):
        return (
            f"LaurentSeries(z0={self.z0!r}, orders {self.lo}..{self.hi}, "
            f"unit=e^({self.unit_exp!r}))"
        )


class LocalExpansion:
    """Sum of Laurent series at one point with distinct unit factors.

    Expanding a multi-exponent quasi-polynomial at z0 produces one series per
    exponent lam, tagged with the unit e^(lam*z0).  Units with distinct
    exponents are linearly independent over the rationals, so the order of
    the sum is the minimum over the parts.
    """

    def __init__(self, z0, parts, field):
        self.z0 = field.scalar(z0)
        self.field = field
        merged = []
        for p in sorted(parts, key=lambda s: field.sort_key(s.unit_exp)):
            if merged and field.eq(merged[-1].unit_exp, p.unit_exp):
                merged[-1] = merged[-1] + p
            else:
                merged.append(p)
        self.parts = [p for p in merged if p.coeffs]

    def order(self):
        orders = [p.order() for p in self.parts]
        orders = [o for o in orders if o is not None]
        return min(orders) if orders else None

    def window_top(self):
        return min((p.hi for p in self.parts), default=None)

    def __mul__(self, other):
        if not isinstance(other, LocalExpansion):
            return NotImplemented
        out = []
        for a in self.parts:
            for b in other.parts:
                out.append(a * b)
        return LocalExpansion(self.z0, out, self.field)

    def __add__(self, other):
        if not isinstance(other, LocalExpansion):
            return NotImplemented
        return LocalExpansion(self.z0, list(self.parts) + list(other.parts), self.field)

    def same_through(self, other, hi=None):
        """Compare two expansions through a common window top."""
        tops = [
            t
            for t in (self.window_top(), other.window_top(), hi)
            if t is not None
        ]
        if not tops:
            return True
        top = min(tops)
        units = {self.field.sort_key(p.unit_exp) for p in self.parts}
        units |= {self.field.sort_key(p.unit_exp) for p in other.parts}
        for u in units:
            pa = next(
                (p for p in self.parts if self.field.sort_key(p.unit_exp) == u),
                None,
            )
            pb = next(
                (p for p in other.parts if other.field.sort_key(p.unit_exp) == u),
                None,
            )
            lo = min(pa.lo if pa else 0, pb.lo if pb else 0)
            for k in range(lo, top + 1):
                ca = pa.coeff(k) if pa else self.field.zero
                cb = pb.coeff(k) if pb else self.field.zero
                if self.field.exact:
                    if ca != cb:
                        return False
                elif not self.field.eq(ca, cb):
                    return False
        return True


# ---------------------------------------------------------------------------
# quasi-polynomials


class QuasiPolynomial:
    """Finite sum of rational-function multiples of exponentials."""

    __slots__ = ("terms", "var", "field")

    def __init__(self, terms, field, var="x"):
        norm = []
        for lam, coef in terms:
            lam = field.scalar(lam)
            if not isinstance(coef, RationalFunction):
                if isinstance(coef, Polynomial):
                    coef = RationalFunction(coef)
                else:
                    coef = RationalFunction(
                        Polynomial([field.scalar(coef)], field)
                    )
            common_field(field, coef.field)
            if not coef.is_zero():
                norm.append((lam, coef))
        norm.sort(key=lambda t: field.sort_key(t[0]))
        merged = []
        for lam, coef in norm:
            if merged and field.eq(merged[-1][0], lam):
                s = merged[-1][1] + coef
                if s.is_zero():
                    merged.pop()
                else:
                    merged[-1] = (merged[-1][0], s)
            else:
                merged.append((lam, coef))
        self.terms = tuple(merged)
        self.var = var
        self.field = field

    @classmethod
    def zero(cls, field, var="x"):
        return cls([], field, var)

    @classmethod
    def exponential(cls, lam, field, var="x", coef=None):
        c = RationalFunction.one(field) if coef is None else coef
        return cls([(lam, c)], field, var)

    @classmethod
    def from_polynomial(cls, p, var="x"):
        return cls([(p.field.zero, RationalFunction(p))], p.field, var)

    def is_zero(self):
        return not self.terms

    def is_single_term(self):
        return len(self.terms) == 1

    def single_term(self):
        if len(self.terms) != 1:
            raise BispectralError("quasi-polynomial is not a single term")
        return self.terms[0]

    def exponents(self):
        return [lam for lam, _ in self.terms]

    def has_polynomial_coeffs(self):
        return all(c.is_polynomial() for _, c in self.terms)

    def _check(self, other):
        common_field(self.field, other.field)
        if self.var != other.var:
            raise BispectralError(
                f"variable mismatch: {self.var} vs {other.var}"
            )

    def __add__(self, other):
        if not isinstance(other, QuasiPolynomial):
            return NotImplemented
        self._check(other)
        return QuasiPolynomial(
            list(self.terms) + list(other.terms), self.field, self.var
        )

    def __sub__(self, other):
        if not isinstance(other, QuasiPolynomial):
            return NotImplemented
        return self + (-other)

    def __neg__(self):
        return QuasiPolynomial(
            [(lam, -c) for lam, c in self.terms], self.field, self.var
        )

    def __mul__(self, other):
        if isinstance(other, QuasiPolynomial):
            self._check(other)
            out = []
            for la, ca in self.terms:
                for lb, cb in other.terms:
                    out.append((la + lb, ca * cb))
            return QuasiPolynomial(out, self.field, self.var)
        if isinstance(other, (RationalFunction, Polynomial)):
            other = (
                other
                if isinstance(other, RationalFunction)
                else RationalFunction(other)
            )
            return QuasiPolynomial(
                [(lam, c * other) for lam, c in self.terms], self.field, self.var
            )
        c = self.field.scalar(other)
        return QuasiPolynomial(
            [(lam, coef * c) for lam, coef in self.terms], self.field, self.var
        )

    __rmul__ = __mul__

    def derivative(self, k=1):
        """k-fold derivative; each term maps to (r' + lam*r) e^(lam x)."""
        f = self
        for _ in range(k):
            f = QuasiPolynomial(
                [
                    (lam, c.derivative() + c * lam)
                    for lam, c in f.terms
                ],
                f.field,
                f.var,
            )
        return f

    def expand_at(self, z0, upto):
        """Local expansion at z0 with coefficient data through order ``upto``."""
        field = self.field
        z0 = field.scalar(z0)
        parts = []
        for lam, coef in self.terms:
            lo, coeffs = coef.series_at(z0, upto)
            ser = LaurentSeries(z0, lo, coeffs, field)
            n_exp = upto - lo + 1
            exp_coeffs = []
            fact = field.one
            pw = field.one
            for k in range(max(n_exp, 1)):
                if k:
                    fact = fact * field.scalar(k)
                    pw = pw * lam
                exp_coeffs.append(pw / fact if k else field.one)
            exp_ser = LaurentSeries(z0, 0, exp_coeffs, field)
            prod = ser * exp_ser
            if field.exact:
                parts.append(
                    LaurentSeries(z0, prod.lo, prod.coeffs, field, lam * z0)
                )
            else:
                u = cmath.exp(complex(lam) * complex(z0))
                parts.append(
                    LaurentSeries(
                        z0, prod.lo, [u * c for c in prod.coeffs], field
                    )
                )
        return LocalExpansion(z0, parts, field)

    def evaluate_float(self, x0):
        """Numeric value at x0 (floats the scalars; exact backend allowed)."""
        x0 = complex(x0)
        acc = 0j
        for lam, coef in self.terms:
            acc += coef.to_float()(x0) * cmath.exp(complex(lam) * x0)
        return acc

    def __eq__(self, other):
        if not isinstance(other, QuasiPolynomial):
            return NotImplemented
        self._check(other)
        d = self - other
        return d.is_zero()

    def __hash__(self):
        return hash((self.terms, self.var))

    def __repr__(self):
        if not self.terms:
            return "QP(0)"
        bits = []
        for lam, c in self.terms:
            bits.append(f"[{c!r}]e^({lam!r}{self.var})")
        return " + ".join(bits)

    # -- serialization -------------------------------------------------
    def to_json(self):
        return {
            "terms": [
                {
                    "lambda": scalar_to_json(lam),
                    "num": [scalar_to_json(c) for c in coef.num.coeffs],
                    "den": [scalar_to_json(c) for c in coef.den.coeffs],
                }
                for lam, coef in self.terms
            ]
        }

    @classmethod
    def from_json(cls, obj, field, var="x"):
        terms = []
        for t in obj["terms"]:
            lam = scalar_from_json(t["lambda"], field)
            num = Polynomial([scalar_from_json(c, field) for c in t["num"]], field)
            den_cs = t.get("den", None)
            den = (
                Polynomial.one(field)
                if not den_cs
                else Polynomial([scalar_from_json(c, field) for c in den_cs], field)
            )
            terms.append((lam, RationalFunction(num, den)))
        return cls(terms, field, var)


def poly_to_json(p):
    return {"coeffs": [scalar_to_json(c) for c in p.coeffs]}


def poly_from_json(obj, field):
    return Polynomial([scalar_from_json(c, field) for c in obj["coeffs"]], field)


# ---------------------------------------------------------------------------
# root finding


@dataclass(frozen=True)
class Root:
    value: object
    multiplicity: int
    exact: bool


def _aberth(coeffs, max_iter=200, tol=1e-14):
    """Aberth-Ehrlich simultaneous iteration on complex monic coefficients."""
    n = len(coeffs) - 1
    lead = coeffs[-1]
    cs = [c / lead for c in coeffs]

    def val_der(x):
        p = 0j
        dp = 0j
        for c in reversed(cs):
            dp = dp * x + p
            p = p * x + c
        return p, dp

    radius = 1.0 + max(abs(c) for c in cs[:-1]) if n else 1.0
    roots = [
        radius * cmath.exp(2j * math.pi * (k + 0.35) / n + 0.4j) for k in range(n)
    ]
    for _ in range(max_iter):
        moved = 0.0
        new = list(roots)
        for k in range(n):
            p, dp = val_der(roots[k])
            if p == 0:
                continue
            if dp == 0:
                new[k] = roots[k] * (1 + 1e-6) + 1e-6
                moved = max(moved, 1.0)
                continue
            w = p / dp
            s = 0j
            for j in range(n):
                if j != k:
                    d = roots[k] - roots[j]
                    if d == 0:
                        d = 1e-30
                    s += 1.0 / d
            denom = 1.0 - w * s
            if denom == 0:
                step = w
            else:
                step = w / denom
            new[k] = roots[k] - step
            moved = max(moved, abs(step) / max(1.0, abs(roots[k])))
        roots = new
        if moved < tol:
            break
    else:
        resid = max(abs(val_der(r)[0]) for r in roots)
        if resid > 1e-6 * max(1.0, radius**n):
            raise NoConvergence(
                f"root iteration did not settle (residual {resid:.3g})"
            )
    return roots


def _cluster(points, eps=1e-7):
    """Greedy clustering of numeric roots into (center, multiplicity)."""
    pts = sorted(points, key=lambda z: (z.real, z.imag))
    clusters = []
    for p in pts:
        for c in clusters:
            if abs(p - c[0] / c[1]) <= eps * max(1.0, abs(p)) + eps:
                c[0] += p
                c[1] += 1
                break
        else:
            clusters.append([p, 1])
    return [(c[0] / c[1], c[1]) for c in clusters]


def _rational_candidates(x):
    """Plausible exact values for a float, small denominators first."""
    out = []
    for bound in (1, 10, 100, 10**4, 10**6, 10**8):
        fr = Fraction(x).limit_denominator(bound)
        if fr not in out:
            out.append(fr)
    return out


def poly_roots(p, cluster_eps=1e-7):
    """All complex roots with multiplicities.

    On the exact backend, roots that verify exactly as Gaussian rationals are
    returned exact (multiplicity by exact deflation); the remaining factor's
    roots are numeric and flagged approximate.  The approximate backend uses
    Aberth iteration with greedy clustering.
    """
    if p.is_zero():
        raise BispectralError("the zero polynomial has every root")
    field = p.field
    if p.degree == 0:
        return []
    if not field.exact:
        roots = _aberth(p.to_float())
        return [
            Root(v, m, False)
            for v, m in sorted(
                _cluster(roots, cluster_eps), key=lambda c: (c[0].real, c[0].imag)
            )
        ]
    # exact backend: locate numerically, certify rational candidates exactly
    numeric = _aberth(p.to_float())
    exact_roots = []
    rest = p
    seen = set()
    for v, _ in _cluster(numeric, cluster_eps):
        for re_c in _rational_candidates(v.real):
            hit = None
            for im_c in _rational_candidates(v.imag):
                cand = ExactComplex(re_c, im_c)
                if cand in seen:
                    continue
                seen.add(cand)
                if rest.evaluate(cand) == field.zero:
                    hit = cand
                    break
            if hit is not None:
                mult = rest.root_multiplicity(hit)
                exact_roots.append(Root(hit, mult, True))
                lin = Polynomial([-hit, field.one], field)
                for _ in range(mult):
                    rest = rest // lin
                break
    out = list(exact_roots)
    if rest.degree > 0:
        for v, m in _cluster(_aberth(rest.to_float()), cluster_eps):
            out.append(Root(v, m, False))
    def key(r):
        v = r.value
        if isinstance(v, ExactComplex):
            return (float(v.re), float(v.im))
        return (v.real, v.imag)
    return sorted(out, key=key)


# ---------------------------------------------------------------------------
# root-separation (admissibility) checks on polynomial tuples


def _poly_points_apart(p, points, eps):
    """True if no root of p is within eps of any of the points."""
    if p.degree <= 0:
        return True
    for r in poly_roots(p):
        rv = complex(r.value) if isinstance(r.value, ExactComplex) else r.value
        for z in points:
            if abs(rv - complex(z)) <= eps:
                return False
    return True


def tuple_admissible(ys, zs, field, eps=1e-7):
    """Root-separation conditions on a tuple of polynomials.

    The first polynomial must not vanish at any of the marked points; every
    polynomial must be square-free; adjacent polynomials must be coprime.
    Returns ``(ok, reason)``.
    """
    if not ys:
        return True, ""
    if field.exact:
        for z in zs:
            if ys[0].evaluate(z) == field.zero:
                return False, f"first polynomial vanishes at marked point {z!r}"
        for i, y in enumerate(ys):
            if y.degree > 0 and poly_gcd(y, y.derivative()).degree > 0:
                return False, f"polynomial {i + 1} has a multiple root"
        for i in range(len(ys) - 1):
            if poly_gcd(ys[i], ys[i + 1]).degree > 0:
                return False, f"polynomials {i + 1} and {i + 2} share a root"
        return True, ""
    zpts = [complex(z) for z in zs]
    if not _poly_points_apart(ys[0], zpts, eps):
        return False, "first polynomial has a root at a marked point"
    root_sets = []
    for i, y in enumerate(ys):
        rs = (
            [complex(r.value) for r in poly_roots(y) for _ in range(r.multiplicity)]
            if y.degree > 0
            else []
        )
        for a in range(len(rs)):
            for b in range(a + 1, len(rs)):
                if abs(rs[a] - rs[b]) <= eps:
                    return False, f"polynomial {i + 1} has a multiple root"
        root_sets.append(rs)
    for i in range(len(root_sets) - 1):
        for a in root_sets[i]:
            for b in root_sets[i + 1]:
                if abs(a - b) <= eps:
                    return False, f"polynomials {i + 1} and {i + 2} share a root"
    return True, ""
