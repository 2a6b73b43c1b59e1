"""Scalar backends: exact complex rationals and tolerance-aware complex floats.

Every container in this package (polynomials, spaces, operators, ...) carries
a field object, either :class:`ExactField` or :class:`ApproxField`.  Exact
scalars are :class:`ExactComplex` values (a pair of arbitrary-precision
rationals); approximate scalars are plain Python ``complex`` numbers whose
equality is decided by the tolerance stored in the field.  The two backends
never mix silently: combining them raises :class:`~bispectral.errors.MixedBackend`.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import DivisionByZero, MixedBackend

try:
    from gmpy2 import mpq as Rat
except ImportError:  # pragma: no cover - gmpy2 is a declared dependency
    Rat = Fraction

_RAT_ZERO = Rat(0)
_RAT_TYPES = (int, Fraction, type(_RAT_ZERO))


def _to_rat(value):
    if isinstance(value, _RAT_TYPES):
        return Rat(value)
    if isinstance(value, str):
        return Rat(value)
    if isinstance(value, float):
        # decimal-faithful: 0.1 -> 1/10, not the binary expansion
        return Rat(Fraction(str(value)))
    raise TypeError(f"cannot build a rational from {value!r}")


class ExactComplex:
    """A complex number with exact rational real and imaginary parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        if isinstance(re, ExactComplex):
            re, im = re.re, re.im + _to_rat(im)
        object.__setattr__(self, "re", _to_rat(re))
        object.__setattr__(self, "im", _to_rat(im))

    def __setattr__(self, name, value):
        raise AttributeError("ExactComplex is immutable")

    def _coerce(self, other):
        if isinstance(other, ExactComplex):
            return other
        if isinstance(other, _RAT_TYPES):
            return ExactComplex(other)
        if isinstance(other, (float, complex)):
            raise MixedBackend(
                "cannot combine an exact scalar with a floating-point value"
            )
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return ExactComplex(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return ExactComplex(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return ExactComplex(o.re - self.re, o.im - self.im)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return ExactComplex(
            self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        d = o.re * o.re + o.im * o.im
        if d == 0:
            raise DivisionByZero("exact division by zero")
        return ExactComplex(
            (self.re * o.re + self.im * o.im) / d,
            (self.im * o.re - self.re * o.im) / d,
        )

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o / self

    def __neg__(self):
        return ExactComplex(-self.re, -self.im)

    def __pow__(self, n):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return ExactComplex(1) / self ** (-n)
        out = ExactComplex(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __bool__(self):
        return self.re != 0 or self.im != 0

    def conjugate(self):
        return ExactComplex(self.re, -self.im)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        if self.im == 0:
            return str(self.re)
        if self.re == 0:
            return f"{self.im}i"
        sign = "+" if self.im > 0 else "-"
        return f"{self.re}{sign}{abs(self.im)}i"


class ExactField:
    """Backend of exact complex rationals; equality is literal."""

    exact = True

    def scalar(self, value=0, im=0):
        if isinstance(value, ExactComplex):
            return value if im == 0 else ExactComplex(value.re, im)
        if isinstance(value, complex):
            raise MixedBackend("got a float complex value on the exact backend")
        return ExactComplex(value, im)

    @property
    def zero(self):
        return ExactComplex(0)

    @property
    def one(self):
        return ExactComplex(1)

    def is_zero(self, v, scale=None):
        self.check(v)
        return not v

    def eq(self, a, b):
        self.check(a)
        self.check(b)
        return a == b

    def check(self, v):
        if not isinstance(v, ExactComplex):
            raise MixedBackend(f"expected an exact scalar, got {type(v).__name__}")
        return v

    def abs(self, v):
        return abs(complex(v))

    def sort_key(self, v):
        return (v.re, v.im)

    def __repr__(self):
        return "ExactField()"

    def __eq__(self, other):
        return isinstance(other, ExactField)

    def __hash__(self):
        return hash("ExactField")


class ApproxField:
    """Backend of complex floats with relative-tolerance equality.

    Two scalars are equal when ``|a-b| <= tol * max(1, |a|, |b|)``; a scalar
    is zero when its magnitude is below ``tol`` times the supplied scale.
    """

    exact = False

    def __init__(self, tol=1e-9):
        self.tol = float(tol)

    def scalar(self, value=0, im=0.0):
        if isinstance(value, ExactComplex):
            return complex(value) + 1j * float(im)
        if isinstance(value, str):
            return complex(float(Fraction(value)), float(im))
        if isinstance(value, _RAT_TYPES):
            return complex(float(value), float(im))
        return complex(value) + 1j * float(im)

    zero = 0j
    one = 1 + 0j

    def is_zero(self, v, scale=1.0):
        self.check(v)
        return abs(v) <= self.tol * max(1.0, scale)

    def eq(self, a, b):
        self.check(a)
        self.check(b)
        return abs(a - b) <= self.tol * max(1.0, abs(a), abs(b))

    def check(self, v):
        if isinstance(v, ExactComplex):
            raise MixedBackend("expected a float scalar, got an exact one")
        if not isinstance(v, (int, float, complex)):
            raise MixedBackend(f"expected a float scalar, got {type(v).__name__}")
        return complex(v)

    def abs(self, v):
        return abs(v)

    def sort_key(self, v):
        return (v.real, v.imag)

    def __repr__(self):
        return f"ApproxField(tol={self.tol})"

    def __eq__(self, other):
        return isinstance(other, ApproxField) and other.tol == self.tol

    def __hash__(self):
        return hash(("ApproxField", self.tol))


EXACT = ExactField()


def common_field(a, b):
    """Return the shared field of two carriers, or raise MixedBackend."""
    if a.exact != b.exact:
        raise MixedBackend("cannot mix exact and approximate computations")
    return a


def scalar_arith(a, b, op, field=None):
    """Field arithmetic on two scalars of the same backend.

    ``op`` is one of ``add``, ``sub``, ``mul``, ``div``.  Mostly useful as a
    checked entry point; internal code applies the operators directly.
    """
    exact_a = isinstance(a, ExactComplex)
    exact_b = isinstance(b, ExactComplex)
    if exact_a != exact_b:
        raise MixedBackend("operands live on different backends")
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        if exact_a:
            return a / b
        tol = field.tol if field is not None else 1e-9
        if abs(b) <= tol:
            raise DivisionByZero("approximate division by a value below tolerance")
        return a / b
    raise ValueError(f"unknown operation {op!r}")


def approx_equal(a, b, field=None):
    """Backend-aware equality: literal when exact, relative-tolerance otherwise."""
    exact_a = isinstance(a, ExactComplex)
    exact_b = isinstance(b, ExactComplex)
    if exact_a != exact_b:
        raise MixedBackend("operands live on different backends")
    if exact_a:
        return a == b
    f = field if field is not None else ApproxField()
    return f.eq(complex(a), complex(b))


def _rat_to_str(r):
    return str(r)


def scalar_to_json(v):
    if isinstance(v, ExactComplex):
        return {"re": _rat_to_str(v.re), "im": _rat_to_str(v.im)}
    v = complex(v)
    return {"re": v.real, "im": v.imag}


def scalar_from_json(obj, field):
    if isinstance(obj, dict):
        re, im = obj.get("re", 0), obj.get("im", 0)
    else:
        re, im = obj, 0
    if field.exact:
        return ExactComplex(re, im)
    re = float(Fraction(re)) if isinstance(re, str) else float(re)
    im = float(Fraction(im)) if isinstance(im, str) else float(im)
    return complex(re, im)
