"""Linear differential operators with polynomial or rational coefficients.

Polynomial-coefficient operators are stored as a table ``{(i, j): scalar}``
for the monomials ``x^i d^j`` in x-left normal order; ``d x = x d + 1`` is
applied recursively when composing or transposing.  Monic operators (unit
leading coefficient, rational lower coefficients) are kept separately as a
coefficient list.
"""

from __future__ import annotations

from math import comb

from . import linalg
from .errors import (
    BispectralError,
    DegenerateBasis,
    NonAdmissibleTuple,
    NotInPhiForm,
    NotRegularizable,
)
from .field import common_field, scalar_from_json, scalar_to_json
from .quasipoly import (
    Polynomial,
    QuasiPolynomial,
    RationalFunction,
    tuple_admissible,
)
from .spaces import FunctionSpace


def _falling(k, s):
    out = 1
    for t in range(s):
        out *= k - t
    return out


class DiffOperator:
    """Polynomial-coefficient operator ``sum A_ij x^i d^j``."""

    __slots__ = ("table", "var", "field")

    def __init__(self, table, field, var="x"):
        clean = {}
        for (i, j), c in table.items():
            c = field.scalar(c)
            if field.exact:
                if not c:
                    continue
            clean[(int(i), int(j))] = c
        if not field.exact and clean:
            scale = max(field.abs(c) for c in clean.values())
            clean = {
                k: c
                for k, c in clean.items()
                if field.abs(c) > field.tol * max(1.0, scale)
            }
        self.table = dict(sorted(clean.items()))
        self.field = field
        self.var = var

    @classmethod
    def zero(cls, field, var="x"):
        return cls({}, field, var)

    @classmethod
    def from_x_coeffs(cls, coeffs, field, var="x"):
        """Build from the list ``A_j(x)`` of polynomials, ``j`` the d-order."""
        table = {}
        for j, p in enumerate(coeffs):
            for i, c in enumerate(p.coeffs):
                table[(i, j)] = c
        return cls(table, field, var)

    def x_coeff(self, j):
        """Polynomial coefficient of ``d^j``."""
        entries = {i: c for (i2, j2), c in self.table.items() if j2 == j for i in [i2]}
        if not entries:
            return Polynomial.zero(self.field)
        width = max(entries) + 1
        return Polynomial(
            [entries.get(i, self.field.zero) for i in range(width)], self.field
        )

    def x_coeff_list(self):
        return [self.x_coeff(j) for j in range(self.order + 1)]

    def b_poly(self, k):
        """Constant-coefficient polynomial ``B_k(d)``: the d-polynomial that
        multiplies ``x^(x_degree - k)`` in the normal form."""
        i = self.x_degree - k
        entries = {j: c for (i2, j), c in self.table.items() if i2 == i}
        if not entries:
            return Polynomial.zero(self.field)
        width = max(entries) + 1
        return Polynomial(
            [entries.get(j, self.field.zero) for j in range(width)], self.field
        )

    @property
    def order(self):
        return max((j for (_i, j) in self.table), default=0)

    @property
    def x_degree(self):
        return max((i for (i, _j) in self.table), default=0)

    def is_zero(self):
        return not self.table

    # -- linear structure ------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, DiffOperator):
            return NotImplemented
        common_field(self.field, other.field)
        table = dict(self.table)
        for k, c in other.table.items():
            table[k] = table.get(k, self.field.zero) + c
        return DiffOperator(table, self.field, self.var)

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return DiffOperator(
            {k: -c for k, c in self.table.items()}, self.field, self.var
        )

    def __mul__(self, c):
        c = self.field.scalar(c)
        return DiffOperator(
            {k: v * c for k, v in self.table.items()}, self.field, self.var
        )

    __rmul__ = __mul__

    # -- composition and transposes ---------------------------------------
    def compose(self, other):
        """Operator composition: ``self`` applied after ``other``."""
        common_field(self.field, other.field)
        table = {}
        for (i, j), a in self.table.items():
            for (k, l), b in other.table.items():
                coef = a * b
                for s in range(min(j, k) + 1):
                    c = coef * (comb(j, s) * _falling(k, s))
                    key = (i + k - s, j + l - s)
                    table[key] = table.get(key, self.field.zero) + c
        return DiffOperator(table, self.field, self.var)

    def bispectral_swap(self):
        """Transpose the table: ``sum A_ij x^i d^j -> sum A_ij u^j d_u^i``."""
        new_var = "u" if self.var == "x" else "x"
        return DiffOperator(
            {(j, i): c for (i, j), c in self.table.items()}, self.field, new_var
        )

    def formal_conjugate(self):
        """``sum_j (-d)^j A_j(x)`` renormalized to the table."""
        table = {}
        for (i, j), c in self.table.items():
            sign = -self.field.one if j % 2 else self.field.one
            coef = c * sign
            for s in range(min(j, i) + 1):
                v = coef * (comb(j, s) * _falling(i, s))
                key = (i - s, j - s)
                table[key] = table.get(key, self.field.zero) + v
        return DiffOperator(table, self.field, self.var)

    # -- action -------------------------------------------------------------
    def apply(self, f):
        if not isinstance(f, QuasiPolynomial):
            f = QuasiPolynomial.from_polynomial(f, self.var)
        if f.var != self.var:
            raise BispectralError("operator and argument variables differ")
        out = QuasiPolynomial.zero(self.field, self.var)
        derivs = {}
        for (i, j), c in self.table.items():
            if j not in derivs:
                derivs[j] = f.derivative(j)
            xi = Polynomial.monomial(self.field, i, c)
            out = out + derivs[j] * xi
        return out

    # -- comparison -----------------------------------------------------------
    def _norm_key(self):
        keys = [k for k, c in self.table.items()]
        if not keys:
            return None
        return max(keys, key=lambda k: (k[0] + k[1], k[0]))

    def normalized(self):
        """Scale so the highest ``(i+j, i)`` entry equals one."""
        k = self._norm_key()
        if k is None:
            return self
        inv = self.field.one / self.table[k]
        return self * inv

    def proportional_to(self, other, rel_tol=1e-9):
        if self.is_zero() or other.is_zero():
            return self.is_zero() and other.is_zero()
        a, b = self.normalized(), other.normalized()
        keys = set(a.table) | set(b.table)
        if self.field.exact:
            return all(
                a.table.get(k, self.field.zero) == b.table.get(k, self.field.zero)
                for k in keys
            )
        scale = max(self.field.abs(c) for c in a.table.values())
        return all(
            self.field.abs(
                a.table.get(k, 0j) - b.table.get(k, 0j)
            )
            <= rel_tol * max(1.0, scale)
            for k in keys
        )

    def to_json(self):
        return {
            "variable": self.var,
            "table": [
                {"i": i, "j": j, "coeff": scalar_to_json(c)}
                for (i, j), c in self.table.items()
            ],
        }

    @classmethod
    def from_json(cls, obj, field):
        return cls(
            {
                (e["i"], e["j"]): scalar_from_json(e["coeff"], field)
                for e in obj["table"]
            },
            field,
            obj.get("variable", "x"),
        )

    def __repr__(self):
        bits = [f"({c!r})x^{i}d^{j}" for (i, j), c in self.table.items()]
        return "DiffOp(" + " + ".join(bits or ["0"]) + ")"


class MonicOperator:
    """Monic operator ``d^N + Abar_1 d^(N-1) + ... + Abar_N`` with
    rational-function coefficients.  ``coeffs[i]`` stores ``Abar_i``."""

    __slots__ = ("order", "coeffs", "var", "field")

    def __init__(self, coeffs, field, var="x"):
        self.coeffs = tuple(
            c if isinstance(c, RationalFunction) else RationalFunction(c)
            for c in coeffs
        )
        self.order = len(self.coeffs)
        self.field = field
        self.var = var

    def abar(self, i):
        """Coefficient of ``d^(N-i)``; ``abar(0)`` is one."""
        if i == 0:
            return RationalFunction.one(self.field)
        return self.coeffs[i - 1]

    def apply(self, f):
        if not isinstance(f, QuasiPolynomial):
            f = QuasiPolynomial.from_polynomial(f, self.var)
        out = f.derivative(self.order)
        for i in range(1, self.order + 1):
            out = out + f.derivative(self.order - i) * self.abar(i)
        return out

    def annihilates(self, f, rel_tol=1e-9):
        img = self.apply(f)
        if self.field.exact:
            return img.is_zero()
        if img.is_zero():
            return True
        scale = 0.0
        for _lam, c in f.terms:
            scale = max(
                scale, max((abs(v) for v in c.num.coeffs), default=0.0)
            )
        for _lam, c in img.terms:
            top = max((abs(v) for v in c.num.coeffs), default=0.0)
            bot = max((abs(v) for v in c.den.coeffs), default=1.0)
            if top / bot > rel_tol * max(1.0, scale):
                return False
        return True

    def __repr__(self):
        return f"MonicOp(order={self.order})"


# ---------------------------------------------------------------------------
# construction from spaces


def _derivative_rows(flat, field, ncols):
    rows = []
    for lam, rf in flat:
        row = [rf]
        cur = rf
        for _ in range(ncols - 1):
            cur = cur.derivative() + cur * lam
            row.append(cur)
        rows.append(row)
    return rows


def monic_fundamental(space):
    """The unique monic operator of order N annihilating the space.

    Coefficients come from the ratio of two minors of the extended
    derivative matrix; annihilation of every basis element is verified.
    """
    from .spaces import _rf_det

    field = space.field
    flat = space.flattened()
    n = len(flat)
    rows = _derivative_rows(flat, field, n + 1)
    wr = _rf_det([r[:n] for r in rows], field)
    if wr.is_zero():
        raise DegenerateBasis("Wronskian vanishes; basis is dependent")
    coeffs = []
    sign = -field.one
    for i in range(1, n + 1):
        cols = [c for c in range(n + 1) if c != n - i]
        minor = _rf_det([[r[c] for c in cols] for r in rows], field)
        coeffs.append((minor / wr) * sign)
        sign = -sign
    op = MonicOperator(coeffs, field, space.var)
    for b in space.canonical_basis():
        if not op.annihilates(b):
            raise BispectralError("fundamental operator failed to annihilate")
    return op


def regularize(op, space):
    """Clear the poles of a monic fundamental operator.

    Multiplies by the minimal polynomial ``A_0``; checks that ``A_0`` agrees
    with the product over singular points read from exponent sequences, and
    that the pole order of each coefficient obeys the expected bounds.
    """
    from .quasipoly import poly_lcm

    field = op.field
    if field.exact:
        a0 = Polynomial.one(field)
        for c in op.coeffs:
            a0 = poly_lcm(a0, c.den)
        mult = space.regularization_multiplier()
        if a0.monic() != mult.monic():
            raise NotRegularizable(
                "denominator product disagrees with the exponent data"
            )
        for z, _seq, m_bar, _m in space.singular_data():
            for i in range(1, op.order + 1):
                pole = op.abar(i).den.root_multiplicity(z)
                if pole > min(i, m_bar):
                    raise NotRegularizable(
                        f"coefficient {i} has pole order {pole} at {z!r}"
                    )
    else:
        a0 = space.regularization_multiplier()
    coeffs = [a0]
    for i in range(1, op.order + 1):
        c = op.abar(i) * a0
        num, den = c.num, c.den
        coeffs.append(num.divexact(den) if den.degree > 0 else c.as_polynomial())
    coeffs = list(reversed(coeffs))  # index by d-order
    return DiffOperator.from_x_coeffs(coeffs, field, op.var)


def special_fundamental(special):
    """Multiply the monic operator by ``prod_a (x - z_a)`` over the marked
    points; all coefficients must come out polynomial."""
    field = special.field
    op = monic_fundamental(special.space)
    mult = Polynomial.one(field)
    for za in special.z:
        mult = mult * Polynomial([-za, field.one], field)
    coeffs = []
    for i in range(op.order, -1, -1):
        c = op.abar(i) * mult
        try:
            coeffs.append(
                c.num.divexact(c.den) if c.den.degree > 0 else c.as_polynomial()
            )
        except BispectralError as exc:
            raise NotRegularizable(
                f"coefficient {i} keeps a pole after clearing: {exc}"
            ) from exc
    return DiffOperator.from_x_coeffs(coeffs, field, special.space.var)


def factorized_from_tuple(ys, lam, z, m, field=None, check=True):
    """Ordered product of first-order factors attached to a polynomial tuple.

    With ``ytilde_0 = prod_a (x-z_a)^(m_a)``, ``ytilde_N = 1`` the i-th factor
    is ``d - lam_i - ytilde_(i-1)'/ytilde_(i-1) + ytilde_i'/ytilde_i`` and the
    product is taken with the i = 1 factor leftmost.  The result annihilates
    ``ys[-1] e^(lam_N x)`` by construction.
    """
    if field is None:
        field = ys[0].field if ys else None
        if field is None:
            raise BispectralError("field required for an empty tuple")
    lam = [field.scalar(v) for v in lam]
    z = [field.scalar(v) for v in z]
    n_dim = len(lam)
    if len(ys) != n_dim - 1:
        raise NonAdmissibleTuple(
            f"need {n_dim - 1} polynomials for {n_dim} exponents"
        )
    if check:
        ok, reason = tuple_admissible(ys, z, field)
        if not ok:
            raise NonAdmissibleTuple(reason)
    y0 = Polynomial.one(field)
    for za, ma in zip(z, m):
        y0 = y0 * Polynomial([-za, field.one], field) ** ma
    chain = [RationalFunction(y0)] + [RationalFunction(y) for y in ys]
    chain.append(RationalFunction.one(field))

    def log_deriv(rf):
        return rf.derivative() / rf

    # coefficients of d^j, built right to left
    coeffs = [RationalFunction.one(field)]  # the identity operator
    for i in range(n_dim, 0, -1):
        a = (
            RationalFunction(Polynomial.constant(lam[i - 1], field))
            + log_deriv(chain[i - 1])
            - log_deriv(chain[i])
        )
        new = [RationalFunction.zero(field)] * (len(coeffs) + 1)
        for j, g in enumerate(coeffs):
            new[j + 1] = new[j + 1] + g
            new[j] = new[j] + g.derivative() - a * g
        coeffs = new
    # coeffs[j] multiplies d^j and coeffs[-1] == 1
    abar = [coeffs[n_dim - i] for i in range(1, n_dim + 1)]
    return MonicOperator(abar, field, "x")


# ---------------------------------------------------------------------------
# the N = M = 2 block decomposition


def extract_phi(op, lam, z):
    """Coefficients of the decomposition of a 2x2-type special operator into
    ``(x-z_1)(x-z_2)(d-lam_1)(d-lam_2) + sum phi_rs (x-z_r)(d-lam_s)``.

    Returns the 2x2 matrix ``phi``.  Raises NotInPhiForm when the operator
    does not lie in the affine span (residual above tolerance).
    """
    field = op.field
    lam = [field.scalar(v) for v in lam]
    z = [field.scalar(v) for v in z]
    top = op.table.get((2, 2))
    if top is None or field.is_zero(
        top, scale=max((field.abs(c) for c in op.table.values()), default=1.0)
    ):
        raise NotInPhiForm("operator lacks the x^2 d^2 leading term")
    opn = op * (field.one / top)

    def pair_table(zr, ls):
        return {
            (1, 1): field.one,
            (1, 0): -ls,
            (0, 1): -zr,
            (0, 0): zr * ls,
        }

    lead_x = Polynomial(
        [z[0] * z[1], -(z[0] + z[1]), field.one], field
    )
    lead_d = [lam[0] * lam[1], -(lam[0] + lam[1]), field.one]
    lead = {}
    for i, a in enumerate(lead_x.coeffs):
        for j, b in enumerate(lead_d):
            lead[(i, j)] = lead.get((i, j), field.zero) + a * b
    rest = opn - DiffOperator(lead, field, op.var)
    basis = [
        pair_table(z[0], lam[0]),
        pair_table(z[0], lam[1]),
        pair_table(z[1], lam[0]),
        pair_table(z[1], lam[1]),
    ]
    keys = sorted(set(rest.table) | {(i, j) for b in basis for (i, j) in b})
    rows = [[b.get(k, field.zero) for b in basis] for k in keys]
    rhs = [rest.table.get(k, field.zero) for k in keys]
    sol = linalg.solve(rows, rhs, field)
    if sol is None:
        raise NotInPhiForm("operator is outside the phi-span")
    # residual check
    scale = max((field.abs(v) for v in rhs), default=1.0)
    for row, b in zip(rows, rhs):
        acc = sum((rv * sv for rv, sv in zip(row, sol)), field.zero)
        if field.exact:
            if acc != b:
                raise NotInPhiForm("exact phi-solve left a residual")
        elif field.abs(acc - b) > 1e-8 * max(1.0, scale):
            raise NotInPhiForm("phi residual above tolerance")
    return [[sol[0], sol[1]], [sol[2], sol[3]]]
