"""Finite-dimensional spaces of quasi-polynomials.

A space is stored through a canonical exponent-graded basis: every basis
element is a single term ``r(x) e^(lam x)`` and the elements of each
lam-block are row-reduced.  All derived data (Wronskian up to scalar,
exponent sequences, singular points, conjugates) is basis independent, so
constructing a space from any spanning set of the same span yields the same
canonical form.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import linalg
from .errors import (
    BispectralError,
    DegenerateBasis,
    InsufficientPrecision,
    MissingSingularPoint,
    NonPolynomialCoefficients,
    NotSpecial,
)
from .field import common_field, scalar_from_json, scalar_to_json
from .quasipoly import (
    Polynomial,
    QuasiPolynomial,
    RationalFunction,
    poly_gcd,
    poly_lcm,
    poly_roots,
    poly_to_json,
)


@dataclass(frozen=True)
class ExponentSequence:
    """Strictly increasing integer orders attainable at a point."""

    point: object
    exponents: tuple

    def is_nonsingular(self):
        return self.exponents == tuple(range(len(self.exponents)))

    def defects(self):
        """Split off the trailing irregular part.

        Returns ``(M, m)`` where the sequence equals
        ``{0, ..., N-M-1} + {N-M+m_1 < ... < N-M+m_M}`` with all ``m_b >= 1``.
        """
        e = self.exponents
        n = len(e)
        k = 0
        while k < n and e[k] == k:
            k += 1
        m = tuple(v - k for v in e[k:])
        return n - k, m


def _block_common_denominator(coeffs, field):
    if field.exact:
        d = Polynomial.one(field)
        for c in coeffs:
            d = poly_lcm(d, c.den)
        return d
    d = Polynomial.one(field)
    for c in coeffs:
        if c.den.degree > 0:
            d = d * c.den
    return d


class FunctionSpace:
    """Span of finitely many quasi-polynomials (same variable, same field)."""

    def __init__(self, basis, field=None, var=None):
        basis = list(basis)
        if not basis:
            raise DegenerateBasis("empty basis")
        if field is None:
            field = basis[0].field
        if var is None:
            var = basis[0].var
        for b in basis:
            common_field(field, b.field)
            if b.var != var:
                raise BispectralError("basis elements use different variables")
            if b.is_zero():
                raise DegenerateBasis("zero element in basis")
        self.field = field
        self.var = var
        self.basis = tuple(basis)
        self._grade()
        self._wronskian = None
        self._singular = None

    # -- canonical graded basis ---------------------------------------
    def _grade(self):
        field = self.field
        lam_keys = []
        lams = []
        comp = {}  # lam index -> list over basis of coefficient
        for b in self.basis:
            for lam, coef in b.terms:
                key = None
                for i, l0 in enumerate(lams):
                    if field.eq(l0, lam):
                        key = i
                        break
                if key is None:
                    lams.append(lam)
                    key = len(lams) - 1
        order = sorted(range(len(lams)), key=lambda i: field.sort_key(lams[i]))
        lams = [lams[i] for i in order]

        blocks = []
        vec_chunks = [[] for _ in self.basis]
        for lam in lams:
            coeffs = []
            for b in self.basis:
                c = RationalFunction.zero(field)
                for l2, coef in b.terms:
                    if field.eq(l2, lam):
                        c = coef
                        break
                coeffs.append(c)
            den = _block_common_denominator(coeffs, field)
            vecs = []
            width = 0
            for c in coeffs:
                if c.is_zero():
                    vecs.append(Polynomial.zero(field))
                    continue
                if field.exact:
                    p = c.num * (den // c.den)
                else:
                    p = c.num if c.den.degree == 0 else c.num * den.divexact(c.den)
                vecs.append(p)
                width = max(width, p.degree + 1)
            rows = [[p.coeff(k) for k in range(width)] for p in vecs]
            red, pivots = linalg.rref(rows, field)
            block_polys = [
                Polynomial(red[r], field) for r in range(len(pivots))
            ]
            if field.exact and block_polys:
                g = den
                for p in block_polys:
                    g = poly_gcd(g, p)
                    if g.degree == 0:
                        break
                if g.degree > 0:
                    den = den // g
                    block_polys = [p // g for p in block_polys]
            blocks.append((lam, den, block_polys))
            # collect coordinates of the input basis for the rank check
            for bi, p in enumerate(vecs):
                vec_chunks[bi].extend(p.coeff(k) for k in range(width))

        graded_dim = sum(len(ps) for _, _, ps in blocks)
        input_rank = linalg.rank(vec_chunks, field)
        if input_rank < len(self.basis):
            raise DegenerateBasis(
                f"basis has rank {input_rank} < {len(self.basis)}"
            )
        if graded_dim != len(self.basis):
            raise BispectralError(
                "span is not graded by exponents; it is not a quasi-polynomial space"
            )
        self.blocks = tuple(
            (lam, den, tuple(ps)) for lam, den, ps in blocks if ps
        )

    @classmethod
    def from_pairs(cls, pairs, field, var="x"):
        """Build from ``(lam, coefficient)`` pairs (polynomial or rational)."""
        basis = []
        for lam, coef in pairs:
            if isinstance(coef, Polynomial):
                coef = RationalFunction(coef)
            elif not isinstance(coef, RationalFunction):
                coef = RationalFunction(Polynomial([field.scalar(coef)], field))
            basis.append(
                QuasiPolynomial([(field.scalar(lam), coef)], field, var)
            )
        return cls(basis, field, var)

    @property
    def dim(self):
        return len(self.basis)

    def flattened(self):
        """Canonical list of single-term elements ``(lam, RationalFunction)``."""
        out = []
        for lam, den, ps in self.blocks:
            for p in ps:
                out.append((lam, RationalFunction(p, den)))
        return out

    def canonical_basis(self):
        return [
            QuasiPolynomial([(lam, rf)], self.field, self.var)
            for lam, rf in self.flattened()
        ]

    def exponent_multiplicities(self):
        """Distinct exponents with their block dimensions."""
        return [(lam, len(ps)) for lam, den, ps in self.blocks]

    def has_polynomial_coeffs(self):
        return all(den.degree == 0 for _, den, _ in self.blocks)

    def block_degree_sets(self):
        """Per exponent: the attainable coefficient degrees of the block.

        These are the pivot degrees of a degree-echelon basis; within a block
        they are pairwise distinct.  Requires polynomial coefficients.
        """
        if not self.has_polynomial_coeffs():
            raise NonPolynomialCoefficients(
                "degree sets need polynomial coefficients"
            )
        out = []
        for lam, _den, ps in self.blocks:
            width = max(p.degree for p in ps) + 1
            rows = [
                [p.coeff(width - 1 - k) for k in range(width)] for p in ps
            ]
            pivots = linalg.rref(rows, self.field)[1]
            out.append((lam, sorted(width - 1 - c for c in pivots)))
        return out

    def span_equals(self, other):
        if not isinstance(other, FunctionSpace):
            return NotImplemented
        if self.var != other.var or self.dim != other.dim:
            return False
        common_field(self.field, other.field)
        if len(self.blocks) != len(other.blocks):
            return False
        for (la, da, pa), (lb, db, pb) in zip(self.blocks, other.blocks):
            if not self.field.eq(la, lb):
                return False
            if len(pa) != len(pb):
                return False
            if self.field.exact:
                if da != db or any(x != y for x, y in zip(pa, pb)):
                    return False
            else:
                # compare spans of the two blocks with a joint reduction
                width = max(
                    [p.degree + 1 for p in pa] + [p.degree + 1 for p in pb]
                )
                rows_a = [[p.coeff(k) for k in range(width)] for p in pa]
                rows_b = [[p.coeff(k) for k in range(width)] for p in pb]
                if linalg.rank(rows_a + rows_b, self.field) != len(pa):
                    return False
        return True

    def to_approx(self, tol=1e-9):
        from .field import ApproxField

        af = ApproxField(tol)
        basis = []
        for lam, rf in self.flattened():
            num = Polynomial([complex(c) for c in rf.num.coeffs], af)
            den = Polynomial([complex(c) for c in rf.den.coeffs], af)
            basis.append(
                QuasiPolynomial(
                    [(complex(lam), RationalFunction(num, den))], af, self.var
                )
            )
        return FunctionSpace(basis, af, self.var)

    def multiply(self, factor):
        """Span of ``factor * f`` over the basis (factor a nonzero polynomial
        or rational function)."""
        if isinstance(factor, Polynomial):
            factor = RationalFunction(factor)
        if factor.is_zero():
            raise DegenerateBasis("multiplying a space by zero")
        return FunctionSpace(
            [b * factor for b in self.basis], self.field, self.var
        )

    # -- Wronskian and exponents ---------------------------------------
    def wronskian(self):
        """Wronskian of the canonical basis: a single-term quasi-polynomial."""
        if self._wronskian is not None:
            return self._wronskian
        flat = self.flattened()
        n = len(flat)
        rows = []
        lam_total = self.field.zero
        for lam, rf in flat:
            lam_total = lam_total + lam
            row = [rf]
            cur = rf
            for _ in range(n - 1):
                cur = cur.derivative() + cur * lam
                row.append(cur)
            rows.append(row)
        det = _rf_det(rows, self.field)
        if det.is_zero():
            raise DegenerateBasis("Wronskian vanishes identically")
        self._wronskian = QuasiPolynomial(
            [(lam_total, det)], self.field, self.var
        )
        return self._wronskian

    def wronskian_poly(self):
        """Polynomial part of the Wronskian (requires polynomial result)."""
        _, rf = self.wronskian().single_term()
        try:
            return rf.as_polynomial()
        except BispectralError as exc:
            raise NonPolynomialCoefficients(
                "Wronskian has a nonconstant denominator"
            ) from exc

    def _default_window(self, z0):
        pole = 0
        for _, rf in self.flattened():
            pole += rf.den.root_multiplicity(z0)
        try:
            _, wrf = self.wronskian().single_term()
            wdeg = max(wrf.num.degree, 0)
        except BispectralError:
            wdeg = 0
        return self.dim + pole + wdeg + 2

    def exponents_at(self, z0, window=None):
        """Exponent sequence at a finite point.

        Expands each canonical basis element, drops the per-element unit
        ``e^(lam z0)`` (a row scaling, which cannot change pivot columns) and
        reads the attainable orders off the pivot columns of the coefficient
        matrix.
        """
        field = self.field
        z0 = field.scalar(z0)
        flat = self.flattened()
        n = len(flat)
        window = window if window is not None else self._default_window(z0)
        for _ in range(5):
            los = []
            rows_data = []
            for lam, rf in flat:
                qp = QuasiPolynomial([(lam, rf)], field, self.var)
                exp = qp.expand_at(z0, window)
                if len(exp.parts) > 1:
                    raise BispectralError("single-term expansion expected")
                if not exp.parts:
                    raise DegenerateBasis("basis element expands to zero")
                part = exp.parts[0]
                los.append(part.lo)
                rows_data.append(part)
            lo = min(los)
            hi = min(p.hi for p in rows_data)
            rows = [
                [p.coeff(k) for k in range(lo, hi + 1)] for p in rows_data
            ]
            pivots = linalg.rref(rows, field)[1]
            if len(pivots) == n:
                return ExponentSequence(z0, tuple(lo + c for c in pivots))
            window *= 2
        raise InsufficientPrecision(
            f"could not certify {n} exponents at {z0!r}"
        )

    def singular_points(self):
        """All singular points with their exponent sequences.

        Requires polynomial coefficients; points are roots of the polynomial
        part of the Wronskian.  Roots that do not certify as exact scalars
        are handled on a floated copy of the space and returned approximate.
        """
        if self._singular is not None:
            return self._singular
        if not self.has_polynomial_coeffs():
            raise NonPolynomialCoefficients(
                "singular points need polynomial basis coefficients"
            )
        w = self.wronskian_poly()
        out = []
        approx_self = None
        if w.degree > 0:
            for root in poly_roots(w):
                if root.exact or not self.field.exact:
                    seq = self.exponents_at(root.value)
                else:
                    if approx_self is None:
                        approx_self = self.to_approx()
                    seq = approx_self.exponents_at(root.value)
                if not seq.is_nonsingular():
                    out.append((root.value, seq))
        self._singular = out
        return out

    def singular_data(self):
        """Per singular point: ``(z, ExponentSequence, M, m-tuple)``."""
        out = []
        for z, seq in self.singular_points():
            M, m = seq.defects()
            out.append((z, seq, M, m))
        return out

    # -- conjugates ------------------------------------------------------
    def conjugate(self):
        """Space spanned by the (N-1)-fold sub-Wronskians over the Wronskian."""
        flat = self.flattened()
        n = len(flat)
        lam_all = self.field.zero
        for lam, _ in flat:
            lam_all = lam_all + lam
        _, wr = self.wronskian().single_term()
        basis = []
        for i in range(n):
            rest = [flat[j] for j in range(n) if j != i]
            sub = _sub_wronskian(rest, self.field)
            coef = sub / wr
            basis.append(
                QuasiPolynomial([(-flat[i][0], coef)], self.field, self.var)
            )
        return FunctionSpace(basis, self.field, self.var)

    def regularization_multiplier(self):
        """The minimal polynomial that clears the monic operator поles:
        product of ``(x - z_a)^M_a`` over the singular points."""
        field = self.field
        mult = Polynomial.one(field)
        for z, _seq, M, _m in self.singular_data():
            lin = Polynomial([-field.scalar(z), field.one], field)
            mult = mult * lin**M
        return mult

    def regularized_conjugate(self):
        """Conjugate space divided by the regularization multiplier."""
        conj = self.conjugate()
        mult = self.regularization_multiplier()
        if mult.degree == 0:
            return conj
        inv = RationalFunction(Polynomial.one(self.field), mult)
        return conj.multiply(inv)

    # -- serialization ----------------------------------------------------
    def to_json(self):
        return {
            "variable": self.var,
            "lambda": [scalar_to_json(lam) for lam, _ in self.exponent_multiplicities()],
            "basis": [b.to_json() for b in self.canonical_basis()],
        }

    @classmethod
    def from_json(cls, obj, field):
        var = obj.get("variable", "x")
        basis = [QuasiPolynomial.from_json(b, field, var) for b in obj["basis"]]
        return cls(basis, field, var)

    def __repr__(self):
        return (
            f"FunctionSpace(dim={self.dim}, var={self.var!r}, "
            f"exponents={[lam for lam, _ in self.exponent_multiplicities()]!r})"
        )


def _rf_det(rows, field):
    """Determinant of a square RationalFunction matrix (Gaussian elimination)."""
    n = len(rows)
    m = [list(r) for r in rows]
    det = RationalFunction.one(field)
    sign = 1
    for c in range(n):
        pivot = None
        for r in range(c, n):
            if not m[r][c].is_zero():
                pivot = r
                break
        if pivot is None:
            return RationalFunction.zero(field)
        if pivot != c:
            m[c], m[pivot] = m[pivot], m[c]
            sign = -sign
        det = det * m[c][c]
        inv = m[c][c]
        for r in range(c + 1, n):
            if m[r][c].is_zero():
                continue
            f = m[r][c] / inv
            m[r] = [a - f * b for a, b in zip(m[r], m[c])]
    if sign < 0:
        det = -det
    return det


def _sub_wronskian(flat, field):
    """Wronskian of single-term elements, exponential factor dropped."""
    n = len(flat)
    if n == 0:
        return RationalFunction.one(field)
    rows = []
    for lam, rf in flat:
        row = [rf]
        cur = rf
        for _ in range(n - 1):
            cur = cur.derivative() + cur * lam
            row.append(cur)
        rows.append(row)
    return _rf_det(rows, field)


# ---------------------------------------------------------------------------
# module-level operation names


def wronskian(space):
    return space.wronskian()


def exponents_at(space, z0, window=None):
    return space.exponents_at(z0, window)


def singular_points(space):
    return space.singular_points()


def conjugate(space):
    return space.conjugate()


def regularized_conjugate(space):
    return space.regularized_conjugate()


# ---------------------------------------------------------------------------
# special spaces


@dataclass(frozen=True)
class SpecialSpace:
    """A pair (space, marked points) whose exponents at each marked point are
    ``{0, ..., N-2, N-1+m_a}``, together with the extracted data."""

    space: FunctionSpace
    z: tuple
    lam: tuple
    n: tuple
    m: tuple
    ps: tuple  # monic polynomials, ps[i] paired with lam[i]

    @property
    def field(self):
        return self.space.field

    @property
    def N(self):
        return len(self.lam)

    @property
    def M(self):
        return len(self.z)

    def basis_pairs(self):
        return list(zip(self.lam, self.ps))

    def to_json(self):
        data = self.space.to_json()
        data["z"] = [scalar_to_json(z) for z in self.z]
        data["lambda"] = [scalar_to_json(l) for l in self.lam]
        data["n"] = list(self.n)
        data["m"] = list(self.m)
        return data

    @classmethod
    def from_json(cls, obj, field):
        space = FunctionSpace.from_json(obj, field)
        z = [scalar_from_json(v, field) for v in obj["z"]]
        lam = (
            [scalar_from_json(v, field) for v in obj["lambda"]]
            if "lambda" in obj
            else None
        )
        return classify_special(space, z, lam_order=lam)


def classify_special(space, z, lam_order=None):
    """Verify the special exponent pattern and extract ``(lam, z, n, m)``.

    ``z`` must be distinct and contain every singular point of the space;
    non-singular entries are allowed and get ``m_a = 0``.  ``lam_order``
    fixes the ordering of the exponential directions (default: sorted).
    """
    field = space.field
    z = [field.scalar(v) for v in z]
    for i in range(len(z)):
        for j in range(i + 1, len(z)):
            if field.eq(z[i], z[j]):
                raise NotSpecial("marked points are not distinct")
    blocks = space.exponent_multiplicities()
    if any(mult != 1 for _, mult in blocks):
        raise NotSpecial("an exponential direction has multiplicity > 1")
    flat = space.flattened()
    if any(not rf.is_polynomial() for _, rf in flat):
        raise NotSpecial("basis coefficients are not polynomials")

    # singular points must be covered by z: peel Wronskian roots off exactly
    w = space.wronskian_poly()
    rem = w
    mults = []
    for za in z:
        lin = Polynomial([-za, field.one], field)
        k = rem.root_multiplicity(za)
        for _ in range(k):
            rem = rem // lin
        mults.append(k)
    if rem.degree > 0:
        raise MissingSingularPoint(
            f"Wronskian keeps roots outside the marked points: {rem!r}"
        )

    n_dim = space.dim
    m_list = []
    for za, wr_mult in zip(z, mults):
        seq = space.exponents_at(za)
        e = seq.exponents
        if e[: n_dim - 1] != tuple(range(n_dim - 1)):
            raise NotSpecial(
                f"exponents {e} at {za!r} do not start with 0..N-2"
            )
        ma = e[-1] - (n_dim - 1)
        if ma < 0:
            raise NotSpecial(f"negative defect at {za!r}")
        if ma != wr_mult:
            raise NotSpecial(
                f"Wronskian multiplicity {wr_mult} != exponent defect {ma} at {za!r}"
            )
        m_list.append(ma)

    lams = [lam for lam, _ in flat]
    ps = [rf.as_polynomial().monic() for _, rf in flat]
    if lam_order is not None:
        if len(lam_order) != len(lams):
            raise NotSpecial("lam_order has the wrong length")
        reordered = []
        for lv in lam_order:
            lv = field.scalar(lv)
            idx = next(
                (i for i, l2 in enumerate(lams) if field.eq(l2, lv)), None
            )
            if idx is None:
                raise NotSpecial(f"{lv!r} is not an exponent of the space")
            reordered.append(idx)
        if sorted(reordered) != list(range(len(lams))):
            raise NotSpecial("lam_order repeats an exponent")
        lams = [lams[i] for i in reordered]
        ps = [ps[i] for i in reordered]
    ns = [p.degree for p in ps]
    if sum(ns) != sum(m_list):
        raise NotSpecial(
            f"degree sum {sum(ns)} differs from defect sum {sum(m_list)}"
        )
    return SpecialSpace(
        space=space,
        z=tuple(z),
        lam=tuple(lams),
        n=tuple(ns),
        m=tuple(m_list),
        ps=tuple(ps),
    )
