"""Residue duality transforms between quasi-polynomial spaces.

The dual space is spanned by the residues of ``e^(u x) f(x)`` at the marked
points, taken over ``f`` in the regularized conjugate (general transform) or
over the conjugate with an extra simple-pole kernel (special transform).
Each residue is ``q(u) e^(z_a u)`` where q collects the principal part of f,
so the construction stays inside exact arithmetic.

Residues carry a transcendental prefactor ``e^(lam z_a)`` per source term.
On the exact backend that prefactor is dropped; the dual space is a span, so
per-element scalars do not change it.  The approximate backend folds the
true prefactor in.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field as dc_field

from .errors import BispectralError, EssentialSingularity
from .field import common_field
from .quasipoly import Polynomial, QuasiPolynomial, RationalFunction
from .spaces import FunctionSpace, SpecialSpace, classify_special


def _dual_var(var):
    return "u" if var == "x" else "x"


def _principal_to_poly(principal, lam, z0, field, keep_unit):
    """Polynomial q with residue(e^(ux) r(x)) = q(u) e^(z0 u) [unit dropped].

    ``principal[k]`` is the coefficient of ``(x-z0)^(-1-k)``; the residue of
    ``e^((u+lam)x) r`` is ``e^((u+lam) z0) sum_k principal[k] (u+lam)^k / k!``.
    """
    fact = field.one
    coeffs = []
    for k, c in enumerate(principal):
        if k:
            fact = fact * field.scalar(k)
        coeffs.append(c / fact)
    p = Polynomial(coeffs, field)
    q = p.shift(lam)
    if keep_unit and not field.exact:
        q = q * cmath.exp(complex(lam) * complex(z0))
    return q


def _residue_series(rf, z0, field):
    """Principal-part coefficients of rf at z0, order -1 first."""
    s = rf.den.root_multiplicity(z0)
    if s == 0:
        return []
    lo, coeffs = rf.series_at(z0, -1)
    out = []
    for k in range(s):
        idx = (-1 - k) - lo
        out.append(coeffs[idx] if 0 <= idx < len(coeffs) else field.zero)
    return out


def contour_transform(f, z0, keep_unit=True):
    """Residue at z0 of ``e^(u x) f(x)`` as a quasi-polynomial in u.

    The 2*pi*i normalization is dropped.  On the exact backend the
    transcendental unit ``e^(lam z0)`` of each source term is dropped as
    well (it rescales individual spanning elements only); a multi-term f
    therefore transforms term by term up to those units.
    """
    field = f.field
    z0 = field.scalar(z0)
    out = Polynomial.zero(field)
    for lam, coef in f.terms:
        if not coef.den.degree >= 0:
            raise EssentialSingularity("invalid coefficient")
        principal = _residue_series(coef, z0, field)
        if not principal:
            continue
        out = out + _principal_to_poly(principal, lam, z0, field, keep_unit)
    dualv = _dual_var(f.var)
    if out.is_zero():
        return QuasiPolynomial.zero(field, dualv)
    return QuasiPolynomial([(z0, RationalFunction(out))], field, dualv)


@dataclass
class TransformResult:
    """Dual space plus the per-contour residue components."""

    dual_space: FunctionSpace
    components: list  # [(z_a, [Polynomial, ...])] sorted by point
    source_dim: int
    special: object = None  # SpecialSpace of the dual for special transforms
    checks: dict = dc_field(default_factory=dict)


def _build_dual(blocks, field, var):
    from . import linalg

    basis = []
    for z_a, polys in blocks:
        # the residues span the block; keep an independent subset
        width = max(p.degree for p in polys) + 1
        rows = [[p.coeff(k) for k in range(width)] for p in polys]
        red, pivots = linalg.rref(rows, field)
        for r in range(len(pivots)):
            q = Polynomial(red[r], field)
            basis.append(
                QuasiPolynomial([(z_a, RationalFunction(q))], field, var)
            )
    if not basis:
        raise BispectralError("transform produced the zero space")
    return FunctionSpace(basis, field, var)


def bispectral_dual(space):
    """Dual of a quasi-polynomial space via residues of the regularized
    conjugate at the singular points.  Exact singular points required."""
    field = space.field
    dagger = space.regularized_conjugate()
    sing = space.singular_data()
    total_m = sum(M for _z, _s, M, _m in sing)
    dualv = _dual_var(space.var)
    blocks = []
    for z_a, _seq, _M, _m in sorted(
        sing, key=lambda t: field.sort_key(field.scalar(t[0]))
    ):
        z_a = field.scalar(z_a)
        polys = []
        for lam, coef in dagger.flattened():
            principal = _residue_series(coef, z_a, field)
            if not principal:
                continue
            q = _principal_to_poly(principal, lam, z_a, field, keep_unit=True)
            if not q.is_zero():
                polys.append(q)
        if polys:
            blocks.append((z_a, polys))
    dual = _build_dual(blocks, field, dualv)
    if dual.dim != total_m:
        raise BispectralError(
            f"dual dimension {dual.dim} differs from defect total {total_m}"
        )
    return TransformResult(
        dual_space=dual, components=_canonical_components(dual),
        source_dim=space.dim,
    )


def _canonical_components(dual):
    field = dual.field
    return [
        (
            lam,
            sorted(
                (
                    rf.as_polynomial().monic()
                    for l2, rf in dual.flattened()
                    if field.eq(l2, lam)
                ),
                key=lambda p: p.degree,
            ),
        )
        for lam, _k in dual.exponent_multiplicities()
    ]


def special_bispectral_dual(special):
    """Special transform: residues of ``f * prod_b (x-z_b)^(-1)``, f in the
    conjugate space, at every marked point.

    The denominator structure is known from the classification data, so the
    same code path works on both backends.  Returns the dual classified as a
    special space with marked points ``lam`` in the source order.
    """
    field = special.field
    space = special.space
    flat = space.flattened()
    n_dim = space.dim
    dualv = _dual_var(space.var)

    from .spaces import _sub_wronskian

    w_poly = space.wronskian_poly()
    # structural denominator: Wr = c * prod (x - z_a)^(m_a)
    c_lead = w_poly.lc()
    rebuilt = Polynomial([c_lead], field)
    for z_a, m_a in zip(special.z, special.m):
        rebuilt = rebuilt * Polynomial([-z_a, field.one], field) ** m_a
    if field.exact:
        if rebuilt != w_poly:
            raise BispectralError("Wronskian does not factor over the marked points")
    else:
        diff = rebuilt - w_poly
        scale = max((abs(v) for v in w_poly.coeffs), default=1.0)
        bad = max((abs(v) for v in diff.coeffs), default=0.0)
        if bad > 1e-6 * max(1.0, scale):
            raise BispectralError(
                f"Wronskian does not factor over the marked points ({bad:.3g})"
            )

    # numerators: sub-Wronskians (polynomial since the basis is polynomial)
    numerators = []
    for i in range(n_dim):
        rest = [flat[j] for j in range(n_dim) if j != i]
        sub = _sub_wronskian(rest, field)
        numerators.append((flat[i][0], sub.as_polynomial()))

    blocks = []
    for a, z_a in enumerate(special.z):
        pole = special.m[a] + 1
        other = Polynomial([c_lead], field)
        for b, z_b in enumerate(special.z):
            if b == a:
                continue
            other = other * Polynomial([-z_b, field.one], field) ** (
                special.m[b] + 1
            )
        polys = []
        for lam_i, num in numerators:
            # series of num/other at z_a, shifted down by the pole order
            shifted_num = num.shift(z_a)
            shifted_other = other.shift(z_a)
            rf = RationalFunction(shifted_num, shifted_other)
            lo, coeffs = rf.series_at(field.zero, pole - 1)
            principal = []
            for k in range(pole):
                idx = (pole - 1 - k) - lo
                principal.append(
                    coeffs[idx] if 0 <= idx < len(coeffs) else field.zero
                )
            q = _principal_to_poly(
                principal, -lam_i, z_a, field, keep_unit=True
            )
            if not q.is_zero():
                polys.append(q)
        if polys:
            blocks.append((z_a, polys))
    dual = _build_dual(blocks, field, dualv)
    if dual.dim != special.M:
        raise BispectralError(
            f"special dual has dimension {dual.dim}, expected {special.M}"
        )
    dual_special = classify_special(dual, special.lam, lam_order=special.z)
    return TransformResult(
        dual_space=dual,
        components=_canonical_components(dual),
        source_dim=space.dim,
        special=dual_special,
    )


# ---------------------------------------------------------------------------
# verification helpers for the two transform statements


def general_transform_checks(space, result):
    """Dimension, per-point degrees, operator transpose (for positive
    coefficient degrees), singular containment and exponent formulas."""
    from .diffop import monic_fundamental, regularize

    field = space.field
    checks = {}
    sing = space.singular_data()
    total_m = sum(M for _z, _s, M, _m in sing)
    dual = result.dual_space
    checks["dual_dimension"] = dual.dim == total_m

    deg_ok = True
    dual_deg_sets = dual.block_degree_sets()
    for z_a, _seq, _M, m_ab in sing:
        block = next(
            (
                degs
                for l2, degs in dual_deg_sets
                if field.eq(l2, field.scalar(z_a))
            ),
            [],
        )
        if sorted(block) != sorted(m_ab):
            deg_ok = False
    checks["component_degrees"] = deg_ok

    lams = [lam for lam, _k in space.exponent_multiplicities()]
    sing_u = dual.singular_points()
    in_lams = all(
        any(field.eq(field.scalar(zu), lam) for lam in lams)
        for zu, _seq in sing_u
    )
    checks["dual_singularities_among_source_exponents"] = in_lams

    expo_ok = True
    m_total = total_m
    deg_sets = dict(
        (field.sort_key(lam), degs) for lam, degs in space.block_degree_sets()
    )
    for lam, mult in space.exponent_multiplicities():
        degs = deg_sets[field.sort_key(lam)]
        expect = sorted(
            list(range(m_total - mult))
            + [m_total - mult + d for d in degs]
        )
        got = dual.exponents_at(lam).exponents
        if tuple(expect) != got:
            expo_ok = False
    checks["dual_exponent_formula"] = expo_ok

    all_positive = all(
        min(degs) >= 1 for _l, degs in space.block_degree_sets()
    )
    if all_positive:
        d_v = regularize(monic_fundamental(space), space)
        d_u = regularize(monic_fundamental(dual), dual)
        checks["operator_transpose"] = d_u.proportional_to(
            d_v.bispectral_swap()
        )
    else:
        checks["operator_transpose"] = None  # statement needs positive degrees
    return checks


def special_transform_checks(special, result):
    """Dimension, degree, dual type and operator transpose for the special
    transform; these hold with no degree restrictions."""
    from .diffop import special_fundamental

    field = special.field
    checks = {}
    dual_sp = result.special
    checks["dual_dimension"] = result.dual_space.dim == special.M
    checks["dual_type"] = (
        dual_sp.n == special.m
        and dual_sp.m == special.n
        and all(field.eq(a, b) for a, b in zip(dual_sp.lam, special.z))
        and all(field.eq(a, b) for a, b in zip(dual_sp.z, special.lam))
    )
    checks["component_degrees"] = all(
        p.degree == m_a for p, m_a in zip(dual_sp.ps, special.m)
    )
    d_v = special_fundamental(special)
    d_u = special_fundamental(dual_sp)
    checks["operator_transpose"] = d_u.proportional_to(d_v.bispectral_swap())
    return checks
