"""Master functions, critical-point (Bethe) systems and the correspondence
between their orbits and special quasi-polynomial spaces.

Coordinates live in levels: level i carries ``nbar_i = n_(i+1) + ... + n_N``
variables.  Only level-1 variables interact with the marked points z; within
a level coordinates repel quadratically and adjacent levels attract.  The
product function is symmetric under level-preserving permutations, so orbits
are canonicalized by sorting each level.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass

import numpy as np

from .errors import (
    BispectralError,
    CoincidingParameters,
    KernelSolveFailed,
    MaxStartsExceeded,
    NonAdmissiblePoint,
    NonAdmissibleSpace,
    PossiblyNonGeneric,
)
from .field import scalar_from_json, scalar_to_json
from .quasipoly import (
    Polynomial,
    QuasiPolynomial,
    RationalFunction,
    poly_roots,
    tuple_admissible,
)
from .spaces import classify_special


@dataclass(frozen=True)
class MasterSpec:
    """Data of one product function: exponents, marked points, weights."""

    lam: tuple
    z: tuple
    n: tuple
    m: tuple

    def __post_init__(self):
        lam = tuple(complex(v) for v in self.lam)
        z = tuple(complex(v) for v in self.z)
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "n", tuple(int(v) for v in self.n))
        object.__setattr__(self, "m", tuple(int(v) for v in self.m))
        if len(set(lam)) != len(lam) or len(set(z)) != len(z):
            raise CoincidingParameters("exponents and points must be distinct")
        if any(v < 0 for v in self.n) or any(v < 0 for v in self.m):
            raise BispectralError("weights must be nonnegative")
        if sum(self.n) != sum(self.m):
            raise BispectralError("weight sums differ")

    @property
    def N(self):
        return len(self.lam)

    @property
    def M(self):
        return len(self.z)

    @property
    def nbar(self):
        n = self.n
        return tuple(sum(n[i + 1 :]) for i in range(len(n) - 1))

    @property
    def num_vars(self):
        return sum(self.nbar)

    def dual(self):
        """The spec with exponents and points interchanged."""
        return MasterSpec(lam=self.z, z=self.lam, n=self.m, m=self.n)

    def to_json(self):
        return {
            "lambda": [scalar_to_json(v) for v in self.lam],
            "z": [scalar_to_json(v) for v in self.z],
            "n": list(self.n),
            "m": list(self.m),
        }

    @classmethod
    def from_json(cls, obj):
        from .field import ApproxField

        af = ApproxField()
        return cls(
            lam=[scalar_from_json(v, af) for v in obj["lambda"]],
            z=[scalar_from_json(v, af) for v in obj["z"]],
            n=obj["n"],
            m=obj["m"],
        )


@dataclass(frozen=True)
class CriticalPoint:
    """One orbit representative: coordinates sorted within each level."""

    levels: tuple  # tuple of tuples of complex
    residual: float
    spec: MasterSpec

    def flat(self):
        return [t for lvl in self.levels for t in lvl]

    def to_json(self):
        return {
            "levels": [
                [scalar_to_json(t) for t in lvl] for lvl in self.levels
            ],
            "residual": self.residual,
        }


def _canonical_levels(levels):
    return tuple(
        tuple(sorted((complex(t) for t in lvl), key=lambda v: (v.real, v.imag)))
        for lvl in levels
    )


def levels_from_flat(spec, flat):
    out = []
    pos = 0
    for k in spec.nbar:
        out.append(tuple(flat[pos : pos + k]))
        pos += k
    return tuple(out)


def point_admissible(spec, levels, eps=1e-9):
    """No collisions with z (level 1), within a level, or across levels."""
    levels = [list(map(complex, lvl)) for lvl in levels]
    for t in levels[0] if levels else []:
        for za in spec.z:
            if abs(t - za) <= eps:
                return False
    for lvl in levels:
        for a in range(len(lvl)):
            for b in range(a + 1, len(lvl)):
                if abs(lvl[a] - lvl[b]) <= eps:
                    return False
    for i in range(len(levels) - 1):
        for a in levels[i]:
            for b in levels[i + 1]:
                if abs(a - b) <= eps:
                    return False
    return True


def master_value(spec, levels):
    """Value of the product function at an admissible point (complex)."""
    levels = [list(map(complex, lvl)) for lvl in levels]
    if len(levels) != spec.N - 1 or any(
        len(lvl) != k for lvl, k in zip(levels, spec.nbar)
    ):
        raise BispectralError("coordinate shape does not match the spec")
    if not point_admissible(spec, levels):
        raise NonAdmissiblePoint("coordinates collide")
    lam, z, m = spec.lam, spec.z, spec.m
    expo = lam[0] * sum(ma * za for ma, za in zip(m, z))
    for i, lvl in enumerate(levels):
        expo += (lam[i + 1] - lam[i]) * sum(lvl)
    val = cmath.exp(expo)
    for a in range(spec.M):
        for b in range(a + 1, spec.M):
            val *= (z[a] - z[b]) ** (m[a] * m[b])
    if levels:
        for t in levels[0]:
            for a in range(spec.M):
                val *= (t - z[a]) ** (-m[a])
    for lvl in levels:
        for a in range(len(lvl)):
            for b in range(a + 1, len(lvl)):
                val *= (lvl[a] - lvl[b]) ** 2
    for i in range(len(levels) - 1):
        for a in levels[i]:
            for b in levels[i + 1]:
                val /= a - b
    return val


def critical_equations(spec, levels):
    """Left-minus-right values of the critical system (the gradient of the
    logarithm of the product function with respect to each coordinate)."""
    levels = [list(map(complex, lvl)) for lvl in levels]
    if not point_admissible(spec, levels):
        raise NonAdmissiblePoint("coordinates collide")
    lam, z, m = spec.lam, spec.z, spec.m
    out = []
    for i, lvl in enumerate(levels):
        prev_lvl = levels[i - 1] if i > 0 else None
        next_lvl = levels[i + 1] if i + 1 < len(levels) else []
        for j, t in enumerate(lvl):
            acc = 0j
            for j2, t2 in enumerate(lvl):
                if j2 != j:
                    acc += 2.0 / (t - t2)
            for s in next_lvl:
                acc -= 1.0 / (t - s)
            if i == 0:
                for za, ma in zip(z, m):
                    acc -= ma / (t - za)
            else:
                for s in prev_lvl:
                    acc -= 1.0 / (t - s)
            acc -= lam[i] - lam[i + 1]
            out.append(acc)
    return out


def _jacobian(spec, levels):
    flat = [t for lvl in levels for t in lvl]
    nv = len(flat)
    offsets = []
    pos = 0
    for lvl in levels:
        offsets.append(pos)
        pos += len(lvl)
    jac = np.zeros((nv, nv), dtype=complex)
    for i, lvl in enumerate(levels):
        for j, t in enumerate(lvl):
            row = offsets[i] + j
            for j2, t2 in enumerate(lvl):
                if j2 == j:
                    continue
                d = (t - t2) ** 2
                jac[row, offsets[i] + j] += -2.0 / d
                jac[row, offsets[i] + j2] += 2.0 / d
            if i + 1 < len(levels):
                for j2, s in enumerate(levels[i + 1]):
                    d = (t - s) ** 2
                    jac[row, offsets[i] + j] += 1.0 / d
                    jac[row, offsets[i + 1] + j2] += -1.0 / d
            if i == 0:
                for za, ma in zip(spec.z, spec.m):
                    jac[row, offsets[0] + j] += ma / (t - za) ** 2
            else:
                for j2, s in enumerate(levels[i - 1]):
                    d = (t - s) ** 2
                    jac[row, offsets[i] + j] += 1.0 / d
                    jac[row, offsets[i - 1] + j2] += -1.0 / d
    return jac


def log_master_partial_z(spec, levels, a):
    """d/d z_a of log of the product function at fixed coordinates."""
    lam, z, m = spec.lam, spec.z, spec.m
    levels = [list(map(complex, lvl)) for lvl in levels]
    acc = lam[0] * m[a]
    for b in range(spec.M):
        if b != a:
            acc += m[a] * m[b] / (z[a] - z[b])
    if levels:
        for t in levels[0]:
            acc += m[a] / (t - z[a])
    return acc


def log_master_partial_lam(spec, levels, i):
    """d/d lam_i of log of the product function at fixed coordinates."""
    z, m = spec.z, spec.m
    levels = [list(map(complex, lvl)) for lvl in levels]
    acc = 0j
    if i == 0:
        acc += sum(ma * za for ma, za in zip(m, z))
    if i > 0 and i - 1 < len(levels):
        acc += sum(levels[i - 1])
    if i < len(levels):
        acc -= sum(levels[i])
    return acc


def finite_difference_log_gradient(spec, levels, h=1e-6):
    """Central differences of log Phi via value ratios (branch-safe)."""
    flat = [complex(t) for lvl in levels for t in lvl]
    base = master_value(spec, levels)
    out = []
    for k in range(len(flat)):
        up = list(flat)
        dn = list(flat)
        up[k] += h
        dn[k] -= h
        vu = master_value(spec, levels_from_flat(spec, up))
        vd = master_value(spec, levels_from_flat(spec, dn))
        out.append((vu - vd) / (2 * h * base))
    return out


def genericity_violations(spec):
    """Integer vectors c with 0 <= c_i <= nbar_i making
    ``sum c_i (lam_i - lam_(i+1))`` vanish; empty means generic exponents."""
    lam = spec.lam
    nbar = spec.nbar
    bad = []

    def rec(i, c, acc):
        if i == len(nbar):
            if c and any(c) and abs(acc) < 1e-12:
                bad.append(tuple(c))
            return
        for ci in range(nbar[i] + 1):
            rec(i + 1, c + [ci], acc + ci * (lam[i] - lam[i + 1]))

    rec(0, [], 0j)
    return bad


def solve_bethe(
    spec,
    starts=None,
    seed=0,
    residual_tol=1e-12,
    cluster_tol=1e-7,
    require=None,
    stop_at_bound=True,
):
    """Damped-Newton multistart search for admissible critical orbits.

    Starts are drawn from a disc around the centroid of the marked points;
    converged points are canonicalized (levels sorted), deduplicated and
    checked for admissibility.  When the weight-space dimension bound is
    attained the search stops early.  ``require`` raises MaxStartsExceeded
    if fewer orbits are found.
    """
    nv = spec.num_vars
    if nv == 0:
        return [CriticalPoint(levels=_canonical_levels([[]] * (spec.N - 1)), residual=0.0, spec=spec)]
    from .gaudin import weight_dimension

    bound = weight_dimension(spec.N, spec.M, spec.m, spec.n)
    if starts is None:
        starts = 200 * nv
    rng = np.random.default_rng(seed)
    center = sum(spec.z) / len(spec.z)
    radius = 2.0 * max(
        [abs(v) for v in spec.z] + [abs(v) for v in spec.lam] + [1.0]
    )
    found = []

    def residual_norm(flat):
        eq = critical_equations(spec, levels_from_flat(spec, flat))
        return max(abs(v) for v in eq)

    for _ in range(starts):
        if stop_at_bound and bound is not None and len(found) >= bound:
            break
        r = radius * np.sqrt(rng.uniform(0.0, 1.0, size=nv))
        th = rng.uniform(0, 2 * np.pi, size=nv)
        flat = list(center + r * np.exp(1j * th))
        ok = True
        for _it in range(80):
            levels = levels_from_flat(spec, flat)
            if not point_admissible(spec, levels, eps=1e-13):
                ok = False
                break
            eq = np.array(critical_equations(spec, levels))
            norm = np.max(np.abs(eq))
            if norm < residual_tol:
                break
            jac = _jacobian(spec, levels)
            try:
                step = np.linalg.solve(jac, -eq)
            except np.linalg.LinAlgError:
                ok = False
                break
            alpha = 1.0
            improved = False
            for _bt in range(25):
                cand = [t + alpha * s for t, s in zip(flat, step)]
                cand_lv = levels_from_flat(spec, cand)
                if point_admissible(spec, cand_lv, eps=1e-13):
                    try:
                        cn = np.max(
                            np.abs(critical_equations(spec, cand_lv))
                        )
                    except NonAdmissiblePoint:
                        cn = np.inf
                    if cn < norm:
                        flat = cand
                        improved = True
                        break
                alpha *= 0.5
            if not improved:
                ok = False
                break
        else:
            ok = False
        if not ok:
            continue
        levels = _canonical_levels(levels_from_flat(spec, flat))
        if not point_admissible(spec, levels, eps=cluster_tol):
            continue
        res = residual_norm([t for lvl in levels for t in lvl])
        if res > 1e-10:
            continue
        vec = np.array([t for lvl in levels for t in lvl])
        dup = False
        for other in found:
            ovec = np.array(other.flat())
            if np.max(np.abs(vec - ovec)) < cluster_tol:
                dup = True
                break
        if not dup:
            found.append(CriticalPoint(levels=levels, residual=res, spec=spec))

    found.sort(key=lambda cp: tuple((t.real, t.imag) for t in cp.flat()))
    _continuum_probe(spec, found, cluster_tol)
    if require is not None and len(found) < require:
        raise MaxStartsExceeded(
            f"found {len(found)} orbits, required {require}"
        )
    return found


def _continuum_probe(spec, found, cluster_tol):
    """Raise when two distinct orbits look like samples of a critical curve:
    close product values and a near-critical midpoint."""
    vals = []
    for cp in found:
        try:
            vals.append(master_value(spec, cp.levels))
        except NonAdmissiblePoint:
            vals.append(None)
    for i in range(len(found)):
        for j in range(i + 1, len(found)):
            if vals[i] is None or vals[j] is None:
                continue
            scale = max(1.0, abs(vals[i]), abs(vals[j]))
            if abs(vals[i] - vals[j]) > 1e-8 * scale:
                continue
            mid = [
                (a + b) / 2 for a, b in zip(found[i].flat(), found[j].flat())
            ]
            lv = levels_from_flat(spec, mid)
            if not point_admissible(spec, lv, eps=1e-12):
                continue
            try:
                resid = max(abs(v) for v in critical_equations(spec, lv))
            except NonAdmissiblePoint:
                continue
            if resid < 1e-6:
                raise PossiblyNonGeneric(
                    "midpoint of two found orbits is also critical"
                )


# ---------------------------------------------------------------------------
# correspondence with special spaces


def tuple_from_space(special):
    """The polynomial tuple of a special space: y_i is the exponential-free
    Wronskian of the basis elements above level i, normalized monic."""
    from .spaces import _sub_wronskian

    field = special.field
    pairs = list(zip(special.lam, special.ps))
    ys = []
    for i in range(1, special.N):
        rest = [
            (lam, RationalFunction(p)) for lam, p in pairs[i:]
        ]
        sub = _sub_wronskian(rest, field)
        y = sub.as_polynomial()
        if y.is_zero():
            raise NonAdmissibleSpace("degenerate upper Wronskian")
        ys.append(y.monic())
    ok, reason = tuple_admissible(ys, list(special.z), field)
    if not ok:
        raise NonAdmissibleSpace(reason)
    return ys


def critical_point_from_tuple(spec, ys):
    """Orbit representative from a polynomial tuple (roots per level)."""
    levels = []
    for y in ys:
        roots = []
        for r in poly_roots(y):
            v = complex(r.value)
            roots.extend([v] * r.multiplicity)
        levels.append(roots)
    levels = _canonical_levels(levels)
    flat = [t for lvl in levels for t in lvl]
    res = max(
        (abs(v) for v in critical_equations(spec, levels)), default=0.0
    )
    return CriticalPoint(levels=levels, residual=res, spec=spec)


def space_from_critical_point(cp, field=None):
    """Kernel of the factorized operator attached to an admissible critical
    point, classified as a special space.

    The kernel is computed direction by direction: a degree-``n_i``
    polynomial ansatz at each exponent gives a linear system whose nullspace
    must be one-dimensional.
    """
    from .diffop import factorized_from_tuple
    from .field import ApproxField

    spec = cp.spec
    if field is None:
        field = ApproxField()
    lam = [field.scalar(v) for v in spec.lam]
    z = [field.scalar(v) for v in spec.z]
    ys = [
        Polynomial.from_roots(list(lvl), field) for lvl in cp.levels
    ]
    op = factorized_from_tuple(ys, lam, z, spec.m, field=field)

    op_den = Polynomial.one(field)
    for i in range(1, op.order + 1):
        op_den = op_den * op.abar(i).den

    from . import linalg

    basis_pairs = []
    for lam_i, n_i in zip(lam, spec.n):
        cols = []
        width = 0
        for k in range(n_i + 1):
            mono = QuasiPolynomial(
                [(lam_i, RationalFunction(Polynomial.monomial(field, k)))],
                field,
            )
            img = op.apply(mono)
            if img.is_zero():
                num = Polynomial.zero(field)
            else:
                _l, coef = img.single_term()
                num = (coef * op_den).as_polynomial()
            cols.append(num)
            width = max(width, num.degree + 1)
        rows = [
            [cols[k].coeff(r) for k in range(n_i + 1)] for r in range(width)
        ]
        null = linalg.nullspace(rows, field)
        if len(null) != 1:
            raise KernelSolveFailed(
                f"kernel at exponent {lam_i!r} has dimension {len(null)}"
            )
        p = Polynomial(null[0], field)
        if p.degree != n_i:
            raise KernelSolveFailed(
                f"kernel polynomial has degree {p.degree}, expected {n_i}"
            )
        basis_pairs.append((lam_i, p.monic()))
    from .spaces import FunctionSpace

    space = FunctionSpace.from_pairs(basis_pairs, field)
    return classify_special(space, z, lam_order=lam)


# ---------------------------------------------------------------------------
# the N = M = 2 chain and the shared-derivative check


def duality_chain(spec, seed=0, starts=None):
    """For each admissible orbit of an N = M = 2 spec: the special space,
    its special dual, and the three corresponding critical points."""
    if spec.N != 2 or spec.M != 2:
        raise BispectralError("the duality chain is defined for N = M = 2")
    from .transform import special_bispectral_dual

    out = []
    for cp in solve_bethe(spec, seed=seed, starts=starts):
        sp = space_from_critical_point(cp)
        dual = special_bispectral_dual(sp).special
        spec_swapped = MasterSpec(
            lam=(spec.lam[1], spec.lam[0]),
            z=spec.z,
            n=(spec.n[1], spec.n[0]),
            m=spec.m,
        )
        spec_dual = MasterSpec(lam=spec.z, z=spec.lam, n=spec.m, m=spec.n)
        cp_swapped = critical_point_from_tuple(spec_swapped, [sp.ps[0]])
        cp_dual = critical_point_from_tuple(spec_dual, [dual.ps[1]])
        out.append(
            {
                "cp": cp,
                "space": sp,
                "dual": dual,
                "spec_swapped": spec_swapped,
                "spec_dual": spec_dual,
                "cp_swapped": cp_swapped,
                "cp_dual": cp_dual,
            }
        )
    return out


def lagrange_match(spec1, spec2, spec3, cps, tol=1e-8):
    """Compare the four parameter-derivatives of the logarithms of the three
    product functions at corresponding critical points.

    ``spec1`` is the (lam, z, n, m) function, ``spec2`` the one with the two
    exponents (and degree labels) swapped, ``spec3`` the dual function; the
    labels below refer to the parameters of ``spec1``.
    """
    cp1, cp2, cp3 = cps
    rows = {
        "d_lam1": (
            log_master_partial_lam(spec1, cp1.levels, 0),
            log_master_partial_lam(spec2, cp2.levels, 1),
            log_master_partial_z(spec3, cp3.levels, 0),
        ),
        "d_lam2": (
            log_master_partial_lam(spec1, cp1.levels, 1),
            log_master_partial_lam(spec2, cp2.levels, 0),
            log_master_partial_z(spec3, cp3.levels, 1),
        ),
        "d_z1": (
            log_master_partial_z(spec1, cp1.levels, 0),
            log_master_partial_z(spec2, cp2.levels, 0),
            log_master_partial_lam(spec3, cp3.levels, 0),
        ),
        "d_z2": (
            log_master_partial_z(spec1, cp1.levels, 1),
            log_master_partial_z(spec2, cp2.levels, 1),
            log_master_partial_lam(spec3, cp3.levels, 1),
        ),
    }
    report = {}
    worst = 0.0
    for name, (a, b, c) in rows.items():
        scale = max(1.0, abs(a), abs(b), abs(c))
        dev = max(abs(a - b), abs(a - c), abs(b - c)) / scale
        worst = max(worst, dev)
        report[name] = {"values": (a, b, c), "deviation": dev}
    report["max_deviation"] = worst
    if worst > tol:
        from .errors import CorrespondenceBroken

        raise CorrespondenceBroken(
            f"parameter derivatives disagree (max deviation {worst:.3g})"
        )
    return report
