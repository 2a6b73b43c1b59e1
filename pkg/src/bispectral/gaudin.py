"""Tensor weight spaces of symmetric-power modules and their commuting
Hamiltonians.

The module with highest weight ``(m, 0, ..., 0)`` is realized as the
degree-m monomials in N variables with ``E_ij`` acting as ``x_i d/dx_j``.
A weight-space basis vector of the M-fold tensor product is then an M x N
matrix of exponents with row sums ``m`` and column sums ``n``, and the
duality between the two tensor orders is literally matrix transposition.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import (
    BispectralError,
    CoincidingParameters,
    DegreeTooHigh,
    DualityViolation,
    NonAdmissiblePoint,
    OutOfRange,
    WeightMismatch,
)
from .field import ApproxField, ExactComplex, EXACT
from .quasipoly import Polynomial


def weight_dimension(N, M, m, n):
    """Number of M x N nonnegative-integer matrices with row sums m and
    column sums n (dynamic programming over rows)."""
    m, n = tuple(m), tuple(n)
    if len(m) != M or len(n) != N:
        raise WeightMismatch("weight vectors have the wrong length")
    if any(v < 0 for v in m) or any(v < 0 for v in n):
        return 0
    if sum(m) != sum(n):
        return 0
    states = {n: 1}
    for ma in m:
        new = {}
        for cols, count in states.items():
            for row in _compositions(ma, len(n)):
                if all(r <= c for r, c in zip(row, cols)):
                    key = tuple(c - r for c, r in zip(cols, row))
                    new[key] = new.get(key, 0) + count
        states = new
    return states.get(tuple([0] * len(n)), 0)


def _compositions(total, parts):
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


@dataclass(frozen=True)
class WeightBasis:
    """Monomial basis of the weight subspace, indexed by exponent matrices
    in row-major lexicographic order."""

    N: int
    M: int
    m: tuple
    n: tuple
    matrices: tuple

    @property
    def dim(self):
        return len(self.matrices)

    def index(self, matrix):
        return self._index_map()[matrix]

    def _index_map(self):
        if not hasattr(self, "_idx"):
            object.__setattr__(
                self, "_idx", {mat: k for k, mat in enumerate(self.matrices)}
            )
        return self._idx


def build_weight_basis(N, M, m, n):
    """Enumerate the exponent matrices (lexicographic, row-major)."""
    m, n = tuple(int(v) for v in m), tuple(int(v) for v in n)
    if len(m) != M or len(n) != N:
        raise WeightMismatch("weight vectors have the wrong length")
    if any(v < 0 for v in m) or any(v < 0 for v in n):
        raise WeightMismatch("weights must be nonnegative")
    if sum(m) != sum(n):
        raise WeightMismatch("row and column totals differ")
    out = []

    def rec(a, cols, rows):
        if a == M:
            if all(c == 0 for c in cols):
                out.append(tuple(rows))
            return
        for row in _compositions(m[a], N):
            if all(r <= c for r, c in zip(row, cols)):
                rec(
                    a + 1,
                    tuple(c - r for c, r in zip(cols, row)),
                    rows + [row],
                )

    rec(0, n, [])
    out.sort()
    basis = WeightBasis(N=N, M=M, m=m, n=n, matrices=tuple(out))
    if basis.dim != weight_dimension(N, M, m, n):
        raise BispectralError("enumeration disagrees with the counting rule")
    return basis


def _act_single(matrix, a, i, j):
    """E_ij on tensor factor a: returns (integer coefficient, new matrix)."""
    c = matrix[a][j]
    if c == 0:
        return None
    row = list(matrix[a])
    row[j] -= 1
    row[i] += 1
    new = list(matrix)
    new[a] = tuple(row)
    return c, tuple(new)


def _zeros(d, field):
    return [[field.zero for _ in range(d)] for _ in range(d)]


@dataclass
class HamiltonianSet:
    """The commuting matrices H_a (one per tensor factor) and G_i (one per
    variable), acting on a WeightBasis."""

    basis: WeightBasis
    lam: tuple
    z: tuple
    h: list
    g: list
    field: object

    def all_matrices(self):
        return list(self.h) + list(self.g)


def hamiltonians(basis, lam, z, field=EXACT, check=True):
    """Build the Casimir-exchange and weighted-diagonal families.

    ``lam`` has one entry per variable (length N), ``z`` one per tensor
    factor (length M).  With ``check`` the pairwise commutators are verified
    to vanish.
    """
    lam = [field.scalar(v) for v in lam]
    z = [field.scalar(v) for v in z]
    if len(lam) != basis.N or len(z) != basis.M:
        raise WeightMismatch("parameter lengths do not match the basis")
    for vals in (lam, z):
        for x in range(len(vals)):
            for y in range(x + 1, len(vals)):
                if field.eq(vals[x], vals[y]):
                    raise CoincidingParameters("parameters must be distinct")
    d = basis.dim
    idx = {mat: k for k, mat in enumerate(basis.matrices)}
    N, M = basis.N, basis.M

    h = [_zeros(d, field) for _ in range(M)]
    for col, mat in enumerate(basis.matrices):
        for a in range(M):
            # diagonal part sum_i lam_i E_ii^(a)
            diag = field.zero
            for i in range(N):
                diag = diag + lam[i] * field.scalar(mat[a][i])
            h[a][col][col] = h[a][col][col] + diag
            for b in range(M):
                if b == a:
                    continue
                inv = field.one / (z[a] - z[b])
                for i in range(N):
                    for j in range(N):
                        first = _act_single(mat, b, j, i)
                        if first is None:
                            continue
                        c1, mid = first
                        second = _act_single(mid, a, i, j)
                        if second is None:
                            continue
                        c2, fin = second
                        row = idx[fin]
                        h[a][row][col] = h[a][row][col] + inv * field.scalar(
                            c1 * c2
                        )

    g = [_zeros(d, field) for _ in range(N)]
    for col, mat in enumerate(basis.matrices):
        for i in range(N):
            diag = field.zero
            for a in range(M):
                diag = diag + z[a] * field.scalar(mat[a][i])
            g[i][col][col] = g[i][col][col] + diag
            for j in range(N):
                if j == i:
                    continue
                inv = field.one / (lam[i] - lam[j])
                # (E_ij E_ji - E_ii), the generators acting diagonally
                for b in range(M):
                    first = _act_single(mat, b, j, i)
                    if first is None:
                        continue
                    c1, mid = first
                    for a in range(M):
                        second = _act_single(mid, a, i, j)
                        if second is None:
                            continue
                        c2, fin = second
                        row = idx[fin]
                        g[i][row][col] = g[i][row][col] + inv * field.scalar(
                            c1 * c2
                        )
                eii = field.scalar(sum(mat[a][i] for a in range(M)))
                g[i][col][col] = g[i][col][col] - inv * eii

    hs = HamiltonianSet(basis=basis, lam=lam, z=z, h=h, g=g, field=field)
    if check and not commutators_vanish(hs):
        raise BispectralError("Hamiltonians fail to commute")
    return hs


def commutators_vanish(hs, rel_tol=1e-9):
    mats = hs.all_matrices()
    field = hs.field
    scale = 1.0
    if not field.exact:
        scale = max(
            (abs(v) for mat in mats for row in mat for v in row), default=1.0
        )
    for x in range(len(mats)):
        for y in range(x + 1, len(mats)):
            c = linalg.commutator(mats[x], mats[y], field)
            if field.exact:
                if any(v for row in c for v in row):
                    return False
            else:
                bad = max(abs(v) for row in c for v in row)
                if bad > rel_tol * max(1.0, scale**2):
                    return False
    return True


# ---------------------------------------------------------------------------
# duality and Weyl maps


@dataclass(frozen=True)
class DualityMap:
    """Transpose pairing between the two tensor orders of one monomial set."""

    source: WeightBasis
    target: WeightBasis
    perm: tuple  # perm[k] = index in target of the transpose of source k

    def apply_vector(self, vec):
        out = [None] * len(vec)
        for k, v in enumerate(vec):
            out[self.perm[k]] = v
        return out

    def conjugate_matrix(self, mat, field):
        d = len(mat)
        out = _zeros(d, field)
        for r in range(d):
            for c in range(d):
                out[self.perm[r]][self.perm[c]] = mat[r][c]
        return out


def duality_isomorphism(N, M, m, n):
    src = build_weight_basis(N, M, m, n)
    dst = build_weight_basis(M, N, n, m)
    perm = []
    for mat in src.matrices:
        t = tuple(zip(*mat))
        perm.append(dst.index(t))
    return DualityMap(source=src, target=dst, perm=tuple(perm))


def verify_hamiltonian_duality(N, M, m, n, lam, z, field=EXACT):
    """Matrix identity: the factor Hamiltonians of one side equal the
    variable Hamiltonians of the other side under transposition."""
    dmap = duality_isomorphism(N, M, m, n)
    side1 = hamiltonians(dmap.source, lam, z, field, check=False)
    side2 = hamiltonians(dmap.target, z, lam, field, check=False)
    ok = True
    for a in range(M):
        lhs = dmap.conjugate_matrix(side1.h[a], field)
        ok = ok and _mat_eq(lhs, side2.g[a], field)
    for i in range(N):
        lhs = dmap.conjugate_matrix(side1.g[i], field)
        ok = ok and _mat_eq(lhs, side2.h[i], field)
    return ok


def _mat_eq(a, b, field, rel_tol=1e-9):
    if field.exact:
        return all(x == y for ra, rb in zip(a, b) for x, y in zip(ra, rb))
    scale = max(
        (abs(v) for mat in (a, b) for row in mat for v in row), default=1.0
    )
    return all(
        abs(x - y) <= rel_tol * max(1.0, scale)
        for ra, rb in zip(a, b)
        for x, y in zip(ra, rb)
    )


def weyl_index_map(m, n):
    """The divided-power index map between the weights (n1, n2) and
    (n2, n1): ``i -> m2 - i`` on the admissible window."""
    m1, m2 = m
    n1, n2 = n
    alpha = max(0, n2 - m1)
    beta = min(m2, n2)
    alpha2 = max(0, n1 - m1)
    beta2 = min(m2, n1)

    def mapping(i):
        if not alpha <= i <= beta:
            raise OutOfRange(f"index {i} outside [{alpha}, {beta}]")
        j = m2 - i
        if not alpha2 <= j <= beta2:
            raise OutOfRange(f"image {j} outside [{alpha2}, {beta2}]")
        return j

    return mapping, (alpha, beta), (alpha2, beta2)


def weyl_isomorphism(m, n, field=EXACT):
    """Matrix of the Weyl map in the divided-power bases (a permutation)."""
    mapping, (alpha, beta), (alpha2, beta2) = weyl_index_map(m, n)
    dim = beta - alpha + 1
    if beta2 - alpha2 + 1 != dim:
        raise WeightMismatch("window sizes differ")
    mat = _zeros(dim, field)
    for i in range(alpha, beta + 1):
        j = mapping(i)
        mat[j - alpha2][i - alpha] = field.one
    return mat


# ---------------------------------------------------------------------------
# divided powers and the 2x2 Bethe vector


def lowering_power_coefficient(m, k, field=EXACT):
    """Coefficient c with ``E_21^k v_m / k! = c * x1^(m-k) x2^k``, computed
    from the derivation action rather than assumed."""
    if k < 0 or k > m:
        raise OutOfRange(f"power {k} outside 0..{m}")
    # act on exponent pairs (m - j, j)
    vec = {0: field.one}  # j -> coefficient
    for _ in range(k):
        new = {}
        for j, c in vec.items():
            # E_21 = x2 d/dx1 : coefficient (m - j)
            if m - j > 0:
                new[j + 1] = new.get(j + 1, field.zero) + c * field.scalar(
                    m - j
                )
        vec = new
    fact = field.scalar(math.factorial(k))
    return vec.get(k, field.zero) / fact


def dp_coordinates_2x2(m, n, field=EXACT):
    """For each admissible divided-power index i, the weight-basis matrix
    and the monomial coefficient of the vector
    ``E^(n2-i) v_(m1)/(n2-i)! (x) E^i v_(m2)/i!``."""
    m1, m2 = m
    n1, n2 = n
    alpha = max(0, n2 - m1)
    beta = min(m2, n2)
    out = []
    for i in range(alpha, beta + 1):
        mat = ((m1 - n2 + i, n2 - i), (m2 - i, i))
        coef = lowering_power_coefficient(m1, n2 - i, field) * (
            lowering_power_coefficient(m2, i, field)
        )
        out.append((i, mat, coef))
    return out


def symmetrized_weights_2x2(t_coords, z, i):
    """``Sym prod_(j<=n2-i) 1/(t_j - z1) prod 1/(t_(n2+j-i) - z2)``: the sum
    over all permutations of the coordinates."""
    n2 = len(t_coords)
    z1, z2 = complex(z[0]), complex(z[1])
    total = 0j
    for perm in itertools.permutations(range(n2)):
        term = 1.0 + 0j
        for pos in range(n2 - i):
            term /= complex(t_coords[perm[pos]]) - z1
        for pos in range(n2 - i, n2):
            term /= complex(t_coords[perm[pos]]) - z2
        total += term
    return total


def bethe_vector_2x2(cp, m, z, field=None):
    """Coefficient vector of the weight-basis expansion of the vector-valued
    symmetric function at a critical point.

    Returns ``(basis, vector, c_by_index)`` where ``c_by_index[i]`` is the
    divided-power coefficient for admissible index i.
    """
    if field is None:
        field = ApproxField()
    spec = cp.spec
    n = spec.n
    if spec.N != 2 or len(m) != 2:
        raise BispectralError("the explicit vector formula is for N = M = 2")
    t_coords = list(cp.levels[0])
    if len(t_coords) != n[1]:
        raise BispectralError("coordinate count differs from n2")
    for t in t_coords:
        for za in z:
            if abs(complex(t) - complex(za)) < 1e-12:
                raise NonAdmissiblePoint("coordinate sits on a marked point")
    basis = build_weight_basis(2, 2, tuple(m), tuple(n))
    vec = [field.zero] * basis.dim
    c_by_index = {}
    for i, mat, coef in dp_coordinates_2x2(tuple(m), tuple(n), field):
        ci = symmetrized_weights_2x2(t_coords, z, i)
        c_by_index[i] = ci
        vec[basis.index(mat)] = field.scalar(ci) * coef
    return basis, vec, c_by_index


def mixed_basis_expand(p, z1, z2, n):
    """Coefficients c_i of ``p = sum c_i (x-z1)^(n-i)/(n-i)! (x-z2)^i/i!``."""
    field = p.field
    z1, z2 = field.scalar(z1), field.scalar(z2)
    if p.degree > n:
        raise DegreeTooHigh(f"degree {p.degree} exceeds {n}")
    cols = []
    for i in range(n + 1):
        b = Polynomial([-z1, field.one], field) ** (n - i)
        b = b * Polynomial([-z2, field.one], field) ** i
        fact = field.scalar(
            math.factorial(n - i) * math.factorial(i)
        )
        b = b * (field.one / fact)
        cols.append(b)
    rows = [
        [cols[i].coeff(k) for i in range(n + 1)] for k in range(n + 1)
    ]
    rhs = [p.coeff(k) for k in range(n + 1)]
    sol = linalg.solve(rows, rhs, field)
    if sol is None:
        raise BispectralError("mixed-basis expansion failed")
    return sol


def _normalize_window(vals, field, window):
    pivot = None
    best = 0.0
    for i in window:
        a = field.abs(vals.get(i, field.zero))
        if a > best:
            best = a
            pivot = i
    if pivot is None:
        return None, None
    return pivot, vals[pivot]


def verify_duality_2x2(chain_entry, tol=1e-8):
    """Check the three-expansion identity and the coefficient recurrence for
    one entry of the N = M = 2 duality chain.

    ``chain_entry`` comes from ``bethe.duality_chain``: it carries the
    special space (polynomials p1, p2), its special dual (q1, q2) and the
    associated critical points.  The expansions of p2, p1 and q2 in the
    shifted mixed bases must agree (up to one scalar per sequence) on the
    admissible index window, and the three-term recurrence with the
    extracted phi must vanish.
    """
    from .diffop import extract_phi, special_fundamental

    sp = chain_entry["space"]
    dual = chain_entry["dual"]
    field = sp.field
    lam, z = sp.lam, sp.z
    n, m = sp.n, sp.m
    n1, n2 = n
    m1, m2 = m
    alpha = max(0, n2 - m1)
    beta = min(m2, n2)

    c = mixed_basis_expand(sp.ps[1], z[0], z[1], n2)
    d = mixed_basis_expand(sp.ps[0], z[0], z[1], n1)
    e = mixed_basis_expand(dual.ps[1], lam[0], lam[1], m2)

    cmap = {i: c[i] for i in range(len(c))}
    dmap = {i: d[m2 - i] for i in range(alpha, beta + 1) if 0 <= m2 - i < len(d)}
    emap = {i: e[i] for i in range(alpha, beta + 1) if i < len(e)}

    window = list(range(alpha, beta + 1))
    pivot, cref = _normalize_window(cmap, field, window)
    if pivot is None:
        raise DualityViolation("empty comparison window")
    report = {"window": (alpha, beta), "pivot": pivot}
    worst = 0.0
    for name, seq in (("p1_expansion", dmap), ("q2_expansion", emap)):
        ref = seq.get(pivot)
        if ref is None or field.abs(ref) == 0:
            raise DualityViolation(f"{name} vanishes at the pivot index")
        scale = cref / ref
        for i in window:
            a = cmap.get(i, field.zero)
            b = seq.get(i, field.zero) * scale
            dev = field.abs(a - b) / max(1.0, field.abs(a))
            worst = max(worst, dev)
            if dev > tol:
                raise DualityViolation(
                    f"{name} deviates at index {i}", index=i, residual=dev
                )
    report["max_sequence_deviation"] = worst

    # three-term recurrence with the extracted phi.  The displayed system
    # pairs with the alternating-sign coefficients a_i = (-1)^i c_i (the two
    # shifted-basis conventions differ by that sign; the sequence equalities
    # above are insensitive to it, the recurrence is not).
    op = special_fundamental(sp)
    phi = extract_phi(op, lam, z)
    phi11 = phi[0][0]
    lz = (lam[0] - lam[1]) * (z[0] - z[1])
    alt = [
        c[i] if i % 2 == 0 else -c[i] for i in range(len(c))
    ]
    scale_c = max([field.abs(v) for v in c] + [1.0])

    def rec_residual(i):
        a_prev = alt[i - 1] if i - 1 >= 0 else field.zero
        a_next = alt[i + 1] if i + 1 <= n2 else field.zero
        ai = alt[i] if 0 <= i <= n2 else field.zero
        return (
            field.scalar((n2 - i) * (m2 - i)) * a_next
            + field.scalar(i * (n1 - m2 + i)) * a_prev
            + (
                field.scalar(-2 * i * i + i * (2 * n2 - m1 + m2) - n2 * m2)
                + lz * (field.scalar(i) + phi11)
            )
            * ai
        )

    rec_worst = 0.0
    for i in range(0, n2 + 1):
        rec_worst = max(rec_worst, field.abs(rec_residual(i)) / scale_c)
    report["recurrence_residual"] = rec_worst
    if rec_worst > tol:
        raise DualityViolation(
            "recurrence residual above tolerance", residual=rec_worst
        )
    report["phi"] = phi
    return report
