"""The complete rank-one theory: closed-form localization matrices and gluing.

For a word in the single simple reflection, every wall is (plus or minus)
the one positive root, so the load-bearing subsets classify galleries and
every matrix of the theory has an explicit entry formula: the inverse Euler
class matrix E, the basis restriction matrix H = E^{-1}, the dual basis
matrix H* = D^{-1} tE, and their fibre analogues with defect sets in place
of load-bearing sets.  The membership and gluing congruences at the bottom
are the congruence engine of the general theory, specialized to one variable.

Rows and columns are indexed by galleries in the lexicographic order; values
on galleries are passed as lists in that same order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from gallerysheaf.galleries import WordData
from gallerysheaf.rootsys import cached_root_system
from gallerysheaf.symalg import (
    Polynomial,
    RationalFunction,
    divide_by_root_power,
)

ALPHA = Polynomial.variable(1, 1)


class SL2CheckError(AssertionError):
    """A rank-one structural identity failed."""


def _context(r: int) -> WordData:
    return WordData.get(cached_root_system("A", 1), (1,) * r)


def _lex_jsets(r: int) -> tuple[WordData, list[int], list[frozenset[int]]]:
    wd = _context(r)
    order = wd.lex_order
    jsets = [wd.stats[g].load_bearing for g in order]
    return wd, order, jsets


@dataclass
class SL2Matrix:
    """Square array indexed by galleries in lexicographic order; sparse entries."""

    size: int
    gallery_texts: list[str]
    entries: dict[tuple[int, int], object] = field(default_factory=dict)

    def __getitem__(self, key):
        i, j = key
        if not (0 <= i < self.size and 0 <= j < self.size):
            raise IndexError(key)
        return self.entries.get((i, j))

    def rows(self, zero):
        out = []
        for i in range(self.size):
            out.append([self.entries.get((i, j), zero) for j in range(self.size)])
        return out


def _neg_alpha_power(k: int) -> Polynomial:
    return (-ALPHA) ** k


def sl2_E(r: int) -> SL2Matrix:
    """Matrix of inverse Euler classes: entry (gamma, delta) is
    (-1)^{#J(delta)} / (-alpha)^{#J(gamma)} when J(delta) is contained in
    J(gamma), and zero otherwise.  Lower triangular in lexicographic order."""
    wd, order, jsets = _lex_jsets(r)
    m = SL2Matrix(2**r, [wd.galleries[g].text for g in order])
    for gi, jg in enumerate(jsets):
        den = _neg_alpha_power(len(jg))
        for di, jd in enumerate(jsets):
            if jd <= jg:
                m.entries[(gi, di)] = RationalFunction(
                    Polynomial.constant(1, (-1) ** len(jd)), den
                )
    for gi in range(m.size):
        for di in range(m.size):
            if (gi, di) in m.entries and di > gi:
                raise SL2CheckError("E is not lower triangular in lexicographic order")
    return m


def sl2_H(r: int) -> SL2Matrix:
    """Basis restriction matrix: entry (delta, gamma) is alpha^{#J(gamma)}
    when J(delta) contains J(gamma), else zero.  Verified to invert E."""
    wd, order, jsets = _lex_jsets(r)
    m = SL2Matrix(2**r, [wd.galleries[g].text for g in order])
    for gi, jg in enumerate(jsets):
        col = ALPHA ** len(jg)
        for di, jd in enumerate(jsets):
            if jd >= jg:
                m.entries[(di, gi)] = col
    e = sl2_E(r)
    _assert_product_is_identity(e, m, r)
    return m


def _assert_product_is_identity(e: SL2Matrix, h: SL2Matrix, r: int) -> None:
    n = e.size
    rows_of_h: dict[int, list[tuple[int, Polynomial]]] = {}
    for (di, gi), v in h.entries.items():
        rows_of_h.setdefault(di, []).append((gi, v))
    rows_of_e: dict[int, list[tuple[int, RationalFunction]]] = {}
    for (a, di), v in e.entries.items():
        rows_of_e.setdefault(a, []).append((di, v))
    zero = RationalFunction.zero(1)
    for gi in range(n):
        acc: dict[int, RationalFunction] = {}
        for di, ev in rows_of_e.get(gi, ()):
            for gj, hv in rows_of_h.get(di, ()):
                cur = acc.get(gj)
                term = ev * RationalFunction(hv)
                acc[gj] = term if cur is None else cur + term
        for gj in range(n):
            v = acc.get(gj, zero)
            expected = RationalFunction.one(1) if gj == gi else zero
            if v != expected:
                raise SL2CheckError(f"E * H differs from the identity at ({gi}, {gj})")


def full_euler_class(r: int, n_load_bearing: int) -> Polynomial:
    """Euler class of the whole space at a fixed point with the given #J."""
    return Polynomial.constant(1, (-1) ** n_load_bearing) * _neg_alpha_power(r)


def sl2_Hstar(r: int) -> SL2Matrix:
    """Dual basis matrix: entry (delta, gamma) is (-alpha)^{r - #J(gamma)}
    when J(delta) is contained in J(gamma), else zero.  Verified against
    the diagonal-rescaled transpose of E."""
    wd, order, jsets = _lex_jsets(r)
    m = SL2Matrix(2**r, [wd.galleries[g].text for g in order])
    for gi, jg in enumerate(jsets):
        col = _neg_alpha_power(r - len(jg))
        for di, jd in enumerate(jsets):
            if jd <= jg:
                m.entries[(di, gi)] = col
    e = sl2_E(r)
    for di, jd in enumerate(jsets):
        d_inv = RationalFunction(full_euler_class(r, len(jd)))
        for gi in range(m.size):
            lhs = m.entries.get((di, gi))
            rhs = e.entries.get((gi, di))
            rhs_val = d_inv * rhs if rhs is not None else RationalFunction.zero(1)
            lhs_val = RationalFunction(lhs) if lhs is not None else RationalFunction.zero(1)
            if lhs_val != rhs_val:
                raise SL2CheckError(f"H* differs from D^-1 tE at ({di}, {gi})")
    return m


def sl2_fibre_H(r: int, x: str, dual: bool = False) -> SL2Matrix:
    """Fibre basis matrix over the endpoint x ('id' or 's'): entry (delta,
    gamma) is alpha^{#D(gamma)} on defect-set containments; the dual variant
    uses (-alpha)^{r-1-#D(gamma)} on reversed containments."""
    if x not in ("id", "s"):
        raise ValueError("x must be 'id' or 's'")
    wd = _context(r)
    rs = wd.rs
    target = rs.identity() if x == "id" else rs.simple_reflection(1)
    ids = wd.fibres.get(target, [])
    dsets = [wd.stats[g].defects for g in ids]
    m = SL2Matrix(len(ids), [wd.galleries[g].text for g in ids])
    for gi, dg in enumerate(dsets):
        if dual:
            col = _neg_alpha_power(r - 1 - len(dg))
        else:
            col = ALPHA ** len(dg)
        for di, dd in enumerate(dsets):
            ok = dd <= dg if dual else dd >= dg
            if ok:
                m.entries[(di, gi)] = col
    return m


def sl2_member(r: int, values: list[Polynomial]) -> tuple[bool, list[Polynomial] | None]:
    """Total-space membership of a pointwise function (values in lex order).

    Runs the containment congruences, recovers the coefficients over the
    basis columns by the alternating-sum formula, and cross-checks the dual
    congruence family; the two criteria must agree.
    """
    wd, order, jsets = _lex_jsets(r)
    if len(values) != 2**r:
        raise ValueError("need one value per gallery")
    member = True
    coeffs: list[Polynomial] | None = []
    for gi, jg in enumerate(jsets):
        acc = Polynomial.zero(1)
        for di, jd in enumerate(jsets):
            if jd <= jg:
                acc = acc + values[di].scale((-1) ** len(jd))
        q = divide_by_root_power(acc, ALPHA, len(jg))
        if q is None:
            member = False
            coeffs = None
            break
        if coeffs is not None:
            coeffs.append(q.scale((-1) ** len(jg)))
    dual_member = True
    for gi, jg in enumerate(jsets):
        acc = Polynomial.zero(1)
        for di, jd in enumerate(jsets):
            if jd >= jg:
                acc = acc + values[di].scale((-1) ** (r - len(jd)))
        if divide_by_root_power(acc, ALPHA, r - len(jg)) is None:
            dual_member = False
            break
    if member != dual_member:
        raise SL2CheckError("the two membership congruence families disagree")
    if member and coeffs is not None:
        h = sl2_H(r)
        for di in range(2**r):
            acc = Polynomial.zero(1)
            for gi in range(2**r):
                hv = h.entries.get((di, gi))
                if hv is not None:
                    acc = acc + coeffs[gi] * hv
            if acc != values[di]:
                raise SL2CheckError("recovered coefficients do not reproduce the function")
    return member, coeffs


def fibre_coefficients(r: int, x: str, values: list[Polynomial]) -> list[Polynomial] | None:
    """Coefficients over the fibre basis columns, or None if not a member.

    Values are indexed like the rows of sl2_fibre_H(r, x); the coefficient
    of the column at gamma is the alternating sum over defect-set
    subcontainments divided by (-alpha)^{#D(gamma)}.
    """
    wd = _context(r)
    rs = wd.rs
    target = rs.identity() if x == "id" else rs.simple_reflection(1)
    ids = wd.fibres.get(target, [])
    if len(values) != len(ids):
        raise ValueError("need one value per fibre gallery")
    dsets = [wd.stats[g].defects for g in ids]
    out = []
    for gi, dg in enumerate(dsets):
        acc = Polynomial.zero(1)
        for di, dd in enumerate(dsets):
            if dd <= dg:
                acc = acc + values[di].scale((-1) ** len(dd))
        q = divide_by_root_power(acc, ALPHA, len(dg))
        if q is None:
            return None
        out.append(q.scale((-1) ** len(dg)))
    return out


def sl2_glue(r: int, nu: list[Polynomial], sigma: list[Polynomial]) -> bool:
    """Whether fibre members glue to a class on the whole space.

    nu lives on the galleries ending at the identity, sigma on those ending
    at the reflection (both in fibre row order); gluing holds exactly when
    corresponding coefficient vectors agree modulo alpha under end folding.
    The verdict is cross-checked against total-space membership of the glued
    function.
    """
    wd = _context(r)
    rs = wd.rs
    a = fibre_coefficients(r, "id", nu)
    b = fibre_coefficients(r, "s", sigma)
    if a is None or b is None:
        raise ValueError("inputs must be members of their fibre modules")
    id_ids = wd.fibres[rs.identity()]
    s_ids = wd.fibres[rs.simple_reflection(1)]
    pos_in_id = {g: k for k, g in enumerate(id_ids)}
    glued = True
    for k, g in enumerate(s_ids):
        folded = wd.fold(g, (1,))
        diff = a[pos_in_id[folded]] - b[k]
        if divide_by_root_power(diff, ALPHA, 1) is None:
            glued = False
            break

    combined = []
    value_at = {}
    for k, g in enumerate(id_ids):
        value_at[g] = nu[k]
    for k, g in enumerate(s_ids):
        value_at[g] = sigma[k]
    for g in wd.lex_order:
        combined.append(value_at[g])
    total, _ = sl2_member(r, combined)
    if total != glued:
        raise SL2CheckError("gluing congruence disagrees with total membership")
    return glued


def omega_permutation(r: int) -> list[int]:
    """The involution reversing the word: position i load-bearing after the
    flip exactly when position r+1-i was load-bearing before."""
    wd, order, jsets = _lex_jsets(r)
    by_jset = {js: k for k, js in enumerate(jsets)}
    out = []
    for js in jsets:
        flipped = frozenset(r + 1 - i for i in js)
        out.append(by_jset[flipped])
    return out


def sl2_omega_check(r: int) -> bool:
    """Equivariance of E and H under the word-reversing involution."""
    om = omega_permutation(r)
    for k, m in enumerate(om):
        if om[m] != k:
            raise SL2CheckError("omega is not an involution")
    e = sl2_E(r)
    h = sl2_H(r)
    for (i, j) in set(e.entries) | {(om[i], om[j]) for (i, j) in e.entries}:
        lhs = e.entries.get((om[i], om[j]))
        rhs = e.entries.get((i, j))
        if (lhs is None) != (rhs is None) or (lhs is not None and lhs != rhs):
            raise SL2CheckError(f"E is not omega-equivariant at ({i}, {j})")
    for (i, j) in set(h.entries) | {(om[i], om[j]) for (i, j) in h.entries}:
        lhs = h.entries.get((om[i], om[j]))
        rhs = h.entries.get((i, j))
        if (lhs is None) != (rhs is None) or (lhs is not None and lhs != rhs):
            raise SL2CheckError(f"H is not omega-equivariant at ({i}, {j})")
    return True


def mixed_pairing_matrix(r: int) -> list[list[Polynomial]]:
    """The symmetric base-change matrix E D^{-1} tE between the basis and its
    Poincare dual; entries must be polynomials.

    D is the diagonal of inverse full-space Euler classes, so the (gamma,
    gamma') entry is the sum over common lower galleries delta of
    E[gamma, delta] * Eu(delta) * E[gamma', delta].
    """
    wd, order, jsets = _lex_jsets(r)
    n = 2**r
    e = sl2_E(r)
    zero = RationalFunction.zero(1)
    acc = [[zero for _ in range(n)] for _ in range(n)]
    cols: dict[int, list[tuple[int, RationalFunction]]] = {}
    for (gi, di), v in e.entries.items():
        cols.setdefault(di, []).append((gi, v))
    for di, jd in enumerate(jsets):
        eu = RationalFunction(full_euler_class(r, len(jd)))
        holders = cols.get(di, ())
        for a, va in holders:
            va_eu = va * eu
            for b, vb in holders:
                acc[a][b] = acc[a][b] + va_eu * vb
    out = []
    for a in range(n):
        row = []
        for b in range(n):
            p = acc[a][b].as_polynomial()
            if p is None:
                raise SL2CheckError("mixed pairing matrix has a non-polynomial entry")
            row.append(p)
        out.append(row)
    for a in range(n):
        for b in range(n):
            if out[a][b] != out[b][a]:
                raise SL2CheckError("mixed pairing matrix is not symmetric")
    return out


def mirror_check(r: int) -> bool:
    """H* equals H with rows and columns reversed and alpha negated."""
    h = sl2_H(r)
    hstar = sl2_Hstar(r)
    n = 2**r
    neg = Polynomial.from_root((-1,))
    for i in range(n):
        for j in range(n):
            hv = h.entries.get((n - 1 - i, n - 1 - j))
            sv = hstar.entries.get((i, j))
            if hv is None and sv is None:
                continue
            if hv is None or sv is None:
                raise SL2CheckError(f"mirror support mismatch at ({i}, {j})")
            k = hv.degree()
            flipped = Polynomial.monomial(1, (k,), hv.coefficient((k,)) * Fraction((-1) ** k))
            if flipped != sv:
                raise SL2CheckError(f"mirror value mismatch at ({i}, {j})")
    return True
