"""Degreewise exact linear algebra over the graded polynomial ring.

Modules of pointwise polynomial functions (and, more generally, modules of
coordinate vectors over free graded generators) are handled one degree slice
at a time: each slice is a finite-dimensional Q-vector space, congruence
conditions become exact linear conditions on slice coordinates, and minimal
homogeneous generators fall out of a graded Nakayama sweep.  No Groebner
machinery anywhere; everything is echelon forms over Q with deterministic
pivoting.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from gallerysheaf.symalg import (
    Polynomial,
    graded_monomials,
    reduce_mod_linear,
    to_pivot_coordinates,
    _pivot_index,
)


# -- exact Q matrix utilities ----------------------------------------------


def rref(rows: list[list[Fraction]]) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form; pivots are leftmost, rows scanned in order."""
    if not rows:
        return [], []
    ncols = len(rows[0])
    mat = [list(r) for r in rows if any(x != 0 for x in r)]
    pivots: list[int] = []
    row = 0
    for col in range(ncols):
        piv = next((r for r in range(row, len(mat)) if mat[r][col] != 0), None)
        if piv is None:
            continue
        mat[row], mat[piv] = mat[piv], mat[row]
        inv = Fraction(1) / mat[row][col]
        mat[row] = [x * inv for x in mat[row]]
        for r in range(len(mat)):
            if r != row and mat[r][col] != 0:
                f = mat[r][col]
                mat[r] = [a - f * b for a, b in zip(mat[r], mat[row])]
        pivots.append(col)
        row += 1
        if row == len(mat):
            break
    return mat[:row], pivots


def kernel_basis(rows: list[list[Fraction]], ncols: int) -> list[list[Fraction]]:
    """Basis of the solution space of the homogeneous system, one vector per
    free column, deterministic (identity on free coordinates)."""
    red, pivots = rref(rows)
    pivset = set(pivots)
    free = [c for c in range(ncols) if c not in pivset]
    basis = []
    for fc in free:
        v = [Fraction(0)] * ncols
        v[fc] = Fraction(1)
        for r, pc in zip(red, pivots):
            v[pc] = -r[fc]
        basis.append(v)
    return basis


def solve_affine(rows: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction] | None:
    """One exact solution of rows * x = rhs (free variables set to zero), or None."""
    if not rows:
        return [] if all(b == 0 for b in rhs) else None
    ncols = len(rows[0])
    aug = [list(r) + [b] for r, b in zip(rows, rhs)]
    red, pivots = rref(aug)
    for r, pc in zip(red, pivots):
        if pc == ncols:
            return None
    x = [Fraction(0)] * ncols
    for r, pc in zip(red, pivots):
        x[pc] = r[ncols]
    return x


def rank_of(rows: list[list[Fraction]]) -> int:
    _, pivots = rref(rows)
    return len(pivots)


class FactoredSystem:
    """A linear system factored once and solved for many right-hand sides.

    Keeps the row-reduced matrix together with the transformation applied to
    it, so each solve is a matrix-vector product plus consistency checks.
    """

    def __init__(self, rows: list[list[Fraction]], ncols: int, reverse: bool = False):
        self.ncols = ncols
        self.reverse = reverse
        m = len(rows)
        if reverse:
            rows = [list(reversed(r)) for r in rows]
        a = [list(r) for r in rows]
        t = [[Fraction(1 if i == j else 0) for j in range(m)] for i in range(m)]
        pivots: list[int] = []
        row = 0
        for col in range(ncols):
            piv = next((r for r in range(row, m) if a[r][col] != 0), None)
            if piv is None:
                continue
            a[row], a[piv] = a[piv], a[row]
            t[row], t[piv] = t[piv], t[row]
            inv = Fraction(1) / a[row][col]
            a[row] = [x * inv for x in a[row]]
            t[row] = [x * inv for x in t[row]]
            for r in range(m):
                if r != row and a[r][col] != 0:
                    f = a[r][col]
                    a[r] = [x - f * y for x, y in zip(a[r], a[row])]
                    t[r] = [x - f * y for x, y in zip(t[r], t[row])]
            pivots.append(col)
            row += 1
            if row == m:
                break
        self.a = a
        self.t = t
        self.pivots = pivots
        self.rank = row
        self.nrows = m

    @property
    def unique(self) -> bool:
        return self.rank == self.ncols

    def solve(self, rhs: list[Fraction]) -> list[Fraction] | None:
        b = [
            sum(self.t[i][k] * rhs[k] for k in range(self.nrows) if rhs[k] != 0)
            for i in range(self.nrows)
        ]
        for i in range(self.rank, self.nrows):
            if b[i] != 0:
                return None
        # free columns are fixed at zero, so each pivot reads off directly
        x = [Fraction(0)] * self.ncols
        for i, col in enumerate(self.pivots):
            x[col] = b[i]
        if self.reverse:
            x.reverse()
        return x


class _Echelon:
    """Incremental echelon of row vectors over Q, smallest-index pivoting."""

    def __init__(self, ncols: int):
        self.ncols = ncols
        self.rows: list[list[Fraction]] = []
        self.pivots: list[int] = []

    def reduce(self, v: list[Fraction]) -> list[Fraction]:
        v = list(v)
        for row, p in zip(self.rows, self.pivots):
            if v[p] != 0:
                f = v[p]
                v = [a - f * b for a, b in zip(v, row)]
        return v

    def insert(self, v: list[Fraction]) -> bool:
        """Reduce v and insert if independent; returns True when rank grew."""
        v = self.reduce(v)
        p = next((i for i, a in enumerate(v) if a != 0), None)
        if p is None:
            return False
        inv = Fraction(1) / v[p]
        v = [a * inv for a in v]
        for row in self.rows:
            if row[p] != 0:
                f = row[p]
                row[:] = [a - f * b for a, b in zip(row, v)]
        self.rows.append(v)
        self.pivots.append(p)
        return True

    @property
    def dim(self) -> int:
        return len(self.rows)


# -- modular fast path -------------------------------------------------------

MOD_PRIMES = (1_000_003, 999_983)


def rows_to_int_matrix(rows: list[list[Fraction]]) -> np.ndarray:
    """Scale each row by the lcm of its denominators; entries become Python ints."""
    out = []
    for r in rows:
        lcm = 1
        for a in r:
            d = a.denominator
            g = _gcd(lcm, d)
            lcm = lcm // g * d
        out.append([int(a * lcm) for a in r])
    return np.array(out, dtype=object) if out else np.zeros((0, 0), dtype=object)

def modular_rank(int_rows: np.ndarray, p: int) -> int:
    """Rank of an integer matrix over F_p (never more than the rank over Q)."""
    if int_rows.size == 0:
        return 0
    m = np.mod(int_rows.astype(object), p).astype(np.int64)
    nrows, ncols = m.shape
    rank = 0
    for col in range(ncols):
        piv = None
        for r in range(rank, nrows):
            if m[r, col] % p:
                piv = r
                break
        if piv is None:
            continue
        m[[rank, piv]] = m[[piv, rank]]
        inv = pow(int(m[rank, col]), p - 2, p)
        m[rank] = (m[rank] * inv) % p
        mask = m[:, col] % p != 0
        mask[rank] = False
        if mask.any():
            m[mask] = (m[mask] - np.outer(m[mask, col], m[rank])) % p
        rank += 1
        if rank == nrows:
            break
    return rank


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return a


# -- graded coordinate spaces -------------------------------------------------


@dataclass(frozen=True)
class CoordSpace:
    """Coordinates for a graded module: value i has degree offset offsets[i],
    and is canonically reduced modulo the linear form moduli[i] when set."""

    rank: int
    offsets: tuple[int, ...]
    moduli: tuple[Polynomial | None, ...]

    @classmethod
    def pointwise(cls, rank: int, npoints: int) -> "CoordSpace":
        return cls(rank, (0,) * npoints, (None,) * npoints)

    @classmethod
    def over_generators(cls, rank: int, degrees, modulus: Polynomial | None = None) -> "CoordSpace":
        degs = tuple(degrees)
        return cls(rank, degs, (modulus,) * len(degs))

    @property
    def ncoords(self) -> int:
        return len(self.offsets)

    def coordinate_monomials(self, i: int, d: int) -> list[tuple[int, ...]]:
        di = d - self.offsets[i]
        monos = graded_monomials(self.rank, di)
        mod = self.moduli[i]
        if mod is not None:
            p = _pivot_index(mod)
            monos = [e for e in monos if e[p] == 0]
        return monos

    def slice_index(self, d: int) -> list[tuple[int, tuple[int, ...]]]:
        out = []
        for i in range(self.ncoords):
            for e in self.coordinate_monomials(i, d):
                out.append((i, e))
        return out

    def canonicalize(self, element: list[Polynomial]) -> list[Polynomial]:
        out = []
        for i, p in enumerate(element):
            mod = self.moduli[i]
            out.append(reduce_mod_linear(p, mod) if mod is not None else p)
        return out

    def to_slice_vector(self, element: list[Polynomial], d: int) -> list[Fraction]:
        element = self.canonicalize(element)
        vec = []
        for i, p in enumerate(element):
            comp = p.homogeneous_component(d - self.offsets[i])
            if comp != p:
                raise ValueError("element is not homogeneous of the requested degree")
            for e in self.coordinate_monomials(i, d):
                vec.append(comp.coefficient(e))
        return vec

    def from_slice_vector(self, vec: list[Fraction], d: int) -> list[Polynomial]:
        out = []
        k = 0
        for i in range(self.ncoords):
            terms = {}
            for e in self.coordinate_monomials(i, d):
                c = vec[k]
                k += 1
                if c:
                    terms[e] = Fraction(c)
            out.append(Polynomial(self.rank, terms))
        assert k == len(vec)
        return out

    def times_poly(self, element: list[Polynomial], p: Polynomial) -> list[Polynomial]:
        return self.canonicalize([v * p for v in element])


# -- congruence slices --------------------------------------------------------


@dataclass(frozen=True)
class Congruence:
    """A signed sum of coordinates required to vanish modulo root^power."""

    support: tuple[tuple[int, int], ...]  # (coordinate index, sign)
    root: Polynomial
    power: int


@dataclass
class GradedSliceBasis:
    degree: int
    index: list[tuple[int, tuple[int, ...]]]
    vectors: list[list[Fraction]]

    @property
    def dimension(self) -> int:
        return len(self.vectors)


def congruence_rows(
    congruences: list[Congruence], space: CoordSpace, d: int
) -> tuple[list[list[Fraction]], list[tuple[int, tuple[int, ...]]]]:
    """Exact linear conditions on the degree-d slice cut out by the congruences."""
    index = space.slice_index(d)
    pos_of = {key: n for n, key in enumerate(index)}
    rows: list[list[Fraction]] = []
    pivot_cache: dict[tuple[Polynomial, tuple[int, ...]], Polynomial] = {}
    for cong in congruences:
        if cong.power <= 0:
            continue
        p = _pivot_index(cong.root)
        cond: dict[tuple[int, ...], list[Fraction]] = {}
        ncols = len(index)
        for ci, sign in cong.support:
            for e in space.coordinate_monomials(ci, d):
                key = (cong.root, e)
                pc = pivot_cache.get(key)
                if pc is None:
                    pc = to_pivot_coordinates(Polynomial.monomial(space.rank, e), cong.root)
                    pivot_cache[key] = pc
                col = pos_of[(ci, e)]
                for ue, c in pc.terms.items():
                    if ue[p] >= cong.power:
                        continue
                    row = cond.get(ue)
                    if row is None:
                        row = [Fraction(0)] * ncols
                        cond[ue] = row
                    row[col] += sign * c
        for ue in sorted(cond):
            rows.append(cond[ue])
    return rows, index


def solve_slice(congruences: list[Congruence], space: CoordSpace, d: int) -> GradedSliceBasis:
    """Q-basis of the degree-d functions satisfying every congruence."""
    rows, index = congruence_rows(congruences, space, d)
    vectors = kernel_basis(rows, len(index))
    return GradedSliceBasis(degree=d, index=index, vectors=vectors)


# -- minimal generators and membership ----------------------------------------


@dataclass
class Generator:
    degree: int
    element: list[Polynomial]


@dataclass
class GeneratorSet:
    space: CoordSpace
    generators: list[Generator]

    def degrees(self) -> list[int]:
        return [g.degree for g in self.generators]

    def counts_by_degree(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for g in self.generators:
            out[g.degree] = out.get(g.degree, 0) + 1
        return out

    def graded_rank_poly(self) -> dict[int, int]:
        return self.counts_by_degree()


def minimal_generators(
    slice_fn,
    space: CoordSpace,
    max_degree: int,
    check_stable: bool = True,
) -> GeneratorSet:
    """Extract minimal homogeneous generators of the graded module whose
    degree-d slices are produced by slice_fn(d).

    New generators in degree d are a complement of A_1 * (lower slices)
    inside the degree-d slice; with check_stable an extra slice at
    max_degree + 1 is solved and must produce no new generators.
    """
    gens: list[Generator] = []
    top = max_degree + (1 if check_stable else 0)
    for d in range(top + 1):
        index = space.slice_index(d)
        ech = _Echelon(len(index))
        for g in gens:
            for m in graded_monomials(space.rank, d - g.degree):
                v = space.to_slice_vector(
                    space.times_poly(g.element, Polynomial.monomial(space.rank, m)), d
                )
                ech.insert(v)
        basis = slice_fn(d)
        assert basis.degree == d
        for vec in basis.vectors:
            if ech.insert(list(vec)):
                new_vec = ech.rows[-1]
                if d > max_degree:
                    raise AssertionError(
                        f"module has a generator above the declared bound {max_degree}"
                    )
                gens.append(Generator(d, space.from_slice_vector(new_vec, d)))
    return GeneratorSet(space, gens)


def membership(
    f: list[Polynomial], gens: GeneratorSet, space: CoordSpace | None = None
) -> list[Polynomial] | None:
    """Exact coordinates of f over the generators, or None when not in the span."""
    space = space or gens.space
    f = space.canonicalize(f)
    degrees = set()
    for i, p in enumerate(f):
        for e in p.terms:
            degrees.add(sum(e) + space.offsets[i])
    coords = [Polynomial.zero(space.rank) for _ in gens.generators]
    for d in sorted(degrees):
        comp = [p.homogeneous_component(d - space.offsets[i]) for i, p in enumerate(f)]
        index = space.slice_index(d)
        cols = []
        labels = []
        for gi, g in enumerate(gens.generators):
            for m in graded_monomials(space.rank, d - g.degree):
                cols.append(
                    space.to_slice_vector(
                        space.times_poly(g.element, Polynomial.monomial(space.rank, m)), d
                    )
                )
                labels.append((gi, m))
        target = space.to_slice_vector(comp, d)
        if not cols:
            if any(x != 0 for x in target):
                return None
            continue
        rows = [[cols[c][r] for c in range(len(cols))] for r in range(len(index))]
        sol = solve_affine(rows, target)
        if sol is None:
            return None
        for (gi, m), c in zip(labels, sol):
            if c:
                coords[gi] = coords[gi] + Polynomial.monomial(space.rank, m, c)
    return coords
