"""Fibre modules over Weyl group elements: recursive bases and fold maps.

The module of classes over one endpoint x is the intersection of all
per-root slice modules.  Its basis is built by recursion on the word: the
galleries over x split along the last letter into galleries of the truncated
word over x and over sx (reflection at the last wall), and a basis is
assembled from a truncated basis over the lower endpoint together with lifts
across the wall, plus the root multiple of a truncated basis over the upper
endpoint.  Each basis element is indexed by a gallery, supported upward in
the fibre order, homogeneous of degree the gallery's defect count, and is
re-verified against every slice-membership oracle after construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from gallerysheaf.galleries import WordData
from gallerysheaf.gkm import (
    PointwiseFunction,
    bxalpha_basis,
    bxalpha_member,
    diag_euler,
    d_weight,
)
from gallerysheaf.gradedlinalg import CoordSpace, solve_affine
from gallerysheaf.rootsys import Vector, WeylElement
from gallerysheaf.symalg import (
    Polynomial,
    RationalFunction,
    divide_by_linear,
    divide_by_root_power,
    graded_monomials,
    poly_exact_div,
    ratfn_matrix_inverse,
    reduce_mod_linear,
)


class FibreCheckError(AssertionError):
    """A fibre-basis invariant or a fold-map property failed."""


@dataclass
class FibreElement:
    gallery: int
    degree: int
    func: PointwiseFunction  # on the fibre, in fibre order


@dataclass
class FibreBasis:
    """Basis of the module over endpoint x, ordered by (degree, fibre order)."""

    wd: WordData
    x: WeylElement
    elements: list[FibreElement]

    @property
    def gallery_order(self) -> list[int]:
        return self.wd.fibres[self.x]

    def rank(self) -> int:
        return len(self.elements)

    def degrees(self) -> list[int]:
        return [e.degree for e in self.elements]

    def graded_rank(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for e in self.elements:
            out[e.degree] = out.get(e.degree, 0) + 1
        return out

    def by_gallery(self, g: int) -> FibreElement:
        for e in self.elements:
            if e.gallery == g:
                return e
        raise KeyError(g)

    def value_matrix(self) -> list[list[Polynomial]]:
        """Rows indexed by fibre galleries, columns by basis elements."""
        fibre = self.gallery_order
        return [[e.func.value_at(g) for e in self.elements] for g in fibre]

    def coord_space(self) -> CoordSpace:
        return CoordSpace.over_generators(self.wd.rs.rank, self.degrees())


@dataclass
class RhoClass:
    """An element of a fibre module modulo a root: coordinates over the
    fibre basis, each reduced to its canonical representative."""

    basis: FibreBasis
    alpha: Vector
    coords: list[Polynomial]

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.coords)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, RhoClass)
            and self.basis is other.basis
            and self.alpha == other.alpha
            and self.coords == other.coords
        )


_FIBRE_CACHE: dict[tuple, FibreBasis] = {}


def _diag_value(wd: WordData, g: int) -> Polynomial:
    """The expected diagonal value: product of roots to their defect counts."""
    rank = wd.rs.rank
    out = Polynomial.one(rank)
    for i in wd.stats[g].defects:
        out = out * Polynomial.from_root(wd.stats[g].tilde_walls[i - 1])
    return out


def fibre_coordinates(basis: FibreBasis, f: PointwiseFunction) -> list[Polynomial] | None:
    """Exact coordinates of f over the basis by triangular back-substitution
    along the fibre order; None when f is not in the span over the ring."""
    wd = basis.wd
    fibre = basis.gallery_order
    pos = {g: k for k, g in enumerate(fibre)}
    residual = [f.value_at(g) for g in fibre]
    by_gallery = {e.gallery: e for e in basis.elements}
    coords_by_gallery: dict[int, Polynomial] = {}
    for g in fibre:
        e = by_gallery[g]
        val = residual[pos[g]]
        q = val
        for i in sorted(wd.stats[g].defects):
            root = wd.stats[g].tilde_walls[i - 1]
            q = divide_by_linear(q, Polynomial.from_root(root))
            if q is None:
                return None
        coords_by_gallery[g] = q
        if not q.is_zero():
            for h in fibre:
                residual[pos[h]] = residual[pos[h]] - q * e.func.value_at(h)
    if any(not v.is_zero() for v in residual):
        return None
    return [coords_by_gallery[e.gallery] for e in basis.elements]


def _extend_index(wd: WordData, gprime_bits: tuple, crossing: bool) -> int:
    return wd.index_of[gprime_bits + (crossing,)]


def _lift_solve(
    wdp: WordData,
    upper: WeylElement,
    alpha: Vector,
    fbar: PointwiseFunction,
    f_basis: FibreBasis,
    reverse_order: bool = False,
) -> tuple[PointwiseFunction, list[Polynomial]] | None:
    """Solve fbar = g + root*h with g in the fibre module over upper and h in
    the root-slice module; returns (g, coordinates of g) or None.

    The solve is one exact slice system at the degree of fbar; the unknown
    order is deterministic and can be reversed to confirm that the returned
    class modulo the root does not depend on the solution chosen.
    """
    rank = wdp.rs.rank
    d = fbar.homogeneous_degree()
    if d is None:
        raise ValueError("lift input must be homogeneous")
    if fbar.is_zero():
        zero = PointwiseFunction.zero(wdp, fbar.domain)
        return zero, [Polynomial.zero(rank) for _ in f_basis.elements]
    b_basis = bxalpha_basis(wdp, upper, alpha)
    form = Polynomial.from_root(alpha)
    space = CoordSpace.pointwise(rank, len(fbar.domain))
    cols = []
    labels = []
    for ei, e in enumerate(f_basis.elements):
        for m in graded_monomials(rank, d - e.degree):
            mono = Polynomial.monomial(rank, m)
            cols.append(space.to_slice_vector([v * mono for v in e.func.values], d))
            labels.append(("f", ei, m))
    for bi, (_, belem, bdeg) in enumerate(b_basis.elements):
        for m in graded_monomials(rank, d - 1 - bdeg):
            mono = Polynomial.monomial(rank, m) * form
            cols.append(space.to_slice_vector([v * mono for v in belem.values], d))
            labels.append(("b", bi, m))
    if reverse_order:
        cols.reverse()
        labels.reverse()
    target = space.to_slice_vector(list(fbar.values), d)
    if not cols:
        return None if any(c != 0 for c in target) else (
            PointwiseFunction.zero(wdp, fbar.domain),
            [Polynomial.zero(rank) for _ in f_basis.elements],
        )
    rows = [[col[r] for col in cols] for r in range(len(target))]
    sol = solve_affine(rows, target)
    if sol is None:
        return None
    g_coords = [Polynomial.zero(rank) for _ in f_basis.elements]
    for (kind, idx, m), c in zip(labels, sol):
        if kind == "f" and c:
            g_coords[idx] = g_coords[idx] + Polynomial.monomial(rank, m, c)
    g_vals = [Polynomial.zero(rank) for _ in fbar.domain]
    for ei, e in enumerate(f_basis.elements):
        if not g_coords[ei].is_zero():
            for k in range(len(g_vals)):
                g_vals[k] = g_vals[k] + g_coords[ei] * e.func.values[k]
    return PointwiseFunction(wdp, fbar.domain, g_vals), g_coords


def _last_wall_root(wd: WordData, x: WeylElement) -> tuple[Vector, int]:
    """The positive root of the last wall over x, and its sign as a wall."""
    letter = wd.word[-1]
    beta = x.act(tuple(-a for a in wd.rs.simple_roots[letter - 1]))
    sign = wd.rs.root_sign(beta)
    alpha = beta if sign > 0 else tuple(-a for a in beta)
    return alpha, sign


def fibre_basis(wd: WordData, x: WeylElement, check: bool = True) -> FibreBasis:
    """Basis of the fibre module over x, by recursion on the word."""
    key = (wd.rs.cartan_type, wd.rs.rank, wd.word, x.matrix)
    cached = _FIBRE_CACHE.get(key)
    if cached is not None:
        return cached
    rs = wd.rs
    rank = rs.rank
    fibre = wd.fibres.get(x)
    if not fibre:
        raise ValueError(f"no gallery ends at {rs.describe(x)}")

    if wd.r == 0:
        basis = FibreBasis(
            wd, x, [FibreElement(0, 0, PointwiseFunction.constant(wd, (0,)))]
        )
        _FIBRE_CACHE[key] = basis
        return basis

    alpha, _ = _last_wall_root(wd, x)
    form = Polynomial.from_root(alpha)
    s_alpha = rs.reflection(alpha)
    sx = s_alpha * x
    upper = x if rs.length(sx) < rs.length(x) else sx
    lower = sx if upper == x else x

    wdp = wd.prefix_data
    fibre_u = wdp.fibres.get(upper, [])
    fibre_l = wdp.fibres.get(lower, [])
    basis_u = fibre_basis(wdp, upper, check=check) if fibre_u else None
    basis_l = fibre_basis(wdp, lower, check=check) if fibre_l else None

    pos_x = {g: k for k, g in enumerate(fibre)}
    elements: list[FibreElement] = []

    def assemble(values_u: dict[int, Polynomial], values_l: dict[int, Polynomial]):
        """Values on the fibre of the full word from truncated components."""
        vals = []
        for g in fibre:
            bits = wd.galleries[g].bits
            gp = wdp.index_of[bits[:-1]]
            end = wdp.stats[gp].endpoint
            if end == upper:
                vals.append(values_u.get(gp, Polynomial.zero(rank)))
            else:
                vals.append(values_l.get(gp, Polynomial.zero(rank)))
        return PointwiseFunction(wd, tuple(fibre), vals)

    # part A: elements over the lower endpoint, paired with a lift upstairs
    if basis_l is not None:
        for e in basis_l.elements:
            fbar = fold_to(wdp, e.func, lower, upper, alpha)
            if basis_u is not None:
                lifted = _lift_solve(wdp, upper, alpha, fbar, basis_u)
                if lifted is None:
                    raise FibreCheckError(
                        "no lift across the last wall; the recursion invariant failed "
                        f"at word {wd.word}, endpoint {rs.describe(x)}"
                    )
                cprime, _ = lifted
                values_u = dict(zip(cprime.domain, cprime.values))
            else:
                values_u = {}
            values_l = dict(zip(e.func.domain, e.func.values))
            crossing = lower != x
            g_new = _extend_index(wd, wdp.galleries[e.gallery].bits, crossing)
            elements.append(FibreElement(g_new, e.degree, assemble(values_u, values_l)))

    # part B: root multiples of elements over the upper endpoint
    if basis_u is not None:
        for e in basis_u.elements:
            values_u = {g: v * form for g, v in zip(e.func.domain, e.func.values)}
            crossing = upper != x
            g_new = _extend_index(wd, wdp.galleries[e.gallery].bits, crossing)
            elements.append(FibreElement(g_new, e.degree + 1, assemble(values_u, {})))

    elements.sort(key=lambda e: (e.degree, pos_x[e.gallery]))
    basis = FibreBasis(wd, x, elements)
    if check:
        _check_basis_invariants(basis)
    _FIBRE_CACHE[key] = basis
    return basis


def _check_basis_invariants(basis: FibreBasis) -> None:
    wd = basis.wd
    rs = wd.rs
    fibre = basis.gallery_order
    if sorted(e.gallery for e in basis.elements) != sorted(fibre):
        raise FibreCheckError("basis elements do not biject with the fibre galleries")
    pos = {g: k for k, g in enumerate(fibre)}
    for e in basis.elements:
        st = wd.stats[e.gallery]
        if e.degree != len(st.defects):
            raise FibreCheckError(
                f"degree of the element at {wd.galleries[e.gallery].text} is not its defect count"
            )
        deg = e.func.homogeneous_degree()
        if deg is None or (deg != e.degree and not e.func.is_zero()):
            raise FibreCheckError("basis element is not homogeneous of its defect degree")
        if e.func.value_at(e.gallery) != _diag_value(wd, e.gallery):
            raise FibreCheckError("diagonal value differs from the defect-wall product")
        for g in fibre:
            if not e.func.value_at(g).is_zero():
                if g != e.gallery and not wd.fibre_lt(e.gallery, g):
                    raise FibreCheckError(
                        f"support of the element at {wd.galleries[e.gallery].text} "
                        "escapes below its gallery"
                    )
    for alpha in rs.positive_roots:
        for e in basis.elements:
            if not bxalpha_member(wd, e.func, basis.x, alpha):
                raise FibreCheckError(
                    f"basis element at {wd.galleries[e.gallery].text} fails the "
                    f"slice membership at root {alpha}"
                )


def fold_to(
    wd: WordData,
    f: PointwiseFunction,
    source: WeylElement,
    target: WeylElement,
    alpha: Vector,
) -> PointwiseFunction:
    """End folding along the alpha-wall, from functions on the source fibre
    to functions on the target fibre; galleries without an alpha-wall get
    zero (their class never reaches the source endpoint)."""
    alpha = tuple(alpha)
    rank = wd.rs.rank
    target_fibre = wd.fibres.get(target, [])
    vals = []
    for g in target_fibre:
        if wd.m_alpha(g, alpha):
            folded = wd.fold(g, alpha)
            vals.append(f.value_at(folded) if f.supports(folded) else Polynomial.zero(rank))
        else:
            vals.append(Polynomial.zero(rank))
    return PointwiseFunction(wd, tuple(target_fibre), vals)


def rho_down(basis: FibreBasis, f: PointwiseFunction, alpha: Vector) -> RhoClass:
    """The natural quotient map: coordinates of f over the basis, reduced
    modulo the root.  f must lie in the module."""
    alpha = tuple(alpha)
    coords = fibre_coordinates(basis, f)
    if coords is None:
        raise ValueError("function is not in the fibre module")
    form = Polynomial.from_root(alpha)
    return RhoClass(basis, alpha, [reduce_mod_linear(c, form) for c in coords])


def rho_fold(
    wd: WordData,
    f: PointwiseFunction,
    source: WeylElement,
    target: WeylElement,
    alpha: Vector,
    verify: bool = True,
) -> RhoClass:
    """The wall-crossing map from the module over the lower endpoint to the
    module over the upper endpoint modulo the root: fold the ends, then
    split the result as (module element) + root * (slice element) and take
    the class of the module part.  With verify the solve is repeated with
    the reversed unknown order and the two classes must agree."""
    alpha = tuple(alpha)
    rs = wd.rs
    if rs.reflection(alpha) * target != source:
        raise ValueError("endpoints are not joined by the given root")
    if rs.length(source) >= rs.length(target):
        raise ValueError("fold maps run from the lower endpoint to the upper one")
    basis_t = fibre_basis(wd, target)
    fbar = fold_to(wd, f, source, target, alpha)
    lifted = _lift_solve(wd, target, alpha, fbar, basis_t)
    if lifted is None:
        raise FibreCheckError("fold image does not split; the wall-map invariant failed")
    _, coords = lifted
    form = Polynomial.from_root(alpha)
    cls = RhoClass(basis_t, alpha, [reduce_mod_linear(c, form) for c in coords])
    if verify:
        lifted2 = _lift_solve(wd, target, alpha, fbar, basis_t, reverse_order=True)
        assert lifted2 is not None
        _, coords2 = lifted2
        cls2 = [reduce_mod_linear(c, form) for c in coords2]
        if cls.coords != cls2:
            raise FibreCheckError("fold class depends on the chosen lift")
    return cls


# -- kernel modules ------------------------------------------------------------


def _fibre_membership_congruences(wd: WordData, x: WeylElement):
    """Congruence families cutting the fibre module out of all pointwise
    functions on the fibre: the defect-containment family at every root."""
    from gallerysheaf.gradedlinalg import Congruence

    fibre = wd.fibres[x]
    pos = {g: k for k, g in enumerate(fibre)}
    congs = []
    for alpha in wd.rs.positive_roots:
        form = Polynomial.from_root(alpha)
        cls_of = wd.class_index(alpha)
        classes = wd.classes(alpha)
        for g in fibre:
            own = set(wd.d_alpha(g, alpha))
            support = []
            for h in classes[cls_of[g]]:
                if h in pos and set(wd.d_alpha(h, alpha)) <= own:
                    support.append((pos[h], (-1) ** len(wd.d_alpha(h, alpha))))
            if len(own) > 0:
                congs.append(Congruence(tuple(support), form, len(own)))
    return congs


def _fold_kernel_congruences(wd: WordData, x: WeylElement, alpha: Vector):
    """Congruences expressing that the fold image over the upper endpoint
    s_alpha x lies in root * (slice module): the defect-containment family
    with every modulus raised by one, pulled back along folding."""
    from gallerysheaf.gradedlinalg import Congruence

    alpha = tuple(alpha)
    form = Polynomial.from_root(alpha)
    upper = wd.rs.reflection(alpha) * x
    fibre_u = wd.fibres.get(upper, [])
    fibre_x = wd.fibres[x]
    pos_x = {g: k for k, g in enumerate(fibre_x)}
    congs = []
    cls_of = wd.class_index(alpha)
    classes = wd.classes(alpha)
    fibre_u_set = set(fibre_u)
    for g in fibre_u:
        own = set(wd.d_alpha(g, alpha))
        support = []
        for h in classes[cls_of[g]]:
            if h not in fibre_u_set or not (set(wd.d_alpha(h, alpha)) <= own):
                continue
            if not wd.m_alpha(h, alpha):
                continue  # fold undefined; the folded value is zero
            folded = wd.fold(h, alpha)
            support.append((pos_x[folded], (-1) ** len(wd.d_alpha(h, alpha))))
        congs.append(Congruence(tuple(support), form, len(own) + 1))
    return congs


def fibre_dual_basis(wd: WordData, x: WeylElement, max_degree: int | None = None):
    """Minimal generators of the intersection of the fold-map kernels over
    the roots pointing upward from x, inside the fibre module."""
    from gallerysheaf.gradedlinalg import minimal_generators, solve_slice, CoordSpace

    rs = wd.rs
    fibre = wd.fibres[x]
    congs = _fibre_membership_congruences(wd, x)
    for alpha in rs.positive_roots:
        sx = rs.reflection(alpha) * x
        if rs.length(sx) > rs.length(x) and wd.fibres.get(sx):
            congs.extend(_fold_kernel_congruences(wd, x, alpha))
    space = CoordSpace.pointwise(rs.rank, len(fibre))
    bound = wd.r if max_degree is None else max_degree
    return minimal_generators(lambda d: solve_slice(congs, space, d), space, bound)


def downward_kernel(wd: WordData, x: WeylElement, max_degree: int | None = None):
    """Minimal generators of the intersection of the natural-quotient
    kernels over the roots pointing downward from x, inside the fibre
    module; encoded independently of the basis via raised congruences."""
    from gallerysheaf.gradedlinalg import Congruence, minimal_generators, solve_slice, CoordSpace

    rs = wd.rs
    fibre = wd.fibres[x]
    pos = {g: k for k, g in enumerate(fibre)}
    congs = _fibre_membership_congruences(wd, x)
    down_roots = [a for a in rs.left_inversions(x)]
    for alpha in down_roots:
        form = Polynomial.from_root(alpha)
        cls_of = wd.class_index(tuple(alpha))
        classes = wd.classes(tuple(alpha))
        for g in fibre:
            own = set(wd.d_alpha(g, tuple(alpha)))
            support = []
            for h in classes[cls_of[g]]:
                if h in pos and set(wd.d_alpha(h, tuple(alpha))) <= own:
                    support.append((pos[h], (-1) ** len(wd.d_alpha(h, tuple(alpha)))))
            congs.append(Congruence(tuple(support), form, len(own) + 1))
    space = CoordSpace.pointwise(rs.rank, len(fibre))
    bound = (wd.r + rs.length(x)) if max_degree is None else max_degree
    return minimal_generators(lambda d: solve_slice(congs, space, d), space, bound)


def ey_symmetry_check(wd: WordData, x: WeylElement) -> list[list[Polynomial]]:
    """The symmetric pairing matrix of the fibre: with H the basis value
    matrix, E its exact inverse and the diagonal the full-space Euler class
    divided by the endpoint weight, E diag tE must be symmetric with
    polynomial entries.  Returns the matrix."""
    rs = wd.rs
    basis = fibre_basis(wd, x)
    fibre = basis.gallery_order
    n = len(fibre)
    h = [[RationalFunction(v) for v in row] for row in basis.value_matrix()]
    e = ratfn_matrix_inverse(h)
    dx = d_weight(rs, x)
    diag = []
    for g in fibre:
        full, _, _ = diag_euler(wd, g)
        q = poly_exact_div(full, dx)
        if q is None:
            raise FibreCheckError("full Euler class is not divisible by the endpoint weight")
        diag.append(RationalFunction(q))
    out = []
    for i in range(n):
        row = []
        for j in range(n):
            acc = RationalFunction.zero(rs.rank)
            for k in range(n):
                acc = acc + e[i][k] * diag[k] * e[j][k]
            p = acc.as_polynomial()
            if p is None:
                raise FibreCheckError(f"pairing entry ({i}, {j}) is not polynomial")
            row.append(p)
        out.append(row)
    for i in range(n):
        for j in range(n):
            if out[i][j] != out[j][i]:
                raise FibreCheckError("fibre pairing matrix is not symmetric")
    return out
