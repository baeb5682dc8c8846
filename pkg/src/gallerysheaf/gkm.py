"""The general congruence engine over the gallery set of an arbitrary word.

A class in the equivariant cohomology of the total space or of a fibre is
seen only through its values at galleries: a pointwise polynomial function.
The engine provides the Euler-class diagonals, the explicit bases of the
per-root slice modules obtained from the rank-one theory transported along
wall-preserving classes, and the two families of divisibility congruences
(containment and reverse containment) that cut out restriction images.
Every membership test runs all available criteria and insists they agree.
"""

from __future__ import annotations

from dataclasses import dataclass

from gallerysheaf.galleries import WordData
from gallerysheaf.rootsys import RootSystem, Vector, WeylElement
from gallerysheaf.symalg import Polynomial, divide_by_root_power


class CongruenceCheckError(AssertionError):
    """Two membership criteria that must agree disagreed."""


@dataclass
class PointwiseFunction:
    """A map from a finite gallery set to polynomials.

    domain holds gallery indices into wd.galleries; values align with it.
    """

    wd: WordData
    domain: tuple[int, ...]
    values: list[Polynomial]

    def __post_init__(self):
        assert len(self.domain) == len(self.values)
        self._pos = {g: k for k, g in enumerate(self.domain)}

    @classmethod
    def zero(cls, wd: WordData, domain) -> "PointwiseFunction":
        rank = wd.rs.rank
        domain = tuple(domain)
        return cls(wd, domain, [Polynomial.zero(rank) for _ in domain])

    @classmethod
    def constant(cls, wd: WordData, domain, c=1) -> "PointwiseFunction":
        rank = wd.rs.rank
        domain = tuple(domain)
        return cls(wd, domain, [Polynomial.constant(rank, c) for _ in domain])

    @classmethod
    def on_all(cls, wd: WordData, values) -> "PointwiseFunction":
        return cls(wd, tuple(range(len(wd.galleries))), list(values))

    def value_at(self, g: int) -> Polynomial:
        return self.values[self._pos[g]]

    def supports(self, g: int) -> bool:
        return g in self._pos

    def __add__(self, other: "PointwiseFunction") -> "PointwiseFunction":
        assert self.domain == other.domain
        return PointwiseFunction(
            self.wd, self.domain, [a + b for a, b in zip(self.values, other.values)]
        )

    def __sub__(self, other: "PointwiseFunction") -> "PointwiseFunction":
        assert self.domain == other.domain
        return PointwiseFunction(
            self.wd, self.domain, [a - b for a, b in zip(self.values, other.values)]
        )

    def scale(self, p: Polynomial) -> "PointwiseFunction":
        return PointwiseFunction(self.wd, self.domain, [v * p for v in self.values])

    def pointwise_mul(self, other: "PointwiseFunction") -> "PointwiseFunction":
        assert self.domain == other.domain
        return PointwiseFunction(
            self.wd, self.domain, [a * b for a, b in zip(self.values, other.values)]
        )

    def restrict(self, subdomain) -> "PointwiseFunction":
        subdomain = tuple(subdomain)
        return PointwiseFunction(self.wd, subdomain, [self.value_at(g) for g in subdomain])

    def is_zero(self) -> bool:
        return all(v.is_zero() for v in self.values)

    def homogeneous_degree(self) -> int | None:
        """Common total degree of all nonzero values, None if mixed."""
        degs = set()
        for v in self.values:
            if not v.is_zero():
                if not v.is_homogeneous():
                    return None
                degs.add(v.degree())
        if len(degs) > 1:
            return None
        return degs.pop() if degs else 0


# -- Euler-class diagonals -----------------------------------------------------


def diag_euler(wd: WordData, g: int) -> tuple[Polynomial, Polynomial, Polynomial]:
    """(full, cell, dual) Euler-class diagonal values at one gallery.

    full is the product of all walls (the tangent weights at the fixed
    point), cell the product of the load-bearing walls, and dual the product
    of the remaining walls; full = cell * dual.
    """
    rank = wd.rs.rank
    st = wd.stats[g]
    full = Polynomial.one(rank)
    cell = Polynomial.one(rank)
    dual = Polynomial.one(rank)
    for i, b in enumerate(st.walls, start=1):
        form = Polynomial.from_root(b)
        full = full * form
        if i in st.load_bearing:
            cell = cell * form
        else:
            dual = dual * form
    return full, cell, dual


def d_weight(rs: RootSystem, x: WeylElement) -> Polynomial:
    """Product of the positive roots alpha with s_alpha x < x."""
    out = Polynomial.one(rs.rank)
    for a in rs.left_inversions(x):
        out = out * Polynomial.from_root(a)
    return out


# -- per-root slice modules ----------------------------------------------------


@dataclass
class AlphaSliceBasis:
    """Explicit basis of the alpha-slice module over one endpoint.

    One basis element per gallery of the fibre: supported inside the
    gallery's wall-preserving class, with value alpha^{#D_alpha(gamma)}
    exactly on the defect-slice supersets and zero elsewhere.
    """

    wd: WordData
    x: WeylElement
    alpha: Vector
    elements: list[tuple[int, PointwiseFunction, int]]  # (gallery, element, degree)

    def rank(self) -> int:
        return len(self.elements)

    def degrees(self) -> list[int]:
        return [d for _, _, d in self.elements]


_BXALPHA_CACHE: dict[tuple, AlphaSliceBasis] = {}


def bxalpha_basis(wd: WordData, x: WeylElement, alpha: Vector) -> AlphaSliceBasis:
    alpha = tuple(alpha)
    key = (wd.rs.cartan_type, wd.rs.rank, wd.word, x.matrix, alpha)
    cached = _BXALPHA_CACHE.get(key)
    if cached is not None:
        return cached
    fibre = wd.fibres.get(x)
    if not fibre:
        raise ValueError("empty fibre")
    rank = wd.rs.rank
    form = Polynomial.from_root(alpha)
    fibre_set = set(fibre)
    elements = []
    for cls in wd.classes(alpha):
        cf = [g for g in cls if g in fibre_set]
        for g in cf:
            dg = set(wd.d_alpha(g, alpha))
            val = form ** len(dg)
            values = []
            for h in fibre:
                if h in cf and dg <= set(wd.d_alpha(h, alpha)):
                    values.append(val)
                else:
                    values.append(Polynomial.zero(rank))
            elements.append((g, PointwiseFunction(wd, tuple(fibre), values), len(dg)))
    order = {g: k for k, g in enumerate(fibre)}
    elements.sort(key=lambda t: order[t[0]])
    basis = AlphaSliceBasis(wd, x, alpha, elements)
    assert basis.rank() == len(fibre)
    _BXALPHA_CACHE[key] = basis
    return basis


def _slice_congruence_holds(
    wd: WordData,
    f: PointwiseFunction,
    alpha: Vector,
    members: list[int],
    use_defects: bool,
    reverse: bool,
    extra_power: int = 0,
) -> bool:
    """One family of divisibility congruences over a gallery subset.

    For each gallery of the subset, sums the signed values over the
    galleries of its class whose J- or D-slice is contained in (or contains,
    with reverse) its own, and tests divisibility by the root power given by
    the slice statistics; extra_power shifts every modulus.
    """
    alpha = tuple(alpha)
    form = Polynomial.from_root(alpha)
    member_set = set(members)
    cls_of = wd.class_index(alpha)
    classes = wd.classes(alpha)
    for g in members:
        m, j, d = wd.slices(alpha)[g]
        own = set(d if use_defects else j)
        acc = Polynomial.zero(wd.rs.rank)
        for h in classes[cls_of[g]]:
            if h not in member_set:
                continue
            hm, hj, hd = wd.slices(alpha)[h]
            other = set(hd if use_defects else hj)
            ok = own <= other if reverse else other <= own
            if ok:
                acc = acc + f.value_at(h).scale((-1) ** len(other))
        if use_defects:
            power = (len(m) - 1 - len(own)) if reverse else len(own)
        else:
            power = (len(m) - len(own)) if reverse else len(own)
        power += extra_power
        if power > 0 and divide_by_root_power(acc, form, power) is None:
            return False
    return True


def bxalpha_coordinates(
    wd: WordData, f: PointwiseFunction, x: WeylElement, alpha: Vector
) -> list[Polynomial] | None:
    """Coordinates of f over bxalpha_basis, by triangular back-substitution
    within each class (defect-slice containment orders the support)."""
    alpha = tuple(alpha)
    basis = bxalpha_basis(wd, x, alpha)
    form = Polynomial.from_root(alpha)
    fibre = list(f.domain)
    residual = list(f.values)
    pos = {g: k for k, g in enumerate(fibre)}
    coords: dict[int, Polynomial] = {}
    order = sorted(
        range(len(basis.elements)),
        key=lambda k: (len(wd.d_alpha(basis.elements[k][0], alpha)), basis.elements[k][0]),
    )
    for k in order:
        g, element, deg = basis.elements[k]
        q = divide_by_root_power(residual[pos[g]], form, deg)
        if q is None:
            return None
        coords[k] = q
        if not q.is_zero():
            for h, v in zip(element.domain, element.values):
                residual[pos[h]] = residual[pos[h]] - q * v
    if any(not v.is_zero() for v in residual):
        return None
    return [coords[k] for k in range(len(basis.elements))]


def bxalpha_member(wd: WordData, f: PointwiseFunction, x: WeylElement, alpha: Vector) -> bool:
    """Membership in the alpha-slice module over x; three criteria must agree:
    the defect-containment congruences, their reverse-containment duals, and
    exact expressibility over the explicit basis."""
    alpha = tuple(alpha)
    fibre = wd.fibres[x]
    assert tuple(f.domain) == tuple(fibre), "function must live on the fibre"
    by_containment = _slice_congruence_holds(wd, f, alpha, fibre, True, False)
    by_reverse = _slice_congruence_holds(wd, f, alpha, fibre, True, True)
    by_basis = bxalpha_coordinates(wd, f, x, alpha) is not None
    if not (by_containment == by_reverse == by_basis):
        raise CongruenceCheckError(
            f"slice membership criteria disagree at x={wd.rs.describe(x)}, alpha={alpha}: "
            f"containment={by_containment}, reverse={by_reverse}, basis={by_basis}"
        )
    return by_containment


def htbs1_member(wd: WordData, f: PointwiseFunction) -> bool:
    """Total-space membership: for every positive root and gallery, the
    signed class sum over load-bearing-slice subcontainments is divisible by
    the root to the slice size; cross-checked against the reverse family."""
    domain = tuple(range(len(wd.galleries)))
    assert tuple(f.domain) == domain, "function must live on the full gallery set"
    verdict = True
    for alpha in wd.rs.positive_roots:
        if not _slice_congruence_holds(wd, f, alpha, list(domain), False, False):
            verdict = False
            break
    dual = True
    for alpha in wd.rs.positive_roots:
        if not _slice_congruence_holds(wd, f, alpha, list(domain), False, True):
            dual = False
            break
    if verdict != dual:
        raise CongruenceCheckError(
            "the containment and reverse-containment membership families disagree"
        )
    return verdict


def total_membership_congruences(wd: WordData):
    """The containment congruence family over the full gallery set, as
    slice-solver conditions: for each positive root and gallery, the signed
    sum over class members with smaller load-bearing slice must vanish
    modulo the root to the slice size."""
    from gallerysheaf.gradedlinalg import Congruence

    congs = []
    n = len(wd.galleries)
    for alpha in wd.rs.positive_roots:
        form = Polynomial.from_root(alpha)
        cls_of = wd.class_index(alpha)
        classes = wd.classes(alpha)
        for g in range(n):
            own = set(wd.j_alpha(g, alpha))
            if not own:
                continue
            support = []
            for h in classes[cls_of[g]]:
                if set(wd.j_alpha(h, alpha)) <= own:
                    support.append((h, (-1) ** len(wd.j_alpha(h, alpha))))
            congs.append(Congruence(tuple(support), form, len(own)))
    return congs


def bend_divisor_class(wd: WordData, positions) -> PointwiseFunction:
    """Restriction of the product of bend divisors at the given positions:
    the value at a gallery bending at all of them is the product of its
    walls there, and zero at every other gallery.  These products span the
    restriction image and are the cheap explicit classes used by the
    verification sweeps."""
    positions = sorted(set(positions))
    rank = wd.rs.rank
    values = []
    for g, st in enumerate(wd.stats):
        bits = wd.galleries[g].bits
        if any(bits[i - 1] for i in positions):
            values.append(Polynomial.zero(rank))
            continue
        val = Polynomial.one(rank)
        for i in positions:
            val = val * Polynomial.from_root(st.walls[i - 1])
        values.append(val)
    return PointwiseFunction.on_all(wd, values)
