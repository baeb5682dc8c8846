"""Sheaves on the Bruhat graph: assembly, sections, purity, decomposition.

The sheaf attached to a word has the fibre modules as stalks over the
endpoints of its galleries, edge modules equal to the upper stalk modulo the
edge root, the canonical quotient as the upper restriction and the fold map
as the lower one.  Everything downstream works in generator coordinates: a
GraphSheaf records only stalk generator degrees and the lower edge matrices,
which is enough to solve for sections degreewise, test the purity axioms,
build the canonical indecomposable pure sheaves top-down, and account for a
decomposition by graded stalk ranks.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from gallerysheaf.galleries import WordData
from gallerysheaf.gkm import (
    PointwiseFunction,
    htbs1_member,
    total_membership_congruences,
)
from gallerysheaf.gradedlinalg import (
    CoordSpace,
    GeneratorSet,
    GradedSliceBasis,
    Generator,
    congruence_rows,
    kernel_basis,
    minimal_generators,
    solve_affine,
    solve_slice,
)
from gallerysheaf.fibres import FibreBasis, fibre_basis, rho_fold
from gallerysheaf.rootsys import BruhatGraph, RootSystem, Vector, WeylElement, bruhat_graph
from gallerysheaf.symalg import (
    Polynomial,
    _pivot_index,
    graded_monomials,
    reduce_mod_linear,
    to_pivot_coordinates,
)


class SheafCheckError(AssertionError):
    """A sheaf-level structural statement failed."""


_GRAPH_CACHE: dict[tuple[str, int], BruhatGraph] = {}


def cached_bruhat_graph(rs: RootSystem) -> BruhatGraph:
    key = (rs.cartan_type, rs.rank)
    g = _GRAPH_CACHE.get(key)
    if g is None:
        g = bruhat_graph(rs)
        _GRAPH_CACHE[key] = g
    return g


@dataclass
class GraphEdge:
    """One arrow of the graph with its lower restriction in coordinates.

    matrix[z][h] is the coefficient of upper generator h in the image of
    lower generator z, canonically reduced modulo the edge root; the upper
    restriction is always the canonical quotient and is not stored.
    """

    upper: WeylElement
    lower: WeylElement
    root: Vector
    matrix: list[list[Polynomial]]


@dataclass
class GraphSheaf:
    """Free graded stalks over a vertex set plus lower edge matrices."""

    rs: RootSystem
    vertices: list[WeylElement]  # support, sorted by (length, group index)
    degrees: dict[WeylElement, list[int]]
    edges: list[GraphEdge]

    def stalk_rank(self, x: WeylElement) -> dict[int, int]:
        out: dict[int, int] = {}
        for d in self.degrees.get(x, []):
            out[d] = out.get(d, 0) + 1
        return out

    def layout(self, subset=None) -> tuple[list[WeylElement], CoordSpace, dict[WeylElement, int]]:
        """Coordinate space of the direct sum of stalks over the subset."""
        verts = [v for v in self.vertices if subset is None or v in subset]
        offsets: list[int] = []
        starts: dict[WeylElement, int] = {}
        for v in verts:
            starts[v] = len(offsets)
            offsets.extend(self.degrees[v])
        space = CoordSpace(self.rs.rank, tuple(offsets), (None,) * len(offsets))
        return verts, space, starts


def _edge_rows(
    sheaf: GraphSheaf,
    space: CoordSpace,
    starts: dict[WeylElement, int],
    in_set,
    d: int,
    boundary_kernel: bool = True,
) -> list[list[Fraction]]:
    """Slice conditions at degree d for sections over a vertex subset.

    For each edge with both endpoints in the subset the canonical image of
    the upper coordinates must agree with the matrix image of the lower
    coordinates modulo the edge root; with boundary_kernel, edges whose
    upper endpoint leaves the subset force the matrix image of the lower
    coordinates to vanish (the outside value being held at zero).
    """
    index = space.slice_index(d)
    pos_of = {key: k for k, key in enumerate(index)}
    ncols = len(index)
    rows: list[list[Fraction]] = []
    for edge in sheaf.edges:
        has_u = edge.upper in starts and in_set(edge.upper)
        has_l = edge.lower in starts and in_set(edge.lower)
        if not has_l or (not has_u and not boundary_kernel):
            continue
        form = Polynomial.from_root(edge.root)
        p = _pivot_index(form)
        n_up = len(sheaf.degrees[edge.upper])
        cond: dict[tuple[int, tuple[int, ...]], list[Fraction]] = {}

        def add(h: int, poly: Polynomial, col: int):
            pc = to_pivot_coordinates(poly, form)
            for ue, c in pc.terms.items():
                if ue[p] >= 1:
                    continue
                key = (h, ue)
                row = cond.get(key)
                if row is None:
                    row = [Fraction(0)] * ncols
                    cond[key] = row
                row[col] += c

        if has_u:
            su = starts[edge.upper]
            for h in range(n_up):
                off = sheaf.degrees[edge.upper][h]
                for m in graded_monomials(space.rank, d - off):
                    col = pos_of[(su + h, m)]
                    add(h, Polynomial.monomial(space.rank, m), col)
        sl = starts[edge.lower]
        for z, zdeg in enumerate(sheaf.degrees[edge.lower]):
            for m in graded_monomials(space.rank, d - zdeg):
                col = pos_of[(sl + z, m)]
                mono = Polynomial.monomial(space.rank, m)
                for h in range(n_up):
                    entry = edge.matrix[z][h]
                    if not entry.is_zero():
                        add(h, -(entry * mono), col)
        for key in sorted(cond):
            rows.append(cond[key])
    return rows


def sections_slice(
    sheaf: GraphSheaf, subset, d: int, boundary_kernel: bool = True
) -> GradedSliceBasis:
    """Q-basis of degree-d sections over the subset (full subgraph), with
    zero boundary conditions on upward-leaving edges when requested."""
    subset = set(subset)
    verts, space, starts = sheaf.layout(subset)
    rows = _edge_rows(sheaf, space, starts, lambda v: v in subset, d, boundary_kernel)
    index = space.slice_index(d)
    return GradedSliceBasis(d, index, kernel_basis(rows, len(index)))


# -- the sheaf of a word ---------------------------------------------------------


@dataclass
class MomentSheaf:
    """The word's sheaf: fibre-module stalks and fold-map edge matrices."""

    wd: WordData
    support: list[WeylElement]
    stalks: dict[WeylElement, FibreBasis]
    graph: GraphSheaf
    edges: list[GraphEdge] = field(default_factory=list)

    def stalk_graded_ranks(self) -> dict[WeylElement, dict[int, int]]:
        return {x: self.graph.stalk_rank(x) for x in self.support}


def build_sheaf(wd: WordData) -> MomentSheaf:
    """Assemble the sheaf: stalks are fibre bases over the gallery endpoints,
    and for each Bruhat arrow inside the support the lower restriction is
    the fold map expressed over the upper basis modulo the edge root."""
    rs = wd.rs
    support = list(wd.endpoints)
    support_set = set(support)
    stalks = {x: fibre_basis(wd, x) for x in support}
    edges: list[GraphEdge] = []
    for x in support:
        for alpha in rs.left_inversions(x):
            y = rs.reflection(alpha) * x
            if y not in support_set:
                raise SheafCheckError(
                    "support is not downward closed along reflections; "
                    f"missing {rs.describe(y)}"
                )
            matrix = []
            for e in stalks[y].elements:
                cls = rho_fold(wd, e.func, y, x, tuple(alpha))
                matrix.append(cls.coords)
            edges.append(GraphEdge(x, y, tuple(alpha), matrix))
    degrees = {x: stalks[x].degrees() for x in support}
    graph = GraphSheaf(rs, support, degrees, edges)
    return MomentSheaf(wd, support, stalks, graph, edges)


def tuple_to_pointwise(sheaf: MomentSheaf, coords: list[Polynomial]) -> PointwiseFunction:
    """Interpret stalk coordinates as one function on the full gallery set."""
    wd = sheaf.wd
    rank = wd.rs.rank
    verts, space, starts = sheaf.graph.layout()
    values = [Polynomial.zero(rank) for _ in wd.galleries]
    for x in verts:
        basis = sheaf.stalks[x]
        start = starts[x]
        for k, e in enumerate(basis.elements):
            c = coords[start + k]
            if c.is_zero():
                continue
            for g, v in zip(e.func.domain, e.func.values):
                values[g] = values[g] + c * v
    return PointwiseFunction.on_all(wd, values)


def global_sections(
    sheaf: MomentSheaf, max_degree: int | None = None, cross_check: bool = True
) -> GeneratorSet:
    """Minimal generators of the edge-compatible tuples, solved degreewise.

    With cross_check, every degree slice of the edge system is compared to
    the congruence description over the full gallery set: the dimensions
    must agree and each edge-system solution must pass the congruence
    divisibilities, which identifies the two solution spaces exactly.
    """
    wd = sheaf.wd
    bound = wd.r if max_degree is None else max_degree
    verts, space, starts = sheaf.graph.layout()
    subset = set(verts)
    congs = total_membership_congruences(wd) if cross_check else None
    pw_space = CoordSpace.pointwise(wd.rs.rank, len(wd.galleries))

    def slice_fn(d: int) -> GradedSliceBasis:
        basis = sections_slice(sheaf.graph, subset, d, boundary_kernel=True)
        if cross_check and d <= bound:
            pw = solve_slice(congs, pw_space, d)
            if pw.dimension != basis.dimension:
                raise SheafCheckError(
                    f"edge-system and congruence solution spaces differ in degree {d}: "
                    f"{basis.dimension} vs {pw.dimension}"
                )
            for vec in basis.vectors:
                coords = space.from_slice_vector(vec, d)
                f = tuple_to_pointwise(sheaf, coords)
                if not htbs1_member(wd, f):
                    raise SheafCheckError(
                        f"an edge-system solution violates the membership congruences "
                        f"in degree {d}"
                    )
        return basis

    gens = minimal_generators(slice_fn, space, bound)
    if cross_check:
        for g in gens.generators:
            f = tuple_to_pointwise(sheaf, g.element)
            if not htbs1_member(wd, f):
                raise SheafCheckError("a section generator violates the membership congruences")
    return gens


# -- purity -----------------------------------------------------------------------


@dataclass
class PurityReport:
    stalks_free: bool
    edge_modules_canonical: bool
    flabby_kernels_extend: bool
    stalks_globally_generated: bool
    details: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return (
            self.stalks_free
            and self.edge_modules_canonical
            and self.flabby_kernels_extend
            and self.stalks_globally_generated
        )


def _upward_kernel_generators(
    gs: GraphSheaf, x: WeylElement, bound: int
) -> GeneratorSet:
    """Minimal generators of the intersection over upward edges at x of the
    kernels of the lower restriction maps, inside the stalk at x."""
    space = CoordSpace.over_generators(gs.rs.rank, gs.degrees[x])
    up_edges = [e for e in gs.edges if e.lower == x]

    def slice_fn(d: int) -> GradedSliceBasis:
        index = space.slice_index(d)
        pos_of = {key: k for k, key in enumerate(index)}
        rows: list[list[Fraction]] = []
        for edge in up_edges:
            form = Polynomial.from_root(edge.root)
            p = _pivot_index(form)
            n_up = len(gs.degrees[edge.upper])
            cond: dict[tuple[int, tuple[int, ...]], list[Fraction]] = {}
            for z, zdeg in enumerate(gs.degrees[x]):
                for m in graded_monomials(space.rank, d - zdeg):
                    col = pos_of[(z, m)]
                    mono = Polynomial.monomial(space.rank, m)
                    for h in range(n_up):
                        entry = edge.matrix[z][h]
                        if entry.is_zero():
                            continue
                        pc = to_pivot_coordinates(entry * mono, form)
                        for ue, c in pc.terms.items():
                            if ue[p] >= 1:
                                continue
                            key = (h, ue)
                            row = cond.get(key)
                            if row is None:
                                row = [Fraction(0)] * len(index)
                                cond[key] = row
                            row[col] += c
            for key in sorted(cond):
                rows.append(cond[key])
        return GradedSliceBasis(d, index, kernel_basis(rows, len(index)))

    return minimal_generators(slice_fn, space, bound)


def purity_check(gs: GraphSheaf, bound: int) -> PurityReport:
    """The purity axioms, checked degreewise up to the bound.

    Freeness of stalks and the form of the edge modules hold by
    construction and are reported as such.  Global generation asks that
    restriction to every stalk is surjective slice by slice; the flabbiness
    condition asks that every element of the upward kernel at a vertex
    extends to a section vanishing at all vertices other than those below.
    """
    rs = gs.rs
    details: list[str] = []
    details.append("stalks are free graded modules by construction")
    details.append("edge modules are the upper stalk modulo the edge root by construction")

    from gallerysheaf.gradedlinalg import rank_of

    verts, space, starts = gs.layout()
    subset = set(verts)
    generated = True
    for d in range(bound + 1):
        sections = sections_slice(gs, subset, d)
        index = space.slice_index(d)
        for x in verts:
            nx = len(gs.degrees[x])
            if nx == 0:
                continue
            sx = starts[x]
            keep = [k for k, (ci, m) in enumerate(index) if sx <= ci < sx + nx]
            stalk_space = CoordSpace.over_generators(rs.rank, gs.degrees[x])
            target_dim = len(stalk_space.slice_index(d))
            proj = [[vec[k] for k in keep] for vec in sections.vectors]
            got = rank_of(proj) if proj else 0
            if got != target_dim:
                generated = False
                details.append(
                    f"stalk at {rs.describe(x)} not reached by sections in degree {d}: "
                    f"rank {got} of {target_dim}"
                )
    if generated:
        details.append(f"restriction to every stalk is surjective through degree {bound}")

    flabby = True
    for x in verts:
        if not gs.degrees[x]:
            continue
        kernel = _upward_kernel_generators(gs, x, bound)
        below = {y for y in verts if rs.bruhat_lt(y, x)}
        region = below | {x}
        for gen in kernel.generators:
            if not _extends_by_zero(gs, x, gen, region):
                flabby = False
                details.append(
                    f"kernel element of degree {gen.degree} at {rs.describe(x)} "
                    "does not extend to a section vanishing off the lower set"
                )
                break
        if not flabby:
            break
    if flabby:
        details.append("upward kernels extend to sections vanishing above and beside")

    return PurityReport(True, True, flabby, generated, details)


def _extends_by_zero(gs: GraphSheaf, x: WeylElement, gen: Generator, region) -> bool:
    """Solvability of: a section over the region (zero boundary upward)
    whose value at x is the given stalk element."""
    region = set(region)
    verts, space, starts = gs.layout(region)
    d = gen.degree
    rows = _edge_rows(gs, space, starts, lambda v: v in region, d, boundary_kernel=True)
    index = space.slice_index(d)
    sx = starts[x]
    nx = len(gs.degrees[x])
    # pin the coordinates at x to the generator
    stalk_space = CoordSpace.over_generators(gs.rs.rank, gs.degrees[x])
    target_vec = stalk_space.to_slice_vector(gen.element, d)
    stalk_index = stalk_space.slice_index(d)
    rhs = [Fraction(0)] * len(rows)
    extra_rows = []
    extra_rhs = []
    for (ci, m), val in zip(stalk_index, target_vec):
        row = [Fraction(0)] * len(index)
        row[index.index((sx + ci, m))] = Fraction(1)
        extra_rows.append(row)
        extra_rhs.append(val)
    sol = solve_affine(rows + extra_rows, rhs + extra_rhs)
    return sol is not None


# -- canonical indecomposable pure sheaves ----------------------------------------


_BM_CACHE: dict[tuple, GraphSheaf] = {}


def bm_sheaf(rs: RootSystem, x: WeylElement, max_degree: int | None = None) -> GraphSheaf:
    """The canonical pure sheaf with apex x, built top-down.

    The stalk at x is free of rank one in degree zero; at each lower vertex
    the sections over the open set strictly above are restricted into the
    incoming edge modules and the stalk is a minimal free cover of the
    image, the covering map providing the lower edge matrices.
    """
    bound = rs.length(x) if max_degree is None else max_degree
    key = (rs.cartan_type, rs.rank, x.matrix, bound)
    cached = _BM_CACHE.get(key)
    if cached is not None:
        return cached
    graph = cached_bruhat_graph(rs)
    group = rs.weyl_group()
    order = sorted(group, key=lambda w: (-rs.length(w), rs.element_index(w)))
    degrees: dict[WeylElement, list[int]] = {}
    edges_at: dict[WeylElement, list[GraphEdge]] = {}
    all_edges: list[GraphEdge] = []

    partial = GraphSheaf(rs, [], {}, [])

    for y in order:
        if y == x:
            degrees[y] = [0]
            continue
        if rs.length(y) >= rs.length(x):
            degrees[y] = []
            continue
        above = [z for z in group if rs.bruhat_lt(y, z) and degrees.get(z)]
        incoming = [
            e for e in graph.up[y] if degrees.get(e.upper)
        ]  # arrows u -> y with nonzero upper stalk
        if not above or not incoming:
            degrees[y] = []
            continue
        partial = GraphSheaf(
            rs,
            sorted(above, key=lambda w: (rs.length(w), rs.element_index(w))),
            {z: degrees[z] for z in above},
            [e for e in all_edges if e.upper in degrees and e.lower in degrees
             and rs.bruhat_lt(y, e.lower)],
        )
        # coordinate space of the incoming edge modules
        offsets = []
        moduli = []
        spans = []
        for e in incoming:
            form = Polynomial.from_root(e.root)
            spans.append((e, len(offsets)))
            offsets.extend(degrees[e.upper])
            moduli.extend([form] * len(degrees[e.upper]))
        target_space = CoordSpace(rs.rank, tuple(offsets), tuple(moduli))

        verts, sec_space, starts = partial.layout()
        sec_subset = set(verts)

        def image_slice(d: int) -> GradedSliceBasis:
            sections = sections_slice(partial, sec_subset, d, boundary_kernel=False)
            index = target_space.slice_index(d)
            vectors = []
            for vec in sections.vectors:
                coords = sec_space.from_slice_vector(vec, d)
                img: list[Polynomial] = []
                for e, off in spans:
                    form = Polynomial.from_root(e.root)
                    su = starts[e.upper]
                    for h in range(len(degrees[e.upper])):
                        img.append(reduce_mod_linear(coords[su + h], form))
                vectors.append(target_space.to_slice_vector(img, d))
            return GradedSliceBasis(d, index, vectors)

        gens = minimal_generators(image_slice, target_space, bound)
        degrees[y] = [g.degree for g in gens.generators]
        # the covering map gives the lower matrices, one block per edge
        for e, off in spans:
            n_up = len(degrees[e.upper])
            matrix = []
            for g in gens.generators:
                matrix.append([g.element[off + h] for h in range(n_up)])
            new_edge = GraphEdge(e.upper, y, tuple(e.root), matrix)
            all_edges.append(new_edge)
            edges_at.setdefault(y, []).append(new_edge)

    support = [w for w in group if degrees.get(w)]
    support.sort(key=lambda w: (rs.length(w), rs.element_index(w)))
    sheaf = GraphSheaf(rs, support, {w: degrees[w] for w in support},
                       [e for e in all_edges if degrees.get(e.upper) and degrees.get(e.lower)])
    _BM_CACHE[key] = sheaf
    return sheaf


# -- decomposition ----------------------------------------------------------------


@dataclass
class DecompositionReport:
    summands: list[tuple[WeylElement, int, int]]  # (apex, degree shift, multiplicity)
    residual_ok: bool
    details: list[str] = field(default_factory=list)


def decompose(sheaf: MomentSheaf) -> DecompositionReport:
    """Greedy graded-rank accounting of the sheaf against the canonical pure
    sheaves: repeatedly subtract, at a Bruhat-maximal vertex with residual
    rank, the stalk ranks of its canonical sheaf shifted to the lowest
    residual degree.  Certifies multiplicities at the level of graded stalk
    ranks only."""
    rs = sheaf.wd.rs
    residual: dict[WeylElement, dict[int, int]] = {
        x: dict(r) for x, r in sheaf.stalk_graded_ranks().items()
    }

    def alive():
        return [x for x, r in residual.items() if any(v for v in r.values())]

    summands: dict[tuple[WeylElement, int], int] = {}
    details: list[str] = []
    ok = True
    while True:
        live = alive()
        if not live:
            break
        maximal = [
            x for x in live if not any(rs.bruhat_lt(x, y) for y in live if y != x)
        ]
        maximal.sort(key=lambda w: (-rs.length(w), rs.element_index(w)))
        x = maximal[0]
        shift = min(d for d, v in residual[x].items() if v)
        bm = bm_sheaf(rs, x)
        key = (x, shift)
        summands[key] = summands.get(key, 0) + 1
        for y in bm.vertices:
            ranks = bm.stalk_rank(y)
            tgt = residual.setdefault(y, {})
            for d, v in ranks.items():
                tgt[d + shift] = tgt.get(d + shift, 0) - v
                if tgt[d + shift] < 0:
                    ok = False
                    details.append(
                        f"negative residual at {rs.describe(y)} degree {d + shift}"
                    )
        if not ok:
            break
    if ok:
        for x, r in residual.items():
            if any(v for v in r.values()):
                ok = False
                details.append(f"nonzero residual at {rs.describe(x)}")
    out = sorted(summands.items(), key=lambda kv: (-rs.length(kv[0][0]), kv[0][1]))
    return DecompositionReport(
        [(x, m, mult) for (x, m), mult in out], ok, details
    )
