"""Finite root systems, Weyl groups, Bruhat order and the Bruhat graph.

Everything is exact integer arithmetic on root-lattice coordinates: a Weyl
group element is the integer matrix of its action in the basis of simple
roots, roots are primitive integer vectors, and the Bruhat order is computed
by reachability through length-increasing reflection multiplications.  The
supported envelope is deliberately small (rank <= 4, |W| <= 1152); inputs
outside it raise ConfigurationError.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache


class ConfigurationError(ValueError):
    """Unsupported Cartan type / rank, or malformed input data."""


Vector = tuple[int, ...]

WEYL_ORDER_CAP = 1152


def _vadd(u: Vector, v: Vector) -> Vector:
    return tuple(a + b for a, b in zip(u, v))


def _vneg(v: Vector) -> Vector:
    return tuple(-a for a in v)


class WeylElement:
    """A Weyl group element as an integer matrix on root-lattice coordinates."""

    __slots__ = ("matrix",)

    def __init__(self, matrix):
        self.matrix = tuple(tuple(int(a) for a in row) for row in matrix)

    def act(self, v: Vector) -> Vector:
        """Matrix-vector product on a coordinate vector in the simple-root basis."""
        return tuple(sum(row[j] * v[j] for j in range(len(v))) for row in self.matrix)

    def __mul__(self, other: "WeylElement") -> "WeylElement":
        a, b = self.matrix, other.matrix
        n = len(a)
        return WeylElement(
            tuple(
                tuple(sum(a[i][k] * b[k][j] for k in range(n)) for j in range(n))
                for i in range(n)
            )
        )

    def inverse(self) -> "WeylElement":
        # Orthogonal-like integer matrix: invert by permuting the root set.
        # Gaussian elimination over Q is simplest and exact at these sizes.
        n = len(self.matrix)
        aug = [
            [Fraction(self.matrix[i][j]) for j in range(n)]
            + [Fraction(1 if i == j else 0) for j in range(n)]
            for i in range(n)
        ]
        for col in range(n):
            piv = next(r for r in range(col, n) if aug[r][col] != 0)
            aug[col], aug[piv] = aug[piv], aug[col]
            p = aug[col][col]
            aug[col] = [a / p for a in aug[col]]
            for r in range(n):
                if r != col and aug[r][col] != 0:
                    f = aug[r][col]
                    aug[r] = [a - f * b for a, b in zip(aug[r], aug[col])]
        inv = []
        for i in range(n):
            row = []
            for j in range(n):
                a = aug[i][n + j]
                if a.denominator != 1:
                    raise ValueError("matrix is not invertible over Z")
                row.append(int(a))
            inv.append(tuple(row))
        return WeylElement(tuple(inv))

    def is_identity(self) -> bool:
        n = len(self.matrix)
        return all(self.matrix[i][j] == (1 if i == j else 0) for i in range(n) for j in range(n))

    def __eq__(self, other) -> bool:
        return isinstance(other, WeylElement) and self.matrix == other.matrix

    def __hash__(self) -> int:
        return hash(self.matrix)

    def __repr__(self) -> str:
        return f"WeylElement({self.matrix})"


def _cartan_matrix(cartan_type: str, rank: int) -> tuple[tuple[int, ...], ...]:
    """Cartan matrix in the convention C[i][j] = <alpha_j, alpha_i^vee>."""
    t = cartan_type
    n = rank
    valid = (
        (t == "A" and 1 <= n <= 4)
        or (t in ("B", "C") and 2 <= n <= 4)
        or (t == "D" and n == 4)
        or (t == "F" and n == 4)
        or (t == "G" and n == 2)
    )
    if not valid:
        raise ConfigurationError(f"unsupported Cartan type {t}{n} (envelope: rank <= 4)")
    m = [[2 if i == j else 0 for j in range(n)] for i in range(n)]

    def bond(i, j, cij=-1, cji=-1):
        m[i][j] = cij
        m[j][i] = cji

    if t in ("A", "B", "C"):
        for i in range(n - 1):
            bond(i, i + 1)
        if t == "B":
            # last simple root short: <alpha_{n-1}, alpha_n^vee> = -2
            m[n - 1][n - 2] = -2
        elif t == "C":
            m[n - 2][n - 1] = -2
    elif t == "D":
        bond(0, 1)
        bond(1, 2)
        bond(1, 3)
    elif t == "F":
        bond(0, 1)
        bond(1, 2, cij=-1, cji=-2)
        bond(2, 3)
    elif t == "G":
        bond(0, 1, cij=-3, cji=-1)
    return tuple(tuple(row) for row in m)


class RootSystem:
    """A finite root system with its Weyl group, built from Cartan data.

    positive_roots are coordinate vectors in the simple-root basis, ordered
    by height and then lexicographically (first coordinate heaviest), so all
    downstream matrix layouts are deterministic.  Instances are immutable
    after construction and safe for concurrent reads.
    """

    def __init__(self, cartan_type: str, rank: int):
        self.cartan_type = cartan_type
        self.rank = rank
        self.cartan_matrix = _cartan_matrix(cartan_type, rank)
        self.simple_roots: list[Vector] = [
            tuple(1 if j == i else 0 for j in range(rank)) for i in range(rank)
        ]
        self._symmetrizer = self._compute_symmetrizer()
        self.positive_roots: list[Vector] = self._enumerate_positive_roots()
        self._pos_index = {v: k for k, v in enumerate(self.positive_roots)}
        self._elements: list[WeylElement] | None = None
        self._index: dict[WeylElement, int] = {}
        self._lengths: list[int] = []
        self._upsets: dict[int, frozenset[int]] = {}

    # -- construction -----------------------------------------------------

    def _compute_symmetrizer(self) -> tuple[int, ...]:
        n = self.rank
        c = self.cartan_matrix
        d: list[Fraction | None] = [None] * n
        d[0] = Fraction(1)
        todo = [0]
        while todo:
            i = todo.pop()
            for j in range(n):
                if i != j and c[i][j] != 0 and d[j] is None:
                    # d_i * C[i][j] = d_j * C[j][i]
                    d[j] = d[i] * c[i][j] / c[j][i]
                    todo.append(j)
        assert all(x is not None for x in d), "Dynkin diagram must be connected"
        lcm = 1
        for x in d:
            lcm = lcm * x.denominator // _gcd(lcm, x.denominator)
        return tuple(int(x * lcm) for x in d)

    def _enumerate_positive_roots(self) -> list[Vector]:
        gens = [self.simple_reflection(i) for i in range(1, self.rank + 1)]
        roots = set(self.simple_roots)
        frontier = set(self.simple_roots)
        while frontier:
            new = set()
            for v in frontier:
                for s in gens:
                    w = s.act(v)
                    if w not in roots and _vneg(w) not in roots:
                        new.add(w if _is_positive(w) else _vneg(w))
            roots |= new
            frontier = new
        pos = [v for v in roots if _is_positive(v)]
        pos.sort(key=lambda v: (sum(v), tuple(-a for a in v)))
        for v in pos:
            g = 0
            for a in v:
                g = _gcd(g, abs(a))
            assert g == 1, f"root {v} is not primitive"
        return pos

    # -- basic operations --------------------------------------------------

    def identity(self) -> WeylElement:
        n = self.rank
        return WeylElement(tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n)))

    def simple_reflection(self, i: int) -> WeylElement:
        """The reflection of the i-th simple root (1-based)."""
        if not 1 <= i <= self.rank:
            raise ConfigurationError(f"simple reflection index {i} out of range")
        n = self.rank
        k = i - 1
        rows = []
        for a in range(n):
            if a == k:
                rows.append(tuple((1 if j == k else 0) - self.cartan_matrix[k][j] for j in range(n)))
            else:
                rows.append(tuple(1 if j == a else 0 for j in range(n)))
        return WeylElement(tuple(rows))

    def pairing(self, u: Vector, v: Vector) -> int:
        """Symmetric bilinear form normalized so (alpha_i, alpha_i) = 2 d_i."""
        total = 0
        for i in range(self.rank):
            if u[i]:
                for j in range(self.rank):
                    if v[j]:
                        total += u[i] * self._symmetrizer[i] * self.cartan_matrix[i][j] * v[j]
        return total

    def reflection(self, alpha: Vector) -> WeylElement:
        """The reflection s_alpha for any root alpha (an involution)."""
        alpha = tuple(alpha)
        if alpha not in self._pos_index and _vneg(alpha) not in self._pos_index:
            raise ConfigurationError(f"{alpha} is not a root")
        norm = self.pairing(alpha, alpha)
        cols = []
        for j in range(self.rank):
            e = tuple(1 if a == j else 0 for a in range(self.rank))
            coeff = 2 * self.pairing(e, alpha)
            assert coeff % norm == 0
            cols.append(tuple(e[a] - (coeff // norm) * alpha[a] for a in range(self.rank)))
        rows = tuple(tuple(cols[j][i] for j in range(self.rank)) for i in range(self.rank))
        return WeylElement(rows)

    def is_positive_root(self, v: Vector) -> bool:
        return tuple(v) in self._pos_index

    def root_sign(self, v: Vector) -> int:
        """+1 for a positive root, -1 for a negative root; raises otherwise."""
        v = tuple(v)
        if v in self._pos_index:
            return 1
        if _vneg(v) in self._pos_index:
            return -1
        raise ConfigurationError(f"{v} is not a root")

    def length(self, w: WeylElement) -> int:
        return sum(1 for a in self.positive_roots if not _is_positive(w.act(a)))

    def left_inversions(self, w: WeylElement) -> list[Vector]:
        """Positive roots alpha with s_alpha w < w, i.e. w^{-1}(alpha) < 0."""
        winv = w.inverse()
        return [a for a in self.positive_roots if not _is_positive(winv.act(a))]

    # -- Weyl group enumeration and Bruhat order ---------------------------

    def weyl_group(self) -> list[WeylElement]:
        """All elements, ordered by length then breadth-first discovery."""
        if self._elements is None:
            gens = [self.simple_reflection(i) for i in range(1, self.rank + 1)]
            e = self.identity()
            elements = [e]
            seen = {e}
            frontier = [e]
            while frontier:
                new = []
                for w in frontier:
                    for s in gens:
                        ws = w * s
                        if ws not in seen:
                            seen.add(ws)
                            new.append(ws)
                new.sort(key=lambda w: w.matrix)
                elements.extend(new)
                frontier = new
                if len(elements) > WEYL_ORDER_CAP:
                    raise ConfigurationError(
                        f"Weyl group exceeds the supported cap of {WEYL_ORDER_CAP}"
                    )
            self._elements = elements
            self._index = {w: k for k, w in enumerate(elements)}
            self._lengths = [self.length(w) for w in elements]
        return self._elements

    def element_index(self, w: WeylElement) -> int:
        self.weyl_group()
        return self._index[w]

    def longest_element(self) -> WeylElement:
        group = self.weyl_group()
        return max(group, key=lambda w: self._lengths[self._index[w]])

    def _upset(self, idx: int) -> frozenset[int]:
        """Indices of all y >= x, via length-increasing reflection steps."""
        cached = self._upsets.get(idx)
        if cached is not None:
            return cached
        group = self.weyl_group()
        refls = [self.reflection(a) for a in self.positive_roots]
        up = {idx}
        stack = [idx]
        while stack:
            j = stack.pop()
            w = group[j]
            lw = self._lengths[j]
            for t in refls:
                k = self._index[t * w]
                if self._lengths[k] > lw and k not in up:
                    up.add(k)
                    stack.append(k)
        result = frozenset(up)
        self._upsets[idx] = result
        return result

    def bruhat_leq(self, x: WeylElement, y: WeylElement) -> bool:
        self.weyl_group()
        return self._index[y] in self._upset(self._index[x])

    def bruhat_lt(self, x: WeylElement, y: WeylElement) -> bool:
        return x != y and self.bruhat_leq(x, y)

    def describe(self, w: WeylElement) -> str:
        """Deterministic reduced word, e.g. 's1*s2*s1', or 'e'."""
        if w.is_identity():
            return "e"
        gens = [(i, self.simple_reflection(i)) for i in range(1, self.rank + 1)]
        word = []
        cur = w
        while not cur.is_identity():
            lc = self.length(cur)
            for i, s in gens:
                nxt = cur * s
                if self.length(nxt) < lc:
                    word.append(i)
                    cur = nxt
                    break
        return "*".join(f"s{i}" for i in reversed(word))


class BruhatEdge:
    """Arrow upper -> lower of the Bruhat graph, labeled by its positive root."""

    __slots__ = ("upper", "lower", "root")

    def __init__(self, upper: WeylElement, lower: WeylElement, root: Vector):
        self.upper = upper
        self.lower = lower
        self.root = root

    def __repr__(self) -> str:
        return f"BruhatEdge({self.upper!r} -> {self.lower!r}, root={self.root})"


class BruhatGraph:
    """Directed graph on W: an arrow x -> y whenever y < x and y = s_alpha x."""

    def __init__(self, rs: RootSystem):
        self.rs = rs
        group = rs.weyl_group()
        self.vertices = list(group)
        self.edges: list[BruhatEdge] = []
        self.down: dict[WeylElement, list[BruhatEdge]] = {w: [] for w in group}
        self.up: dict[WeylElement, list[BruhatEdge]] = {w: [] for w in group}
        for w in group:
            lw = rs.length(w)
            for a in rs.positive_roots:
                y = rs.reflection(a) * w
                if rs.length(y) < lw:
                    edge = BruhatEdge(w, y, a)
                    self.edges.append(edge)
                    self.down[w].append(edge)
                    self.up[y].append(edge)


def build_root_system(cartan_type: str, rank: int) -> RootSystem:
    """Construct the root system of the given finite type; see ConfigurationError."""
    if not isinstance(cartan_type, str) or len(cartan_type) != 1 or not "A" <= cartan_type <= "G":
        raise ConfigurationError(f"Cartan type must be a letter A-G, got {cartan_type!r}")
    if not isinstance(rank, int) or rank < 1:
        raise ConfigurationError(f"rank must be a positive integer, got {rank!r}")
    return RootSystem(cartan_type, rank)


def weyl_act(w: WeylElement, v: Vector) -> Vector:
    """Exact action of w on a root-lattice coordinate vector."""
    if len(v) != len(w.matrix):
        raise ValueError("dimension mismatch")
    return w.act(tuple(v))


def bruhat_graph(rs: RootSystem) -> BruhatGraph:
    return BruhatGraph(rs)


def _is_positive(v: Vector) -> bool:
    return all(a >= 0 for a in v) and any(a > 0 for a in v)


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return a


@lru_cache(maxsize=None)
def cached_root_system(cartan_type: str, rank: int) -> RootSystem:
    """Shared instances for callers that repeatedly name systems by type."""
    return build_root_system(cartan_type, rank)
