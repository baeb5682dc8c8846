"""Combinatorial galleries for a word in simple reflections, with statistics.

A gallery assigns to each letter of the word a crossing or a bend; its
prefix products walk through the Weyl group.  The wall of step i is the root
obtained by applying the i-th prefix to minus the i-th simple root, and the
load-bearing set J, the defect set D, the per-root slices M/J/D, the
wall-preserving equivalence classes, end folding and the two gallery orders
all derive from these walls.  WordData caches the whole picture for one word;
the word-tree sweep at the bottom re-verifies the counting identities over
every word up to a length bound using small integer tables.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cmp_to_key

import numpy as np

from gallerysheaf.rootsys import ConfigurationError, RootSystem, Vector, WeylElement

ENUMERATION_CAP = 20
WORDDATA_CAP = 14


class GalleryCheckError(AssertionError):
    """A verified combinatorial identity failed; message pinpoints gallery and root."""


@dataclass(frozen=True)
class Gallery:
    """Per-letter choices: True is a crossing (the letter acts), False a bend."""

    bits: tuple[bool, ...]

    @property
    def text(self) -> str:
        return "".join("c" if b else "b" for b in self.bits)

    @classmethod
    def from_text(cls, s: str) -> "Gallery":
        if any(ch not in "cb" for ch in s):
            raise ValueError(f"gallery text must consist of 'c'/'b', got {s!r}")
        return cls(tuple(ch == "c" for ch in s))

    @property
    def index(self) -> int:
        """Little-endian bit integer; used for deterministic matrix layouts."""
        return sum(1 << i for i, b in enumerate(self.bits) if b)

    def __len__(self) -> int:
        return len(self.bits)

    def __repr__(self) -> str:
        return f"Gallery({self.text!r})"


def _validate_word(rs: RootSystem, word) -> tuple[int, ...]:
    word = tuple(int(i) for i in word)
    for i in word:
        if not 1 <= i <= rs.rank:
            raise ConfigurationError(f"word letter {i} out of range for rank {rs.rank}")
    return word


def enumerate_galleries(word) -> list[Gallery]:
    """All 2^r galleries of the word, in lexicographic bit order."""
    r = len(tuple(word))
    if r > ENUMERATION_CAP:
        raise ConfigurationError(f"word length {r} exceeds the enumeration cap {ENUMERATION_CAP}")
    return [Gallery(bits) for bits in itertools.product((False, True), repeat=r)]


@dataclass
class GalleryStats:
    """All wall data of one gallery: prefixes, walls, J/D and per-root slices."""

    word: tuple[int, ...]
    gallery: Gallery
    prefixes: tuple[WeylElement, ...]  # gamma^0 .. gamma^r
    walls: tuple[Vector, ...]  # beta_i = gamma^i(-alpha_i), signed roots
    tilde_walls: tuple[Vector, ...]  # gamma^{i-1}(-alpha_i)
    endpoint: WeylElement
    load_bearing: frozenset[int]  # J, 1-based positions
    defects: frozenset[int]  # D

    def m_alpha(self, rs: RootSystem, alpha: Vector) -> tuple[int, ...]:
        alpha = tuple(alpha)
        neg = tuple(-a for a in alpha)
        return tuple(
            i + 1 for i, b in enumerate(self.walls) if b == alpha or b == neg
        )

    def j_alpha(self, rs: RootSystem, alpha: Vector) -> tuple[int, ...]:
        alpha = tuple(alpha)
        return tuple(i + 1 for i, b in enumerate(self.walls) if b == alpha)

    def d_alpha(self, rs: RootSystem, alpha: Vector) -> tuple[int, ...]:
        alpha = tuple(alpha)
        return tuple(i + 1 for i, b in enumerate(self.tilde_walls) if b == alpha)


def gallery_stats(rs: RootSystem, word, gallery: Gallery) -> GalleryStats:
    word = _validate_word(rs, word)
    if len(gallery.bits) != len(word):
        raise ValueError("gallery length does not match word length")
    gens = {i: rs.simple_reflection(i) for i in set(word)}
    prefixes = [rs.identity()]
    for letter, bit in zip(word, gallery.bits):
        w = prefixes[-1]
        prefixes.append(w * gens[letter] if bit else w)
    walls = []
    tilde_walls = []
    for i, letter in enumerate(word, start=1):
        neg_alpha = tuple(-a for a in rs.simple_roots[letter - 1])
        walls.append(prefixes[i].act(neg_alpha))
        tilde_walls.append(prefixes[i - 1].act(neg_alpha))
    load = frozenset(i + 1 for i, b in enumerate(walls) if rs.root_sign(b) > 0)
    defect = frozenset(i + 1 for i, b in enumerate(tilde_walls) if rs.root_sign(b) > 0)
    return GalleryStats(
        word=word,
        gallery=gallery,
        prefixes=tuple(prefixes),
        walls=tuple(walls),
        tilde_walls=tuple(tilde_walls),
        endpoint=prefixes[-1],
        load_bearing=load,
        defects=defect,
    )


class WordData:
    """Cached gallery statistics, orders, fibres and foldings for one word.

    The heavyweight context object shared by the congruence, fibre and sheaf
    machinery; immutable after construction.  Galleries are listed in
    lexicographic bit order and referred to by their list position.
    """

    _cache: dict[tuple[str, int, tuple[int, ...]], "WordData"] = {}

    def __init__(self, rs: RootSystem, word):
        self.rs = rs
        self.word = _validate_word(rs, word)
        self.r = len(self.word)
        if self.r > WORDDATA_CAP:
            raise ConfigurationError(
                f"word length {self.r} exceeds the gallery-statistics cap {WORDDATA_CAP}"
            )
        self.galleries = enumerate_galleries(self.word)
        self.index_of = {g.bits: k for k, g in enumerate(self.galleries)}
        gens = {i: rs.simple_reflection(i) for i in set(self.word)} if self.word else {}

        prefix_memo: dict[tuple[bool, ...], WeylElement] = {(): rs.identity()}

        def prefix(bits: tuple[bool, ...]) -> WeylElement:
            w = prefix_memo.get(bits)
            if w is None:
                base = prefix(bits[:-1])
                letter = self.word[len(bits) - 1]
                w = base * gens[letter] if bits[-1] else base
                prefix_memo[bits] = w
            return w

        self.stats: list[GalleryStats] = []
        for g in self.galleries:
            prefixes = tuple(prefix(g.bits[:i]) for i in range(self.r + 1))
            walls = []
            tilde = []
            for i, letter in enumerate(self.word, start=1):
                neg_alpha = tuple(-a for a in rs.simple_roots[letter - 1])
                walls.append(prefixes[i].act(neg_alpha))
                tilde.append(prefixes[i - 1].act(neg_alpha))
            load = frozenset(i + 1 for i, b in enumerate(walls) if rs.root_sign(b) > 0)
            defect = frozenset(i + 1 for i, b in enumerate(tilde) if rs.root_sign(b) > 0)
            self.stats.append(
                GalleryStats(
                    word=self.word,
                    gallery=g,
                    prefixes=prefixes,
                    walls=tuple(walls),
                    tilde_walls=tuple(tilde),
                    endpoint=prefixes[-1],
                    load_bearing=load,
                    defects=defect,
                )
            )

        # fibres, sorted by the fibre order (total within each fibre)
        self.endpoints: list[WeylElement] = []
        fibre_map: dict[WeylElement, list[int]] = {}
        for k, st in enumerate(self.stats):
            fibre_map.setdefault(st.endpoint, []).append(k)
        self.endpoints = sorted(
            fibre_map, key=lambda w: (rs.length(w), rs.element_index(w))
        )
        self.fibres = {
            x: sorted(ids, key=cmp_to_key(self._fibre_cmp)) for x, ids in fibre_map.items()
        }
        self.lex_order = sorted(range(len(self.galleries)), key=cmp_to_key(self._lex_cmp))
        self._class_cache: dict[Vector, list[list[int]]] = {}
        self._slice_cache: dict[Vector, list[tuple[tuple[int, ...], ...]]] = {}

    @classmethod
    def get(cls, rs: RootSystem, word) -> "WordData":
        key = (rs.cartan_type, rs.rank, tuple(int(i) for i in word))
        wd = cls._cache.get(key)
        if wd is None:
            wd = WordData(rs, word)
            cls._cache[key] = wd
        return wd

    @property
    def prefix_data(self) -> "WordData":
        if self.r == 0:
            raise ValueError("the empty word has no prefix")
        return WordData.get(self.rs, self.word[:-1])

    # -- orders ------------------------------------------------------------

    def _lex_cmp(self, a: int, b: int) -> int:
        """The lexicographic order: compare at the first differing prefix."""
        if a == b:
            return 0
        sa, sb = self.stats[a], self.stats[b]
        for i in range(1, self.r + 1):
            if sa.prefixes[i] != sb.prefixes[i]:
                return -1 if self.rs.bruhat_lt(sa.prefixes[i], sb.prefixes[i]) else 1
        return 0

    def _fibre_cmp(self, a: int, b: int) -> int:
        """The gallery order <: compare at the last differing prefix."""
        if a == b:
            return 0
        sa, sb = self.stats[a], self.stats[b]
        for i in range(self.r, 0, -1):
            if sa.prefixes[i] != sb.prefixes[i]:
                if self.rs.bruhat_lt(sa.prefixes[i], sb.prefixes[i]):
                    return -1
                if self.rs.bruhat_lt(sb.prefixes[i], sa.prefixes[i]):
                    return 1
                raise GalleryCheckError(
                    f"galleries {self.galleries[a].text} and {self.galleries[b].text} "
                    "are incomparable in the fibre order"
                )
        return 0

    def lexleq(self, a: int, b: int) -> bool:
        return a == b or self._lex_cmp(a, b) < 0

    def fibre_lt(self, a: int, b: int) -> bool:
        """The partial order < (total on each fibre)."""
        if a == b:
            return False
        sa, sb = self.stats[a], self.stats[b]
        for i in range(self.r, 0, -1):
            if sa.prefixes[i] != sb.prefixes[i]:
                return self.rs.bruhat_lt(sa.prefixes[i], sb.prefixes[i])
        return False

    # -- per-root slices ------------------------------------------------------

    def slices(self, alpha: Vector) -> list[tuple[tuple[int, ...], ...]]:
        """Per gallery, the (M, J, D) position tuples at the root alpha."""
        alpha = tuple(alpha)
        cached = self._slice_cache.get(alpha)
        if cached is None:
            neg = tuple(-a for a in alpha)
            cached = []
            for st in self.stats:
                m = tuple(i + 1 for i, b in enumerate(st.walls) if b == alpha or b == neg)
                j = tuple(i + 1 for i, b in enumerate(st.walls) if b == alpha)
                d = tuple(i + 1 for i, b in enumerate(st.tilde_walls) if b == alpha)
                cached.append((m, j, d))
            self._slice_cache[alpha] = cached
        return cached

    def m_alpha(self, g: int, alpha: Vector) -> tuple[int, ...]:
        return self.slices(alpha)[g][0]

    def j_alpha(self, g: int, alpha: Vector) -> tuple[int, ...]:
        return self.slices(alpha)[g][1]

    def d_alpha(self, g: int, alpha: Vector) -> tuple[int, ...]:
        return self.slices(alpha)[g][2]

    def class_index(self, alpha: Vector) -> list[int]:
        """Map gallery index -> position of its class in classes(alpha)."""
        classes = self.classes(tuple(alpha))
        out = [0] * len(self.galleries)
        for ci, cls in enumerate(classes):
            for g in cls:
                out[g] = ci
        return out

    def classes(self, alpha: Vector) -> list[list[int]]:
        """Partition of the galleries into wall-preserving classes at alpha."""
        alpha = tuple(alpha)
        cached = self._class_cache.get(alpha)
        if cached is not None:
            return cached
        groups: dict[tuple, list[int]] = {}
        for k in range(len(self.galleries)):
            m = self.m_alpha(k, alpha)
            mset = set(m)
            outside = tuple(
                b for i, b in enumerate(self.galleries[k].bits, start=1) if i not in mset
            )
            groups.setdefault((m, outside), []).append(k)
        classes = [sorted(v) for _, v in sorted(groups.items())]
        for cls in classes:
            msets = {self.m_alpha(k, alpha) for k in cls}
            if len(msets) != 1:
                raise GalleryCheckError(f"alpha-wall positions vary inside a class at {alpha}")
        self._class_cache[alpha] = classes
        return classes

    def class_of(self, g: int, alpha: Vector) -> list[int]:
        for cls in self.classes(alpha):
            if g in cls:
                return cls
        raise KeyError(g)

    def fold(self, g: int, alpha: Vector) -> int:
        """Toggle the last alpha-wall step; swaps the endpoint with s_alpha * endpoint."""
        m = self.m_alpha(g, alpha)
        if not m:
            raise ValueError(
                f"gallery {self.galleries[g].text} has no wall at {alpha}; cannot fold"
            )
        i = m[-1]
        bits = list(self.galleries[g].bits)
        bits[i - 1] = not bits[i - 1]
        return self.index_of[tuple(bits)]


def sim_alpha_classes(rs: RootSystem, word, alpha: Vector) -> list[list[Gallery]]:
    """The wall-preserving equivalence classes at a positive root alpha."""
    if not rs.is_positive_root(tuple(alpha)):
        raise ConfigurationError(f"{alpha} is not a positive root")
    wd = WordData.get(rs, word)
    return [[wd.galleries[k] for k in cls] for cls in wd.classes(tuple(alpha))]


def fold_end(rs: RootSystem, word, gallery: Gallery, alpha: Vector) -> Gallery:
    wd = WordData.get(rs, word)
    g = wd.index_of[gallery.bits]
    return wd.galleries[wd.fold(g, tuple(alpha))]


def compare(rs: RootSystem, word, gamma: Gallery, delta: Gallery, mode: str) -> bool:
    """Gallery comparisons: 'lexleq' is gamma <=_lex delta, 'bruhat_lt' is gamma < delta."""
    wd = WordData.get(rs, word)
    a = wd.index_of[gamma.bits]
    b = wd.index_of[delta.bits]
    if mode == "lexleq":
        return wd.lexleq(a, b)
    if mode == "bruhat_lt":
        return wd.fibre_lt(a, b)
    raise ValueError(f"unknown comparison mode {mode!r}")


@dataclass
class CountingReport:
    word: tuple[int, ...]
    galleries: int
    checked_pairs: int


def check_counting(rs: RootSystem, word) -> CountingReport:
    """Verify the counting identities on every gallery of the word.

    Checks |Gamma| = 2^r, injectivity of the load-bearing-set map, the index
    identity #J - #D = length(endpoint), and the alternation pattern along
    each root's wall positions (consecutive wall steps alternate between
    load-bearing and defect, the last one being load-bearing exactly when the
    endpoint drops when reflected).
    """
    wd = WordData.get(rs, word)
    n = len(wd.galleries)
    if n != 2 ** wd.r:
        raise GalleryCheckError(f"expected {2 ** wd.r} galleries, found {n}")
    jsets = {st.load_bearing for st in wd.stats}
    if len(jsets) != n:
        raise GalleryCheckError("load-bearing sets do not separate galleries")
    pairs = 0
    for k, st in enumerate(wd.stats):
        if len(st.load_bearing) - len(st.defects) != rs.length(st.endpoint):
            raise GalleryCheckError(
                f"#J - #D != length of endpoint at gallery {wd.galleries[k].text}"
            )
        for alpha in rs.positive_roots:
            m = st.m_alpha(rs, alpha)
            if not m:
                continue
            pairs += 1
            j = set(st.j_alpha(rs, alpha))
            d = set(st.d_alpha(rs, alpha))
            for a, b in zip(m, m[1:]):
                if (a in j) != (b in d):
                    raise GalleryCheckError(
                        f"alternation failed at gallery {wd.galleries[k].text}, root {alpha}"
                    )
            drops = not _is_positive(st.endpoint.inverse().act(alpha))
            if (m[-1] in j) != drops:
                raise GalleryCheckError(
                    f"last-wall rule failed at gallery {wd.galleries[k].text}, root {alpha}"
                )
    return CountingReport(word=wd.word, galleries=n, checked_pairs=pairs)


def _is_positive(v: Vector) -> bool:
    return all(a >= 0 for a in v) and any(a > 0 for a in v)


# -- bulk verification over all words of a type ------------------------------


class GroupTables:
    """Flat integer tables for one root system, for the vectorized word sweep."""

    def __init__(self, rs: RootSystem):
        self.rs = rs
        group = rs.weyl_group()
        index = {w: k for k, w in enumerate(group)}
        n = len(group)
        rank = rs.rank
        nroots = len(rs.positive_roots)
        root_index = {tuple(a): k for k, a in enumerate(rs.positive_roots)}
        self.rmul = np.zeros((n, rank), dtype=np.int32)
        self.negact = np.zeros((n, rank), dtype=np.int32)
        self.length = np.array([rs.length(w) for w in group], dtype=np.int32)
        self.inv = np.zeros((n, nroots), dtype=bool)
        gens = [rs.simple_reflection(i) for i in range(1, rank + 1)]
        refls = [rs.reflection(a) for a in rs.positive_roots]
        for k, w in enumerate(group):
            for i, s in enumerate(gens):
                self.rmul[k, i] = index[w * s]
                img = w.act(tuple(-a for a in rs.simple_roots[i]))
                if img in root_index:
                    self.negact[k, i] = root_index[img] + 1
                else:
                    self.negact[k, i] = -(root_index[tuple(-a for a in img)] + 1)
            lw = self.length[k]
            for ri, t in enumerate(refls):
                self.inv[k, ri] = rs.length(t * w) < lw


@dataclass
class SweepReport:
    cartan_type: str
    rank: int
    max_len: int
    words: int
    galleries: int
    alternation_events: int


def sweep_counting_checks(rs: RootSystem, max_len: int) -> SweepReport:
    """Run the counting identities over every word of length <= max_len.

    Walks the word tree once, sharing all prefix computation: at each node
    the gallery set of the word is held in flat arrays (prefix index,
    load/defect counters, load-bearing bitmask, and a per-root three-state
    alternation tracker) and every identity of check_counting is verified
    vectorized.  Raises GalleryCheckError on the first violation.
    """
    tables = GroupTables(rs)
    nroots = len(rs.positive_roots)
    rank = rs.rank
    words = 0
    galleries = 0
    events = 0

    def verify(node_word, P, jmask, jc, dc, state):
        nonlocal words, galleries, events
        words += 1
        galleries += P.shape[0]
        if np.unique(jmask).size != P.shape[0]:
            raise GalleryCheckError(f"load-bearing sets collide for word {node_word}")
        if not np.array_equal(jc - dc, tables.length[P]):
            bad = int(np.nonzero(jc - dc != tables.length[P])[0][0])
            raise GalleryCheckError(
                f"#J - #D != endpoint length for word {node_word}, gallery index {bad}"
            )
        has = state > 0
        mismatch = has & ((state == 2) != tables.inv[P])
        if mismatch.any():
            g, ri = map(int, np.argwhere(mismatch)[0])
            raise GalleryCheckError(
                f"last-wall rule failed for word {node_word}, gallery index {g}, "
                f"root {rs.positive_roots[ri]}"
            )
        events += int(has.sum())

    def walk(node_word, P, jmask, jc, dc, state):
        verify(node_word, P, jmask, jc, dc, state)
        if len(node_word) == max_len:
            return
        n = P.shape[0]
        bit = np.int64(1) << len(node_word)
        for letter in range(rank):
            tilde = tables.negact[P, letter]
            in_d = tilde > 0
            rootix = np.abs(tilde) - 1
            prev = state[np.arange(n), rootix]
            bad = (prev > 0) & ((prev == 2) != in_d)
            if bad.any():
                g = int(np.nonzero(bad)[0][0])
                raise GalleryCheckError(
                    f"alternation failed extending word {node_word} by {letter + 1}, "
                    f"gallery index {g}, root {rs.positive_roots[int(rootix[g])]}"
                )
            # bend child keeps the prefix, crossing child multiplies by the
            # letter; the new wall is the tilde wall for a bend and its
            # negative for a crossing.
            P2 = np.concatenate([P, tables.rmul[P, letter]])
            wall_positive = np.concatenate([in_d, ~in_d])
            rootix2 = np.concatenate([rootix, rootix])
            state2 = np.concatenate([state, state])
            state2[np.arange(2 * n), rootix2] = 1 + wall_positive
            walk(
                node_word + (letter + 1,),
                P2,
                np.concatenate([jmask, jmask]) | (wall_positive.astype(np.int64) * bit),
                np.concatenate([jc, jc]) + wall_positive.astype(np.int32),
                np.concatenate([dc, dc]) + np.concatenate([in_d, in_d]).astype(np.int32),
                state2,
            )

    P0 = np.zeros(1, dtype=np.int32)
    jmask0 = np.zeros(1, dtype=np.int64)
    zc = np.zeros(1, dtype=np.int32)
    state0 = np.zeros((1, nroots), dtype=np.int8)
    walk((), P0, jmask0, zc, zc.copy(), state0)
    return SweepReport(
        cartan_type=rs.cartan_type,
        rank=rs.rank,
        max_len=max_len,
        words=words,
        galleries=galleries,
        alternation_events=events,
    )
