"""Gallery enumeration, wall statistics, orders, classes and folding tests.

Fibre sizes and J/D tables are checked against a direct prefix-product
enumeration written inline, independent of WordData's shared-prefix cache.
"""

import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gallerysheaf.galleries import (
    Gallery,
    GalleryCheckError,
    WordData,
    check_counting,
    compare,
    enumerate_galleries,
    fold_end,
    gallery_stats,
    sim_alpha_classes,
    sweep_counting_checks,
)
from gallerysheaf.rootsys import ConfigurationError, build_root_system, cached_root_system


A1 = cached_root_system("A", 1)
A2 = cached_root_system("A", 2)
B2 = cached_root_system("B", 2)
G2 = cached_root_system("G", 2)


def direct_fibre_sizes(rs, word):
    """Independent oracle: endpoint multiset by direct prefix products."""
    sizes = {}
    gens = [rs.simple_reflection(i) for i in word]
    for bits in itertools.product((False, True), repeat=len(word)):
        w = rs.identity()
        for g, b in zip(gens, bits):
            if b:
                w = w * g
        sizes[w] = sizes.get(w, 0) + 1
    return sizes


def test_enumerate_counts():
    assert len(enumerate_galleries(())) == 1
    assert len(enumerate_galleries((1, 1))) == 4
    gals = enumerate_galleries((1, 2))
    assert [g.text for g in gals] == ["bb", "bc", "cb", "cc"]


def test_enumerate_cap():
    with pytest.raises(ConfigurationError):
        enumerate_galleries((1,) * 21)


def test_fibres_a2_121():
    wd = WordData.get(A2, (1, 2, 1))
    oracle = direct_fibre_sizes(A2, (1, 2, 1))
    assert {x: len(ids) for x, ids in wd.fibres.items()} == oracle
    assert sorted(len(ids) for ids in wd.fibres.values()) == [1, 1, 1, 1, 2, 2]


def test_gallery_stats_a1_ss():
    word = (1, 1)
    st_cc = gallery_stats(A1, word, Gallery.from_text("cc"))
    assert st_cc.load_bearing == {1}
    assert st_cc.defects == {2}
    assert st_cc.endpoint == A1.identity()
    st_bc = gallery_stats(A1, word, Gallery.from_text("bc"))
    assert st_bc.load_bearing == {2}
    assert st_bc.defects == frozenset()
    assert st_bc.endpoint == A1.simple_reflection(1)


def test_all_bends_gallery():
    for rs, word in [(A2, (1, 2, 1)), (B2, (1, 2, 1, 2)), (G2, (1, 2))]:
        st0 = gallery_stats(rs, word, Gallery.from_text("b" * len(word)))
        assert st0.load_bearing == frozenset()
        assert st0.defects == frozenset()
        assert st0.endpoint == rs.identity()
        assert all(rs.root_sign(b) < 0 for b in st0.walls)


def test_check_counting_examples():
    assert check_counting(A1, (1, 1)).galleries == 4
    assert check_counting(A2, (1, 2, 1)).galleries == 8
    assert check_counting(A2, ()).galleries == 1


def test_sim_classes_sl2_single_class():
    classes = sim_alpha_classes(A1, (1, 1, 1), (1,))
    assert len(classes) == 1
    assert len(classes[0]) == 8


def test_sim_classes_a2():
    wd = WordData.get(A2, (1, 2, 1))
    for cls in wd.classes((1, 0)):
        m = wd.m_alpha(cls[0], (1, 0))
        assert len(cls) == 2 ** len(m)
    # a root with no wall splits into singletons
    for cls in wd.classes((1, 0)):
        for g in cls:
            if not wd.m_alpha(g, (1, 0)):
                assert len(cls) == 1


def test_fold_examples():
    folded = fold_end(A1, (1, 1), Gallery.from_text("cb"), (1,))
    assert folded.text == "cc"
    # fold is an involution
    for text in ["cc", "cb", "bc", "bb"]:
        g = Gallery.from_text(text)
        assert fold_end(A1, (1, 1), fold_end(A1, (1, 1), g, (1,)), (1,)) == g
    folded = fold_end(A2, (1, 2, 1), Gallery.from_text("cbc"), (1, 0))
    assert folded.text == "cbb"


def test_fold_swaps_endpoint():
    wd = WordData.get(A2, (1, 2, 1))
    for alpha in A2.positive_roots:
        s = A2.reflection(alpha)
        for g in range(len(wd.galleries)):
            if not wd.m_alpha(g, alpha):
                continue
            h = wd.fold(g, alpha)
            assert wd.stats[h].endpoint == s * wd.stats[g].endpoint
            # class and wall positions are preserved, membership at the last
            # wall flips between load-bearing and not
            assert wd.m_alpha(h, alpha) == wd.m_alpha(g, alpha)
            i = wd.m_alpha(g, alpha)[-1]
            assert (i in wd.j_alpha(g, alpha)) != (i in wd.j_alpha(h, alpha))


def test_lex_order_sl2_r2():
    wd = WordData.get(A1, (1, 1))
    ordered = [wd.galleries[k].text for k in wd.lex_order]
    assert ordered == ["bb", "bc", "cc", "cb"]
    assert ordered[0] == "b" * 2


def test_lexleq_total_and_all_bends_minimal():
    for rs, word in [(A2, (1, 2, 1)), (B2, (1, 2, 1))]:
        wd = WordData.get(rs, word)
        n = len(wd.galleries)
        allbends = wd.index_of[(False,) * len(word)]
        for a in range(n):
            assert wd.lexleq(allbends, a)
            for b in range(n):
                assert wd.lexleq(a, b) or wd.lexleq(b, a)


def test_fibre_order_total_on_fibres():
    wd = WordData.get(A2, (1, 2, 1))
    for x, ids in wd.fibres.items():
        for a, b in itertools.combinations(ids, 2):
            assert wd.fibre_lt(a, b) != wd.fibre_lt(b, a)


def test_j_containment_implies_lexleq():
    for rs, word in [(A1, (1, 1, 1)), (A2, (1, 2, 1)), (B2, (1, 2, 1, 2))]:
        wd = WordData.get(rs, word)
        for a in range(len(wd.galleries)):
            for b in range(len(wd.galleries)):
                if wd.stats[a].load_bearing <= wd.stats[b].load_bearing:
                    assert wd.lexleq(a, b)


def test_class_containment_lemma():
    # for galleries in one class with the same endpoint, J-slice containment
    # and D-slice containment agree
    for rs, word in [(A2, (1, 2, 1)), (B2, (1, 2, 1, 2))]:
        wd = WordData.get(rs, word)
        for alpha in rs.positive_roots:
            for cls in wd.classes(alpha):
                for a, b in itertools.permutations(cls, 2):
                    if wd.stats[a].endpoint != wd.stats[b].endpoint:
                        continue
                    ja = set(wd.j_alpha(a, alpha))
                    jb = set(wd.j_alpha(b, alpha))
                    da = set(wd.d_alpha(a, alpha))
                    db = set(wd.d_alpha(b, alpha))
                    assert (ja <= jb) == (da <= db)


def test_j_bijection_property():
    for rs, word in [(A2, (1, 2, 1, 2)), (B2, (2, 1, 2)), (G2, (1, 2, 1))]:
        wd = WordData.get(rs, word)
        jsets = {st.load_bearing for st in wd.stats}
        assert len(jsets) == 2 ** len(word)
        universe = set()
        for j in jsets:
            universe |= j
        assert universe <= set(range(1, len(word) + 1))


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(1, 2), min_size=0, max_size=6))
def test_counting_identities_random_words_b2(word):
    check_counting(B2, tuple(word))


def test_compare_api():
    g_bb = Gallery.from_text("bb")
    g_cb = Gallery.from_text("cb")
    assert compare(A1, (1, 1), g_bb, g_cb, "lexleq")
    assert not compare(A1, (1, 1), g_cb, g_bb, "lexleq")
    assert compare(A1, (1, 1), g_bb, Gallery.from_text("cc"), "bruhat_lt")


def test_sweep_counting_small():
    rep = sweep_counting_checks(A2, 5)
    assert rep.words == sum(2**k for k in range(6))
    rep1 = sweep_counting_checks(A1, 6)
    assert rep1.words == 7
    sweep_counting_checks(B2, 4)
    sweep_counting_checks(G2, 4)
