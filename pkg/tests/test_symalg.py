"""Exact polynomial and rational-function arithmetic tests.

Divisibility results are cross-checked against sympy as an independent
oracle, and the randomized round-trip suites run on fixed seeds.
"""

import random
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from gallerysheaf.rootsys import build_root_system
from gallerysheaf.symalg import (
    Polynomial,
    RationalFunction,
    SingularMatrixError,
    divide_by_linear,
    divide_by_root_power,
    graded_monomials,
    poly_exact_div,
    ratfn_matrix_inverse,
    reduce_mod_linear,
    to_pivot_coordinates,
)


def var(rank, i):
    return Polynomial.variable(rank, i)


def to_sympy(p: Polynomial):
    xs = sympy.symbols(f"a1:{p.rank + 1}")
    expr = sympy.Integer(0)
    for e, c in p.terms.items():
        term = sympy.Rational(c.numerator, c.denominator)
        for x, k in zip(xs, e):
            term *= x**k
        expr += term
    return sympy.expand(expr), xs


def random_poly(rng, rank, max_deg=3, max_terms=5):
    terms = {}
    for _ in range(rng.randint(1, max_terms)):
        e = tuple(rng.randint(0, max_deg) for _ in range(rank))
        terms[e] = Fraction(rng.randint(-9, 9), rng.randint(1, 4))
    return Polynomial(rank, terms)


def test_poly_arith_examples():
    a1, a2 = var(2, 1), var(2, 2)
    assert a1 + a1 == a1.scale(2)
    assert (a1 + a2) * a1 == a1 * a1 + a1 * a2
    sq = (a1 + a2) ** 2
    assert sq == a1 * a1 + (a1 * a2).scale(2) + a2 * a2


def test_poly_printing_golden():
    a1, a2 = var(2, 1), var(2, 2)
    assert str((a1 + a2) ** 2) == "a1^2 + 2*a1*a2 + a2^2"
    assert str(Polynomial.zero(2)) == "0"
    assert str(-a2) == "-a2"
    assert str(a1.scale(Fraction(1, 2)) - Polynomial.one(2)) == "1/2*a1 - 1"
    assert str(a1**3) == "a1^3"


def test_divide_examples():
    a1, a2 = var(2, 1), var(2, 2)
    assert divide_by_linear(a1 * a1 + a1 * a2, a1) == a1 + a2
    assert divide_by_linear(a1 + a2, a1 + a2) == Polynomial.one(2)
    assert divide_by_linear(a1, a2) is None


def test_divide_round_trip_seeded():
    rng = random.Random(20260811)
    systems = [build_root_system(*tn) for tn in [("A", 2), ("B", 2), ("G", 2)]]
    cases = 0
    for _ in range(350):
        rs = rng.choice(systems)
        alpha = Polynomial.from_root(rng.choice(rs.positive_roots))
        f = random_poly(rng, rs.rank)
        assert divide_by_linear(alpha * f, alpha) == f
        cases += 1
    rs = build_root_system("A", 1)
    alpha = Polynomial.from_root((1,))
    for _ in range(650):
        f = random_poly(rng, 1)
        assert divide_by_linear(alpha * f, alpha) == f
        cases += 1
    assert cases >= 1000


def test_divisibility_matches_sympy_oracle():
    rng = random.Random(4)
    rs = build_root_system("B", 2)
    for _ in range(120):
        alpha_coords = rng.choice(rs.positive_roots)
        alpha = Polynomial.from_root(alpha_coords)
        f = random_poly(rng, 2)
        if rng.random() < 0.5:
            f = f * alpha
        ours = divide_by_linear(f, alpha)
        fe, xs = to_sympy(f)
        ae, _ = to_sympy(alpha)
        q, r = sympy.div(fe, ae, *xs)
        if r == 0:
            assert ours is not None
            qe, _ = to_sympy(ours)
            assert sympy.expand(qe - q) == 0
        else:
            assert ours is None


def test_reduce_examples():
    a1, a2 = var(2, 1), var(2, 2)
    assert reduce_mod_linear(a1, a1).is_zero()
    assert reduce_mod_linear(a1, a1 + a2) == -a2
    assert reduce_mod_linear(a2 * a2, a1) == a2 * a2


def test_reduce_idempotent_and_kernel():
    rng = random.Random(99)
    rs = build_root_system("G", 2)
    for _ in range(200):
        alpha = Polynomial.from_root(rng.choice(rs.positive_roots))
        f = random_poly(rng, 2)
        red = reduce_mod_linear(f, alpha)
        assert reduce_mod_linear(red, alpha) == red
        assert red.is_zero() == (divide_by_linear(f, alpha) is not None)


def test_reduce_is_multiplicative():
    rng = random.Random(7)
    rs = build_root_system("A", 2)
    for _ in range(150):
        alpha = Polynomial.from_root(rng.choice(rs.positive_roots))
        f = random_poly(rng, 2)
        g = random_poly(rng, 2)
        lhs = reduce_mod_linear(f * g, alpha)
        rhs = reduce_mod_linear(reduce_mod_linear(f, alpha) * reduce_mod_linear(g, alpha), alpha)
        assert lhs == rhs


def test_pivot_coordinates_detect_powers():
    a1, a2 = var(2, 1), var(2, 2)
    alpha = a1 + a2
    f = alpha * alpha * a2
    co = to_pivot_coordinates(f, alpha)
    assert all(e[0] >= 2 for e in co.terms)
    assert divide_by_root_power(f, alpha, 2) == a2
    assert divide_by_root_power(f, alpha, 3) is None


def test_graded_monomials():
    assert graded_monomials(1, 3) == [(3,)]
    assert graded_monomials(2, 2) == [(2, 0), (1, 1), (0, 2)]
    assert len(graded_monomials(3, 2)) == 6
    assert graded_monomials(2, 0) == [(0, 0)]
    assert graded_monomials(2, -1) == []


def test_ratfn_basics():
    a = var(1, 1)
    half = RationalFunction(Polynomial.one(1), a.scale(2))
    assert half == RationalFunction(Polynomial.one(1), a) * RationalFunction(
        Polynomial.one(1), Polynomial.constant(1, 2)
    )
    f = RationalFunction(a * a + a, a)  # cancels to a + 1
    assert f.as_polynomial() == a + Polynomial.one(1)


@settings(max_examples=60, deadline=None)
@given(st.integers(-6, 6), st.integers(-6, 6), st.integers(-6, 6), st.integers(-6, 6))
def test_ratfn_product_with_reciprocal(c0, c1, d0, d1):
    a = var(1, 1)
    f = a.scale(c1) + Polynomial.constant(1, c0)
    g = a.scale(d1) + Polynomial.constant(1, d0)
    if f.is_zero() or g.is_zero():
        return
    q = RationalFunction(f, g)
    assert q * q.inverse() == RationalFunction.one(1)


def test_matrix_inverse_identity_and_diagonal():
    one = RationalFunction.one(2)
    zero = RationalFunction.zero(2)
    ident = [[one, zero], [zero, one]]
    assert ratfn_matrix_inverse(ident) == ident
    a1, a2 = var(2, 1), var(2, 2)
    diag = [[RationalFunction(a1), zero], [zero, RationalFunction(a2)]]
    inv = ratfn_matrix_inverse(diag)
    assert inv[0][0] == RationalFunction(Polynomial.one(2), a1)
    assert inv[1][1] == RationalFunction(Polynomial.one(2), a2)
    assert inv[0][1].is_zero() and inv[1][0].is_zero()


def test_matrix_inverse_sl2_euler_block():
    a = var(1, 1)
    one = RationalFunction.one(1)
    zero = RationalFunction.zero(1)
    inv_a = RationalFunction(Polynomial.one(1), a)
    m = [[one, zero], [RationalFunction(-Polynomial.one(1), a), inv_a]]
    h = ratfn_matrix_inverse(m)
    assert h[0][0] == one and h[0][1] == zero
    assert h[1][0] == one
    assert h[1][1] == RationalFunction(a)


def test_matrix_inverse_rejects_singular():
    one = RationalFunction.one(1)
    with pytest.raises(SingularMatrixError):
        ratfn_matrix_inverse([[one, one], [one, one]])


def test_matrix_inverse_random_multivariate():
    rng = random.Random(11)
    for _ in range(8):
        m = [
            [RationalFunction(random_poly(rng, 2, max_deg=1, max_terms=3)) for _ in range(3)]
            for _ in range(3)
        ]
        try:
            inv = ratfn_matrix_inverse(m)
        except SingularMatrixError:
            continue
        # verification happens inside; spot-check one product entry again
        acc = RationalFunction.zero(2)
        for k in range(3):
            acc = acc + m[0][k] * inv[k][0]
        assert acc == RationalFunction.one(2)


def test_poly_exact_div():
    a1, a2 = var(2, 1), var(2, 2)
    f = (a1 + a2) * (a1 - a2)
    assert poly_exact_div(f, a1 + a2) == a1 - a2
    assert poly_exact_div(f, a1) is None
