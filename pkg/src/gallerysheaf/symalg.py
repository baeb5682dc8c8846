"""Exact sparse multivariate polynomial arithmetic over Q in the simple roots.

Polynomials are coefficient dictionaries keyed by exponent vectors; rational
functions are normalized pairs of polynomials compared by cross
multiplication.  The two workhorse operations for congruence arithmetic are
division by a linear form (a root) and canonical reduction modulo a linear
form, both implemented by eliminating a fixed pivot variable.  Degrees are
polynomial degrees throughout; the cohomological degree is twice this.
"""

from __future__ import annotations

from fractions import Fraction
from math import comb


class SingularMatrixError(ValueError):
    """Exact matrix inversion hit a singular matrix."""


def _as_fraction(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, int):
        return Fraction(c)
    raise TypeError(f"coefficients must be exact rationals, got {type(c)!r}")


class Polynomial:
    """Sparse polynomial over Q; terms maps exponent tuples to nonzero coefficients."""

    __slots__ = ("rank", "terms")

    def __init__(self, rank: int, terms: dict[tuple[int, ...], Fraction] | None = None):
        self.rank = rank
        self.terms = {} if terms is None else {e: c for e, c in terms.items() if c != 0}

    # -- constructors -------------------------------------------------------

    @classmethod
    def zero(cls, rank: int) -> "Polynomial":
        return cls(rank)

    @classmethod
    def one(cls, rank: int) -> "Polynomial":
        return cls.constant(rank, 1)

    @classmethod
    def constant(cls, rank: int, c) -> "Polynomial":
        c = _as_fraction(c)
        return cls(rank, {(0,) * rank: c} if c else {})

    @classmethod
    def variable(cls, rank: int, i: int) -> "Polynomial":
        """The i-th simple-root variable a_i (1-based)."""
        if not 1 <= i <= rank:
            raise ValueError(f"variable index {i} out of range for rank {rank}")
        e = tuple(1 if j == i - 1 else 0 for j in range(rank))
        return cls(rank, {e: Fraction(1)})

    @classmethod
    def monomial(cls, rank: int, exps: tuple[int, ...], c=1) -> "Polynomial":
        c = _as_fraction(c)
        return cls(rank, {tuple(exps): c} if c else {})

    @classmethod
    def from_root(cls, coords) -> "Polynomial":
        """A root's coordinate vector as a degree-1 linear form."""
        coords = tuple(coords)
        rank = len(coords)
        terms = {}
        for i, a in enumerate(coords):
            if a:
                e = tuple(1 if j == i else 0 for j in range(rank))
                terms[e] = Fraction(a)
        return cls(rank, terms)

    # -- ring structure ------------------------------------------------------

    def __add__(self, other: "Polynomial") -> "Polynomial":
        terms = dict(self.terms)
        for e, c in other.terms.items():
            v = terms.get(e, 0) + c
            if v:
                terms[e] = v
            else:
                terms.pop(e, None)
        return Polynomial(self.rank, terms)

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        terms = dict(self.terms)
        for e, c in other.terms.items():
            v = terms.get(e, 0) - c
            if v:
                terms[e] = v
            else:
                terms.pop(e, None)
        return Polynomial(self.rank, terms)

    def __neg__(self) -> "Polynomial":
        return Polynomial(self.rank, {e: -c for e, c in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        terms: dict[tuple[int, ...], Fraction] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                v = terms.get(e, 0) + c1 * c2
                if v:
                    terms[e] = v
                else:
                    terms.pop(e, None)
        return Polynomial(self.rank, terms)

    __rmul__ = __mul__

    def scale(self, c) -> "Polynomial":
        c = _as_fraction(c)
        if c == 0:
            return Polynomial.zero(self.rank)
        return Polynomial(self.rank, {e: c * v for e, v in self.terms.items()})

    def __pow__(self, k: int) -> "Polynomial":
        if k < 0:
            raise ValueError("negative power of a polynomial")
        result = Polynomial.one(self.rank)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Polynomial)
            and self.rank == other.rank
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.rank, frozenset(self.terms.items())))

    # -- structure queries ----------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        return max((sum(e) for e in self.terms), default=-1)

    def is_homogeneous(self) -> bool:
        degs = {sum(e) for e in self.terms}
        return len(degs) <= 1

    def homogeneous_component(self, d: int) -> "Polynomial":
        return Polynomial(self.rank, {e: c for e, c in self.terms.items() if sum(e) == d})

    def coefficient(self, exps: tuple[int, ...]) -> Fraction:
        return self.terms.get(tuple(exps), Fraction(0))

    def constant_term(self) -> Fraction:
        return self.terms.get((0,) * self.rank, Fraction(0))

    def leading(self) -> tuple[tuple[int, ...], Fraction]:
        """Leading term in graded-lex order; raises on zero."""
        e = max(self.terms, key=lambda e: (sum(e), e))
        return e, self.terms[e]

    def evaluate(self, point) -> Fraction:
        total = Fraction(0)
        for e, c in self.terms.items():
            v = c
            for x, k in zip(point, e):
                for _ in range(k):
                    v *= x
            total += v
        return total

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for e in sorted(self.terms, key=lambda e: (sum(e), e), reverse=True):
            c = self.terms[e]
            factors = []
            for i, k in enumerate(e):
                if k == 1:
                    factors.append(f"a{i + 1}")
                elif k > 1:
                    factors.append(f"a{i + 1}^{k}")
            mono = "*".join(factors)
            ac = abs(c)
            if not mono:
                body = str(ac)
            elif ac == 1:
                body = mono
            else:
                body = f"{ac}*{mono}"
            parts.append(("-" if c < 0 else "+", body))
        sign, body = parts[0]
        out = ("-" if sign == "-" else "") + body
        for sign, body in parts[1:]:
            out += f" {sign} {body}"
        return out

    __repr__ = __str__


def graded_monomials(rank: int, d: int) -> list[tuple[int, ...]]:
    """All exponent vectors of total degree d, in descending lex order."""
    if d < 0:
        return []
    if rank == 0:
        return [()] if d == 0 else []
    out: list[tuple[int, ...]] = []

    def rec(prefix, remaining, slots):
        if slots == 1:
            out.append(prefix + (remaining,))
            return
        for k in range(remaining, -1, -1):
            rec(prefix + (k,), remaining - k, slots - 1)

    rec((), d, rank)
    assert len(out) == comb(rank + d - 1, d)
    return out


def _pivot_index(alpha: Polynomial) -> int:
    """Lowest-index variable with nonzero coefficient in the linear form alpha."""
    if alpha.is_zero() or alpha.degree() != 1 or not alpha.is_homogeneous():
        raise ValueError(f"expected a nonzero linear form, got {alpha}")
    best = None
    for e in alpha.terms:
        i = next(j for j, k in enumerate(e) if k)
        if best is None or i < best:
            best = i
    return best


def divide_by_linear(f: Polynomial, alpha: Polynomial) -> Polynomial | None:
    """Exact quotient f/alpha for a linear form alpha, or None if not divisible.

    Univariate division in the pivot variable (lowest index occurring in
    alpha); f is divisible by alpha iff the pivot-free remainder vanishes.
    """
    p = _pivot_index(alpha)
    a = alpha.terms[tuple(1 if j == p else 0 for j in range(alpha.rank))]
    q_terms: dict[tuple[int, ...], Fraction] = {}
    r = f
    while True:
        dmax = max((e[p] for e in r.terms), default=0)
        if dmax == 0:
            break
        chunk = {e: c for e, c in r.terms.items() if e[p] == dmax}
        c_terms = {}
        for e, c in chunk.items():
            e2 = e[:p] + (dmax - 1,) + e[p + 1 :]
            c_terms[e2] = c / a
        c_poly = Polynomial(f.rank, c_terms)
        for e, c in c_terms.items():
            v = q_terms.get(e, 0) + c
            if v:
                q_terms[e] = v
            else:
                q_terms.pop(e, None)
        r = r - c_poly * alpha
    if r.is_zero():
        return Polynomial(f.rank, q_terms)
    return None


def divide_by_root_power(f: Polynomial, alpha: Polynomial, k: int) -> Polynomial | None:
    """Exact quotient f/alpha^k, or None; k <= 0 returns f unchanged."""
    for _ in range(max(k, 0)):
        f = divide_by_linear(f, alpha)
        if f is None:
            return None
    return f


def reduce_mod_linear(f: Polynomial, alpha: Polynomial) -> Polynomial:
    """Canonical representative of f modulo (alpha).

    Eliminates the pivot variable via the relation alpha = 0; idempotent, and
    zero exactly when alpha divides f.
    """
    p = _pivot_index(alpha)
    unit = tuple(1 if j == p else 0 for j in range(alpha.rank))
    a = alpha.terms[unit]
    beta = alpha - Polynomial(alpha.rank, {unit: a})
    sub = beta.scale(Fraction(-1) / a)  # x_p == sub on the hyperplane alpha = 0
    powers = {0: Polynomial.one(f.rank)}
    out = Polynomial.zero(f.rank)
    for e, c in f.terms.items():
        k = e[p]
        if k not in powers:
            m = max(powers)
            acc = powers[m]
            for j in range(m + 1, k + 1):
                acc = acc * sub
                powers[j] = acc
        rest = Polynomial.monomial(f.rank, e[:p] + (0,) + e[p + 1 :], c)
        out = out + rest * powers[k]
    return out


def to_pivot_coordinates(f: Polynomial, alpha: Polynomial) -> Polynomial:
    """Rewrite f in coordinates (u, other variables) where u = alpha.

    The pivot slot of the result carries the u-exponent; divisibility by
    alpha^k is exactly 'every term has pivot exponent >= k', and dropping the
    terms with pivot exponent < k is the canonical remainder map mod alpha^k.
    """
    p = _pivot_index(alpha)
    unit = tuple(1 if j == p else 0 for j in range(alpha.rank))
    a = alpha.terms[unit]
    beta = alpha - Polynomial(alpha.rank, {unit: a})
    # x_p = (u - beta)/a
    xp = Polynomial(f.rank, {unit: Fraction(1) / a}) - beta.scale(Fraction(1) / a)
    powers = {0: Polynomial.one(f.rank)}
    out = Polynomial.zero(f.rank)
    for e, c in f.terms.items():
        k = e[p]
        if k not in powers:
            m = max(powers)
            acc = powers[m]
            for j in range(m + 1, k + 1):
                acc = acc * xp
                powers[j] = acc
        rest = Polynomial.monomial(f.rank, e[:p] + (0,) + e[p + 1 :], c)
        out = out + rest * powers[k]
    return out


def poly_exact_div(f: Polynomial, g: Polynomial) -> Polynomial | None:
    """Exact multivariate quotient f/g, or None when g does not divide f."""
    if g.is_zero():
        raise ZeroDivisionError("division by zero polynomial")
    if f.is_zero():
        return Polynomial.zero(f.rank)
    ge, gc = g.leading()
    q = Polynomial.zero(f.rank)
    r = f
    while not r.is_zero():
        re, rc = r.leading()
        diff = tuple(a - b for a, b in zip(re, ge))
        if any(a < 0 for a in diff):
            return None
        t = Polynomial.monomial(f.rank, diff, rc / gc)
        q = q + t
        r = r - t * g
    return q


def _gcd_univar(f: Polynomial, g: Polynomial) -> Polynomial:
    """Monic gcd of univariate polynomials by the Euclidean algorithm."""
    a, b = f, g
    while not b.is_zero():
        # remainder of a by b
        be, bc = b.leading()
        r = a
        while not r.is_zero() and r.leading()[0][0] >= be[0]:
            re, rc = r.leading()
            t = Polynomial.monomial(1, (re[0] - be[0],), rc / bc)
            r = r - t * b
        a, b = b, r
    if a.is_zero():
        return a
    _, lc = a.leading()
    return a.scale(Fraction(1) / lc)


class RationalFunction:
    """A fraction of polynomials, normalized so the denominator is monic.

    Equality is decided by cross multiplication.  Univariate fractions are
    kept reduced via the Euclidean gcd; in several variables we only attempt
    an exact division of numerator by denominator (no factorization).
    """

    __slots__ = ("num", "den")

    def __init__(self, num: Polynomial, den: Polynomial | None = None):
        if den is None:
            den = Polynomial.one(num.rank)
        if den.is_zero():
            raise ZeroDivisionError("zero denominator")
        if num.is_zero():
            num, den = Polynomial.zero(num.rank), Polynomial.one(num.rank)
        else:
            q = poly_exact_div(num, den)
            if q is not None:
                num, den = q, Polynomial.one(num.rank)
            elif num.rank == 1:
                g = _gcd_univar(num, den)
                if g.degree() > 0:
                    num = poly_exact_div(num, g)
                    den = poly_exact_div(den, g)
        _, lc = den.leading()
        if lc != 1:
            inv = Fraction(1) / lc
            num = num.scale(inv)
            den = den.scale(inv)
        self.num = num
        self.den = den

    @classmethod
    def from_poly(cls, p: Polynomial) -> "RationalFunction":
        return cls(p)

    @classmethod
    def zero(cls, rank: int) -> "RationalFunction":
        return cls(Polynomial.zero(rank))

    @classmethod
    def one(cls, rank: int) -> "RationalFunction":
        return cls(Polynomial.one(rank))

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def __add__(self, other: "RationalFunction") -> "RationalFunction":
        return RationalFunction(
            self.num * other.den + other.num * self.den, self.den * other.den
        )

    def __sub__(self, other: "RationalFunction") -> "RationalFunction":
        return RationalFunction(
            self.num * other.den - other.num * self.den, self.den * other.den
        )

    def __neg__(self) -> "RationalFunction":
        return RationalFunction(-self.num, self.den)

    def __mul__(self, other: "RationalFunction") -> "RationalFunction":
        return RationalFunction(self.num * other.num, self.den * other.den)

    def __truediv__(self, other: "RationalFunction") -> "RationalFunction":
        if other.is_zero():
            raise ZeroDivisionError("division by zero rational function")
        return RationalFunction(self.num * other.den, self.den * other.num)

    def inverse(self) -> "RationalFunction":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero")
        return RationalFunction(self.den, self.num)

    def __eq__(self, other) -> bool:
        if isinstance(other, Polynomial):
            other = RationalFunction(other)
        if not isinstance(other, RationalFunction):
            return NotImplemented
        return self.num * other.den == other.num * self.den

    def __hash__(self):
        return hash((self.num, self.den))

    def as_polynomial(self) -> Polynomial | None:
        if self.den == Polynomial.one(self.num.rank):
            return self.num
        return poly_exact_div(self.num, self.den)

    def __str__(self) -> str:
        if self.den == Polynomial.one(self.num.rank):
            return str(self.num)
        return f"({self.num})/({self.den})"

    __repr__ = __str__


def ratfn_matrix_inverse(
    m: list[list[RationalFunction]],
) -> list[list[RationalFunction]]:
    """Exact inverse of a square matrix over the rational function field.

    Denominators are cleared row by row, then the polynomial matrix is
    inverted by fraction-free (Bareiss-Jordan) elimination with exact
    divisions only.  The result is verified against the identity.
    """
    n = len(m)
    if n == 0:
        return []
    if any(len(row) != n for row in m):
        raise ValueError("matrix is not square")
    rank = m[0][0].num.rank
    one = Polynomial.one(rank)

    scales = []
    poly_rows: list[list[Polynomial]] = []
    for row in m:
        r = one
        for entry in row:
            r = r * entry.den
        prow = []
        for entry in row:
            q = poly_exact_div(r, entry.den)
            prow.append(entry.num * q)
        scales.append(r)
        poly_rows.append(prow)

    # Bareiss-Jordan sweep on [P | I].
    aug = [poly_rows[i] + [one if i == j else Polynomial.zero(rank) for j in range(n)] for i in range(n)]
    prev = one
    for k in range(n):
        piv_row = next((r for r in range(k, n) if not aug[r][k].is_zero()), None)
        if piv_row is None:
            raise SingularMatrixError("matrix is singular")
        if piv_row != k:
            aug[k], aug[piv_row] = aug[piv_row], aug[k]
        piv = aug[k][k]
        for i in range(n):
            if i == k:
                continue
            fik = aug[i][k]
            new_row = []
            for j in range(2 * n):
                num = aug[i][j] * piv - fik * aug[k][j]
                q = poly_exact_div(num, prev)
                assert q is not None, "fraction-free elimination lost exactness"
                new_row.append(q)
            aug[i] = new_row
        prev = piv

    inv = []
    for i in range(n):
        d = aug[i][i]
        row = []
        for j in range(n):
            # column scaling undoes the row scaling of the original matrix
            row.append(RationalFunction(aug[i][n + j] * scales[j], d))
        inv.append(row)

    for i in range(n):
        for j in range(n):
            acc = RationalFunction.zero(rank)
            for k in range(n):
                acc = acc + m[i][k] * inv[k][j]
            expected = RationalFunction.one(rank) if i == j else RationalFunction.zero(rank)
            if acc != expected:
                raise SingularMatrixError("inverse verification failed")
    return inv
