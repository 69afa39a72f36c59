"""Exact arithmetic substrate: prime fields, projective points, homogeneous forms.

Everything downstream (towers, point counts, dynamics) reduces to the few
primitives in this module, so the conventions are pinned here once:

* Rational projective points are stored as coprime integer vectors whose
  first nonzero entry is positive.  Prime-field points are stored with the
  first nonzero entry scaled to 1.  Equality and hashing are structural on
  that representative, so sets of points behave like sets of points.
* Homogeneous polynomials keep integer coefficients (clear denominators
  first) in descending lexicographic monomial order.  A reduced form mod p
  keeps its coefficients in [0, p) and remembers the modulus.
* All arithmetic is exact; floats appear nowhere in this module.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Iterator, Sequence

from .errors import (
    DegenerateReductionError,
    DimensionMismatchError,
    DomainError,
    EnumerationCapError,
    NonHomogeneousError,
    NotPrimeError,
    ParseError,
)

DEFAULT_ENUM_CAP = 10**7


def is_prime(n: int) -> bool:
    """Deterministic trial division; moduli here are desk-scale."""
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


class PrimeField:
    """The field F_p for prime p; primality is checked at construction."""

    def __init__(self, p: int):
        if not is_prime(p):
            raise NotPrimeError(p)
        self.p = p

    def element(self, value: int) -> "PrimeFieldElement":
        return PrimeFieldElement(value % self.p, self.p)

    def inv(self, a: int) -> int:
        a %= self.p
        if a == 0:
            raise ZeroDivisionError(f"0 has no inverse in F_{self.p}")
        return pow(a, self.p - 2, self.p)

    def __eq__(self, other) -> bool:
        return isinstance(other, PrimeField) and other.p == self.p

    def __hash__(self) -> int:
        return hash(("PrimeField", self.p))

    def __repr__(self) -> str:
        return f"PrimeField({self.p})"


class PrimeFieldElement:
    """A residue in F_p.  Value is kept in [0, p); mixed-modulus ops refuse."""

    __slots__ = ("value", "modulus")

    def __init__(self, value: int, modulus: int):
        if not is_prime(modulus):
            raise NotPrimeError(modulus)
        self.value = value % modulus
        self.modulus = modulus

    def _coerce(self, other) -> "PrimeFieldElement":
        if isinstance(other, PrimeFieldElement):
            if other.modulus != self.modulus:
                raise DomainError(
                    f"mixed moduli {self.modulus} and {other.modulus}"
                )
            return other
        if isinstance(other, int):
            return PrimeFieldElement(other, self.modulus)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return PrimeFieldElement(self.value + other.value, self.modulus)

    __radd__ = __add__

    def __neg__(self):
        return PrimeFieldElement(-self.value, self.modulus)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return PrimeFieldElement(self.value - other.value, self.modulus)

    def __rsub__(self, other):
        return -(self - other)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return PrimeFieldElement(self.value * other.value, self.modulus)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        return PrimeFieldElement(pow(self.value, e, self.modulus), self.modulus)

    def inverse(self) -> "PrimeFieldElement":
        if self.value == 0:
            raise ZeroDivisionError(f"0 has no inverse in F_{self.modulus}")
        return PrimeFieldElement(
            pow(self.value, self.modulus - 2, self.modulus), self.modulus
        )

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self * other.inverse()

    def __eq__(self, other) -> bool:
        if isinstance(other, PrimeFieldElement):
            return other.modulus == self.modulus and other.value == self.value
        if isinstance(other, int):
            return self.value == other % self.modulus
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.value, self.modulus))

    def __repr__(self) -> str:
        return f"{self.value} (mod {self.modulus})"


# --------------------------------------------------------------------------
# projective points


@dataclass(frozen=True)
class ProjectivePoint:
    """A point of P^n over Q (modulus None) or over F_p (modulus p).

    The constructor insists on the normalized representative described in
    the module docstring and rejects anything else; use ``over_q`` /
    ``over_fp`` to normalize arbitrary coordinates first.
    """

    coords: tuple[int, ...]
    modulus: int | None = None

    def __post_init__(self):
        cs = self.coords
        if not cs or all(c == 0 for c in cs):
            raise ValueError("projective point needs a nonzero coordinate")
        if self.modulus is None:
            g = 0
            for c in cs:
                g = gcd(g, c)
            if g != 1:
                raise ValueError(f"coordinates {cs} are not coprime")
            first = next(c for c in cs if c != 0)
            if first < 0:
                raise ValueError(f"first nonzero coordinate of {cs} is negative")
        else:
            p = self.modulus
            if any(not (0 <= c < p) for c in cs):
                raise ValueError(f"coordinates {cs} not reduced mod {p}")
            first = next(c for c in cs if c != 0)
            if first != 1:
                raise ValueError(f"first nonzero coordinate of {cs} is not 1")

    @classmethod
    def over_q(cls, coords: Sequence[int | Fraction]) -> "ProjectivePoint":
        """Normalize rational coordinates to the coprime integer form."""
        fracs = [Fraction(c) for c in coords]
        if all(f == 0 for f in fracs):
            raise ValueError("projective point needs a nonzero coordinate")
        mult = 1
        for f in fracs:
            mult = mult * f.denominator // gcd(mult, f.denominator)
        ints = [int(f * mult) for f in fracs]
        g = 0
        for c in ints:
            g = gcd(g, c)
        ints = [c // g for c in ints]
        first = next(c for c in ints if c != 0)
        if first < 0:
            ints = [-c for c in ints]
        return cls(tuple(ints), None)

    @classmethod
    def over_fp(cls, coords: Sequence[int], p: int) -> "ProjectivePoint":
        """Normalize mod-p coordinates so the first nonzero entry is 1."""
        field = PrimeField(p)
        cs = [c % p for c in coords]
        if all(c == 0 for c in cs):
            raise ValueError("projective point needs a nonzero coordinate")
        first = next(c for c in cs if c != 0)
        if first != 1:
            s = field.inv(first)
            cs = [(c * s) % p for c in cs]
        return cls(tuple(cs), p)

    def reduce_mod(self, p: int) -> "ProjectivePoint":
        """Reduce a rational point mod p; valid because coords are coprime."""
        if self.modulus is not None:
            raise DomainError("point is already over a finite field")
        return ProjectivePoint.over_fp([c % p for c in self.coords], p)

    @property
    def dim(self) -> int:
        return len(self.coords) - 1

    def __str__(self) -> str:
        return "[" + ":".join(str(c) for c in self.coords) + "]"


# --------------------------------------------------------------------------
# homogeneous polynomials

Term = tuple[tuple[int, ...], int]


@dataclass(frozen=True)
class HomogeneousPolynomial:
    """An integer form of fixed degree in variables X0..X{num_vars-1}.

    ``terms`` is a tuple of (exponent vector, coefficient) pairs in
    descending lexicographic order with no zero coefficients, so structural
    equality is polynomial equality.  ``modulus`` is None over Z and p for a
    reduced form with coefficients in [0, p).
    """

    num_vars: int
    degree: int
    terms: tuple[Term, ...]
    modulus: int | None = None

    @classmethod
    def from_terms(
        cls,
        num_vars: int,
        coeffs: dict[tuple[int, ...], int],
        modulus: int | None = None,
    ) -> "HomogeneousPolynomial":
        degree = None
        cleaned: dict[tuple[int, ...], int] = {}
        for exps, c in coeffs.items():
            exps = tuple(exps)
            if len(exps) != num_vars or any(e < 0 for e in exps):
                raise ValueError(f"bad exponent vector {exps} for {num_vars} variables")
            if modulus is not None:
                c %= modulus
            if c == 0:
                continue
            d = sum(exps)
            if degree is None:
                degree = d
            elif d != degree:
                raise NonHomogeneousError(_format_monomial(exps, 1), d, degree)
            cleaned[exps] = c
        if degree is None:
            raise ValueError("zero polynomial is not a form")
        ordered = tuple(sorted(cleaned.items(), reverse=True))
        return cls(num_vars, degree, ordered, modulus)

    def coefficient(self, exps: tuple[int, ...]) -> int:
        for e, c in self.terms:
            if e == exps:
                return c
        return 0

    def reduce_mod(self, p: int) -> "HomogeneousPolynomial":
        """Coefficients into [0, p); refuses if the whole form vanishes."""
        if not is_prime(p):
            raise NotPrimeError(p)
        out = {e: c % p for e, c in self.terms if c % p != 0}
        if not out:
            raise DegenerateReductionError(p)
        return HomogeneousPolynomial.from_terms(self.num_vars, out, modulus=p)

    def evaluate(self, point: ProjectivePoint):
        """Exact value at the stored representative.

        Returns an int over Q and a PrimeFieldElement over F_p.  An integer
        form may be evaluated at a mod-p point (coefficients reduce on the
        fly); a reduced form refuses points over a different field.
        """
        if len(point.coords) != self.num_vars:
            raise DimensionMismatchError(self.num_vars, len(point.coords))
        p = point.modulus
        if self.modulus is not None and p != self.modulus:
            raise DomainError(
                f"form over F_{self.modulus} evaluated at a point over "
                f"{'Q' if p is None else f'F_{p}'}"
            )
        cs = point.coords
        acc = 0
        if p is None:
            for exps, c in self.terms:
                t = c
                for x, e in zip(cs, exps):
                    if e:
                        t *= x**e
                acc += t
            return acc
        for exps, c in self.terms:
            t = c % p
            for x, e in zip(cs, exps):
                if e:
                    t = t * pow(x, e, p) % p
            acc = (acc + t) % p
        return PrimeFieldElement(acc, p)

    def vanishes_at(self, point: ProjectivePoint) -> bool:
        v = self.evaluate(point)
        return v == 0

    # -- structural surgery used by the tower constructions ---------------

    def shifted(self, offset: int, num_vars: int) -> "HomogeneousPolynomial":
        """Rename X_i -> X_{i+offset} inside a larger variable set."""
        if offset < 0 or self.num_vars + offset > num_vars:
            raise ValueError("shift does not fit in the target variable set")
        out = {}
        for exps, c in self.terms:
            new = [0] * num_vars
            for i, e in enumerate(exps):
                new[i + offset] = e
            out[tuple(new)] = c
        return HomogeneousPolynomial.from_terms(num_vars, out, self.modulus)

    def extended(self, num_vars: int) -> "HomogeneousPolynomial":
        """View the form inside a larger ambient variable set."""
        return self.shifted(0, num_vars)

    def power_substituted(self, k: int) -> "HomogeneousPolynomial":
        """Substitute X_i -> X_i^k; degree multiplies by k."""
        if k < 1:
            raise ValueError("substitution exponent must be >= 1")
        out = {tuple(e * k for e in exps): c for exps, c in self.terms}
        return HomogeneousPolynomial.from_terms(self.num_vars, out, self.modulus)

    def partials(self) -> list[dict[tuple[int, ...], int]]:
        """Raw term dicts of all partial derivatives (entries may be empty)."""
        outs: list[dict[tuple[int, ...], int]] = []
        for j in range(self.num_vars):
            d: dict[tuple[int, ...], int] = {}
            for exps, c in self.terms:
                if exps[j] == 0:
                    continue
                new = list(exps)
                new[j] -= 1
                d[tuple(new)] = d.get(tuple(new), 0) + c * exps[j]
            outs.append({e: c for e, c in d.items() if c != 0})
        return outs

    def __str__(self) -> str:
        return format_polynomial(self)


def evaluate(poly: HomogeneousPolynomial, point: ProjectivePoint):
    return poly.evaluate(point)


def reduce_poly(poly: HomogeneousPolynomial, p: int) -> HomogeneousPolynomial:
    return poly.reduce_mod(p)


# --------------------------------------------------------------------------
# polynomial text format

_TOKEN_RE = re.compile(r"\s*(\d+|[A-Za-z]\w*|\*\*|[-+*^()])")


def _tokenize(text: str) -> list[str]:
    tokens, pos = [], 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r} in {text!r}")
        tok = m.group(1)
        tokens.append("^" if tok == "**" else tok)
        pos = m.end()
    return tokens


class _PolyParser:
    """Recursive-descent parser for integer polynomial expressions.

    Supports + - * ^ and parentheses over a fixed variable list; '*' may be
    omitted between factors.  Values are dicts exponent-vector -> coeff, in
    first-seen monomial order (dict insertion order), which is what lets the
    homogeneity check name the offending monomial.
    """

    def __init__(self, tokens: list[str], variables: Sequence[str]):
        self.tokens = tokens
        self.pos = 0
        self.variables = list(variables)
        self.var_index = {v: i for i, v in enumerate(self.variables)}

    def peek(self) -> str | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def next(self) -> str:
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of input")
        self.pos += 1
        return tok

    def parse(self) -> dict[tuple[int, ...], int]:
        result = self.expr()
        if self.peek() is not None:
            raise ParseError(f"trailing input at token {self.peek()!r}")
        return result

    def expr(self) -> dict[tuple[int, ...], int]:
        sign = 1
        while self.peek() in ("+", "-"):
            if self.next() == "-":
                sign = -sign
        acc = self.term()
        if sign < 0:
            acc = {e: -c for e, c in acc.items()}
        while self.peek() in ("+", "-"):
            op = self.next()
            term = self.term()
            for e, c in term.items():
                c = c if op == "+" else -c
                acc[e] = acc.get(e, 0) + c
        return acc

    def term(self) -> dict[tuple[int, ...], int]:
        acc = self.factor()
        while True:
            tok = self.peek()
            if tok == "*":
                self.next()
                acc = self._mul(acc, self.factor())
            elif tok is not None and (tok.isdigit() or tok == "(" or tok in self.var_index):
                acc = self._mul(acc, self.factor())
            else:
                return acc

    def factor(self) -> dict[tuple[int, ...], int]:
        base = self.atom()
        if self.peek() == "^":
            self.next()
            tok = self.next()
            if not tok.isdigit():
                raise ParseError(f"exponent must be a nonnegative integer, got {tok!r}")
            base = self._pow(base, int(tok))
        return base

    def atom(self) -> dict[tuple[int, ...], int]:
        tok = self.next()
        nv = len(self.variables)
        if tok.isdigit():
            return {(0,) * nv: int(tok)}
        if tok in self.var_index:
            exps = [0] * nv
            exps[self.var_index[tok]] = 1
            return {tuple(exps): 1}
        if tok == "(":
            inner = self.expr()
            if self.next() != ")":
                raise ParseError("unbalanced parentheses")
            return inner
        if tok == "-":
            inner = self.atom()
            return {e: -c for e, c in inner.items()}
        raise ParseError(f"unexpected token {tok!r}")

    def _mul(self, a, b):
        out: dict[tuple[int, ...], int] = {}
        for ea, ca in a.items():
            for eb, cb in b.items():
                key = tuple(x + y for x, y in zip(ea, eb))
                out[key] = out.get(key, 0) + ca * cb
        return out

    def _pow(self, a, k: int):
        out = {(0,) * len(self.variables): 1}
        for _ in range(k):
            out = self._mul(out, a)
        return out


def parse_poly_expr(text: str, variables: Sequence[str]) -> dict[tuple[int, ...], int]:
    """Parse over an explicit variable list; zero-coefficient terms dropped."""
    coeffs = _PolyParser(_tokenize(text), variables).parse()
    return {e: c for e, c in coeffs.items() if c != 0}


def parse_polynomial(text: str, num_vars: int | None = None) -> HomogeneousPolynomial:
    """Parse a form in variables X0..Xk; rejects non-homogeneous input.

    ``num_vars`` fixes the ambient variable count; left as None it becomes
    one more than the largest index that appears.
    """
    idents = set(re.findall(r"[A-Za-z]\w*", text))
    indices = []
    for name in idents:
        m = re.fullmatch(r"X(\d+)", name)
        if not m:
            raise ParseError(f"unknown variable {name!r} (expected X0, X1, ...)")
        indices.append(int(m.group(1)))
    if not indices:
        raise ParseError(f"no variables in {text!r}")
    needed = max(indices) + 1
    if num_vars is None:
        num_vars = needed
    elif needed > num_vars:
        raise ParseError(f"variable X{max(indices)} exceeds the declared {num_vars} variables")
    variables = [f"X{i}" for i in range(num_vars)]
    coeffs = parse_poly_expr(text, variables)
    if not coeffs:
        raise ParseError(f"{text!r} is the zero polynomial")
    degrees = {sum(e) for e in coeffs}
    if len(degrees) > 1:
        expected = sum(next(iter(coeffs)))
        for exps, c in coeffs.items():
            if sum(exps) != expected:
                raise NonHomogeneousError(_format_monomial(exps, c), sum(exps), expected)
    return HomogeneousPolynomial.from_terms(num_vars, coeffs)


def _format_monomial(exps: tuple[int, ...], coeff: int) -> str:
    parts = []
    for i, e in enumerate(exps):
        if e == 1:
            parts.append(f"X{i}")
        elif e > 1:
            parts.append(f"X{i}^{e}")
    body = "*".join(parts)
    if not parts:
        return str(coeff)
    if coeff == 1:
        return body
    if coeff == -1:
        return "-" + body
    return f"{coeff}*{body}"


def format_polynomial(poly: HomogeneousPolynomial) -> str:
    """Canonical text form; round-trips through parse_polynomial."""
    pieces = []
    for exps, c in poly.terms:
        mon = _format_monomial(exps, abs(c) if c < 0 else c)
        if not pieces:
            pieces.append(mon if c > 0 else "-" + mon)
        else:
            pieces.append(("+ " if c > 0 else "- ") + mon)
    return " ".join(pieces)


# --------------------------------------------------------------------------
# projective enumeration


def projective_space_size(p: int, dim: int) -> int:
    return (p ** (dim + 1) - 1) // (p - 1)


def iter_normalized_tuples(p: int, dim: int, first_nonzero: int | None = None) -> Iterator[tuple[int, ...]]:
    """Raw normalized coordinate tuples of P^dim(F_p), lexicographic order.

    Normalized vectors start with some zeros then a 1, so lexicographic
    order walks the strata by position of the first nonzero coordinate,
    last position first.  Fixing ``first_nonzero`` restricts to one stratum,
    which is the unit of work for partitioned scans.
    """
    strata = range(dim, -1, -1) if first_nonzero is None else [first_nonzero]
    for z in strata:
        head = (0,) * z + (1,)
        for tail in itertools.product(range(p), repeat=dim - z):
            yield head + tail


def enumerate_projective(
    p: int, dim: int, cap: int = DEFAULT_ENUM_CAP
) -> Iterator[ProjectivePoint]:
    """All points of P^dim(F_p) in a deterministic order, subject to a cap."""
    PrimeField(p)
    size = projective_space_size(p, dim)
    if size > cap:
        raise EnumerationCapError(size, cap)
    for coords in iter_normalized_tuples(p, dim):
        yield ProjectivePoint(coords, p)


# --------------------------------------------------------------------------
# rational roots of integer polynomials


def rational_roots(coeffs: Sequence[int]) -> set[Fraction]:
    """Exact rational roots of sum(coeffs[i] * x^i), multiplicities dropped.

    Rational-root-theorem candidates (divisors of the constant term over
    divisors of the leading coefficient, after stripping the x^k factor),
    each verified by exact evaluation.
    """
    cs = [int(c) for c in coeffs]
    while cs and cs[-1] == 0:
        cs.pop()
    if not cs:
        raise DomainError("zero polynomial has every rational root")
    roots: set[Fraction] = set()
    k = next(i for i, c in enumerate(cs) if c != 0)
    if k > 0:
        roots.add(Fraction(0))
        cs = cs[k:]
    if len(cs) == 1:
        return roots
    # sympy's factoring backs the divisor enumeration; imported lazily since
    # it is heavy and only this helper needs it
    from sympy import divisors

    const, lead = abs(cs[0]), abs(cs[-1])
    deg = len(cs) - 1
    for r in divisors(const):
        for s in divisors(lead):
            cand = Fraction(r, s)
            for root in (cand, -cand):
                if root in roots:
                    continue
                num, den = root.numerator, root.denominator
                # exact check of den^deg * f(num/den) == 0
                acc = 0
                for i, c in enumerate(cs):
                    acc += c * num**i * den ** (deg - i)
                if acc == 0:
                    roots.add(root)
    return roots


# --------------------------------------------------------------------------
# small exact linear algebra over F_p


def matrix_rank_mod_p(rows: Sequence[Sequence[int]], p: int) -> int:
    """Rank over F_p by Gaussian elimination on a copy."""
    m = [[c % p for c in row] for row in rows]
    if not m:
        return 0
    ncols = len(m[0])
    rank = 0
    for col in range(ncols):
        pivot = next((r for r in range(rank, len(m)) if m[r][col] % p != 0), None)
        if pivot is None:
            continue
        m[rank], m[pivot] = m[pivot], m[rank]
        inv = pow(m[rank][col], p - 2, p)
        m[rank] = [(v * inv) % p for v in m[rank]]
        for r in range(len(m)):
            if r != rank and m[r][col] % p != 0:
                f = m[r][col]
                m[r] = [(a - f * b) % p for a, b in zip(m[r], m[rank])]
        rank += 1
        if rank == len(m):
            break
    return rank
