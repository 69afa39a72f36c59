"""Exact dynamics of rational self-maps of P^1 over Q.

A map is a pair of degree-d integer forms [F(X,Y) : G(X,Y)] with nonzero
resultant, stored with joint content removed, so iteration never leaves
exact integer arithmetic.  Heights are the only floats and they are taken
at the very end (log of an exact integer maximum).

Orbit growth is doubly exponential in the number of steps, so every orbit
routine takes a bit-size budget and fails loudly (with the partial result
attached) instead of silently grinding.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Sequence

from .algebra import ProjectivePoint, parse_poly_expr, rational_roots
from .errors import (
    BadReductionError,
    DimensionMismatchError,
    DomainError,
    ParseError,
    PrecisionBudgetError,
)

DEFAULT_BIT_CAP = 4096
DEFAULT_ORBIT_CAP = 64
DEFAULT_HEIGHT_CAP = DEFAULT_BIT_CAP * math.log(2)

Coeffs = tuple[int, ...]  # c[i] is the coefficient of X^i Y^(d-i)


def _conv(a: Sequence[int], b: Sequence[int]) -> list[int]:
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x == 0:
            continue
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def _pow_coeffs(a: Sequence[int], k: int) -> list[int]:
    out = [1]
    for _ in range(k):
        out = _conv(out, a)
    return out


def _compose(outer: Coeffs, inner_num: Sequence[int], inner_den: Sequence[int]) -> list[int]:
    """outer(A, B) for a degree-d outer form and degree-m forms A, B."""
    d = len(outer) - 1
    m = len(inner_num) - 1
    num_pows = [[1]]
    den_pows = [[1]]
    for _ in range(d):
        num_pows.append(_conv(num_pows[-1], inner_num))
        den_pows.append(_conv(den_pows[-1], inner_den))
    out = [0] * (d * m + 1)
    for i, c in enumerate(outer):
        if c == 0:
            continue
        piece = _conv(num_pows[i], den_pows[d - i])
        for j, v in enumerate(piece):
            out[j] += c * v
    return out


def _primitive_pair(num: Sequence[int], den: Sequence[int]) -> tuple[Coeffs, Coeffs]:
    """Remove joint integer content; sign fixed so the denominator's first
    nonzero coefficient is positive (the echoed text then reads naturally)."""
    g = 0
    for c in list(num) + list(den):
        g = math.gcd(g, c)
    if g == 0:
        raise DomainError("zero map")
    first = next((c for c in den if c != 0), None)
    if first is None:
        first = next(c for c in num if c != 0)
    if first < 0:
        g = -g
    return tuple(c // g for c in num), tuple(c // g for c in den)


def _bareiss_det(m: list[list[int]]) -> int:
    """Exact integer determinant, fraction-free Gaussian elimination."""
    n = len(m)
    m = [row[:] for row in m]
    sign, prev = 1, 1
    for k in range(n - 1):
        if m[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if m[i][k] != 0), None)
            if swap is None:
                return 0
            m[k], m[swap] = m[swap], m[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
            m[i][k] = 0
        prev = m[k][k]
    return sign * m[-1][-1]


def _resultant(num: Coeffs, den: Coeffs) -> int:
    """Resultant of two degree-d binary forms via the 2d x 2d Sylvester matrix."""
    d = len(num) - 1
    a = list(reversed(num))  # descending powers of X
    b = list(reversed(den))
    size = 2 * d
    rows = []
    for i in range(d):
        rows.append([0] * i + a + [0] * (size - d - 1 - i))
    for i in range(d):
        rows.append([0] * i + b + [0] * (size - d - 1 - i))
    return _bareiss_det(rows)


@dataclass(frozen=True)
class RationalMap:
    """[F : G] of common degree d >= 2 with Res(F, G) != 0.

    Coefficient tuples are ascending in the power of X; construction
    normalizes content and sign, so equal maps are equal dataclasses.
    """

    numerator: Coeffs
    denominator: Coeffs

    def __post_init__(self):
        num, den = tuple(self.numerator), tuple(self.denominator)
        if len(num) != len(den):
            raise DomainError("numerator and denominator degrees differ")
        if len(num) < 3:
            raise DomainError("map degree must be > 1")
        num, den = _primitive_pair(num, den)
        object.__setattr__(self, "numerator", num)
        object.__setattr__(self, "denominator", den)
        res = _resultant(num, den)
        if res == 0:
            raise DomainError("forms share a root: the pair does not define a morphism")
        object.__setattr__(self, "_res", res)

    @property
    def degree(self) -> int:
        return len(self.numerator) - 1

    def resultant(self) -> int:
        return self._res  # type: ignore[attr-defined]

    def good_reduction(self, p: int) -> bool:
        """The reduced pair stays a morphism mod p iff p does not divide Res."""
        return self.resultant() % p != 0

    def __str__(self) -> str:
        return f"({_format_binary_form(self.numerator)})/({_format_binary_form(self.denominator)})"


def monomial_map(k: int) -> RationalMap:
    """The power map x -> x^k as a pair [X^k : Y^k]."""
    if k < 2:
        raise DomainError("map degree must be > 1")
    num = [0] * k + [1]
    den = [1] + [0] * k
    return RationalMap(tuple(num), tuple(den))


def _format_binary_form(cs: Coeffs) -> str:
    d = len(cs) - 1
    pieces = []
    for i in range(d, -1, -1):
        c = cs[i]
        if c == 0:
            continue
        xpart = "" if i == 0 else ("X" if i == 1 else f"X^{i}")
        ypart = "" if d - i == 0 else ("Y" if d - i == 1 else f"Y^{d - i}")
        body = "*".join(s for s in (xpart, ypart) if s) or "1"
        mag = abs(c)
        if mag != 1 or body == "1":
            body = f"{mag}*{body}" if body != "1" else str(mag)
        if not pieces:
            pieces.append(body if c > 0 else "-" + body)
        else:
            pieces.append(("+ " if c > 0 else "- ") + body)
    return " ".join(pieces)


# --------------------------------------------------------------------------
# map text format


def parse_rational_map(text: str) -> RationalMap:
    """Parse '(F)/(G)' in X, Y or an affine rational function in x.

    Affine input is homogenized to the common degree, e.g. 'x^2-1' becomes
    [X^2 - Y^2 : Y^2].
    """
    s = text.strip()
    num_text, den_text = _split_top_level(s)
    names = set(re.findall(r"[A-Za-z]\w*", s))
    if names <= {"x"}:
        num = _dense(parse_poly_expr(num_text, ["x"]))
        den = _dense(parse_poly_expr(den_text, ["x"]))
        d = max(len(num), len(den)) - 1
        return RationalMap(_homogenize(num, d), _homogenize(den, d))
    if names <= {"X", "Y"}:
        num = _dense_pair(parse_poly_expr(num_text, ["X", "Y"]))
        den = _dense_pair(parse_poly_expr(den_text, ["X", "Y"]))
        if len(num) != len(den):
            raise ParseError("numerator and denominator must have equal degree")
        return RationalMap(tuple(num), tuple(den))
    raise ParseError(f"map must use either x or X,Y; got variables {sorted(names)}")


def _split_top_level(s: str) -> tuple[str, str]:
    depth = 0
    for i, ch in enumerate(s):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == "/" and depth == 0:
            return s[:i], s[i + 1 :]
    return s, "1"


def _dense(coeffs: dict[tuple[int, ...], int]) -> list[int]:
    if not coeffs:
        raise ParseError("zero polynomial in map")
    deg = max(e[0] for e in coeffs)
    out = [0] * (deg + 1)
    for (e,), c in coeffs.items():
        out[e] = c
    return out


def _dense_pair(coeffs: dict[tuple[int, ...], int]) -> list[int]:
    if not coeffs:
        raise ParseError("zero polynomial in map")
    degs = {ex + ey for ex, ey in coeffs}
    if len(degs) != 1:
        raise ParseError("pair form requires homogeneous X,Y polynomials")
    d = degs.pop()
    out = [0] * (d + 1)
    for (ex, ey), c in coeffs.items():
        out[ex] = c
    return out


def _homogenize(affine: Sequence[int], d: int) -> Coeffs:
    out = [0] * (d + 1)
    for i, c in enumerate(affine):
        out[i] = c
    return tuple(out)


# --------------------------------------------------------------------------
# orbits and heights


def apply_map(f: RationalMap, point: ProjectivePoint) -> ProjectivePoint:
    """One exact step; works over Q and over F_p (good reduction required)."""
    if len(point.coords) != 2:
        raise DimensionMismatchError(2, len(point.coords))
    a, b = point.coords
    d = f.degree
    if point.modulus is None:
        u = sum(c * a**i * b ** (d - i) for i, c in enumerate(f.numerator) if c)
        v = sum(c * a**i * b ** (d - i) for i, c in enumerate(f.denominator) if c)
        return ProjectivePoint.over_q((u, v))
    p = point.modulus
    u = sum(c * pow(a, i, p) * pow(b, d - i, p) for i, c in enumerate(f.numerator) if c % p) % p
    v = sum(c * pow(a, i, p) * pow(b, d - i, p) for i, c in enumerate(f.denominator) if c % p) % p
    if u == 0 and v == 0:
        raise BadReductionError(f"map has bad reduction mod {p}")
    return ProjectivePoint.over_fp((u, v), p)


def naive_height(point: ProjectivePoint) -> float:
    """log max(|a|, |b|) on the coprime representative [a : b]."""
    if point.modulus is not None:
        raise DomainError("height is defined over Q")
    if len(point.coords) != 2:
        raise DimensionMismatchError(2, len(point.coords))
    a, b = point.coords
    return math.log(max(abs(a), abs(b)))


def _bits(point: ProjectivePoint) -> int:
    return max(abs(c).bit_length() for c in point.coords)


@dataclass(frozen=True)
class OrbitClassification:
    """Outcome of a capped forward-orbit scan."""

    tag: str  # "periodic" | "preperiodic" | "escaping"
    period: int | None = None
    tail: int | None = None
    height_at_cutoff: float | None = None
    orbit_prefix: tuple[ProjectivePoint, ...] = ()


def classify_orbit(
    f: RationalMap,
    point: ProjectivePoint,
    orbit_cap: int = DEFAULT_ORBIT_CAP,
    height_cap: float = DEFAULT_HEIGHT_CAP,
) -> OrbitClassification:
    """Walk the orbit until it repeats or the height blows past the cap.

    A repeat at the start means periodic (the first return gives the minimal
    period); a repeat later means preperiodic with the tail length recorded.
    No repeat within the caps is reported as escaping with the height at
    cutoff as evidence.
    """
    seen = {point: 0}
    orbit = [point]
    q = point
    for step in range(1, orbit_cap + 1):
        q = apply_map(f, q)
        if q in seen:
            j = seen[q]
            period = step - j
            if j == 0:
                return OrbitClassification("periodic", period=period, tail=0,
                                           orbit_prefix=tuple(orbit))
            return OrbitClassification("preperiodic", period=period, tail=j,
                                       orbit_prefix=tuple(orbit))
        h = naive_height(q)
        orbit.append(q)
        if h > height_cap:
            return OrbitClassification("escaping", height_at_cutoff=h,
                                       orbit_prefix=tuple(orbit))
        seen[q] = step
    return OrbitClassification("escaping", height_at_cutoff=naive_height(q),
                               orbit_prefix=tuple(orbit))


def canonical_height(
    f: RationalMap,
    point: ProjectivePoint,
    tol: float = 1e-9,
    bit_cap: int = DEFAULT_BIT_CAP,
    max_steps: int = DEFAULT_ORBIT_CAP,
) -> float:
    """Limit of h(f^N P) / d^N, by exact iteration.

    Exactly 0.0 for points detected periodic or preperiodic.  Otherwise
    iterates until two successive estimates differ by less than tol or the
    step cap is hit; if the coordinates outgrow ``bit_cap`` bits first, the
    precision-budget error carries the partial estimate.
    """
    probe = classify_orbit(f, point, orbit_cap=max_steps,
                           height_cap=bit_cap * math.log(2) / 4)
    if probe.tag != "escaping":
        return 0.0
    d = f.degree
    q = point
    est = naive_height(q)
    for n in range(1, max_steps + 1):
        q = apply_map(f, q)
        new = naive_height(q) / d**n
        if abs(new - est) < tol:
            return new
        est = new
        if _bits(q) > bit_cap:
            raise PrecisionBudgetError(
                f"coordinates exceeded {bit_cap} bits at step {n} "
                f"(estimate so far {est:.6g})",
                partial=est,
            )
    return est


def periodic_points(
    f: RationalMap, max_period: int, bit_cap: int = DEFAULT_BIT_CAP
) -> set[ProjectivePoint]:
    """All rational points of period <= max_period.

    For each n the fixed points of f^n are the rational roots of
    x * Y_n(x) - X_n(x) where (X_n, Y_n) is the iterated pair, plus the
    point at infinity when Y_n has no X^{d^n} term.  Every candidate is
    re-verified by an exact orbit before it is believed.
    """
    if max_period < 1:
        raise DomainError("max_period must be >= 1")
    found: set[ProjectivePoint] = set()
    num: Sequence[int] = f.numerator
    den: Sequence[int] = f.denominator
    for n in range(1, max_period + 1):
        if n > 1:
            num, den = (
                _compose(f.numerator, num, den),
                _compose(f.denominator, num, den),
            )
            num, den = _primitive_pair(num, den)
        if max(abs(c).bit_length() for c in list(num) + list(den)) > bit_cap:
            raise PrecisionBudgetError(
                f"iterate coefficients exceeded {bit_cap} bits at period {n}"
            )
        # affine fixed-point polynomial x*Y_n(x) - X_n(x)
        poly = [0] + list(den)
        for i, c in enumerate(num):
            poly[i] -= c
        if any(poly):
            for root in rational_roots(poly):
                cand = ProjectivePoint.over_q((root, 1))
                if cand not in found and _verify_periodic(f, cand, max_period):
                    found.add(cand)
        if den[-1] == 0:
            inf = ProjectivePoint((1, 0))
            if inf not in found and _verify_periodic(f, inf, max_period):
                found.add(inf)
    return found


def _verify_periodic(f: RationalMap, point: ProjectivePoint, max_period: int) -> bool:
    q = point
    for _ in range(max_period):
        q = apply_map(f, q)
        if q == point:
            return True
    return False


# --------------------------------------------------------------------------
# preimage trees


@dataclass
class PreimageNode:
    point: ProjectivePoint
    children: list["PreimageNode"] = field(default_factory=list)


@dataclass
class PreimageTree:
    """Rational preimage tree of a point under a finite chain of maps.

    ``certified_depth`` is the longest chain of rational preimages found;
    the root is certified trivial to the requested depth iff
    certified_depth == depth.
    """

    root: PreimageNode
    depth: int
    certified_depth: int

    @property
    def certified(self) -> bool:
        return self.certified_depth == self.depth


def preimage_chain(
    maps: RationalMap | Sequence[RationalMap],
    point: ProjectivePoint,
    depth: int,
) -> PreimageTree:
    """Search rational preimages level by level.

    ``maps`` is a single map (used at every level) or one map per level;
    ``maps[k-1]`` pulls level k-1 points back to level k.
    """
    if depth < 0:
        raise DomainError("depth must be >= 0")
    if isinstance(maps, RationalMap):
        chain = [maps] * depth
    else:
        chain = list(maps)
        if len(chain) < depth:
            raise DomainError(f"need {depth} maps, got {len(chain)}")
    root = PreimageNode(point)
    best = 0
    frontier = [root]
    for level in range(depth):
        f = chain[level]
        nxt: list[PreimageNode] = []
        for node in frontier:
            for pre in _fiber(f, node.point):
                child = PreimageNode(pre)
                node.children.append(child)
                nxt.append(child)
        if not nxt:
            break
        best = level + 1
        frontier = nxt
    return PreimageTree(root, depth, best)


def _fiber(f: RationalMap, q: ProjectivePoint) -> list[ProjectivePoint]:
    """Rational solutions of f(x) = q, infinity included."""
    qa, qb = q.coords
    d = f.degree
    poly = [qb * fc - qa * gc for fc, gc in zip(f.numerator, f.denominator)]
    out = []
    if any(poly):
        for root in rational_roots(poly):
            out.append(ProjectivePoint.over_q((root, 1)))
    if qb * f.numerator[-1] - qa * f.denominator[-1] == 0:
        out.append(ProjectivePoint((1, 0)))
    return sorted(out, key=lambda pt: pt.coords)
