"""Point counts over F_p and the mod-p image chains they feed.

Counting is exhaustive: enumerate the normalized representatives of the
ambient projective space and keep the points where every reduced level form
vanishes.  That is exact, deterministic, and at desk scale (the ambient
enumeration is capped) entirely adequate.

The image chain D_m = phi_{m,n}(C_m(F_p)) is the finite shadow of the
tower's trivial points: the sets shrink as m grows, and whatever they
stabilize to must contain the reductions of all level-n points that lift
arbitrarily high.
"""

from __future__ import annotations

from dataclasses import dataclass

from .algebra import (
    DEFAULT_ENUM_CAP,
    PrimeField,
    ProjectivePoint,
    iter_normalized_tuples,
    projective_space_size,
)
from .errors import DomainError, EnumerationCapError
from .towers import (
    DynamicalTower,
    TowerSpec,
    level_equations,
    level_map_composed,
    on_level,
)


@dataclass(frozen=True)
class PointCountResult:
    level: int
    prime: int
    count: int
    points: tuple[ProjectivePoint, ...] | None

    def to_json_dict(self) -> dict:
        out: dict = {"level": self.level, "prime": self.prime, "count": self.count}
        if self.points is not None:
            out["points"] = [list(pt.coords) for pt in self.points]
        return out


def reduce_point(point: ProjectivePoint, p: int) -> ProjectivePoint:
    """Coordinatewise reduction of the coprime representative mod p."""
    return point.reduce_mod(p)


def _scan_size(p: int, dim: int, first_nonzero: int | None) -> int:
    if first_nonzero is None:
        return projective_space_size(p, dim)
    return p ** (dim - first_nonzero)


def _solutions(
    tower: TowerSpec,
    n: int,
    p: int,
    enum_cap: int,
    first_nonzero: int | None = None,
) -> list[ProjectivePoint]:
    """Points of C_n(F_p) in enumeration order; optionally one stratum only
    (representatives whose first nonzero coordinate sits at a fixed index)."""
    PrimeField(p)
    if isinstance(tower, DynamicalTower):
        size = _scan_size(p, 1, first_nonzero)
        if size > enum_cap:
            raise EnumerationCapError(size, enum_cap)
        return [ProjectivePoint(t, p)
                for t in iter_normalized_tuples(p, 1, first_nonzero)]
    curve = level_equations(tower, n)
    reduced = [f.reduce_mod(p) for f in curve.equations]
    dim = curve.ambient_dim
    size = _scan_size(p, dim, first_nonzero)
    if size > enum_cap:
        raise EnumerationCapError(size, enum_cap)
    max_exp = max(e for f in reduced for exps, _ in f.terms for e in exps)
    pow_table = [[pow(v, e, p) for e in range(max_exp + 1)] for v in range(p)]
    compiled = [
        [(c, [(i, e) for i, e in enumerate(exps) if e]) for exps, c in f.terms]
        for f in reduced
    ]
    hits = []
    for coords in iter_normalized_tuples(p, dim, first_nonzero):
        for terms in compiled:
            acc = 0
            for c, vl in terms:
                t = c
                for i, e in vl:
                    t = t * pow_table[coords[i]][e] % p
                acc += t
            if acc % p != 0:
                break
        else:
            hits.append(ProjectivePoint(coords, p))
    return hits


def count_points(
    tower: TowerSpec,
    n: int,
    p: int,
    retain_cap: int = 20000,
    enum_cap: int = DEFAULT_ENUM_CAP,
    first_nonzero: int | None = None,
) -> PointCountResult:
    """#C_n(F_p) by exhaustive scan; the points come along when few enough.

    ``first_nonzero`` restricts the scan to one enumeration stratum of the
    ambient space (the strata partition it), so counts can be produced in
    disjoint pieces and recombined with ``merge_counts``.
    """
    pts = _solutions(tower, n, p, enum_cap, first_nonzero)
    retained = tuple(pts) if len(pts) <= retain_cap else None
    return PointCountResult(n, p, len(pts), retained)


def merge_counts(parts: list[PointCountResult]) -> PointCountResult:
    """Combine counts of disjoint strata of the same (level, prime) scan.

    Deterministic regardless of part order: counts add, and retained points
    are sorted by coordinates.  Overlapping parts are refused, so merging
    the same stratum twice cannot inflate a count silently.
    """
    if not parts:
        raise DomainError("nothing to merge")
    level, prime = parts[0].level, parts[0].prime
    if any(r.level != level or r.prime != prime for r in parts):
        raise DomainError("merge needs results for one (level, prime) cell")
    points: tuple[ProjectivePoint, ...] | None
    if all(r.points is not None for r in parts):
        seen: set[ProjectivePoint] = set()
        for r in parts:
            overlap = seen.intersection(r.points)
            if overlap:
                first = min(overlap, key=lambda q: q.coords)
                raise DomainError(f"parts overlap at {first}")
            seen.update(r.points)
        points = tuple(sorted(seen, key=lambda q: q.coords))
    else:
        points = None
    return PointCountResult(level, prime, sum(r.count for r in parts), points)


@dataclass(frozen=True)
class ImageChain:
    """D_m = phi_{m,n}(C_m(F_p)) for m = base_level .. max_level.

    ``stabilized_at`` is the least m whose set equals everything after it,
    reported only when the constant stretch is long enough to trust (at
    least ``window`` sets) or provably absorbing (the empty set).
    """

    base_level: int
    prime: int
    max_level: int
    sets: tuple[frozenset[ProjectivePoint], ...]
    window: int
    stabilized_at: int | None

    def to_json_dict(self) -> dict:
        return {
            "base_level": self.base_level,
            "prime": self.prime,
            "max_level": self.max_level,
            "window": self.window,
            "stabilized_at": self.stabilized_at,
            "sets": [
                sorted(list(pt.coords) for pt in s) for s in self.sets
            ],
        }


def image_chain(
    tower: TowerSpec,
    n: int,
    p: int,
    m_max: int,
    window: int = 3,
    enum_cap: int = DEFAULT_ENUM_CAP,
) -> ImageChain:
    """Forward images of the finite fibers above level n.

    Each point of C_m(F_p) is pushed down through the level maps; the chain
    is checked to be nested as it is built.
    """
    if m_max < n:
        raise DomainError(f"m_max {m_max} below base level {n}")
    sets: list[frozenset[ProjectivePoint]] = []
    for m in range(n, m_max + 1):
        pts = _solutions(tower, m, p, enum_cap)
        image = frozenset(level_map_composed(tower, m, n, pt) for pt in pts)
        if sets:
            assert image <= sets[-1], "image chain is not nested"
        sets.append(image)
    first_stable = len(sets) - 1
    while first_stable > 0 and sets[first_stable - 1] == sets[-1]:
        first_stable -= 1
    run = len(sets) - first_stable
    stabilized_at = None
    if sets[first_stable:] and all(s == sets[-1] for s in sets[first_stable:]):
        if run >= window or not sets[-1]:
            stabilized_at = n + first_stable
    return ImageChain(n, p, m_max, tuple(sets), window, stabilized_at)


@dataclass(frozen=True)
class OmegaCheckResult:
    """Verdict of the finite criterion: does red_p(Omega) absorb the level-m
    fiber image, and if not, which F_p-points of C_m escape."""

    holds: bool
    base_level: int
    source_level: int
    prime: int
    witnesses: tuple[ProjectivePoint, ...]

    def to_json_dict(self) -> dict:
        return {
            "holds": self.holds,
            "base_level": self.base_level,
            "source_level": self.source_level,
            "prime": self.prime,
            "witnesses": [list(pt.coords) for pt in self.witnesses],
        }


def check_omega_criterion(
    tower: TowerSpec,
    n: int,
    omega: list[ProjectivePoint],
    p: int,
    m: int,
    enum_cap: int = DEFAULT_ENUM_CAP,
) -> OmegaCheckResult:
    """Test phi_{m,n}(C_m(F_p)) inside the reduction of a candidate set Omega.

    Omega must consist of rational points on C_n (checked).  A holding
    verdict is evidence that Omega exhausts the points of C_n that lift to
    every level; a failing one comes with the escaping F_p-points of C_m.
    """
    if m < n:
        raise DomainError(f"source level {m} below base level {n}")
    for pt in omega:
        if pt.modulus is not None:
            raise DomainError(f"Omega point {pt} is not a rational point")
        if not on_level(tower, n, pt):
            raise DomainError(f"Omega point {pt} does not lie on level {n}")
    red_omega = {reduce_point(pt, p) for pt in omega}
    witnesses = []
    for pt in sorted(_solutions(tower, m, p, enum_cap), key=lambda q: q.coords):
        if level_map_composed(tower, m, n, pt) not in red_omega:
            witnesses.append(pt)
    return OmegaCheckResult(not witnesses, n, m, p, tuple(witnesses))
