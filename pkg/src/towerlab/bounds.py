"""Genus and gonality bookkeeping for tower levels.

Every number these functions emit is a certified inequality on the gonality
gamma(C) (or an exact genus), each tagged with the rule that produced it:

* complete-intersection genus from the degree list, plane-curve genus from
  the total degree;
* the complete-intersection gonality lower bound (min(a) - 1) * prod(rest),
  and its planar-power analogue d * a_1 ... a_n - 1;
* counting bounds gamma >= ceil(#C(F_q) / (q + 1));
* generic upper bounds 2g - 2, g (given a rational point), and the
  floor((g + 3) / 2) bound over an algebraically closed field;
* the finiteness threshold: points of degree d are finite once 2d < gamma.

The tower report stitches these together level by level and records which
rule won, so a reader can audit every entry of the interval.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import DomainError
from .pointcount import count_points
from .towers import (
    CompleteIntersectionTower,
    DynamicalTower,
    PlanarPowerTower,
    TowerSpec,
    level_equations,
)


def ci_genus(degrees: tuple[int, ...] | list[int]) -> int:
    """Genus of a smooth complete-intersection curve of the given degrees,
    from 2g - 2 = (prod a_i) * (sum a_i - r - 2) for r forms in P^{r+1}."""
    if not degrees:
        raise DomainError("need at least one degree")
    if any(a < 1 for a in degrees):
        raise DomainError("degrees must be >= 1")
    r = len(degrees)
    prod = math.prod(degrees)
    two_g_minus_2 = prod * (sum(degrees) - r - 2)
    return two_g_minus_2 // 2 + 1


def planar_genus(d: int) -> int:
    """Genus of a smooth plane curve of degree d."""
    if d < 1:
        raise DomainError("degree must be >= 1")
    return (d - 1) * (d - 2) // 2


def lazarsfeld_bound(degrees: tuple[int, ...] | list[int]) -> int:
    """Gonality lower bound for a smooth complete-intersection curve:
    sort the degrees, subtract one from the smallest, multiply the rest."""
    if not degrees:
        raise DomainError("need at least one degree")
    if any(a < 2 for a in degrees):
        raise DomainError("degrees must be >= 2")
    a = sorted(degrees)
    return (a[0] - 1) * math.prod(a[1:])


def planar_power_bound(d: int, exponents: tuple[int, ...] | list[int]) -> int:
    """Gonality lower bound d * a_1 ... a_n - 1 for the level-n plane curve
    of a power tower with base degree d."""
    if d < 2:
        raise DomainError("base degree must be >= 2")
    if any(a < 2 for a in exponents):
        raise DomainError("exponents must be >= 2")
    return d * math.prod(exponents) - 1


def pointcount_gonality_bound(count: int, q: int) -> int:
    """gamma >= ceil(#C(F_q) / (q + 1)): a degree-gamma map to P^1 covers
    each of the q + 1 rational targets at most gamma times."""
    if count < 0 or q < 2:
        raise DomainError("need count >= 0 and a prime power q >= 2")
    return -(-count // (q + 1))


def hurwitz_genus_lower(g0: int, degree: int) -> int:
    """g(C') >= degree * (g0 - 1) + 1 for a degree-d cover of a genus-g0
    curve; content-free below genus 2."""
    if degree < 1:
        raise DomainError("degree must be >= 1")
    return degree * (g0 - 1) + 1


def gonality_upper_bounds(genus: int, has_point: bool, alg_closed: bool) -> int:
    """Smallest generic upper bound applicable at the given genus."""
    if genus < 2:
        raise DomainError("generic gonality upper bounds need genus >= 2")
    best = 2 * genus - 2
    if has_point:
        best = min(best, genus)
    if alg_closed:
        best = min(best, (genus + 3) // 2)
    return best


def frey_max_degree(gamma_lower: int) -> int:
    """Largest d with 2d < gamma: degrees whose points are provably finite.
    0 means no degree is certified."""
    if gamma_lower < 0:
        raise DomainError("gonality bound must be >= 0")
    return max(0, -(-gamma_lower // 2) - 1)


def ql_bound(gamma_lower: int) -> int:
    """Quadratic transfer (gamma_L - 1)^2; exposed for callers, not used by
    the tower report."""
    if gamma_lower < 1:
        raise DomainError("need a positive gonality bound")
    return (gamma_lower - 1) ** 2


# --------------------------------------------------------------------------
# per-level report


@dataclass
class BoundRecord:
    rule: str
    value: int
    inputs: tuple = ()


@dataclass
class GonalityInterval:
    """Certified gamma interval with the records that produced each end."""

    lower: int
    upper: int | None
    lower_records: list[BoundRecord] = field(default_factory=list)
    upper_records: list[BoundRecord] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    def __post_init__(self):
        if self.upper is not None and self.lower > self.upper:
            raise DomainError(
                f"inconsistent gonality interval [{self.lower}, {self.upper}]"
            )


@dataclass
class LevelBoundsRow:
    level: int
    degrees: tuple[int, ...]
    genus: int
    interval: GonalityInterval
    counts: dict[int, int]
    count_bounds: dict[int, int]
    frey_degree: int


@dataclass
class TowerReport:
    kind: str
    levels: list[int]
    primes: list[int]
    rows: list[LevelBoundsRow]
    diverging: bool


def tower_report(
    tower: TowerSpec,
    levels: range | list[int],
    primes: list[int],
    level0_has_point: bool | None = None,
    enum_cap: int | None = None,
) -> TowerReport:
    """Assemble the bounds table for a stretch of levels.

    ``level0_has_point`` feeds the degree-composition upper bound for
    complete intersections (level 0 is a plane curve; a rational point there
    makes gamma(C_0) <= d_1 - 1 and the bound composes up the tower).  The
    report never guesses: unknown stays unknown and the upper end is None.

    The counting bounds assume good reduction at the supplied primes; a bad
    prime can push the lower end past a certified upper end, and the
    interval constructor refuses loudly rather than smooth that over.
    """
    levels = sorted(levels)
    if not levels:
        raise DomainError("empty level range")
    rows = []
    for n in levels:
        rows.append(_level_row(tower, n, primes, level0_has_point, enum_cap))
    lowers = [row.interval.lower for row in rows]
    diverging = len(lowers) > 1 and all(b > a for a, b in zip(lowers, lowers[1:]))
    return TowerReport(tower.kind, levels, list(primes), rows, diverging)


def _level_row(
    tower: TowerSpec,
    n: int,
    primes: list[int],
    level0_has_point: bool | None,
    enum_cap: int | None,
) -> LevelBoundsRow:
    lower_records: list[BoundRecord] = []
    upper_records: list[BoundRecord] = []
    notes: list[str] = []

    if isinstance(tower, CompleteIntersectionTower):
        curve = level_equations(tower, n)
        degrees = tuple(f.degree for f in curve.equations)
        genus = ci_genus(degrees)
        lower_records.append(
            BoundRecord("lazarsfeld", lazarsfeld_bound(degrees), degrees))
        if level0_has_point:
            comp = (degrees[0] - 1) * math.prod(degrees[1:])
            upper_records.append(BoundRecord("degree-composition", comp, degrees))
    elif isinstance(tower, PlanarPowerTower):
        d0 = tower.base.degree
        exps = tuple(tower.exponent_at(k) for k in range(1, n + 1))
        degrees = (d0 * math.prod(exps),)
        genus = planar_genus(degrees[0])
        lower_records.append(
            BoundRecord("planar-power", planar_power_bound(d0, exps), (d0,) + exps))
        upper_records.append(
            BoundRecord("planar-projection", degrees[0], degrees))
    elif isinstance(tower, DynamicalTower):
        degrees = ()
        genus = 0
        lower_records.append(BoundRecord("projective-line", 1))
        upper_records.append(BoundRecord("projective-line", 1))
    else:
        raise DomainError(f"unknown tower {tower!r}")

    counts: dict[int, int] = {}
    count_bounds: dict[int, int] = {}
    for p in sorted(primes):
        kwargs = {} if enum_cap is None else {"enum_cap": enum_cap}
        counts[p] = count_points(tower, n, p, **kwargs).count
        bound = pointcount_gonality_bound(counts[p], p)
        count_bounds[p] = bound
        lower_records.append(BoundRecord(f"pointcount-p{p}", bound, (counts[p], p)))

    if genus >= 2:
        upper_records.append(BoundRecord("canonical-degree", 2 * genus - 2, (genus,)))

    lower = max(rec.value for rec in lower_records)
    upper = min((rec.value for rec in upper_records), default=None)
    if upper is not None and lower == upper > 1:
        notes.append(
            f"bounds meet: gonality is {lower} under the smoothness and "
            "rationality hypotheses of the contributing rules"
        )
    interval = GonalityInterval(lower, upper, lower_records, upper_records, notes)
    return LevelBoundsRow(
        n, degrees, genus, interval, counts, count_bounds, frey_max_degree(lower)
    )
