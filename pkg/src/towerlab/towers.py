"""Tower constructions: level curves and the degree-d maps between them.

Three shapes of tower, one per dataclass:

* complete intersections, where level n is cut out of P^{n+2} by the forms
  f_1, ..., f_{n+1} (one new form and one new coordinate per level) and the
  level map forgets the last coordinate;
* planar power towers, where level n is the plane curve
  f0(X0^{a_1...a_n}, X1^{...}, X2^{...}) and the level map raises the three
  coordinates to the a_n-th power;
* genus-zero dynamical towers, where every level is P^1 and the level maps
  are rational self-maps.

Membership checks run over Q and over F_p through the same code path, which
is what makes the reduction functoriality tests downstream honest.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence, Union

from .algebra import (
    HomogeneousPolynomial,
    ProjectivePoint,
    format_polynomial,
    is_prime,
    matrix_rank_mod_p,
    parse_polynomial,
)
from .dynamics import RationalMap, apply_map, parse_rational_map
from .errors import (
    DomainError,
    IndeterminateProjectionError,
    MembershipError,
    NotPrimeError,
    ParseError,
)


@dataclass(frozen=True)
class CompleteIntersectionTower:
    """Either a 3-variable base form with the shift rule f_k = f(X_{k-1}..X_{k+1}),
    or an explicit list where forms[k] is f_{k+1} in k+3 variables."""

    base: HomogeneousPolynomial | None = None
    forms: tuple[HomogeneousPolynomial, ...] = ()

    kind = "complete-intersection"

    def __post_init__(self):
        if (self.base is None) == (not self.forms):
            raise DomainError("give exactly one of a shift base or an explicit form list")
        if self.base is not None and self.base.num_vars != 3:
            raise DomainError("shift base must be a form in X0, X1, X2")
        for k, f in enumerate(self.forms):
            if f.num_vars != k + 3:
                raise DomainError(
                    f"form {k + 1} has {f.num_vars} variables, expected {k + 3}"
                )
            if f.degree < 2:
                raise DomainError("tower forms must have degree >= 2")
        if self.base is not None and self.base.degree < 2:
            raise DomainError("tower forms must have degree >= 2")

    def max_level(self) -> int | None:
        return None if self.base is not None else len(self.forms) - 1


@dataclass(frozen=True)
class PlanarPowerTower:
    """Plane tower over a degree-d base form; exponents a_n >= 2 either as a
    finite list or one constant repeated forever."""

    base: HomogeneousPolynomial
    exponents: tuple[int, ...] = ()
    constant_exponent: int | None = None

    kind = "planar-power"

    def __post_init__(self):
        if self.base.num_vars != 3:
            raise DomainError("planar base must be a form in X0, X1, X2")
        if (self.constant_exponent is None) == (not self.exponents):
            raise DomainError("give exactly one of an exponent list or a constant exponent")
        for a in self.exponents:
            if a < 2:
                raise DomainError(f"exponent {a} must be >= 2")
        if self.constant_exponent is not None and self.constant_exponent < 2:
            raise DomainError(f"exponent {self.constant_exponent} must be >= 2")

    def exponent_at(self, n: int) -> int:
        if n < 1:
            raise DomainError("exponents are indexed from level 1")
        if self.constant_exponent is not None:
            return self.constant_exponent
        if n > len(self.exponents):
            raise DomainError(f"level {n} beyond the {len(self.exponents)} declared exponents")
        return self.exponents[n - 1]

    def cumulative_exponent(self, n: int) -> int:
        e = 1
        for k in range(1, n + 1):
            e *= self.exponent_at(k)
        return e

    def max_level(self) -> int | None:
        return None if self.constant_exponent is not None else len(self.exponents)


@dataclass(frozen=True)
class DynamicalTower:
    """Every level is P^1; maps[k-1] (or one constant map) sends level k to k-1."""

    maps: tuple[RationalMap, ...] = ()
    constant_map: RationalMap | None = None

    kind = "genus0-dynamical"

    def __post_init__(self):
        if (self.constant_map is None) == (not self.maps):
            raise DomainError("give exactly one of a map list or a constant map")

    def map_at(self, n: int) -> RationalMap:
        if n < 1:
            raise DomainError("level maps are indexed from level 1")
        if self.constant_map is not None:
            return self.constant_map
        if n > len(self.maps):
            raise DomainError(f"level {n} beyond the {len(self.maps)} declared maps")
        return self.maps[n - 1]

    def max_level(self) -> int | None:
        return None if self.constant_map is not None else len(self.maps)


TowerSpec = Union[CompleteIntersectionTower, PlanarPowerTower, DynamicalTower]


@dataclass(frozen=True)
class LevelCurve:
    """Level n with its ambient projective dimension and defining forms."""

    level: int
    ambient_dim: int
    equations: tuple[HomogeneousPolynomial, ...]


# --------------------------------------------------------------------------
# named towers


def fibonacci_tower() -> CompleteIntersectionTower:
    """Quadric tower over X0^2 + X1^2 - X2^2 with the shift rule."""
    return CompleteIntersectionTower(base=parse_polynomial("X0^2 + X1^2 - X2^2"))


def fermat_tower(p: int) -> PlanarPowerTower:
    """Plane tower with both base degree and every exponent equal to p."""
    if not is_prime(p):
        raise NotPrimeError(p)
    base = parse_polynomial(f"X0^{p} + X1^{p} - X2^{p}")
    return PlanarPowerTower(base=base, constant_exponent=p)


def planar_power_tower(
    base: HomogeneousPolynomial, exponents: Sequence[int] | int
) -> PlanarPowerTower:
    if isinstance(exponents, int):
        return PlanarPowerTower(base=base, constant_exponent=exponents)
    return PlanarPowerTower(base=base, exponents=tuple(exponents))


def dynamical_tower(maps: RationalMap | Sequence[RationalMap]) -> DynamicalTower:
    if isinstance(maps, RationalMap):
        return DynamicalTower(constant_map=maps)
    return DynamicalTower(maps=tuple(maps))


# --------------------------------------------------------------------------
# level geometry


def _check_level(tower: TowerSpec, n: int) -> None:
    if n < 0:
        raise DomainError("levels are indexed from 0")
    top = tower.max_level()
    if top is not None and n > top:
        raise DomainError(f"level {n} beyond the declared top level {top}")


def level_equations(tower: TowerSpec, n: int) -> LevelCurve:
    """Defining forms of level n in its ambient projective space."""
    _check_level(tower, n)
    if isinstance(tower, CompleteIntersectionTower):
        nv = n + 3
        if tower.base is not None:
            eqs = tuple(tower.base.shifted(k, nv) for k in range(n + 1))
        else:
            eqs = tuple(f.extended(nv) for f in tower.forms[: n + 1])
        return LevelCurve(n, n + 2, eqs)
    if isinstance(tower, PlanarPowerTower):
        e = tower.cumulative_exponent(n)
        eq = tower.base if e == 1 else tower.base.power_substituted(e)
        return LevelCurve(n, 2, (eq,))
    raise DomainError("a dynamical tower has no ambient equations")


def on_level(tower: TowerSpec, n: int, point: ProjectivePoint) -> bool:
    """Membership test; reduces equations mod p for finite-field points."""
    if isinstance(tower, DynamicalTower):
        _check_level(tower, n)
        return len(point.coords) == 2
    curve = level_equations(tower, n)
    if len(point.coords) != curve.ambient_dim + 1:
        return False
    eqs = curve.equations
    if point.modulus is not None:
        eqs = tuple(f.reduce_mod(point.modulus) for f in eqs)
    return all(f.vanishes_at(point) for f in eqs)


def level_map(tower: TowerSpec, n: int, point: ProjectivePoint) -> ProjectivePoint:
    """The map C_n -> C_{n-1} applied to a checked point of C_n."""
    _check_level(tower, n)
    if n < 1:
        raise DomainError("the level map starts at level 1")
    if isinstance(tower, DynamicalTower):
        return apply_map(tower.map_at(n), point)
    curve = level_equations(tower, n)
    if len(point.coords) != curve.ambient_dim + 1:
        raise MembershipError(point, f"ambient dimension {curve.ambient_dim}")
    eqs = curve.equations
    if point.modulus is not None:
        eqs = tuple(f.reduce_mod(point.modulus) for f in eqs)
    for f in eqs:
        if not f.vanishes_at(point):
            raise MembershipError(point, format_polynomial(f))
    if isinstance(tower, CompleteIntersectionTower):
        head = point.coords[:-1]
        if all(c == 0 for c in head):
            raise IndeterminateProjectionError(
                f"projection of {point} forgets its only nonzero coordinate"
            )
        image = _normalized(head, point.modulus)
    else:
        a = tower.exponent_at(n)
        p = point.modulus
        if p is None:
            image = _normalized(tuple(c**a for c in point.coords), None)
        else:
            image = _normalized(tuple(pow(c, a, p) for c in point.coords), p)
    assert on_level(tower, n - 1, image), "level map left the tower"
    return image


def _normalized(coords: tuple[int, ...], modulus: int | None) -> ProjectivePoint:
    if modulus is None:
        return ProjectivePoint.over_q(coords)
    return ProjectivePoint.over_fp(coords, modulus)


def level_map_composed(
    tower: TowerSpec, m: int, n: int, point: ProjectivePoint
) -> ProjectivePoint:
    """phi_{m,n} = phi_{n+1} o ... o phi_m; the identity when m == n."""
    if m < n:
        raise DomainError(f"cannot map level {m} up to level {n}")
    q = point
    for k in range(m, n, -1):
        q = level_map(tower, k, q)
    return q


# --------------------------------------------------------------------------
# reduction diagnostics


def singular_points_mod_p(tower: TowerSpec, n: int, p: int,
                          points: Sequence[ProjectivePoint]) -> list[ProjectivePoint]:
    """Points of the reduced level curve where the Jacobian drops rank.

    The level curves here have codimension equal to their number of defining
    forms, so a point is smooth iff the Jacobian has full rank there.  An
    empty return over all of C_n(F_p) is the good-reduction spot check.
    """
    curve = level_equations(tower, n)
    partials = [f.partials() for f in curve.equations]
    bad = []
    for pt in points:
        rows = []
        for row in partials:
            rows.append([_eval_terms(d, pt.coords, p) for d in row])
        if matrix_rank_mod_p(rows, p) < len(curve.equations):
            bad.append(pt)
    return bad


def _eval_terms(terms: dict[tuple[int, ...], int], coords: tuple[int, ...], p: int) -> int:
    acc = 0
    for exps, c in terms.items():
        t = c % p
        if t == 0:
            continue
        for x, e in zip(coords, exps):
            if e:
                t = t * pow(x, e, p) % p
        acc = (acc + t) % p
    return acc


# --------------------------------------------------------------------------
# description files


def tower_to_dict(tower: TowerSpec) -> dict:
    if isinstance(tower, CompleteIntersectionTower):
        if tower.base is not None:
            return {"kind": tower.kind, "shift_base": format_polynomial(tower.base)}
        return {"kind": tower.kind, "forms": [format_polynomial(f) for f in tower.forms]}
    if isinstance(tower, PlanarPowerTower):
        out: dict = {"kind": tower.kind, "base": format_polynomial(tower.base)}
        if tower.constant_exponent is not None:
            out["exponent"] = tower.constant_exponent
        else:
            out["exponents"] = list(tower.exponents)
        return out
    if isinstance(tower, DynamicalTower):
        if tower.constant_map is not None:
            return {"kind": tower.kind, "map": str(tower.constant_map)}
        return {"kind": tower.kind, "maps": [str(f) for f in tower.maps]}
    raise DomainError(f"unknown tower {tower!r}")


def tower_from_dict(data: dict) -> TowerSpec:
    try:
        kind = data["kind"]
    except KeyError:
        raise ParseError("tower description needs a 'kind' field") from None
    if kind == "complete-intersection":
        if "shift_base" in data:
            return CompleteIntersectionTower(base=parse_polynomial(data["shift_base"], 3))
        forms = tuple(
            parse_polynomial(text, k + 3) for k, text in enumerate(data.get("forms", []))
        )
        return CompleteIntersectionTower(forms=forms)
    if kind == "planar-power":
        base = parse_polynomial(data["base"], 3)
        if "exponent" in data:
            return PlanarPowerTower(base=base, constant_exponent=int(data["exponent"]))
        return PlanarPowerTower(base=base, exponents=tuple(int(a) for a in data["exponents"]))
    if kind == "genus0-dynamical":
        if "map" in data:
            return DynamicalTower(constant_map=parse_rational_map(data["map"]))
        return DynamicalTower(maps=tuple(parse_rational_map(t) for t in data["maps"]))
    raise ParseError(f"unknown tower kind {kind!r}")


def save_tower(tower: TowerSpec, path: str | Path) -> None:
    Path(path).write_text(json.dumps(tower_to_dict(tower), indent=2, sort_keys=True) + "\n")


def load_tower(path: str | Path) -> TowerSpec:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"tower file {path} is not valid JSON: {exc}") from exc
    return tower_from_dict(data)


def resolve_tower(spec: str) -> TowerSpec:
    """CLI shorthand: 'fibonacci', 'fermat:p', or a path to a tower file."""
    if spec == "fibonacci":
        return fibonacci_tower()
    if spec.startswith("fermat:"):
        try:
            return fermat_tower(int(spec.split(":", 1)[1]))
        except ValueError:
            raise ParseError(f"bad fermat exponent in {spec!r}") from None
    if Path(spec).exists():
        return load_tower(spec)
    raise ParseError(f"unknown tower {spec!r} (expected fibonacci, fermat:p, or a file path)")
