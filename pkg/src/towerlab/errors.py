"""Exception hierarchy shared by every towerlab module.

Three bases, matching the CLI exit-code contract: bad configuration or
unparseable input (exit 1), a mathematically well-posed request that fails a
domain precondition (exit 2), and a computation that hit a resource cap
(exit 3).  Library code raises the concrete subclasses; only the CLI cares
about the grouping.
"""

from __future__ import annotations


class TowerlabError(Exception):
    """Base class for all structured towerlab errors."""


class ConfigError(TowerlabError):
    """Invalid configuration or input text (CLI exit code 1)."""


class DomainError(TowerlabError):
    """Precondition failure on otherwise valid input (CLI exit code 2)."""


class ResourceCapError(TowerlabError):
    """A configured resource cap was exceeded (CLI exit code 3)."""


class ParseError(ConfigError):
    """Unparseable polynomial, map, point or tower text."""


class NotPrimeError(ConfigError):
    """A modulus that must be prime is not."""

    def __init__(self, n: int):
        self.n = n
        super().__init__(f"{n} is not prime")


class NonHomogeneousError(ParseError):
    """Polynomial input mixes total degrees; names the offending monomial."""

    def __init__(self, monomial: str, degree: int, expected: int):
        self.monomial = monomial
        self.degree = degree
        self.expected = expected
        super().__init__(
            f"not homogeneous: monomial {monomial} has degree {degree}, "
            f"expected {expected}"
        )


class DimensionMismatchError(DomainError):
    """Polynomial arity and point arity disagree."""

    def __init__(self, poly_vars: int, point_coords: int):
        self.poly_vars = poly_vars
        self.point_coords = point_coords
        super().__init__(
            f"polynomial in {poly_vars} variables evaluated at a point "
            f"with {point_coords} coordinates"
        )


class DegenerateReductionError(DomainError):
    """Every coefficient of a form vanishes at the reduction prime."""

    def __init__(self, prime: int):
        self.prime = prime
        super().__init__(f"form reduces to zero mod {prime}")


class BadReductionError(DomainError):
    """Reduction mod p breaks a structural hypothesis (smoothness, morphism)."""


class MembershipError(DomainError):
    """A point claimed to lie on a level curve does not."""

    def __init__(self, point, equation):
        self.point = point
        self.equation = equation
        super().__init__(f"point {point} does not satisfy {equation}")


class IndeterminateProjectionError(DomainError):
    """Forgetting the last coordinate produced the zero vector."""


class DisconnectedGraphError(DomainError):
    """Spectral-gap request on a disconnected graph."""

    def __init__(self, components: int):
        self.components = components
        super().__init__(f"graph is disconnected ({components} components)")


class EnumerationCapError(ResourceCapError):
    """Projective enumeration larger than the configured cap."""

    def __init__(self, size: int, cap: int):
        self.size = size
        self.cap = cap
        super().__init__(f"enumeration of {size} points exceeds cap {cap}")


class PrecisionBudgetError(ResourceCapError):
    """Exact coordinates outgrew the bit budget before convergence."""

    def __init__(self, message: str, partial: float | None = None):
        self.partial = partial
        super().__init__(message)


class MatrixDimensionCapError(ResourceCapError):
    """Dense eigensolve requested above the dimension cap."""

    def __init__(self, dim: int, cap: int):
        self.dim = dim
        self.cap = cap
        super().__init__(f"matrix dimension {dim} exceeds cap {cap}")
