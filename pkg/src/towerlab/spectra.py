"""Schreier and Cayley graphs with their combinatorial Laplacian spectra.

Graph convention, fixed once: for a symmetrized generator multiset S acting
on the vertex set, the adjacency matrix is A[x][y] = #{s in S : s(x) = y}.
Row sums then equal r = |S| unconditionally, a non-involutive generator
fixing x contributes 2 to the diagonal (once for s, once for s^-1), and a
deduplicated involutive generator contributes a half-loop of weight 1.
The Laplacian is L = r*I - A, which is unchanged by adding fixed points,
so loop bookkeeping never leaks into the spectrum.

The eigensolver is a deterministic cyclic Jacobi iteration: given the same
matrix and tolerance it performs the same rotations in the same order, so
spectra are reproducible to the bit across runs.
"""

from __future__ import annotations

import math
import warnings
from collections import deque
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    DisconnectedGraphError,
    DomainError,
    MatrixDimensionCapError,
)

DEFAULT_EIG_TOL = 1e-10
DEFAULT_ZERO_THRESHOLD = 1e-8
DEFAULT_DIM_CAP = 4096


@dataclass
class RegularMultigraph:
    """An r-regular multigraph with loops, held as a dense integer matrix."""

    adjacency: np.ndarray
    r: int
    label: str = ""

    def __post_init__(self):
        a = np.asarray(self.adjacency, dtype=np.int64)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DomainError("adjacency must be square")
        if (a < 0).any():
            raise DomainError("adjacency entries must be nonnegative")
        if not np.array_equal(a, a.T):
            raise DomainError("adjacency must be symmetric")
        if not (a.sum(axis=1) == self.r).all():
            raise DomainError(f"rows must sum to r = {self.r}")
        self.adjacency = a

    @property
    def n_vertices(self) -> int:
        return self.adjacency.shape[0]


Perm = tuple[int, ...]


def _validate_perm(perm: Sequence[int], size: int) -> Perm:
    t = tuple(perm)
    if sorted(t) != list(range(size)):
        raise DomainError(f"{t} is not a permutation of 0..{size - 1}")
    return t


def _invert_perm(perm: Perm) -> Perm:
    inv = [0] * len(perm)
    for i, j in enumerate(perm):
        inv[j] = i
    return tuple(inv)


def _symmetrize(elements: list, invert) -> list:
    """Close under inverses; an inverse already present (or an involutive
    element) is not added again, so the multiset is never silently doubled."""
    out = list(elements)
    for g in elements:
        gi = invert(g)
        if gi != g and gi not in elements:
            out.append(gi)
    return out


def schreier_graph(
    generators: Sequence[Sequence[int]],
    symmetric: bool = False,
    label: str = "",
) -> RegularMultigraph:
    """Action graph of a permutation list on its ground set.

    With ``symmetric=False`` the generator list is closed under inverses
    first.  Pass an explicitly inverse-closed list (``symmetric=True``) to
    control multi-edges yourself.
    """
    if not generators:
        raise DomainError("need at least one generator")
    size = len(generators[0])
    perms = [_validate_perm(g, size) for g in generators]
    if not symmetric:
        perms = _symmetrize(perms, _invert_perm)
    a = np.zeros((size, size), dtype=np.int64)
    for s in perms:
        for x, y in enumerate(s):
            a[x, y] += 1
    return RegularMultigraph(a, len(perms), label=label or "schreier")


def cycle_graph(n: int) -> RegularMultigraph:
    """The n-cycle as the Cayley graph of Z/n with generators +1, -1."""
    if n < 3:
        raise DomainError("cycle graphs need n >= 3")
    plus = tuple((i + 1) % n for i in range(n))
    minus = tuple((i - 1) % n for i in range(n))
    g = schreier_graph([plus, minus], symmetric=True, label=f"cycle({n})")
    return g


def complete_graph(n: int) -> RegularMultigraph:
    """K_n as the Cayley graph of Z/n with every nonzero shift."""
    if n < 2:
        raise DomainError("complete graphs need n >= 2")
    shifts = [tuple((i + k) % n for i in range(n)) for k in range(1, n)]
    return RegularMultigraph(
        schreier_graph(shifts, symmetric=True).adjacency, n - 1, label=f"complete({n})"
    )


# --------------------------------------------------------------------------
# SL2 Cayley graphs

Mat = tuple[int, int, int, int]

STANDARD_SL2_GENERATORS: tuple[Mat, ...] = ((1, 1, 0, 1), (1, 0, 1, 1))


def sl2_order(m: int) -> int:
    """|SL_2(Z/m)| = m^3 * prod over primes p | m of (1 - p^-2)."""
    if m < 2:
        raise DomainError("modulus must be >= 2")
    order = m**3
    rem, p = m, 2
    while p * p <= rem:
        if rem % p == 0:
            order = order // (p * p) * (p * p - 1)
            while rem % p == 0:
                rem //= p
        p += 1
    if rem > 1:
        order = order // (rem * rem) * (rem * rem - 1)
    return order


def _mat_mul(a: Mat, b: Mat, m: int) -> Mat:
    return (
        (a[0] * b[0] + a[1] * b[2]) % m,
        (a[0] * b[1] + a[1] * b[3]) % m,
        (a[2] * b[0] + a[3] * b[2]) % m,
        (a[2] * b[1] + a[3] * b[3]) % m,
    )


def _mat_inv(a: Mat, m: int) -> Mat:
    return (a[3] % m, -a[1] % m, -a[2] % m, a[0] % m)


def cayley_sl2(
    m: int, generators: Sequence[Sequence[int]] | None = None
) -> RegularMultigraph:
    """Cayley graph of the subgroup of SL_2(Z/m) spanned by the generators.

    Defaults to the two unipotent shears, which span the whole group.
    Vertices are indexed in breadth-first discovery order from the identity,
    so the construction is deterministic.  A proper subgroup triggers a
    warning, not an error.
    """
    if m < 2:
        raise DomainError("modulus must be >= 2")
    if generators is None:
        gens = [tuple(int(x) % m for x in g) for g in STANDARD_SL2_GENERATORS]
    else:
        gens = [tuple(int(x) % m for x in g) for g in generators]
    for g in gens:
        if len(g) != 4:
            raise DomainError(f"generator {g} is not a 2x2 matrix")
        if (g[0] * g[3] - g[1] * g[2]) % m != 1:
            raise DomainError(f"generator {g} has determinant != 1 mod {m}")
    sym = _symmetrize(gens, lambda g: _mat_inv(g, m))

    identity: Mat = (1 % m, 0, 0, 1 % m)
    index = {identity: 0}
    elements = [identity]
    queue = deque([identity])
    while queue:
        g = queue.popleft()
        for s in sym:
            h = _mat_mul(s, g, m)
            if h not in index:
                index[h] = len(elements)
                elements.append(h)
                queue.append(h)
    full = sl2_order(m)
    if len(elements) < full:
        warnings.warn(
            f"generators span {len(elements)} of {full} elements of SL_2(Z/{m})",
            stacklevel=2,
        )
    a = np.zeros((len(elements), len(elements)), dtype=np.int64)
    for i, g in enumerate(elements):
        for s in sym:
            a[i, index[_mat_mul(s, g, m)]] += 1
    return RegularMultigraph(a, len(sym), label=f"cayley(SL2(Z/{m}))")


# --------------------------------------------------------------------------
# spectra


def laplacian(g: RegularMultigraph) -> np.ndarray:
    return g.r * np.eye(g.n_vertices, dtype=np.int64) - g.adjacency


def eigenvalues(
    matrix: np.ndarray,
    tol: float = DEFAULT_EIG_TOL,
    dim_cap: int = DEFAULT_DIM_CAP,
) -> np.ndarray:
    """All eigenvalues of a symmetric matrix, ascending.

    Cyclic Jacobi rotations, swept row by row until the off-diagonal
    Frobenius norm drops below tol; rotations below tol/n^2 are skipped,
    which cannot leave more than tol of off-diagonal mass behind.  By the
    Wielandt-Hoffman bound the sorted eigenvalues are then within tol of
    the truth.  Deterministic: same matrix and tol, same result.
    """
    a = np.array(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DomainError("matrix must be square")
    n = a.shape[0]
    if n > dim_cap:
        raise MatrixDimensionCapError(n, dim_cap)
    if not np.allclose(a, a.T, rtol=0.0, atol=1e-12):
        raise DomainError("matrix must be symmetric")
    if n == 1:
        return a.diagonal().copy()
    skip = tol / (n * n)
    for _ in range(100):
        off = math.sqrt(2.0 * float(np.sum(np.triu(a, 1) ** 2)))
        if off <= tol:
            break
        for p in range(n - 1):
            candidates = np.nonzero(np.abs(a[p, p + 1 :]) > skip)[0]
            for off_idx in candidates:
                _rotate(a, p, p + 1 + int(off_idx))
    else:
        raise DomainError("Jacobi iteration failed to converge")
    return np.sort(a.diagonal().copy())


def _rotate(a: np.ndarray, p: int, q: int) -> None:
    apq = a[p, q]
    if apq == 0.0:
        return
    app, aqq = a[p, p], a[q, q]
    theta = (aqq - app) / (2.0 * apq)
    t = math.copysign(1.0, theta) / (abs(theta) + math.hypot(1.0, theta))
    c = 1.0 / math.sqrt(1.0 + t * t)
    s = t * c
    col_p = a[:, p].copy()
    col_q = a[:, q].copy()
    a[:, p] = c * col_p - s * col_q
    a[:, q] = s * col_p + c * col_q
    row_p = a[p, :].copy()
    row_q = a[q, :].copy()
    a[p, :] = c * row_p - s * row_q
    a[q, :] = s * row_p + c * row_q
    a[p, p] = app - t * apq
    a[q, q] = aqq + t * apq
    a[p, q] = a[q, p] = 0.0


def _neighbor_lists(g: RegularMultigraph) -> list[np.ndarray]:
    return [np.nonzero(g.adjacency[i] > 0)[0] for i in range(g.n_vertices)]


def components(g: RegularMultigraph) -> int:
    nbrs = _neighbor_lists(g)
    seen = [False] * g.n_vertices
    count = 0
    for start in range(g.n_vertices):
        if seen[start]:
            continue
        count += 1
        stack = [start]
        seen[start] = True
        while stack:
            v = stack.pop()
            for w in nbrs[v]:
                if not seen[w]:
                    seen[w] = True
                    stack.append(int(w))
    return count


def diameter(g: RegularMultigraph) -> int:
    """Largest BFS eccentricity; refuses disconnected graphs."""
    nbrs = _neighbor_lists(g)
    n = g.n_vertices
    best = 0
    for start in range(n):
        dist = [-1] * n
        dist[start] = 0
        queue = deque([start])
        while queue:
            v = queue.popleft()
            for w in nbrs[v]:
                if dist[w] < 0:
                    dist[w] = dist[v] + 1
                    queue.append(int(w))
        if min(dist) < 0:
            raise DisconnectedGraphError(components(g))
        best = max(best, max(dist))
    return best


def lambda1(
    g: RegularMultigraph,
    zero_threshold: float = DEFAULT_ZERO_THRESHOLD,
    tol: float = DEFAULT_EIG_TOL,
    dim_cap: int = DEFAULT_DIM_CAP,
) -> float:
    """Smallest nonzero Laplacian eigenvalue of a connected graph."""
    k = components(g)
    if k > 1:
        raise DisconnectedGraphError(k)
    eigs = eigenvalues(laplacian(g), tol=tol, dim_cap=dim_cap)
    nonzero = eigs[eigs > zero_threshold]
    if nonzero.size == 0:
        raise DomainError("graph has no nonzero Laplacian eigenvalue")
    return float(nonzero[0])


def cycle_spectrum(n: int) -> list[float]:
    """Closed-form Laplacian spectrum 2 - 2 cos(2 pi k / n) of the n-cycle,
    in k-order (not sorted)."""
    if n < 3:
        raise DomainError("cycle graphs need n >= 3")
    return [2.0 - 2.0 * math.cos(2.0 * math.pi * k / n) for k in range(n)]


# --------------------------------------------------------------------------
# gap tests


@dataclass(frozen=True)
class DscResult:
    bound: float
    holds: bool
    lambda1: float
    diameter: int
    s_count: int


def dsc_check(
    g: RegularMultigraph,
    s_count: int | None = None,
    diam: int | None = None,
    tol: float = 1e-9,
) -> DscResult:
    """Check the group-graph gap bound lambda_1 >= 1 / (|S| * diam^2).

    ``s_count`` defaults to the graph's regularity r, which equals the size
    of the symmetrized generator multiset for graphs built here; ``diam``
    is computed by all-pairs BFS when not supplied.
    """
    if s_count is None:
        s_count = g.r
    if s_count < 1:
        raise DomainError("generator count must be >= 1")
    if diam is None:
        diam = diameter(g)
    lam = lambda1(g)
    bound = 1.0 / (s_count * diam * diam)
    return DscResult(bound, lam >= bound - tol, lam, diam, s_count)


@dataclass(frozen=True)
class FamilyVerdict:
    passed: bool
    witness_index: int | None
    lambda1_values: tuple[float, ...]


def _family_lambda1(graphs: Sequence[RegularMultigraph]) -> tuple[float, ...]:
    if not graphs:
        raise DomainError("empty graph sequence")
    sizes = [g.n_vertices for g in graphs]
    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise DomainError("graph sizes must be strictly increasing")
    return tuple(lambda1(g) for g in graphs)


def expander_test(graphs: Sequence[RegularMultigraph], c: float) -> FamilyVerdict:
    """Uniform gap test: every lambda_1 >= c."""
    if c <= 0:
        raise DomainError("expander constant must be positive")
    lams = _family_lambda1(graphs)
    for i, lam in enumerate(lams):
        if lam < c:
            return FamilyVerdict(False, i, lams)
    return FamilyVerdict(True, None, lams)


def esperantist_test(
    graphs: Sequence[RegularMultigraph], c: float, exponent: float
) -> FamilyVerdict:
    """Logarithmically decaying gap test: lambda_1 >= c / (ln 2|V|)^exponent."""
    if c <= 0 or exponent < 0:
        raise DomainError("need c > 0 and exponent >= 0")
    lams = _family_lambda1(graphs)
    for i, (g, lam) in enumerate(zip(graphs, lams)):
        if lam < c / math.log(2 * g.n_vertices) ** exponent:
            return FamilyVerdict(False, i, lams)
    return FamilyVerdict(True, None, lams)


@dataclass(frozen=True)
class TrendResult:
    values: tuple[float, ...]
    verdict: str  # "increasing" | "decreasing" | "inconclusive"


def lambda1_volume_trend(graphs: Sequence[RegularMultigraph]) -> TrendResult:
    """Diagnostic trend of lambda_1 * |V|; the verdict looks only at the
    last half of the sequence, where the asymptotics have a chance to show."""
    lams = _family_lambda1(graphs)
    values = tuple(lam * g.n_vertices for lam, g in zip(lams, graphs))
    tail = values[-((len(values) + 1) // 2) :]
    verdict = "inconclusive"
    if len(tail) >= 2:
        if all(b > a for a, b in zip(tail, tail[1:])):
            verdict = "increasing"
        elif all(b < a for a, b in zip(tail, tail[1:])):
            verdict = "decreasing"
    return TrendResult(values, verdict)


# --------------------------------------------------------------------------
# level maps between graph towers


@dataclass(frozen=True)
class GraphTowerLevelMap:
    """Vertex map from one graph level onto the previous one."""

    mapping: tuple[int, ...]
    target_size: int

    def __post_init__(self):
        if self.target_size < 1:
            raise DomainError("target must have at least one vertex")
        for v in self.mapping:
            if not 0 <= v < self.target_size:
                raise DomainError(f"image vertex {v} outside 0..{self.target_size - 1}")


@dataclass(frozen=True)
class UnramifiedReport:
    unramified: bool
    histogram: dict[int, int]  # fiber size -> number of fibers


def unramified_check(level_map: GraphTowerLevelMap) -> UnramifiedReport:
    """Fiber-size census; unramified means every fiber has the same size."""
    fibers = [0] * level_map.target_size
    for v in level_map.mapping:
        fibers[v] += 1
    if any(f == 0 for f in fibers):
        raise DomainError("level map is not surjective")
    hist: dict[int, int] = {}
    for f in fibers:
        hist[f] = hist.get(f, 0) + 1
    return UnramifiedReport(len(hist) == 1, dict(sorted(hist.items())))


def graph_to_triplets(g: RegularMultigraph) -> dict:
    """Sparse upper-triangle triplet form for JSON output."""
    entries = []
    a = g.adjacency
    for i in range(g.n_vertices):
        for j in range(i, g.n_vertices):
            if a[i, j]:
                entries.append([i, j, int(a[i, j])])
    return {"n": g.n_vertices, "r": g.r, "entries": entries}
