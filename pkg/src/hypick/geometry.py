"""Geometry of finite point sets: separation, separated decompositions, Carleson-square density."""
from __future__ import annotations

import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field

import networkx as nx
import numpy as np

from .errors import DomainError
from .mobius import as_points, beta

TWO_PI = 2 * math.pi
EXACT_COLORING_LIMIT = 20
DEFAULT_DEPTH = 12


@dataclass(frozen=True)
class CarlesonSquare:
    """{r e^{it} : 0 < 1 - r < side, |t - theta0| < side}, angles mod 2 pi."""

    theta0: float
    side: float

    def __post_init__(self):
        if not 0 < self.side <= 1:
            raise DomainError(f"side must lie in (0, 1], got {self.side}")

    def contains(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        gap = 1 - np.abs(z)
        return (gap > 0) & (gap < self.side) & (angular_distance(np.angle(z), self.theta0) < self.side)

    def slice_index(self, z) -> int | None:
        """m with side 2^{-m-1} < 1 - |z| <= side 2^{-m}, or None outside the square."""
        if not bool(self.contains(z)):
            return None
        return slice_index(1 - abs(complex(z)), self.side)


def angular_distance(a, b):
    d = np.mod(np.asarray(a) - b, TWO_PI)
    return np.minimum(d, TWO_PI - d)


def slice_index(gap: float, side: float) -> int:
    # powers of two via ldexp are exact, so the boundary goes to the <= side
    m = max(0, int(math.floor(math.log2(side / gap))))
    while m > 0 and gap > math.ldexp(side, -m):
        m -= 1
    while gap <= math.ldexp(side, -m - 1):
        m += 1
    return m


def dyadic_squares(depth: int = DEFAULT_DEPTH):
    """Squares with sides 1, 1/2, ..., 2^-depth and centres spaced at most one side apart."""
    for level in range(depth + 1):
        side = math.ldexp(1.0, -level)
        count = math.ceil(TWO_PI / side)
        for i in range(count):
            yield CarlesonSquare(TWO_PI * i / count, side)


@dataclass
class Separation:
    value: float
    pair: tuple | None


def pairwise_beta(Z) -> np.ndarray:
    Z = np.asarray(Z, dtype=complex)
    return np.asarray(beta(Z[:, None], Z[None, :]))


def separation_constant(Z) -> Separation:
    """Smallest hyperbolic distance between two points of Z, with the pair attaining it."""
    Z = as_points(Z)
    if len(Z) < 2:
        raise ValueError("need at least two points")
    d = pairwise_beta(Z)
    d[np.diag_indices(len(Z))] = np.inf
    i, j = np.unravel_index(np.argmin(d), d.shape)
    i, j = sorted((int(i), int(j)))
    return Separation(float(d[i, j]), (i, j))


def conflict_graph(Z, eta: float) -> nx.Graph:
    """Graph on the indices of Z with an edge whenever beta < eta."""
    Z = np.asarray(Z, dtype=complex)
    g = nx.Graph()
    g.add_nodes_from(range(len(Z)))
    if len(Z) > 1:
        d = pairwise_beta(Z)
        i, j = np.nonzero(np.triu(d < eta, k=1))
        g.add_edges_from(zip(i.tolist(), j.tolist()))
    return g


def greedy_coloring(g: nx.Graph) -> list:
    """Largest-degree-first greedy colouring as a list of colour indices."""
    col = nx.greedy_color(g, strategy="largest_first")
    return [col[v] for v in range(g.number_of_nodes())]


def max_clique(g: nx.Graph) -> list:
    if g.number_of_nodes() == 0:
        return []
    clique, _ = nx.max_weight_clique(g, weight=None)
    return sorted(clique)


def exact_coloring(g: nx.Graph) -> list:
    """Minimum colouring by DSATUR branch and bound."""
    n = g.number_of_nodes()
    if n == 0:
        return []
    adj = [set(g.adj[v]) for v in range(n)]
    best = greedy_coloring(g)
    best_k = max(best) + 1
    lower = len(max_clique(g))
    if best_k == lower:
        return best
    colors = [-1] * n

    def pick():
        def key(u):
            return len({colors[w] for w in adj[u] if colors[w] >= 0}), len(adj[u])

        return max((u for u in range(n) if colors[u] < 0), key=key)

    def search(done, used):
        nonlocal best, best_k
        if used >= best_k:
            return
        if done == n:
            best, best_k = colors.copy(), used
            return
        v = pick()
        taken = {colors[w] for w in adj[v]}
        for c in range(used):
            if c not in taken:
                colors[v] = c
                search(done + 1, used)
                colors[v] = -1
                if best_k == lower:
                    return
        if used + 1 < best_k:
            colors[v] = used
            search(done + 1, used + 1)
            colors[v] = -1

    search(0, 0)
    return best


@dataclass
class Decomposition:
    feasible: bool
    parts: list | None
    part_count: int
    method: str
    clique: list
    certified: bool

    def as_dict(self) -> dict:
        return {
            "feasible": self.feasible,
            "parts": self.parts,
            "part_count": self.part_count,
            "coloring": self.method,
            "clique_witness": self.clique,
            "certified": self.certified,
        }


def decompose_separated(Z, eta: float, max_parts: int) -> Decomposition:
    """Split Z into at most ``max_parts`` subsets, each with pairwise beta >= eta.

    Exact minimum colouring of the conflict graph up to 20 points, greedy
    above. ``part_count`` is the number of parts actually used; with the
    exact method it is the minimum. An infeasible answer is ``certified``
    when it rests on the exact method or on a clique larger than max_parts.
    """
    if not eta > 0:
        raise DomainError("eta must be positive")
    Z = as_points(Z)
    g = conflict_graph(Z, eta)
    if len(Z) <= EXACT_COLORING_LIMIT:
        colors, method = exact_coloring(g), "exact"
    else:
        colors, method = greedy_coloring(g), "greedy"
    k = max(colors) + 1 if colors else 0
    clique = max_clique(g)
    feasible = k <= max_parts
    parts = None
    if feasible:
        parts = [[i for i, c in enumerate(colors) if c == p] for p in range(k)]
    certified = feasible or method == "exact" or len(clique) > max_parts
    return Decomposition(feasible, parts, k, method, clique, certified)


@dataclass
class DensityResult:
    passed: bool
    table: list
    worst: dict | None
    fit_alpha: float | None
    M: float
    alpha: float
    squares_tested: int

    def as_dict(self) -> dict:
        return {
            "passed": self.passed,
            "M": self.M,
            "alpha": self.alpha,
            "worst": self.worst,
            "fit_alpha": self.fit_alpha if self.fit_alpha is not None else "infeasible",
            "squares_tested": self.squares_tested,
            "table": self.table,
        }


def _dyadic_counts(Z: np.ndarray, depth: int) -> dict:
    counts = defaultdict(Counter)
    gaps = 1 - np.abs(Z)
    angles = np.mod(np.angle(Z), TWO_PI)
    for level in range(depth + 1):
        side = math.ldexp(1.0, -level)
        count = math.ceil(TWO_PI / side)
        step = TWO_PI / count
        for gap, th in zip(gaps, angles):
            if not 0 < gap < side:
                continue
            base = int(th // step)
            m = slice_index(float(gap), side)
            for i in {(base + d) % count for d in range(-2, 3)}:
                if angular_distance(th, step * i) < side:
                    counts[(level, i)][m] += 1
    table = {}
    for (level, i), c in counts.items():
        side = math.ldexp(1.0, -level)
        table[(level, i)] = (CarlesonSquare(TWO_PI * i / math.ceil(TWO_PI / side), side), c)
    return table


def density_condition(Z, squares=None, M: float = 1.0, alpha: float = 0.5, depth: int = DEFAULT_DEPTH) -> DensityResult:
    """Check #(Z in the m-th dyadic slice of Q) <= M 2^{alpha m} for every tested square.

    With ``squares=None`` the dyadic family of the given depth is used and
    only squares meeting Z are tabulated (empty squares pass trivially).
    """
    if not M > 0:
        raise DomainError("M must be positive")
    if not 0 < alpha < 1:
        raise DomainError("alpha must lie in (0, 1)")
    Z = as_points(Z)
    if squares is None:
        entries = [v for _, v in sorted(_dyadic_counts(Z, depth).items())]
        tested = sum(math.ceil(TWO_PI / math.ldexp(1.0, -lv)) for lv in range(depth + 1))
    else:
        entries = []
        for q in squares:
            inside = Z[q.contains(Z)]
            entries.append((q, Counter(slice_index(1 - abs(complex(z)), q.side) for z in inside)))
        tested = len(entries)

    table, worst, worst_score = [], None, -1.0
    need, infeasible = 0.0, False
    for q, c in entries:
        table.append({"theta0": q.theta0, "side": q.side, "counts": {str(m): c[m] for m in sorted(c)}})
        for m, cnt in c.items():
            score = cnt / (M * 2.0 ** (alpha * m))
            if score > worst_score:
                worst_score = score
                worst = {"theta0": q.theta0, "side": q.side, "m": m, "count": cnt, "bound": M * 2.0 ** (alpha * m)}
            if cnt > M:
                if m == 0:
                    infeasible = True
                else:
                    need = max(need, math.log2(cnt / M) / m)
    fit = None if infeasible or need >= 1 else need
    return DensityResult(worst_score <= 1.0, table, worst, fit, float(M), float(alpha), tested)


def hyperbolic_grid(region_radius: float, grid_step: float) -> np.ndarray:
    """Polar grid on |z| <= region_radius with neighbours at most grid_step apart in beta."""
    if not 0 < region_radius < 1:
        raise DomainError("region_radius must lie in (0, 1)")
    if not grid_step > 0:
        raise DomainError("grid_step must be positive")
    big = 2 * math.atanh(region_radius)
    rings = max(1, math.ceil(big / grid_step))
    nodes = [np.zeros(1, dtype=complex)]
    for i in range(1, rings + 1):
        s = big * i / rings
        count = max(3, math.ceil(TWO_PI * math.sinh(s) / grid_step))
        nodes.append(math.tanh(s / 2) * np.exp(2j * np.pi * np.arange(count) / count))
    return np.concatenate(nodes)


@dataclass
class CoverReport:
    passed: bool
    worst_gap: float
    worst_node: complex | None
    grid_size: int
    region_radius: float
    R: float

    def as_dict(self) -> dict:
        node = None if self.worst_node is None else [self.worst_node.real, self.worst_node.imag]
        return {
            "passed": self.passed,
            "worst_gap": self.worst_gap,
            "worst_node": node,
            "grid_size": self.grid_size,
            "region_radius": self.region_radius,
            "R": self.R,
            "note": "R-density tested only on the disc |z| <= region_radius",
        }


def r_dense_check(Z, R: float, region_radius: float, grid_step: float) -> CoverReport:
    """Every grid node of the truncated region must lie within beta < R of Z."""
    if not R > 0:
        raise DomainError("R must be positive")
    grid = hyperbolic_grid(region_radius, grid_step)
    Z = as_points(Z)
    if len(Z) == 0:
        return CoverReport(False, math.inf, None, len(grid), region_radius, R)
    gaps = np.empty(len(grid))
    chunk = max(1, 200_000 // len(Z))
    for s in range(0, len(grid), chunk):
        g = grid[s : s + chunk]
        gaps[s : s + chunk] = np.min(np.asarray(beta(g[:, None], Z[None, :])), axis=1)
    k = int(np.argmax(gaps))
    worst = float(gaps[k])
    return CoverReport(worst < R, worst, complex(grid[k]), len(grid), region_radius, R)


@dataclass
class OrderVerdict:
    passed: bool
    order: int
    decomposition: Decomposition
    density: DensityResult
    note: str = "finite-data check of the separation and density conditions"

    def as_dict(self) -> dict:
        return {
            "passed": self.passed,
            "parts_allowed": self.order,
            "interpolation_order": self.order - 1,
            "separation": self.decomposition.as_dict(),
            "density": self.density.as_dict(),
            "note": self.note,
        }


def classify_order(Z, n: int, eta: float, M: float, alpha: float, squares=None, depth: int = DEFAULT_DEPTH) -> OrderVerdict:
    """Order n-1 verdict: Z splits into n eta-separated parts and the density bound holds."""
    if n < 1:
        raise DomainError("n must be >= 1")
    dec = decompose_separated(Z, eta, n)
    dens = density_condition(Z, squares, M, alpha, depth)
    return OrderVerdict(dec.feasible and dens.passed, n, dec, dens)


@dataclass
class GeometryReport:
    separation: Separation | None
    verdict: OrderVerdict
    extras: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        sep = None
        if self.separation is not None:
            sep = {"value": self.separation.value, "pair": list(self.separation.pair)}
        return {"separation_constant": sep, "order_verdict": self.verdict.as_dict(), **self.extras}


def geometry_report(Z, n: int, eta: float, M: float, alpha: float, depth: int = DEFAULT_DEPTH) -> GeometryReport:
    Z = as_points(Z)
    sep = separation_constant(Z) if len(Z) >= 2 else None
    return GeometryReport(sep, classify_order(Z, n, eta, M, alpha, None, depth))
