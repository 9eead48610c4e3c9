"""Hyperbolic difference quotients: data triangles, quotients of maps, compatibility checks."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .errors import DegenerateLevel, DistinctnessError, InterpolationError, PrecisionLoss
from .mobius import (
    COINCIDENCE_TOL,
    UNIMODULAR_TOL,
    DiscMap,
    as_points,
    beta,
    check_distinct,
    cp_distance,
    hyperbolic_derivative,
    rho,
)

# Below this hyperbolic distance from the node the limit (hyperbolic
# derivative) replaces the direct quotient.
LIMIT_SWITCH = 1e-6
# Up to this distance both forms are computed and cross-checked.
SANITY_BAND = 1e-4
SANITY_SLACK = 1e-5
MAX_EXHAUSTIVE_PERMUTATION = 8


def _cp(z: complex, w: complex) -> complex:
    return (w - z) / (1 - w.conjugate() * z)


def _is_unimodular(a: complex) -> bool:
    return abs(abs(a) - 1) <= UNIMODULAR_TOL


@dataclass
class DQTriangle:
    """Lower-triangular table of hyperbolic difference quotients.

    ``entries[k, j - 1]`` holds the quotient of level k at node j (nodes are
    numbered from 1, as in the usual table layout); undefined entries are NaN.
    """

    nodes: np.ndarray
    values: np.ndarray
    entries: np.ndarray
    degenerate_at: tuple | None = None

    @property
    def n(self) -> int:
        return len(self.nodes)

    def entry(self, k: int, j: int) -> complex | None:
        if not (0 <= k < self.n and k + 1 <= j <= self.n):
            raise IndexError(f"no entry ({k}, {j}) in a triangle of size {self.n}")
        v = self.entries[k, j - 1]
        return None if np.isnan(v) else complex(v)

    def diagonal(self) -> list:
        """[Delta^k_{k+1} for k = 0..n-1], None where undefined."""
        return [self.entry(k, k + 1) for k in range(self.n)]

    def defined_entries(self) -> Iterator[tuple]:
        for k in range(self.n):
            for j in range(k + 1, self.n + 1):
                v = self.entry(k, j)
                if v is not None:
                    yield k, j, v


def triangle_from_data(Z, W) -> DQTriangle:
    """Fill the quotient triangle of the data (Z, W) level by level.

    Level k is computed from level k-1 with the pivot at node k. If some
    quotient has the 0/0 form (both operands unimodular, or a vanishing
    denominator) the position is recorded in ``degenerate_at``; the rest of
    that level is still filled but deeper levels are left undefined.
    """
    Z = as_points(Z, "points")
    W = as_points(W, "targets")
    if len(Z) != len(W):
        raise ValueError(f"{len(Z)} points but {len(W)} targets")
    if len(Z) == 0:
        raise ValueError("at least one point is required")
    check_distinct(Z)
    n = len(Z)
    zs = [complex(z) for z in Z]
    table = [[complex(w) for w in W]]
    degenerate = None
    for k in range(1, n):
        prev = table[-1]
        pivot = prev[k - 1]
        row = [complex("nan")] * n
        for j in range(k + 1, n + 1):
            a = prev[j - 1]
            if math.isnan(a.real) or math.isnan(pivot.real):
                continue
            denom = 1 - pivot.conjugate() * a
            if (_is_unimodular(a) and _is_unimodular(pivot)) or abs(denom) <= UNIMODULAR_TOL:
                if degenerate is None:
                    degenerate = (k, j)
                continue
            row[j - 1] = ((pivot - a) / denom) / _cp(zs[j - 1], zs[k - 1])
        table.append(row)
        if degenerate is not None:
            table.extend([[complex("nan")] * n for _ in range(k + 1, n)])
            break
    entries = np.array(table, dtype=complex)
    # entries below the diagonal band are meaningless; blank them
    for k in range(n):
        entries[k, :k] = np.nan
    return DQTriangle(Z, W, entries, degenerate)


def _contour_derivative(fn, z, m: int = 64):
    """f'(z) from the trapezoidal Cauchy integral on |t - z| = (1 - |z|) / 2."""
    z = np.asarray(z, dtype=complex)
    r = 0.5 * (1 - np.abs(z))
    roots = np.exp(2j * np.pi * np.arange(m) / m)
    pts = z[..., None] + r[..., None] * roots
    vals = np.asarray(fn(pts))
    return (np.mean(vals * roots.conjugate(), axis=-1) / r)[()]


class QuotientMap(DiscMap):
    """z -> [f(z), f(a)] / [z, a], continued at z = a by the hyperbolic derivative."""

    def __init__(self, inner: DiscMap, node):
        self.inner = inner
        self.node = complex(node)
        anchor = complex(inner.value(self.node))
        if float(np.real(inner.one_minus_abs2(self.node))) <= 2 * UNIMODULAR_TOL:
            raise DegenerateLevel(f"previous level is unimodular at node {self.node!r}")
        self.anchor = anchor
        self.limit = hyperbolic_derivative(inner, self.node)

    def value(self, z):
        z = np.asarray(z, dtype=complex)
        a, c = self.node, self.anchor
        with np.errstate(divide="ignore", invalid="ignore"):
            direct = cp_distance(self.inner.value(z), c) / cp_distance(z, a)
        dist = np.asarray(beta(z, a))
        near = dist < LIMIT_SWITCH
        band = ~near & (dist < SANITY_BAND)
        if band.any():
            # Schwarz-Pick bounds how far the quotient can drift from its limit
            drift = np.abs(direct[band] - self.limit)
            allowed = 2 * rho(z[band], a) + SANITY_SLACK
            if np.any(drift > allowed):
                raise PrecisionLoss(f"direct quotient and limit disagree near node {a!r}")
        return np.where(near, self.limit, direct)[()]

    def derivative(self, z):
        z = np.asarray(z, dtype=complex)
        a, c = self.node, self.anchor
        f = self.inner.value(z)
        df = self.inner.derivative(z)
        with np.errstate(divide="ignore", invalid="ignore"):
            num = cp_distance(f, c)
            dnum = -df * (1 - abs(c) ** 2) / (1 - c.conjugate() * f) ** 2
            den = cp_distance(z, a)
            dden = -(1 - abs(a) ** 2) / (1 - a.conjugate() * z) ** 2
            out = (dnum * den - num * dden) / den**2
        near = np.asarray(beta(z, a)) < SANITY_BAND
        if near.any():
            out = np.array(out, dtype=complex)
            out[near] = _contour_derivative(self.value, z[near])
        return out[()]

    def describe(self):
        return {"kind": "quotient", "node": [self.node.real, self.node.imag], "inner": self.inner.describe()}


def quotient_map(f: DiscMap, prescribed: Sequence) -> DiscMap:
    """The k-th hyperbolic difference quotient of f for the nodes z_1..z_k, as a map."""
    nodes = as_points(list(prescribed), "prescribed")
    check_distinct(nodes)
    g = f
    for a in nodes:
        g = QuotientMap(g, a)
    return g


def dq_of_map(f: DiscMap, prescribed: Sequence, z) -> complex:
    return complex(quotient_map(f, prescribed).value(complex(z)))


def consistency_check(f: DiscMap, Z, W, tol: float = 1e-9) -> float:
    """Largest gap between the data triangle and the quotients of f at the nodes.

    f must interpolate the data. Levels at which the quotient of f becomes
    unimodular (f a Blaschke product of lower degree) are not compared.
    """
    Z = as_points(Z, "points")
    W = as_points(W, "targets")
    resid = np.abs(np.asarray(f.value(Z)) - W)
    worst = int(np.argmax(resid)) if len(resid) else 0
    if len(resid) and resid[worst] > tol:
        raise InterpolationError(
            f"map misses target {worst} by {resid[worst]:.3e}", index=worst, residual=float(resid[worst])
        )
    t = triangle_from_data(Z, W)
    dev = 0.0
    g = f
    for k in range(t.n):
        if k > 0:
            try:
                g = QuotientMap(g, Z[k - 1])
            except DegenerateLevel:
                break
        js = [j for j in range(k + 1, t.n + 1) if t.entry(k, j) is not None]
        if not js:
            continue
        expected = np.array([t.entry(k, j) for j in js])
        got = np.asarray(g.value(Z[np.array(js) - 1]))
        dev = max(dev, float(np.max(np.abs(got - expected))))
    return dev


def last_row_closed_form(Z, eps_x: complex) -> list:
    """Predicted last row for the data (0, ..., 0, eps_x) on z_2..z_{n+1}.

    Z holds the n+1 points z_1..z_{n+1}; the triangle is that of the n
    points after dropping z_1. Since every other quotient vanishes,
    [a, 0] = -a and each level is the previous one divided by
    -[z_{n+1}, z_{k+1}]. Returns [Delta^1, ..., Delta^{n-1}].
    """
    Z = as_points(Z, "points")
    if len(Z) < 2:
        raise ValueError("need at least two points")
    last = complex(Z[-1])
    row = []
    d = complex(eps_x)
    for k in range(1, len(Z) - 1):
        step = _cp(last, complex(Z[k]))
        if abs(step) <= COINCIDENCE_TOL:
            raise DistinctnessError(f"points {k} and {len(Z) - 1} coincide", pair=(k, len(Z) - 1))
        d = -d / step
        row.append(d)
    return row


def necessity_targets(Z, epsilon: float, C: float) -> np.ndarray:
    """Targets (0, ..., 0, epsilon * x) with x = C prod_{j<n} [z_{n+1}, z_j]."""
    Z = as_points(Z, "points")
    last = complex(Z[-1])
    x = C * np.prod([_cp(last, complex(z)) for z in Z[:-2]]) if len(Z) > 2 else C
    W = np.zeros(len(Z), dtype=complex)
    W[-1] = epsilon * x
    return W


@dataclass
class CompatibilityReport:
    epsilon: float
    order: int
    worst_ratio: float
    worst_witness: dict | None
    permutations_checked: int
    tuples_checked: int
    verdict: bool
    ecc2_max: float
    ecc2_verdict: bool
    flagged: list = field(default_factory=list)
    tuples_sampled: bool = False
    permutations_sampled: bool = False

    def as_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "order": self.order,
            "worst_ratio": self.worst_ratio,
            "worst_witness": self.worst_witness,
            "permutations_checked": self.permutations_checked,
            "tuples_checked": self.tuples_checked,
            "verdict": "pass" if self.verdict else "fail",
            "small_disc_max_modulus": self.ecc2_max,
            "small_disc_verdict": "pass" if self.ecc2_verdict else "fail",
            "flagged_tuples": self.flagged,
            "tuples_sampled": self.tuples_sampled,
            "permutations_sampled": self.permutations_sampled,
        }


def _pair_ratio(a: complex, b: complex, za: complex, zb: complex) -> float:
    if abs(a) >= 1 - UNIMODULAR_TOL or abs(b) >= 1 - UNIMODULAR_TOL:
        return math.inf
    return beta(a, b) / beta(za, zb)


def _scan_triangle(t: DQTriangle, order: int):
    """(worst ratio, level, (i, j), max modulus) over the checked entries."""
    worst, where = 0.0, None
    for k in range(order):
        for i in range(k + 1, t.n + 1):
            for j in range(i + 1, t.n + 1):
                a, b = t.entry(k, i), t.entry(k, j)
                if a is None or b is None:
                    continue
                r = _pair_ratio(a, b, t.nodes[i - 1], t.nodes[j - 1])
                if r > worst or where is None:
                    worst, where = r, (k, (i, j))
    mod = 0.0
    for k in range(1, t.n):
        for j in range(k + 1, t.n + 1):
            v = t.entry(k, j)
            if v is not None:
                mod = max(mod, abs(v))
    return worst, where, mod


def check_compatibility(
    Z,
    W,
    epsilon: float,
    order: int,
    tuple_budget: int = 10_000,
    permutations="all",
    seed: int = 0,
) -> CompatibilityReport:
    """Check the epsilon-compatibility condition of the given order.

    Every (order+1)-subset of the data is examined (or ``tuple_budget``
    uniformly sampled subsets when there are more), each under all
    orderings or under ``permutations`` sampled orderings when an integer
    is passed. For each ordering the triangle must satisfy
    beta(D^k_i, D^k_j) <= epsilon * beta(z_i, z_j) for k < order.
    """
    Z = as_points(Z, "points")
    W = as_points(W, "targets")
    if len(Z) != len(W):
        raise ValueError(f"{len(Z)} points but {len(W)} targets")
    if order < 1:
        raise ValueError("order must be >= 1")
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    size = order + 1
    if size > len(Z):
        raise ValueError(f"order {order} needs at least {size} points, got {len(Z)}")
    check_distinct(Z)
    rng = np.random.default_rng(seed)

    total = math.comb(len(Z), size)
    if total <= tuple_budget:
        tuples = list(itertools.combinations(range(len(Z)), size))
        tuples_sampled = False
    else:
        tuples = [tuple(sorted(rng.choice(len(Z), size, replace=False).tolist())) for _ in range(tuple_budget)]
        tuples_sampled = True

    if permutations == "all":
        if size > MAX_EXHAUSTIVE_PERMUTATION:
            raise ValueError(
                f"exhaustive permutations limited to tuples of size {MAX_EXHAUSTIVE_PERMUTATION}; use a sampled count"
            )
        perm_sampled = False
    else:
        count = int(permutations)
        if count < 1:
            raise ValueError("sampled permutation count must be >= 1")
        perm_sampled = True

    worst, witness = 0.0, None
    ecc2_max = 0.0
    n_perm = 0
    flagged = []
    for tup in tuples:
        if perm_sampled:
            orders = [tup] + [tuple(np.array(tup)[rng.permutation(size)].tolist()) for _ in range(count - 1)]
        else:
            orders = itertools.permutations(tup)
        for perm in orders:
            idx = list(perm)
            t = triangle_from_data(Z[idx], W[idx])
            n_perm += 1
            r, where, mod = _scan_triangle(t, order)
            if t.degenerate_at is not None and t.degenerate_at[0] <= order:
                flagged.append({"permutation": idx, "degenerate_at": list(t.degenerate_at)})
                r = math.inf
                mod = math.inf
                where = where or (t.degenerate_at[0] - 1, (t.degenerate_at[0], t.degenerate_at[1]))
            ecc2_max = max(ecc2_max, mod)
            if witness is None or r > worst:
                worst = r
                level, pair = where if where else (0, (1, 2))
                witness = {"tuple": list(tup), "permutation": idx, "level": level, "pair": list(pair)}
    return CompatibilityReport(
        epsilon=float(epsilon),
        order=order,
        worst_ratio=worst,
        worst_witness=witness,
        permutations_checked=n_perm,
        tuples_checked=len(tuples),
        verdict=worst <= epsilon,
        ecc2_max=ecc2_max,
        ecc2_verdict=ecc2_max <= epsilon,
        flagged=flagged,
        tuples_sampled=tuples_sampled,
        permutations_sampled=perm_sampled,
    )
