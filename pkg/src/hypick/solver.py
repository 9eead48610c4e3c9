"""Finite Nevanlinna-Pick problems: Pick matrix, solvability criteria, Schur recursion."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import BoundaryCase, ShapeError
from .mobius import (
    BlaschkeChain,
    ConstantMap,
    DiscMap,
    as_points,
    check_distinct,
    cp_distance,
    rho,
)
from .quotients import DQTriangle, triangle_from_data

PSD_TOL = 1e-10
PD_TOL = 1e-9
HERMITIAN_TOL = 1e-10
# diagonal quotients at or above 1 - INTERIOR_MARGIN are not interior
INTERIOR_MARGIN = 1e-12
BOUNDARY_TOL = 1e-10
RESIDUAL_TOL = 1e-9

INFINITELY_MANY = "infinitely_many"
BOUNDARY_UNIQUE = "boundary_unique_candidate"
UNSOLVABLE = "unsolvable"


@dataclass
class PickMatrix:
    entries: np.ndarray

    @property
    def order(self) -> int:
        return self.entries.shape[0]


def build_pick_matrix(Z, W) -> PickMatrix:
    """Entries (1 - w_j conj(w_i)) / (1 - z_j conj(z_i))."""
    Z = as_points(Z, "points")
    W = as_points(W, "targets")
    if len(Z) != len(W):
        raise ValueError(f"{len(Z)} points but {len(W)} targets")
    check_distinct(Z)
    return PickMatrix((1 - np.outer(W, W.conj())) / (1 - np.outer(Z, Z.conj())))


def is_positive_semidefinite(M, tol: float = PSD_TOL) -> tuple:
    """(min eigenvalue >= -tol, min eigenvalue) for a Hermitian matrix."""
    a = np.asarray(M.entries if isinstance(M, PickMatrix) else M, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ShapeError(f"expected a square matrix, got shape {a.shape}")
    if a.size and np.max(np.abs(a - a.conj().T)) > HERMITIAN_TOL:
        raise ShapeError("matrix is not Hermitian")
    if a.size == 0:
        return True, math.inf
    lam = float(np.linalg.eigvalsh((a + a.conj().T) / 2)[0])
    return lam >= -tol, lam


def pick_status(min_eig: float) -> str:
    if min_eig > PD_TOL:
        return "definite"
    if min_eig >= -PSD_TOL:
        return "indeterminate"
    return "indefinite"


class SchurChain(DiscMap):
    """g_k(z) = [[z, a_k] g_{k-1}(z), c_k] applied for k = 1..n from a seed g_0.

    ``steps[k-1]`` is (a_k, c_k). Evaluation follows the steps in order;
    nothing is expanded into a rational function.
    """

    def __init__(self, steps, seed: DiscMap | None = None):
        self.steps = tuple((complex(a), complex(c)) for a, c in steps)
        self.seed = seed if seed is not None else ConstantMap(0j)

    def __len__(self):
        return len(self.steps)

    def intermediate(self, m: int) -> "SchurChain":
        """The map g_m built from the first m steps."""
        return SchurChain(self.steps[:m], self.seed)

    def value(self, z):
        z = np.asarray(z, dtype=complex)
        g = np.asarray(self.seed.value(z), dtype=complex)
        for a, c in self.steps:
            g = cp_distance(cp_distance(z, a) * g, c)
        return g[()]

    def derivative(self, z):
        z = np.asarray(z, dtype=complex)
        g = np.asarray(self.seed.value(z), dtype=complex)
        dg = np.asarray(self.seed.derivative(z), dtype=complex)
        for a, c in self.steps:
            p = cp_distance(z, a)
            dp = -(1 - abs(a) ** 2) / (1 - a.conjugate() * z) ** 2
            u = p * g
            du = dp * g + p * dg
            g = cp_distance(u, c)
            dg = -du * (1 - abs(c) ** 2) / (1 - c.conjugate() * u) ** 2
        return dg[()]

    def describe(self):
        return {
            "kind": "schur_chain",
            "steps": [{"node": [a.real, a.imag], "quotient": [c.real, c.imag]} for a, c in self.steps],
            "seed": self.seed.describe(),
        }


def _diag_modulus(t: DQTriangle, k: int) -> float:
    v = t.entry(k, k + 1)
    return math.nan if v is None else abs(v)


def schur_solve(t: DQTriangle, seed: DiscMap | None = None) -> SchurChain:
    """Interpolant g_n of the recursion, step k using node z_{n+1-k}."""
    n = t.n
    for k in range(n):
        m = _diag_modulus(t, k)
        if not m < 1 - INTERIOR_MARGIN:
            raise BoundaryCase(f"diagonal quotient at level {k} has modulus {m!r}", level=k)
    steps = [(t.nodes[n - k], t.entry(n - k, n - k + 1)) for k in range(1, n + 1)]
    return SchurChain(steps, seed)


@dataclass
class BoundaryCandidate:
    level: int
    chain: BlaschkeChain | None
    residual: float
    schur_form: SchurChain

    @property
    def found(self) -> bool:
        return self.chain is not None


def _chain_to_blaschke(chain: SchurChain, c0: complex) -> BlaschkeChain:
    num = np.array([c0])
    den = np.array([1.0 + 0j])
    for a, c in chain.steps:
        pn = np.array([a, -1.0])
        pd = np.array([1.0, -a.conjugate()])
        pdd = P.polymul(pd, den)
        pnn = P.polymul(pn, num)
        num, den = P.polysub(c * pdd, pnn), P.polysub(pdd, c.conjugate() * pnn)
    zeros = P.polyroots(num) if len(num) > 1 else np.array([], dtype=complex)
    # phase from a probe point where the product is not small
    probes = np.array([0, 0.5, -0.5, 0.5j, -0.5j])
    bare = BlaschkeChain(tuple(np.asarray(zeros, dtype=complex)), 0.0)
    k = int(np.argmax(np.abs(bare.value(probes))))
    ratio = complex(chain.value(probes[k]) / bare.value(probes[k]))
    return BlaschkeChain(bare.zeros, math.atan2(ratio.imag, ratio.real))


def boundary_blaschke_candidate(t: DQTriangle) -> BoundaryCandidate:
    """Try the unique Blaschke interpolant forced by the first unimodular diagonal quotient.

    Raises ValueError when the triangle has no boundary level (all diagonal
    quotients interior, or the first non-interior one outside the disc).
    """
    level = None
    for k in range(1, t.n):
        m = _diag_modulus(t, k)
        if math.isnan(m):
            break
        if abs(m - 1) <= BOUNDARY_TOL:
            level = k
            break
        if m > 1:
            break
    if level is None:
        raise ValueError("triangle has no unimodular diagonal quotient")
    c0 = t.entry(level, level + 1)
    c0 = c0 / abs(c0)
    steps = [(t.nodes[level - k], t.entry(level - k, level - k + 1)) for k in range(1, level + 1)]
    schur = SchurChain(steps, ConstantMap(c0))
    residual = math.inf
    blaschke = None
    try:
        blaschke = _chain_to_blaschke(schur, c0)
        residual = float(np.max(np.abs(np.asarray(blaschke.value(t.nodes)) - t.values)))
    except (ValueError, np.linalg.LinAlgError):
        blaschke = None
    ok = blaschke is not None and residual <= RESIDUAL_TOL
    return BoundaryCandidate(level, blaschke if ok else None, residual, schur)


@dataclass
class SolvabilityVerdict:
    status: str
    criteria: dict
    pick_min_eigenvalue: float
    pick_status: str
    witness: dict | None = None
    candidate: BoundaryCandidate | None = None

    def as_dict(self) -> dict:
        out = {
            "status": self.status,
            "criteria": self.criteria,
            "pick_min_eigenvalue": self.pick_min_eigenvalue,
            "pick_status": self.pick_status,
            "witness": self.witness,
        }
        if self.candidate is not None:
            c = self.candidate
            out["candidate"] = {
                "level": c.level,
                "found": c.found,
                "residual": c.residual,
                "blaschke": c.chain.describe() if c.chain is not None else None,
            }
        return out


def _strictly_inside(v) -> bool:
    return abs(v) < 1 - INTERIOR_MARGIN


def _rho_ext(a: complex, b: complex) -> float:
    """rho extended to the closed plane; 1 when the denominator vanishes."""
    den = abs(1 - b.conjugate() * a)
    if den <= INTERIOR_MARGIN:
        return 1.0
    return abs(b - a) / den


def _judge(checks) -> tuple:
    """Fold (ok|None, witness) pairs into pass/fail/undefined plus first failing witness."""
    undefined = False
    for ok, where in checks:
        if ok is None:
            undefined = True
        elif not ok:
            return "fail", where
    return ("undefined" if undefined else "pass"), None


def solvability_criteria(t: DQTriangle) -> SolvabilityVerdict:
    """Evaluate the five triangle criteria for infinitely many solutions.

    (i)   |D^{n-1}_n| < 1
    (ii)  |D^k_{k+1}| < 1 for 1 <= k <= n-1
    (iii) |D^k_j| < 1 for 1 <= k < j <= n
    (iv)  rho(D^{k-1}_j, D^{k-1}_k) < rho(z_j, z_k) for 1 <= k < j <= n
    (v)   rho(D^{k-1}_j, D^{k-1}_i) < rho(z_j, z_i) for 1 <= k <= i < j <= n

    Comparisons on rho are equivalent to those on beta. A criterion whose
    operands are undefined (past a degenerate level) is "undefined" unless
    some defined operand already fails it.
    """
    n = t.n
    e = t.entry

    def inside(k, j):
        v = e(k, j)
        return (None if v is None else _strictly_inside(v)), [k, j]

    def closer(k, i, j):
        a, b = e(k - 1, j), e(k - 1, i)
        if a is None or b is None:
            return None, [k, i, j]
        return _rho_ext(a, b) < rho(t.nodes[j - 1], t.nodes[i - 1]) * (1 - INTERIOR_MARGIN), [k, i, j]

    crit = {}
    witnesses = {}
    crit["i"], witnesses["i"] = _judge([inside(n - 1, n)])
    crit["ii"], witnesses["ii"] = _judge(inside(k, k + 1) for k in range(1, n))
    crit["iii"], witnesses["iii"] = _judge(inside(k, j) for k in range(1, n) for j in range(k + 1, n + 1))
    crit["iv"], witnesses["iv"] = _judge(closer(k, k, j) for k in range(1, n) for j in range(k + 1, n + 1))
    crit["v"], witnesses["v"] = _judge(
        closer(k, i, j) for k in range(1, n) for i in range(k, n + 1) for j in range(i + 1, n + 1)
    )

    pick = build_pick_matrix(t.nodes, t.values)
    _, lam = is_positive_semidefinite(pick)

    witness = None
    for name in ("i", "ii", "iii", "iv", "v"):
        if witnesses[name] is not None:
            witness = {"criterion": name, "indices": witnesses[name]}
            break

    status, candidate = INFINITELY_MANY, None
    for k in range(1, n):
        m = _diag_modulus(t, k)
        if m < 1 - INTERIOR_MARGIN:
            continue
        if abs(m - 1) <= BOUNDARY_TOL:
            candidate = boundary_blaschke_candidate(t)
            status = BOUNDARY_UNIQUE if candidate.found else UNSOLVABLE
        else:
            status = UNSOLVABLE
        break
    return SolvabilityVerdict(status, crit, lam, pick_status(lam), witness, candidate)


@dataclass
class DenjoyReport:
    partial_sums: list
    saturated_at: int | None = None
    terms: list = field(default_factory=list)


def denjoy_partial_sums(Z, W) -> DenjoyReport:
    """Running sums of (1 - |z_n|) / (1 - |D^{n-1}_n|).

    A diagonal quotient on or outside the unit circle makes its term
    infinite; ``saturated_at`` records the first such n (1-based).
    """
    t = triangle_from_data(Z, W)
    terms, sums = [], []
    total = 0.0
    saturated = None
    for k in range(t.n):
        v = t.entry(k, k + 1)
        if v is None or abs(v) >= 1 - INTERIOR_MARGIN:
            term = math.inf
            if saturated is None:
                saturated = k + 1
        else:
            term = float((1 - abs(t.nodes[k])) / (1 - abs(v)))
        terms.append(term)
        total += term
        sums.append(total)
    return DenjoyReport(sums, saturated, terms)


def verification_grid(size: int = 64) -> np.ndarray:
    """size x size polar grid, radii equispaced in hyperbolic distance up to 1 - 1e-6."""
    big = 2 * math.atanh(1 - 1e-6)
    r = np.tanh(big * np.arange(1, size + 1) / size / 2)
    t = 2 * np.pi * np.arange(size) / size
    return (r[:, None] * np.exp(1j * t)[None, :]).ravel()


def grid_sup_norm(f: DiscMap, size: int = 64) -> float:
    return float(np.max(np.abs(f.value(verification_grid(size)))))


def interpolation_residual(f: DiscMap, Z, W) -> float:
    return float(np.max(np.abs(np.asarray(f.value(np.asarray(Z))) - np.asarray(W))))
