"""Hyperbolic Lipschitz norm, sampling ratios over test families, annulus harmonic measure."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .errors import DomainError
from .mobius import (
    DiscMap,
    ScaledMap,
    _hyperbolic_derivative_array,
    as_points,
    beta,
    check_distinct,
    compose,
    random_automorphism,
    random_blaschke,
)

# Grid stops at Euclidean distance 1e-6 from the circle.
RADIAL_CUTOFF = 1 - 1e-6
NORM_FLOOR = 1e-14


def _hd_modulus(f: DiscMap, z) -> np.ndarray:
    return np.nan_to_num(np.abs(_hyperbolic_derivative_array(f, z)), nan=0.0)


def hyperbolic_norm(f: DiscMap, grid_resolution: int = 64) -> float:
    """Lower bound for sup (1 - |z|^2)|f'(z)| / (1 - |f(z)|^2).

    Evaluated on a polar grid equispaced in hyperbolic radius, then polished
    by a bounded quasi-Newton search from the grid argmax. Grids for n and
    2n are nested, so the grid maximum never drops under refinement.
    """
    n = int(grid_resolution)
    if n < 1:
        raise DomainError("grid_resolution must be >= 1")
    big = 2 * math.atanh(RADIAL_CUTOFF)
    s = big * np.arange(n + 1) / n
    t = 2 * np.pi * np.arange(4 * n) / (4 * n)
    z = (np.tanh(s / 2)[:, None] * np.exp(1j * t)[None, :]).ravel()
    vals = _hd_modulus(f, z)
    k = int(np.argmax(vals))
    best = float(vals[k])
    if best == 0.0:
        return 0.0

    def objective(x):
        return -float(_hd_modulus(f, np.array([math.tanh(x[0] / 2) * complex(math.cos(x[1]), math.sin(x[1]))]))[0])

    start = np.array([s[k // (4 * n)], t[k % (4 * n)]])
    res = minimize(objective, start, method="L-BFGS-B", bounds=[(0.0, big), (start[1] - math.pi, start[1] + math.pi)])
    return max(best, -float(res.fun))


def sampling_ratio(Z, f: DiscMap) -> float:
    """max over pairs n != m of beta(f(z_n), f(z_m)) / beta(z_n, z_m)."""
    Z = as_points(Z)
    if len(Z) < 2:
        raise ValueError("need at least two points")
    check_distinct(Z)
    fz = np.asarray(f.value(Z), dtype=complex)
    i, j = np.triu_indices(len(Z), k=1)
    num = np.asarray(beta(fz[i], fz[j]), dtype=float)
    den = np.asarray(beta(Z[i], Z[j]), dtype=float)
    return float(np.max(num / den))


FAMILY_KINDS = ("scaled", "blaschke", "automorphism")


@dataclass(frozen=True)
class TestFamily:
    """Descriptor of a family of self-maps of the disc.

    ``kind`` is one of scaled, blaschke, automorphism; ``conjugated``
    wraps each member as tau^-1 o f o tau for a random automorphism tau.
    ``max_degree`` bounds the Blaschke degree and ``radius`` the zeros.
    """

    __test__ = False

    kind: str = "scaled"
    conjugated: bool = False
    max_degree: int = 3
    radius: float = 0.9

    def __post_init__(self):
        if self.kind not in FAMILY_KINDS:
            raise DomainError(f"unknown family kind {self.kind!r}; expected one of {FAMILY_KINDS}")
        if self.max_degree < 1:
            raise DomainError("max_degree must be >= 1")

    @classmethod
    def parse(cls, text: str) -> "TestFamily":
        """'scaled', 'blaschke:4', 'conj-automorphism', 'conj-blaschke:2' ..."""
        conj = text.startswith("conj-")
        body = text[5:] if conj else text
        kind, _, arg = body.partition(":")
        if arg:
            try:
                degree = int(arg)
            except ValueError:
                raise DomainError(f"bad family parameter in {text!r}") from None
            return cls(kind, conj, degree)
        return cls(kind, conj)

    @property
    def label(self) -> str:
        base = f"blaschke:{self.max_degree}" if self.kind == "blaschke" else self.kind
        return ("conj-" if self.conjugated else "") + base

    def members(self, trials: int, rng: np.random.Generator):
        for i in range(trials):
            if self.kind == "scaled":
                f = ScaledMap((i + 1) / trials)
            elif self.kind == "blaschke":
                f = random_blaschke(rng, int(rng.integers(1, self.max_degree + 1)), self.radius)
            else:
                f = random_automorphism(rng, self.radius)
            if self.conjugated:
                tau = random_automorphism(rng, self.radius)
                f = compose(tau.inverse(), f, tau)
            yield f


@dataclass
class SamplingEstimate:
    """min over tested f of ratio(f) / N(f).

    Restricting the infimum to a finite family can only raise it, so this is
    an upper-bound witness for the sampling constant, not the constant.
    """

    delta_lower_bound_witness: float
    worst_function: dict | None
    trials: int
    grid_resolution: int
    family: str
    per_trial: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "delta_lower_bound_witness": self.delta_lower_bound_witness,
            "bound_kind": "upper bound on the sampling constant over the tested family",
            "worst_function": self.worst_function,
            "trials": self.trials,
            "grid_resolution": self.grid_resolution,
            "family": self.family,
            "notes": self.notes,
        }


def estimate_sampling_constant(
    Z, family: TestFamily | str, trials: int = 16, grid_resolution: int = 64, seed: int = 0
) -> SamplingEstimate:
    if isinstance(family, str):
        family = TestFamily.parse(family)
    if trials < 1:
        raise DomainError("trials must be >= 1")
    Z = as_points(Z)
    rng = np.random.default_rng(seed)
    best, worst, rows, notes = math.inf, None, [], []
    for f in family.members(trials, rng):
        norm = hyperbolic_norm(f, grid_resolution)
        if norm <= NORM_FLOOR:
            notes.append(f"skipped constant map {f.describe()}")
            continue
        ratio = sampling_ratio(Z, f)
        q = ratio / norm
        rows.append({"family": family.label, "map": f.describe(), "ratio": ratio, "norm": norm, "quotient": q})
        if q < best:
            best, worst = q, f.describe()
    return SamplingEstimate(best, worst, trials, grid_resolution, family.label, rows, notes)


def _log_coth_half(s: float) -> float:
    """log((e^s + 1) / (e^s - 1)) without cancellation."""
    return math.log1p(2 / math.expm1(s))


def annulus_log_factors(theta: float, R: float) -> tuple:
    """The numerator and denominator logarithms of the annulus harmonic measure."""
    if not 0 < theta <= 2:
        raise DomainError(f"theta must lie in (0, 2], got {theta}")
    if not R > 0:
        raise DomainError(f"R must be positive, got {R}")
    outer = _log_coth_half(4 * R)
    return _log_coth_half(2 * R) - outer, _log_coth_half(theta * R) - outer


def annulus_harmonic_measure(theta: float, R: float) -> float:
    """Harmonic measure at hyperbolic radius 2R of the inner circle (radius theta R)
    in the annulus bounded by hyperbolic radius 4R."""
    num, den = annulus_log_factors(theta, R)
    return num / den
