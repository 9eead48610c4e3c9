"""Hyperbolic geometry of the unit disc: metrics, automorphisms, Blaschke products.

All functions accept Python complex scalars or numpy arrays and broadcast.
"""
from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateLevel, DistinctnessError, DomainError

# Points closer than this (Euclidean) are treated as the same point.
COINCIDENCE_TOL = 1e-14
# |w| within this of 1 counts as unimodular.
UNIMODULAR_TOL = 1e-12


class UnitPoint(complex):
    """A complex number strictly inside the unit disc.

    Behaves as a plain ``complex`` in arithmetic; construction rejects
    anything with modulus >= 1 (or NaN).
    """

    def __new__(cls, re=0.0, im=0.0):
        z = complex(re) + 1j * im
        if not abs(z) < 1.0:
            raise DomainError(f"{z!r} is not inside the unit disc")
        return super().__new__(cls, z.real, z.imag)

    @property
    def re(self) -> float:
        return self.real

    @property
    def im(self) -> float:
        return self.imag


def as_points(values, name: str = "points") -> np.ndarray:
    """Validate a sequence of disc points and return it as a complex array."""
    arr = np.asarray(values, dtype=complex).reshape(-1)
    mod = np.abs(arr)
    bad = np.flatnonzero(~(mod < 1.0))
    if bad.size:
        i = int(bad[0])
        raise DomainError(f"{name}[{i}] = {arr[i]!r} has modulus >= 1")
    return arr


def check_distinct(points: np.ndarray, tol: float = COINCIDENCE_TOL):
    """Raise DistinctnessError if two entries of ``points`` coincide."""
    n = len(points)
    if n < 2:
        return
    diff = np.abs(points[:, None] - points[None, :])
    diff[np.diag_indices(n)] = np.inf
    i, j = np.unravel_index(np.argmin(diff), diff.shape)
    if diff[i, j] <= tol:
        i, j = sorted((int(i), int(j)))
        raise DistinctnessError(f"points {i} and {j} coincide", pair=(i, j))


def cp_distance(z, w):
    """Complex pseudohyperbolic distance [z, w] = (w - z) / (1 - conj(w) z)."""
    return (w - z) / (1 - np.conj(w) * z)


def rho(z, w):
    """Pseudohyperbolic distance |z - w| / |1 - conj(w) z|."""
    return np.abs(cp_distance(z, w))


def one_minus_rho2(z, w):
    """1 - rho(z, w)**2 computed without cancellation."""
    return (1 - np.abs(z) ** 2) * (1 - np.abs(w) ** 2) / np.abs(1 - np.conj(w) * z) ** 2


def beta(z, w):
    """Hyperbolic distance log((1 + rho) / (1 - rho)).

    For rho > 1/2 the form 2 log(1 + rho) - log(1 - rho**2) is used, with
    1 - rho**2 taken from the product formula; this keeps full relative
    accuracy for points near the boundary. Unimodular arguments give inf.
    """
    with np.errstate(divide="ignore", invalid="ignore"):
        r = rho(z, w)
        near = 2 * np.arctanh(np.minimum(r, 0.5))
        far = 2 * np.log1p(r) - np.log(one_minus_rho2(z, w))
        out = np.where(r <= 0.5, near, far)
    return out if np.ndim(out) else float(out)


def in_hyperbolic_disc(z, center, radius: float):
    """True iff beta(z, center) < radius."""
    if not radius > 0:
        raise DomainError(f"radius must be positive, got {radius}")
    return beta(z, center) < radius


class DiscMap(ABC):
    """An analytic map of the disc into its closure.

    Subclasses provide ``value`` and ``derivative``; both accept scalars or
    arrays. ``one_minus_abs2`` may be overridden where 1 - |f|^2 has a
    cancellation-free closed form.
    """

    @abstractmethod
    def value(self, z):
        ...

    @abstractmethod
    def derivative(self, z):
        ...

    def one_minus_abs2(self, z):
        return 1 - np.abs(self.value(z)) ** 2

    def __call__(self, z):
        return self.value(z)

    def describe(self) -> dict:
        return {"kind": type(self).__name__}


def _hyperbolic_derivative_array(f: DiscMap, z):
    z = np.asarray(z, dtype=complex)
    with np.errstate(divide="ignore", invalid="ignore"):
        return (1 - np.abs(z) ** 2) * f.derivative(z) / f.one_minus_abs2(z)


def hyperbolic_derivative(f: DiscMap, z) -> complex:
    """(1 - |z|^2) f'(z) / (1 - |f(z)|^2); modulus <= 1 for self-maps."""
    denom = float(np.real(f.one_minus_abs2(z)))
    if denom <= 2 * UNIMODULAR_TOL:
        raise DegenerateLevel(f"|f(z)| = 1 at z = {complex(z)!r}")
    return complex((1 - abs(z) ** 2) * f.derivative(z) / denom)


@dataclass(frozen=True)
class ConstantMap(DiscMap):
    constant: complex = 0j

    def value(self, z):
        return np.full(np.shape(z), complex(self.constant))[()] if np.ndim(z) else complex(self.constant)

    def derivative(self, z):
        return np.zeros(np.shape(z), dtype=complex)[()] if np.ndim(z) else 0j

    def describe(self):
        c = complex(self.constant)
        return {"kind": "constant", "re": c.real, "im": c.imag}


@dataclass(frozen=True)
class ScaledMap(DiscMap):
    """z -> scale * z with |scale| <= 1. ``ScaledMap(1)`` is the identity."""

    scale: complex = 1.0

    def __post_init__(self):
        if abs(self.scale) > 1:
            raise DomainError(f"|scale| must be <= 1, got {self.scale!r}")

    def value(self, z):
        return self.scale * np.asarray(z, dtype=complex)[()]

    def derivative(self, z):
        return np.full(np.shape(z), complex(self.scale))[()] if np.ndim(z) else complex(self.scale)

    def describe(self):
        s = complex(self.scale)
        return {"kind": "scaled", "re": s.real, "im": s.imag}


@dataclass(frozen=True)
class MobiusAutomorphism(DiscMap):
    """z -> exp(i phase) (z - base) / (1 - conj(base) z)."""

    base: complex = 0j
    phase: float = 0.0

    def __post_init__(self):
        if not abs(self.base) < 1:
            raise DomainError(f"base {self.base!r} is not inside the unit disc")
        object.__setattr__(self, "base", complex(self.base))
        object.__setattr__(self, "phase", float(self.phase) % (2 * math.pi))

    @property
    def unimodular(self) -> complex:
        return complex(math.cos(self.phase), math.sin(self.phase))

    def value(self, z):
        a = self.base
        z = np.asarray(z, dtype=complex)
        return (self.unimodular * (z - a) / (1 - a.conjugate() * z))[()]

    def derivative(self, z):
        a = self.base
        z = np.asarray(z, dtype=complex)
        return (self.unimodular * (1 - abs(a) ** 2) / (1 - a.conjugate() * z) ** 2)[()]

    def one_minus_abs2(self, z):
        return one_minus_rho2(np.asarray(z, dtype=complex), self.base)[()]

    def inverse(self) -> "MobiusAutomorphism":
        lam = self.unimodular
        return MobiusAutomorphism(-lam * self.base, -self.phase)

    def compose(self, inner: "MobiusAutomorphism") -> "MobiusAutomorphism":
        """The single automorphism equal to ``self`` after ``inner``."""
        b = complex(inner.inverse().value(self.base))
        lam = complex(self.derivative(inner.value(b)) * inner.derivative(b)) * (1 - abs(b) ** 2)
        return MobiusAutomorphism(b, math.atan2(lam.imag, lam.real))

    def describe(self):
        return {"kind": "automorphism", "base": [self.base.real, self.base.imag], "phase": self.phase}


@dataclass(frozen=True)
class BlaschkeChain(DiscMap):
    """exp(i phase) * prod_j (a_j - z) / (1 - conj(a_j) z).

    A zero at the origin contributes the factor -z; the phase absorbs the
    usual |a_j| / a_j normalisation.
    """

    zeros: tuple = ()
    phase: float = 0.0

    def __post_init__(self):
        zs = tuple(complex(a) for a in as_points(list(self.zeros), "zeros"))
        object.__setattr__(self, "zeros", zs)
        object.__setattr__(self, "phase", float(self.phase) % (2 * math.pi))

    @property
    def degree(self) -> int:
        return len(self.zeros)

    @property
    def unimodular(self) -> complex:
        return complex(math.cos(self.phase), math.sin(self.phase))

    def _factors(self, z):
        a = np.asarray(self.zeros, dtype=complex).reshape((-1,) + (1,) * np.ndim(z))
        return (a - z) / (1 - np.conj(a) * z), a

    def value(self, z):
        z = np.asarray(z, dtype=complex)
        if not self.zeros:
            return (self.unimodular * np.ones_like(z))[()]
        fac, _ = self._factors(z)
        return (self.unimodular * np.prod(fac, axis=0))[()]

    def derivative(self, z):
        z = np.asarray(z, dtype=complex)
        if not self.zeros:
            return np.zeros_like(z)[()]
        fac, a = self._factors(z)
        dfac = (np.abs(a) ** 2 - 1) / (1 - np.conj(a) * z) ** 2
        ones = np.ones((1,) + z.shape, dtype=complex)
        # product of all factors except the j-th, without dividing by zero
        before = np.cumprod(np.concatenate([ones, fac[:-1]]), axis=0)
        after = np.cumprod(np.concatenate([ones, fac[::-1][:-1]]), axis=0)[::-1]
        return (self.unimodular * np.sum(dfac * before * after, axis=0))[()]

    def one_minus_abs2(self, z):
        z = np.asarray(z, dtype=complex)
        if not self.zeros:
            return np.zeros(z.shape)[()]
        a = np.asarray(self.zeros, dtype=complex).reshape((-1,) + (1,) * z.ndim)
        t = one_minus_rho2(z, a)
        with np.errstate(divide="ignore"):
            return (-np.expm1(np.sum(np.log1p(-t), axis=0)))[()]

    def describe(self):
        return {
            "kind": "blaschke",
            "degree": self.degree,
            "zeros": [[a.real, a.imag] for a in self.zeros],
            "phase": self.phase,
        }


@dataclass(frozen=True)
class ComposedMap(DiscMap):
    """outer after inner."""

    outer: DiscMap
    inner: DiscMap

    def value(self, z):
        return self.outer.value(self.inner.value(z))

    def derivative(self, z):
        return self.outer.derivative(self.inner.value(z)) * self.inner.derivative(z)

    def one_minus_abs2(self, z):
        return self.outer.one_minus_abs2(self.inner.value(z))

    def describe(self):
        return {"kind": "composed", "outer": self.outer.describe(), "inner": self.inner.describe()}


def compose(*maps: DiscMap) -> DiscMap:
    """compose(f, g, h) is z -> f(g(h(z)))."""
    if not maps:
        return ScaledMap(1.0)
    out = maps[-1]
    for m in reversed(maps[:-1]):
        out = ComposedMap(m, out)
    return out


def random_disc_points(rng: np.random.Generator, n: int, radius: float = 0.9) -> np.ndarray:
    """n points uniform in hyperbolic area on the Euclidean disc |z| < radius."""
    big = 2 * math.atanh(radius)
    s = 2 * np.arcsinh(np.sqrt(rng.uniform(size=n)) * math.sinh(big / 2))
    return np.tanh(s / 2) * np.exp(2j * math.pi * rng.uniform(size=n))


def random_blaschke(rng: np.random.Generator, degree: int, radius: float = 0.9) -> BlaschkeChain:
    zeros = random_disc_points(rng, degree, radius)
    return BlaschkeChain(tuple(zeros), float(rng.uniform(0, 2 * math.pi)))


def random_automorphism(rng: np.random.Generator, radius: float = 0.9) -> MobiusAutomorphism:
    return MobiusAutomorphism(complex(random_disc_points(rng, 1, radius)[0]), float(rng.uniform(0, 2 * math.pi)))


def blaschke_eval(b: BlaschkeChain, z):
    return b.value(z)


def blaschke_derivative(b: BlaschkeChain, z):
    return b.derivative(z)
