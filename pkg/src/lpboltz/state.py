"""Velocity grids, grid distributions and their scalar diagnostics.

All velocity integrals are midpoint sums over a cell-centred uniform grid on
[-R, R]^N, so discrete Hoelder-type inequalities hold exactly.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class VelocityGrid:
    N: int
    n: int
    R: float = 8.0

    def __post_init__(self):
        if self.N not in (2, 3):
            raise ValueError("grid dimension must be 2 or 3")
        if self.n < 8 or self.n % 2:
            raise ValueError("points per axis must be even and >= 8")
        if self.R <= 0:
            raise ValueError("truncation radius must be positive")

    @property
    def h(self) -> float:
        return 2.0 * self.R / self.n

    @property
    def cell_volume(self) -> float:
        return self.h ** self.N

    @property
    def shape(self) -> tuple:
        return (self.n,) * self.N

    @cached_property
    def axis(self) -> np.ndarray:
        return -self.R + (np.arange(self.n) + 0.5) * self.h

    @cached_property
    def points(self) -> np.ndarray:
        """Node coordinates, shape (n**N, N), row-major."""
        mesh = np.meshgrid(*([self.axis] * self.N), indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    @cached_property
    def speed2(self) -> np.ndarray:
        """|v|^2 at the nodes, shaped like the grid."""
        return np.sum(self.points ** 2, axis=1).reshape(self.shape)

    def bracket(self, power: float) -> np.ndarray:
        """<v>^power = (1 + |v|^2)^(power/2) at the nodes."""
        return (1.0 + self.speed2) ** (0.5 * power)


@dataclass(frozen=True, eq=False)
class Distribution:
    grid: VelocityGrid
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != self.grid.shape:
            vals = vals.reshape(self.grid.shape)
        if np.any(vals < 0) or not np.all(np.isfinite(vals)):
            raise ValueError("distribution values must be finite and nonnegative")
        object.__setattr__(self, "values", vals)

    @classmethod
    def zeros(cls, grid: VelocityGrid) -> "Distribution":
        return cls(grid, np.zeros(grid.shape))

    def scaled(self, lam: float) -> "Distribution":
        return Distribution(self.grid, lam * self.values)

    @property
    def mass(self) -> float:
        return float(self.values.sum() * self.grid.cell_volume)

    @property
    def momentum(self) -> np.ndarray:
        f = self.values.ravel()
        return self.grid.points.T @ f * self.grid.cell_volume

    @property
    def energy(self) -> float:
        """Integral of |v|^2 f (no factor 1/2)."""
        return float(np.sum(self.values * self.grid.speed2) * self.grid.cell_volume)

    @property
    def temperature(self) -> float:
        m = self.mass
        u = self.momentum / m
        return (self.energy / m - u @ u) / self.grid.N


@dataclass(frozen=True)
class NormSpec:
    p: float
    q: float = 0.0

    def __post_init__(self):
        if not self.p > 1:
            raise ValueError("p must exceed 1")
        if self.q < 0:
            raise ValueError("weight exponent q must be nonnegative")

    @property
    def p_conj(self) -> float:
        return self.p / (self.p - 1.0)

    @property
    def alpha(self) -> float:
        """Exponent alpha = pq/2 of the weight <v>^(2 alpha)."""
        return 0.5 * self.p * self.q


def weighted_lp_norm(f: Distribution, spec: NormSpec) -> float:
    """(sum f^p <v>^(pq) h^N)^(1/p)."""
    s = np.sum(f.values ** spec.p * f.grid.bracket(spec.p * spec.q)) * f.grid.cell_volume
    return float(s ** (1.0 / spec.p))


def l1_moment(f: Distribution, s: float) -> float:
    """Weighted L1 norm: sum f <v>^s h^N."""
    if s < 0:
        raise ValueError("moment order must be nonnegative")
    return float(np.sum(f.values * f.grid.bracket(s)) * f.grid.cell_volume)


def entropy(f: Distribution) -> float:
    """H(f) = sum f log f h^N with 0 log 0 = 0."""
    v = f.values
    pos = v > 0
    return float(np.sum(v[pos] * np.log(v[pos])) * f.grid.cell_volume)


def maxwellian(grid: VelocityGrid, rho: float = 1.0, u=None, T: float = 1.0) -> Distribution:
    if T <= 0 or rho <= 0:
        raise ValueError("Maxwellian needs rho > 0 and T > 0")
    u = np.zeros(grid.N) if u is None else np.asarray(u, dtype=float)
    d2 = np.sum((grid.points - u) ** 2, axis=1)
    vals = rho * (2 * np.pi * T) ** (-grid.N / 2) * np.exp(-d2 / (2 * T))
    return Distribution(grid, vals.reshape(grid.shape))


def mixture(components: Sequence[tuple], grid: VelocityGrid) -> Distribution:
    """Sum of Maxwellians given as (rho, u, T) triples."""
    vals = np.zeros(grid.shape)
    for rho, u, T in components:
        vals += maxwellian(grid, rho, u, T).values
    return Distribution(grid, vals)


def random_mixture(grid: VelocityGrid, rng: np.random.Generator, *, n_components=(1, 3),
                   T_range=(0.5, 1.5), drift=1.5, mass=1.0):
    """Random convex Maxwellian mixture of total mass ``mass``; returns (dist, components)."""
    k = int(rng.integers(n_components[0], n_components[1] + 1))
    w = rng.dirichlet(np.ones(k))
    comps = []
    for i in range(k):
        u = rng.uniform(-drift, drift, size=grid.N)
        T = rng.uniform(*T_range)
        comps.append((mass * float(w[i]), u, float(T)))
    return mixture(comps, grid), comps


def dilate(f: Distribution, lam: float) -> Distribution:
    """Mass-preserving dilation lam^N f(lam v) by cubic-spline resampling."""
    from .interpolation import sample

    pts = f.grid.points * lam
    vals = lam ** f.grid.N * sample(f, pts, order=3)
    return Distribution(f.grid, np.maximum(vals, 0.0).reshape(f.grid.shape))
