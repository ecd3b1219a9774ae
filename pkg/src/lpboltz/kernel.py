"""Collision kernels B(x, y) = |x|^gamma b(y) and their angular integrals.

Angles are handled in theta rather than cos(theta) wherever possible, since
``1 - cos(theta)`` loses all precision near the grazing singularity. The
sphere measure is fixed here for every module::

    dsigma = |S^{N-2}| sin(theta)^(N-2) dtheta du,   du normalised on S^{N-2}
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from math import gamma as _gamma_fn
from math import pi

import numpy as np

from .quadrature import ThetaRule, geometric_tail, theta_rule

KINDS = ("constant", "table", "singular")


class KernelDomainError(ValueError):
    """Evaluation of a singular kernel at the non-integrable point theta = 0."""


class DivergenceError(ArithmeticError):
    """A graded angular quadrature failed its convergence criterion."""


def sphere_area(d: int) -> float:
    """Surface measure of the unit sphere S^d (S^0 = {-1, +1} has measure 2)."""
    return 2.0 * pi ** ((d + 1) / 2) / _gamma_fn((d + 1) / 2)


@dataclass(frozen=True)
class AngularKernel:
    """Angular part b(cos theta), restricted to a theta support interval.

    ``kind`` is one of ``constant`` (value ``c``), ``table`` (piecewise linear
    in cos theta through ``table_y``/``table_b``) or ``singular``
    (``strength * (1 - cos theta)^((-(N-2) + nu)/2)``).  ``symmetric`` marks
    the kernel b(cos theta) + b(-cos theta) restricted to [0, pi/2].
    """

    kind: str = "constant"
    c: float = 1.0
    table_y: tuple = ()
    table_b: tuple = ()
    strength: float = 1.0
    nu: float = 0.0
    dim: int = 3
    support: tuple = (0.0, pi)
    open_upper: bool = False
    symmetric: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown angular kernel kind {self.kind!r}")
        if self.dim not in (2, 3):
            raise ValueError("dimension must be 2 or 3")
        lo, hi = self.support
        if not 0.0 <= lo <= hi <= pi:
            raise ValueError(f"support {self.support} not inside [0, pi]")
        if self.kind == "constant" and self.c < 0:
            raise ValueError("constant kernel must be nonnegative")
        if self.kind == "singular":
            if self.strength <= 0:
                raise ValueError("singular strength must be positive")
            if self.nu <= -3:
                raise ValueError("nu must exceed -3 (angular moment would diverge)")
        if self.kind == "table":
            y = np.asarray(self.table_y, dtype=float)
            b = np.asarray(self.table_b, dtype=float)
            if y.ndim != 1 or y.shape != b.shape or y.size < 2:
                raise ValueError("table kernel needs matching 1-D samples")
            if np.any(np.diff(y) <= 0):
                raise ValueError("table abscissae must be increasing in cos theta")
            if np.any(b < 0):
                raise ValueError("table kernel must be nonnegative")

    # -- properties -------------------------------------------------------
    @property
    def exponent(self) -> float:
        """Power of (1 - cos theta) in the singular kind."""
        return (-(self.dim - 2) + self.nu) / 2.0

    @property
    def touches_zero(self) -> bool:
        return self.support[0] == 0.0

    @property
    def singular(self) -> bool:
        """True when b is unbounded on its support (grazing singularity present)."""
        return self.kind == "singular" and self.touches_zero and self.exponent < 0

    @property
    def integrable(self) -> bool:
        """b integrable on the sphere: bounded kind, cut away from 0, or nu > -1."""
        return not self.singular or self.nu > -1

    # -- evaluation -------------------------------------------------------
    def _raw(self, theta: np.ndarray) -> np.ndarray:
        if self.kind == "constant":
            return np.full_like(theta, self.c)
        if self.kind == "table":
            return np.interp(np.cos(theta), self.table_y, self.table_b)
        one_minus_cos = 2.0 * np.sin(0.5 * theta) ** 2
        with np.errstate(divide="ignore"):
            return self.strength * one_minus_cos ** self.exponent

    def _in_support(self, theta: np.ndarray) -> np.ndarray:
        lo, hi = self.support
        upper = theta < hi if self.open_upper else theta <= hi
        return (theta >= lo) & upper

    def __call__(self, theta) -> np.ndarray:
        """b as a function of the deflection angle theta in [0, pi]."""
        theta = np.asarray(theta, dtype=float)
        if self.symmetric:
            val = self._raw(theta) + self._raw(pi - theta)
            val = np.where(theta <= 0.5 * pi, val, 0.0)
        else:
            val = self._raw(theta)
        return np.where(self._in_support(theta), val, 0.0)


def eval_b(kernel: AngularKernel, cos_theta):
    """b(cos theta) for cos theta in [-1, 1)."""
    y = np.asarray(cos_theta, dtype=float)
    if np.any(y < -1.0) or np.any(y > 1.0):
        raise ValueError("cos theta outside [-1, 1]")
    if kernel.kind == "singular" and np.any(y >= 1.0) and kernel.exponent < 0:
        raise KernelDomainError("singular kernel evaluated at cos theta = 1")
    out = kernel(np.arccos(y))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class CollisionKernel:
    """B(|v - v*|, cos theta) = |v - v*|^gamma b(cos theta) in dimension ``dim``."""

    gamma: float
    angular: AngularKernel
    dim: int = field(default=0)

    def __post_init__(self):
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError("gamma must lie in [0, 1] (hard potentials)")
        if self.dim == 0:
            object.__setattr__(self, "dim", self.angular.dim)
        if self.dim != self.angular.dim:
            raise ValueError("angular kernel built for a different dimension")

    @property
    def symmetric(self) -> bool:
        return self.angular.symmetric


@dataclass(frozen=True)
class SymmetrizedKernel:
    """B_sym: base kernel folded onto theta in [0, pi/2]."""

    base: CollisionKernel
    angular: AngularKernel

    @property
    def gamma(self) -> float:
        return self.base.gamma

    @property
    def dim(self) -> int:
        return self.base.dim

    @property
    def symmetric(self) -> bool:
        return True

    def with_angular(self, angular: AngularKernel) -> "SymmetrizedKernel":
        return SymmetrizedKernel(self.base, angular)


def symmetrize(kernel: CollisionKernel) -> SymmetrizedKernel:
    if kernel.angular.symmetric:
        raise ValueError("kernel already symmetrized")
    lo, hi = kernel.angular.support
    if (lo, hi) != (0.0, pi):
        # the folded kernel of a restricted base is not representable as a
        # single support interval; only full-support bases are folded
        raise ValueError("symmetrize expects a base kernel supported on [0, pi]")
    ang = replace(kernel.angular, symmetric=True, support=(0.0, 0.5 * pi), open_upper=False)
    return SymmetrizedKernel(kernel, ang)


# -- angular integrals -----------------------------------------------------

@dataclass(frozen=True)
class AngularQuadrature:
    """Grading parameters for angular integrals (theta_k = theta_min * ratio**k)."""

    theta_min: float = 1e-9
    ratio: float = 2.0
    order: int = 8
    n_panels: int = 4
    rtol: float = 1e-6


def kernel_theta_rule(kernel: AngularKernel, quad: AngularQuadrature = AngularQuadrature()) -> ThetaRule:
    lo, hi = kernel.support
    if kernel.symmetric:
        hi = min(hi, 0.5 * pi)
    graded = kernel.kind == "singular" and kernel.exponent < 0
    return theta_rule(lo, hi, graded=graded, theta_min=quad.theta_min, ratio=quad.ratio,
                      order=quad.order, n_panels=quad.n_panels)


def _angular_integral(kernel: AngularKernel, weight, N: int, quad: AngularQuadrature) -> float:
    if kernel.support[1] <= kernel.support[0]:
        return 0.0
    rule = kernel_theta_rule(kernel, quad)
    vals = kernel(rule.nodes) * weight(rule.nodes) * np.sin(rule.nodes) ** (N - 2)
    panels = rule.panel_sums(vals)
    total = float(panels.sum())
    if rule.needs_tail:
        tail, ratio = geometric_tail(panels[0], panels[1])
        if tail is None:
            raise DivergenceError(
                f"angular integral does not converge at theta -> 0 "
                f"(observed panel ratio {ratio:.4g} <= 1)")
        coarse_tail, _ = geometric_tail(panels[1], panels[2])
        coarse = float(panels[1:].sum()) + (coarse_tail or 0.0)
        total += tail
        if abs(total - coarse) > quad.rtol * abs(total):
            raise DivergenceError(
                f"graded quadrature failed its Cauchy criterion: {total:.6g} vs {coarse:.6g}")
    return sphere_area(N - 2) * total


def angular_mass(kernel: AngularKernel, N: int | None = None,
                 quad: AngularQuadrature = AngularQuadrature()) -> float:
    """Integral of b over S^{N-1}."""
    N = kernel.dim if N is None else N
    if not kernel.integrable:
        raise DivergenceError(
            f"b is not integrable on the sphere (nu = {kernel.nu} <= -1 with support touching 0)")
    return _angular_integral(kernel, np.ones_like, N, quad)


def angular_moment(kernel: AngularKernel, N: int | None = None,
                   quad: AngularQuadrature = AngularQuadrature()) -> float:
    """Integral of b(cos theta)(1 - cos theta) over S^{N-1}."""
    N = kernel.dim if N is None else N
    return _angular_integral(kernel, lambda t: 2.0 * np.sin(0.5 * t) ** 2, N, quad)


def angular_integral(kernel: AngularKernel, weight, N: int | None = None,
                     quad: AngularQuadrature = AngularQuadrature()) -> float:
    """Integral of b(cos theta) * weight(theta) over S^{N-1}."""
    N = kernel.dim if N is None else N
    return _angular_integral(kernel, weight, N, quad)


def split(kernel: AngularKernel, theta0: float) -> tuple[AngularKernel, AngularKernel]:
    """Cutoff part b 1_{[theta0, pi/2]} and remainder b 1_{[0, theta0)}."""
    if not kernel.symmetric:
        raise ValueError("split expects a symmetrized kernel (support in [0, pi/2])")
    if not 0.0 < theta0 <= 0.5 * pi:
        raise ValueError("theta0 must lie in (0, pi/2]")
    lo, hi = kernel.support
    t = min(max(theta0, lo), hi)
    cut = replace(kernel, support=(t, hi))
    if theta0 > hi:
        # theta0 beyond the support: nothing left in the cutoff part
        cut = replace(kernel, support=(hi, hi), open_upper=True)
        return cut, kernel
    return cut, replace(kernel, support=(lo, t), open_upper=True)


def split_collision(kernel: SymmetrizedKernel, theta0: float):
    cut, rem = split(kernel.angular, theta0)
    return kernel.with_angular(cut), kernel.with_angular(rem)


# -- constructors used by configs and tests --------------------------------

def constant_kernel(c: float = 1.0, dim: int = 3) -> AngularKernel:
    return AngularKernel(kind="constant", c=c, dim=dim)


def table_kernel(y, b, dim: int = 3) -> AngularKernel:
    return AngularKernel(kind="table", table_y=tuple(map(float, y)),
                         table_b=tuple(map(float, b)), dim=dim)


def singular_kernel(strength: float, nu: float, dim: int = 3) -> AngularKernel:
    return AngularKernel(kind="singular", strength=strength, nu=nu, dim=dim)
