"""Quadrature evaluation of Q(g, f), the Lyapunov functional D and R_alpha.

Velocity integrals are midpoint sums over the grid; sigma integrals use a
theta rule from :mod:`lpboltz.quadrature` times the S^{N-2} nodes of
:func:`lpboltz.geometry.u_nodes`.  Off-grid values f(v') are interpolated
(multilinear by default, cubic B-spline on request) and vanish outside the box.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import pi

import numpy as np

from . import _numerics
from .geometry import collide, orthonormal_frame, u_nodes
from .interpolation import prepare
from .kernel import AngularKernel, DivergenceError, KernelDomainError, sphere_area
from .quadrature import ThetaRule, gauss_panels, geometric_tail, theta_rule
from .state import Distribution, NormSpec


@dataclass(frozen=True)
class QuadratureSpec:
    """Sigma quadrature and interpolation settings.

    Bounded kernels use ``n_panels`` uniform Gauss-Legendre panels of
    ``order`` nodes on the support; graded rules (singular kernels and the
    profile pass of D) start at ``theta_min`` with panel ratio ``ratio``.
    """

    order: int = 8
    n_panels: int = 2
    M_u: int = 16
    interp_order: int = 1
    theta_min: float = 1e-4
    ratio: float = 2.0
    rel_skip: float = 1e-14
    rtol: float = 1e-3   # Cauchy tolerance on the theta -> 0 tail of D

    def __post_init__(self):
        if self.interp_order not in (1, 3):
            raise ValueError("interp_order must be 1 or 3")
        if self.order < 1 or self.n_panels < 1:
            raise ValueError("theta rule needs at least one node")


@dataclass(frozen=True)
class SigmaRule:
    theta: ThetaRule
    u: np.ndarray        # (M, N-1) coordinates in the frame orthogonal to k
    u_weights: np.ndarray  # normalized, sum 1
    b: np.ndarray        # kernel values at the theta nodes
    N: int

    @property
    def theta_weights(self) -> np.ndarray:
        """Full dsigma weight per theta node: w_theta b sin^{N-2} |S^{N-2}|."""
        t = self.theta
        return t.weights * self.b * np.sin(t.nodes) ** (self.N - 2) * sphere_area(self.N - 2)

    def flat(self):
        """Per-sigma-node arrays (cos, sin, u1, u2, weight) for the compiled loops."""
        tw = self.theta_weights
        M = len(self.u_weights)
        ct = np.repeat(np.cos(self.theta.nodes), M)
        st = np.repeat(np.sin(self.theta.nodes), M)
        u1 = np.tile(self.u[:, 0], len(tw))
        u2 = np.tile(self.u[:, 1] if self.u.shape[1] > 1 else np.zeros(M), len(tw))
        w = np.repeat(tw, M) * np.tile(self.u_weights, len(tw))
        return ct, st, u1, u2, w

    @property
    def total_weight(self) -> float:
        return float(self.theta_weights.sum())


def _angular(kernel) -> AngularKernel:
    return kernel.angular


def sigma_rule(kernel, quad: QuadratureSpec = QuadratureSpec()) -> SigmaRule:
    ang = _angular(kernel)
    N = kernel.dim
    lo, hi = ang.support
    if ang.symmetric:
        hi = min(hi, 0.5 * pi)
    graded = ang.kind == "singular" and ang.exponent < 0
    if hi <= lo:
        rule = ThetaRule(np.zeros(0), np.zeros(0), np.zeros(0, int), np.array([lo, hi]), False)
    else:
        rule = theta_rule(lo, hi, graded=graded, theta_min=quad.theta_min, ratio=quad.ratio,
                          order=quad.order, n_panels=quad.n_panels)
    u, uw = u_nodes(N, quad.M_u)
    return SigmaRule(rule, u, uw, ang(rule.nodes), N)


# -- collision operator -----------------------------------------------------

@dataclass(frozen=True)
class CollisionResult:
    q_values: np.ndarray
    gain: np.ndarray
    loss: np.ndarray


def _check_same_grid(f: Distribution, g: Distribution):
    if f.grid != g.grid:
        raise ValueError("f and g live on different velocity grids")


def eval_Q(g: Distribution, f: Distribution, kernel, quad: QuadratureSpec = QuadratureSpec()) -> CollisionResult:
    """Q(g, f) on the grid, f evaluated at v' and g at v'*."""
    _check_same_grid(f, g)
    ang = _angular(kernel)
    if ang.singular:
        raise KernelDomainError(
            "pointwise Q needs an integrable angular kernel; split off the grazing part "
            "or use lyapunov_functional")
    grid = f.grid
    rule = sigma_rule(kernel, quad)
    ct, st, u1, u2, w = rule.flat()
    pts = grid.points
    cf = prepare(f.values, quad.interp_order)
    fv = f.values.ravel()
    if g is f or np.array_equal(g.values, f.values):
        gain, loss = _numerics.q_symmetric(cf, fv, pts, grid.n, grid.R, grid.h, quad.interp_order,
                                           float(kernel.gamma), ct, st, u1, u2, w)
    else:
        cg = prepare(g.values, quad.interp_order)
        gain, loss = _numerics.q_general(cf, cg, fv, g.values.ravel(), pts, grid.n, grid.R, grid.h,
                                         quad.interp_order, float(kernel.gamma), ct, st, u1, u2, w)
    vol = grid.cell_volume
    gain = (gain * vol).reshape(grid.shape)
    loss = (loss * vol).reshape(grid.shape)
    return CollisionResult(gain - loss, gain, loss)


def weak_form(f: Distribution, kernel, phi, quad: QuadratureSpec = QuadratureSpec()) -> float:
    """1/4 sum (phi' + phi'* - phi - phi*) f f* B over grid pairs and sigma nodes.

    Independent of interpolation: f only enters at grid nodes and the test
    function ``phi`` (an (M, N) -> (M,) callable) is evaluated exactly.
    """
    grid = f.grid
    N = grid.N
    rule = sigma_rule(kernel, quad)
    pts = grid.points
    fv = f.values.ravel()
    keep = fv > 0
    pts, fv = pts[keep], fv[keep]
    vi = np.repeat(pts, len(pts), axis=0)
    vj = np.tile(pts, (len(pts), 1))
    ff = np.repeat(fv, len(fv)) * np.tile(fv, len(fv))
    w = vi - vj
    wn = np.linalg.norm(w, axis=1)
    nz = wn > 0
    vi, vj, ff, w, wn = vi[nz], vj[nz], ff[nz], w[nz], wn[nz]
    kin = wn ** kernel.gamma
    k = w / wn[:, None]
    frames = np.array([orthonormal_frame(kk) for kk in k])
    base = phi(vi) + phi(vj)
    total = 0.0
    for th, tw in zip(rule.theta.nodes, rule.theta_weights):
        for un, uw in zip(rule.u, rule.u_weights):
            u = np.einsum("a,man->mn", un, frames)
            sigma = np.cos(th) * k + np.sin(th) * u
            vp, vps = collide(vi, vj, sigma)
            total += tw * uw * np.sum((phi(vp) + phi(vps) - base) * ff * kin)
    return 0.25 * total * grid.cell_volume ** 2


# -- Lyapunov functional ------------------------------------------------------

@dataclass(frozen=True)
class Profiles:
    """Per-theta-node profiles of the transformed D integrand (see _numerics.d_profiles).

    Axes: (g index, exponent combo, gamma index, theta node).  Values include
    the velocity cell volumes and the normalized u average, but not the
    kernel or the |S^{N-2}| factor.
    """

    theta: ThetaRule
    N: int
    combos: tuple        # ((p, alpha), ...)
    gammas: tuple
    L: np.ndarray
    G: np.ndarray
    R2: np.ndarray
    S: np.ndarray

    def combo_index(self, p: float, alpha: float) -> int:
        for i, (pp, aa) in enumerate(self.combos):
            if np.isclose(pp, p) and np.isclose(aa, alpha):
                return i
        raise KeyError(f"profiles not computed for p={p}, alpha={alpha}")

    def gamma_index(self, gamma: float) -> int:
        for i, gg in enumerate(self.gammas):
            if np.isclose(gg, gamma):
                return i
        raise KeyError(f"profiles not computed for gamma={gamma}")

    def measure(self, angular: AngularKernel) -> np.ndarray:
        """dsigma weights (without u) of the kernel at the theta nodes: w b sin^{N-2} |S^{N-2}|."""
        t = self.theta.nodes
        return self.theta.weights * angular(t) * np.sin(t) ** (self.N - 2) * sphere_area(self.N - 2)


@dataclass(frozen=True)
class ThetaIntegral:
    value: float
    tail: float
    error: float         # estimated quadrature error of the theta -> 0 extrapolation
    ratio: float         # observed ratio of the two innermost panel integrals


def integrate_profile(profile: np.ndarray, prof: Profiles, angular: AngularKernel,
                      rtol: float = 1e-3) -> ThetaIntegral:
    """Integrate node values against b dsigma, extrapolating the theta -> 0 tail.

    Raises DivergenceError when the panel integrals do not decay toward 0 or
    when the extrapolated tail fails the Cauchy check against the estimate
    from the next pair of panels.
    """
    panels = prof.theta.panel_sums(prof.measure(angular) / prof.theta.weights * profile)
    total = float(panels.sum())
    lo = angular.support[0]
    if not (prof.theta.needs_tail and lo == 0.0 and angular(np.array([prof.theta.nodes[0]]))[0] > 0):
        return ThetaIntegral(total, 0.0, 0.0, np.inf)
    i0, i1, i2 = panels[0], panels[1], panels[2]
    tail, r = geometric_tail(i0, i1)
    if tail is None:
        # a sign change or growth toward 0 of a tiny profile is noise, not divergence
        scale = np.abs(panels).sum()
        if abs(i0) + abs(i1) <= 1e-12 * max(scale, 1e-300):
            return ThetaIntegral(total, 0.0, abs(i0) + abs(i1), r)
        raise DivergenceError(f"theta-graded quadrature does not converge (panel ratio {r:.4g})")
    coarse_tail, _ = geometric_tail(i1, i2)
    coarse = float(panels[1:].sum()) + (coarse_tail if coarse_tail is not None else 0.0)
    err = abs(total + tail - coarse)
    # scale by the absolute panel mass: cancellation across theta in the total
    # says nothing about the quality of the extrapolated tail
    if err > rtol * max(abs(total + tail), np.abs(panels).sum() + abs(tail), 1e-300):
        raise DivergenceError(
            f"theta-graded quadrature failed its Cauchy check: tail {tail:.4g}, "
            f"discrepancy {err:.4g}, panel ratio {r:.4g}")
    return ThetaIntegral(total + tail, tail, err, r)


def profile_rule(N: int, quad: QuadratureSpec = QuadratureSpec(), extra_breaks=()) -> ThetaRule:
    """Graded theta rule on [0, pi/2] shared by every D-type integral.

    ``extra_breaks`` are inserted as panel boundaries so that kernels cut at
    those angles are integrated panel-exactly.
    """
    base = theta_rule(0.0, 0.5 * pi, graded=True, theta_min=quad.theta_min, ratio=quad.ratio,
                      order=quad.order)
    extra = [t for t in extra_breaks if 0.0 < t < 0.5 * pi]
    if not extra:
        return base
    breaks = np.unique(np.concatenate([base.breaks, extra]))
    nodes, weights, panel = gauss_panels(breaks, quad.order)
    return ThetaRule(nodes, weights, panel, breaks, base.needs_tail)


def compute_profiles(f: Distribution, gs, combos, gammas,
                     quad: QuadratureSpec = QuadratureSpec(), rule: ThetaRule | None = None) -> Profiles:
    """One pass over pairs producing the profiles for every (g, combo, gamma)."""
    gs = list(gs)
    for g in gs:
        _check_same_grid(f, g)
    grid = f.grid
    rule = profile_rule(grid.N, quad) if rule is None else rule
    combos = tuple((float(p), float(a)) for p, a in combos)
    gammas = tuple(float(x) for x in gammas)
    u, uw = u_nodes(grid.N, quad.M_u)
    u1 = np.ascontiguousarray(u[:, 0])
    u2 = np.ascontiguousarray(u[:, 1]) if u.shape[1] > 1 else np.zeros(len(uw))
    cf = prepare(f.values, quad.interp_order)
    gmat = np.ascontiguousarray(np.stack([g.values.ravel() for g in gs]))
    L, G, R2, S = _numerics.d_profiles(
        cf, f.values.ravel(), gmat, grid.points, grid.n, grid.R, grid.h, quad.interp_order,
        np.array(gammas), np.array([c[0] for c in combos]), np.array([c[1] for c in combos]),
        np.cos(rule.nodes), np.sin(rule.nodes), u1, u2, uw, quad.rel_skip)
    vol2 = grid.cell_volume ** 2
    return Profiles(rule, grid.N, combos, gammas, L * vol2, G * vol2, R2 * vol2, S * vol2)


def lyapunov_from_profiles(prof: Profiles, angular: AngularKernel, p: float, alpha: float,
                           gamma: float, g_index: int = 0, rtol: float = 1e-3) -> ThetaIntegral:
    c = prof.combo_index(p, alpha)
    k = prof.gamma_index(gamma)
    return integrate_profile(prof.L[g_index, c, k], prof, angular, rtol)


def _check_compatibility(angular: AngularKernel, spec: NormSpec):
    if angular.kind != "singular" or not angular.touches_zero:
        return
    pq = spec.p * spec.q
    if -2.0 < angular.nu <= -1.0 and pq < 2.0:
        raise ValueError("singular kernel with nu in (-2, -1] needs pq >= 2")
    if -3.0 < angular.nu <= -2.0 and pq < 4.0:
        raise ValueError("singular kernel with nu in (-3, -2] needs pq >= 4")


def lyapunov_functional(f: Distribution, g: Distribution, spec: NormSpec, kernel,
                        quad: QuadratureSpec = QuadratureSpec()) -> float:
    """D = integral of Q(g, f) f^{p-1} <v>^{pq}, in the pre/post-transformed form."""
    ang = _angular(kernel)
    _check_compatibility(ang, spec)
    if not f.values.any() or not g.values.any():
        return 0.0
    prof = compute_profiles(f, [g], [(spec.p, spec.alpha)], [kernel.gamma], quad)
    return lyapunov_from_profiles(prof, ang, spec.p, spec.alpha, kernel.gamma, 0, quad.rtol).value


def lyapunov_direct(f: Distribution, g: Distribution, spec: NormSpec, kernel,
                    quad: QuadratureSpec = QuadratureSpec()) -> float:
    """Untransformed D = sum Q(g, f)_i f_i^{p-1} <v_i>^{pq} h^N (bounded kernels only)."""
    res = eval_Q(g, f, kernel, quad)
    weight = f.values ** (spec.p - 1.0) * f.grid.bracket(spec.p * spec.q)
    return float(np.sum(res.q_values * weight) * f.grid.cell_volume)


# -- R_alpha ------------------------------------------------------------------

X_MAX = np.sqrt(0.5)


def _u_projections(v, v_star, N, M_u):
    """|v - v*| and the values u.v* over the S^{N-2} nodes (u orthogonal to k)."""
    v = np.asarray(v, dtype=float)
    v_star = np.asarray(v_star, dtype=float)
    w = v - v_star
    wn = float(np.linalg.norm(w))
    if wn == 0.0:
        return 0.0, np.zeros(2 if N == 2 else M_u), np.full(2 if N == 2 else M_u, 0.5 if N == 2 else 1.0 / M_u)
    frame = orthonormal_frame(w / wn)
    nodes, uw = u_nodes(N, M_u)
    uvec = nodes @ frame
    return wn, uvec @ v_star, uw


def _radicand(x, v, v_star, wn, uv):
    x = np.asarray(x, dtype=float)[..., None]
    a = 1.0 + (v @ v) * (1.0 - x ** 2) + (v_star @ v_star) * x ** 2
    return a + 2.0 * x * np.sqrt(1.0 - x ** 2) * wn * uv


def r_alpha(x, v, v_star, alpha: float, N: int, M_u: int = 16):
    """u-integral (unnormalized S^{N-2} measure) of <v'>^{2 alpha} - <v>^{2 alpha} at x = sin(theta/2)."""
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > X_MAX + 1e-15):
        raise ValueError("x must lie in [-sqrt(2)/2, sqrt(2)/2]")
    v = np.asarray(v, dtype=float)
    v_star = np.asarray(v_star, dtype=float)
    wn, uv, uw = _u_projections(v, v_star, N, M_u)
    E = _radicand(x, v, v_star, wn, uv)
    val = sphere_area(N - 2) * (E ** alpha - (1.0 + v @ v) ** alpha) @ uw
    return float(val) if val.ndim == 0 else val


def r_alpha_derivatives(x, v, v_star, alpha: float, N: int, M_u: int = 16):
    """(R'_alpha(x), R''_alpha(x)) from the closed-form derivatives of the radicand."""
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    v_star = np.asarray(v_star, dtype=float)
    wn, uv, uw = _u_projections(v, v_star, N, M_u)
    E = _radicand(x, v, v_star, wn, uv)
    xx = x[..., None]
    s = np.sqrt(1.0 - xx ** 2)
    dE = 2.0 * xx * (v_star @ v_star - v @ v) + 2.0 * wn * uv * (1.0 - 2.0 * xx ** 2) / s
    d2E = 2.0 * (v_star @ v_star - v @ v) + 2.0 * wn * uv * xx * (2.0 * xx ** 2 - 3.0) / s ** 3
    d1 = alpha * E ** (alpha - 1.0) * dE
    if alpha == 1.0:
        d2 = d2E
    else:
        d2 = alpha * (alpha - 1.0) * E ** (alpha - 2.0) * dE ** 2 + alpha * E ** (alpha - 1.0) * d2E
    area = sphere_area(N - 2)
    return area * (d1 @ uw), area * (d2 @ uw)
