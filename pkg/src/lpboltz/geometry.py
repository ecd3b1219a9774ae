"""Binary-collision geometry in the sigma representation.

Post-collisional velocities are always built from the integration variable
sigma::

    v'  = (v + v*)/2 + |v - v*|/2 sigma
    v'* = (v + v*)/2 - |v - v*|/2 sigma

The (k, theta, u) frame, with k = (v - v*)/|v - v*| and u orthogonal to k,
only enumerates sigma = cos(theta) k + sin(theta) u for quadrature.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kernel import SymmetrizedKernel, sphere_area
from .quadrature import theta_rule

_ORTHO_TOL = 1e-12


@dataclass(frozen=True)
class CollisionFrame:
    v: np.ndarray
    v_star: np.ndarray
    sigma: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.sigma, dtype=float)
        if abs(np.linalg.norm(s) - 1.0) > _ORTHO_TOL:
            raise ValueError("sigma must be a unit vector")


@dataclass(frozen=True)
class AngleFrame:
    k: np.ndarray
    theta: float
    u: np.ndarray

    def __post_init__(self):
        k = np.asarray(self.k, dtype=float)
        u = np.asarray(self.u, dtype=float)
        if abs(np.linalg.norm(k) - 1.0) > _ORTHO_TOL or abs(np.linalg.norm(u) - 1.0) > _ORTHO_TOL:
            raise ValueError("k and u must be unit vectors")
        if abs(k @ u) > _ORTHO_TOL:
            raise ValueError("u must be orthogonal to k")
        if not 0.0 <= self.theta <= np.pi:
            raise ValueError("theta must lie in [0, pi]")


def collide(v, v_star, sigma):
    """Post-collisional pair (v', v'*); broadcasts over leading axes."""
    v = np.asarray(v, dtype=float)
    v_star = np.asarray(v_star, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    centre = 0.5 * (v + v_star)
    half = 0.5 * np.linalg.norm(v - v_star, axis=-1, keepdims=True)
    return centre + half * sigma, centre - half * sigma


def sigma_from_angles(frame: AngleFrame) -> np.ndarray:
    return np.cos(frame.theta) * np.asarray(frame.k, float) + np.sin(frame.theta) * np.asarray(frame.u, float)


def orthonormal_frame(k: np.ndarray) -> np.ndarray:
    """Rows spanning the orthogonal complement of the unit vector k.

    Same construction as the compiled evaluators: for N = 3 the first row
    is the normalized projection of e_x (or e_y when k is close to e_x).
    """
    k = np.asarray(k, dtype=float)
    if k.shape == (2,):
        return np.array([[-k[1], k[0]]])
    a = np.array([1.0, 0.0, 0.0]) if abs(k[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = a - (a @ k) * k
    e1 /= np.linalg.norm(e1)
    return np.array([e1, np.cross(k, e1)])


def u_nodes(N: int, M_u: int = 16):
    """Nodes (in the orthonormal frame) and normalized weights on S^{N-2}."""
    if N == 2:
        return np.array([[1.0], [-1.0]]), np.array([0.5, 0.5])
    if M_u < 2 or M_u % 2:
        raise ValueError("M_u must be even and >= 2")
    phi = 2.0 * np.pi * np.arange(M_u) / M_u
    return np.stack([np.cos(phi), np.sin(phi)], axis=1), np.full(M_u, 1.0 / M_u)


def cv_weight(theta, N: int, gamma: float = 0.0):
    """(jacobian, stretch) = (cos^{-N}(theta/2), 1/cos(theta/2)).

    With B = |x|^gamma b the full change-of-variables weight is
    jacobian * stretch**gamma = cos^{-N-gamma}(theta/2).
    """
    theta = np.asarray(theta, dtype=float)
    if np.any(theta < 0) or np.any(theta > 0.5 * np.pi + 1e-15):
        raise ValueError("theta must lie in [0, pi/2] (symmetrized kernels only)")
    c = np.cos(0.5 * theta)
    return c ** (-N), 1.0 / c


def cv_factor(theta, N: int, gamma: float) -> np.ndarray:
    jac, stretch = cv_weight(theta, N, gamma)
    return jac * stretch ** gamma


@dataclass(frozen=True)
class CVQuadrature:
    """Velocity grid and sigma rule used by :func:`verify_cv_identity`."""

    n: int = 64
    R: float = 8.0
    n_theta: int = 16
    M_u: int = 16


def verify_cv_identity(F, kernel: SymmetrizedKernel, quad: CVQuadrature = CVQuadrature(),
                       v_star=None) -> float:
    """Relative residual |LHS - RHS|/|RHS| of the change-of-variables formula.

    LHS = sum over grid v and sigma nodes of |v - v*|^gamma b F(v'),
    RHS = (sum over grid v of |v - v*|^gamma F(v)) * (angular integral of
    b cos^{-N-gamma}(theta/2)), the second factor from an independent
    theta rule of twice the order.  ``F`` maps an (M, N) array to (M,).
    """
    N = kernel.dim
    gamma = kernel.gamma
    lo, hi = kernel.angular.support
    hi = min(hi, 0.5 * np.pi)
    v_star = np.zeros(N) if v_star is None else np.asarray(v_star, dtype=float)
    h = 2.0 * quad.R / quad.n
    axis = -quad.R + (np.arange(quad.n) + 0.5) * h
    v = np.stack([m.ravel() for m in np.meshgrid(*([axis] * N), indexing="ij")], axis=1)
    w = v - v_star
    wn = np.linalg.norm(w, axis=1)
    kin = wn ** gamma if gamma > 0 else np.ones_like(wn)

    rule = theta_rule(lo, hi, graded=False, order=quad.n_theta, n_panels=1)
    unodes, uw = u_nodes(N, quad.M_u)
    lhs = 0.0
    if hi > lo:
        safe = np.where(wn > 0, wn, 1.0)
        k = np.where(wn[:, None] > 0, w / safe[:, None], np.eye(N)[0])
        frames = np.array([orthonormal_frame(ki) for ki in k])  # (M, N-1, N)
        bvals = kernel.angular(rule.nodes) * np.sin(rule.nodes) ** (N - 2)
        for th, wt, bt in zip(rule.nodes, rule.weights, bvals):
            for un, uwt in zip(unodes, uw):
                u = np.einsum("a,man->mn", un, frames)
                sigma = np.cos(th) * k + np.sin(th) * u
                vp, _ = collide(v, v_star, sigma)
                lhs += wt * bt * uwt * np.sum(kin * F(vp))
        lhs *= sphere_area(N - 2) * h ** N

    fine = theta_rule(lo, hi, graded=False, order=2 * quad.n_theta, n_panels=2)
    ang = 0.0
    if hi > lo:
        ang = sphere_area(N - 2) * np.sum(
            fine.weights * kernel.angular(fine.nodes) * np.sin(fine.nodes) ** (N - 2)
            * cv_factor(fine.nodes, N, gamma))
    rhs = ang * np.sum(kin * F(v)) * h ** N
    if rhs == 0.0:
        return 0.0 if lhs == 0.0 else np.inf
    return float(abs(lhs - rhs) / abs(rhs))
