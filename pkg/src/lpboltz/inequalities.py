"""A priori constants built by following the proofs, and checks of the
weighted L^p functional inequalities on grid distributions.

Every check compares a left-hand side D (the Lyapunov functional, computed
in transformed form) with an explicit right-hand side and returns an
:class:`InequalityReport`.  Many checks over one distribution share a single
profile pass (:func:`lpboltz.collision.compute_profiles`).
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field
from functools import lru_cache
from math import pi

import numpy as np
from scipy.optimize import linprog, minimize_scalar

from .collision import (Profiles, QuadratureSpec, ThetaIntegral, compute_profiles, integrate_profile,
                        lyapunov_from_profiles, profile_rule, r_alpha_derivatives, X_MAX)
from .kernel import (AngularKernel, AngularQuadrature, angular_mass, angular_moment, sphere_area,
                     split)
from .state import Distribution, NormSpec, l1_moment, weighted_lp_norm

MARGIN_RTOL = 1e-6


@dataclass
class InequalityReport:
    name: str
    lhs: float
    rhs: float
    margin: float
    tol_margin: float
    passed: bool
    constants: dict = field(default_factory=dict)
    seed: int | None = None
    convergence: dict = field(default_factory=dict)
    fitted: bool = False

    def to_dict(self) -> dict:
        return asdict(self)


def _report(name, lhs: ThetaIntegral | float, rhs_value: float, rhs_error: float = 0.0,
            constants=None, seed=None, convergence=None, fitted=False) -> InequalityReport:
    if isinstance(lhs, ThetaIntegral):
        lhs_value, lhs_error = lhs.value, lhs.error
        conv = {"lhs_tail": lhs.tail, "lhs_tail_error": lhs.error, "lhs_panel_ratio": lhs.ratio}
    else:
        lhs_value, lhs_error, conv = float(lhs), 0.0, {}
    conv.update(convergence or {})
    conv["rhs_error"] = rhs_error
    tol = MARGIN_RTOL * max(abs(lhs_value), abs(rhs_value), 1.0) + lhs_error + rhs_error
    margin = rhs_value - lhs_value
    return InequalityReport(name, float(lhs_value), float(rhs_value), float(margin), float(tol),
                            bool(margin >= -tol), dict(constants or {}), seed,
                            {k: float(v) for k, v in conv.items()}, fitted)


def _ang(kernel) -> AngularKernel:
    return kernel.angular if hasattr(kernel, "angular") else kernel


# -- Young step ------------------------------------------------------------

def optimal_mu(theta, p: float, N: int, gamma: float):
    """mu(theta) = cos(theta/2)^{-(N+gamma)/p}."""
    return np.cos(0.5 * np.asarray(theta, dtype=float)) ** (-(N + gamma) / p)


def _cv_power(theta, exponent):
    return np.cos(0.5 * theta) ** exponent


def _profiles_for(f, gs, spec: NormSpec, gamma, quad, extra_breaks=()):
    rule = profile_rule(f.grid.N, quad, extra_breaks)
    return compute_profiles(f, gs, [(spec.p, spec.alpha)], [gamma], quad, rule)


def estim1_rhs(prof: Profiles, angular: AngularKernel, spec: NormSpec, gamma: float,
               g_index: int = 0, rtol: float = 1e-3):
    """The two explicit integrals bounding D after the Young step with optimal mu.

    Returns (value, error estimate)."""
    N = prof.N
    c = prof.combo_index(spec.p, spec.alpha)
    k = prof.gamma_index(gamma)
    t = prof.theta.nodes
    cw = _cv_power(t, -(N + gamma) / spec.p_conj)
    first = integrate_profile((cw - 1.0) * prof.S[g_index, c, k], prof, angular, rtol)
    second = integrate_profile(cw * prof.R2[g_index, c, k] / spec.p, prof, angular, rtol)
    return first.value + second.value, first.error + second.error


def estim1_alternative_rhs(prof: Profiles, angular: AngularKernel, spec: NormSpec, gamma: float,
                           g_index: int = 0, rtol: float = 1e-3):
    """Variant bound from mu(theta) = cos(theta/2)^{-(N+gamma)/p - q}."""
    N, p, q = prof.N, spec.p, spec.q
    c = prof.combo_index(p, spec.alpha)
    k = prof.gamma_index(gamma)
    t = prof.theta.nodes
    S = prof.S[g_index, c, k]
    first = integrate_profile((_cv_power(t, q - (N + gamma) / spec.p_conj) - 1.0) * S, prof, angular, rtol)
    gain_w = prof.R2[g_index, c, k] + S   # sum f^p g |w|^gamma <v'>^{pq}
    bracket = gain_w - _cv_power(t, p * q) * S
    coef = _cv_power(t, -q * (p - 1.0) - (N + gamma) / spec.p_conj) / p
    second = integrate_profile(coef * bracket, prof, angular, rtol)
    return first.value + second.value, first.error + second.error


def check_estim1(f: Distribution, g: Distribution, spec: NormSpec, kernel,
                 quad: QuadratureSpec = QuadratureSpec(), *, alternative: bool = False,
                 profiles: Profiles | None = None, g_index: int = 0, seed=None) -> InequalityReport:
    ang = _ang(kernel)
    gamma = kernel.gamma
    if not f.values.any() or not g.values.any():
        return _report("estim1", 0.0, 0.0, seed=seed)
    prof = profiles if profiles is not None else _profiles_for(f, [g], spec, gamma, quad)
    lhs = lyapunov_from_profiles(prof, ang, spec.p, spec.alpha, gamma, g_index, quad.rtol)
    if alternative:
        rhs, err = estim1_alternative_rhs(prof, ang, spec, gamma, g_index, quad.rtol)
        N = f.grid.N
        const = {"badhyp": spec.q - (N + gamma) / spec.p_conj}
        return _report("estim1_alternative", lhs, rhs, err, const, seed)
    rhs, err = estim1_rhs(prof, ang, spec, gamma, g_index, quad.rtol)
    return _report("estim1", lhs, rhs, err, seed=seed)


# -- fonc constant -----------------------------------------------------------

def kappa1(p: float, N: int, gamma: float) -> float:
    """sup over (0, pi/2] of [cos(theta/2)^{-(N+gamma)/p'} - 1]/(1 - cos theta)."""
    e = (N + gamma) * (p - 1.0) / p

    def ratio(t):
        return (np.cos(0.5 * t) ** (-e) - 1.0) / (2.0 * np.sin(0.5 * t) ** 2)

    grid = np.concatenate([np.geomspace(1e-6, 0.1, 200), np.linspace(0.1, 0.5 * pi, 2000)])
    vals = ratio(grid)
    best = max(float(vals.max()), e / 4.0)
    i = int(np.argmax(vals))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
    if hi > lo:
        res = minimize_scalar(lambda t: -ratio(t), bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-12})
        best = max(best, -float(res.fun))
    return best


def _lemma_sample(alpha: float, N: int, n: int, seed: int) -> float:
    rng = np.random.default_rng(seed)
    xs = np.linspace(0.0, X_MAX, 33)
    best = 0.0
    for _ in range(n):
        mags = 10.0 ** rng.uniform(-2.0, 3.0, size=2)
        mags[rng.random(2) < 0.05] = 0.0
        dirs = rng.normal(size=(2, N))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        v, vs = mags[0] * dirs[0], mags[1] * dirs[1]
        _, d2 = r_alpha_derivatives(xs, v, vs, alpha, N)
        norm = (1.0 + v @ v) ** alpha * (1.0 + vs @ vs) ** alpha
        best = max(best, float(np.max(np.abs(d2))) / norm)
    return best


@lru_cache(maxsize=None)
def lemma_constant(alpha: float, N: int, n_samples: int = 2000, seed: int = 0,
                   max_doublings: int = 5) -> tuple:
    """Empirical sup of |R''_alpha(x)| / (<v>^{2 alpha} <v*>^{2 alpha}).

    The sample is doubled until the estimate moves by at most 5%; returns
    (estimate, history).  Raises RuntimeError if it never stabilizes.
    """
    if alpha < 1:
        raise ValueError("the lemma constant is defined for alpha >= 1")
    history = [_lemma_sample(alpha, N, n_samples, seed)]
    n = n_samples
    for k in range(max_doublings):
        n *= 2
        history.append(max(history[-1], _lemma_sample(alpha, N, n // 2, seed + k + 1)))
        if history[-1] <= 1.05 * history[-2]:
            return history[-1], tuple(history)
    raise RuntimeError(f"lemma constant did not stabilize: {history}")


@dataclass(frozen=True)
class FoncConstant:
    kappa1: float
    lemma_constant: float
    cst: float
    angular_moment: float
    value: float


def construct_fonc_constant(p: float, N: int, gamma: float, alpha: float, kernel,
                            aquad: AngularQuadrature = AngularQuadrature()) -> FoncConstant:
    """C(b) = cst * integral of b (1 - cos theta) with
    cst = kappa1 + (kappa1 + 1) C_hat / (4 p |S^{N-2}|)."""
    if alpha < 1:
        raise ValueError("construct_fonc_constant needs alpha = pq/2 >= 1")
    ang = _ang(kernel)
    k1 = kappa1(p, N, gamma)
    c_hat, _ = lemma_constant(float(alpha), N)
    cst = k1 + (k1 + 1.0) * c_hat / (4.0 * p * sphere_area(N - 2))
    mom = angular_moment(ang, N, aquad) if ang.support[1] > ang.support[0] else 0.0
    return FoncConstant(k1, c_hat, cst, mom, cst * mom)


def check_fonc(f: Distribution, g: Distribution, spec: NormSpec, kernel,
               quad: QuadratureSpec = QuadratureSpec(), *, profiles: Profiles | None = None,
               g_index: int = 0, constant: FoncConstant | None = None, seed=None) -> InequalityReport:
    ang = _ang(kernel)
    gamma = kernel.gamma
    N = f.grid.N
    _check_compat(ang, spec)
    const = constant or construct_fonc_constant(spec.p, N, gamma, spec.alpha, ang)
    rhs = (const.value * l1_moment(g, spec.p * spec.q + gamma)
           * weighted_lp_norm(f, NormSpec(spec.p, spec.q + gamma / spec.p)) ** spec.p)
    if not f.values.any() or not g.values.any():
        return _report("fonc", 0.0, rhs, constants=asdict(const), seed=seed)
    prof = profiles if profiles is not None else _profiles_for(f, [g], spec, gamma, quad)
    lhs = lyapunov_from_profiles(prof, ang, spec.p, spec.alpha, gamma, g_index, quad.rtol)
    return _report("fonc", lhs, rhs, constants=asdict(const), seed=seed)


class CompatibilityError(ValueError):
    """(p, q) incompatible with the singularity order nu of the kernel."""


def _check_compat(ang: AngularKernel, spec: NormSpec):
    if ang.kind != "singular" or ang.exponent >= 0 or not ang.touches_zero:
        return
    pq = spec.p * spec.q
    if -2.0 < ang.nu <= -1.0 and pq < 2.0 - 1e-12:
        raise CompatibilityError(f"nu = {ang.nu} in (-2, -1] requires pq >= 2 (got pq = {pq:g})")
    if -3.0 < ang.nu <= -2.0 and pq < 4.0 - 1e-12:
        raise CompatibilityError(f"nu = {ang.nu} in (-3, -2] requires pq >= 4 (got pq = {pq:g})")


# -- cutoff-part constants -------------------------------------------------------

def loss_lower_bound_violation(N: int, gamma: float, n: int = 100_000, seed: int = 0) -> float:
    """Largest violation of |v - v*|^gamma >= 2^{-gamma}<v>^gamma - 2<v*>^gamma over a sample."""
    rng = np.random.default_rng(seed)
    mags = 10.0 ** rng.uniform(-3, 3, size=(n, 2))
    d = rng.normal(size=(n, 2, N))
    d /= np.linalg.norm(d, axis=2, keepdims=True)
    v = mags[:, :1] * d[:, 0]
    vs = mags[:, 1:] * d[:, 1]
    lhs = np.linalg.norm(v - vs, axis=1) ** gamma
    rhs = 2.0 ** -gamma * (1 + np.sum(v * v, 1)) ** (gamma / 2) - 2.0 * (1 + np.sum(vs * vs, 1)) ** (gamma / 2)
    return float(max(0.0, np.max(rhs - lhs)))


@dataclass(frozen=True)
class L1Bounds:
    """Bounds on f used by the cutoff-part construction."""

    mass_lower: float
    l1_gamma_upper: float      # ||f||_{L^1_gamma}
    l1_top_upper: float        # ||f||_{L^1_{pq+2}}, dominates every L^1 weight used

    @classmethod
    def of(cls, f: Distribution, spec: NormSpec, gamma: float) -> "L1Bounds":
        return cls(f.mass, l1_moment(f, gamma), l1_moment(f, spec.p * spec.q + 2.0))

    def admits(self, f: Distribution, spec: NormSpec, gamma: float, rtol: float = 1e-12) -> bool:
        b = L1Bounds.of(f, spec, gamma)
        return (b.mass_lower >= self.mass_lower * (1 - rtol)
                and b.l1_gamma_upper <= self.l1_gamma_upper * (1 + rtol)
                and b.l1_top_upper <= self.l1_top_upper * (1 + rtol))


@dataclass(frozen=True)
class Estim3Constants:
    mu1: float
    mu2: float
    r: float
    theta0: float
    C_plus: float
    K_minus: float
    K0: float
    C0: float
    b_mass: float
    M: float
    terms: tuple = ()

    def invariant_lhs(self, p: float, N: int, gamma: float) -> float:
        """Bracketed sum of the three Young terms times M (must be <= K0/2)."""
        a = (1 - 1 / p) / self.mu1 * np.cos(pi / 4) ** (-N - gamma)
        b = ((1 - 1 / p) / self.mu2 * np.sin(0.5 * self.theta0) ** (-N - gamma)
             * (1 + self.r ** 2) ** ((gamma - 2) / 2))
        c = self.mu2 ** (p - 1) / p
        return (a + b + c) * self.M

    def invariant_holds(self, p: float, N: int, gamma: float) -> bool:
        return self.invariant_lhs(p, N, gamma) <= 0.5 * self.K0 * (1 + 1e-12)


def construct_estim3_constants(bounds: L1Bounds, p: float, q: float, gamma: float, N: int,
                               theta0: float, kernel, aquad: AngularQuadrature = AngularQuadrature(),
                               max_iter: int = 2000) -> Estim3Constants:
    """Young parameters and (C+, K-) for a kernel supported in [theta0, pi/2].

    Search order: halve mu2 until (1/p) mu2^{p-1} M <= K0/6, then double r
    until the r-term is <= K0/6, then double mu1 until its term is <= K0/6.
    """
    if not 0.0 < theta0 < 0.5 * pi:
        raise ValueError("theta0 must lie in (0, pi/2)")
    if not 0.0 <= gamma <= 1.0:
        raise ValueError("gamma must lie in [0, 1]")
    if bounds.mass_lower <= 0:
        raise ValueError("a positive mass lower bound is required")
    ang = _ang(kernel)
    b_mass = angular_mass(ang, N, aquad) if ang.support[1] > ang.support[0] else 0.0
    K0 = 2.0 ** -gamma * bounds.mass_lower
    C0 = 2.0 * bounds.l1_gamma_upper
    M = bounds.l1_top_upper
    target = K0 / 6.0
    young = 1.0 - 1.0 / p

    mu2 = 1.0
    for _ in range(max_iter):
        if mu2 ** (p - 1) * M / p <= target:
            break
        mu2 *= 0.5
    else:
        raise OverflowError("mu2 search did not terminate")
    geo = np.sin(0.5 * theta0) ** (-N - gamma)
    r = 1.0
    for _ in range(max_iter):
        if young / mu2 * geo * (1 + r * r) ** ((gamma - 2) / 2) * M <= target:
            break
        r *= 2.0
        if not np.isfinite(r * r):
            raise OverflowError("velocity cutoff r overflowed")
    else:
        raise OverflowError("r search did not terminate")
    mu1 = 1.0
    for _ in range(max_iter):
        if young / mu1 * 2.0 ** ((N + gamma) / 2) * M <= target:
            break
        mu1 *= 2.0
    else:
        raise OverflowError("mu1 search did not terminate")
    C_plus = b_mass * (C0 + mu1 ** (p - 1) / p * (1 + r * r) ** (gamma / 2) * M)
    if not np.isfinite(C_plus):
        raise OverflowError("C+ overflowed")
    out = Estim3Constants(mu1, mu2, r, theta0, C_plus, 0.5 * K0 * b_mass, K0, C0, b_mass, M)
    if not out.invariant_holds(p, N, gamma):
        raise AssertionError("constructed constants violate the closing condition")
    return out


def estim3_rhs(f: Distribution, spec: NormSpec, gamma: float, C_plus: float, K_minus: float) -> float:
    y = weighted_lp_norm(f, spec) ** spec.p
    z = weighted_lp_norm(f, NormSpec(spec.p, spec.q + gamma / spec.p)) ** spec.p
    return C_plus * y - K_minus * z


def check_estim3(f: Distribution, spec: NormSpec, kernel, constants: Estim3Constants,
                 bounds: L1Bounds | None = None, quad: QuadratureSpec = QuadratureSpec(), *,
                 profiles: Profiles | None = None, g_index: int = 0, seed=None) -> InequalityReport:
    """D(f, f) for a kernel supported in [theta0, pi/2] against C+ y - K- z."""
    ang = _ang(kernel)
    gamma = kernel.gamma
    if f.mass <= 0:
        raise ValueError("check_estim3 needs a distribution with positive mass")
    if bounds is not None and not bounds.admits(f, spec, gamma):
        raise ValueError("f violates the L1 bounds used to build the constants")
    if ang.support[0] < constants.theta0 * (1 - 1e-12):
        raise ValueError("kernel support extends below theta0")
    prof = profiles if profiles is not None else _profiles_for(f, [f], spec, gamma, quad,
                                                              (constants.theta0,))
    lhs = lyapunov_from_profiles(prof, ang, spec.p, spec.alpha, gamma, g_index, quad.rtol)
    rhs = estim3_rhs(f, spec, gamma, constants.C_plus, constants.K_minus)
    return _report("estim3", lhs, rhs, constants=asdict(constants), seed=seed)


# -- splitting -----------------------------------------------------------------

@dataclass(frozen=True)
class Estim5Constants:
    theta0: float
    fonc_remainder: float       # C(b_r) * ||f||_{L^1_{pq+gamma}}
    cutoff: Estim3Constants
    C_plus: float
    K_minus: float


def theta0_grid(quad: QuadratureSpec = QuadratureSpec()) -> np.ndarray:
    """Candidate split angles: breakpoints of the shared graded profile rule."""
    br = profile_rule(2, quad).breaks
    return br[(br > 0) & (br < 0.5 * pi)]


def construct_estim5_constants(bounds: L1Bounds, spec: NormSpec, kernel, N: int,
                               quad: QuadratureSpec = QuadratureSpec(),
                               aquad: AngularQuadrature = AngularQuadrature()) -> Estim5Constants:
    """Largest grid theta0 with C(b_r) ||f||_{L^1_{pq+gamma}} <= K-(b_c)/2, then cutoff constants.

    The weighted L^1 norm is bounded by the L^1_{pq+2} bound.
    """
    ang = _ang(kernel)
    gamma = kernel.gamma
    grid = theta0_grid(quad)
    M = bounds.l1_top_upper

    def parts(t0):
        cut, rem = split(ang, t0)
        fc = construct_fonc_constant(spec.p, N, gamma, spec.alpha, rem, aquad).value * M
        km = 0.5 * 2.0 ** -gamma * bounds.mass_lower * angular_mass(cut, N, aquad)
        return fc, km

    def ok(i):
        fc, km = parts(grid[i])
        return fc <= 0.5 * km

    if not ok(0):
        raise ValueError("no admissible split angle on the theta0 grid")
    lo, hi = 0, len(grid) - 1
    if ok(hi):
        lo = hi
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            lo = mid
        else:
            hi = mid
    t0 = float(grid[lo])
    cut, _ = split(ang, t0)
    c3 = construct_estim3_constants(bounds, spec.p, spec.q, gamma, N, t0, cut, aquad)
    fc, _ = parts(t0)
    return Estim5Constants(t0, fc, c3, c3.C_plus, 0.5 * c3.K_minus)


def check_estim5(f: Distribution, spec: NormSpec, kernel, quad: QuadratureSpec = QuadratureSpec(), *,
                 bounds: L1Bounds | None = None, constants: Estim5Constants | None = None,
                 profiles: Profiles | None = None, g_index: int = 0, seed=None) -> InequalityReport:
    """Full-kernel D(f, f) against C+_c y - (K-_c/2) z after the absorption split."""
    ang = _ang(kernel)
    gamma = kernel.gamma
    N = f.grid.N
    _check_compat(ang, spec)
    bounds = bounds or L1Bounds.of(f, spec, gamma)
    const = constants or construct_estim5_constants(bounds, spec, kernel, N, quad)
    prof = profiles if profiles is not None else _profiles_for(f, [f], spec, gamma, quad)
    if const.theta0 not in set(prof.theta.breaks):
        raise ValueError("profiles must carry theta0 as a panel boundary")
    lhs = lyapunov_from_profiles(prof, ang, spec.p, spec.alpha, gamma, g_index, quad.rtol)
    rhs = estim3_rhs(f, spec, gamma, const.C_plus, const.K_minus)
    c = {"theta0": const.theta0, "fonc_remainder": const.fonc_remainder,
         "C_plus": const.C_plus, "K_minus": const.K_minus, "mu1": const.cutoff.mu1,
         "mu2": const.cutoff.mu2, "r": const.cutoff.r}
    return _report("estim5", lhs, rhs, constants=c, seed=seed)


# -- empirical exponent probe --------------------------------------------------------

@dataclass(frozen=True)
class EpsilonFit:
    epsilon: float
    C_plus: float
    K_minus: float
    residuals: tuple
    n_used: int
    degenerate: bool
    fitted: bool = True


def probe_estim4_epsilon(family, spec: NormSpec, kernel, theta0: float | None = None,
                         quad: QuadratureSpec = QuadratureSpec(),
                         bounds: L1Bounds | None = None) -> EpsilonFit:
    """Fit the tightest log-linear envelope D + K- z <= C+ y^{1-eps} over a family.

    K- comes from the cutoff-part construction with bounds covering the whole
    family; (log C+, 1 - eps) minimize the summed log slack of the envelope
    subject to dominating every member (a linear program).  Members with
    D + K- z <= 0 satisfy any envelope and are not used in the fit.
    """
    family = list(family)
    ang = _ang(kernel)
    gamma = kernel.gamma
    N = family[0].grid.N
    if theta0 is not None:
        ang, _ = split(ang, theta0)
    t0 = theta0 if theta0 is not None else max(ang.support[0], 1e-3)
    if bounds is None:
        bs = [L1Bounds.of(f, spec, gamma) for f in family]
        bounds = L1Bounds(min(b.mass_lower for b in bs), max(b.l1_gamma_upper for b in bs),
                          max(b.l1_top_upper for b in bs))
    K_minus = 0.5 * 2.0 ** -gamma * bounds.mass_lower * angular_mass(ang, N)
    y, e = [], []
    extra = (theta0,) if theta0 is not None else ()
    for f in family:
        prof = _profiles_for(f, [f], spec, gamma, quad, extra)
        d = lyapunov_from_profiles(prof, ang, spec.p, spec.alpha, gamma, 0, quad.rtol).value
        yi = weighted_lp_norm(f, spec) ** spec.p
        zi = weighted_lp_norm(f, NormSpec(spec.p, spec.q + gamma / spec.p)) ** spec.p
        y.append(yi)
        e.append(d + K_minus * zi)
    y, e = np.array(y), np.array(e)
    pos = e > 0
    if pos.sum() < 2 or np.ptp(np.log(y[pos])) < 1e-6:
        c = float(e.max()) if pos.any() else 0.0
        return EpsilonFit(0.0, c, K_minus, tuple(np.zeros(len(y))), int(pos.sum()), True)
    ly, le = np.log(y[pos]), np.log(e[pos])
    # variables (logC, s); minimize sum(logC + s ly - le) s.t. logC + s ly >= le, 0 <= s <= 1
    n = len(ly)
    res = linprog(c=[n, ly.sum()], A_ub=np.column_stack([-np.ones(n), -ly]), b_ub=-le,
                  bounds=[(None, None), (0.0, 1.0)], method="highs")
    if not res.success:
        raise RuntimeError(f"envelope fit failed: {res.message}")
    logc, s = res.x
    resid = logc + s * np.log(y) - np.where(pos, np.log(np.where(pos, e, 1.0)), -np.inf)
    resid = np.where(pos, resid, np.inf)
    return EpsilonFit(float(1.0 - s), float(np.exp(logc)), K_minus,
                      tuple(float(r) for r in resid), int(n), False)
