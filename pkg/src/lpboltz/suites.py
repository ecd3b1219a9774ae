"""Named check suites shared by the CLI, the experiment scripts and the tests."""
from __future__ import annotations

from dataclasses import dataclass
from math import pi

import numpy as np

from .collision import QuadratureSpec, compute_profiles, profile_rule, r_alpha
from .geometry import CVQuadrature, verify_cv_identity
from .inequalities import (CompatibilityError, InequalityReport, L1Bounds, _report,
                           check_estim1, check_estim3, check_estim5, check_fonc,
                           construct_estim3_constants, construct_estim5_constants,
                           construct_fonc_constant, probe_estim4_epsilon)
from .kernel import CollisionKernel, constant_kernel, singular_kernel, split, symmetrize
from .state import (Distribution, NormSpec, VelocityGrid, dilate, maxwellian, mixture,
                    random_mixture)

ENSEMBLE_CHECKS = ("estim1", "fonc", "estim3", "estim5")
ESTIM3_THETA0 = pi / 6


@dataclass(frozen=True)
class MatrixEntry:
    p: float
    pq: float
    gamma: float
    nu: float | None       # None: bounded (constant) angular kernel

    @property
    def spec(self) -> NormSpec:
        return NormSpec(self.p, self.pq / self.p)

    def kernel(self, N: int):
        ang = constant_kernel(1.0, N) if self.nu is None else singular_kernel(1.0, self.nu, N)
        return symmetrize(CollisionKernel(self.gamma, ang))

    def label(self) -> str:
        nu = "cutoff" if self.nu is None else f"{self.nu:g}"
        return f"p={self.p:g},q={self.pq / self.p:.6g},gamma={self.gamma:g},nu={nu}"


def compatible(pq: float, nu: float | None) -> bool:
    if nu is None or nu > -1:
        return True
    if nu > -2:
        return pq >= 2
    return pq >= 4


def matrix_entries(p=(1.5, 2.0), pq=(2.0, 4.0), gamma=(0.0, 1.0), nu=(None, -1.5, -2.5)):
    return [MatrixEntry(float(a), float(b), float(c), None if d is None else float(d))
            for a in p for b in pq for c in gamma for d in nu if compatible(b, d)]


def make_ensemble(grid: VelocityGrid, size: int, seed: int, components=(1, 3),
                  T_range=(0.5, 1.5), drift=1.5) -> list[Distribution]:
    rng = np.random.default_rng(seed)
    return [random_mixture(grid, rng, n_components=tuple(components), T_range=tuple(T_range),
                           drift=drift)[0] for _ in range(size)]


def run_ensemble_checks(names, members, entries, quad: QuadratureSpec, seed=None,
                        progress=None) -> list[InequalityReport]:
    """Run the requested ensemble checks; one profile pass per member.

    estim1 and fonc use the next member (cyclically) as g; estim3 uses the
    cut part on [pi/6, pi/2] of each kernel; estim5 splits at the largest
    admissible breakpoint of the graded rule.
    """
    names = [n for n in names if n in ENSEMBLE_CHECKS]
    N = members[0].grid.N
    combos = sorted({(e.p, e.pq / 2) for e in entries})
    gammas = sorted({e.gamma for e in entries})
    rule = profile_rule(N, quad, (ESTIM3_THETA0,))
    fonc_cache = {}
    reports = []
    for i, f in enumerate(members):
        g = members[(i + 1) % len(members)]
        prof = compute_profiles(f, [f, g], combos, gammas, quad, rule)
        for e in entries:
            spec, ker = e.spec, e.kernel(N)
            tag = f"[{e.label()},member={i}]"
            for name in names:
                if name == "estim1":
                    r = check_estim1(f, g, spec, ker, quad, profiles=prof, g_index=1, seed=seed)
                elif name == "fonc":
                    key = (e.p, e.pq, e.gamma, e.nu)
                    if key not in fonc_cache:
                        fonc_cache[key] = construct_fonc_constant(e.p, N, e.gamma, spec.alpha, ker)
                    r = check_fonc(f, g, spec, ker, quad, profiles=prof, g_index=1,
                                   constant=fonc_cache[key], seed=seed)
                elif name == "estim3":
                    cut, _ = split(ker.angular, ESTIM3_THETA0)
                    b = L1Bounds.of(f, spec, e.gamma)
                    c3 = construct_estim3_constants(b, e.p, spec.q, e.gamma, N, ESTIM3_THETA0, cut)
                    r = check_estim3(f, spec, ker.with_angular(cut), c3, b, quad, profiles=prof,
                                     seed=seed)
                else:
                    r = check_estim5(f, spec, ker, quad, profiles=prof, seed=seed)
                r.name = r.name + tag
                reports.append(r)
        if progress is not None:
            progress(i, f)
    return reports


# -- lemma on the symmetric u-average ------------------------------------------------

def lemma_scaling_reports(N: int = 3, n_pairs: int = 1000, seed: int = 0,
                          theta_min: float = 1e-4, n_theta: int = 41) -> list[InequalityReport]:
    """R_alpha(0) = 0 and boundedness of the normalized ratio as theta -> 0.

    For alpha = 1 the ratio uses sin(theta/2), for alpha = 2 sin^2(theta/2).
    "Bounded" means the log-log slope of the sample sup over the lowest two
    decades of theta is not negative beyond -0.05 (no growth toward 0).
    """
    rng = np.random.default_rng(seed)
    mags = 10.0 ** rng.uniform(-2, 2, size=(n_pairs, 2))
    dirs = rng.normal(size=(n_pairs, 2, N))
    dirs /= np.linalg.norm(dirs, axis=2, keepdims=True)
    thetas = np.geomspace(theta_min, pi / 2, n_theta)
    xs = np.sin(thetas / 2)
    reports = []
    for alpha, power in ((1.0, 1), (2.0, 2)):
        sup = np.zeros(n_theta)
        zero = 0.0
        for k in range(n_pairs):
            v, vs = mags[k, 0] * dirs[k, 0], mags[k, 1] * dirs[k, 1]
            norm = (1 + v @ v) ** alpha * (1 + vs @ vs) ** alpha
            vals = np.abs(r_alpha(xs, v, vs, alpha, N)) / (xs ** power * norm)
            sup = np.maximum(sup, vals)
            zero = max(zero, abs(r_alpha(0.0, v, vs, alpha, N)))
        low = thetas <= 1e-2
        slope = float(np.polyfit(np.log(thetas[low]), np.log(sup[low]), 1)[0])
        reports.append(_report(f"lemma_R{alpha:g}_at_zero", zero, 1e-12,
                               constants={"alpha": alpha}, seed=seed))
        reports.append(_report(f"lemma_R{alpha:g}_no_growth", -slope, 0.05,
                               constants={"alpha": alpha, "sin_power": power, "slope": slope,
                                          "sup_ratio": float(sup.max()),
                                          "sup_ratio_small_theta": float(sup[low].max())},
                               seed=seed))
    return reports


# -- change of variables --------------------------------------------------------------

def gaussian_field(centre, T: float = 1.0):
    centre = np.asarray(centre, dtype=float)

    def F(v):
        return np.exp(-np.sum((v - centre) ** 2, axis=1) / (2 * T)) / (2 * pi * T) ** (len(centre) / 2)

    return F


CV_LEVELS = ((16, 4), (32, 8), (64, 16))


def cv_identity_reports(kernel=None, R: float = 10.0, levels=CV_LEVELS,
                        v_star=(0.37, -0.21)) -> list[InequalityReport]:
    """Residual at each (n, theta nodes) level for an offset Gaussian, N = 2."""
    kernel = kernel or symmetrize(CollisionKernel(0.0, constant_kernel(1.0, 2)))
    F = gaussian_field([0.5, -0.3])
    res = []
    reports = []
    for n, nt in levels:
        r = verify_cv_identity(F, kernel, CVQuadrature(n=n, R=R, n_theta=nt), v_star=v_star)
        res.append(r)
        reports.append(_report(f"cv_identity[n={n},sigma_nodes={2 * nt}]", r, 1e-2,
                               constants={"n": n, "theta_nodes": nt, "R": R}))
    decreasing = all(b <= a for a, b in zip(res, res[1:]))
    reports.append(_report("cv_identity_refinement", 0.0 if decreasing else 1.0, 0.0,
                           constants={"residuals": res}))
    return reports


# -- flow-based suites ------------------------------------------------------------------

def initial_state(grid: VelocityGrid, init) -> Distribution:
    from .flow import bkw_distribution

    if init.type == "maxwellian":
        u = init.u if len(init.u) else None
        return maxwellian(grid, init.rho, u, init.T)
    if init.type == "mixture":
        return mixture([(c[0], c[1], c[2]) for c in init.components], grid)
    return Distribution(grid, np.maximum(bkw_distribution(grid, init.K0), 0.0))


def trajectory_bounds(states, spec: NormSpec, gamma: float) -> L1Bounds:
    bs = [L1Bounds.of(f, spec, gamma) for f in states]
    return L1Bounds(min(b.mass_lower for b in bs), max(b.l1_gamma_upper for b in bs),
                    max(b.l1_top_upper for b in bs))


def apriori_constants(states, spec: NormSpec, kernel, quad: QuadratureSpec, rs=(2.0, 3.0),
                      bernoulli_exponent=None, sup_lp=None):
    """(C+, K-) for the trajectory norm and Bernoulli (C_r, K_T) pairs per r."""
    from .flow import bernoulli_K_T
    from .state import weighted_lp_norm

    N = states[0].grid.N
    gamma = kernel.gamma
    c5 = construct_estim5_constants(trajectory_bounds(states, spec, gamma), spec, kernel, N, quad)
    bern = {}
    if gamma > 0:
        sup = sup_lp if sup_lp is not None else max(weighted_lp_norm(f, NormSpec(spec.p, 0.0))
                                                    for f in states)
        for r in rs:
            sr = NormSpec(spec.p, r)
            cr = construct_estim5_constants(trajectory_bounds(states, sr, gamma), sr, kernel, N, quad)
            bern[r] = (spec.p * cr.C_plus,
                       bernoulli_K_T(cr.K_minus, sup, spec.p, r, spec.q, gamma, bernoulli_exponent))
    return c5, bern


def epsilon_family(f_tau: Distribution, n: int = 6, lam_max: float = 2.0, extra=()) -> list:
    """Mass-preserving concentrations of f_tau plus the Maxwellian with its moments."""
    m = f_tau.mass
    u = f_tau.momentum / m
    M = maxwellian(f_tau.grid, m, u, f_tau.temperature)
    fam = [dilate(f_tau, lam) for lam in np.geomspace(1.0, lam_max, n)]
    return fam + [M] + list(extra)
