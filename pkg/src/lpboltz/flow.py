"""Explicit time integration of df/dt = Q(f, f) with norm diagnostics and
the Gronwall, Bernoulli and long-time envelopes.
"""
from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from math import pi

import numpy as np
from scipy.ndimage import gaussian_filter

from .collision import QuadratureSpec, eval_Q
from .inequalities import InequalityReport, _report
from .kernel import angular_mass, angular_integral
from .state import Distribution, NormSpec, VelocityGrid, entropy, l1_moment, weighted_lp_norm

log = logging.getLogger(__name__)

SCHEMES = ("euler", "rk4")


class StabilityError(ArithmeticError):
    """The sup norm grew by more than the allowed factor within one step."""


@dataclass(frozen=True)
class FlowConfig:
    dt: float = 0.05
    t_final: float = 1.0
    scheme: str = "rk4"
    eps_reg: float = 0.0
    mollify: float = 0.0
    clip_negative: bool = True
    renormalize_mass: bool = False
    sample_every: int = 1
    norms: tuple = ((2.0, 1.0),)
    moments: tuple = (2.0, 4.0)
    quad: QuadratureSpec = field(default_factory=QuadratureSpec)
    max_growth: float = 10.0
    enforce_stability: bool = True

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.eps_reg < 0 or self.mollify < 0:
            raise ValueError("eps_reg and mollify must be nonnegative")
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}")
        if self.sample_every < 1:
            raise ValueError("sample_every must be >= 1")


def norm_label(p: float, q: float) -> str:
    return f"lp_norm_p{p:g}_q{q:g}"


def moment_label(s: float) -> str:
    return f"l1_moment_s{s:g}"


@dataclass
class Trajectory:
    times: list = field(default_factory=list)
    mass: list = field(default_factory=list)
    momentum: list = field(default_factory=list)
    energy: list = field(default_factory=list)
    entropy: list = field(default_factory=list)
    norms: dict = field(default_factory=dict)
    moments: dict = field(default_factory=dict)
    clipped: list = field(default_factory=list)
    states: list = field(default_factory=list)

    def record(self, t: float, f: Distribution, norms, moments, clipped: float = 0.0, keep: bool = False):
        if self.times and t <= self.times[-1]:
            raise ValueError("trajectory times must be strictly increasing")
        self.times.append(float(t))
        self.mass.append(f.mass)
        self.momentum.append(np.asarray(f.momentum, dtype=float))
        self.energy.append(f.energy)
        self.entropy.append(entropy(f))
        for p, q in norms:
            self.norms.setdefault(norm_label(p, q), []).append(weighted_lp_norm(f, NormSpec(p, q)))
        for s in moments:
            self.moments.setdefault(moment_label(s), []).append(l1_moment(f, s))
        self.clipped.append(float(clipped))
        if keep:
            self.states.append(f)

    def norm(self, p: float, q: float) -> np.ndarray:
        if q == 0:
            key = norm_label(p, 0.0)
        else:
            key = norm_label(p, q)
        return np.asarray(self.norms[key])

    def columns(self) -> dict:
        mom = np.asarray(self.momentum)
        cols = {"t": self.times, "mass": self.mass}
        for d in range(mom.shape[1]):
            cols[f"momentum_{'xyz'[d]}"] = mom[:, d]
        cols["energy"] = self.energy
        cols["entropy"] = self.entropy
        cols.update(self.norms)
        cols.update(self.moments)
        return {k: np.asarray(v, dtype=float) for k, v in cols.items()}

    def write_csv(self, path):
        cols = self.columns()
        names = list(cols)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(names)
            for i in range(len(self.times)):
                w.writerow([repr(float(cols[n][i])) for n in names])


# -- time stepping -------------------------------------------------------------

def loss_rate_bound(f: Distribution, kernel) -> float:
    """||f||_{L^1_gamma} * max <v>^gamma over the grid * angular mass."""
    g = kernel.gamma
    return l1_moment(f, g) * float(f.grid.bracket(g).max()) * angular_mass(kernel.angular, kernel.dim)


def stable_dt(f: Distribution, kernel) -> float:
    rate = loss_rate_bound(f, kernel)
    return np.inf if rate == 0 else 0.5 / rate


def laplacian(values: np.ndarray, h: float) -> np.ndarray:
    """Second-order centred Laplacian with zero values outside the box."""
    padded = np.pad(values, 1)
    out = -2.0 * values.ndim * values
    for ax in range(values.ndim):
        sl_lo = [slice(1, -1)] * values.ndim
        sl_hi = [slice(1, -1)] * values.ndim
        sl_lo[ax] = slice(0, -2)
        sl_hi[ax] = slice(2, None)
        out = out + padded[tuple(sl_lo)] + padded[tuple(sl_hi)]
    return out / h ** 2


def mollify(f: Distribution, width: float) -> Distribution:
    """Gaussian convolution of standard deviation ``width`` (velocity units)."""
    if width == 0:
        return f
    vals = gaussian_filter(f.values, sigma=width / f.grid.h, mode="constant", truncate=6.0)
    return Distribution(f.grid, np.maximum(vals, 0.0))


def _rhs(values: np.ndarray, grid: VelocityGrid, kernel, cfg: FlowConfig) -> np.ndarray:
    f = Distribution(grid, np.maximum(values, 0.0))
    out = eval_Q(f, f, kernel, cfg.quad).q_values
    if cfg.eps_reg > 0:
        out = out + cfg.eps_reg * laplacian(values, grid.h)
    return out


def step(f: Distribution, dt: float, kernel, config: FlowConfig) -> tuple[Distribution, float]:
    """One explicit step; returns (new state, clipped negative mass)."""
    if dt == 0:
        return f, 0.0
    if kernel.angular.singular:
        raise ValueError("time integration needs an integrable (cutoff) angular kernel")
    grid = f.grid
    y = f.values
    if config.enforce_stability:
        limit = stable_dt(f, kernel)
        if dt > limit * (1 + 1e-12):
            raise StabilityError(f"dt = {dt:g} exceeds the loss-term stability bound {limit:g}")
    if config.scheme == "euler":
        new = y + dt * _rhs(y, grid, kernel, config)
    else:
        k1 = _rhs(y, grid, kernel, config)
        k2 = _rhs(y + 0.5 * dt * k1, grid, kernel, config)
        k3 = _rhs(y + 0.5 * dt * k2, grid, kernel, config)
        k4 = _rhs(y + dt * k3, grid, kernel, config)
        new = y + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    if not np.all(np.isfinite(new)) or np.abs(new).max() > config.max_growth * y.max():
        raise StabilityError("sup norm grew by more than the allowed factor in one step")
    clipped = 0.0
    if config.clip_negative:
        neg = new < 0
        clipped = float(-new[neg].sum() * grid.cell_volume)
        if clipped > 0:
            log.debug("clipped negative mass %.3g", clipped)
        new = np.where(neg, 0.0, new)
    elif np.any(new < 0):
        raise StabilityError("negative values produced with clipping disabled")
    out = Distribution(grid, new)
    if config.renormalize_mass and out.mass > 0:
        out = out.scaled(f.mass / out.mass)
    return out, clipped


class FlowError(RuntimeError):
    def __init__(self, t: float, cause: Exception):
        super().__init__(f"flow failed at t = {t:g}: {cause}")
        self.t = t
        self.cause = cause


def simulate(f0: Distribution, kernel, config: FlowConfig, keep_states: bool = False,
             callback=None) -> Trajectory:
    """Advance to t_final, sampling diagnostics every ``sample_every`` steps."""
    f = mollify(f0, config.mollify)
    traj = Trajectory()
    traj.record(0.0, f, config.norms, config.moments, 0.0, keep_states)
    n_steps = int(round(config.t_final / config.dt))
    clipped = 0.0
    for k in range(1, n_steps + 1):
        try:
            f, c = step(f, config.dt, kernel, config)
        except (StabilityError, ArithmeticError, ValueError) as exc:
            raise FlowError((k - 1) * config.dt, exc) from exc
        clipped += c
        if k % config.sample_every == 0 or k == n_steps:
            traj.record(k * config.dt, f, config.norms, config.moments, clipped, keep_states)
            clipped = 0.0
            if callback is not None:
                callback(k * config.dt, f)
    return traj


# -- envelopes -------------------------------------------------------------------

def gronwall_envelope(y0: float, C: float, t):
    if C < 0:
        raise ValueError("C must be nonnegative")
    return y0 * np.exp(C * np.asarray(t, dtype=float))


def log_bernoulli_envelope(t, C: float, K_T: float, p: float, r: float, gamma: float):
    """Natural log of :func:`bernoulli_envelope` (safe for huge constants)."""
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise ValueError("the moment-appearance envelope needs t > 0")
    if not (gamma > 0 and C > 0 and K_T > 0):
        raise ValueError("needs gamma > 0, C > 0 and K_T > 0")
    a = C * gamma / (p * r)
    return (r / gamma) * (np.log(C) - np.log(K_T) - np.log(-np.expm1(-a * t)))


def bernoulli_envelope(t, C: float, K_T: float, p: float, r: float, gamma: float):
    """[C / (K_T (1 - exp(-C gamma t/(p r))))]^{r/gamma}."""
    return np.exp(log_bernoulli_envelope(t, C, K_T, p, r, gamma))


def bernoulli_K_T(K_minus: float, sup_lp: float, p: float, r: float, q: float, gamma: float,
                  exponent: float | None = None) -> float:
    """K_T = p K- (sup_t ||f||_{L^p})^exponent, exponent defaulting to -gamma/(r q)."""
    e = -gamma / (r * q) if exponent is None else exponent
    return p * K_minus * sup_lp ** e


def longtime_bound(y_tau: float, C_plus: float, K_minus: float, epsilon: float) -> float:
    if not 0 < epsilon <= 1:
        raise ValueError("epsilon must lie in (0, 1]")
    if C_plus <= 0 or K_minus <= 0:
        raise ValueError("constants must be positive")
    return max(y_tau, (C_plus / K_minus) ** (1.0 / epsilon))


def check_apriori(traj: Trajectory, spec: NormSpec, gamma: float, C_plus: float, K_minus: float,
                  *, bernoulli: dict | None = None, t_min: float = 0.1, rtol: float = 1e-6,
                  seed=None) -> list[InequalityReport]:
    """Differential inequality, Gronwall dominance and (gamma > 0) Bernoulli dominance.

    ``bernoulli`` maps r to (C_r, K_T) for the moment-appearance envelope.
    Each report carries the first violating sample time (or None).
    """
    t = np.asarray(traj.times)
    y = traj.norm(spec.p, spec.q) ** spec.p
    z = traj.norm(spec.p, spec.q + gamma / spec.p) ** spec.p
    C, K = spec.p * C_plus, spec.p * K_minus
    reports = []

    dy = np.diff(y) / np.diff(t)
    bound = C * np.maximum(y[:-1], y[1:]) - K * np.minimum(z[:-1], z[1:])
    tol = rtol * np.maximum(np.abs(dy), np.abs(bound)) + rtol
    viol = np.nonzero(dy > bound + tol)[0]
    first = float(t[viol[0]]) if viol.size else None
    worst = int(np.argmax(dy - bound))
    reports.append(_report("apriori_differential", float(dy[worst]), float(bound[worst]),
                           constants={"C": C, "K": K, "first_violation": first}, seed=seed))

    logenv = np.log(y[0]) + C * t
    lg = np.log(np.maximum(y, 1e-300))
    gap = logenv - lg
    viol = np.nonzero(gap < -rtol)[0]
    worst = int(np.argmin(gap))
    reports.append(_report("gronwall", float(lg[worst]), float(logenv[worst]),
                           constants={"C": C, "log_space": True,
                                      "first_violation": float(t[viol[0]]) if viol.size else None},
                           seed=seed))
    if gamma > 0 and bernoulli:
        mask = t >= t_min
        for r, (Cr, KT) in sorted(bernoulli.items()):
            nr = traj.norm(spec.p, r)[mask]
            env = log_bernoulli_envelope(t[mask], Cr, KT, spec.p, r, gamma)
            gap = env - np.log(nr)
            worst = int(np.argmin(gap))
            viol = np.nonzero(gap < -rtol)[0]
            reports.append(_report(f"bernoulli_r{r:g}", float(np.log(nr[worst])), float(env[worst]),
                                   constants={"C": Cr, "K_T": KT, "log_space": True,
                                              "first_violation": float(t[mask][viol[0]]) if viol.size else None},
                                   seed=seed))
    return reports


def small_time_exponent(C: float, K_T: float, p: float, r: float, gamma: float,
                        window=(1e-4, 1e-2), n: int = 50) -> float:
    """Log-log slope of the Bernoulli envelope over t = tau_c * window, tau_c = p r/(C gamma)."""
    tau = p * r / (C * gamma)
    t = tau * np.geomspace(window[0], window[1], n)
    slope, _ = np.polyfit(np.log(t), log_bernoulli_envelope(t, C, K_T, p, r, gamma), 1)
    return float(slope)


# -- BKW self-similar solution (Maxwell molecules) -------------------------------

def bkw_rate(kernel, rho: float = 1.0) -> float:
    """Relaxation rate lambda = rho/4 * integral of b sin^2(theta) over the sphere."""
    if kernel.gamma != 0:
        raise ValueError("the BKW solution needs gamma = 0")
    return 0.25 * rho * angular_integral(kernel.angular, lambda t: np.sin(t) ** 2, kernel.dim)


def bkw_K(t, K0: float, lam: float):
    return 1.0 - (1.0 - K0) * np.exp(-lam * np.asarray(t, dtype=float))


def bkw_distribution(grid: VelocityGrid, K: float) -> np.ndarray:
    """Unit-mass, unit-temperature BKW profile at shape parameter K (may be negative)."""
    N = grid.N
    v2 = grid.speed2
    poly = ((N + 2) * K - N) / (2 * K) + (1 - K) / (2 * K * K) * v2
    return (2 * pi * K) ** (-N / 2) * np.exp(-v2 / (2 * K)) * poly


def bkw_nonnegative(K: float, N: int) -> bool:
    return K >= N / (N + 2)
