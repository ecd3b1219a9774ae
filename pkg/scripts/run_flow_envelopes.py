"""Bimodal hard-sphere flow: entropy, Gronwall and Bernoulli envelopes on
[0, 2], then the fitted long-time bound up to t_final.

    python3 scripts/run_flow_envelopes.py --t-final 10 --csv bimodal.csv
"""
import argparse
from math import pi

import numpy as np

from lpboltz.collision import QuadratureSpec
from lpboltz.flow import (FlowConfig, check_apriori, longtime_bound, simulate,
                          small_time_exponent)
from lpboltz.inequalities import probe_estim4_epsilon
from lpboltz.kernel import CollisionKernel, constant_kernel, symmetrize
from lpboltz.state import NormSpec, VelocityGrid, mixture
from lpboltz.suites import apriori_constants, epsilon_family

BIMODAL = [(0.5, [1.5, 0.0], 0.6), (0.5, [-1.5, 0.3], 0.8)]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=32)
    ap.add_argument("--R", type=float, default=6.0)
    ap.add_argument("--dt", type=float, default=0.1)
    ap.add_argument("--t-final", type=float, default=10.0)
    ap.add_argument("--csv")
    a = ap.parse_args()

    grid = VelocityGrid(2, a.n, a.R)
    kernel = symmetrize(CollisionKernel(1.0, constant_kernel(1 / (8 * pi), 2)))
    quad = QuadratureSpec(order=8, n_panels=1, interp_order=3)
    cfg = FlowConfig(dt=a.dt, t_final=a.t_final, quad=quad,
                     norms=((2.0, 1.0), (2.0, 1.5), (2.0, 0.0), (2.0, 2.0), (2.0, 3.0)))
    tr = simulate(mixture(BIMODAL, grid), kernel, cfg, keep_states=True)
    if a.csv:
        tr.write_csv(a.csv)
    t = np.asarray(tr.times)
    print(f"max entropy increment: {np.diff(tr.entropy).max():.3e}")

    spec = NormSpec(2.0, 1.0)
    early = [f for f, s in zip(tr.states, t) if s <= 2.0 + 1e-9]
    c5, bern = apriori_constants(early, spec, kernel, quad)
    print(f"estim5: theta0 = {c5.theta0:.4g}, C+ = {c5.C_plus:.4g}, K- = {c5.K_minus:.4g}")
    for r, (C, K) in bern.items():
        print(f"r = {r:g}: C = {C:.4g}, K_T = {K:.4g}, "
              f"small-t exponent {small_time_exponent(C, K, 2.0, r, 1.0):.4f}")
    from lpboltz.flow import Trajectory
    sub = Trajectory()
    for i, s in enumerate(t):
        if s <= 2.0 + 1e-9:
            sub.record(s, tr.states[i], cfg.norms, ())
    for rep in check_apriori(sub, spec, 1.0, c5.C_plus, c5.K_minus, bernoulli=bern):
        print(f"{rep.name:22s} pass={rep.passed} lhs={rep.lhs:.4g} rhs={rep.rhs:.4g}")

    i_tau = int(np.argmin(np.abs(t - 0.5)))
    fit = probe_estim4_epsilon(epsilon_family(tr.states[i_tau], extra=tr.states[i_tau::10]),
                               spec, kernel, quad=quad)
    y = tr.norm(2.0, 1.0) ** 2
    bound = longtime_bound(y[i_tau], fit.C_plus, fit.K_minus, fit.epsilon)
    print(f"fitted eps = {fit.epsilon:.4g}, C+ = {fit.C_plus:.4g}, K- = {fit.K_minus:.4g}; "
          f"max y(t >= 0.5) = {y[i_tau:].max():.6g} <= bound {bound:.6g}: {y[i_tau:].max() <= bound}")


if __name__ == "__main__":
    main()
