"""Maxwell molecules from a BKW profile: relative L2 error against the exact
self-similar solution along the run.

    python3 scripts/run_bkw.py --n 48 --R 6 --t-final 8
"""
import argparse
import time
from math import pi

import numpy as np

from lpboltz.collision import QuadratureSpec
from lpboltz.flow import FlowConfig, bkw_K, bkw_distribution, bkw_rate, simulate
from lpboltz.kernel import CollisionKernel, constant_kernel, symmetrize
from lpboltz.state import Distribution, VelocityGrid


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=48)
    ap.add_argument("--R", type=float, default=6.0)
    ap.add_argument("--K0", type=float, default=0.55)
    ap.add_argument("--dt", type=float, default=0.4)
    ap.add_argument("--t-final", type=float, default=8.0)
    ap.add_argument("--interp-order", type=int, default=3, choices=(1, 3))
    a = ap.parse_args()

    grid = VelocityGrid(2, a.n, a.R)
    kernel = symmetrize(CollisionKernel(0.0, constant_kernel(1 / (2 * pi), 2)))
    lam = bkw_rate(kernel)
    f0 = Distribution(grid, np.maximum(bkw_distribution(grid, a.K0), 0.0))
    cfg = FlowConfig(dt=a.dt, t_final=a.t_final, scheme="rk4", moments=(),
                     quad=QuadratureSpec(order=8, n_panels=1, interp_order=a.interp_order))
    print(f"lambda = {lam:.6g}, grid {a.n}^2, R = {a.R}")
    t0 = time.time()

    def report(t, f):
        ex = bkw_distribution(grid, bkw_K(t, a.K0, lam))
        err = np.sqrt(np.sum((f.values - ex) ** 2) / np.sum(ex ** 2))
        print(f"t = {t:5.2f}  K = {bkw_K(t, a.K0, lam):.4f}  rel L2 = {err:.3e}  "
              f"mass = {f.mass:.10f}  [{time.time() - t0:.0f} s]", flush=True)

    tr = simulate(f0, kernel, cfg, callback=report)
    print(f"max entropy increment per step: {np.diff(tr.entropy).max():.3e}")


if __name__ == "__main__":
    main()
