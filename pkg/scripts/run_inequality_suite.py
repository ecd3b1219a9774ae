"""Run the four ensemble checks over the (p, pq, gamma, nu) matrix and
summarize margins per check.

    python3 scripts/run_inequality_suite.py --size 50 --seed 20261016 --out reports.json
"""
import argparse
import time
from collections import defaultdict

from lpboltz.cli import dumps_reports
from lpboltz.collision import QuadratureSpec
from lpboltz.state import VelocityGrid
from lpboltz.suites import ENSEMBLE_CHECKS, make_ensemble, matrix_entries, run_ensemble_checks


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=50)
    ap.add_argument("--seed", type=int, default=20261016)
    ap.add_argument("--n", type=int, default=32)
    ap.add_argument("--R", type=float, default=8.0)
    ap.add_argument("--out")
    a = ap.parse_args()

    grid = VelocityGrid(2, a.n, a.R)
    members = make_ensemble(grid, a.size, a.seed)
    quad = QuadratureSpec(order=4, interp_order=3)
    t0 = time.time()
    reports = run_ensemble_checks(ENSEMBLE_CHECKS, members, matrix_entries(), quad, seed=a.seed,
                                  progress=lambda i, f: print(f"member {i} done [{time.time() - t0:.0f} s]",
                                                              flush=True))
    by = defaultdict(list)
    for r in reports:
        by[r.name.split("[")[0]].append(r)
    for name, rs in by.items():
        worst = min(rs, key=lambda r: r.margin / max(abs(r.rhs), 1e-300))
        print(f"{name:8s} {sum(r.passed for r in rs)}/{len(rs)} pass; "
              f"tightest {worst.name}: lhs {worst.lhs:.4g} rhs {worst.rhs:.4g}")
    if a.out:
        with open(a.out, "w") as fh:
            fh.write(dumps_reports(reports))


if __name__ == "__main__":
    main()
