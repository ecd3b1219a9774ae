"""Command line: ``lpboltz simulate | check | collide``.

Exit codes: 0 pass, 1 a check failed, 2 usage or configuration error,
3 numerical non-convergence (diverging angular integral, unstable flow).
"""
from __future__ import annotations

import argparse
import dataclasses
import logging
import math
import sys
from pathlib import Path

import numpy as np

from .collision import eval_Q
from .config import SUITES, ConfigError, RunConfig, load_config, with_seed
from .flow import FlowError, StabilityError, check_apriori, longtime_bound, simulate
from .inequalities import CompatibilityError, _report, probe_estim4_epsilon
from .kernel import DivergenceError, KernelDomainError
from .snapshot import read_snapshot, write_snapshot
from .state import NormSpec

log = logging.getLogger("lpboltz")

EXIT_PASS, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


# -- deterministic JSON ---------------------------------------------------------------

def _json(obj) -> str:
    """JSON with every float written as %.17g; non-finite floats become strings."""
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isfinite(x):
            s = "%.17g" % x
            return s if any(c in s for c in ".en") else s + ".0"
        return '"nan"' if math.isnan(x) else ('"inf"' if x > 0 else '"-inf"')
    if isinstance(obj, str):
        import json
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{_json(str(k))}: {_json(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_json(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps_reports(reports) -> str:
    items = [r.to_dict() if hasattr(r, "to_dict") else r for r in reports]
    return "[\n" + ",\n".join("  " + _json(x) for x in items) + "\n]\n"


# -- suites -----------------------------------------------------------------------------

def _flow_setup(cfg: RunConfig, extra_norms=()):
    from .suites import initial_state

    grid = cfg.velocity_grid()
    f0 = initial_state(grid, cfg.initial)
    kernel = cfg.collision_kernel()
    fc = cfg.flow_config()
    norms = list(fc.norms)
    for nq in extra_norms:
        if nq not in norms:
            norms.append(nq)
    return f0, kernel, dataclasses.replace(fc, norms=tuple(norms))


def _suite_apriori(cfg: RunConfig, seed):
    from .suites import apriori_constants

    p, q = cfg.norms[0]
    spec = NormSpec(p, q)
    gamma = cfg.kernel.gamma
    rs = cfg.flow.bernoulli_r
    extra = [(p, q + gamma / p), (p, 0.0)] + [(p, r) for r in rs]
    f0, kernel, fc = _flow_setup(cfg, extra)
    traj = simulate(f0, kernel, fc, keep_states=True)
    sup_lp = float(np.max(traj.norm(p, 0.0)))
    c5, bern = apriori_constants(traj.states, spec, kernel, cfg.quad_spec(), rs,
                                 cfg.flow.bernoulli_exponent, sup_lp)
    return check_apriori(traj, spec, gamma, c5.C_plus, c5.K_minus, bernoulli=bern,
                         t_min=cfg.flow.bernoulli_t_min, seed=seed)


def _suite_probe(cfg: RunConfig, seed):
    from .suites import epsilon_family

    p, q = cfg.norms[0]
    spec = NormSpec(p, q)
    gamma = cfg.kernel.gamma
    f0, kernel, fc = _flow_setup(cfg, [(p, q + gamma / p)])
    traj = simulate(f0, kernel, fc, keep_states=True)
    t = np.asarray(traj.times)
    tau = cfg.flow.probe_tau
    i_tau = int(np.argmin(np.abs(t - tau)))
    later = traj.states[i_tau::max(1, cfg.flow.probe_stride)]
    fit = probe_estim4_epsilon(epsilon_family(traj.states[i_tau], extra=later), spec, kernel,
                               quad=cfg.quad_spec())
    y = traj.norm(p, q) ** p
    consts = {"tau": float(t[i_tau]), "epsilon": fit.epsilon, "C_plus": fit.C_plus,
              "K_minus": fit.K_minus, "n_used": fit.n_used, "degenerate": fit.degenerate}
    if fit.degenerate or fit.epsilon <= 0:
        return [_report("longtime", float(y[i_tau:].max()), math.inf, constants=consts,
                        seed=seed, fitted=True)]
    bound = longtime_bound(float(y[i_tau]), fit.C_plus, fit.K_minus, fit.epsilon)
    return [_report("longtime", float(y[i_tau:].max()), bound, constants=consts, seed=seed,
                    fitted=True)]


def run_suite(cfg: RunConfig, suite: str):
    from . import suites as S

    seed = cfg.ensemble.seed
    if suite in S.ENSEMBLE_CHECKS:
        e = cfg.ensemble
        grid = cfg.velocity_grid()
        members = S.make_ensemble(grid, e.size, e.seed, e.components, e.T_range, e.drift)
        m = e.matrix
        entries = S.matrix_entries(m.p, m.pq, m.gamma, m.nu)
        return S.run_ensemble_checks([suite], members, entries, cfg.quad_spec(), seed=seed)
    if suite == "lemma-sym":
        return S.lemma_scaling_reports(N=cfg.dimension, seed=seed or 0)
    if suite == "cv-identity":
        return S.cv_identity_reports()
    if suite == "apriori":
        return _suite_apriori(cfg, seed)
    return _suite_probe(cfg, seed)


# -- commands --------------------------------------------------------------------------

def _load(args) -> RunConfig:
    cfg = load_config(args.config)
    if getattr(args, "seed", None) is not None:
        cfg = with_seed(cfg, args.seed)
    return cfg


def cmd_simulate(args) -> int:
    cfg = _load(args)
    out = args.out or cfg.output.trajectory
    if not out:
        raise UsageError("no trajectory path: pass --out or set output.trajectory")
    f0, kernel, fc = _flow_setup(cfg)
    traj = simulate(f0, kernel, fc)
    traj.write_csv(out)
    log.info("wrote %d samples to %s", len(traj.times), out)
    return EXIT_PASS


def cmd_check(args) -> int:
    suite = args.suite
    if suite is not None and suite not in SUITES:
        raise UsageError(f"unknown suite {suite!r}; choose from {', '.join(SUITES)}")
    cfg = _load(args)
    suite = suite or cfg.suite
    if suite is None:
        raise UsageError("no suite: pass --suite or set suite in the config")
    if suite != cfg.suite:
        from .config import _validate
        _validate(dataclasses.replace(cfg, suite=suite))
    reports = run_suite(cfg, suite)
    text = dumps_reports(reports)
    out = args.out or cfg.output.report
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)
    n_fail = sum(not r.passed for r in reports)
    log.info("%s: %d reports, %d failed", suite, len(reports), n_fail)
    return EXIT_PASS if n_fail == 0 else EXIT_FAIL


def cmd_collide(args) -> int:
    cfg = _load(args)
    gf, f = read_snapshot(args.f)
    gg, g = read_snapshot(args.g)
    if gf != gg:
        raise UsageError(f"snapshots are on different grids: {gf} vs {gg}")
    from .state import Distribution

    res = eval_Q(Distribution(gg, g), Distribution(gf, f), cfg.collision_kernel(), cfg.quad_spec())
    out = Path(args.out or cfg.output.snapshot_dir or ".")
    out.mkdir(parents=True, exist_ok=True)
    fmt = cfg.output.snapshot_format
    ext = "bin" if fmt == "bin" else "csv"
    for name, vals in (("gain", res.gain), ("loss", res.loss), ("total", res.q_values)):
        write_snapshot(out / f"Q_{name}.{ext}", gf, vals, fmt)
    return EXIT_PASS


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lpboltz", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="run the flow and write a trajectory CSV")
    s.add_argument("--config", required=True)
    s.add_argument("--out")
    s.add_argument("--seed", type=int)
    s.set_defaults(func=cmd_simulate)

    c = sub.add_parser("check", help="run a named check suite and emit a JSON report array")
    c.add_argument("--config", required=True)
    c.add_argument("--suite")
    c.add_argument("--out")
    c.add_argument("--seed", type=int)
    c.set_defaults(func=cmd_check)

    q = sub.add_parser("collide", help="evaluate Q(g, f) on two snapshots")
    q.add_argument("--config", required=True)
    q.add_argument("f")
    q.add_argument("g")
    q.add_argument("--out", help="output directory")
    q.add_argument("--seed", type=int)
    q.set_defaults(func=cmd_collide)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_PASS
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, ConfigError, CompatibilityError, KernelDomainError,
            FileNotFoundError) as exc:
        print(f"lpboltz: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DivergenceError, FlowError, StabilityError, OverflowError) as exc:
        print(f"lpboltz: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"lpboltz: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
