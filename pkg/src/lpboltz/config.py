"""Run configuration: YAML tree loaded into nested dataclasses.

Unknown keys are errors.  Cross-field validity (pq versus nu, cutoff-only
flows, mandatory ensemble seed) is checked at load time.
"""
from __future__ import annotations

import dataclasses
import typing
from dataclasses import dataclass, field
from math import pi
from pathlib import Path

import yaml

from .collision import QuadratureSpec
from .flow import FlowConfig
from .kernel import (AngularKernel, CollisionKernel, constant_kernel, singular_kernel, split,
                     symmetrize, table_kernel)
from .state import VelocityGrid

SUITES = ("estim1", "fonc", "estim3", "estim5", "lemma-sym", "cv-identity", "apriori", "probe-eps")


class ConfigError(ValueError):
    """Invalid or inconsistent run configuration."""


@dataclass(frozen=True)
class GridConfig:
    n: int = 32
    R: float = 8.0


@dataclass(frozen=True)
class AngularConfig:
    type: str = "constant"
    c: float = 1.0
    strength: float = 1.0
    nu: float = -1.5
    theta0: float | None = None
    table_y: tuple = ()
    table_b: tuple = ()


@dataclass(frozen=True)
class KernelConfig:
    gamma: float = 1.0
    angular: AngularConfig = field(default_factory=AngularConfig)


@dataclass(frozen=True)
class QuadratureConfig:
    order: int = 8
    n_panels: int = 2
    M_u: int = 16
    interp_order: int = 3
    theta_min: float = 1e-4
    ratio: float = 2.0
    rel_skip: float = 1e-14


@dataclass(frozen=True)
class FlowBlock:
    dt: float = 0.05
    t_final: float = 1.0
    scheme: str = "rk4"
    eps_reg: float = 0.0
    mollify: float = 0.0
    clip_negative: bool = True
    renormalize_mass: bool = False
    sample_every: int = 1
    bernoulli_exponent: float | None = None
    bernoulli_r: tuple = (2.0, 3.0)
    bernoulli_t_min: float = 0.1
    probe_tau: float = 0.5
    probe_stride: int = 10


@dataclass(frozen=True)
class InitialConfig:
    type: str = "maxwellian"          # maxwellian | mixture | bkw
    rho: float = 1.0
    u: tuple = ()
    T: float = 1.0
    components: tuple = ()            # ((rho, (u...), T), ...)
    K0: float = 0.55


@dataclass(frozen=True)
class MatrixConfig:
    p: tuple = (1.5, 2.0)
    pq: tuple = (2.0, 4.0)
    gamma: tuple = (0.0, 1.0)
    nu: tuple = (None, -1.5, -2.5)


@dataclass(frozen=True)
class EnsembleConfig:
    size: int = 50
    seed: int | None = None
    components: tuple = (1, 3)
    T_range: tuple = (0.5, 1.5)
    drift: float = 1.5
    matrix: MatrixConfig = field(default_factory=MatrixConfig)


@dataclass(frozen=True)
class OutputConfig:
    trajectory: str | None = None
    report: str | None = None
    snapshot_dir: str | None = None
    snapshot_format: str = "csv"


@dataclass(frozen=True)
class RunConfig:
    dimension: int = 2
    grid: GridConfig = field(default_factory=GridConfig)
    kernel: KernelConfig = field(default_factory=KernelConfig)
    norms: tuple = ((2.0, 1.0),)
    moments: tuple = (2.0, 4.0)
    quadrature: QuadratureConfig = field(default_factory=QuadratureConfig)
    flow: FlowBlock = field(default_factory=FlowBlock)
    initial: InitialConfig = field(default_factory=InitialConfig)
    suite: str | None = None
    ensemble: EnsembleConfig = field(default_factory=EnsembleConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    # -- derived objects --------------------------------------------------
    def velocity_grid(self) -> VelocityGrid:
        return VelocityGrid(self.dimension, self.grid.n, self.grid.R)

    def quad_spec(self) -> QuadratureSpec:
        return QuadratureSpec(**dataclasses.asdict(self.quadrature))

    def angular_kernel(self) -> AngularKernel:
        a = self.kernel.angular
        if a.type == "constant":
            return constant_kernel(a.c, self.dimension)
        if a.type == "table":
            return table_kernel(a.table_y, a.table_b, self.dimension)
        return singular_kernel(a.strength, a.nu, self.dimension)

    def collision_kernel(self):
        """Symmetrized kernel, cut at angular.theta0 when that is set."""
        ker = symmetrize(CollisionKernel(self.kernel.gamma, self.angular_kernel()))
        t0 = self.kernel.angular.theta0
        if t0 is not None:
            ker = ker.with_angular(split(ker.angular, t0)[0])
        return ker

    def flow_config(self) -> FlowConfig:
        fb = self.flow
        return FlowConfig(dt=fb.dt, t_final=fb.t_final, scheme=fb.scheme, eps_reg=fb.eps_reg,
                          mollify=fb.mollify, clip_negative=fb.clip_negative,
                          renormalize_mass=fb.renormalize_mass, sample_every=fb.sample_every,
                          norms=tuple(tuple(map(float, x)) for x in self.norms),
                          moments=tuple(map(float, self.moments)), quad=self.quad_spec())


# -- strict loading ------------------------------------------------------------------

def _convert(tp, value, where: str):
    origin = typing.get_origin(tp)
    if dataclasses.is_dataclass(tp):
        if not isinstance(value, dict):
            raise ConfigError(f"{where}: expected a mapping")
        return _build(tp, value, where)
    if origin is typing.Union:
        args = [a for a in typing.get_args(tp) if a is not type(None)]
        if value is None:
            return None
        return _convert(args[0], value, where)
    if tp is tuple or origin is tuple:
        if not isinstance(value, (list, tuple)):
            raise ConfigError(f"{where}: expected a list")
        return tuple(tuple(v) if isinstance(v, list) else v for v in value)
    if tp is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{where}: expected a number")
        return float(value)
    if tp is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{where}: expected an integer")
        return value
    if tp is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"{where}: expected true/false")
        return value
    if tp is str:
        if not isinstance(value, str):
            raise ConfigError(f"{where}: expected a string")
        return value
    return value


def _build(cls, data: dict, where: str = "config"):
    hints = typing.get_type_hints(cls)
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - names)
    if unknown:
        raise ConfigError(f"{where}: unknown key(s) {', '.join(unknown)}")
    kwargs = {k: _convert(hints[k], v, f"{where}.{k}") for k, v in data.items()}
    return cls(**kwargs)


def _validate(cfg: RunConfig):
    if cfg.dimension not in (2, 3):
        raise ConfigError("dimension must be 2 or 3")
    if cfg.suite is not None and cfg.suite not in SUITES:
        raise ConfigError(f"unknown suite {cfg.suite!r}; choose from {', '.join(SUITES)}")
    a = cfg.kernel.angular
    if a.type not in ("constant", "table", "singular"):
        raise ConfigError("kernel.angular.type must be constant, table or singular")
    if a.theta0 is not None and not 0 < a.theta0 <= pi / 2:
        raise ConfigError("kernel.angular.theta0 must lie in (0, pi/2]")
    if not 0 <= cfg.kernel.gamma <= 1:
        raise ConfigError("kernel.gamma must lie in [0, 1]")
    if a.type == "singular" and a.theta0 is None:
        for p, q in cfg.norms:
            pq = p * q
            if -2 < a.nu <= -1 and pq < 2:
                raise ConfigError(f"norm (p={p}, q={q}): nu in (-2, -1] requires pq >= 2 "
                                  "(weight condition for moderately singular kernels)")
            if -3 < a.nu <= -2 and pq < 4:
                raise ConfigError(f"norm (p={p}, q={q}): nu in (-3, -2] requires pq >= 4 "
                                  "(weight condition for strongly singular kernels)")
    if cfg.suite in ("estim1", "fonc", "estim3", "estim5") and cfg.ensemble.seed is None:
        raise ConfigError("ensemble.seed is mandatory for ensemble suites")
    if cfg.suite in ("apriori", "probe-eps") or cfg.output.trajectory:
        if a.type == "singular" and a.theta0 is None:
            raise ConfigError("flows need a cutoff kernel: set kernel.angular.theta0 for singular kernels")
    if cfg.initial.type not in ("maxwellian", "mixture", "bkw"):
        raise ConfigError("initial.type must be maxwellian, mixture or bkw")
    try:
        cfg.velocity_grid()
        cfg.quad_spec()
        cfg.flow_config()
        cfg.angular_kernel()
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def config_from_dict(data: dict) -> RunConfig:
    cfg = _build(RunConfig, data or {})
    _validate(cfg)
    return cfg


def load_config(path) -> RunConfig:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"config file not found: {path}")
    with open(path) as fh:
        data = yaml.safe_load(fh)
    if data is not None and not isinstance(data, dict):
        raise ConfigError("config root must be a mapping")
    return config_from_dict(data or {})


def with_seed(cfg: RunConfig, seed: int) -> RunConfig:
    return dataclasses.replace(cfg, ensemble=dataclasses.replace(cfg.ensemble, seed=seed))
