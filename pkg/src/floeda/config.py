"""Run configuration, config-file schema and the seed-derivation scheme.

Config files are flat `key = value` text (# comments allowed); every key
must be a RunConfig field name, unknown keys are rejected.  Defaults are
the full-scale experiment values; `RunConfig.desk_scale()` is the reduced
scenario used by the acceptance suite.

Seed scheme: all randomness derives from one root seed through
numpy SeedSequence spawn keys (a counter-based scheme), so every
consumer owns an independent, reproducible stream:

    (0,)      truth run (radii, positions, initial ocean draw, truth noise)
    (1, k)    observation noise at observation step k (all floes, sliced
              by id, so observation sets of different sizes share draws)
    (2, m)    ensemble member m initialisation
    (3, m)    ensemble member m forecast noise (shared across subdomains)
"""

from __future__ import annotations

import dataclasses
import hashlib
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ConfigError",
    "RunConfig",
    "load_config",
    "save_config",
    "truth_rng",
    "obs_rng",
    "member_init_rng",
    "member_forecast_rng",
]


class ConfigError(ValueError):
    """Invalid configuration; `field` names the offending entry."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"config field '{field}': {message}")


@dataclass
class RunConfig:
    # spectral ocean
    k_max: int = 9
    truncation: str = "max"
    d: float = 0.5
    phi: float = 0.0
    sigma: float = 0.05
    forcing_re: float = 0.0
    forcing_im: float = 0.0
    amp_factor: float = 0.73  # scales the stationary mode spectrum to u_ocean_max ~ 2

    # floes
    L: int = 40000
    alpha_exp: float = 1.3
    r_min: float = 0.004
    r_max: float = 0.016
    rho: float = 1.0
    h: float = 1.0
    rho_ocean: float = 1.0
    c_d: float = 100.0  # drag alpha = c_d * rho_ocean * r^2
    integrator: str = "semi_implicit"

    # time stepping
    dt: float = 1e-3
    dt_obs: float = 1e-2
    T: float = 20.0

    # filter
    N_e: int = 1000
    sigma_obs: float = 0.01
    inflation: float = 1.0
    vel_init_std: float = 0.05

    # domain decomposition
    nx: int = 1
    ny: int = 1
    l_obs: int = 20
    sigma_o: float = 2.6
    grid_n: int = 64
    weight_metric: str = "periodic"
    selection_refresh: int = 0  # analysis cycles between re-selection; 0 = select once

    seed: int = 0

    @classmethod
    def desk_scale(cls, **overrides) -> "RunConfig":
        """Reduced scenario: runs the full sweep in minutes on a laptop."""
        base = dict(L=2000, k_max=3, N_e=100, T=2.0, grid_n=32, amp_factor=2.59)
        base.update(overrides)
        return cls(**base)

    def __post_init__(self):
        self.validate()

    def validate(self):
        pos = {
            "d": self.d, "dt": self.dt, "dt_obs": self.dt_obs, "T": self.T,
            "sigma_obs": self.sigma_obs, "sigma_o": self.sigma_o, "rho": self.rho,
            "h": self.h, "rho_ocean": self.rho_ocean, "amp_factor": self.amp_factor,
            "vel_init_std": self.vel_init_std,
        }
        for name, val in pos.items():
            if not val > 0:
                raise ConfigError(name, f"must be positive, got {val}")
        if self.sigma < 0:
            raise ConfigError("sigma", f"must be non-negative, got {self.sigma}")
        if self.c_d < 0:
            raise ConfigError("c_d", f"must be non-negative, got {self.c_d}")
        if self.k_max < 1:
            raise ConfigError("k_max", f"must be >= 1, got {self.k_max}")
        if self.truncation not in ("max", "euclidean"):
            raise ConfigError("truncation", f"unknown value {self.truncation!r}")
        if self.integrator not in ("semi_implicit", "rk4"):
            raise ConfigError("integrator", f"unknown value {self.integrator!r}")
        if self.weight_metric not in ("periodic", "planar"):
            raise ConfigError("weight_metric", f"unknown value {self.weight_metric!r}")
        if self.L < 1:
            raise ConfigError("L", "need at least one floe")
        if self.N_e < 2:
            raise ConfigError("N_e", "ensemble needs at least 2 members")
        if self.nx < 1 or self.ny < 1:
            raise ConfigError("nx", f"subdomain counts must be >= 1, got {self.nx}x{self.ny}")
        if self.l_obs < 1:
            raise ConfigError("l_obs", "need at least one observed floe per subdomain")
        if self.grid_n < 2:
            raise ConfigError("grid_n", f"must be >= 2, got {self.grid_n}")
        if self.inflation < 1.0:
            raise ConfigError("inflation", f"must be >= 1, got {self.inflation}")
        if not 0 < self.r_min <= self.r_max:
            raise ConfigError("r_min", f"invalid radius bounds [{self.r_min}, {self.r_max}]")
        if self.alpha_exp == 1.0:
            raise ConfigError("alpha_exp", "exponent 1 has no closed-form inverse CDF")
        if self.selection_refresh < 0:
            raise ConfigError("selection_refresh", "must be >= 0")
        if self.seed < 0:
            raise ConfigError("seed", "must be a non-negative integer")
        ratio = self.dt_obs / self.dt
        if abs(ratio - round(ratio)) > 1e-9 or round(ratio) < 1:
            raise ConfigError("dt_obs", f"must be an integer multiple of dt, got ratio {ratio}")
        cycles = self.T / self.dt_obs
        if abs(cycles - round(cycles)) > 1e-9 or round(cycles) < 1:
            raise ConfigError("T", f"must be an integer multiple of dt_obs, got ratio {cycles}")

    @property
    def substeps(self) -> int:
        return int(round(self.dt_obs / self.dt))

    @property
    def n_cycles(self) -> int:
        return int(round(self.T / self.dt_obs))

    @property
    def forcing(self) -> complex:
        return complex(self.forcing_re, self.forcing_im)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def replace(self, **changes) -> "RunConfig":
        return dataclasses.replace(self, **changes)

    def hash(self) -> str:
        text = "\n".join(f"{k} = {self.to_dict()[k]!r}" for k in sorted(self.to_dict()))
        return hashlib.sha256(text.encode()).hexdigest()[:12]


_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(RunConfig)}


def _coerce(name: str, raw: str):
    kind = _FIELD_TYPES[name]
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        return raw
    except ValueError as exc:
        raise ConfigError(name, f"cannot parse {raw!r} as {kind}") from exc


def parse_config_text(text: str, **overrides) -> RunConfig:
    values: dict = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", f"expected 'key = value', got {line!r}")
        key, raw = (part.strip() for part in line.split("=", 1))
        if key not in _FIELD_TYPES:
            raise ConfigError(key, "unknown configuration key")
        values[key] = _coerce(key, raw)
    values.update(overrides)
    return RunConfig(**values)


def load_config(path, **overrides) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config_text(fh.read(), **overrides)


def save_config(path, config: RunConfig):
    with open(path, "w", encoding="utf-8") as fh:
        for key, val in config.to_dict().items():
            fh.write(f"{key} = {val}\n")


def _derived_rng(seed: int, spawn_key: tuple) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=spawn_key))


def truth_rng(seed: int) -> np.random.Generator:
    return _derived_rng(seed, (0,))


def obs_rng(seed: int, k: int) -> np.random.Generator:
    return _derived_rng(seed, (1, k))


def member_init_rng(seed: int, member: int) -> np.random.Generator:
    return _derived_rng(seed, (2, member))


def member_forecast_rng(seed: int, member: int) -> np.random.Generator:
    return _derived_rng(seed, (3, member))
