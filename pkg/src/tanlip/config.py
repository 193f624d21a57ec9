"""Run configuration shared by the CLI and the report writers."""
from __future__ import annotations

import os
from dataclasses import asdict, dataclass, replace

from .disc import DiscConfig

SEED_ENV = "TANLIP_SEED"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    n_theta: int = 64
    n_rho: int = 64
    M: int = 64
    levels: int = 6
    fill: float = 0.95
    n_samples: int = 256
    n_dirs: int = 128
    n_pairs: int = 1000
    n_configs: int = 200
    hl_samples: int = 2000
    tol_s_scale: float = 1e-9
    tol_r_rel: float = 1e-10
    tol_r_abs: float = 1e-15
    parity_residual_cap: float = 1e-12
    delta0: float = 1e-4

    def __post_init__(self):
        counts = ("n_theta", "n_rho", "M", "levels", "n_samples", "n_dirs", "n_pairs", "n_configs", "hl_samples")
        for name in counts:
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        if not 0 <= self.fill <= 0.95:
            raise ConfigError("fill must lie in [0, 0.95]")
        if not self.delta0 > 0:
            raise ConfigError("delta0 must be positive")

    @classmethod
    def from_env(cls, **overrides) -> "RunConfig":
        """Defaults, then explicit overrides, then ``TANLIP_SEED`` if set."""
        cfg = cls(**{k: v for k, v in overrides.items() if v is not None})
        env = os.environ.get(SEED_ENV)
        if env is not None:
            try:
                cfg = replace(cfg, seed=int(env))
            except ValueError as exc:
                raise ConfigError(f"{SEED_ENV} must be an integer, got {env!r}") from exc
        return cfg

    def disc_config(self) -> DiscConfig:
        return DiscConfig(n_theta=self.n_theta, n_rho=self.n_rho, tol_r_rel=self.tol_r_rel,
                          tol_r_abs=self.tol_r_abs, tol_s_scale=self.tol_s_scale)

    def to_dict(self) -> dict:
        return asdict(self)
