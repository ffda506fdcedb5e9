"""Flat experiment configuration (one JSON object per run)."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields

import numpy as np


class ConfigError(ValueError):
    """Configuration or precondition error (CLI exit code 1)."""


@dataclass
class ExperimentConfig:
    command: str = "identities"
    out: str = "results"
    seed: int = 0
    # lattice runs
    n_sites: int = 32
    steps: int = 24
    theta: float = 0.3
    window: int = 8
    j0: int | None = None
    taper: str = "none"
    state: str = "packet"          # packet | localized | plane_wave | random | zero
    k0: float = 0.7
    sigma_k: float = 0.44
    width: float = 0.7             # localized: real-space width in sites
    branch: int = 1
    spin_mix: float = 0.0
    amplitude: float = 1.0
    k_index: int = 3               # plane wave: k = 2 pi k_index / n_sites
    omega_index: int = 4           # plane wave: omega = pi omega_index / (2 window + 1)
    variant: str = "ledger"        # ledger | printed
    # identity suite
    id_sites: int = 64
    id_steps: int = 64
    n_fields: int = 100
    # continuum family
    eps_list: list = field(default_factory=lambda: [1 / 8, 1 / 16, 1 / 32, 1 / 64])
    mass: float = 1.0
    box: float = 8.0
    t_final: float = 8.0
    k0_phys: float = 1.0
    sigma_k_phys: float = 1.0
    window_phys: float = 3.0
    taper_width: float = 0.4
    n_samples: int = 32
    jobs: int = 1

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            data = json.load(fh)
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a flat JSON object")
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return asdict(self)

    @property
    def base_time(self) -> int:
        return self.steps // 2 if self.j0 is None else self.j0

    def validate(self):
        """Check the preconditions of the selected command."""
        if self.variant not in ("ledger", "printed"):
            raise ConfigError(f"variant must be 'ledger' or 'printed', got {self.variant!r}")
        if self.command == "identities":
            if self.id_sites < 4 or self.id_sites % 2:
                raise ConfigError(f"id_sites must be even and >= 4 (got {self.id_sites})")
            if self.id_steps < 3:
                raise ConfigError(f"id_steps must be >= 3 (got {self.id_steps})")
            if self.n_fields < 1:
                raise ConfigError("n_fields must be >= 1")
        elif self.command in ("audit", "dump-wigner"):
            if self.n_sites < 4 or self.n_sites % 2:
                raise ConfigError(f"n_sites must be even and >= 4 (got {self.n_sites})")
            if self.steps < 3:
                raise ConfigError(f"steps must be >= 3 (got {self.steps})")
            if self.window < 1:
                raise ConfigError("window must be >= 1")
            j0, M = self.base_time, self.window
            if j0 - M < 1 or j0 + M > self.steps - 2:
                raise ConfigError(
                    f"window precondition violated: need j0 - window >= 1 and "
                    f"j0 + window <= steps - 2 (j0={j0}, window={M}, steps={self.steps})")
            if self.state not in ("packet", "localized", "plane_wave", "random", "zero"):
                raise ConfigError(f"unknown state {self.state!r}")
        elif self.command == "converge":
            if len(self.eps_list) < 4:
                raise ConfigError(f"converge needs >= 4 eps values, got {len(self.eps_list)}")
            if any(e <= 0 for e in self.eps_list):
                raise ConfigError("eps values must be positive")
        else:
            raise ConfigError(f"unknown command {self.command!r}")


def plane_wave_theta(cfg: ExperimentConfig) -> float:
    """Coin angle making the configured plane wave periodic over the ``n_j`` window."""
    from .walk import commensurate_theta

    k = 2 * np.pi * cfg.k_index / cfg.n_sites
    omega = np.pi * cfg.omega_index / (2 * cfg.window + 1)
    try:
        return commensurate_theta(k, omega)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
