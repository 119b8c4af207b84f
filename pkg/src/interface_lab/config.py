"""Run configuration shared by the experiments and the CLI.

The default seed is a fixed documented constant (not wall clock), so default
runs are reproducible; pass --seed to vary.  The interface choice is one of
'flux' (lam = D+/(D+ + D-)), 'half' (lam = 0.5), or 'custom:<value>'.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import Optional

from .medium import TwoSidedMedium, flux_continuity_lambda, make_medium

__all__ = ["RunConfig", "DEFAULT_SEED", "EXPERIMENTS", "default_config", "resolve_lambda"]

DEFAULT_SEED = 101

EXPERIMENTS = ("kernel-check", "fpt", "occupation", "martingale", "pde-vs-mc")

_EXPERIMENT_DEFAULTS = {
    "kernel-check": dict(paths=200_000, dt=1.0, t_max=1.0, y0=0.0),
    "fpt": dict(paths=100_000, dt=1e-3, t_max=4.0, y0=-1.0, detector=1.0,
                grid_nodes=3301, half_width=33.0, pde_dt=1e-3),
    "occupation": dict(paths=100_000, dt=1e-3, t_max=3.0, y0=0.0),
    "martingale": dict(paths=100_000, dt=1e-3, t_max=1.0, y0=0.0),
    "pde-vs-mc": dict(paths=100_000, dt=1e-3, t_max=1.0, y0=0.0,
                      grid_nodes=3401, half_width=17.0),
}


def resolve_lambda(interface: str, d_plus: float, d_minus: float) -> float:
    """Map an interface choice string to the interface parameter."""
    mode = interface.strip().lower()
    if mode == "flux":
        return flux_continuity_lambda(d_plus, d_minus)
    if mode == "half":
        return 0.5
    if mode.startswith("custom:"):
        try:
            value = float(mode.split(":", 1)[1])
        except ValueError:
            raise ValueError(f"invalid custom interface value in {interface!r}")
        if not (math.isfinite(value) and 0.0 < value < 1.0):
            raise ValueError(
                f"custom interface parameter must lie in (0, 1), got {value}"
            )
        return value
    raise ValueError(
        f"interface must be 'flux', 'half', or 'custom:<value>', got {interface!r}"
    )


@dataclass
class RunConfig:
    """Effective configuration of one experiment run."""

    experiment: str
    d_plus: float = 4.0
    d_minus: float = 1.0
    interface: str = "flux"
    alpha_override: Optional[float] = None
    paths: int = 100_000
    dt: float = 1e-3
    t_max: float = 1.0
    y0: float = 0.0
    detector: float = 1.0
    lambdas: tuple = (0.3, 2.0 / 3.0, 0.9)
    grid_nodes: int = 3401
    half_width: float = 17.0
    seed: int = DEFAULT_SEED
    out: Optional[str] = None
    format: str = "json"
    # experiment-internal knobs (config-file only, no dedicated CLI flags)
    pde_dt: float = 2.5e-4
    martingale_alphas: Optional[tuple] = None
    bridge_correction: bool = True

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(
                f"experiment must be one of {EXPERIMENTS}, got {self.experiment!r}"
            )
        if not self.d_plus > 0:
            raise ValueError(f"d_plus must be positive, got {self.d_plus}")
        if not self.d_minus > 0:
            raise ValueError(f"d_minus must be positive, got {self.d_minus}")
        resolve_lambda(self.interface, self.d_plus, self.d_minus)
        if self.alpha_override is not None and not 0.0 < self.alpha_override < 1.0:
            raise ValueError(
                f"alpha override must lie in (0, 1), got {self.alpha_override}"
            )
        if self.paths < 2:
            raise ValueError(f"paths must be at least 2, got {self.paths}")
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.t_max < self.dt:
            raise ValueError(f"t_max must be at least dt, got {self.t_max}")
        if not self.pde_dt > 0:
            raise ValueError(f"pde_dt must be positive, got {self.pde_dt}")
        for lam in self.lambdas:
            if not 0.0 < lam < 1.0:
                raise ValueError(f"lambda sweep values must lie in (0, 1), got {lam}")
        if self.martingale_alphas is not None:
            for a in self.martingale_alphas:
                if not 0.0 < a < 1.0:
                    raise ValueError(f"martingale alphas must lie in (0, 1), got {a}")
        if self.grid_nodes < 7 or self.grid_nodes % 2 == 0:
            raise ValueError(
                f"grid_nodes must be an odd integer >= 7, got {self.grid_nodes}"
            )
        if not self.half_width > 0:
            raise ValueError(f"half_width must be positive, got {self.half_width}")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.format not in ("json", "csv"):
            raise ValueError(f"format must be 'json' or 'csv', got {self.format!r}")
        if self.experiment == "fpt" and self.y0 == self.detector:
            raise ValueError("y0 and detector must differ")

    @property
    def lam(self) -> float:
        return resolve_lambda(self.interface, self.d_plus, self.d_minus)

    def medium(self) -> TwoSidedMedium:
        return make_medium(self.d_plus, self.d_minus, self.lam)

    def echo(self) -> dict:
        """Complete effective configuration for the report, defaults included."""
        med = self.medium()
        out = {
            "experiment": self.experiment,
            "d_plus": self.d_plus,
            "d_minus": self.d_minus,
            "interface": self.interface,
            "lambda": med.lam,
            "alpha_override": self.alpha_override,
            "paths": int(self.paths),
            "dt": self.dt,
            "t_max": self.t_max,
            "y0": self.y0,
            "detector": self.detector,
            "lambdas": list(self.lambdas),
            "grid_nodes": int(self.grid_nodes),
            "half_width": self.half_width,
            "pde_dt": self.pde_dt,
            "martingale_alphas": (
                None if self.martingale_alphas is None else list(self.martingale_alphas)
            ),
            "bridge_correction": self.bridge_correction,
            "seed": int(self.seed),
            "format": self.format,
        }
        return out


def default_config(experiment: str, **overrides) -> RunConfig:
    """RunConfig with the documented per-experiment defaults applied."""
    if experiment not in EXPERIMENTS:
        raise ValueError(f"experiment must be one of {EXPERIMENTS}, got {experiment!r}")
    values = dict(_EXPERIMENT_DEFAULTS[experiment])
    values.update(overrides)
    known = {f.name for f in fields(RunConfig)}
    unknown = set(values) - known
    if unknown:
        raise ValueError(f"unknown config fields: {sorted(unknown)}")
    return RunConfig(experiment=experiment, **values)
