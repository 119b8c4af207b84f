"""Path functionals of the physical diffusion.

First passage times to a level, Lebesgue- and quadratic-variation-weighted
occupation times of the two sides of the interface, and the martingale
residual

    f(Y_T) - f(Y_0) - (1/2) * sum_i D(Y_{t_i}) f''(Y_{t_i}) * dt

over the piecewise-quadratic test class whose one-sided slopes at the
origin satisfy lam * f'(0+) = (1 - lam) * f'(0-).  The residual has mean
zero over paths exactly when the path's transmission parameter equals the
medium's alpha_star, which is what the martingale experiment detects.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from . import _backend
from .medium import TwoSidedMedium
from .rng import RngStream
from .sbm import MAX_PATH_POINTS, PhysicalPath, ResourceLimitError, SkewPath, n_steps_for

__all__ = [
    "FptSample",
    "OccupationRecord",
    "TestFunction",
    "first_passage",
    "occupation_times",
    "make_test_function",
    "martingale_residual",
]


@dataclass(frozen=True)
class FptSample:
    """Outcome of one first-passage simulation: a time, or censoring at t_max."""

    t_max: float
    passage_time: Optional[float] = None

    def __post_init__(self):
        if self.passage_time is not None:
            if not 0.0 <= self.passage_time <= self.t_max:
                raise ValueError("passage_time must lie in [0, t_max]")

    @property
    def censored(self) -> bool:
        return self.passage_time is None


@dataclass(frozen=True)
class OccupationRecord:
    """Per-path occupation tallies over [0, horizon].

    The Lebesgue tallies split the horizon between the two sides of the
    interface; the quadratic-variation tallies weight them by the side's
    dispersion coefficient, since d<Y> = D(Y) dt for the physical diffusion.
    """

    gamma_plus_leb: float
    gamma_minus_leb: float
    gamma_plus_qv: float
    gamma_minus_qv: float
    horizon: float


@dataclass(frozen=True)
class TestFunction:
    """Piecewise quadratic in the interface test class.

    f(y) = (1-lam)*kappa*y + beta_plus*y^2   for y >= 0
    f(y) = lam*kappa*y + beta_minus*y^2      for y < 0

    Continuity at 0 and lam*f'(0+) = (1-lam)*f'(0-) hold by construction
    (both sides equal lam*(1-lam)*kappa).
    """

    lam: float
    kappa: float
    beta_plus: float
    beta_minus: float

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        out = np.where(
            y >= 0.0,
            (1.0 - self.lam) * self.kappa * y + self.beta_plus * np.square(y),
            self.lam * self.kappa * y + self.beta_minus * np.square(y),
        )
        return float(out) if out.ndim == 0 else out

    def fprime(self, y):
        """One-sided first derivative; at y = 0 the plus-side value."""
        y = np.asarray(y, dtype=float)
        out = np.where(
            y >= 0.0,
            (1.0 - self.lam) * self.kappa + 2.0 * self.beta_plus * y,
            self.lam * self.kappa + 2.0 * self.beta_minus * y,
        )
        return float(out) if out.ndim == 0 else out

    def fsecond(self, y):
        """Second derivative away from 0; at y = 0 the plus-side value."""
        y = np.asarray(y, dtype=float)
        out = np.where(y >= 0.0, 2.0 * self.beta_plus, 2.0 * self.beta_minus)
        return float(out) if out.ndim == 0 else out


def make_test_function(
    lam: float, kappa: float, beta_plus: float, beta_minus: float
) -> TestFunction:
    lam = float(lam)
    if not 0.0 < lam < 1.0:
        raise ValueError(f"lam must lie in (0, 1), got {lam}")
    return TestFunction(
        lam=lam,
        kappa=float(kappa),
        beta_plus=float(beta_plus),
        beta_minus=float(beta_minus),
    )


def first_passage(
    medium: TwoSidedMedium,
    y0: float,
    y_target: float,
    dt: float,
    t_max: float,
    rng: RngStream,
    bridge_correction: bool = True,
) -> FptSample:
    """Simulate one physical-diffusion path until it reaches y_target or t_max.

    The simulation runs in natural (X) coordinates where the process is
    locally standard Brownian; passage is declared at the first grid point
    at or beyond the target (sign-aware), or inside a step through the
    Brownian-bridge hit probability when the correction is on and the step
    stays strictly one-sided relative to both the target and the interface.
    """
    y0 = float(y0)
    y_target = float(y_target)
    if y0 == y_target:
        raise ValueError("y0 and y_target must differ")
    dt = float(dt)
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    t_max = float(t_max)
    if t_max < dt:
        raise ValueError(f"t_max must be at least dt, got t_max={t_max}, dt={dt}")
    n = n_steps_for(t_max, dt)
    if n + 1 > MAX_PATH_POINTS:
        raise ResourceLimitError(f"{n + 1} points exceed the cap {MAX_PATH_POINTS}")
    horizon = n * dt  # simulated horizon: the grid may overshoot t_max by < dt
    x0 = medium.unscale(y0)
    a = medium.unscale(y_target)
    t = _backend.simulate_fpt(
        [rng.bit_generator], x0, a, medium.alpha_star, dt, n, bool(bridge_correction)
    )[0]
    if math.isnan(t):
        return FptSample(t_max=horizon, passage_time=None)
    return FptSample(t_max=horizon, passage_time=float(t))


def _occupation_plus_leb(x: np.ndarray, dt: float) -> float:
    """Interpolated plus-side Lebesgue time of a path's X values."""
    sp = x[:-1] >= 0.0
    sn = x[1:] >= 0.0
    both_plus = sp & sn
    cross = sp != sn
    denom = np.abs(x[:-1]) + np.abs(x[1:])
    denom = np.where(denom > 0.0, denom, 1.0)
    frac = np.abs(x[:-1]) / denom
    contrib = dt * both_plus + dt * np.where(cross, np.where(sp, frac, 1.0 - frac), 0.0)
    return float(np.sum(contrib))


def occupation_times(
    path: Union[PhysicalPath, SkewPath], medium: Optional[TwoSidedMedium] = None
) -> OccupationRecord:
    """Occupation tallies of a path.

    Per step with no sign change the full dt accrues to that side; with a
    sign change dt is split at the linearly interpolated X-view crossing
    point (fraction |x_i| / (|x_i| + |x_{i+1}|) before the crossing).  The
    origin counts to the plus side.  Sign is read off the X values, which
    agree in sign with the Y view.
    """
    if isinstance(path, PhysicalPath):
        if medium is None:
            medium = path.medium
        x = path.x_values
        dt = path.dt
    else:
        if medium is None:
            raise ValueError("medium is required for a bare SkewPath")
        x = path.x_values
        dt = path.dt
    if len(x) < 1:
        raise ValueError("path must be nonempty")
    horizon = dt * (len(x) - 1)
    plus = _occupation_plus_leb(np.asarray(x, dtype=float), dt)
    minus = horizon - plus
    return OccupationRecord(
        gamma_plus_leb=plus,
        gamma_minus_leb=minus,
        gamma_plus_qv=medium.d_plus * plus,
        gamma_minus_qv=medium.d_minus * minus,
        horizon=horizon,
    )


def martingale_residual(
    path: Union[PhysicalPath, SkewPath],
    medium: TwoSidedMedium,
    f: TestFunction,
) -> float:
    """Martingale residual of one path under test function f.

    Uses left-endpoint quadrature for the compensator, consistent with the
    exactness in law of the grid marginals.  Raises when the test function's
    interface parameter differs from the medium's.
    """
    if f.lam != medium.lam:
        raise ValueError(
            f"test function lam={f.lam} does not match medium lam={medium.lam}"
        )
    if isinstance(path, PhysicalPath):
        y = path.y_values
        dt = path.dt
    else:
        y = medium.scale(path.x_values)
        dt = path.dt
    d_vals = medium.dispersion_at(y[:-1])
    fpp = f.fsecond(y[:-1])
    compensator = 0.5 * dt * float(np.sum(d_vals * fpp))
    return float(f(y[-1]) - f(y[0]) - compensator)
