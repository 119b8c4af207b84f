"""Skew Brownian motion engine: closed-form transition kernel and exact sampling.

The transition density of skew Brownian motion with transmission parameter
alpha, started at x >= 0, is

    p_t(x, y) = phi_t(y - x) + (2*alpha - 1) * phi_t(y + x)   for y >= 0
    p_t(x, y) = 2*(1 - alpha) * phi_t(y - x)                  for y < 0

with phi_t the centred Gaussian density of variance t; for x < 0 use the
mirror identity p_t^alpha(x, y) = p_t^(1-alpha)(-x, -y).  The sampler in
the kernel backends reproduces this law exactly at every grid time, so path
marginals carry no time-step bias; only path functionals (first passage,
occupation) retain discretization effects, which downstream code controls.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from . import _backend
from .medium import TwoSidedMedium
from .rng import RngStream

__all__ = [
    "SkewPath",
    "PhysicalPath",
    "MAX_PATH_POINTS",
    "transition_density",
    "transition_cdf",
    "step",
    "sample_path",
    "physical_path",
    "bridge_no_hit_prob",
]

MAX_PATH_POINTS = 20_000_000


class ResourceLimitError(RuntimeError):
    """Requested path exceeds the configured point cap."""


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    return alpha


def _check_positive(name: str, value: float) -> float:
    value = float(value)
    if not (math.isfinite(value) and value > 0.0):
        raise ValueError(f"{name} must be positive and finite, got {value}")
    return value


def _phi(u, t):
    return np.exp(-np.square(u) / (2.0 * t)) / math.sqrt(2.0 * math.pi * t)


def transition_density(alpha: float, x: float, t: float, y):
    """Density of skew BM at time t started from x, evaluated at y (vectorized in y)."""
    alpha = _check_alpha(alpha)
    t = _check_positive("t", t)
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"x must be finite, got {x}")
    if x < 0.0:
        y_arr = np.asarray(y, dtype=float)
        out = transition_density(1.0 - alpha, -x, t, -y_arr)
        return float(out) if np.ndim(y) == 0 else out
    y_arr = np.asarray(y, dtype=float)
    plus = _phi(y_arr - x, t) + (2.0 * alpha - 1.0) * _phi(y_arr + x, t)
    minus = 2.0 * (1.0 - alpha) * _phi(y_arr - x, t)
    out = np.where(y_arr >= 0.0, plus, minus)
    return float(out) if np.ndim(y) == 0 else out


def transition_cdf(alpha: float, x: float, t: float, y):
    """CDF matching :func:`transition_density` (vectorized in y)."""
    alpha = _check_alpha(alpha)
    t = _check_positive("t", t)
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"x must be finite, got {x}")
    if x < 0.0:
        y_arr = np.asarray(y, dtype=float)
        out = 1.0 - transition_cdf(1.0 - alpha, -x, t, -y_arr)
        return float(out) if np.ndim(y) == 0 else out
    y_arr = np.asarray(y, dtype=float)
    rt = math.sqrt(t)
    # mass below min(y, 0), then the positive-side piece when y > 0
    below = 2.0 * (1.0 - alpha) * ndtr((np.minimum(y_arr, 0.0) - x) / rt)
    pos = np.maximum(y_arr, 0.0)
    above = (ndtr((pos - x) / rt) - ndtr(-x / rt)) + (2.0 * alpha - 1.0) * (
        ndtr((pos + x) / rt) - ndtr(x / rt)
    )
    out = below + np.where(y_arr > 0.0, above, 0.0)
    return float(out) if np.ndim(y) == 0 else out


def step(alpha: float, x: float, dt: float, rng: RngStream) -> float:
    """One exact-in-law skew step from x over dt.

    Draws the driving Brownian endpoint w, decides whether the underlying
    path avoided the interface (Brownian-bridge probability
    1 - exp(-2*x*w/dt) when x and w share a sign), and on a touch signs |w|
    positive with probability alpha.  The touch/sign decisions reuse a
    single uniform via conditional rescaling, which preserves the law.
    """
    alpha = _check_alpha(alpha)
    dt = _check_positive("dt", dt)
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"x must be finite, got {x}")
    z = rng.normals(1)[0]
    u = rng.uniforms(1)[0]
    w = x + math.sqrt(dt) * z
    xw = x * w
    if xw > 0.0:
        p = 1.0 - math.exp(-2.0 * xw / dt)
        if u < p:
            return w
        v = (u - p) / (1.0 - p)
    else:
        v = u
    aw = abs(w)
    return aw if v < alpha else -aw


@dataclass(frozen=True)
class SkewPath:
    """A discretely sampled skew-BM trajectory in natural (X) coordinates."""

    alpha: float
    x0: float
    dt: float
    x_values: np.ndarray

    def __post_init__(self):
        if len(self.x_values) < 1:
            raise ValueError("path must contain at least one point")
        if self.x_values[0] != self.x0:
            raise ValueError("x_values[0] must equal x0")

    @property
    def n_steps(self) -> int:
        return len(self.x_values) - 1

    @property
    def times(self) -> np.ndarray:
        return self.dt * np.arange(len(self.x_values))


@dataclass(frozen=True)
class PhysicalPath:
    """A skew path together with the medium that defines its physical (Y) view."""

    path: SkewPath
    medium: TwoSidedMedium

    @property
    def x_values(self) -> np.ndarray:
        return self.path.x_values

    @property
    def y_values(self) -> np.ndarray:
        return self.medium.scale(self.path.x_values)

    @property
    def dt(self) -> float:
        return self.path.dt

    @property
    def times(self) -> np.ndarray:
        return self.path.times


def n_steps_for(t_max: float, dt: float) -> int:
    """ceil(t_max/dt) with a guard against binary-representation fuzz."""
    return int(math.ceil(t_max / dt - 1e-9))


def sample_path(alpha: float, x0: float, dt: float, t_max: float, rng: RngStream) -> SkewPath:
    """Sample a path on the uniform grid 0, dt, ..., ceil(t_max/dt)*dt."""
    alpha = _check_alpha(alpha)
    dt = _check_positive("dt", dt)
    t_max = float(t_max)
    if t_max < dt:
        raise ValueError(f"t_max must be at least dt, got t_max={t_max}, dt={dt}")
    x0 = float(x0)
    if not math.isfinite(x0):
        raise ValueError(f"x0 must be finite, got {x0}")
    n = n_steps_for(t_max, dt)
    if n + 1 > MAX_PATH_POINTS:
        raise ResourceLimitError(
            f"path would hold {n + 1} points, above the cap {MAX_PATH_POINTS}"
        )
    x = _backend.simulate_path(rng.bit_generator, x0, alpha, dt, n)
    return SkewPath(alpha=alpha, x0=x0, dt=dt, x_values=x)


def physical_path(
    medium: TwoSidedMedium, y0: float, dt: float, t_max: float, rng: RngStream
) -> PhysicalPath:
    """Sample the physical diffusion: skew BM at the medium's alpha_star, viewed through scale."""
    x0 = medium.unscale(float(y0))
    path = sample_path(medium.alpha_star, x0, dt, t_max, rng)
    return PhysicalPath(path=path, medium=medium)


def bridge_no_hit_prob(x_start: float, x_end: float, dt: float, level: float = 0.0) -> float:
    """Probability a standard Brownian bridge between the endpoints avoids the level.

    Requires both endpoints strictly on the same side of the level; a
    straddling or touching step hits with certainty and is the caller's
    branch.
    """
    dt = _check_positive("dt", dt)
    d0 = float(x_start) - float(level)
    d1 = float(x_end) - float(level)
    if not (math.isfinite(d0) and math.isfinite(d1)):
        raise ValueError("endpoints and level must be finite")
    if d0 * d1 <= 0.0:
        raise ValueError(
            "endpoints must lie strictly on the same side of the level "
            f"(got x_start-level={d0}, x_end-level={d1})"
        )
    return 1.0 - math.exp(-2.0 * d0 * d1 / dt)
