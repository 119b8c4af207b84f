"""Two-sided dispersion medium and its closed-form coefficient algebra.

A medium is a pair of constant dispersion coefficients (d_plus on [0, inf),
d_minus on (-inf, 0)) separated by a sharp interface at the origin, together
with an interface parameter lam in (0, 1) that weights the one-sided
derivative matching condition  lam * f'(0+) = (1 - lam) * f'(0-).

The transmission parameter alpha_star is the excursion-sign probability of
the skew Brownian motion whose scaled image carries the right generator:

    alpha_star = lam * sqrt(d_minus) / (lam * sqrt(d_minus) + (1 - lam) * sqrt(d_plus))

It is computed once at construction and never mutated.  Everything in this
module is an immutable value or a pure function, so unrestricted concurrent
use is safe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "TwoSidedMedium",
    "make_medium",
    "flux_continuity_lambda",
    "medium_from_upwelling",
]


def _check_finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value!r}")
    return value


@dataclass(frozen=True)
class TwoSidedMedium:
    """Dispersion pair with interface parameter and derived transmission parameter.

    Attributes
    ----------
    d_plus : float
        Dispersion coefficient on [0, inf), length^2/time, > 0.
    d_minus : float
        Dispersion coefficient on (-inf, 0), length^2/time, > 0.
    lam : float
        Interface parameter in (0, 1), weight of the plus-side one-sided
        derivative in the matching condition.
    alpha_star : float
        Transmission parameter in (0, 1), fixed at construction.

    Use :func:`make_medium` to construct; it validates the inputs and
    computes ``alpha_star`` so that a single consistent value is used
    program-wide.
    """

    d_plus: float
    d_minus: float
    lam: float
    alpha_star: float

    def __post_init__(self):
        if not (self.d_plus > 0 and self.d_minus > 0):
            raise ValueError("dispersion coefficients must be positive")
        if not 0.0 < self.lam < 1.0:
            raise ValueError("lam must lie in (0, 1)")
        if not 0.0 < self.alpha_star < 1.0:
            raise ValueError("alpha_star must lie in (0, 1)")

    @property
    def sqrt_d_plus(self) -> float:
        return math.sqrt(self.d_plus)

    @property
    def sqrt_d_minus(self) -> float:
        return math.sqrt(self.d_minus)

    def scale(self, x):
        """Map natural (X) coordinates to physical (Y) coordinates.

        s(x) = sqrt(d_plus) * x for x >= 0 and sqrt(d_minus) * x for x < 0;
        strictly increasing, sign-preserving, s(0) = 0.  Accepts scalars or
        arrays.
        """
        x = _finite_array("x", x)
        out = np.where(x >= 0.0, self.sqrt_d_plus * x, self.sqrt_d_minus * x)
        return float(out) if out.ndim == 0 else out

    def unscale(self, y):
        """Inverse of :meth:`scale`: y / sqrt(d_plus) for y >= 0, else y / sqrt(d_minus)."""
        y = _finite_array("y", y)
        out = np.where(y >= 0.0, y / self.sqrt_d_plus, y / self.sqrt_d_minus)
        return float(out) if out.ndim == 0 else out

    def dispersion_at(self, y):
        """Piecewise dispersion coefficient in Y coordinates.

        The origin belongs to the plus side: d_minus for y < 0, d_plus for
        y >= 0.
        """
        y = _finite_array("y", y)
        out = np.where(y >= 0.0, self.d_plus, self.d_minus)
        return float(out) if out.ndim == 0 else out


def _finite_array(name: str, value):
    arr = np.asarray(value, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    return arr


def make_medium(d_plus: float, d_minus: float, lam: float) -> TwoSidedMedium:
    """Construct a validated medium, computing the transmission parameter.

    Raises ValueError naming the offending field for non-positive dispersion,
    lam outside (0, 1), or non-finite input.
    """
    d_plus = _check_finite("d_plus", d_plus)
    d_minus = _check_finite("d_minus", d_minus)
    lam = _check_finite("lam", lam)
    if d_plus <= 0:
        raise ValueError(f"d_plus must be positive, got {d_plus}")
    if d_minus <= 0:
        raise ValueError(f"d_minus must be positive, got {d_minus}")
    if not 0.0 < lam < 1.0:
        raise ValueError(f"lam must lie in the open interval (0, 1), got {lam}")
    a = lam * math.sqrt(d_minus)
    b = (1.0 - lam) * math.sqrt(d_plus)
    alpha_star = a / (a + b)
    return TwoSidedMedium(d_plus=d_plus, d_minus=d_minus, lam=lam, alpha_star=alpha_star)


def flux_continuity_lambda(d_plus: float, d_minus: float) -> float:
    """Interface parameter for which the matching condition is flux continuity.

    Returns d_plus / (d_plus + d_minus); a medium built with this lam has
    alpha_star = sqrt(d_plus) / (sqrt(d_plus) + sqrt(d_minus)).
    """
    d_plus = _check_finite("d_plus", d_plus)
    d_minus = _check_finite("d_minus", d_minus)
    if d_plus <= 0:
        raise ValueError(f"d_plus must be positive, got {d_plus}")
    if d_minus <= 0:
        raise ValueError(f"d_minus must be positive, got {d_minus}")
    return d_plus / (d_plus + d_minus)


def medium_from_upwelling(
    r: float, f: float, h_slope_plus: float, h_slope_minus: float
) -> TwoSidedMedium:
    """Medium for the coastal-upwelling free-surface problem.

    The cross-shore equation has diffusivity r / (|f| * H) on each side of
    the shelf break, where H is the (piecewise constant) bottom slope and f
    is the Coriolis parameter, negative in the southern hemisphere.  The
    factor 2 converts that diffusivity into this package's (1/2) * D
    generator convention.  The physics impose derivative continuity at the
    break, i.e. lam = 1/2.
    """
    r = _check_finite("r", r)
    f = _check_finite("f", f)
    h_slope_plus = _check_finite("h_slope_plus", h_slope_plus)
    h_slope_minus = _check_finite("h_slope_minus", h_slope_minus)
    if r <= 0:
        raise ValueError(f"r must be positive, got {r}")
    if f >= 0:
        raise ValueError(f"f must be negative (southern hemisphere convention), got {f}")
    if h_slope_plus <= 0:
        raise ValueError(f"h_slope_plus must be positive, got {h_slope_plus}")
    if h_slope_minus <= 0:
        raise ValueError(f"h_slope_minus must be positive, got {h_slope_minus}")
    d_plus = 2.0 * r / (abs(f) * h_slope_plus)
    d_minus = 2.0 * r / (abs(f) * h_slope_minus)
    return make_medium(d_plus, d_minus, 0.5)
