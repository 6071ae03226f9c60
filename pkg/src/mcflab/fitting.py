"""Power-law exponent estimation by log-log least squares.

Every asymptotic claim in this package (profile tails, generalized-kernel
growth, heat-kernel decay, blow-up rates) is checked the same way: fit
log|y| against log x over a stated window and report slope, intercept and
residual.  The residual is always carried along so a bad fit cannot pass
silently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import WindowTooNarrow


@dataclass(frozen=True)
class RateFit:
    """Least-squares power-law fit y ~ exp(intercept) * x**exponent."""

    exponent: float
    intercept: float
    window: tuple[float, float]
    resid: float
    npoints: int

    @property
    def coefficient(self) -> float:
        return float(np.exp(self.intercept))


def fit_power_law(x, y, window=None, min_points: int = 5) -> RateFit:
    """Fit log y = exponent * log x + intercept over x in ``window``.

    ``y`` must be strictly positive on the window (take abs upstream if a
    signed quantity is being fitted).  ``resid`` is the RMS residual of the
    log-log fit.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if window is None:
        window = (float(x.min()), float(x.max()))
    lo, hi = float(window[0]), float(window[1])
    mask = (x >= lo) & (x <= hi)
    if mask.sum() < min_points:
        raise WindowTooNarrow(
            f"power-law window [{lo:g}, {hi:g}] holds {int(mask.sum())} samples, "
            f"need at least {min_points}"
        )
    xs, ys = x[mask], y[mask]
    if np.any(ys <= 0.0):
        raise ValueError("fit_power_law needs strictly positive y on the window")
    lx, ly = np.log(xs), np.log(ys)
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = float(np.sqrt(np.mean((ly - (slope * lx + intercept)) ** 2)))
    return RateFit(float(slope), float(intercept), (lo, hi), resid, int(mask.sum()))


def last_decade_window(x) -> tuple[float, float]:
    """Window spanning the top decade of a positive, increasing sample set."""
    x = np.asarray(x, dtype=float)
    hi = float(x.max())
    return (hi / 10.0, hi)
