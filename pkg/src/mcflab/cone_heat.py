"""Bessel parabolic machinery for the Jacobi flow on the Simons cone.

Radial solutions of the Jacobi heat equation on the cone,
du/dt = u''/2 + (n-1)/r u' + (n-1)/r^2 u, transform under
v(r, t) = r^{n-1} u(r, 2t) into the Bessel parabolic equation

    dv/dt = v'' + (1/4 - mu^2) r^{-2} v,    mu = sqrt(1/4 + (n-1)(n-4)),

whose heat kernel is W_t(r, rho) = sqrt(r rho)/(2t) I_mu(r rho / 2t)
exp(-(r^2+rho^2)/(4t)).  The monomial r^{mu+1/2} (the image of the cone
decay rate r^alpha) is stationary under this kernel, and data below that
rate by r^{-delta} contracts like t^{-delta/2}; the decay experiment here
measures that exponent directly.

The kernel is always evaluated through the scaled Bessel function
e^{-z} I_mu(z), combining the exponentials into exp(-(r-rho)^2/4t), since
z = r rho/2t routinely exceeds 1e6.  The Bessel evaluation itself keeps
two independent regimes, a power series and the large-argument expansion,
whose agreement at the crossover is a built-in oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .errors import TailTooFat
from .fitting import RateFit, fit_power_law, last_decade_window
from .params import Params

_SERIES_SWITCH = 15.0  # below this (or when mu is large) use the power series
_ASYMP_TERMS = 26
_TAIL_FIT_SLACK = 0.05  # fit noise allowance on the critical tail exponent


@dataclass(frozen=True)
class BesselOrder:
    """Order of the half-line Bessel operator; mu >= 1/2 in this model."""

    mu: float

    def __post_init__(self):
        if self.mu < 0.5:
            raise ValueError(f"Bessel order must be >= 1/2, got {self.mu}")

    @classmethod
    def from_params(cls, p: Params) -> "BesselOrder":
        if abs((p.mu + 0.5) - (p.n - 1 + p.alpha)) > 1e-12:
            raise ValueError("Params violates the mu + 1/2 = n - 1 + alpha identity")
        return cls(mu=p.mu)

    @property
    def stationary_exponent(self) -> float:
        return self.mu + 0.5


def _bessel_series_scaled(mu: float, z: np.ndarray) -> np.ndarray:
    """e^{-z} I_mu(z) by the ascending series; all terms positive, so stable."""
    out = np.zeros_like(z)
    pos = z > 0.0
    zz = z[pos]
    term = np.ones_like(zz)
    total = np.ones_like(zz)
    log_off = np.zeros_like(zz)  # running renormalization: raw sums reach e^z
    q = zz * zz / 4.0
    # the largest term sits near m ~ z/2; allow for it plus a safety margin
    m_cap = 400 if zz.size == 0 else max(400, int(zz.max()) + 60)
    for m in range(1, m_cap + 1):
        term = term * q / (m * (mu + m))
        total += term
        big = total > 1e280
        if np.any(big):
            total[big] *= 1e-280
            term[big] *= 1e-280
            log_off[big] += 280.0 * np.log(10.0)
        if np.all(term <= 1e-18 * total):
            break
    else:
        raise ArithmeticError(
            f"Bessel series failed to converge within {m_cap} terms (mu={mu:g})"
        )
    log_pref = -zz + mu * np.log(zz / 2.0) - gammaln(mu + 1.0) + log_off
    out[pos] = np.exp(log_pref) * total
    if mu == 0.0:
        out[~pos] = 1.0
    return out


def _bessel_asymptotic_scaled(mu: float, z: np.ndarray) -> np.ndarray:
    """e^{-z} I_mu(z) by the large-argument expansion with its reflected series.

    I_mu(z) ~ e^z/sqrt(2 pi z) * sum_k (-1)^k a_k/z^k
            - sin(mu pi) e^{-z}/sqrt(2 pi z) * sum_k a_k/z^k,
    a_k = prod_{j<=k} (4 mu^2 - (2j-1)^2) / (k! 8^k).  Terms are accumulated
    until they stop shrinking (optimal truncation).
    """
    four_mu2 = 4.0 * mu * mu
    main = np.ones_like(z)
    refl = np.ones_like(z)
    term = np.ones_like(z)
    frozen = np.zeros(z.shape, dtype=bool)
    for k in range(1, _ASYMP_TERMS):
        factor = (four_mu2 - (2 * k - 1) ** 2) / (8.0 * k)
        new_term = term * factor / z
        growing = np.abs(new_term) >= np.abs(term)
        frozen |= growing
        new_term = np.where(frozen, 0.0, new_term)
        main += (-1.0) ** k * new_term
        refl += new_term
        term = np.where(frozen, term, new_term)
    return (main - math.sin(mu * math.pi) * np.exp(-2.0 * z) * refl) / np.sqrt(
        2.0 * math.pi * z
    )


def bessel_I(mu: float, z, scaled: bool = False):
    """Modified Bessel function of the first kind, order mu >= 0.

    With scaled=True returns e^{-z} I_mu(z), finite for every z >= 0; the
    unscaled value overflows beyond z ~ 700 and is rejected there.
    """
    if mu < 0.0:
        raise ValueError("bessel_I handles nonnegative orders only")
    z_arr = np.atleast_1d(np.asarray(z, dtype=float))
    if np.any(z_arr < 0.0):
        raise ValueError("bessel_I requires z >= 0")
    switch = max(_SERIES_SWITCH, 1.5 * mu * mu)
    out = np.empty_like(z_arr)
    small = z_arr <= switch
    if np.any(small):
        out[small] = _bessel_series_scaled(mu, z_arr[small])
    if np.any(~small):
        out[~small] = _bessel_asymptotic_scaled(mu, z_arr[~small])
    if not scaled:
        if np.any(z_arr > 700.0):
            raise OverflowError(
                "unscaled I_mu overflows for z > 700; use scaled=True"
            )
        out = out * np.exp(z_arr)
    return out if np.ndim(z) else float(out[0])


def bessel_regime_gap(mu: float, z_probe: float | None = None) -> float:
    """Relative disagreement of the two evaluation regimes at the switch point."""
    if z_probe is None:
        z_probe = max(_SERIES_SWITCH, 1.5 * mu * mu)
    a = _bessel_series_scaled(mu, np.array([z_probe]))[0]
    b = _bessel_asymptotic_scaled(mu, np.array([z_probe]))[0]
    return abs(a - b) / abs(b)


def heat_kernel(mu: float, t: float, r, rho):
    """Bessel heat kernel W_t(r, rho), evaluated in overflow-free form."""
    if t <= 0.0:
        raise ValueError("heat_kernel requires t > 0")
    r = np.asarray(r, dtype=float)
    rho = np.asarray(rho, dtype=float)
    if np.any(r <= 0.0) or np.any(rho <= 0.0):
        raise ValueError("heat_kernel requires r, rho > 0")
    z = r * rho / (2.0 * t)
    scaled = bessel_I(mu, z, scaled=True)
    return np.sqrt(r * rho) / (2.0 * t) * scaled * np.exp(-((r - rho) ** 2) / (4.0 * t))


@dataclass
class HalfLineField:
    """Radial samples v(rho_i) at one time, with a fitted decay tag.

    The tail exponent is fitted over the top decade of the grid whenever the
    field is nontrivial there; it powers both the fat-tail rejection in
    propagate() and the power-law extension beyond the sampled range.
    """

    grid: np.ndarray
    v: np.ndarray
    t: float
    tail: RateFit | None = None

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float)
        self.v = np.asarray(self.v, dtype=float)
        if self.grid.shape != self.v.shape:
            raise ValueError("grid and values must have matching shapes")
        if np.any(np.diff(self.grid) <= 0.0) or self.grid[0] <= 0.0:
            raise ValueError("grid must be strictly increasing and positive")
        if not np.all(np.isfinite(self.v)):
            raise ValueError("field values must be finite")
        if self.tail is None:
            self.tail = self._fit_tail()

    def _fit_tail(self) -> RateFit | None:
        window = last_decade_window(self.grid)
        mask = self.grid >= window[0]
        vals = np.abs(self.v[mask])
        if mask.sum() >= 3 and np.all(vals > 0.0) and vals.max() > 1e-280:
            return fit_power_law(self.grid[mask], vals, window=window, min_points=3)
        return None

    def interpolator(self):
        """Dense evaluator with power-law extension beyond the grid.

        Positive fields are interpolated as line segments in log-log space
        (exact on monomials); sign-changing fields fall back to a cubic
        spline in log rho.  Outside the grid the fitted tail (resp. an inner
        two-point power law) extends the data; fields that are numerically
        zero at the edge extend by zero.
        """
        from scipy.interpolate import CubicSpline

        g, v = self.grid, self.v
        lg = np.log(g)
        if np.all(v > 0.0):
            core = CubicSpline(lg, np.log(v))

            def inside(x):
                return np.exp(core(np.log(x)))

        else:
            spline = CubicSpline(lg, v)

            def inside(x):
                return spline(np.log(x))

        p_out = self.tail.exponent if self.tail is not None else None
        if abs(v[0]) > 0.0 and abs(v[1]) > 0.0 and v[0] * v[1] > 0.0:
            p_in = np.log(abs(v[1] / v[0])) / (lg[1] - lg[0])
        else:
            p_in = None

        def evaluate(x):
            x = np.asarray(x, dtype=float)
            out = np.zeros_like(x)
            lo = x < g[0]
            hi = x > g[-1]
            mid = ~(lo | hi)
            if np.any(mid):
                out[mid] = inside(x[mid])
            if np.any(lo) and p_in is not None:
                out[lo] = v[0] * (x[lo] / g[0]) ** p_in
            if np.any(hi) and p_out is not None and abs(v[-1]) > 0.0:
                out[hi] = v[-1] * (x[hi] / g[-1]) ** p_out
            return out

        return evaluate


def propagate(mu: float, t: float, v0: HalfLineField, out_grid=None) -> HalfLineField:
    """Convolve a field with the Bessel heat kernel over a time lapse t.

    v(r, t0 + t) = int_0^inf W_t(r, rho) v0(rho) drho, computed per output
    node with composite Gauss-Legendre panels over the kernel's Gaussian
    window [r - w, r + w], w = 40 sqrt(t); the discarded tail carries weight
    below e^{-400}.  Input tails at or above the stationary rate mu + 1/2
    (beyond fit slack) are refused since the contraction estimate is
    meaningless there.
    """
    if t <= 0.0:
        raise ValueError("propagation time must be positive")
    if v0.tail is not None and v0.tail.exponent > mu + 0.5 + _TAIL_FIT_SLACK:
        raise TailTooFat(
            f"input tail exponent {v0.tail.exponent:.3f} is at or above the "
            f"stationary rate mu + 1/2 = {mu + 0.5:.3f}"
        )
    if out_grid is None:
        out_grid = v0.grid
    out_grid = np.asarray(out_grid, dtype=float)
    evaluate = v0.interpolator()

    w = 40.0 * math.sqrt(t)
    npanels = 96
    ng = 12
    gx, gw = np.polynomial.legendre.leggauss(ng)

    out = np.empty_like(out_grid)
    for i, r in enumerate(out_grid):
        lo = max(r - w, 1e-300)
        hi = r + w
        # panel edges: uniform over the Gaussian window, plus a log-graded
        # stack near the origin when the window reaches it
        edges = np.linspace(lo, hi, npanels + 1)
        if lo <= 1e-250:
            inner = np.geomspace(max(hi * 1e-10, 1e-280), min(hi / npanels, hi), 24)
            edges = np.unique(np.concatenate([inner, edges[1:]]))
        mids = 0.5 * (edges[1:] + edges[:-1])
        half = 0.5 * np.diff(edges)
        nodes = (mids[:, None] + half[:, None] * gx[None, :]).ravel()
        wts = (half[:, None] * gw[None, :]).ravel()
        kern = heat_kernel(mu, t, r, nodes)
        out[i] = float(np.sum(wts * kern * evaluate(nodes)))

    result = HalfLineField(grid=out_grid, v=out, t=v0.t + t)
    return result


def stationary_mass(mu: float, t: float, r: float, rtol: float = 1e-10) -> float:
    """int_0^inf W_t(r, rho) rho^{mu+1/2} drho, equal to r^{mu+1/2} exactly."""
    from scipy.integrate import quad

    w = 40.0 * math.sqrt(t)
    val, _ = quad(
        lambda rho: heat_kernel(mu, t, r, rho) * rho ** (mu + 0.5),
        max(r - w, 0.0) + 1e-300,
        r + w,
        epsabs=1e-14,
        epsrel=rtol,
        limit=400,
    )
    return val


@dataclass(frozen=True)
class DecayExperiment:
    """Measured contraction rate of subcritical data under the kernel."""

    delta: float
    times: np.ndarray
    sup_ratio: np.ndarray
    fit: RateFit


def decay_experiment(p: Params, delta: float, t_grid) -> DecayExperiment:
    """Propagate v0 = rho^{mu+1/2-delta} and fit the decay of sup_r v/r^{mu+1/2}.

    The data saturates the contraction bound: by kernel self-similarity the
    sup ratio equals const * t^{-delta/2} exactly, so the fitted slope is a
    sharp check of the propagation machinery, not just an upper bound.
    """
    mu = p.mu
    if not (0.0 < delta < 2.0 * mu + 2.0):
        raise ValueError(f"delta={delta:g} outside (0, {2 * mu + 2:g})")
    t_grid = np.sort(np.asarray(t_grid, dtype=float))
    if t_grid[0] <= 0.0:
        raise ValueError("propagation times must be positive")

    x_grid = np.geomspace(0.05, 30.0, 40)  # output radii in units of sqrt(t)
    t_max = t_grid[-1]
    span = 75.0 * math.sqrt(t_max)
    base_grid = np.geomspace(1e-3, span, 400)
    s_exp = mu + 0.5 - delta
    v0 = HalfLineField(grid=base_grid, v=base_grid**s_exp, t=0.0)

    sups = np.empty_like(t_grid)
    for i, t in enumerate(t_grid):
        out_grid = x_grid * math.sqrt(t)
        field = propagate(mu, t, v0, out_grid=out_grid)
        sups[i] = float(np.max(field.v / out_grid ** (mu + 0.5)))
    fit = fit_power_law(t_grid, sups, min_points=3)
    return DecayExperiment(delta=float(delta), times=t_grid, sup_ratio=sups, fit=fit)


def cone_transform(n: int, field_u: HalfLineField) -> HalfLineField:
    """Map a cone Jacobi field u to its Bessel form v = r^{n-1} u, t -> t/2."""
    return HalfLineField(
        grid=field_u.grid,
        v=field_u.grid ** (n - 1) * field_u.v,
        t=field_u.t / 2.0,
    )


def cone_transform_inverse(n: int, field_v: HalfLineField) -> HalfLineField:
    """Inverse of cone_transform: u = r^{-(n-1)} v, t -> 2t; exact round trip."""
    return HalfLineField(
        grid=field_v.grid,
        v=field_v.grid ** (-(n - 1)) * field_v.v,
        t=2.0 * field_v.t,
    )
