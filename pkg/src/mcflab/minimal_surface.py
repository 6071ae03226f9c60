"""Construction of the minimal profile asymptotic to the Simons cone.

For each n >= 4 and axis height b > 0 there is a smooth rotationally
invariant minimal hypersurface whose profile solves

    Q'' = (1 + Q'^2) ( (n-1)/Q - (n-1) Q'/r ),   Q(0) = b, Q'(0) = 0,

stays above the cone Q = r, and approaches it like Q = r + C_b r^alpha with
the negative exponent alpha shared by the whole family.  The one-parameter
family is a single shape: Q_b(r) = b Q_1(r/b).

Internally the integration tracks the cone gap v = Q - r, which obeys

    v'' = -(1 + (1+v')^2) (n-1) (v + v'(r+v)) / (r (r+v)).

Working in v is not cosmetic: far out, quantities like the kernel element
u0 = (Q - r Q')/sqrt(1+Q'^2) = (v - r v')/sqrt(1+Q'^2) are differences of
O(r) numbers when formed from Q but differences of same-scale small numbers
when formed from v, and only the latter keeps relative accuracy once
v ~ r^alpha has decayed below roundoff of r.

The r = 0 coordinate singularity is removable only analytically, so the
integration starts from a power-series seed on [0, r_seed] whose
coefficients are generated order by order from the equation itself; an
adaptive Runge-Kutta integrator (scipy's DOP853) carries the gap out to
r_max with dense output, so profile jets are available at arbitrary radii
downstream.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .errors import BlowupDetected, NonPositiveTail, PositivityViolated, SeedTooCoarse
from .fitting import RateFit, fit_power_law

_SERIES_ORDERS = 4  # even orders r^2 .. r^8
_QPRIME_CAP = 10.0  # Q' approaches 1 from below; exceeding this means a bug


def _ode_rhs(n: int, r, q, q1):
    return (1.0 + q1 * q1) * ((n - 1) / q - (n - 1) * q1 / r)


def _gap_rhs(n: int, r, v, v1):
    """v'' for the cone gap; algebraically identical to _ode_rhs at Q = r + v."""
    q1 = 1.0 + v1
    return -(1.0 + q1 * q1) * (n - 1) * (v + v1 * (r + v)) / (r * (r + v))


def _series_residual_coeff(n: int, coeffs: np.ndarray, order: int) -> float:
    """Coefficient of r^order in Q'' - (1+Q'^2)((n-1)/Q - (n-1)Q'/r) for polynomial Q."""
    L = len(coeffs) + 4
    c = np.zeros(L)
    c[: len(coeffs)] = coeffs

    def mul(a, b):
        return np.convolve(a, b)[:L]

    d1 = np.zeros(L)
    d1[:-1] = c[1:] * np.arange(1, L)
    d2 = np.zeros(L)
    d2[:-1] = d1[1:] * np.arange(1, L)
    # Q'/r: Q' has no constant term for an even series
    d1_over_r = np.zeros(L)
    d1_over_r[:-1] = d1[1:]
    # 1/Q by series inversion (Q(0) = b > 0)
    inv = np.zeros(L)
    inv[0] = 1.0 / c[0]
    for m in range(1, L):
        inv[m] = -np.dot(c[1 : m + 1], inv[:m][::-1]) / c[0]
    one_plus_dq2 = mul(d1, d1)
    one_plus_dq2[0] += 1.0
    rhs = mul(one_plus_dq2, (n - 1) * (inv - d1_over_r))
    res = d2 - rhs
    return float(res[order])


def _axis_series(n: int, b: float) -> np.ndarray:
    """Polynomial coefficients [b, 0, c2, 0, c4, ...] of the axis expansion.

    Each even coefficient is fixed by requiring the corresponding order of
    the equation residual to vanish; the residual coefficient is affine in
    the unknown, so two evaluations determine it.
    """
    L = 2 * _SERIES_ORDERS + 1
    coeffs = np.zeros(L)
    coeffs[0] = b
    for m in range(1, _SERIES_ORDERS + 1):
        order = 2 * m - 2
        idx = 2 * m
        coeffs[idx] = 0.0
        rho0 = _series_residual_coeff(n, coeffs, order)
        coeffs[idx] = 1.0
        rho1 = _series_residual_coeff(n, coeffs, order)
        coeffs[idx] = -rho0 / (rho1 - rho0)
    return coeffs


@dataclass
class MinimalProfile:
    """Sampled minimal profile with jets, dense evaluation and tail fit.

    q/q1/q2 are the profile jets on the grid; v/v1 hold the cone gap
    Q - r and its slope, which stay relatively accurate in the far field
    where q - grid would lose all digits to rounding.
    """

    n: int
    b: float
    grid: np.ndarray
    q: np.ndarray
    q1: np.ndarray
    q2: np.ndarray
    v: np.ndarray
    v1: np.ndarray
    C_b: float
    alpha_fit: float
    tail: RateFit
    tol: float
    accuracy: float  # max gap deviation from a re-integration at tol/10
    r_seed: float
    _series: np.ndarray = field(repr=False)
    _sol: object = field(repr=False)

    @property
    def r_max(self) -> float:
        return float(self.grid[-1])

    def gap(self, r):
        """(v, v', v'') of the cone gap at arbitrary radii in [0, r_max]."""
        r = np.atleast_1d(np.asarray(r, dtype=float))
        if np.any(r < 0.0) or np.any(r > self.grid[-1] * (1 + 1e-12)):
            raise ValueError("gap evaluation outside [0, r_max]")
        v = np.empty_like(r)
        v1 = np.empty_like(r)
        inner = r <= self.r_seed
        if np.any(inner):
            poly = np.poly1d(self._series[::-1])
            v[inner] = poly(r[inner]) - r[inner]
            v1[inner] = np.polyder(poly)(r[inner]) - 1.0
        if np.any(~inner):
            vals = self._sol(r[~inner])
            v[~inner] = vals[0]
            v1[~inner] = vals[1]
        v2 = np.empty_like(r)
        pos = r > 0.0
        v2[pos] = _gap_rhs(self.n, r[pos], v[pos], v1[pos])
        if np.any(~pos):
            v2[~pos] = 2.0 * self._series[2]
        return v, v1, v2

    def jet(self, r):
        """(Q, Q', Q'') at arbitrary radii in [0, r_max], vectorized."""
        r = np.atleast_1d(np.asarray(r, dtype=float))
        v, v1, v2 = self.gap(r)
        return r + v, 1.0 + v1, v2

    def q3(self, r):
        """Third derivative from differentiating the minimal-surface equation (r > 0).

        Assembled from gap quantities so the small factors (1/Q - Q'/r) and
        (Q'/r^2 - Q'/Q^2) carry no large-number cancellations.
        """
        r = np.atleast_1d(np.asarray(r, dtype=float))
        if np.any(r <= 0.0):
            raise ValueError("q3 requires r > 0")
        v, v1, v2 = self.gap(r)
        q, q1, q2 = r + v, 1.0 + v1, v2
        n = self.n
        s = 1.0 + q1 * q1
        # 1/Q - Q'/r = -(v + v'(r+v)) / (r (r+v))
        D = -(v + v1 * (r + v)) / (r * q)
        # Q'/r^2 - Q'/Q^2 = Q' v (2r + v) / (r^2 Q^2)
        E = q1 * v * (2.0 * r + v) / (r * r * q * q)
        return 2.0 * q1 * q2 * (n - 1) * D + s * (n - 1) * (E - q2 / r)

    def u0(self, r):
        """Kernel element (v - r v')/sqrt(1+Q'^2) with its first derivative."""
        r = np.atleast_1d(np.asarray(r, dtype=float))
        v, v1, v2 = self.gap(r)
        q1 = 1.0 + v1
        s = 1.0 + q1 * q1
        u0 = (v - r * v1) / np.sqrt(s)
        u0p = -v2 * (r + (r + v) * q1) / s**1.5
        return u0, u0p


def integrate_profile(
    n: int,
    b: float,
    r_max: float,
    tol: float = 1e-10,
    nodes_per_decade: int = 60,
    verify: bool = True,
) -> MinimalProfile:
    """Shoot the minimal profile from the axis out to r_max.

    tol is the relative error target per integrator step, applied to the
    cone gap. The returned profile records `accuracy`, the sup deviation of
    the gap against a re-integration at tol/10.
    """
    if b <= 0.0:
        raise ValueError(f"axis value b must be positive, got {b}")
    if r_max < 50.0 * b:
        raise ValueError(f"r_max={r_max:g} must be at least 50*b for a usable tail")
    if not (1e-12 <= tol <= 1e-6):
        raise ValueError(f"tol={tol:g} outside the supported range [1e-12, 1e-6]")

    series = _axis_series(n, b)
    r_seed = b / 100.0
    poly = np.poly1d(series[::-1])
    dpoly = np.polyder(poly)
    q_seed = float(poly(r_seed))
    q1_seed = float(dpoly(r_seed))
    q2_seed = float(np.polyder(dpoly)(r_seed))
    seed_resid = abs(q2_seed - _ode_rhs(n, r_seed, q_seed, q1_seed))
    if seed_resid > 10.0 * tol:
        raise SeedTooCoarse(
            f"axis series residual {seed_resid:.3e} at r_seed={r_seed:g} "
            f"exceeds 10*tol={10 * tol:.3e}"
        )

    def rhs(r, y):
        return [y[1], _gap_rhs(n, r, y[0], y[1])]

    def blowup(r, y):
        return y[1] - (_QPRIME_CAP - 1.0)

    blowup.terminal = True

    def run(rtol):
        sol = solve_ivp(
            rhs,
            (r_seed, r_max),
            [q_seed - r_seed, q1_seed - 1.0],
            method="DOP853",
            rtol=rtol,
            atol=rtol * b * 1e-4,
            dense_output=True,
            events=blowup,
        )
        if sol.status == 1:
            raise BlowupDetected(
                f"Q' exceeded {_QPRIME_CAP} at r={sol.t_events[0][0]:g}; the slope "
                "of a minimal profile stays below 1"
            )
        if not sol.success:
            raise RuntimeError(f"profile integration failed: {sol.message}")
        return sol.sol

    dense = run(tol)

    decades = np.log10(r_max / (b * 1e-3))
    npts = max(int(np.ceil(nodes_per_decade * decades)) + 1, 200)
    grid = np.concatenate([[0.0], np.geomspace(b * 1e-3, r_max, npts)])

    mp = MinimalProfile(
        n=n,
        b=b,
        grid=grid,
        q=np.empty(0),
        q1=np.empty(0),
        q2=np.empty(0),
        v=np.empty(0),
        v1=np.empty(0),
        C_b=np.nan,
        alpha_fit=np.nan,
        tail=None,
        tol=tol,
        accuracy=np.nan,
        r_seed=r_seed,
        _series=series,
        _sol=dense,
    )
    mp.v, mp.v1, mp.q2 = mp.gap(grid)
    mp.q = grid + mp.v
    mp.q1 = 1.0 + mp.v1

    if np.any(mp.q2 <= 0.0):
        raise PositivityViolated("Q'' must stay positive on a minimal profile")
    if np.any(mp.v <= 0.0):
        raise PositivityViolated("minimal profile crossed the cone Q = r")

    if verify:
        check = run(tol / 10.0)
        vals = check(grid[1:])
        mp.accuracy = float(
            max(
                np.max(np.abs(vals[0] - mp.v[1:])),
                np.max(np.abs(vals[1] - mp.v1[1:])),
            )
        )
    tail = fit_tail(mp)
    mp.tail = tail
    mp.C_b = tail.coefficient
    mp.alpha_fit = tail.exponent
    return mp


def fit_tail(mp: MinimalProfile, window=None) -> RateFit:
    """Log-log fit of the gap Q - r ~ C_b r^alpha over a far-field window.

    The default window starts at max(10 b, r_max/10), far enough out that
    the r^(alpha-2) correction is below the fit tolerance.
    """
    if window is None:
        window = (max(10.0 * mp.b, mp.r_max / 10.0), mp.r_max)
    r_lo, r_hi = window
    if r_lo < 10.0 * mp.b:
        raise ValueError(f"tail window must start at or beyond 10*b={10 * mp.b:g}")
    if r_hi > mp.r_max * (1 + 1e-12):
        raise ValueError("tail window extends past r_max")
    mask = (mp.grid >= r_lo) & (mp.grid <= r_hi)
    if mask.sum() < 20:
        raise ValueError("tail window must contain at least 20 nodes")
    excess = mp.v[mask]
    if np.any(excess <= 0.0):
        raise NonPositiveTail("Q - r is not positive throughout the tail window")
    return fit_power_law(mp.grid[mask], excess, window=window, min_points=20)


def verify_scaling(mp1: MinimalProfile, mpb: MinimalProfile) -> float:
    """sup |Q_b(r) - b Q_1(r/b)| over the common range of two constructions.

    mp1 must have b = 1; both sides were integrated independently, so this
    is a genuine two-route consistency check of the integrators.  The
    comparison runs on the gaps (identical to comparing Q).
    """
    if abs(mp1.b - 1.0) > 0.0:
        raise ValueError("mp1 must be the b = 1 profile")
    if mp1.n != mpb.n:
        raise ValueError("profiles must share the dimension parameter n")
    b = mpb.b
    r_hi = min(mpb.r_max, b * mp1.r_max)
    rs = mpb.grid[(mpb.grid > 0.0) & (mpb.grid <= r_hi)]
    vb = mpb.gap(rs)[0]
    v1_scaled = b * mp1.gap(rs / b)[0]
    return float(np.max(np.abs(vb - v1_scaled)))


@dataclass(frozen=True)
class U0Profile:
    """Samples of the positive Jacobi kernel element u0 = (Q - r Q')/sqrt(1+Q'^2)."""

    r: np.ndarray
    u0: np.ndarray
    tail: RateFit


def u0_profile(mp: MinimalProfile) -> U0Profile:
    """The dilation kernel element u0 on the profile grid; u0(0) = b.

    Its tail behaves like (1 - alpha) C_b / sqrt(2) * r^alpha, which the
    attached fit exposes for cross-checks against the profile tail fit.
    """
    u0 = (mp.v - mp.grid * mp.v1) / np.sqrt(1.0 + mp.q1**2)
    if np.any(u0 <= 0.0):
        raise PositivityViolated("u0 must be positive on the minimal profile")
    window = (max(10.0 * mp.b, mp.r_max / 10.0), mp.r_max)
    mask = (mp.grid >= window[0]) & (mp.grid <= window[1])
    tail = fit_power_law(mp.grid[mask], u0[mask], window=window, min_points=20)
    return U0Profile(r=mp.grid, u0=u0, tail=tail)
