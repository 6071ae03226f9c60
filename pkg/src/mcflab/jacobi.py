"""The radial Jacobi operator on the minimal surface.

Acting on radial functions, the stability operator Delta + |A|^2 of the
minimal profile becomes, after multiplication by 1 + Q'^2,

    L u = u'' + (n-1)(1+Q'^2)/r u' + V u
        = (1/J) (J u')' + V u

with the area density J(r) = r^{n-1} Q^{n-1} / sqrt(1+Q'^2) and potential
V = (Q''/(1+Q'^2))^2 + (n-1) Q'^2/r^2 + (n-1)/Q^2.

The positive kernel element u0 = (Q - r Q')/sqrt(1+Q'^2) yields the first
order factorization L = -A* A with

    A u = -u' + W u,     A* u = (1/J)(J u)' + W u,     W = u0'/u0,

whose explicit inverses build the generalized kernel u_j = L^{-1}((1+Q'^2)
u_{j-1}) with growth u_j ~ r^{2j} (1+r)^alpha.  All quadrature runs on a
geometrically graded grid refined in log r, where composite Simpson is
effectively spectral for the power-law integrands at hand.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_simpson, solve_ivp
from scipy.interpolate import CubicSpline
from scipy.linalg import solveh_banded

from .errors import BranchAmbiguous, GridMismatch, NonConvergence
from .fitting import RateFit, fit_power_law
from .minimal_surface import MinimalProfile


@dataclass
class JacobiData:
    """Coefficients of the radial Jacobi operator sampled on the profile grid.

    The public arrays live on the coarse grid (the profile grid without the
    axis node); a log-uniform refinement of the same grid is kept internally
    for quadrature, with coarse nodes at stride `refine`.
    """

    mp: MinimalProfile
    grid: np.ndarray
    J: np.ndarray
    V: np.ndarray
    W: np.ndarray
    u0: np.ndarray
    s: np.ndarray  # 1 + Q'^2
    V0: float  # axis value of the potential, n Q''(0)^2 + (n-1)/b^2
    refine: int
    _fine: dict = field(repr=False)

    @property
    def n(self) -> int:
        return self.mp.n

    @property
    def xi(self) -> np.ndarray:
        return np.log(self.grid)

    def coefficients_at(self, r):
        """(J, V, W, u0, s, u0', W') at arbitrary radii r > 0.

        u0 is assembled from the cone gap (see MinimalProfile.u0), which is
        what keeps W and the factorization usable in the far field.
        """
        r = np.atleast_1d(np.asarray(r, dtype=float))
        n = self.mp.n
        v, v1, v2 = self.mp.gap(r)
        q, q1, q2 = r + v, 1.0 + v1, v2
        q3 = self.mp.q3(r)
        s = 1.0 + q1 * q1
        sq = np.sqrt(s)
        J = r ** (n - 1) * q ** (n - 1) / sq
        V = (q2 / s) ** 2 + (n - 1) * (q1 / r) ** 2 + (n - 1) / q**2
        u0 = (v - r * v1) / sq
        u0p = -q2 * (r + q * q1) / s**1.5
        u0pp = (
            -(q3 / s**1.5) * (r + q * q1)
            + 3.0 * q1 * q2 * q2 * (r + q * q1) / s**2.5
            - (q2 / s**1.5) * (1.0 + q1 * q1 + q * q2)
        )
        W = u0p / u0
        Wp = u0pp / u0 - W * W
        return J, V, W, u0, s, u0p, Wp


def assemble(mp: MinimalProfile, refine: int = 8) -> JacobiData:
    """Sample J, V, W, u0 on the profile grid and prepare the quadrature grid."""
    grid = mp.grid[mp.grid > 0.0]
    xi = np.log(grid)
    h = np.diff(xi)
    if np.max(np.abs(h - h[0])) > 1e-9 * h[0]:
        raise GridMismatch("jacobi assembly expects a geometrically graded grid")

    nfine = (len(grid) - 1) * refine + 1
    xi_f = xi[0] + (xi[-1] - xi[0]) * np.arange(nfine) / (nfine - 1)
    r_f = np.exp(xi_f)
    r_f[::refine] = grid  # pin coarse nodes exactly

    jd = JacobiData(
        mp=mp,
        grid=grid,
        J=np.empty(0),
        V=np.empty(0),
        W=np.empty(0),
        u0=np.empty(0),
        s=np.empty(0),
        V0=float(mp.n * mp.jet(0.0)[2][0] ** 2 + (mp.n - 1) / mp.b**2),
        refine=refine,
        _fine={},
    )
    Jf, Vf, Wf, u0f, sf, _, _ = jd.coefficients_at(r_f)
    jd._fine = {
        "r": r_f,
        "xi": xi_f,
        "J": Jf,
        "V": Vf,
        "W": Wf,
        "u0": u0f,
        "s": sf,
    }
    stride = slice(None, None, refine)
    jd.J, jd.V, jd.W, jd.u0, jd.s = Jf[stride], Vf[stride], Wf[stride], u0f[stride], sf[stride]
    if np.any(jd.J <= 0.0) or np.any(jd.V <= 0.0) or np.any(jd.u0 <= 0.0):
        raise ValueError("J, V and u0 must all be positive on the grid")
    return jd


def envelope_constants(jd: JacobiData) -> tuple[float, float]:
    """Fitted constants c <= J / ((1+r)^{n-1} r^{n-1}) <= C over the grid."""
    ratio = jd.J / ((1.0 + jd.grid) ** (jd.n - 1) * jd.grid ** (jd.n - 1))
    return float(ratio.min()), float(ratio.max())


# one-sided five-point stencils (used at the three nodes nearest each edge)
_D1_EDGE = np.array(
    [[-25.0, 48.0, -36.0, 16.0, -3.0], [-3.0, -10.0, 18.0, -6.0, 1.0],
     [1.0, -8.0, 0.0, 8.0, -1.0]]
) / 12.0
_D2_EDGE = np.array(
    [[35.0, -104.0, 114.0, -56.0, 11.0], [11.0, -20.0, 6.0, 4.0, -1.0],
     [-1.0, 16.0, -30.0, 16.0, -1.0]]
) / 12.0


def _fd_derivs_uniform(u: np.ndarray, h: float) -> tuple[np.ndarray, np.ndarray]:
    """Sixth-order interior derivatives on a uniform grid (lower order at edges)."""
    n = len(u)
    if n < 7:
        raise GridMismatch("need at least 7 nodes for the derivative stencils")
    d1 = np.empty(n)
    d2 = np.empty(n)
    d1[3:-3] = (
        -u[:-6] + 9 * u[1:-5] - 45 * u[2:-4] + 45 * u[4:-2] - 9 * u[5:-1] + u[6:]
    ) / (60 * h)
    d2[3:-3] = (
        2 * u[:-6]
        - 27 * u[1:-5]
        + 270 * u[2:-4]
        - 490 * u[3:-3]
        + 270 * u[4:-2]
        - 27 * u[5:-1]
        + 2 * u[6:]
    ) / (180 * h * h)
    # the three rows of _D*_EDGE are taken at offsets 0, 1, 2 of the same
    # five-point window (row 2 is the centered stencil), mirrored on the right
    for k in (0, 1, 2):
        d1[k] = _D1_EDGE[k] @ u[:5] / h
        d2[k] = _D2_EDGE[k] @ u[:5] / (h * h)
        d1[-1 - k] = -_D1_EDGE[k] @ u[-5:][::-1] / h
        d2[-1 - k] = _D2_EDGE[k] @ u[-5:][::-1] / (h * h)
    return d1, d2


def apply_L(jd: JacobiData, u, jets=None) -> np.ndarray:
    """Evaluate L u on the grid.

    With `jets` = (u', u'') the evaluation is pointwise exact; otherwise the
    derivatives come from high-order finite differences in log r (sixth
    order on the interior; sampled-value noise is amplified by 1/(h r)^2 in
    u'', so headroom above the nominal residual targets matters).
    """
    u = np.asarray(u, dtype=float)
    if u.shape != jd.grid.shape:
        raise GridMismatch(f"u has shape {u.shape}, grid has {jd.grid.shape}")
    if jets is not None:
        u1, u2 = (np.asarray(a, dtype=float) for a in jets)
    else:
        xi = jd.xi
        du, ddu = _fd_derivs_uniform(u, float(xi[1] - xi[0]))
        u1 = du / jd.grid
        u2 = (ddu - du) / jd.grid**2
    return u2 + (jd.n - 1) * jd.s / jd.grid * u1 + jd.V * u


def _cumulative_from_zero(r: np.ndarray, integrand: np.ndarray) -> np.ndarray:
    """cumint_0^r of a positive power-law-like integrand sampled on a log grid.

    The stretch below r[0] is handled by the local power-law model fitted to
    the first two nodes; on the grid, Simpson in log r does the rest.
    """
    xi = np.log(r)
    cum = cumulative_simpson(integrand * r, x=xi, initial=0.0)
    if integrand[0] > 0.0 and integrand[1] > 0.0:
        p = np.log(integrand[1] / integrand[0]) / (xi[1] - xi[0])
        if p > -0.9:
            cum = cum + integrand[0] * r[0] / (p + 1.0)
    return cum


@dataclass(frozen=True)
class InversionBreakdown:
    """Intermediate stages of L^{-1} f for diagnostics."""

    astar_inv: np.ndarray  # (A*)^{-1} f on the fine grid
    tail_exponent: float
    integrable_branch: bool


def invert_L(jd: JacobiData, f, return_parts: bool = False):
    """Apply the explicit inverse L^{-1} f = -A^{-1} (A*)^{-1} f.

    f may be an array on jd.grid (densified by a cubic spline in log r) or a
    callable f(r).  The A^{-1} branch is chosen by a tail-exponent fit of
    (A*)^{-1}f / u0: exponents below -1 make it integrable at infinity.
    A fitted exponent within 0.1 of the threshold raises BranchAmbiguous.
    """
    fine = jd._fine
    r_f, u0_f, J_f = fine["r"], fine["u0"], fine["J"]
    if callable(f):
        f_f = np.asarray(f(r_f), dtype=float)
    else:
        f = np.asarray(f, dtype=float)
        if f.shape != jd.grid.shape:
            raise GridMismatch("f samples must live on jd.grid")
        if np.all(f > 0.0):
            # positive data densifies better in log space (exact on powers)
            f_f = np.exp(CubicSpline(jd.xi, np.log(f))(fine["xi"]))
        else:
            f_f = CubicSpline(jd.xi, f)(fine["xi"])

    out_f, parts = _invert_fine(jd, f_f)
    out = out_f[:: jd.refine]
    if return_parts:
        return out, parts
    return out


def _invert_fine(jd: JacobiData, f_f: np.ndarray):
    fine = jd._fine
    r_f, u0_f, J_f = fine["r"], fine["u0"], fine["J"]

    g = _cumulative_from_zero(r_f, f_f * J_f * u0_f) / (u0_f * J_f)

    ratio = g / u0_f
    window = (r_f[-1] / 10.0, r_f[-1])
    mask = r_f >= window[0]
    tail_vals = ratio[mask]
    if np.all(tail_vals > 0.0) or np.all(tail_vals < 0.0):
        tail = fit_power_law(r_f[mask], np.abs(tail_vals), window=window)
        p = tail.exponent
    else:
        # sign changes in the window: treat as decaying (integrable) data
        p = -np.inf
    if abs(p + 1.0) <= 0.1:
        raise BranchAmbiguous(
            f"tail exponent {p:.3f} of (A*)^{{-1}}f/u0 sits at the integrability "
            "threshold -1; enlarge r_max to separate the branches"
        )
    integrable = p < -1.0

    xi_f = fine["xi"]
    cum = cumulative_simpson(ratio * r_f, x=xi_f, initial=0.0)
    if integrable:
        # int_r^inf = (total + tail beyond r_max) - int_0^r
        tail_ext = 0.0
        if np.isfinite(p):
            tail_ext = -ratio[-1] * r_f[-1] / (p + 1.0)
        inner = 0.0
        if ratio[0] != 0.0 and ratio[1] != 0.0 and ratio[0] * ratio[1] > 0.0:
            p0 = np.log(abs(ratio[1] / ratio[0])) / (xi_f[1] - xi_f[0])
            if p0 > -0.9:
                inner = ratio[0] * r_f[0] / (p0 + 1.0)
        total = cum[-1] + inner + tail_ext
        out_f = -u0_f * (total - (cum + inner))
    else:
        inner = 0.0
        if ratio[0] > 0.0 and ratio[1] > 0.0:
            p0 = np.log(ratio[1] / ratio[0]) / (xi_f[1] - xi_f[0])
            if p0 > -0.9:
                inner = ratio[0] * r_f[0] / (p0 + 1.0)
        out_f = u0_f * (cum + inner)
    return out_f, InversionBreakdown(
        astar_inv=g, tail_exponent=float(p), integrable_branch=bool(integrable)
    )


@dataclass(frozen=True)
class KernelElement:
    """One generalized kernel element with its fitted growth exponents."""

    j: int
    u: np.ndarray
    inner_fit: RateFit
    outer_fit: RateFit


def generalized_kernel(jd: JacobiData, j_max: int) -> list[KernelElement]:
    """Build u_0 .. u_{j_max} by iterated inversion and fit their exponents.

    Each element should grow like r^{2j} near the axis and r^{2j+alpha} far
    out.  Larger j needs more room: r_max >= 10^(2 + j_max/2) * b is
    enforced so the outer fit window sits in the asymptotic regime.
    """
    if j_max > 4:
        raise ValueError("j_max above 4 needs absurd domains; not supported")
    need = 10.0 ** (2.0 + j_max / 2.0) * jd.mp.b
    if jd.grid[-1] < need:
        raise ValueError(
            f"r_max={jd.grid[-1]:g} too small for j_max={j_max}; need >= {need:g}"
        )
    fine = jd._fine
    b = jd.mp.b
    inner_window = (fine["r"][0], b / 10.0)
    outer_window = (fine["r"][-1] / 10.0, fine["r"][-1])
    stride = slice(None, None, jd.refine)

    elements = []
    u_f = fine["u0"].copy()
    for j in range(j_max + 1):
        if j > 0:
            u_f, _ = _invert_fine(jd, fine["s"] * u_f)
            if np.any(u_f[1:] <= 0.0):
                raise ValueError(f"generalized kernel element u_{j} lost positivity")
        inner = fit_power_law(fine["r"], np.abs(u_f), window=inner_window)
        outer = fit_power_law(fine["r"], np.abs(u_f), window=outer_window)
        elements.append(
            KernelElement(j=j, u=u_f[stride].copy(), inner_fit=inner, outer_fit=outer)
        )
    return elements


@dataclass(frozen=True)
class IndicialRoots:
    """Indicial exponents of L u = 0 at the two ends, plus the singular solution."""

    at_zero: tuple[float, float]
    at_infinity: tuple[float, float]
    v0_r: np.ndarray | None = None
    v0: np.ndarray | None = None
    v0_prime: np.ndarray | None = None
    inner_fit: RateFit | None = None


def indicial_roots(n: int, jd: JacobiData | None = None) -> IndicialRoots:
    """Exponents (0, -(n-2)) at r = 0 and (alpha_+, alpha_-) at infinity.

    The far-field Euler approximation u'' + 2(n-1)/r u' + 2(n-1)/r^2 u = 0
    has roots alpha_+- = (-(2n-3) +- sqrt((2n-3)^2 - 8(n-1)))/2; near zero
    the potential is bounded so the exponents are those of u'' + (n-1)/r u'.
    When Jacobi data is supplied, the second kernel element v0 is built by
    integrating L u = 0 backwards from r_max with the r^{alpha_-} seed, and
    its r^{-(n-2)} blow-up at the axis is fitted.
    """
    disc = np.sqrt((2 * n - 3) ** 2 - 8 * (n - 1))
    a_plus = 0.5 * (-(2 * n - 3) + disc)
    a_minus = 0.5 * (-(2 * n - 3) - disc)
    roots = IndicialRoots(
        at_zero=(0.0, -(float(n) - 2.0)), at_infinity=(float(a_plus), float(a_minus))
    )
    if jd is None:
        return roots

    mp = jd.mp
    r_hi, r_lo = jd.grid[-1], jd.grid[0]

    def rhs(r, y):
        q, q1, q2 = mp.jet(r)
        s = 1.0 + q1[0] * q1[0]
        V = (q2[0] / s) ** 2 + (n - 1) * (q1[0] / r) ** 2 + (n - 1) / q[0] ** 2
        return [y[1], -(n - 1) * s / r * y[1] - V * y[0]]

    sol = solve_ivp(
        rhs,
        (r_hi, r_lo),
        [r_hi**a_minus, a_minus * r_hi ** (a_minus - 1.0)],
        method="DOP853",
        rtol=1e-12,
        atol=1e-300,
        dense_output=True,
    )
    if not sol.success:
        raise RuntimeError(f"backward integration for v0 failed: {sol.message}")
    vals = sol.sol(jd.grid)
    v0, v0p = vals[0], vals[1]
    inner_mask = jd.grid <= mp.b / 10.0
    inner = fit_power_law(jd.grid[inner_mask], np.abs(v0[inner_mask]))
    return IndicialRoots(
        at_zero=roots.at_zero,
        at_infinity=roots.at_infinity,
        v0_r=jd.grid,
        v0=v0,
        v0_prime=v0p,
        inner_fit=inner,
    )


def wronskian(jd: JacobiData, roots: IndicialRoots) -> np.ndarray:
    """J (u0 v0' - v0 u0') on the grid; constant for two L-kernel elements."""
    if roots.v0 is None:
        raise ValueError("indicial_roots must be called with Jacobi data first")
    _, _, _, u0, _, u0p, _ = jd.coefficients_at(jd.grid)
    return jd.J * (u0 * roots.v0_prime - roots.v0 * u0p)


def _fem_matrices(jd: JacobiData, R_trunc: float, nodes: int):
    """P1 finite-element matrices for (Lu/(1+Q'^2), u) in the surface measure.

    Returns symmetric tridiagonal (diag, off) pairs for the bilinear form
    a(u,v) = -int J u'v' + int V J u v and the mass m(u,v) = int (1+Q'^2) J u v,
    assembled with two-point Gauss quadrature per element.  The operator
    represented is Delta + |A|^2 acting on radial functions; self-adjointness
    holds in the measure (1+Q'^2) J dr, the radial part of the volume form.
    """
    r = np.geomspace(jd.grid[0], R_trunc, nodes)
    h = np.diff(r)
    gauss = 0.5 * (1.0 + np.array([-1.0, 1.0]) / np.sqrt(3.0))
    rg = r[:-1, None] + h[:, None] * gauss[None, :]
    Jg, Vg, _, _, sg, _, _ = jd.coefficients_at(rg.ravel())
    Jg = Jg.reshape(rg.shape)
    Vg = Vg.reshape(rg.shape)
    sg = sg.reshape(rg.shape)
    wg = 0.5 * h[:, None]  # Gauss weights on each element

    phi_l = np.broadcast_to(1.0 - gauss[None, :], rg.shape)
    phi_r = np.broadcast_to(gauss[None, :], rg.shape)

    stiff = np.sum(wg * Jg, axis=1) / h**2  # int_e J / h^2

    def overlap(weight):
        dd_l = np.sum(wg * weight * phi_l * phi_l, axis=1)
        dd_r = np.sum(wg * weight * phi_r * phi_r, axis=1)
        off = np.sum(wg * weight * phi_l * phi_r, axis=1)
        return dd_l, dd_r, off

    pot_l, pot_r, pot_off = overlap(Vg * Jg)
    mass_l, mass_r, mass_off = overlap(sg * Jg)

    npts = len(r)
    A_diag = np.zeros(npts)
    A_off = np.zeros(npts - 1)
    M_diag = np.zeros(npts)
    M_off = np.zeros(npts - 1)
    A_diag[:-1] += -stiff + pot_l
    A_diag[1:] += -stiff + pot_r
    A_off += stiff + pot_off
    M_diag[:-1] += mass_l
    M_diag[1:] += mass_r
    M_off += mass_off

    # Dirichlet at R_trunc: drop the last unknown; natural condition at the
    # inner end (J -> 0 there makes the flux vanish on its own)
    return r, (A_diag[:-1], A_off[:-1]), (M_diag[:-1], M_off[:-1])


def top_eigenvalue(
    jd: JacobiData,
    R_trunc: float,
    nodes: int = 4000,
    shift: float = 0.05,
    max_iter: int = 500,
    tol: float = 1e-13,
) -> float:
    """Largest eigenvalue of the radial Delta + |A|^2 with Dirichlet wall.

    Shifted inverse iteration on the generalized symmetric pencil (A, M):
    repeatedly solve (shift*M - A) x = M x and take the Rayleigh quotient.
    The continuum operator is nonpositive, so the result should not exceed
    discretization noise.
    """
    if R_trunc > jd.grid[-1] / 2.0:
        raise ValueError("R_trunc must leave at least a factor 2 inside r_max")
    _, (A_d, A_o), (M_d, M_o) = _fem_matrices(jd, R_trunc, nodes)

    def make_banded(sig):
        ab = np.zeros((2, len(A_d)))
        ab[0, 1:] = sig * M_o - A_o
        ab[1, :] = sig * M_d - A_d
        return ab

    sig = shift
    for _ in range(3):
        try:
            ab = make_banded(sig)
            # probe the factorization once
            solveh_banded(ab, np.ones(len(A_d)))
            break
        except np.linalg.LinAlgError:
            sig *= 10.0
    else:
        raise NonConvergence("could not find a positive-definite shift")

    rng = np.random.default_rng(0)
    x = rng.standard_normal(len(A_d))
    lam_prev = np.inf
    ab = make_banded(sig)
    for _ in range(max_iter):
        mx = M_d * x
        mx[:-1] += M_o * x[1:]
        mx[1:] += M_o * x[:-1]
        x = solveh_banded(ab, mx)
        x /= np.sqrt(np.abs(x @ (M_d * x) + 2.0 * (x[:-1] * M_o * x[1:]).sum()))
        ax = A_d * x
        ax[:-1] += A_o * x[1:]
        ax[1:] += A_o * x[:-1]
        mx = M_d * x
        mx[:-1] += M_o * x[1:]
        mx[1:] += M_o * x[:-1]
        lam = float((x @ ax) / (x @ mx))
        if abs(lam - lam_prev) < tol * max(1.0, abs(lam)):
            return lam
        lam_prev = lam
    raise NonConvergence(f"inverse iteration did not settle in {max_iter} steps")


def rayleigh_quotient(jd: JacobiData, u_fn, R_trunc: float, nodes: int = 4000) -> float:
    """Rayleigh quotient of a trial function u(r) in the surface measure."""
    r, (A_d, A_o), (M_d, M_o) = _fem_matrices(jd, R_trunc, nodes)
    x = np.asarray(u_fn(r[:-1]), dtype=float)
    ax = A_d * x
    ax[:-1] += A_o * x[1:]
    ax[1:] += A_o * x[:-1]
    mx = M_d * x
    mx[:-1] += M_o * x[1:]
    mx[1:] += M_o * x[:-1]
    return float((x @ ax) / (x @ mx))
