import math

import numpy as np
import pytest

from mcflab.errors import BranchAmbiguous, GridMismatch
from mcflab.jacobi import (
    apply_L,
    assemble,
    envelope_constants,
    generalized_kernel,
    indicial_roots,
    invert_L,
    rayleigh_quotient,
    top_eigenvalue,
    wronskian,
)


def u0_jets(jd):
    _, _, W, u0, _, u0p, Wp = jd.coefficients_at(jd.grid)
    return u0, u0p, (Wp + W * W) * u0


def test_envelope_and_asymptotics(jd4):
    c, C = envelope_constants(jd4)
    assert 0.0 < c <= C
    n = jd4.n
    # area density ~ b^{n-1} r^{n-1} near the axis
    i = int(np.argmin(np.abs(jd4.grid - jd4.mp.b / 50.0)))
    ratio = jd4.J[i] / jd4.grid[i] ** (n - 1)
    assert ratio == pytest.approx(jd4.mp.b ** (n - 1), rel=0.01)
    # potential ~ 2(n-1)/r^2 far out
    assert jd4.V[-1] * jd4.grid[-1] ** 2 == pytest.approx(2.0 * (n - 1), rel=0.05)
    assert np.all(jd4.V > 0.0)
    # log-derivative of u0 ~ alpha/r far out, negative there
    assert jd4.W[-1] * jd4.grid[-1] == pytest.approx(-2.0, rel=0.05)
    assert np.all(jd4.W[jd4.grid > 10.0] < 0.0)


def test_axis_potential_value(jd4):
    b, n = jd4.mp.b, jd4.n
    q2_axis = (n - 1) / (n * b)
    expected = n * q2_axis**2 + (n - 1) / b**2
    assert jd4.V0 == pytest.approx(expected, rel=1e-12)
    # one-sided extrapolation of the sampled V toward r = 0 agrees
    assert jd4.V[0] == pytest.approx(jd4.V0, rel=1e-4)


def test_L_u0_annihilated(jd4):
    u0, u0p, u0pp = u0_jets(jd4)
    res = apply_L(jd4, u0, jets=(u0p, u0pp))
    assert float(np.abs(res).max()) <= 1e-6


def test_L_u0_finite_difference(jd4):
    res = apply_L(jd4, jd4.u0)
    mid = (jd4.grid > 10.0 * jd4.grid[0]) & (jd4.grid < jd4.grid[-1] / 10.0)
    assert float(np.abs(res[mid]).max()) <= 1e-4


def test_apply_L_grid_mismatch(jd4):
    with pytest.raises(GridMismatch):
        apply_L(jd4, np.ones(7))


def test_invert_zero(jd4):
    out = invert_L(jd4, np.zeros_like(jd4.grid))
    assert np.all(out == 0.0)


def test_invert_roundtrip_bump(jd4):
    r = jd4.grid
    f = np.exp(-((np.log(r / 3.0)) ** 2) * 4.0)
    u, parts = invert_L(jd4, f, return_parts=True)
    assert parts.integrable_branch  # bump decays, so (A*)^{-1}f/u0 ~ r^{-2}
    back = apply_L(jd4, u)
    span = r[-1] / r[0]
    mid = (r >= r[0] * span**0.25) & (r <= r[0] * span**0.75)
    rel = np.abs(back[mid] - f[mid]) / np.abs(f).max()
    assert float(rel.max()) <= 1e-5


def test_branch_ambiguous(jd4):
    # force (A*)^{-1}f/u0 ~ r^{-1}: f ~ 1/(J u0) ~ r^{-4} far out (n=4)
    r = jd4.grid
    f = 1.0 / (1.0 + r) ** 4
    with pytest.raises(BranchAmbiguous):
        invert_L(jd4, f)


def test_generalized_kernel_exponents(jd4):
    elems = generalized_kernel(jd4, 3)
    alpha = -2.0
    for e in elems:
        inner_t = 2.0 * e.j
        outer_t = 2.0 * e.j + alpha
        assert abs(e.inner_fit.exponent - inner_t) <= 0.05 * max(1.0, abs(inner_t))
        assert abs(e.outer_fit.exponent - outer_t) <= 0.05 * max(1.0, abs(outer_t))
        if e.j > 0:
            assert np.all(e.u[1:] > 0.0)
    # ladder climbs by 2 per rung
    outers = [e.outer_fit.exponent for e in elems]
    steps = np.diff(outers)
    assert np.all(np.abs(steps - 2.0) <= 0.05 * 2.0)


def test_generalized_kernel_residuals(jd4):
    elems = generalized_kernel(jd4, 3)
    mid = (jd4.grid > 10.0 * jd4.grid[0]) & (jd4.grid < jd4.grid[-1] / 10.0)
    for j in range(1, 4):
        lhs = apply_L(jd4, elems[j].u)
        rhs = jd4.s * elems[j - 1].u
        rel = np.abs(lhs[mid] - rhs[mid]) / np.abs(rhs[mid]).max()
        assert float(rel.max()) <= 1e-5, f"u_{j} residual {rel.max():.2e}"


def test_generalized_kernel_domain_guard(profile_cache):
    mp = profile_cache(4, 1.0, 200.0)
    jd = assemble(mp)
    with pytest.raises(ValueError, match="r_max"):
        generalized_kernel(jd, 3)


def test_indicial_roots_closed_form():
    roots4 = indicial_roots(4)
    assert roots4.at_infinity == pytest.approx((-2.0, -3.0), abs=1e-14)
    assert roots4.at_zero == (0.0, -2.0)
    roots5 = indicial_roots(5)
    assert roots5.at_infinity[1] == pytest.approx(0.5 * (-7.0 - math.sqrt(17.0)), abs=1e-12)


def test_singular_solution_and_wronskian(jd4):
    roots = indicial_roots(4, jd4)
    assert roots.inner_fit.exponent == pytest.approx(-2.0, rel=0.05)
    # apply_L on v0 samples vanishes away from the endpoints
    res = apply_L(jd4, roots.v0)
    mid = (jd4.grid > 10.0 * jd4.grid[0]) & (jd4.grid < jd4.grid[-1] / 10.0)
    scale = np.abs(jd4.V[mid] * roots.v0[mid])
    assert float((np.abs(res[mid]) / scale).max()) <= 1e-4
    w = wronskian(jd4, roots)
    probes = w[np.linspace(0, len(w) - 1, 10).astype(int)]
    assert (probes.max() - probes.min()) <= 0.01 * np.abs(probes).max()


def _bump(r, center, width):
    """C^infty bump in log r together with its exact r-derivative."""
    x = (np.log(r) - np.log(center)) / width
    inside = np.abs(x) < 1.0
    g = np.where(inside, 1.0 - x * x, 1.0)
    vals = np.where(inside, np.exp(-1.0 / g), 0.0)
    dvals_dxi = np.where(inside, vals * (-2.0 * x / g**2) / width, 0.0)
    return vals, dvals_dxi / r


def test_adjunction_identity(jd4):
    # int (Au) v J dr = int u (A*v) J dr for compactly supported smooth u, v
    fine = jd4._fine
    r, J, W, s = fine["r"], fine["J"], fine["W"], fine["s"]
    xi = fine["xi"]
    rng = np.random.default_rng(11)
    from scipy.integrate import simpson

    for _ in range(5):
        c1, c2 = np.exp(rng.uniform(np.log(0.5), np.log(50.0), 2))
        u, du = _bump(r, c1, 1.0)
        v, dv = _bump(r, c2, 1.2)
        Au = -du + W * u
        Astar_v = dv + (jd4.n - 1) * s / r * v + W * v
        lhs = simpson(Au * v * J * r, x=xi)
        rhs = simpson(u * Astar_v * J * r, x=xi)
        scale = max(abs(lhs), abs(rhs), 1e-30)
        assert abs(lhs - rhs) <= 1e-8 * scale


def test_factorization_identity(jd4):
    # L u = -A*(A u) pointwise, using exact derivative bookkeeping
    r = jd4.grid
    J, V, W, u0, s, u0p, Wp = jd4.coefficients_at(r)
    jlog = (jd4.n - 1) * s / r
    rng = np.random.default_rng(13)
    worst = 0.0
    for _ in range(200):
        a, b, c = rng.uniform(0.3, 3.0, 3)
        u = np.sin(a * r) * np.exp(-b * r) + c * np.exp(-r)
        u1 = a * np.cos(a * r) * np.exp(-b * r) - b * np.sin(a * r) * np.exp(-b * r) - c * np.exp(-r)
        u2 = (
            -a * a * np.sin(a * r) * np.exp(-b * r)
            - 2 * a * b * np.cos(a * r) * np.exp(-b * r)
            + b * b * np.sin(a * r) * np.exp(-b * r)
            + c * np.exp(-r)
        )
        Lu = u2 + jlog * u1 + V * u
        Au = -u1 + W * u
        dAu = -u2 + Wp * u + W * u1
        AstarAu = dAu + jlog * Au + W * Au
        resid = np.abs(Lu + AstarAu).max()
        worst = max(worst, resid / (1.0 + np.abs(u2).max()))
    assert worst <= 1e-8


def test_top_eigenvalue_bound(jd4):
    lam = top_eigenvalue(jd4, 50.0, nodes=4000)
    assert lam <= 1e-3
    lam25 = top_eigenvalue(jd4, 25.0, nodes=2000)
    assert lam25 <= lam + 1e-6


def test_top_eigenvalue_guard(jd4):
    with pytest.raises(ValueError, match="factor 2"):
        top_eigenvalue(jd4, jd4.grid[-1], nodes=100)


def test_rayleigh_quotient_of_cutoff_u0(jd4):
    # u0 is an exact null vector; a wide smooth cutoff at R/2 costs O(R^-2)
    mp = jd4.mp
    R = 400.0

    def trial(r):
        q, q1, _ = mp.jet(r)
        u0 = (q - r * q1) / np.sqrt(1.0 + q1 * q1)
        x = np.clip(r / (R / 2.0), 0.0, 1.0)
        return u0 * np.cos(0.5 * np.pi * x) ** 2

    val = rayleigh_quotient(jd4, trial, R, nodes=4000)
    assert abs(val) <= 1e-3
