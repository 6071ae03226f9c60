import math

import numpy as np
import pytest

from mcflab.errors import NewtonDiverged, QNonPositive, WindowTooNarrow
from mcflab.flow import (
    BC,
    ProfileState,
    discrete_steady,
    evolve,
    fit_rate,
    from_inner,
    from_parabolic,
    profile_curvature,
    step,
    to_inner,
    to_parabolic,
)
from mcflab.params import derive_constants


def cylinder_state(n, T, nodes=101, rmax=1.0):
    r = np.linspace(0.0, rmax, nodes)
    return ProfileState(
        r=r,
        Q=np.full(nodes, math.sqrt(2.0 * (n - 1) * T)),
        t=0.0,
        inner_bc=BC("axis"),
        outer_bc=BC("neumann0"),
    )


def sphere_state(n, T, rmax=0.03, nodes=200):
    c2 = 2.0 * (2 * n - 1)
    r = np.linspace(0.0, rmax, nodes)

    def edge(t):
        return math.sqrt(c2 * (T - t) - rmax * rmax)

    return ProfileState(
        r=r,
        Q=np.sqrt(c2 * T - r * r),
        t=0.0,
        inner_bc=BC("axis"),
        outer_bc=BC("dirichlet", fn=edge),
    )


def test_cylinder_single_step():
    st = cylinder_state(4, 1.0)
    out = step(st, 1e-3, 4)
    exact = math.sqrt(6.0 * 0.999)
    assert float(np.abs(out.Q - exact).max()) <= 1e-7


def test_cone_stationary_over_unit_horizon():
    r = np.linspace(0.5, 5.0, 200)
    st = ProfileState(r=r, Q=r.copy(), t=0.0)
    traj, diag = evolve(st, 4, horizon=1.0, target=1e-8)
    assert float(np.abs(traj[-1].Q - r).max()) <= 1e-8
    assert float(diag.Hmax.max()) <= 1e-8
    assert float(diag.Amax.max() - diag.Amax.min()) <= 1e-8


def test_minimal_profile_stationary(profile_cache):
    # project the sampled profile onto the discrete steady state first: the
    # continuum samples are only an O(h^2) steady state of the discretization
    mp = profile_cache(4, 1.0, 100.0)
    r = np.geomspace(0.01, 20.0, 400)
    st = ProfileState(r=r, Q=mp.jet(r)[0], t=0.0)
    st0 = discrete_steady(4, st)
    projection_shift = float(np.abs(st0.Q - st.Q).max())
    assert projection_shift < 0.01  # the O(h^2) spatial consistency gap
    traj, diag = evolve(st0, 4, horizon=1.0, target=1e-9)
    assert float(np.abs(traj[-1].Q - st0.Q).max()) <= 1e-8


def test_cylinder_tracks_exact_law():
    st = cylinder_state(4, 1.0, nodes=501)
    traj, diag = evolve(st, 4, horizon=0.9, target=1e-8)
    exact = np.sqrt(6.0 * (1.0 - diag.times))
    rel = np.abs(diag.Qmin / exact - 1.0)
    assert float(rel.max()) <= 1e-4
    assert diag.T_est == pytest.approx(1.0, abs=1e-3)


def test_cylinder_curvature_rate():
    st = cylinder_state(4, 1.0, nodes=201)
    traj, diag = evolve(st, 4, horizon=0.99, target=1e-8)
    # |A| = (2(T-t))^{-1/2} exactly on the shrinking cylinder
    scaled = diag.Amax * np.sqrt(2.0 * (1.0 - diag.times))
    assert float(np.abs(scaled - 1.0).max()) <= 5e-3
    fit = fit_rate(diag.times, diag.Amax, T=1.0, window=(0.01, 1.0))
    assert fit.exponent == pytest.approx(-0.5, abs=0.005)


def test_sphere_shrinks_on_schedule():
    st = sphere_state(4, 1.0)
    traj, diag = evolve(st, 4, horizon=0.9, target=1e-8)
    # Qmin^2 = 2(2n-1)(T-t) - rmax^2, within 0.1% of 14(T-t)
    model = 14.0 * (1.0 - diag.times)
    rel = np.abs(diag.Qmin**2 / model - 1.0)
    assert float(rel.max()) <= 1e-3
    assert diag.T_est == pytest.approx(1.0, abs=1e-3)
    fit = fit_rate(diag.times, diag.Amax, T=1.0, window=(0.1, 1.0))
    assert fit.exponent == pytest.approx(-0.5, abs=0.005)
    # interior profile stays on the exact sphere
    errs = [
        np.abs(s.Q - np.sqrt(14.0 * (1.0 - s.t) - s.r**2)).max() for s in traj
    ]
    assert max(errs) <= 1e-6


def test_comparison_principle(rng):
    r = np.linspace(0.2, 2.0, 120)
    for _ in range(5):
        base = 1.0 + 0.3 * rng.uniform(0.2, 1.0) * np.sin(rng.uniform(1, 3) * r)
        gap = 0.05 + 0.1 * rng.uniform(0.0, 1.0, r.size)
        lo = ProfileState(r=r, Q=base, t=0.0)
        hi = ProfileState(r=r, Q=base + gap, t=0.0)
        tlo, _ = evolve(lo, 4, horizon=0.05, target=1e-8)
        thi, _ = evolve(hi, 4, horizon=0.05, target=1e-8)
        assert np.all(thi[-1].Q > tlo[-1].Q)


def test_refinement_convergence_order():
    # cylinder under simultaneous h, dt refinement; error is pure time error
    n, T = 4, 1.0
    errs, dts = [], []
    for k in range(4):
        nodes = 51 * 2**k
        dt = 0.02 / 2**k
        st = cylinder_state(n, T, nodes=nodes)
        t = 0.0
        while t < 0.5 - 1e-12:
            st = step(st, min(dt, 0.5 - t), n)
            t = st.t
        errs.append(float(np.abs(st.Q - math.sqrt(6.0 * 0.5)).max()))
        dts.append(dt)
    order = np.polyfit(np.log(dts), np.log(errs), 1)[0]
    assert order >= 1.9


def test_axis_slope_vanishes():
    st = sphere_state(4, 1.0)
    out = step(st, 1e-3, 4)
    h = out.r[1] - out.r[0]
    one_sided = (out.Q[1] - out.Q[0]) / h
    assert abs(one_sided) <= 2.0 * h  # O(h) one-sided slope of an even profile


def test_inner_rescaling_maps_scaled_profile_back(mp4):
    p = derive_constants(4, 4, T=1.0)
    t = 0.9
    lam = (p.T - t) ** (-(p.sigma_k + 0.5))
    r_nodes = mp4.grid[(mp4.grid > 0.0) & (mp4.grid < mp4.r_max / (2.0 * lam))]
    state = ProfileState(r=r_nodes, Q=mp4.jet(lam * r_nodes)[0] / lam, t=t)
    res = to_inner(state, p)
    expect = mp4.jet(res.x)[0]
    assert float(np.abs(res.y - expect).max()) <= 1e-10
    # explicit p-grid goes through cubic interpolation
    p_grid = np.geomspace(res.x[2], res.x[-3], 77)
    res2 = to_inner(state, p, p_grid=p_grid)
    assert float(np.abs(res2.y - mp4.jet(p_grid)[0]).max()) <= 1e-6


def test_rescaling_round_trips(rng):
    p = derive_constants(4, 2, T=1.0)
    r = np.linspace(0.5, 3.0, 80)
    Q = 1.0 + r + 0.1 * np.sin(r)
    st = ProfileState(r=r, Q=Q, t=0.3)
    back = from_inner(to_inner(st, p), p, t=0.3)
    assert float(np.abs(back.Q - Q).max()) <= 1e-13
    backp = from_parabolic(to_parabolic(st, p), p, t=0.3)
    assert float(np.abs(backp.Q - Q).max()) <= 1e-13


def test_cone_is_parabolic_fixed_point():
    p = derive_constants(4, 2, T=1.0)
    r = np.linspace(0.3, 4.0, 60)
    st = ProfileState(r=r, Q=r.copy(), t=0.77)
    res = to_parabolic(st, p)
    assert float(np.abs(res.y - res.x).max()) == 0.0


def test_inner_time_variable():
    # s(t) = (T-t)^(-2 sigma)/(2 sigma): n=4, k=4, t=0.99 -> 1292.6608...
    p = derive_constants(4, 4, T=1.0)
    st = ProfileState(r=np.array([1.0, 2.0]), Q=np.array([1.5, 2.5]), t=0.99)
    s = to_inner(st, p).s
    assert s == pytest.approx(0.6 * 100.0 ** (5.0 / 3.0), rel=1e-12)


def test_fit_rate_synthetic_and_guard():
    T = 2.0
    times = np.linspace(0.0, 1.9, 60)
    M = (T - times) ** (-4.0 / 3.0)
    fit = fit_rate(times, M, T)
    assert fit.exponent == pytest.approx(-4.0 / 3.0, abs=1e-12)
    assert fit.resid <= 1e-12
    with pytest.raises(WindowTooNarrow):
        fit_rate(times[:5], M[:5], T)


def test_step_past_singularity_raises():
    st = cylinder_state(4, 0.01, nodes=21)
    with pytest.raises((NewtonDiverged, QNonPositive)):
        step(st, 0.02, 4)  # dt beyond the cylinder's whole lifetime


def test_state_validation():
    with pytest.raises(QNonPositive):
        ProfileState(r=np.array([0.0, 1.0]), Q=np.array([1.0, -1.0]), t=0.0)
    with pytest.raises(ValueError):
        ProfileState(r=np.array([1.0, 0.5]), Q=np.array([1.0, 1.0]), t=0.0)
    with pytest.raises(ValueError):
        ProfileState(
            r=np.array([0.5, 1.0]), Q=np.array([1.0, 1.0]), t=0.0, inner_bc=BC("axis")
        )
    with pytest.raises(ValueError):
        BC("dirichlet")


def test_diagnostics_consistency():
    st = sphere_state(4, 1.0)
    _, diag = evolve(st, 4, horizon=0.5, target=1e-8)
    assert np.all(diag.Amax >= diag.Hmax / math.sqrt(7.0) - 1e-12)


def test_profile_curvature_matches_geometry():
    from mcflab.geometry import ProfileJet, curvature

    r = np.linspace(0.0, 1.0, 50)
    Q = np.sqrt(14.0 - r * r)
    H, A2 = profile_curvature(4, r, Q)
    d = curvature(4, ProfileJet(0.5, math.sqrt(14.0 - 0.25), -0.5 / math.sqrt(13.75), -14.0 / 13.75**1.5))
    i = np.argmin(np.abs(r - 0.5))
    assert H[i] == pytest.approx(d.H, rel=1e-3)
    assert A2[i] == pytest.approx(d.A2, rel=1e-3)
