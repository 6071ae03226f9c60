"""Self-contained verification checks behind `mcf verify-all`.

Each check returns (name, passed, detail).  The quick tier touches only
closed forms and cheap quadrature; the full tier adds the minimal-surface,
Jacobi and flow cross-validations.  The pytest suite remains the complete
statement of acceptance; this module exists so an installed package can
vouch for itself without a checkout.
"""

from __future__ import annotations

import math

import numpy as np

from . import barriers, cone_heat, flow, geometry, jacobi
from .minimal_surface import integrate_profile, u0_profile
from .params import admissible_window_exists, derive_constants


def _check(name, passed, detail=""):
    return (name, bool(passed), detail)


def quick_checks() -> list[tuple[str, bool, str]]:
    out = []

    worst = 0.0
    for n in range(4, 65):
        p = derive_constants(n, 2)
        worst = max(worst, abs((p.mu + 0.5) - (n - 1 + p.alpha)))
    out.append(_check("constants: mu + 1/2 = n - 1 + alpha (n <= 64)", worst <= 1e-12,
                      f"max dev {worst:.2e}"))

    alphas = [abs(derive_constants(n, 2).alpha) for n in range(4, 65)]
    mono = all(a > b for a, b in zip(alphas, alphas[1:]))
    out.append(_check("constants: |alpha| strictly decreasing, -> 1",
                      mono and alphas[-1] < 1.02, f"|alpha(64)| = {alphas[-1]:.4f}"))

    k2_blocked = not any(admissible_window_exists(derive_constants(n, 2))
                         for n in (4, 5, 6, 7))
    k4_ok = admissible_window_exists(derive_constants(4, 4))
    k3_ok = all(admissible_window_exists(derive_constants(n, 3)) for n in (5, 6, 7))
    out.append(_check("constants: admissibility table (k=2 never, n=4 k=4 and n>=5 k=3 yes)",
                      k2_blocked and k4_ok and k3_ok))

    errs = []
    for n in (4, 5, 7):
        cone = geometry.curvature(n, geometry.ProfileJet(2.0, 2.0, 1.0, 0.0))
        errs.append(abs(cone.H))
        errs.append(abs(cone.A2 - (n - 1) / 4.0))
        cyl = geometry.curvature(n, geometry.ProfileJet(1.5, 0.7, 0.0, 0.0))
        errs.append(abs(cyl.H + (n - 1) / 0.7))
        R, r = 1.0, 0.6
        q = math.sqrt(R * R - r * r)
        sph = geometry.curvature(n, geometry.ProfileJet(r, q, -r / q, -1.0 / q**3))
        errs.append(abs(sph.H + (2 * n - 1) / R))
        errs.append(abs(sph.A2 - (2 * n - 1) / R**2))
    out.append(_check("curvature: cone/cylinder/sphere closed forms (n in {4,5,7})",
                      max(errs) <= 1e-10, f"max dev {max(errs):.2e}"))

    z = np.linspace(1e-6, 700.0, 500)
    rel = np.abs(cone_heat.bessel_I(0.5, z) / (np.sqrt(2.0 / (np.pi * z)) * np.sinh(z)) - 1.0)
    out.append(_check("bessel: half-integer closed form on [0, 700]",
                      float(rel.max()) <= 1e-10, f"max rel {rel.max():.2e}"))

    mass = cone_heat.stationary_mass(0.5, 1.0, 2.0)
    out.append(_check("heat kernel: stationary monomial mass", abs(mass - 2.0) <= 1e-6,
                      f"dev {abs(mass - 2.0):.2e}"))

    resmin = np.inf
    rng = np.random.default_rng(0)
    for n in (4, 5, 7):
        for k in (2, 3, 4):
            p = derive_constants(n, k)
            s = barriers.supersolution(p, 1.0)
            if abs(s.C1 - barriers.bracket_constant(n, p.lambda_k)) > 0.0:
                resmin = -np.inf
            ts = rng.uniform(0.0, 0.999, 2000)
            rs = s.validity_radius(ts) * (1.0 + rng.uniform(0.01, 30.0, ts.size))
            resmin = min(resmin, barriers.supersolution_residual(
                s, 2.0, np.column_stack([rs, ts])))
    out.append(_check("barriers: C1 bracket exact, residual >= -1e-12",
                      resmin >= -1e-12, f"min residual {resmin:.2e}"))

    ok = barriers.convexity_reduction_check(rng.uniform(0.0, 1e3, 100000))
    out.append(_check("barriers: convexity reduction on 1e5 samples", ok))
    return out


def full_checks() -> list[tuple[str, bool, str]]:
    out = quick_checks()

    mp = integrate_profile(4, 1.0, 200.0, tol=1e-10)
    u0 = u0_profile(mp)
    out.append(_check("minimal surface: convex, above cone, u0 > 0",
                      bool(np.all(mp.q2 > 0.0) and np.all(u0.u0 > 0.0))))
    out.append(_check("minimal surface: tail exponent within 5% of alpha",
                      abs(mp.alpha_fit / derive_constants(4, 2).alpha - 1.0) <= 0.05,
                      f"fit {mp.alpha_fit:.4f}"))

    jd = jacobi.assemble(mp)
    _, _, W, u0v, _, u0p, Wp = jd.coefficients_at(jd.grid)
    res = jacobi.apply_L(jd, u0v, jets=(u0p, (Wp + W**2) * u0v))
    out.append(_check("jacobi: L u0 = 0", float(np.abs(res).max()) <= 1e-6,
                      f"sup {np.abs(res).max():.2e}"))
    lam = jacobi.top_eigenvalue(jd, 50.0, nodes=4000)
    out.append(_check("jacobi: top eigenvalue <= 1e-3", lam <= 1e-3, f"lam {lam:.2e}"))

    r = np.linspace(0.0, 1.0, 501)
    st = flow.ProfileState(r=r, Q=np.full_like(r, math.sqrt(6.0)), t=0.0,
                           inner_bc=flow.BC("axis"), outer_bc=flow.BC("neumann0"))
    traj, diag = flow.evolve(st, 4, horizon=0.5, target=1e-8)
    rel = abs(diag.Qmin[-1] / math.sqrt(6.0 * 0.5) - 1.0)
    out.append(_check("flow: shrinking cylinder tracks sqrt(2(n-1)(T-t))",
                      rel <= 1e-4, f"rel {rel:.2e}"))

    p = derive_constants(4, 4)
    exp = cone_heat.decay_experiment(p, 1.0, np.geomspace(1.0, 30.0, 6))
    out.append(_check("heat kernel: decay slope -delta/2",
                      abs(exp.fit.exponent + 0.5) <= 0.075,
                      f"slope {exp.fit.exponent:+.4f}"))
    return out


def run(quick: bool = False) -> tuple[list[tuple[str, bool, str]], bool]:
    checks = quick_checks() if quick else full_checks()
    return checks, all(ok for _, ok, _ in checks)
