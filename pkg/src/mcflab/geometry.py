"""Radial curvature calculus for O(n)xO(n)-invariant hypersurfaces.

A hypersurface of this symmetry class in R^{2n} is the graph y = Q(|x|) of a
positive profile over the first factor.  In the orthonormal radial frame the
shape operator is diagonal with principal curvatures

    k_r     = Q'' / (1+Q'^2)^{3/2}          (radial direction, once)
    k_omega = Q' / (r sqrt(1+Q'^2))         ((n-1)-fold, first sphere)
    k_theta = -1 / (Q sqrt(1+Q'^2))         ((n-1)-fold, second sphere)

so H = k_r + (n-1)(k_omega + k_theta) and |A|^2 is the sum of squares with
the same multiplicities.  Everything here is a pure function of a pointwise
2-jet of Q; callers decide whether jets come from formulas or from finite
differences, which keeps discretization error out of this module.

Sign convention: the unit normal is (-Q' x/|x|, theta)/sqrt(1+Q'^2), so the
round sphere of radius R has H = -(2n-1)/R.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fitting import RateFit  # noqa: F401  (re-exported for norm reports)


@dataclass(frozen=True)
class ProfileJet:
    """Pointwise 2-jet (Q, Q', Q'') of a profile function at radius r."""

    r: float
    q: float
    q1: float
    q2: float

    def validate(self) -> None:
        if self.q <= 0.0:
            raise ValueError(f"profile value must be positive, got Q={self.q:g}")
        if self.r < 0.0:
            raise ValueError(f"radius must be nonnegative, got r={self.r:g}")
        if self.r == 0.0 and self.q1 != 0.0:
            raise ValueError(
                "smoothness at the axis requires Q'(0) = 0, got "
                f"Q'(0)={self.q1:g}"
            )


@dataclass(frozen=True)
class CurvatureData:
    """Metric entry, second-fundamental-form entries, H and |A|^2 at a point.

    a_rr, a_omega, a_theta are the covariant entries of A in the block frame
    (radial, one omega-sphere direction with metric r^2, one theta-sphere
    direction with metric Q^2); g_rr = 1+Q'^2 is the radial metric entry.
    """

    g_rr: float
    a_rr: float
    a_omega: float
    a_theta: float
    H: float
    A2: float


def curvature(n: int, jet: ProfileJet) -> CurvatureData:
    """Mean curvature and |A|^2 from a profile 2-jet.

    At r = 0 the removable singularity Q'/r -> Q''(0) is taken, which is the
    only value consistent with smoothness (odd derivatives vanish there).
    """
    jet.validate()
    r, q, q1, q2 = jet.r, jet.q, jet.q1, jet.q2
    s = 1.0 + q1 * q1
    sq = np.sqrt(s)

    k_r = q2 / (s * sq)
    if r > 0.0:
        k_omega = q1 / (r * sq)
    else:
        # axis limit: Q'(0) = 0 and Q'(r)/r -> Q''(0)
        k_omega = q2 / sq
    k_theta = -1.0 / (q * sq)

    H = k_r + (n - 1) * (k_omega + k_theta)
    A2 = k_r * k_r + (n - 1) * (k_omega * k_omega + k_theta * k_theta)
    return CurvatureData(
        g_rr=s,
        a_rr=q2 / sq,
        a_omega=q1 * r / sq,
        a_theta=-q / sq,
        H=float(H),
        A2=float(A2),
    )


def unit_normal(jet: ProfileJet) -> tuple[float, float]:
    """Components (radial, spherical) of the unit normal; unit length by construction."""
    sq = np.sqrt(1.0 + jet.q1 * jet.q1)
    return (-jet.q1 / sq, 1.0 / sq)


def normal_position(jet: ProfileJet) -> float:
    """Normal component of the position vector, (Q - r Q')/sqrt(1+Q'^2).

    On a minimal profile this is the positive kernel element of the Jacobi
    operator (the dilation field paired with the normal).
    """
    return (jet.q - jet.r * jet.q1) / np.sqrt(1.0 + jet.q1 * jet.q1)


def laplace_beltrami_radial(n: int, jet: ProfileJet, u_jet) -> float:
    """Surface Laplacian of a radial function u from its 2-jet.

    Full four-term expression

        (u'' + (n-1) u'/r - Q'Q'' u'/(1+Q'^2) + (n-1) (Q'/Q) u') / (1+Q'^2)

    valid on any profile; when the profile satisfies the minimal-surface
    equation this collapses to u''/(1+Q'^2) + (n-1) u'/r.
    """
    if jet.r <= 0.0:
        raise ValueError("laplace_beltrami_radial needs r > 0")
    u, u1, u2 = u_jet
    r, q, q1, q2 = jet.r, jet.q, jet.q1, jet.q2
    s = 1.0 + q1 * q1
    return (u2 + (n - 1) * u1 / r - q1 * q2 * u1 / s + (n - 1) * (q1 / q) * u1) / s


def minimal_laplace_beltrami_radial(n: int, jet: ProfileJet, u_jet) -> float:
    """Two-term form u''/(1+Q'^2) + (n-1)u'/r, exact on minimal profiles."""
    if jet.r <= 0.0:
        raise ValueError("minimal_laplace_beltrami_radial needs r > 0")
    _, u1, u2 = u_jet
    return u2 / (1.0 + jet.q1 * jet.q1) + (n - 1) * u1 / jet.r


@dataclass(frozen=True)
class DistanceEquivalence:
    """Radial-path arclength versus the Lipschitz bound C |x|."""

    C: float
    max_ratio_violation: float
    arclength: np.ndarray


def distance_equivalence(r, q, q1=None) -> DistanceEquivalence:
    """Check arclength(0 -> r) <= sqrt(1 + max|Q'|^2) * r on sampled data.

    The intrinsic distance from a point to the axis slice is bounded by the
    arclength of the radial path, int_0^r sqrt(1+Q'^2), which in turn is
    bounded by C r with C = sqrt(1 + sup Q'^2).  max_ratio_violation is
    max over nodes of arclength/(C r) - 1 and should be <= 0 up to roundoff.
    """
    r = np.asarray(r, dtype=float)
    q = np.asarray(q, dtype=float)
    if q1 is None:
        q1 = np.gradient(q, r)
    q1 = np.asarray(q1, dtype=float)
    speed = np.sqrt(1.0 + q1 * q1)
    C = float(speed.max())
    arclength = np.concatenate(
        [[0.0], np.cumsum(0.5 * (speed[1:] + speed[:-1]) * np.diff(r))]
    )
    if r[0] > 0.0:
        # path starts at the axis; extend with the first sampled slope
        arclength = arclength + speed[0] * r[0]
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(r > 0.0, arclength / (C * r), 1.0)
    return DistanceEquivalence(
        C=C,
        max_ratio_violation=float(ratio.max() - 1.0),
        arclength=arclength,
    )


@dataclass(frozen=True)
class WeightedNormReport:
    """sup over samples of (1+r)^a |u|."""

    a: float
    value: float


def weighted_sup_norm(r, u, a: float) -> WeightedNormReport:
    """Discrete weighted sup norm max_i (1+r_i)^a |u_i|."""
    r = np.asarray(r, dtype=float)
    u = np.asarray(u, dtype=float)
    if r.size == 0:
        raise ValueError("weighted_sup_norm needs at least one sample")
    return WeightedNormReport(a=float(a), value=float(np.max((1.0 + r) ** a * np.abs(u))))


def fd_jet(r, q, i: int) -> ProfileJet:
    """Second-order finite-difference 2-jet at interior node i of a sampled profile."""
    r = np.asarray(r, dtype=float)
    q = np.asarray(q, dtype=float)
    if not (0 < i < len(r) - 1):
        raise ValueError("fd_jet needs an interior node")
    hm = r[i] - r[i - 1]
    hp = r[i + 1] - r[i]
    q1 = (
        -hp / (hm * (hm + hp)) * q[i - 1]
        + (hp - hm) / (hm * hp) * q[i]
        + hm / (hp * (hm + hp)) * q[i + 1]
    )
    q2 = 2.0 * (
        q[i - 1] / (hm * (hm + hp)) - q[i] / (hm * hp) + q[i + 1] / (hp * (hm + hp))
    )
    return ProfileJet(r=float(r[i]), q=float(q[i]), q1=float(q1), q2=float(q2))
