"""Plane regions, tangent frames, and algebraic decompositions for d = 5.

The (phi, phi'') plane carries a lens-shaped open region bounded above by

    F(x) = 2 sqrt(6) sin(x)   for x in [0, pi/2],   F(x) = 2 sqrt(6)  beyond,

and below by -F(pi - x); orbits that leave it blow up, orbits of the
connecting solution stay inside.  Several changes of variables reduce the
fourth-order equation to damped second-order problems whose coefficient
positivity is certified in `certify`:

* the tangent-frame variable w = phi'' - y_line(phi), where y_line is the
  line tangent to the sine arc at phi0, satisfies  w'' = a w - 2 w' + P;
* the cone variable xi = phi'' - 3 phi satisfies
  xi'' = (6 phi'^2 + 4 cos(2 phi) + 6) xi - 2 xi' + Q(phi, phi').

This module evaluates all of those objects in plain floating point (numpy
broadcasting supported where useful) and checks the growth sandwich for the
cubic blowup polynomial p.  Residual helpers verify the decompositions along
trajectories; like `core.psi_residual` they scale by the magnitude of the
compared terms so the check stays meaningful at large states.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import core
from .config import BOUNDARY_TOL

__all__ = [
    "SQRT6",
    "GROWTH_C1",
    "Membership",
    "boundary_curve",
    "arc_height",
    "arc_slope",
    "region_gap",
    "in_region_C",
    "in_minus_C",
    "TangentFrame",
    "eval_a",
    "eval_P",
    "P_cubic_coefficients",
    "w_system_residual",
    "xi_value",
    "xi_prime",
    "eval_Q",
    "Q_cubic_coefficients",
    "xi_system_residual",
    "in_cone",
    "sos_identity_check",
    "p_value",
    "growth_bounds",
    "GrowthReport",
    "growth_bound_check",
]

SQRT6 = math.sqrt(6.0)

#: Constant of the growth sandwich
#:     6 (xi2 - c*) xi1^2 + xi1^3 / C1  <=  p  <=  6 xi1^2 xi2 + C1 (1 + xi2 + xi1^3)
#: for xi1 >= 0, xi2 >= c_star(d), d in {5, 6, 7}.  Smallest power of two that
#: clears a dense randomized sweep (tools/fit_growth_constant.py regenerates it).
GROWTH_C1 = 32.0


class Membership(enum.Enum):
    INSIDE = "inside"
    BOUNDARY = "boundary"
    OUTSIDE = "outside"


def boundary_curve(x):
    """Upper boundary height F(x) over [0, pi]: the sine arc capped at 2 sqrt(6)."""
    x = np.asarray(x, dtype=float)
    out = np.where(x <= math.pi / 2.0, 2.0 * SQRT6 * np.sin(x), 2.0 * SQRT6)
    return float(out) if out.ndim == 0 else out


def arc_height(phi0):
    """Height 2 sqrt(6) sin(phi0) of the sine arc at the tangency abscissa."""
    return 2.0 * SQRT6 * np.sin(phi0)


def arc_slope(phi0):
    """Slope 2 sqrt(6) cos(phi0) of the sine arc at the tangency abscissa."""
    return 2.0 * SQRT6 * np.cos(phi0)


def region_gap(x, y) -> float:
    """Signed margin to the region boundary: positive inside, zero on it.

    The region is {0 < x < pi, -F(pi - x) < y < F(x)}; the gap is the smallest
    of the four one-sided margins.
    """
    return min(
        float(x),
        math.pi - float(x),
        float(boundary_curve(x)) - float(y),
        float(y) + float(boundary_curve(math.pi - x)),
    )


def in_region_C(x: float, y: float, tol: float = BOUNDARY_TOL) -> Membership:
    g = region_gap(x, y)
    if abs(g) <= tol:
        return Membership.BOUNDARY
    return Membership.INSIDE if g > 0 else Membership.OUTSIDE


def in_minus_C(x: float, y: float, tol: float = BOUNDARY_TOL) -> Membership:
    """Membership in the antipodal copy, tested through (x, y) -> (-x, -y)."""
    return in_region_C(-x, -y, tol)


# ---------------------------------------------------------------------------
# Tangent frame.


@dataclass(frozen=True)
class TangentFrame:
    """Affine frame attached to the sine arc at abscissa phi0 in [0, pi/2].

    y_line is the tangent line to the arc at phi0; phi_max is where that line
    reaches the cap height 2 sqrt(6) (computed as phi0 + cos(phi0) /
    (1 + sin(phi0)), which is exact and stable at phi0 = pi/2 where the line
    is horizontal at the cap).
    """

    phi0: float
    y0: float = field(init=False)
    slope: float = field(init=False)
    phi_max: float = field(init=False)

    def __post_init__(self) -> None:
        if not 0.0 <= self.phi0 <= math.pi / 2.0:
            raise ValueError(f"tangency abscissa must lie in [0, pi/2], got {self.phi0}")
        object.__setattr__(self, "y0", float(arc_height(self.phi0)))
        object.__setattr__(self, "slope", float(arc_slope(self.phi0)))
        object.__setattr__(
            self,
            "phi_max",
            self.phi0 + math.cos(self.phi0) / (1.0 + math.sin(self.phi0)),
        )

    def y_line(self, phi):
        return self.slope * (np.asarray(phi, dtype=float) - self.phi0) + self.y0

    def w_value(self, x) -> float:
        """w = phi'' - y_line(phi) for a full jet."""
        s = core.State.from_array(x) if not isinstance(x, core.State) else x
        return s.d2phi - float(self.y_line(s.phi))


# ---------------------------------------------------------------------------
# Coefficients of the damped tangent-frame oscillator  w'' = a w - 2 w' + P.


def eval_a(phi0, phi, v):
    """a = 4 cos(2 phi) - 2 sqrt(6) cos(phi0) + 9 + 6 v^2."""
    phi0 = np.asarray(phi0, dtype=float)
    phi = np.asarray(phi, dtype=float)
    v = np.asarray(v, dtype=float)
    out = 4.0 * np.cos(2.0 * phi) - 2.0 * SQRT6 * np.cos(phi0) + 9.0 + 6.0 * v * v
    return float(out) if out.ndim == 0 else out


def P_cubic_coefficients(phi0, phi):
    """Coefficients (c0, c1, c2, c3) of P as a cubic in the velocity v."""
    phi0 = np.asarray(phi0, dtype=float)
    phi = np.asarray(phi, dtype=float)
    u = phi - phi0
    cos2 = np.cos(2.0 * phi)
    box = 4.0 * cos2 + 9.0
    c0 = (
        -12.0 * np.sin(2.0 * phi0)
        - 12.0 * (u + np.sin(2.0 * phi))
        + 2.0 * SQRT6 * u * box * np.cos(phi0)
        + 12.0 * (phi0 - phi) * np.cos(2.0 * phi0)
        + 2.0 * SQRT6 * box * np.sin(phi0)
    )
    c1 = 4.0 * cos2 - 4.0 * SQRT6 * np.cos(phi0) + 10.0
    c2 = 12.0 * SQRT6 * (np.sin(phi0) + u * np.cos(phi0)) - 4.0 * np.sin(2.0 * phi)
    c3 = np.full_like(c0, 2.0)
    return c0, c1, c2, c3


def eval_P(phi0, phi, v):
    """Forcing term of the tangent-frame oscillator, cubic in v."""
    c0, c1, c2, c3 = P_cubic_coefficients(phi0, phi)
    v = np.asarray(v, dtype=float)
    out = c0 + (c1 + (c2 + c3 * v) * v) * v
    return float(out) if out.ndim == 0 else out


def _scaled_gap(lhs: float, rhs: float) -> float:
    return (lhs - rhs) / max(1.0, abs(lhs), abs(rhs))


def w_system_residual(phi0: float, traj) -> float:
    """Largest scaled defect of w'' = a w - 2 w' + P along a d = 5 trajectory.

    w'' is assembled from the jet as phi'''' - slope * phi'', with phi''''
    taken from the vector field, so this checks that the substitution
    w = phi'' - y_line(phi) really transforms the equation as claimed.
    """
    if traj.d != 5:
        raise ValueError(f"tangent-frame decomposition requires d=5, got d={traj.d}")
    frame = TangentFrame(phi0)
    worst = 0.0
    for x in traj.states:
        phi, v, y, z = (float(c) for c in x)
        d4 = float(core.vector_field(5, x)[3])
        w = y - float(frame.y_line(phi))
        dw = z - frame.slope * v
        lhs = d4 - frame.slope * y
        rhs = eval_a(phi0, phi, v) * w - 2.0 * dw + eval_P(phi0, phi, v)
        worst = max(worst, abs(_scaled_gap(lhs, rhs)))
    return worst


# ---------------------------------------------------------------------------
# Cone decomposition  xi = phi'' - 3 phi.


def xi_value(x) -> float:
    s = core.State.from_array(x) if not isinstance(x, core.State) else x
    return s.d2phi - 3.0 * s.phi


def xi_prime(x) -> float:
    s = core.State.from_array(x) if not isinstance(x, core.State) else x
    return s.d3phi - 3.0 * s.dphi


def Q_cubic_coefficients(phi):
    """Coefficients (q0, q1, q2, q3) of Q as a cubic in the velocity v."""
    phi = np.asarray(phi, dtype=float)
    sin2 = np.sin(2.0 * phi)
    cos2 = np.cos(2.0 * phi)
    cosphi = np.cos(phi)
    q0 = 6.0 * (3.0 * phi - 2.0 * sin2 + 2.0 * phi * cos2)
    q1 = 8.0 * cosphi * cosphi
    q2 = 18.0 * phi - 4.0 * sin2
    q3 = np.full_like(q0, 2.0)
    return q0, q1, q2, q3


def eval_Q(phi, v):
    q0, q1, q2, q3 = Q_cubic_coefficients(phi)
    v = np.asarray(v, dtype=float)
    out = q0 + (q1 + (q2 + q3 * v) * v) * v
    return float(out) if out.ndim == 0 else out


def xi_system_residual(traj) -> float:
    """Largest scaled defect of xi'' = (6 v^2 + 4 cos(2 phi) + 6) xi - 2 xi' + Q."""
    if traj.d != 5:
        raise ValueError(f"cone decomposition requires d=5, got d={traj.d}")
    worst = 0.0
    for x in traj.states:
        phi, v, y, z = (float(c) for c in x)
        d4 = float(core.vector_field(5, x)[3])
        xi = y - 3.0 * phi
        dxi = z - 3.0 * v
        lhs = d4 - 3.0 * y
        rhs = (6.0 * v * v + 4.0 * math.cos(2.0 * phi) + 6.0) * xi - 2.0 * dxi + eval_Q(phi, v)
        worst = max(worst, abs(_scaled_gap(lhs, rhs)))
    return worst


def in_cone(x) -> bool:
    """True when (phi, phi'') and (phi', phi''') both sit in {u >= 0, w >= 3u}.

    Equivalent to phi, phi', xi, xi' all nonnegative.
    """
    s = core.State.from_array(x) if not isinstance(x, core.State) else x
    return s.phi >= 0.0 and s.dphi >= 0.0 and xi_value(s) >= 0.0 and xi_prime(s) >= 0.0


# ---------------------------------------------------------------------------
# Sum-of-squares certificate for the right-side exit estimate.


def sos_identity_check(y: float, v: float) -> tuple[float, float]:
    """Both sides of  y^2 - 4 y v + 7 v^2 + 3 v^4
                      = 3 v^4 + 7 (v - 2 y / 7)^2 + (3/7) y^2."""
    lhs = y * y - 4.0 * y * v + 7.0 * v * v + 3.0 * v ** 4
    rhs = 3.0 * v ** 4 + 7.0 * (v - 2.0 * y / 7.0) ** 2 + (3.0 / 7.0) * y * y
    return lhs, rhs


# ---------------------------------------------------------------------------
# Cubic blowup polynomial and its growth sandwich.


def p_value(d: int, xi0: float, xi1: float, xi2: float) -> float:
    """p = q xi2 - f + 6 xi2 xi1^2 + q'/2 xi1^2 + 2(d-4) g xi1 + 2(d-4) xi1^3.

    This is the second derivative of phi'' phi' along the flow written in the
    phase variables (xi0, xi1, xi2) = (phi, phi', phi''); its positivity and
    growth drive the finite-time blowup argument.
    """
    q = float(core.coeff_q(d, xi0))
    f = float(core.coeff_f(d, xi0))
    g = float(core.coeff_g(d, xi0))
    qp = float(core.coeff_q_prime(d, xi0))
    alpha = 2.0 * (d - 4)
    return q * xi2 - f + 6.0 * xi2 * xi1 ** 2 + 0.5 * qp * xi1 ** 2 + alpha * g * xi1 + alpha * xi1 ** 3


def growth_bounds(d: int, xi0: float, xi1: float, xi2: float) -> tuple[float, float, float]:
    """(lower, p, upper) of the growth sandwich at one phase point.

    Requires d in {5, 6, 7}, xi1 >= 0 and xi2 >= c_star(d); within that cone
    lower <= p <= upper holds with the module constant GROWTH_C1.
    """
    c0 = core.c_star(d)
    if xi1 < 0.0:
        raise ValueError(f"xi1 must be nonnegative, got {xi1}")
    if xi2 < c0:
        raise ValueError(f"xi2 must be at least c_star(d)={c0}, got {xi2}")
    value = p_value(d, xi0, xi1, xi2)
    lower = 6.0 * (xi2 - c0) * xi1 ** 2 + xi1 ** 3 / GROWTH_C1
    upper = 6.0 * xi1 ** 2 * xi2 + GROWTH_C1 * (1.0 + xi2 + xi1 ** 3)
    return lower, value, upper


@dataclass(frozen=True)
class GrowthReport:
    samples: int
    violations: int
    worst_lower_margin: float
    worst_upper_margin: float


def growth_bound_check(d: int, samples: int = 100_000, seed: int = 0) -> GrowthReport:
    """Sample the phase cone (xi1 >= 0, xi2 >= c_star) and check the sandwich.

    Draws mix moderate and large scales so the cubic terms dominate on part
    of the sweep; margins are the smallest slack seen on each side.
    """
    c0 = core.c_star(d)
    rng = np.random.default_rng(seed)
    n1 = samples // 2
    n2 = samples // 4
    n3 = samples - n1 - n2
    xi1 = np.concatenate(
        [rng.uniform(0.0, 3.0, n1), rng.uniform(0.0, 50.0, n2), rng.uniform(0.0, 1e3, n3)]
    )
    xi2 = c0 + np.concatenate(
        [rng.uniform(0.0, 3.0, n1), rng.uniform(0.0, 50.0, n2), rng.uniform(0.0, 1e3, n3)]
    )
    xi0 = rng.uniform(-10.0, 10.0, samples)
    q = core.coeff_q(d, xi0)
    f = core.coeff_f(d, xi0)
    g = core.coeff_g(d, xi0)
    qp = core.coeff_q_prime(d, xi0)
    alpha = 2.0 * (d - 4)
    p = q * xi2 - f + 6.0 * xi2 * xi1 ** 2 + 0.5 * qp * xi1 ** 2 + alpha * g * xi1 + alpha * xi1 ** 3
    lower = 6.0 * (xi2 - c0) * xi1 ** 2 + xi1 ** 3 / GROWTH_C1
    upper = 6.0 * xi1 ** 2 * xi2 + GROWTH_C1 * (1.0 + xi2 + xi1 ** 3)
    lo_margin = p - lower
    hi_margin = upper - p
    violations = int(np.sum(lo_margin < 0.0) + np.sum(hi_margin < 0.0))
    return GrowthReport(
        samples=samples,
        violations=violations,
        worst_lower_margin=float(np.min(lo_margin)),
        worst_upper_margin=float(np.min(hi_margin)),
    )
