"""Unstable-manifold seeding and heteroclinic shooting for the d = 5 flow.

The origin has a two-dimensional unstable manifold tangent to the
eigenvectors for the exponents 1 and 3.  We parameterize it to first order
by a circle of seeds at radius eps0, classify each seeded orbit by the sign
of the second derivative when |phi''| first reaches 2*sqrt(6), and locate
the connecting orbit (which tends to (pi/2, 0, 0, 0)) by bisection on that
sign.
"""

from __future__ import annotations

import csv
import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

from . import config, core, integrate, regions

__all__ = [
    "LocalChart",
    "CHART",
    "SeedSpec",
    "Outcome",
    "ClassificationResult",
    "seed_state",
    "theta0",
    "classify_orbit",
    "find_heteroclinic",
    "verify_unstable_decay",
    "classification_grid",
    "write_grid_csv",
]

_D = 5


@dataclass(frozen=True)
class LocalChart:
    """First-order chart of the unstable manifold at the origin.

    The manifold is a graph over the (phi, phi'') coordinates z = (z1, z2):
    the missing (phi', phi''') components are dw0 @ z up to cubic error.
    dw0 is determined by the eigenvectors eta3 (exponent 1) and eta4
    (exponent 3): a tangent vector a*eta3 + b*eta4 has z = (a+b, a+9b) and
    w = (a+3b, a+27b), and eliminating (a, b) gives w = (1/4)[[3,1],[-9,13]] z.
    """

    eta3: tuple[float, float, float, float] = (1.0, 1.0, 1.0, 1.0)
    eta4: tuple[float, float, float, float] = (1.0, 3.0, 9.0, 27.0)
    dw0: tuple[tuple[float, float], tuple[float, float]] = (
        (0.75, 0.25),
        (-2.25, 3.25),
    )


CHART = LocalChart()


@dataclass(frozen=True, slots=True)
class SeedSpec:
    """Polar coordinates of one seed on the chart circle of radius eps0."""

    eps0: float
    theta: float

    def __post_init__(self) -> None:
        if not (0.0 < self.eps0 <= 0.1) or not math.isfinite(self.eps0):
            raise ValueError(f"eps0 must lie in (0, 0.1], got {self.eps0}")
        if not math.isfinite(self.theta):
            raise ValueError(f"theta must be finite, got {self.theta}")


class Outcome(enum.Enum):
    BLOWUP_PLUS = "blowup_plus"
    BLOWUP_MINUS = "blowup_minus"
    HETEROCLINIC_CANDIDATE = "heteroclinic_candidate"
    UNDECIDED = "undecided"


@dataclass(frozen=True, slots=True)
class ClassificationResult:
    """What happened to one seeded orbit.

    tau is the first arclength with |phi''| >= 2*sqrt(6); g is the sign of
    phi'' there (+1 for the upward gate, -1 for the downward one).  Both are
    None when the run ended without reaching the gate.
    """

    theta: float
    outcome: Outcome
    tau: float | None
    g: int | None
    end_state: core.State
    note: str | None = None


def seed_state(spec: SeedSpec, chart: LocalChart = CHART) -> core.State:
    """Point on the first-order unstable chart at angle theta, radius eps0."""
    z1 = spec.eps0 * math.cos(spec.theta)
    z2 = spec.eps0 * math.sin(spec.theta)
    (m11, m12), (m21, m22) = chart.dw0
    w1 = m11 * z1 + m12 * z2
    w2 = m21 * z1 + m22 * z2
    return core.State(phi=z1, dphi=w1, d2phi=z2, d3phi=w2)


def theta0(eps0: float) -> float:
    """Unique angle in [0, pi/2] whose seed sits on the upper boundary arc.

    Solves 2*sqrt(6) sin(eps0 cos theta) = eps0 sin theta.  The left side
    decreases and the right side increases over [0, pi/2], so the bracket
    endpoints have opposite signs and the root is unique.
    """
    if not (0.0 < eps0 <= 0.1) or not math.isfinite(eps0):
        raise ValueError(f"eps0 must lie in (0, 0.1], got {eps0}")
    s6 = 2.0 * math.sqrt(6.0)

    def gap(theta: float) -> float:
        return s6 * math.sin(eps0 * math.cos(theta)) - eps0 * math.sin(theta)

    return float(brentq(gap, 0.0, 0.5 * math.pi, xtol=1e-15, rtol=8.9e-16))


_EVENT_TO_G = {
    integrate.EventKind.SECOND_DERIV_UP.value: 1,
    integrate.EventKind.SECOND_DERIV_DOWN.value: -1,
}

_TARGET = np.array([0.5 * math.pi, 0.0, 0.0, 0.0])


def _stays_in_region(traj: integrate.Trajectory) -> bool:
    for x in traj.states:
        if regions.in_region_C(float(x[0]), float(x[2])) is regions.Membership.OUTSIDE:
            return False
    return True


def classify_orbit(
    spec: SeedSpec,
    cfg: integrate.IntegrationConfig | None = None,
    chart: LocalChart = CHART,
) -> ClassificationResult:
    """Integrate one seed forward and report which way it left (d = 5).

    Stops at the first |phi''| = 2*sqrt(6) crossing and records its sign.
    A run that exhausts the span next to (pi/2, 0, 0, 0) while (phi, phi'')
    never left the trapping region is a heteroclinic candidate; anything
    else without a gate crossing is undecided.
    """
    cfg = cfg or integrate.IntegrationConfig()
    x0 = seed_state(spec, chart)
    watch = [integrate.EventKind.SECOND_DERIV_UP, integrate.EventKind.SECOND_DERIV_DOWN]
    try:
        traj = integrate.integrate(_D, x0, cfg=cfg, watch=watch)
    except integrate.IntegrationError as err:
        return ClassificationResult(
            theta=spec.theta,
            outcome=Outcome.UNDECIDED,
            tau=None,
            g=None,
            end_state=err.state_last,
            note=f"integration failed at s={err.s_last:.6g}: {err}",
        )
    end = traj.state_at_end()
    term = traj.termination
    if term.kind is integrate.TerminationKind.EVENT_STOP:
        g = _EVENT_TO_G[term.event]
        outcome = Outcome.BLOWUP_PLUS if g > 0 else Outcome.BLOWUP_MINUS
        return ClassificationResult(
            theta=spec.theta, outcome=outcome, tau=float(term.s_last), g=g, end_state=end
        )
    if term.kind is integrate.TerminationKind.SPAN_EXHAUSTED:
        dist = float(np.linalg.norm(end.as_array() - _TARGET))
        if dist <= config.HETEROCLINIC_TOL and _stays_in_region(traj):
            return ClassificationResult(
                theta=spec.theta,
                outcome=Outcome.HETEROCLINIC_CANDIDATE,
                tau=None,
                g=None,
                end_state=end,
            )
        return ClassificationResult(
            theta=spec.theta,
            outcome=Outcome.UNDECIDED,
            tau=None,
            g=None,
            end_state=end,
            note=f"span exhausted at distance {dist:.3e} from the target",
        )
    return ClassificationResult(
        theta=spec.theta,
        outcome=Outcome.UNDECIDED,
        tau=None,
        g=None,
        end_state=end,
        note=f"terminated by {term.kind.value} without a gate crossing",
    )


def find_heteroclinic(
    bracket: tuple[float, float] | None = None,
    theta_tol: float = config.THETA_TOL,
    cfg: integrate.IntegrationConfig | None = None,
    eps0: float = config.EPS0,
) -> tuple[float, ClassificationResult]:
    """Bisect the seed angle between a downward and an upward blowup.

    The bracket must classify with g = -1 on the left and g = +1 on the
    right.  An undecided midpoint (the span ran out deep inside the
    trapping region) means the connecting angle was straddled, so the
    bracket is narrowed on alternating sides.  Returns the midpoint of the
    final bracket together with its classification.
    """
    if not (theta_tol > 0.0 and math.isfinite(theta_tol)):
        raise ValueError(f"theta_tol must be positive, got {theta_tol}")
    if bracket is None:
        bracket = (-0.5 * math.pi, theta0(eps0) + 0.05)
    lo, hi = float(bracket[0]), float(bracket[1])
    if not lo < hi:
        raise ValueError(f"bracket must satisfy lo < hi, got ({lo}, {hi})")
    res_lo = classify_orbit(SeedSpec(eps0, lo), cfg)
    res_hi = classify_orbit(SeedSpec(eps0, hi), cfg)
    if res_lo.g != -1 or res_hi.g != 1:
        raise ValueError(
            "bracket does not straddle a sign change: "
            f"g({lo:.6g}) = {res_lo.g}, g({hi:.6g}) = {res_hi.g}"
        )
    shrink_lo = True
    while hi - lo > theta_tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        res = classify_orbit(SeedSpec(eps0, mid), cfg)
        if res.g == 1:
            hi = mid
        elif res.g == -1:
            lo = mid
        elif shrink_lo:
            lo, shrink_lo = mid, False
        else:
            hi, shrink_lo = mid, True
    theta_star = 0.5 * (lo + hi)
    return theta_star, classify_orbit(SeedSpec(eps0, theta_star), cfg)


def verify_unstable_decay(
    spec: SeedSpec,
    cfg: integrate.IntegrationConfig | None = None,
) -> tuple[float, float]:
    """Fit the backward decay rates of the two unstable eigen-projections.

    Integrates the seed in reversed time and least-squares fits
    log|projection| against arclength for the exponent-1 and exponent-3
    eigendirections.  The fit windows shrink with eps0: the seeding error
    is cubic in eps0 and grows backward at rate 4 (the strongest reversed
    exponent is -(1-d) = 4), so the exponent-lam projection is trustworthy
    while eps0^3 e^{4 s} << eps0 e^{-lam s}, i.e. up to roughly
    ln(eps0^-2)/(lam+4).  Projections that fall below the floating-point
    floor truncate the window further; a window with fewer than two samples
    yields nan.
    """
    traj = integrate.integrate_reversed(_D, seed_state(spec), cfg=cfg)
    sigma = np.abs(np.asarray(traj.s, dtype=float))
    lin = core.linearization(_D, "even")
    coords = np.linalg.solve(lin.eigenvectors, np.asarray(traj.states, dtype=float).T)
    horizon = math.log(spec.eps0 ** -2)
    rates = []
    for lam, row in ((1.0, coords[1]), (3.0, coords[0])):
        window = 0.8 * horizon / (lam + 4.0)
        mask = (sigma <= window) & (np.abs(row) > 1e-16)
        if int(mask.sum()) < 2:
            rates.append(float("nan"))
            continue
        slope = np.polyfit(sigma[mask], np.log(np.abs(row[mask])), 1)[0]
        rates.append(float(-slope))
    return rates[0], rates[1]


def classification_grid(
    thetas: Sequence[float],
    eps0: float = config.EPS0,
    cfg: integrate.IntegrationConfig | None = None,
    workers: int | None = None,
) -> list[ClassificationResult]:
    """Classify every angle in the grid; order follows the input."""
    workers = workers if workers is not None else config.default_workers()
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")
    specs = [SeedSpec(eps0, float(t)) for t in thetas]
    if workers == 1 or len(specs) <= 1:
        return [classify_orbit(sp, cfg) for sp in specs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda sp: classify_orbit(sp, cfg), specs))


def write_grid_csv(results: Sequence[ClassificationResult], path: str) -> None:
    """One row per classified angle; None fields are left empty."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["theta", "outcome", "g", "tau", "phi", "dphi", "d2phi", "d3phi"])
        for r in results:
            e = r.end_state
            writer.writerow(
                [
                    repr(float(r.theta)),
                    r.outcome.value,
                    "" if r.g is None else str(r.g),
                    "" if r.tau is None else repr(float(r.tau)),
                    repr(float(e.phi)),
                    repr(float(e.dphi)),
                    repr(float(e.d2phi)),
                    repr(float(e.d3phi)),
                ]
            )
