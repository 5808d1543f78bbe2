"""Autonomous fourth-order reduction of the equivariant biharmonic map equation.

After the substitution psi(r) = phi(log r), the radial problem for an
O(d)-equivariant map into the sphere becomes an autonomous ODE for phi(s),

    phi'''' = q(phi) phi'' - f(phi) + (6 phi'' - (d-1) sin(2 phi)) (phi')^2
              + 2 (d-4) g(phi) phi' + 2 (d-4) (phi')^3 - 2 (d-4) phi''',

with the coefficient functions

    q(phi) = (d-1) cos(2 phi) - (d-11) d - 21,
    f(phi) = (3/2) (d-3) (d-1) sin(2 phi),
    g(phi) = ((d-1) cos(2 phi) + 3 d - 5) / 2,
    F(phi) = (3/2) (d-3) (d-1) sin(phi)^2        (antiderivative of f, F(0) = 0).

This module evaluates the field, its time-reversed companion, the Lyapunov
energy and its dissipation rate, the pi-shift/reflection symmetries, the
threshold c_star used by the blowup criterion, the linearizations at the two
families of equilibria, the classical second-order (harmonic map) analogue,
and the residual of the original radial equation.  Everything here is plain
floating point; certified bounds live in `intervals`/`certify`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Literal, Sequence

import numpy as np

__all__ = [
    "State",
    "EnergyBreakdown",
    "HarmonicState",
    "Linearization",
    "state",
    "coeff_q",
    "coeff_f",
    "coeff_g",
    "coeff_F",
    "coeff_q_prime",
    "vector_field",
    "reversed_vector_field",
    "energy",
    "symmetry_shift",
    "symmetry_reflect",
    "c_star",
    "linearization",
    "harmonic_field",
    "harmonic_energy",
    "psi_residual",
]

DIM_LO = 3
DIM_HI = 10

#: Parity-flip conjugacy between forward and reversed fields: J = diag(1,-1,1,-1).
REVERSAL_SIGNS = np.array([1.0, -1.0, 1.0, -1.0])


def _check_dim(d: int) -> None:
    if not isinstance(d, (int, np.integer)):
        raise TypeError(f"dimension must be an integer, got {type(d).__name__}")
    if not DIM_LO <= d <= DIM_HI:
        raise ValueError(f"dimension d={d} outside supported range [{DIM_LO}, {DIM_HI}]")


@dataclass(frozen=True, slots=True)
class State:
    """Jet (phi, phi', phi'', phi''') of a solution at one value of s."""

    phi: float
    dphi: float
    d2phi: float
    d3phi: float

    def __post_init__(self) -> None:
        for name in ("phi", "dphi", "d2phi", "d3phi"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ValueError(f"state component {name} is not finite: {v!r}")

    def as_array(self) -> np.ndarray:
        return np.array([self.phi, self.dphi, self.d2phi, self.d3phi])

    @classmethod
    def from_array(cls, x: Sequence[float] | np.ndarray) -> "State":
        a = np.asarray(x, dtype=float)
        if a.shape != (4,):
            raise ValueError(f"state needs exactly 4 components, got shape {a.shape}")
        return cls(float(a[0]), float(a[1]), float(a[2]), float(a[3]))


def state(phi: float, dphi: float, d2phi: float, d3phi: float) -> State:
    """Convenience constructor mirroring the jet order."""
    return State(phi, dphi, d2phi, d3phi)


def _components(x: "State | Sequence[float] | np.ndarray") -> tuple[float, float, float, float]:
    if isinstance(x, State):
        return x.phi, x.dphi, x.d2phi, x.d3phi
    a = np.asarray(x, dtype=float)
    if a.shape != (4,):
        raise ValueError(f"state needs exactly 4 components, got shape {a.shape}")
    return float(a[0]), float(a[1]), float(a[2]), float(a[3])


# ---------------------------------------------------------------------------
# Coefficient functions.  They accept scalars or numpy arrays.


def coeff_q(d: int, phi):
    """(d-1) cos(2 phi) - (d-11) d - 21."""
    _check_dim(d)
    return (d - 1) * np.cos(2.0 * phi) - (d - 11) * d - 21


def coeff_f(d: int, phi):
    """(3/2) (d-3) (d-1) sin(2 phi)."""
    _check_dim(d)
    return 1.5 * (d - 3) * (d - 1) * np.sin(2.0 * phi)


def coeff_g(d: int, phi):
    """((d-1) cos(2 phi) + 3 d - 5) / 2."""
    _check_dim(d)
    return 0.5 * ((d - 1) * np.cos(2.0 * phi) + 3 * d - 5)


def coeff_F(d: int, phi):
    """(3/2) (d-3) (d-1) sin(phi)^2, the antiderivative of f with F(0) = 0."""
    _check_dim(d)
    s = np.sin(phi)
    return 1.5 * (d - 3) * (d - 1) * s * s


def coeff_q_prime(d: int, phi):
    """d/dphi of coeff_q: -2 (d-1) sin(2 phi)."""
    _check_dim(d)
    return -2.0 * (d - 1) * np.sin(2.0 * phi)


# ---------------------------------------------------------------------------
# Vector fields.


def vector_field(d: int, x) -> np.ndarray:
    """First-order companion field of the autonomous equation.

    The returned 4-vector is (phi', phi'', phi''', phi'''') evaluated at x.
    """
    phi, v, y, w = _components(x)
    _check_dim(d)
    sin2 = math.sin(2.0 * phi)
    cos2 = math.cos(2.0 * phi)
    q = (d - 1) * cos2 - (d - 11) * d - 21
    f = 1.5 * (d - 3) * (d - 1) * sin2
    g2 = (d - 1) * cos2 + 3 * d - 5  # = 2 g(phi)
    acc = (
        q * y
        - f
        + (6.0 * y - (d - 1) * sin2) * v * v
        + (d - 4) * g2 * v
        + 2.0 * (d - 4) * v ** 3
        - 2.0 * (d - 4) * w
    )
    return np.array([v, y, w, acc])


def reversed_vector_field(d: int, x) -> np.ndarray:
    """Companion field of the s -> -s pullback.

    If u(sigma) := phi(-sigma) then u solves the same equation with the two
    odd-derivative forcing terms flipped in sign, which is what this field
    encodes; equivalently it equals -J vector_field(J x) with
    J = diag(1,-1,1,-1).
    """
    phi, v, y, w = _components(x)
    _check_dim(d)
    sin2 = math.sin(2.0 * phi)
    cos2 = math.cos(2.0 * phi)
    q = (d - 1) * cos2 - (d - 11) * d - 21
    f = 1.5 * (d - 3) * (d - 1) * sin2
    g2 = (d - 1) * cos2 + 3 * d - 5
    acc = (
        q * y
        - f
        + (6.0 * y - (d - 1) * sin2) * v * v
        - (d - 4) * g2 * v
        - 2.0 * (d - 4) * v ** 3
        + 2.0 * (d - 4) * w
    )
    return np.array([v, y, w, acc])


# ---------------------------------------------------------------------------
# Energy.


@dataclass(frozen=True, slots=True)
class EnergyBreakdown:
    """Lyapunov energy split into its pairing and potential parts.

    total == kinetic + potential exactly (the sum is stored, not recomputed),
    and rate is the analytic dissipation 2 (d-4) (phi''^2 + g phi'^2 + phi'^4),
    which vanishes identically at d = 4 and is nonnegative for d >= 5.
    """

    total: float
    kinetic: float
    potential: float
    rate: float


def energy(d: int, x) -> EnergyBreakdown:
    phi, v, y, w = _components(x)
    _check_dim(d)
    q = coeff_q(d, phi)
    kinetic = v * (w + 2.0 * (d - 4) * y - 0.5 * q * v - 1.5 * v ** 3)
    potential = coeff_F(d, phi) - 0.5 * y * y
    rate = 2.0 * (d - 4) * (y * y + coeff_g(d, phi) * v * v + v ** 4)
    return EnergyBreakdown(
        total=kinetic + potential, kinetic=kinetic, potential=potential, rate=rate
    )


# ---------------------------------------------------------------------------
# Symmetries.


def symmetry_shift(x, k: int) -> State:
    """phi -> phi + k pi leaves the equation (and energy) invariant."""
    phi, v, y, w = _components(x)
    return State(phi + k * math.pi, v, y, w)


def symmetry_reflect(x, k: int) -> State:
    """phi -> k pi - phi with all odd-order jet entries negated.

    The second derivative changes sign as well: the reflected solution is
    s |-> k pi - phi(s), so every derivative flips.
    """
    phi, v, y, w = _components(x)
    return State(k * math.pi - phi, -v, -y, -w)


# ---------------------------------------------------------------------------
# Blowup threshold.


def c_star(d: int) -> float:
    """Largest of the three closed-form thresholds entering the blowup test.

    c_star = max( max(-q'/12), max(f/q), max(sqrt(2 F)) )
           = max( (d-1)/6,
                  (3/2)(d-3)(d-1) / sqrt(b^2 - a^2),
                  sqrt(3 (d-3) (d-1)) )

    with a = d-1 and b = -(d-11) d - 21 (so q = a cos(2 phi) + b > 0).  The
    three maxima are exact: -q'/12 peaks at sin(2 phi) = 1; f/q is maximized
    where the tangent line from the origin touches, giving the sqrt(b^2-a^2)
    denominator; 2F peaks at phi = pi/2.  Only d in {5, 6, 7} is supported,
    matching where the certified estimates hold.
    """
    if d not in (5, 6, 7):
        raise ValueError(f"c_star requires d in {{5, 6, 7}}, got d={d}")
    a = float(d - 1)
    b = float(-(d - 11) * d - 21)
    m1 = (d - 1) / 6.0
    m2 = 1.5 * (d - 3) * (d - 1) / math.sqrt(b * b - a * a)
    m3 = math.sqrt(3.0 * (d - 3) * (d - 1))
    return max(m1, m2, m3)


# ---------------------------------------------------------------------------
# Linearizations at the equilibria phi = k pi (even) and phi = pi/2 + k pi (odd).


@dataclass(frozen=True, slots=True)
class Linearization:
    """Companion matrix of the linearized flow at an equilibrium family.

    For even parity the spectrum is {3, 1, 1-d, 3-d} with eigenvectors
    (1, lam, lam^2, lam^3); those are stored.  For odd parity only the matrix
    is provided (its spectrum is not needed in closed form anywhere).
    """

    parity: Literal["even", "odd"]
    matrix: np.ndarray
    eigenvalues: tuple[float, ...] | None
    eigenvectors: np.ndarray | None


def linearization(d: int, parity: Literal["even", "odd"]) -> Linearization:
    _check_dim(d)
    if parity not in ("even", "odd"):
        raise ValueError(f"parity must be 'even' or 'odd', got {parity!r}")
    if parity == "even":
        bottom = [
            -3.0 * (d - 3) * (d - 1),
            2.0 * (d - 4) * (2 * d - 3),
            -(d - 12.0) * d - 22.0,
            8.0 - 2.0 * d,
        ]
    else:
        bottom = [
            3.0 * (d - 3) * (d - 1),
            2.0 * (d - 4) * (d - 2),
            -(d - 10.0) * d - 20.0,
            8.0 - 2.0 * d,
        ]
    m = np.zeros((4, 4))
    m[0, 1] = m[1, 2] = m[2, 3] = 1.0
    m[3, :] = bottom
    if parity == "odd":
        return Linearization(parity="odd", matrix=m, eigenvalues=None, eigenvectors=None)
    lams = (3.0, 1.0, 1.0 - d, 3.0 - d)
    vecs = np.array([[lam ** k for lam in lams] for k in range(4)])
    return Linearization(parity="even", matrix=m, eigenvalues=lams, eigenvectors=vecs)


# ---------------------------------------------------------------------------
# Second-order (harmonic map) analogue.


@dataclass(frozen=True, slots=True)
class HarmonicState:
    phi: float
    dphi: float


def harmonic_field(d: int, h: HarmonicState) -> np.ndarray:
    """phi_H'' = ((d-1)/2) sin(2 phi_H) - (d-2) phi_H'."""
    _check_dim(d)
    return np.array(
        [h.dphi, 0.5 * (d - 1) * math.sin(2.0 * h.phi) - (d - 2) * h.dphi]
    )


def harmonic_energy(d: int, h: HarmonicState) -> tuple[float, float]:
    """Energy (1/2) phi_H'^2 + ((d-1)/2) cos^2(phi_H) and its rate -(d-2) phi_H'^2."""
    _check_dim(d)
    value = 0.5 * h.dphi ** 2 + 0.5 * (d - 1) * math.cos(h.phi) ** 2
    rate = -(d - 2) * h.dphi ** 2
    return value, rate


# ---------------------------------------------------------------------------
# Radial-equation residual.


def psi_residual(d: int, r: float, jet5: Iterable[float]) -> float:
    """Scaled defect of the radial equation at radius r.

    jet5 = (psi, psi', psi'', psi''', psi'''') in r-derivatives.  The raw
    defect is psi'''' minus

        6 psi'^2 psi'' + (2(d-1)/r) (psi'^3 - psi''')
        - ((d-1)/r^2) ((d - cos(2 psi) - 4) psi'' + sin(2 psi) psi'^2)
        + ((d-3)(d-1)/r^3) (cos(2 psi) + 2) psi'
        - (3 (d-3) (d-1) / (2 r^4)) sin(2 psi),

    divided by max(1, |psi''''|, |rhs|) so the value stays meaningful when the
    1/r^4 weights amplify floating-point cancellation near r = 0.  For
    moderate jets the scale factor is 1 and this is the plain difference;
    it is zero exactly when the jet satisfies the equation.
    """
    _check_dim(d)
    if not (isinstance(r, (int, float, np.floating)) and math.isfinite(r)):
        raise ValueError(f"radius must be a finite number, got {r!r}")
    if r <= 0:
        raise ValueError(f"radius must be positive, got {r}")
    p, dp, d2p, d3p, d4p = (float(t) for t in jet5)
    sin2 = math.sin(2.0 * p)
    cos2 = math.cos(2.0 * p)
    rhs = (
        6.0 * dp * dp * d2p
        + 2.0 * (d - 1) / r * (dp ** 3 - d3p)
        - (d - 1) / r ** 2 * ((d - cos2 - 4.0) * d2p + sin2 * dp * dp)
        + (d - 3) * (d - 1) / r ** 3 * (cos2 + 2.0) * dp
        - 1.5 * (d - 3) * (d - 1) / r ** 4 * sin2
    )
    scale = max(1.0, abs(d4p), abs(rhs))
    return (d4p - rhs) / scale
