"""Outward-rounded interval arithmetic for the certification engine.

Directed rounding modes are not portably controllable from Python, so every
elementary operation computes endpoint candidates in double precision and
then inflates the result by one step in each direction with
`math.nextafter`.  Library endpoint evaluations (sin, cos, sqrt) are inflated
by two steps since their rounding is not guaranteed correctly rounded by the
platform.  The resulting intervals are never tight to the last bit, which is
fine: soundness (the exact real result lies inside) is the contract,
tightness within a couple of ulps per operation is the quality target.

Transcendental constants are provided as two-endpoint enclosures: `pi_iv`
brackets pi (math.pi itself rounds down), `sqrt6_iv` brackets sqrt(6).  Boxes
are ordered tuples of intervals; bisection always splits the widest
dimension at the floating-point midpoint.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

__all__ = [
    "Interval",
    "Box",
    "TaylorEnclosure",
    "pi_iv",
    "half_pi_iv",
    "eighth_pi_iv",
    "sqrt6_iv",
    "sin_taylor",
    "cos_taylor",
]

_INF = math.inf


def _dn(x: float) -> float:
    return math.nextafter(x, -_INF)


def _up(x: float) -> float:
    return math.nextafter(x, _INF)


def _dn2(x: float) -> float:
    return _dn(_dn(x))


def _up2(x: float) -> float:
    return _up(_up(x))


@dataclass(frozen=True, slots=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise ValueError(f"interval endpoints must be finite, got [{self.lo}, {self.hi}]")
        if self.lo > self.hi:
            raise ValueError(f"inverted interval [{self.lo}, {self.hi}]")

    # -- construction -------------------------------------------------------

    @staticmethod
    def point(x: float) -> "Interval":
        return Interval(float(x), float(x))

    @staticmethod
    def _coerce(x) -> "Interval":
        if isinstance(x, Interval):
            return x
        if isinstance(x, (int, float)):
            return Interval.point(x)
        raise TypeError(f"cannot treat {x!r} as an interval")

    # -- queries -------------------------------------------------------------

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def midpoint(self) -> float:
        m = 0.5 * (self.lo + self.hi)
        return min(max(m, self.lo), self.hi)

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi

    def encloses(self, other: "Interval") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi

    def intersects(self, other: "Interval") -> bool:
        return self.lo <= other.hi and other.lo <= self.hi

    def hull(self, other: "Interval") -> "Interval":
        return Interval(min(self.lo, other.lo), max(self.hi, other.hi))

    # -- arithmetic -----------------------------------------------------------

    def __neg__(self) -> "Interval":
        return Interval(-self.hi, -self.lo)

    def __add__(self, other) -> "Interval":
        o = Interval._coerce(other)
        return Interval(_dn(self.lo + o.lo), _up(self.hi + o.hi))

    __radd__ = __add__

    def __sub__(self, other) -> "Interval":
        o = Interval._coerce(other)
        return Interval(_dn(self.lo - o.hi), _up(self.hi - o.lo))

    def __rsub__(self, other) -> "Interval":
        return Interval._coerce(other) - self

    def __mul__(self, other) -> "Interval":
        o = Interval._coerce(other)
        cands = (self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi)
        return Interval(_dn(min(cands)), _up(max(cands)))

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Interval":
        o = Interval._coerce(other)
        if o.lo <= 0.0 <= o.hi:
            raise ZeroDivisionError(f"division by interval containing zero: [{o.lo}, {o.hi}]")
        cands = (self.lo / o.lo, self.lo / o.hi, self.hi / o.lo, self.hi / o.hi)
        return Interval(_dn(min(cands)), _up(max(cands)))

    def __rtruediv__(self, other) -> "Interval":
        return Interval._coerce(other) / self

    def power(self, n: int) -> "Interval":
        """x^n for integer n >= 0 by directed repeated multiplication.

        All endpoint products run over nonnegative bases (negative ranges are
        reflected first) so the per-step rounding direction stays meaningful.
        """
        if not isinstance(n, int) or n < 0:
            raise ValueError(f"power expects a nonnegative integer, got {n!r}")
        if n == 0:
            return Interval(1.0, 1.0)
        if n == 1:
            return self
        even = n % 2 == 0
        if self.lo >= 0.0:
            return Interval(_pow_dn(self.lo, n), _pow_up(self.hi, n))
        if self.hi <= 0.0:
            t_lo, t_hi = _pow_dn(-self.hi, n), _pow_up(-self.lo, n)
            return Interval(t_lo, t_hi) if even else Interval(-t_hi, -t_lo)
        if even:
            return Interval(0.0, _pow_up(max(-self.lo, self.hi), n))
        return Interval(-_pow_up(-self.lo, n), _pow_up(self.hi, n))

    # -- trig ------------------------------------------------------------------

    def sin(self) -> "Interval":
        return _trig_range(self, math.sin, max_offset=0.5 * math.pi, min_offset=1.5 * math.pi)

    def cos(self) -> "Interval":
        return _trig_range(self, math.cos, max_offset=0.0, min_offset=math.pi)


def _pow_up(x: float, n: int) -> float:
    # x >= 0 required: products stay nonnegative, upward steps stay upper bounds
    r = x
    for _ in range(n - 1):
        r = _up(r * x)
    return r


def _pow_dn(x: float, n: int) -> float:
    r = x
    for _ in range(n - 1):
        r = _dn(r * x)
    return r


_TWO_PI = 2.0 * math.pi


def _has_critical_point(lo: float, hi: float, offset: float) -> bool:
    """Conservative test for offset + 2*pi*k inside [lo, hi].

    Widened by a pad covering float-pi drift over |k| periods, so a true
    critical point near the boundary is never missed (the enlargement can
    only loosen the enclosure).
    """
    pad = 1e-9 * max(1.0, abs(lo), abs(hi))
    kmin = math.ceil((lo - pad - offset) / _TWO_PI)
    kmax = math.floor((hi + pad - offset) / _TWO_PI)
    return kmin <= kmax


def _trig_range(iv: Interval, fn, max_offset: float, min_offset: float) -> Interval:
    if iv.width >= _TWO_PI:
        return Interval(-1.0, 1.0)
    va, vb = fn(iv.lo), fn(iv.hi)
    lo = _dn2(min(va, vb))
    hi = _up2(max(va, vb))
    if _has_critical_point(iv.lo, iv.hi, max_offset):
        hi = 1.0
    if _has_critical_point(iv.lo, iv.hi, min_offset):
        lo = -1.0
    return Interval(max(lo, -1.0), min(hi, 1.0))


# ---------------------------------------------------------------------------
# Constants.


def pi_iv() -> Interval:
    # math.pi rounds the true value down
    return Interval(math.pi, _up(math.pi))


def half_pi_iv() -> Interval:
    p = pi_iv()
    # halving is exact in binary floating point
    return Interval(0.5 * p.lo, 0.5 * p.hi)


def eighth_pi_iv() -> Interval:
    p = pi_iv()
    return Interval(0.125 * p.lo, 0.125 * p.hi)


def sqrt6_iv() -> Interval:
    s = math.sqrt(6.0)
    return Interval(_dn(s), _up(s))


# ---------------------------------------------------------------------------
# Boxes.


@dataclass(frozen=True, slots=True)
class Box:
    dims: tuple[Interval, ...]

    def __post_init__(self) -> None:
        if not self.dims:
            raise ValueError("box needs at least one dimension")
        object.__setattr__(self, "dims", tuple(self.dims))

    @staticmethod
    def from_bounds(bounds: Iterable[tuple[float, float]]) -> "Box":
        return Box(tuple(Interval(a, b) for a, b in bounds))

    @property
    def widths(self) -> tuple[float, ...]:
        return tuple(iv.width for iv in self.dims)

    def widest_dim(self) -> int:
        ws = self.widths
        return max(range(len(ws)), key=lambda i: (ws[i], -i))

    def max_width(self) -> float:
        return max(self.widths)

    def center(self) -> tuple[float, ...]:
        return tuple(iv.midpoint() for iv in self.dims)

    def contains(self, point: Sequence[float]) -> bool:
        return len(point) == len(self.dims) and all(
            iv.contains(x) for iv, x in zip(self.dims, point)
        )

    def encloses(self, other: "Box") -> bool:
        return len(other.dims) == len(self.dims) and all(
            a.encloses(b) for a, b in zip(self.dims, other.dims)
        )

    def bisect(self) -> tuple["Box", "Box"]:
        """Split the widest dimension at its floating-point midpoint."""
        k = self.widest_dim()
        iv = self.dims[k]
        m = iv.midpoint()
        if not (iv.lo < m < iv.hi):
            raise ValueError(f"dimension {k} too thin to bisect: [{iv.lo}, {iv.hi}]")
        left = self.dims[:k] + (Interval(iv.lo, m),) + self.dims[k + 1:]
        right = self.dims[:k] + (Interval(m, iv.hi),) + self.dims[k + 1:]
        return Box(left), Box(right)


# ---------------------------------------------------------------------------
# Two-sided Taylor enclosures of sin and cos around zero.


@dataclass(frozen=True)
class TaylorEnclosure:
    """Polynomial with interval coefficients plus an interval remainder.

    Contains the target function on `domain`: for every x there,
    f(x) is inside sum(coefficients[k] * x^k) + remainder.
    """

    center: float
    degree: int
    coefficients: tuple[Interval, ...]
    remainder: Interval
    domain: Interval

    def eval(self, x: Interval) -> Interval:
        if not self.domain.encloses(x):
            raise ValueError(
                f"argument [{x.lo}, {x.hi}] leaves the enclosure domain "
                f"[{self.domain.lo}, {self.domain.hi}]"
            )
        acc = Interval.point(0.0)
        for c in reversed(self.coefficients):
            acc = acc * x + c
        return acc + self.remainder


def _abs_bound(domain: Interval) -> float:
    return max(abs(domain.lo), abs(domain.hi))


def sin_taylor(domain: Interval) -> TaylorEnclosure:
    """Degree-6 expansion of sin at 0; Lagrange remainder |x|^7 / 5040."""
    coeffs = (
        Interval.point(0.0),
        Interval.point(1.0),
        Interval.point(0.0),
        Interval(_dn(-1.0 / 6.0), _up(-1.0 / 6.0)),
        Interval.point(0.0),
        Interval(_dn(1.0 / 120.0), _up(1.0 / 120.0)),
        Interval.point(0.0),
    )
    m = Interval.point(_abs_bound(domain)).power(7) / Interval.point(5040.0)
    return TaylorEnclosure(0.0, 6, coeffs, Interval(-m.hi, m.hi), domain)


def cos_taylor(domain: Interval) -> TaylorEnclosure:
    """Degree-5 expansion of cos at 0; Lagrange remainder |x|^6 / 720."""
    coeffs = (
        Interval.point(1.0),
        Interval.point(0.0),
        Interval.point(-0.5),
        Interval.point(0.0),
        Interval(_dn(1.0 / 24.0), _up(1.0 / 24.0)),
        Interval.point(0.0),
    )
    m = Interval.point(_abs_bound(domain)).power(6) / Interval.point(720.0)
    return TaylorEnclosure(0.0, 5, coeffs, Interval(-m.hi, m.hi), domain)
