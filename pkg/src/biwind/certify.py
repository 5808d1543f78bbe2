"""Certified positivity of the tangent-frame and cone forcing coefficients.

Every computer-assisted inequality behind the d = 5 heteroclinic argument is
re-proved here with outward-rounded interval arithmetic:

* a branch-and-bound engine (`prove_lower_bound`) that bisects the widest
  box dimension, discharges a box once the interval evaluation clears the
  bound, fails with a witness when a center point definitely violates it,
  and gives up at a minimum width otherwise;
* two-term Taylor-with-remainder enclosures of the cubic and linear
  coefficients near the origin (`taylor_enclose_P_coeff`), computed in exact
  rational arithmetic over Q[sqrt 6] and only rounded outward at the end;
* a divide-and-conquer sublevel-set bounding box on the dyadic grid
  (`enclose_sublevel`);
* the nine named certificates V1-V9 (`run_task`), serialized as JSON.

Determinism: the root box is always expanded into the same canonical
frontier of subtrees, each subtree is searched depth-first sequentially, and
per-subtree results are merged in frontier order.  Worker threads only
change who computes a subtree, never the outcome, so certificates are
bit-identical across any degree of parallelism (wall-clock time aside).
"""

from __future__ import annotations

import enum
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from . import config
from .intervals import (
    Box,
    Interval,
    eighth_pi_iv,
    half_pi_iv,
    pi_iv,
    sqrt6_iv,
)

__all__ = [
    "Status",
    "BnbOutcome",
    "Certificate",
    "prove_lower_bound",
    "taylor_enclose_P_coeff",
    "enclose_sublevel",
    "SublevelEnclosure",
    "run_task",
    "TASK_IDS",
    "ROUNDING_MODE",
    "a_iv",
    "c0_iv",
    "c1_iv",
    "c2_iv",
    "phi_of_z_iv",
    "c0_z_iv",
    "c1_z_iv",
    "q0_iv",
]

ROUNDING_MODE = "nextafter-outward"

TASK_IDS = ("V1", "V2", "V3", "V4", "V5", "V6", "V7", "V8", "V9")


# ---------------------------------------------------------------------------
# Interval transcriptions of the coefficient functions (same structure as the
# floating-point forms in `regions`, with every constant enclosed).


def a_iv(phi0: Interval, phi: Interval, v: Interval) -> Interval:
    """a = 4 cos(2 phi) - 2 sqrt(6) cos(phi0) + 9 + 6 v^2."""
    return (phi * 2).cos() * 4 - sqrt6_iv() * 2 * phi0.cos() + 9 + v.power(2) * 6


def c0_iv(phi0: Interval, phi: Interval) -> Interval:
    u = phi - phi0
    box = (phi * 2).cos() * 4 + 9
    return (
        (phi0 * 2).sin() * -12
        - (u + (phi * 2).sin()) * 12
        + sqrt6_iv() * 2 * u * box * phi0.cos()
        + (phi0 - phi) * 12 * (phi0 * 2).cos()
        + sqrt6_iv() * 2 * box * phi0.sin()
    )


def c1_iv(phi0: Interval, phi: Interval) -> Interval:
    return (phi * 2).cos() * 4 - sqrt6_iv() * 4 * phi0.cos() + 10


def c2_iv(phi0: Interval, phi: Interval) -> Interval:
    u = phi - phi0
    return sqrt6_iv() * 12 * (phi0.sin() + u * phi0.cos()) - (phi * 2).sin() * 4


def phi_of_z_iv(phi0: Interval, z: Interval) -> Interval:
    """phi = phi0 + z cos(phi0) / (1 + sin(phi0)), the frame-relative chart."""
    return phi0 + z * phi0.cos() / (phi0.sin() + 1)


def c0_z_iv(phi0: Interval, z: Interval) -> Interval:
    return c0_iv(phi0, phi_of_z_iv(phi0, z))


def c1_z_iv(phi0: Interval, z: Interval) -> Interval:
    return c1_iv(phi0, phi_of_z_iv(phi0, z))


def c2_z_iv(phi0: Interval, z: Interval) -> Interval:
    return c2_iv(phi0, phi_of_z_iv(phi0, z))


def q0_iv(phi: Interval) -> Interval:
    """Constant coefficient of the cone forcing: 6 (3 phi - 2 sin 2phi + 2 phi cos 2phi)."""
    return (phi * 3 - (phi * 2).sin() * 2 + phi * 2 * (phi * 2).cos()) * 6


# ---------------------------------------------------------------------------
# Branch and bound.


class Status(enum.Enum):
    PROVED = "proved"
    FAILED = "failed"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class BnbOutcome:
    status: Status
    witness: Box | None
    boxes_examined: int
    max_depth: int


_FRONTIER_LEVELS = 4  # canonical 2^4-leaf partition handed to the worker pool


def _discharged(iv: Interval, bound: float, strict: bool) -> bool:
    return iv.lo > bound if strict else iv.lo >= bound


def _center_fails(iv: Interval, bound: float, strict: bool) -> bool:
    return iv.hi <= bound if strict else iv.hi < bound


def _point_box(box: Box) -> Box:
    return Box(tuple(Interval.point(x) for x in box.center()))


def _dfs_subtree(
    f: Callable[[Box], Interval],
    box: Box,
    depth0: int,
    bound: float,
    min_width: float,
    strict: bool,
) -> BnbOutcome:
    stack: list[tuple[Box, int]] = [(box, depth0)]
    boxes = 0
    max_depth = depth0
    inconclusive: Box | None = None
    while stack:
        b, dep = stack.pop()
        boxes += 1
        max_depth = max(max_depth, dep)
        if _discharged(f(b), bound, strict):
            continue
        if _center_fails(f(_point_box(b)), bound, strict):
            return BnbOutcome(Status.FAILED, b, boxes, max_depth)
        if b.max_width() < min_width:
            if inconclusive is None:
                inconclusive = b
            continue
        left, right = b.bisect()
        stack.append((right, dep + 1))
        stack.append((left, dep + 1))
    if inconclusive is not None:
        return BnbOutcome(Status.INCONCLUSIVE, inconclusive, boxes, max_depth)
    return BnbOutcome(Status.PROVED, None, boxes, max_depth)


def prove_lower_bound(
    f: Callable[[Box], Interval],
    box: Box,
    bound: float,
    min_width: float,
    strict: bool = False,
    workers: int | None = None,
) -> BnbOutcome:
    """Certify f >= bound (or > bound when strict) on the box.

    The top of the tree is expanded sequentially into a canonical frontier;
    the frontier subtrees run depth-first, possibly on a thread pool, and
    merge in frontier order, so the outcome and stats never depend on the
    worker count.
    """
    if min_width <= 0:
        raise ValueError(f"min_width must be positive, got {min_width}")
    workers = config.default_workers() if workers is None else max(1, int(workers))
    boxes = 0
    max_depth = 0
    inconclusive: Box | None = None
    frontier: list[tuple[Box, int]] = [(box, 0)]
    for _ in range(_FRONTIER_LEVELS):
        nxt: list[tuple[Box, int]] = []
        for b, dep in frontier:
            boxes += 1
            max_depth = max(max_depth, dep)
            if _discharged(f(b), bound, strict):
                continue
            if _center_fails(f(_point_box(b)), bound, strict):
                return BnbOutcome(Status.FAILED, b, boxes, max_depth)
            if b.max_width() < min_width:
                if inconclusive is None:
                    inconclusive = b
                continue
            left, right = b.bisect()
            nxt.append((left, dep + 1))
            nxt.append((right, dep + 1))
        frontier = nxt
    if frontier:
        run = lambda item: _dfs_subtree(f, item[0], item[1], bound, min_width, strict)
        if workers == 1:
            results = [run(item) for item in frontier]
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(run, frontier))
        for r in results:
            boxes += r.boxes_examined
            max_depth = max(max_depth, r.max_depth)
        for r in results:
            if r.status is Status.FAILED:
                return BnbOutcome(Status.FAILED, r.witness, boxes, max_depth)
        for r in results:
            if r.status is Status.INCONCLUSIVE and inconclusive is None:
                inconclusive = r.witness
    if inconclusive is not None:
        return BnbOutcome(Status.INCONCLUSIVE, inconclusive, boxes, max_depth)
    return BnbOutcome(Status.PROVED, None, boxes, max_depth)


# ---------------------------------------------------------------------------
# Exact two-term Taylor enclosures over Q[sqrt 6].
#
# Numbers are pairs (a, b) of Fractions meaning a + b sqrt(6).  Polynomials
# in (phi0, phi) are dicts {(j, k): pair}; remainder mass lives in a separate
# list of (j, k, M) monomials meaning theta * M * phi0^j phi^k with theta in
# [-1, 1] (M a nonnegative Fraction).  All arithmetic is exact; rounding
# happens once, at the final conversion to float intervals.

_SQRT6_LO = Fraction(24494, 10**4)
_SQRT6_HI = Fraction(24495, 10**4)

_Pair = tuple[Fraction, Fraction]


def _pair_bounds(c: _Pair) -> tuple[Fraction, Fraction]:
    a, b = c
    if b >= 0:
        return a + b * _SQRT6_LO, a + b * _SQRT6_HI
    return a + b * _SQRT6_HI, a + b * _SQRT6_LO


def _pair_abs_hi(c: _Pair) -> Fraction:
    lo, hi = _pair_bounds(c)
    return max(-lo, hi)


class _Sym:
    """Exact polynomial in (phi0, phi) over Q[sqrt 6] plus remainder mass."""

    __slots__ = ("poly", "fuzz")

    def __init__(self, poly=None, fuzz=None):
        self.poly: dict[tuple[int, int], _Pair] = poly or {}
        self.fuzz: list[tuple[int, int, Fraction]] = fuzz or []

    @staticmethod
    def const(a, b=0) -> "_Sym":
        return _Sym({(0, 0): (Fraction(a), Fraction(b))})

    @staticmethod
    def var(which: str) -> "_Sym":
        key = (1, 0) if which == "phi0" else (0, 1)
        return _Sym({key: (Fraction(1), Fraction(0))})

    def __add__(self, other: "_Sym") -> "_Sym":
        poly = dict(self.poly)
        for key, (a, b) in other.poly.items():
            pa, pb = poly.get(key, (Fraction(0), Fraction(0)))
            poly[key] = (pa + a, pb + b)
        return _Sym(poly, self.fuzz + other.fuzz)

    def __mul__(self, other: "_Sym") -> "_Sym":
        poly: dict[tuple[int, int], _Pair] = {}
        for (j1, k1), (a1, b1) in self.poly.items():
            for (j2, k2), (a2, b2) in other.poly.items():
                key = (j1 + j2, k1 + k2)
                a = a1 * a2 + 6 * b1 * b2
                b = a1 * b2 + a2 * b1
                pa, pb = poly.get(key, (Fraction(0), Fraction(0)))
                poly[key] = (pa + a, pb + b)
        fuzz: list[tuple[int, int, Fraction]] = []
        for (j1, k1), (a1, b1) in self.poly.items():
            m1 = _pair_abs_hi((a1, b1))
            for (j2, k2, m2) in other.fuzz:
                fuzz.append((j1 + j2, k1 + k2, m1 * m2))
        for (j2, k2), (a2, b2) in other.poly.items():
            m2 = _pair_abs_hi((a2, b2))
            for (j1, k1, m1) in self.fuzz:
                fuzz.append((j1 + j2, k1 + k2, m1 * m2))
        for (j1, k1, m1) in self.fuzz:
            for (j2, k2, m2) in other.fuzz:
                fuzz.append((j1 + j2, k1 + k2, m1 * m2))
        return _Sym(poly, fuzz)

    def scale(self, a, b=0) -> "_Sym":
        return self * _Sym.const(a, b)

    def __sub__(self, other: "_Sym") -> "_Sym":
        return self + other.scale(-1)


def _sin_sym(var: str, factor: int) -> _Sym:
    """sin(factor * var) as x - x^3/6 + x^5/120 + theta x^7/5040."""
    e = (1, 0) if var == "phi0" else (0, 1)
    poly = {}
    for k, c in ((1, Fraction(1)), (3, Fraction(-1, 6)), (5, Fraction(1, 120))):
        poly[(e[0] * k, e[1] * k)] = (c * factor**k, Fraction(0))
    fuzz = [(e[0] * 7, e[1] * 7, Fraction(factor**7, 5040))]
    return _Sym(poly, fuzz)


def _cos_sym(var: str, factor: int) -> _Sym:
    """cos(factor * var) as 1 - x^2/2 + x^4/24 + theta x^6/720."""
    e = (1, 0) if var == "phi0" else (0, 1)
    poly = {}
    for k, c in ((0, Fraction(1)), (2, Fraction(-1, 2)), (4, Fraction(1, 24))):
        poly[(e[0] * k, e[1] * k)] = (c * factor**k, Fraction(0))
    fuzz = [(e[0] * 6, e[1] * 6, Fraction(factor**6, 720))]
    return _Sym(poly, fuzz)


def _c0_sym() -> _Sym:
    phi0 = _Sym.var("phi0")
    phi = _Sym.var("phi")
    u = phi - phi0
    box = _cos_sym("phi", 2).scale(4) + _Sym.const(9)
    return (
        _sin_sym("phi0", 2).scale(-12)
        + (u + _sin_sym("phi", 2)).scale(-12)
        + u.scale(0, 2) * box * _cos_sym("phi0", 1)
        + (phi0 - phi).scale(12) * _cos_sym("phi0", 2)
        + box.scale(0, 2) * _sin_sym("phi0", 1)
    )


def _c2_sym() -> _Sym:
    phi0 = _Sym.var("phi0")
    phi = _Sym.var("phi")
    u = phi - phi0
    return (
        (_sin_sym("phi0", 1) + u * _cos_sym("phi0", 1)).scale(0, 12)
        - _sin_sym("phi", 2).scale(4)
    )


_SYM_CACHE: dict[str, _Sym] = {}


def _coeff_sym(which: str) -> _Sym:
    if which not in _SYM_CACHE:
        _SYM_CACHE[which] = _c0_sym() if which == "v0" else _c2_sym()
    return _SYM_CACHE[which]


def _fr_dn(x: Fraction) -> float:
    f = float(x)
    return f if Fraction(f) <= x else math.nextafter(f, -math.inf)


def _fr_up(x: Fraction) -> float:
    f = float(x)
    return f if Fraction(f) >= x else math.nextafter(f, math.inf)


def _fr_interval(lo: Fraction, hi: Fraction) -> Interval:
    return Interval(_fr_dn(lo), _fr_up(hi))


_TAYLOR_DOMAINS = {
    "v0": ((0.0, 0.01), (0.0, 0.021)),
    "v2": ((0.0, 0.11), (0.0, 0.0006)),
}


def taylor_enclose_P_coeff(which: str, box: Box) -> tuple[Interval, Interval]:
    """Interval coefficients (C3, C1) with coeff = C3 phi0^3 + C1 phi on the box.

    Every monomial other than phi0^3 and phi is absorbed: a term
    c phi0^j phi^k contributes c [0, H]^(j-3) to C3 when k = 0 and
    c [0, H]^(j+k-1) to C1 otherwise, H being the largest box endpoint.
    Monomials below cubic order in phi0 alone must cancel exactly for the
    two-term shape to exist; that cancellation is asserted.
    """
    if which not in _TAYLOR_DOMAINS:
        raise ValueError(f"unknown coefficient selector {which!r}; want 'v0' or 'v2'")
    dom = _TAYLOR_DOMAINS[which]
    if len(box.dims) != 2:
        raise ValueError("expected a two-dimensional (phi0, phi) box")
    for iv, (lo, hi) in zip(box.dims, dom):
        if iv.lo < lo or iv.hi > hi:
            raise ValueError(
                f"box [{iv.lo}, {iv.hi}] leaves the stated domain [{lo}, {hi}] for {which}"
            )
    H = Fraction(max(box.dims[0].hi, box.dims[1].hi))
    sym = _coeff_sym(which)
    c3 = [Fraction(0), Fraction(0)]
    c1 = [Fraction(0), Fraction(0)]

    def absorb(target, lo: Fraction, hi: Fraction) -> None:
        target[0] += min(Fraction(0), lo)
        target[1] += max(Fraction(0), hi)

    for (j, k), pair in sym.poly.items():
        lo, hi = _pair_bounds(pair)
        if lo == 0 and hi == 0:
            continue
        if k == 0:
            if j < 3:
                raise ArithmeticError(
                    f"low-order pure-phi0 monomial phi0^{j} survived with bounds [{lo}, {hi}]"
                )
            if j == 3:
                c3[0] += lo
                c3[1] += hi
            else:
                scale = H ** (j - 3)
                absorb(c3, lo * scale, hi * scale)
        elif (j, k) == (0, 1):
            c1[0] += lo
            c1[1] += hi
        else:
            scale = H ** (j + k - 1)
            absorb(c1, lo * scale, hi * scale)
    for (j, k, m) in sym.fuzz:
        if k == 0:
            if j < 3:
                raise ArithmeticError(f"low-order remainder monomial phi0^{j}")
            scale = H ** (j - 3)
            c3[0] -= m * scale
            c3[1] += m * scale
        else:
            scale = H ** (j + k - 1)
            c1[0] -= m * scale
            c1[1] += m * scale
    return _fr_interval(c3[0], c3[1]), _fr_interval(c1[0], c1[1])


# ---------------------------------------------------------------------------
# Dyadic sublevel-set enclosure.

_FrCell = tuple[tuple[Fraction, Fraction], ...]


@dataclass(frozen=True)
class SublevelEnclosure:
    """Dyadic bounding box of the cells where f <= threshold cannot be excluded."""

    bounds: tuple[tuple[Fraction, Fraction], ...] | None
    cells_retained: int
    cells_examined: int

    @property
    def is_empty(self) -> bool:
        return self.bounds is None

    def to_box(self) -> Box:
        if self.bounds is None:
            raise ValueError("empty enclosure has no box")
        return Box(
            tuple(Interval(_fr_dn(lo), _fr_up(hi)) for lo, hi in self.bounds)
        )


def _cell_box(cell: _FrCell) -> Box:
    return Box(tuple(Interval(_fr_dn(lo), _fr_up(hi)) for lo, hi in cell))


def enclose_sublevel(
    f: Callable[[Box], Interval],
    threshold: float,
    grid_denominator: int,
    box: Box | None = None,
) -> SublevelEnclosure:
    """Bounding box of {f <= threshold} on the dyadic grid of the given box.

    Cells are excluded when the interval evaluation stays above the
    threshold, retained whole when it stays at or below, and split on the
    widest dimension down to width root_width / grid_denominator otherwise.
    All cell coordinates are exact dyadic rationals.
    """
    if grid_denominator < 1 or grid_denominator & (grid_denominator - 1):
        raise ValueError(f"grid denominator must be a power of two, got {grid_denominator}")
    if box is None:
        box = Box.from_bounds([(0.0, 1.0), (0.0, 1.0)])
    root: _FrCell = tuple((Fraction(iv.lo), Fraction(iv.hi)) for iv in box.dims)
    floors = tuple((hi - lo) / grid_denominator for lo, hi in root)
    lo_acc = [None] * len(root)
    hi_acc = [None] * len(root)
    retained = 0
    examined = 0

    def keep(cell: _FrCell) -> None:
        nonlocal retained
        retained += 1
        for i, (lo, hi) in enumerate(cell):
            if lo_acc[i] is None or lo < lo_acc[i]:
                lo_acc[i] = lo
            if hi_acc[i] is None or hi > hi_acc[i]:
                hi_acc[i] = hi

    stack: list[_FrCell] = [root]
    while stack:
        cell = stack.pop()
        examined += 1
        val = f(_cell_box(cell))
        if val.lo > threshold:
            continue
        if val.hi <= threshold:
            keep(cell)
            continue
        widths = [hi - lo for lo, hi in cell]
        splittable = [i for i, w in enumerate(widths) if w > floors[i]]
        if not splittable:
            keep(cell)
            continue
        i = max(splittable, key=lambda i: (widths[i], -i))
        lo, hi = cell[i]
        mid = (lo + hi) / 2
        stack.append(cell[:i] + ((mid, hi),) + cell[i + 1:])
        stack.append(cell[:i] + ((lo, mid),) + cell[i + 1:])

    if retained == 0:
        return SublevelEnclosure(None, 0, examined)
    return SublevelEnclosure(tuple(zip(lo_acc, hi_acc)), retained, examined)


# ---------------------------------------------------------------------------
# Certificates.


@dataclass(frozen=True)
class Certificate:
    task_id: str
    coordinate_system: str
    regions: tuple[Box, ...]
    target: str
    status: Status
    witness: Box | None
    boxes_examined: int
    max_depth: int
    min_width: float
    rounding_mode: str
    wall_ms: int
    details: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {
            "task_id": self.task_id,
            "coordinate_system": self.coordinate_system,
            "target": self.target,
            "regions": [_box_json(b) for b in self.regions],
            "status": self.status.value,
            "witness": None if self.witness is None else _box_json(self.witness),
            "boxes_examined": self.boxes_examined,
            "max_depth": self.max_depth,
            "min_width": self.min_width,
            "rounding_mode": self.rounding_mode,
            "wall_ms": self.wall_ms,
            "details": self.details,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2, sort_keys=True)


def _box_json(box: Box) -> dict:
    return {
        "decimal": [[iv.lo, iv.hi] for iv in box.dims],
        "hex": [[iv.lo.hex(), iv.hi.hex()] for iv in box.dims],
    }


def _interval_json(iv: Interval) -> dict:
    return {"decimal": [iv.lo, iv.hi], "hex": [iv.lo.hex(), iv.hi.hex()]}


_DEFAULT_MIN_WIDTH = {
    "V1": config.MIN_WIDTH_COEFF,
    "V2": config.MIN_WIDTH_COEFF,
    "V3": config.MIN_WIDTH_COEFF,
    "V4": config.MIN_WIDTH_COEFF,
    "V5": config.MIN_WIDTH_COEFF,
    "V6": config.MIN_WIDTH_COEFF,
    "V7": config.MIN_WIDTH_COEFF,
    "V8": config.MIN_WIDTH_QUAD,
    "V9": config.MIN_WIDTH_QUAD,
}


def _merge_outcomes(parts: Sequence[BnbOutcome]) -> BnbOutcome:
    boxes = sum(p.boxes_examined for p in parts)
    depth = max(p.max_depth for p in parts)
    for p in parts:
        if p.status is Status.FAILED:
            return BnbOutcome(Status.FAILED, p.witness, boxes, depth)
    for p in parts:
        if p.status is Status.INCONCLUSIVE:
            return BnbOutcome(Status.INCONCLUSIVE, p.witness, boxes, depth)
    return BnbOutcome(Status.PROVED, None, boxes, depth)


def _worst_status(statuses: Sequence[Status]) -> Status:
    if Status.FAILED in statuses:
        return Status.FAILED
    if Status.INCONCLUSIVE in statuses:
        return Status.INCONCLUSIVE
    return Status.PROVED


def _samples_small() -> list[Interval]:
    # point samples pi/8 * 2^-k; halving is exact so these stay enclosures
    out = []
    base = eighth_pi_iv()
    for k in range(10):
        s = 0.5**k
        out.append(Interval(base.lo * s, base.hi * s))
    return out


_SAMPLES_LARGE = (3.0, 3.5, 4.0, 5.0, 8.0, 16.0, 100.0, 1000.0)


def run_task(task_id: str, min_width: float | None = None, workers: int | None = None) -> Certificate:
    """Execute one named certificate and package the outcome."""
    if task_id not in TASK_IDS:
        raise ValueError(f"unknown task id {task_id!r}; expected one of {', '.join(TASK_IDS)}")
    if min_width is None:
        min_width = _DEFAULT_MIN_WIDTH[task_id]
    if min_width <= 0:
        raise ValueError(f"min_width must be positive, got {min_width}")
    start = time.perf_counter()
    hp = half_pi_iv()
    details: dict = {}

    if task_id == "V1":
        # 6 v^2 >= 0 reduces the claim to the v = 0 slice; one cosine period
        # in phi and the full [0, pi/2] range of phi0 cover all arguments.
        region = Box((Interval(0.0, hp.hi), Interval(0.0, pi_iv().hi)))
        f = lambda b: a_iv(b.dims[0], b.dims[1], Interval.point(0.0))
        out = prove_lower_bound(f, region, 0.1, min_width, workers=workers)
        cert = ("(phi0, phi)", (region,), "a(phi0, phi, v) >= 0.1 via a >= a|_{v=0}", out)
    elif task_id == "V2":
        region = Box((Interval(0.4, hp.hi), Interval(0.0, hp.hi)))
        f = lambda b: c0_iv(b.dims[0], b.dims[1])
        out = prove_lower_bound(f, region, 0.01, min_width, workers=workers)
        cert = ("(phi0, phi)", (region,), "v^0 coefficient of P >= 0.01", out)
    elif task_id == "V3":
        r1 = Box((Interval(0.01, 0.4), Interval(0.0, 1.0)))
        r2 = Box((Interval(0.0, 0.4), Interval(0.01, 1.0)))
        f = lambda b: c0_z_iv(b.dims[0], b.dims[1])
        parts = [
            prove_lower_bound(f, r, 0.01, min_width, workers=workers) for r in (r1, r2)
        ]
        out = _merge_outcomes(parts)
        cert = ("(phi0, z)", (r1, r2), "v^0 coefficient of P >= 0.01", out)
    elif task_id == "V4":
        region = Box((Interval(0.0, 0.01), Interval(0.0, 0.021)))
        c3, c1 = taylor_enclose_P_coeff("v0", region)
        ok = c3.lo > 0.0 and c1.lo > 0.0
        details["taylor"] = {
            "phi0_cubed": _interval_json(c3),
            "phi_linear": _interval_json(c1),
        }
        out = BnbOutcome(Status.PROVED if ok else Status.FAILED, None if ok else region, 0, 0)
        cert = (
            "(phi0, phi)",
            (region,),
            "two-term Taylor enclosure of the v^0 coefficient is strictly positive",
            out,
        )
    elif task_id == "V5":
        r1 = Box((Interval(0.11, hp.hi), Interval(0.0, hp.hi)))
        r2 = Box((Interval(0.0, hp.hi), Interval(0.0006, hp.hi)))
        taylor_box = Box((Interval(0.0, 0.11), Interval(0.0, 0.0006)))
        f = lambda b: c2_iv(b.dims[0], b.dims[1])
        parts = [
            prove_lower_bound(f, r, 0.01, min_width, workers=workers) for r in (r1, r2)
        ]
        c3, c1 = taylor_enclose_P_coeff("v2", taylor_box)
        ok = c3.lo > 0.0 and c1.lo > 0.0
        details["taylor"] = {
            "phi0_cubed": _interval_json(c3),
            "phi_linear": _interval_json(c1),
        }
        parts.append(
            BnbOutcome(Status.PROVED if ok else Status.FAILED, None if ok else taylor_box, 0, 0)
        )
        out = _merge_outcomes(parts)
        cert = (
            "(phi0, phi)",
            (r1, r2, taylor_box),
            "v^2 coefficient of P >= 0.01 away from the origin; Taylor-positive near it",
            out,
        )
    elif task_id == "V6":
        region = Box((Interval(1.0, hp.hi), Interval(0.0, hp.hi)))
        f = lambda b: c1_iv(b.dims[0], b.dims[1])
        out = prove_lower_bound(f, region, 0.01, min_width, workers=workers)
        cert = ("(phi0, phi)", (region,), "v^1 coefficient of P >= 0.01", out)
    elif task_id == "V7":
        region = Box.from_bounds([(0.0, 1.0), (0.0, 1.0)])
        f = lambda b: c1_z_iv(b.dims[0], b.dims[1])
        enc = enclose_sublevel(f, 0.01, config.SUBLEVEL_DENOMINATOR, region)
        a_lo1, a_hi1 = Fraction(0), Fraction(783, 1024)
        a_lo2, a_hi2 = Fraction(779, 1024), Fraction(1)
        if enc.is_empty:
            contained = True
            equals = False
            details["enclosure"] = None
        else:
            (b_lo1, b_hi1), (b_lo2, b_hi2) = enc.bounds
            contained = a_lo1 <= b_lo1 and b_hi1 <= a_hi1 and a_lo2 <= b_lo2 and b_hi2 <= a_hi2
            equals = (b_lo1, b_hi1, b_lo2, b_hi2) == (a_lo1, a_hi1, a_lo2, a_hi2)
            details["enclosure"] = [[str(b_lo1), str(b_hi1)], [str(b_lo2), str(b_hi2)]]
        details["reference"] = [[str(a_lo1), str(a_hi1)], [str(a_lo2), str(a_hi2)]]
        details["contained_in_reference"] = contained
        details["equals_reference"] = equals
        details["cells_retained"] = enc.cells_retained
        out = BnbOutcome(
            Status.PROVED if contained else Status.FAILED,
            None,
            enc.cells_examined,
            int(math.log2(config.SUBLEVEL_DENOMINATOR)) * 2,
        )
        cert = (
            "(phi0, z)",
            (region,),
            "sublevel set {v^1 coefficient <= 0.01} lies inside [0, 783/1024] x [779/1024, 1]",
            out,
        )
    elif task_id == "V8":
        region = Box.from_bounds([(0.0, 783 / 1024), (779 / 1024, 1.0)])

        def quad_min(b: Box) -> Interval:
            phi0, z = b.dims
            phi = phi_of_z_iv(phi0, z)
            c2 = c2_iv(phi0, phi)
            if c2.lo <= 0.0:
                # cannot justify the closed-form minimum here; force a split
                return Interval(-1e30, 1e30)
            return c0_iv(phi0, phi) - c1_iv(phi0, phi).power(2) / (c2 * 4)

        out = prove_lower_bound(quad_min, region, 0.5, min_width, workers=workers)
        cert = (
            "(phi0, z)",
            (region,),
            "min over v of c0 + c1 v + c2 v^2 (= c0 - c1^2 / 4 c2) >= 0.5 on the reference box",
            out,
        )
    else:  # V9
        region = Box((Interval(eighth_pi_iv().lo, 3.0),))
        f = lambda b: q0_iv(b.dims[0])
        out = prove_lower_bound(f, region, 1.9, min_width, strict=True, workers=workers)
        s2 = math.sqrt(2.0)
        sqrt2 = Interval(math.nextafter(s2, 0.0), math.nextafter(s2, 2.0))
        small, large = [], []
        ok = True
        for p in _samples_small():
            margin = q0_iv(p) - (sqrt2 - 1) * 6 * p
            small.append({"phi": _interval_json(p), "margin_lo": margin.lo})
            ok = ok and margin.lo >= 0.0
        for x in _SAMPLES_LARGE:
            p = Interval.point(x)
            margin = q0_iv(p) - (p - 2) * 6
            large.append({"phi": _interval_json(p), "margin_lo": margin.lo})
            ok = ok and margin.lo >= 0.0
        details["small_phi_bound"] = {"form": "q0 >= 6 (sqrt(2) - 1) phi", "samples": small}
        details["large_phi_bound"] = {"form": "q0 >= 6 (phi - 2)", "samples": large}
        parts = [out, BnbOutcome(Status.PROVED if ok else Status.FAILED, None, 0, 0)]
        out = _merge_outcomes(parts)
        cert = (
            "(phi)",
            (region,),
            "q0 > 1.9 on [pi/8, 3]; analytic tail bounds confirmed at sample points",
            out,
        )

    coords, regions_, target, outcome = cert
    wall_ms = int(round((time.perf_counter() - start) * 1000))
    return Certificate(
        task_id=task_id,
        coordinate_system=coords,
        regions=regions_,
        target=target,
        status=outcome.status,
        witness=outcome.witness,
        boxes_examined=outcome.boxes_examined,
        max_depth=outcome.max_depth,
        min_width=min_width,
        rounding_mode=ROUNDING_MODE,
        wall_ms=wall_ms,
        details=details,
    )
