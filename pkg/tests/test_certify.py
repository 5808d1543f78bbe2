import json
import math
from fractions import Fraction

import numpy as np
import pytest

from biwind import certify, regions
from biwind.certify import Status
from biwind.intervals import Box, Interval

SQRT6 = math.sqrt(6.0)


def _zmap(phi0, z):
    return phi0 + z * np.cos(phi0) / (1.0 + np.sin(phi0))


# ---------------------------------------------------------------------------
# Interval transcriptions agree with the floating-point coefficient forms.


def test_interval_coefficients_contain_float_values():
    rng = np.random.default_rng(3)
    for _ in range(2000):
        p0 = rng.uniform(0.0, math.pi / 2)
        ph = rng.uniform(0.0, math.pi / 2)
        v = rng.uniform(-2.0, 2.0)
        c0, c1, c2, _ = regions.P_cubic_coefficients(p0, ph)
        i0, i1 = Interval.point(p0), Interval.point(ph)
        assert certify.c0_iv(i0, i1).contains(float(c0))
        assert certify.c1_iv(i0, i1).contains(float(c1))
        assert certify.c2_iv(i0, i1).contains(float(c2))
        assert certify.a_iv(i0, i1, Interval.point(v)).contains(regions.eval_a(p0, ph, v))
        z = rng.uniform(0.0, 1.0)
        phz = float(_zmap(p0, z))
        assert certify.phi_of_z_iv(i0, Interval.point(z)).contains(phz)
        q0 = float(regions.Q_cubic_coefficients(ph)[0])
        assert certify.q0_iv(i1).contains(q0)


# ---------------------------------------------------------------------------
# Branch-and-bound engine on elementary objectives with known answers.


def test_prove_lower_bound_sine_is_nonnegative():
    box = Box((Interval(0.0, math.nextafter(math.pi, math.inf)),))
    out = certify.prove_lower_bound(lambda b: b.dims[0].sin(), box, -0.001, 1e-3)
    assert out.status is Status.PROVED
    assert out.witness is None
    assert out.boxes_examined >= 1


def test_prove_lower_bound_failure_carries_witness():
    box = Box((Interval(0.0, 2.0),))
    f = lambda b: b.dims[0].power(2) - 1
    out = certify.prove_lower_bound(f, box, 0.0, 1e-3)
    assert out.status is Status.FAILED
    assert out.witness is not None
    # the witness sits where x^2 - 1 really dips below the bound
    assert out.witness.dims[0].lo < 1.0
    center = Interval.point(out.witness.dims[0].midpoint())
    assert (center.power(2) - 1).hi < 0.0


def test_prove_lower_bound_inconclusive_at_min_width():
    # x - x evaluates to a symmetric interval around zero whose width never
    # shrinks to a point, and the center evaluation is exactly zero: neither
    # discharge nor failure can happen.
    box = Box((Interval(0.0, 1.0),))
    f = lambda b: b.dims[0] - b.dims[0]
    out = certify.prove_lower_bound(f, box, 0.0, 1e-2)
    assert out.status is Status.INCONCLUSIVE
    assert out.witness is not None
    assert out.witness.max_width() < 1e-2


def test_prove_lower_bound_validates_min_width():
    box = Box((Interval(0.0, 1.0),))
    with pytest.raises(ValueError):
        certify.prove_lower_bound(lambda b: b.dims[0], box, 0.0, 0.0)


# ---------------------------------------------------------------------------
# The nine tasks.


@pytest.fixture(scope="module")
def all_certs():
    return {tid: certify.run_task(tid) for tid in certify.TASK_IDS}


def test_all_tasks_proved(all_certs):
    for tid, cert in all_certs.items():
        assert cert.status is Status.PROVED, f"{tid} -> {cert.status}"
        assert cert.witness is None
        assert cert.rounding_mode == "nextafter-outward"


def test_v1_and_v6_discharge_at_the_root(all_certs):
    assert all_certs["V1"].boxes_examined == 1
    assert all_certs["V6"].boxes_examined == 1


def test_v4_taylor_intervals_match_reference(all_certs):
    t = all_certs["V4"].details["taylor"]
    c3 = t["phi0_cubed"]["decimal"]
    c1 = t["phi_linear"]["decimal"]
    assert c3[0] > 0.0 and c1[0] > 0.0
    # overlap the reference displays with endpoint deviation under 0.05
    ref3, ref1 = (13.2121, 13.24), (15.673, 15.6867)
    assert c3[0] < ref3[1] and ref3[0] < c3[1]
    assert abs(c3[0] - ref3[0]) < 0.05 and abs(c3[1] - ref3[1]) < 0.05
    assert c1[0] < ref1[1] and ref1[0] < c1[1]
    assert abs(c1[0] - ref1[0]) < 0.05 and abs(c1[1] - ref1[1]) < 0.05


def test_v5_taylor_intervals_match_reference(all_certs):
    t = all_certs["V5"].details["taylor"]
    c3 = t["phi0_cubed"]["decimal"]
    c1 = t["phi_linear"]["decimal"]
    assert c3[0] > 0.0 and c1[0] > 0.0
    ref3, ref1 = (9.76536, 9.83056), (21.2159, 21.4586)
    assert c3[0] < ref3[1] and ref3[0] < c3[1]
    assert abs(c3[0] - ref3[0]) < 0.05 and abs(c3[1] - ref3[1]) < 0.05
    assert c1[0] < ref1[1] and ref1[0] < c1[1]
    assert abs(c1[0] - ref1[0]) < 0.05 and abs(c1[1] - ref1[1]) < 0.05


def test_v7_enclosure_contained_in_reference(all_certs):
    d = all_certs["V7"].details
    assert d["contained_in_reference"] is True
    assert isinstance(d["equals_reference"], bool)
    assert d["enclosure"] is not None
    (lo1, hi1), (lo2, hi2) = [
        (Fraction(a), Fraction(b)) for a, b in d["enclosure"]
    ]
    assert Fraction(0) <= lo1 and hi1 <= Fraction(783, 1024)
    assert Fraction(779, 1024) <= lo2 and hi2 <= Fraction(1)
    # denominators divide the grid
    for q in (lo1, hi1, lo2, hi2):
        assert 1024 % q.denominator == 0


def test_v9_sample_confirmations_recorded(all_certs):
    d = all_certs["V9"].details
    assert all(s["margin_lo"] >= 0.0 for s in d["small_phi_bound"]["samples"])
    assert all(s["margin_lo"] >= 0.0 for s in d["large_phi_bound"]["samples"])
    assert len(d["small_phi_bound"]["samples"]) >= 5
    assert len(d["large_phi_bound"]["samples"]) >= 5


def test_certificates_serialize_to_json(all_certs):
    for tid, cert in all_certs.items():
        blob = json.loads(cert.to_json())
        assert blob["task_id"] == tid
        assert blob["status"] == "proved"
        assert blob["witness"] is None
        assert blob["min_width"] > 0
        assert blob["rounding_mode"] == "nextafter-outward"
        assert isinstance(blob["wall_ms"], int)
        for region in blob["regions"]:
            for (dl, dh), (xl, xh) in zip(region["decimal"], region["hex"]):
                assert float.fromhex(xl) == dl
                assert float.fromhex(xh) == dh


def test_v2_is_honestly_inconclusive_when_too_coarse():
    cert = certify.run_task("V2", min_width=0.1)
    assert cert.status is Status.INCONCLUSIVE
    assert cert.witness is not None


def test_run_task_rejects_bad_input():
    with pytest.raises(ValueError):
        certify.run_task("V10")
    with pytest.raises(ValueError):
        certify.run_task("V2", min_width=-1.0)


def test_certificates_deterministic_across_worker_counts():
    for tid in ("V2", "V3", "V9"):
        dicts = []
        for workers in (1, 4, 16):
            d = certify.run_task(tid, workers=workers).to_json_dict()
            d.pop("wall_ms")
            dicts.append(d)
        assert dicts[0] == dicts[1] == dicts[2]


# ---------------------------------------------------------------------------
# Soundness cross-checks of every Proved bound by dense float sampling.


def test_proved_bounds_survive_dense_sampling(all_certs):
    rng = np.random.default_rng(2026)
    n = 1_000_000
    hp = math.pi / 2

    p0 = rng.uniform(0.0, hp, n)
    ph = rng.uniform(0.0, math.pi, n)
    v = rng.uniform(-3.0, 3.0, n)
    assert np.min(regions.eval_a(p0, ph, v)) >= 0.1  # V1

    p0 = rng.uniform(0.4, hp, n)
    ph = rng.uniform(0.0, hp, n)
    assert np.min(regions.P_cubic_coefficients(p0, ph)[0]) >= 0.01  # V2

    p0 = rng.uniform(0.01, 0.4, n // 2)
    z = rng.uniform(0.0, 1.0, n // 2)
    assert np.min(regions.P_cubic_coefficients(p0, _zmap(p0, z))[0]) >= 0.01  # V3 region 1
    p0 = rng.uniform(0.0, 0.4, n // 2)
    z = rng.uniform(0.01, 1.0, n // 2)
    assert np.min(regions.P_cubic_coefficients(p0, _zmap(p0, z))[0]) >= 0.01  # V3 region 2

    p0 = rng.uniform(0.11, hp, n // 2)
    ph = rng.uniform(0.0, hp, n // 2)
    assert np.min(regions.P_cubic_coefficients(p0, ph)[2]) >= 0.01  # V5 region 1
    p0 = rng.uniform(0.0, hp, n // 2)
    ph = rng.uniform(0.0006, hp, n // 2)
    assert np.min(regions.P_cubic_coefficients(p0, ph)[2]) >= 0.01  # V5 region 2

    p0 = rng.uniform(1.0, hp, n)
    ph = rng.uniform(0.0, hp, n)
    assert np.min(regions.P_cubic_coefficients(p0, ph)[1]) >= 0.01  # V6

    p0 = rng.uniform(0.0, 783 / 1024, n)
    z = rng.uniform(779 / 1024, 1.0, n)
    c0, c1, c2, _ = regions.P_cubic_coefficients(p0, _zmap(p0, z))
    assert np.min(c2) > 0.0
    assert np.min(c0 - c1 * c1 / (4.0 * c2)) >= 0.5  # V8

    ph = rng.uniform(math.pi / 8, 3.0, n)
    assert np.min(regions.Q_cubic_coefficients(ph)[0]) > 1.9  # V9


def test_taylor_two_term_enclosure_is_sound():
    # c0(phi0, phi) must equal C3 phi0^3 + C1 phi for some values inside the
    # returned intervals, pointwise over the stated box.
    box = Box((Interval(0.0, 0.01), Interval(0.0, 0.021)))
    c3, c1 = certify.taylor_enclose_P_coeff("v0", box)
    rng = np.random.default_rng(8)
    p0 = rng.uniform(0.0, 0.01, 100_000)
    ph = rng.uniform(0.0, 0.021, 100_000)
    val = regions.P_cubic_coefficients(p0, ph)[0]
    lo = c3.lo * p0**3 + c1.lo * ph
    hi = c3.hi * p0**3 + c1.hi * ph
    assert np.all(val >= lo - 1e-13)
    assert np.all(val <= hi + 1e-13)

    box2 = Box((Interval(0.0, 0.11), Interval(0.0, 0.0006)))
    d3, d1 = certify.taylor_enclose_P_coeff("v2", box2)
    p0 = rng.uniform(0.0, 0.11, 100_000)
    ph = rng.uniform(0.0, 0.0006, 100_000)
    val = regions.P_cubic_coefficients(p0, ph)[2]
    lo = d3.lo * p0**3 + d1.lo * ph
    hi = d3.hi * p0**3 + d1.hi * ph
    assert np.all(val >= lo - 1e-13)
    assert np.all(val <= hi + 1e-13)


def test_taylor_narrows_on_smaller_boxes():
    full = Box((Interval(0.0, 0.01), Interval(0.0, 0.021)))
    smaller = Box((Interval(0.0, 0.005), Interval(0.0, 0.01)))
    f3, f1 = certify.taylor_enclose_P_coeff("v0", full)
    s3, s1 = certify.taylor_enclose_P_coeff("v0", smaller)
    assert f3.encloses(s3)
    assert f1.encloses(s1)


def test_taylor_rejects_out_of_domain_boxes():
    with pytest.raises(ValueError):
        certify.taylor_enclose_P_coeff("v0", Box((Interval(0.0, 0.02), Interval(0.0, 0.021))))
    with pytest.raises(ValueError):
        certify.taylor_enclose_P_coeff("v2", Box((Interval(-0.01, 0.1), Interval(0.0, 0.0005))))
    with pytest.raises(ValueError):
        certify.taylor_enclose_P_coeff("v1", Box((Interval(0.0, 0.01), Interval(0.0, 0.02))))


def test_sqrt6_rational_bracket():
    lo, hi = certify._SQRT6_LO, certify._SQRT6_HI
    assert lo * lo < 6 < hi * hi


# ---------------------------------------------------------------------------
# Sublevel enclosure.


def test_sublevel_halfplane_example():
    f = lambda b: b.dims[0]
    enc = certify.enclose_sublevel(f, 0.5, 4)
    assert not enc.is_empty
    (lo1, hi1), (lo2, hi2) = enc.bounds
    assert lo1 == 0 and lo2 == 0 and hi2 == 1
    # must contain the exact sublevel set; boundary cell may or may not drop
    assert hi1 in (Fraction(1, 2), Fraction(3, 4))


def test_sublevel_empty_sentinel():
    f = lambda b: Interval(1.0, 1.0)
    enc = certify.enclose_sublevel(f, 0.0, 4)
    assert enc.is_empty
    assert enc.cells_retained == 0
    with pytest.raises(ValueError):
        enc.to_box()


def test_sublevel_validates_denominator():
    with pytest.raises(ValueError):
        certify.enclose_sublevel(lambda b: b.dims[0], 0.5, 3)


def test_sublevel_dyadic_alignment_and_box_form():
    f = lambda b: b.dims[0] + b.dims[1]
    enc = certify.enclose_sublevel(f, 0.3, 16)
    assert not enc.is_empty
    for lo, hi in enc.bounds:
        assert 16 % lo.denominator == 0
        assert 16 % hi.denominator == 0
    box = enc.to_box()
    assert box.dims[0].lo <= float(enc.bounds[0][0])
