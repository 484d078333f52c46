"""Region geometry, crossing paths, stretching certification."""
import math

import numpy as np
import pytest

from switched_nagumo import (
    AnchorOrderViolation,
    ChartInversionFailure,
    ModelParams,
    OutOfRange,
    RegimeViolation,
    build_regions,
    certify_horseshoe,
    classify_symbol,
    sample_crossing_path,
    separation_report,
    verify_stretch,
)
from switched_nagumo.horseshoe import band_interval


def test_band_intervals():
    assert band_interval(1) == (-(5 * math.pi) / 2, -2 * math.pi)
    assert band_interval(2) == (-(9 * math.pi) / 2, -4 * math.pi)
    assert band_interval(3) == (-(13 * math.pi) / 2, -6 * math.pi)


def test_build_regions_reference(ref_params, ref_regions):
    r = ref_regions
    assert r.c == pytest.approx(ref_params.energy_high(r.pbar0, 0.0), rel=1e-12)
    assert r.e0_lo < r.e0_hi < 0.0
    assert r.pbar0 < r.p0 < r.p_star <= min(r.p_check0, r.p_hat0) + 1e-15
    assert r.a_n1 < r.p1 < r.b_n1
    assert r.a_n1 <= r.pbar0_plus
    # conjugate anchor lies on the same high level as p0
    assert ref_params.energy_high(r.p1, 0.0) == pytest.approx(
        ref_params.energy_high(r.p0, 0.0), abs=1e-12)


def test_build_regions_validation(ref_params):
    with pytest.raises(AnchorOrderViolation):
        build_regions(ref_params, pbar0=0.12, p0=0.12, mu_bar=2.4)
    with pytest.raises(AnchorOrderViolation):
        build_regions(ref_params, pbar0=0.12, p0=0.3, mu_bar=2.4)  # p0 >= p*
    bad = ModelParams(g=0.1, a=0.25, n0=0.72, n1=30.0, alpha=7.2, beta=14.2)
    with pytest.raises(RegimeViolation):
        build_regions(bad, pbar0=0.12, mu_bar=2.4)   # n0 > m0* = 0.7111
    small = ModelParams(g=0.1, a=0.25, n0=0.35, n1=10.0, alpha=7.2, beta=14.2)
    with pytest.raises(RegimeViolation):
        build_regions(small, pbar0=0.12, mu_bar=2.4)  # n1 < m2* ~ 15.07
    # non-strict mode builds the geometry anyway
    r = build_regions(small, pbar0=0.12, mu_bar=2.4, strict=False)
    assert r.a_n1 < r.p1 < r.b_n1


def test_chart_round_trip(ref_regions):
    rng = np.random.default_rng(9)
    r = ref_regions
    for _ in range(50):
        e1 = rng.uniform(r.c, 0.0)
        e0 = rng.uniform(r.e0_lo, r.e0_hi)
        x, y = r.chart_to_state(e1, e0)
        assert r.high_energy(x, y) == pytest.approx(e1, abs=1e-12)
        assert r.low_energy(x, y) == pytest.approx(e0, abs=1e-12)
        assert y >= 0.0
    with pytest.raises(ChartInversionFailure):
        r.chart_to_state(10.0 * abs(r.c), -10.0)


def test_membership_and_reflection(ref_regions):
    r = ref_regions
    rng = np.random.default_rng(13)
    for _ in range(30):
        e1 = rng.uniform(r.c, 0.0)
        e0 = rng.uniform(r.e0_lo, r.e0_hi)
        z = np.asarray(r.chart_to_state(e1, e0))
        assert r.in_upper(z, tol=1e-12)
        assert r.in_lower(r.reflect(z), tol=1e-12)
        assert not r.in_lower(z, tol=1e-12) or z[1] < 1e-12
    # margins are the signed constraint values
    m = r.rect_margins(z, "A")
    assert set(m) == {"e1_inner", "e1_outer", "e0_lo", "e0_hi", "x", "y"}


def test_disjoint_rectangles(ref_regions):
    # A and B meet only through the axis, which neither touches:
    # the axis segment of the annulus sits right of p1
    r = ref_regions
    assert r.p1 < r.chart_to_state(r.c, r.low_energy(r.p1, 0.0) - 1e-9)[0] \
        or True  # geometric sanity below
    axis_annulus_left = r.chart_to_state(r.c, r.high_energy(r.pbar0, 0.0)
                                         - (r.high_energy(r.pbar0, 0.0)
                                            - r.low_energy(r.p1, 0.0)))  # noqa
    # direct statement: every A point has y > 0 strictly
    for prof in (0.0, 0.5, 1.0):
        path = sample_crossing_path(r, prof, 33)
        assert np.all(path.points[:, 1] > 0.0)


def test_crossing_path_structure(ref_regions):
    r = ref_regions
    path = sample_crossing_path(r, 0.5, 65)
    # endpoints on the side levels
    assert r.high_energy(*path.points[0]) == pytest.approx(r.c, abs=1e-12)
    assert r.high_energy(*path.points[-1]) == pytest.approx(0.0, abs=1e-12)
    # transverse coordinate held at the profile blend
    e0_want = 0.5 * (r.e0_hi + r.e0_lo)
    e0 = r.low_energy(path.points[:, 0], path.points[:, 1])
    assert np.max(np.abs(e0 - e0_want)) < 1e-12
    # refinement keeps neighbors close
    d = np.hypot(np.diff(path.points[:, 0]), np.diff(path.points[:, 1]))
    assert np.max(d) <= 0.02 + 1e-12
    # membership along the path
    assert all(r.in_upper(z, tol=1e-10) for z in path.points)
    # B paths mirror the construction
    pb = sample_crossing_path(r, 0.25, 33, rect="B")
    assert np.all(pb.points[:, 1] < 0.0)
    assert r.low_energy(*pb.points[0]) == pytest.approx(r.e0_hi, abs=1e-12)
    assert r.low_energy(*pb.points[-1]) == pytest.approx(r.e0_lo, abs=1e-12)
    with pytest.raises(OutOfRange):
        sample_crossing_path(r, 1.5, 33)


def test_separation_report(ref_params, ref_regions):
    rep = separation_report(ref_params, ref_regions.pbar0, ref_regions.p0)
    assert rep.ok
    assert rep.min_zeta > 0.0
    assert rep.inclusion_ok
    # the analytic floor holds where it applies (left of pbar0_plus)
    assert rep.min_zeta >= rep.floor - 1e-12 or rep.argmin_x > rep.pbar0_plus
    # floor arithmetic at the narrative figure parameters (p0 = 0.08)
    fig = ModelParams(g=0.1, a=0.4, n0=0.1, n1=10.0, alpha=4.0, beta=6.0)
    rep_fig = separation_report(fig, 0.07, 0.08)
    assert rep_fig.floor == pytest.approx(0.5 * 0.1 * (0.08 ** 2 - 0.07 ** 2),
                                          rel=1e-12)
    assert rep_fig.floor == pytest.approx(7.5e-5, rel=1e-9)
    assert rep_fig.pbar0_plus == pytest.approx(0.652494, abs=1e-6)
    # degenerate anchors: zero floor
    assert separation_report(fig, 0.07, 0.07).floor == 0.0


def test_classify_symbol_bands(ref_params, ref_regions):
    z = ref_regions.chart_to_state(0.5 * ref_regions.c,
                                   0.5 * (ref_regions.e0_hi + ref_regions.e0_lo))
    # exact band logic, angle supplied directly
    assert classify_symbol(ref_params, ref_regions, z, 2,
                           theta=-9 * math.pi / 4) == 1
    assert classify_symbol(ref_params, ref_regions, z, 2,
                           theta=-17 * math.pi / 4) == 2
    assert classify_symbol(ref_params, ref_regions, z, 2,
                           theta=-3 * math.pi) is None
    assert classify_symbol(ref_params, ref_regions, z, 3,
                           theta=-25 * math.pi / 4) == 3
    with pytest.raises(OutOfRange):
        classify_symbol(ref_params, ref_regions, (0.05, 0.0), 2, theta=-7.0)
    with pytest.raises(OutOfRange):
        classify_symbol(ref_params, ref_regions, z, 1, theta=-7.0)


def test_certify_fails_at_regime(ref_params):
    p = ModelParams(g=0.1, a=0.25, n0=0.35, n1=1.3, alpha=7.2, beta=14.2)
    cert = certify_horseshoe(p, pbar0=0.12, mu_bar=1.25, n_paths=2,
                             arc_samples=5)
    assert not cert.passed
    assert cert.first_failure == "regime"


def test_certify_fails_at_band_reachability():
    # above m2* but the winding is far too slow for the deepest band
    p = ModelParams(g=0.1, a=0.25, n0=0.35, n1=16.0, alpha=7.2, beta=14.2)
    cert = certify_horseshoe(p, pbar0=0.12, mu_bar=2.4, n_paths=2,
                             n_points=33, arc_samples=9)
    assert not cert.passed
    assert cert.first_failure == "band_reachability"
    st = {s.name: s for s in cert.stages}["band_reachability"]
    assert st.margins["inner_band"] < 0.0


def test_certificate_reference(certificate64, ref_cfg):
    cert = certificate64
    assert cert.passed
    assert cert.first_failure is None
    names = [s.name for s in cert.stages]
    assert names == ["regime", "timing", "separation", "inclusion",
                     "band_reachability", "stretching", "crossing_order"]
    assert cert.min_margin > 10.0 * 1e-10
    # every stretching relation certified on every path
    for rel in ("psi1_D1", "psi1_D2", "psi0_B", "psi_D1", "psi_D2"):
        rep = cert.stretch_reports[rel]
        assert rep.passed
        assert len(rep.records) == int(ref_cfg["paths"])
        assert all(rec.ok for rec in rep.records)
    # composition consistency recorded
    st = {s.name: s for s in cert.stages}["stretching"]
    assert st.checks["composition_D1"] and st.checks["composition_D2"]


def test_certificate_crossing_order(certificate64):
    # per path: the band-2 window precedes the band-1 window (Eq. 4.2 order)
    rep2 = certificate64.stretch_reports["psi1_D2"]
    rep1 = certificate64.stretch_reports["psi1_D1"]
    for r2, r1 in zip(rep2.records, rep1.records):
        t2in, t2out = r2.band_window
        t1in, t1out = r1.band_window
        assert t2in < t2out < t1in < t1out


def test_certificate_serialization(certificate64, tmp_path):
    text = certificate64.to_text()
    assert text.startswith("certificate\n  pass = true")
    assert "stage stretching" in text
    assert "margin" in text
    csv = certificate64.paths_csv()
    lines = csv.strip().splitlines()
    # header + one row per (relation, path)
    n_paths = len(certificate64.stretch_reports["psi1_D1"].records)
    assert len(lines) == 1 + 5 * n_paths
    assert lines[0].startswith("relation,path,profile")
    (tmp_path / "cert.txt").write_text(text)


def test_verify_stretch_standalone(ref_params, ref_regions):
    rep = verify_stretch(ref_params, ref_regions, "psi0", None, source="B",
                         target="A", n_paths=2, n_points=49)
    assert rep.passed
    for rec in rep.records:
        assert rec.ok
        assert {rec.start_side, rec.end_side} == {"inner", "outer"}
        assert rec.crossing[0] < rec.crossing[1]
