"""Itineraries, periodic orbit search, solution-level verification."""
import numpy as np
import pytest

from switched_nagumo import (
    Itinerary,
    NotFound,
    OutOfRange,
    equilibria,
    find_periodic,
    shadow_finite,
    verify_itinerary,
)
from switched_nagumo.flow import rotation_angle
from switched_nagumo.horseshoe import band_interval


def test_itinerary_parsing():
    it = Itinerary.parse("1,2,1")
    assert it.symbols == (1, 2, 1)
    assert it.periodic
    assert len(it) == 3
    assert it.symbol(3) == 1
    assert it.p_symbols == 2
    assert Itinerary.parse("3").p_symbols == 3
    assert Itinerary.parse("2 1 2").symbols == (2, 1, 2)
    with pytest.raises(OutOfRange):
        Itinerary(())
    with pytest.raises(OutOfRange):
        Itinerary((0, 1))
    with pytest.raises(OutOfRange):
        Itinerary.parse("")
    fin = Itinerary((1, 2), periodic=False)
    assert fin.symbol(1) == 2


def test_found_orbits_residuals_and_symbols(ref_orbits):
    orbits, _ = ref_orbits
    for key, orb in orbits.items():
        want = [int(s) for s in key.split(",")]
        assert orb.residual <= 1e-9
        assert orb.symbols_observed == want
        assert len(orb.points) == len(want)
        assert np.all(orb.band_margins > 0.0)


def test_orbit_anchors_in_their_bands(ref_params, ref_regions, ref_orbits):
    orbits, _ = ref_orbits
    for key, orb in orbits.items():
        want = [int(s) for s in key.split(",")]
        for z, j in zip(orb.points, want):
            assert ref_regions.in_upper(z, tol=1e-9)
            th = rotation_angle(ref_params, z, rtol=1e-12, atol=1e-14)
            lo, hi = band_interval(j)
            assert lo < th < hi


def test_shift_equivariance(ref_params, ref_regions, ref_orbits):
    """If z realizes (i1..im), psi(z) realizes the rotated block."""
    orbits, _ = ref_orbits
    orb = orbits["1,2"]
    rotated = find_periodic(ref_params, ref_regions, "2,1",
                            seed_orbits={1: orbits["1"], 2: orbits["2"]})
    # the rotated block's anchor set coincides with the original's
    d = min(np.linalg.norm(a - b) for a in orb.points for b in rotated.points)
    assert d < 1e-7
    assert rotated.symbols_observed == [2, 1]


def test_verify_itinerary_anchored(ref_params, ref_orbits):
    orbits, _ = ref_orbits
    orb = orbits["1,2"]
    rep = verify_itinerary(ref_params, orb.anchor, orb.itinerary,
                           horizon_blocks=4, anchors=orb.points,
                           rtol=1e-12, atol=1e-14)
    assert rep.ok and rep.reanchored
    assert [b.n_max for b in rep.blocks] == [2, 3, 2, 3]
    assert [b.n_min for b in rep.blocks] == [1, 2, 1, 2]
    for b in rep.blocks:
        assert b.convexity_min > 0.0
        assert b.entry_slope < 0.0 < b.exit_slope
    assert 0.0 < rep.confinement.x_min and rep.confinement.x_max < 1.0


def test_verify_itinerary_continuous_one_block(ref_params, ref_orbits):
    orbits, _ = ref_orbits
    orb = orbits["2"]
    rep = verify_itinerary(ref_params, orb.anchor, orb.itinerary,
                           horizon_blocks=1, rtol=1e-12, atol=1e-14)
    assert rep.ok
    assert rep.blocks[0].n_max == 3 and rep.blocks[0].n_min == 2


def test_verify_itinerary_rejects_equilibrium(ref_params, ref_regions):
    a1 = equilibria(ref_params.g, ref_params.nl, ref_params.n1)[0]
    rep = verify_itinerary(ref_params, (a1, 0.0), "1", horizon_blocks=1)
    assert not rep.ok
    assert not rep.blocks[0].counts_ok


def test_symbol_out_of_reach(ref_params, ref_regions):
    # band 3 needs faster winding than n1 = 30 provides at this alpha
    with pytest.raises((NotFound, OutOfRange)):
        find_periodic(ref_params, ref_regions, "3")


def test_shadow_finite(ref_params, ref_regions):
    states = shadow_finite(ref_params, ref_regions, Itinerary((1,), periodic=False))
    assert states.shape == (1, 2)
    z = states[0]
    assert ref_regions.in_upper(z, tol=1e-9)
    lo, hi = band_interval(1)
    assert lo <= rotation_angle(ref_params, z) <= hi
    # two-symbol block: iterates carry the prescribed symbols
    states = shadow_finite(ref_params, ref_regions,
                           Itinerary((2, 1), periodic=False), grid=32)
    assert states.shape == (2, 2)
    th0 = rotation_angle(ref_params, states[0], rtol=1e-12, atol=1e-14)
    assert band_interval(2)[0] <= th0 <= band_interval(2)[1]
    th1 = rotation_angle(ref_params, states[1], rtol=1e-12, atol=1e-14)
    assert band_interval(1)[0] <= th1 <= band_interval(1)[1]


def test_shadow_depth_degrades_gracefully(ref_params, ref_regions):
    # double-precision shadowing runs out on long blocks; the report
    # carries the deepest matched prefix
    deep = Itinerary((1,) * 12, periodic=False)
    try:
        states = shadow_finite(ref_params, ref_regions, deep, grid=24,
                               max_grid=48)
        assert states.shape == (12, 2)
    except NotFound as exc:
        assert exc.matched_depth >= 1
