"""Trajectories, phase maps, angle tracking, events."""
import math

import numpy as np
import pytest

from switched_nagumo import (
    CenterSingularity,
    Cubic,
    DegenerateCrossing,
    ModelParams,
    OutOfRange,
    confinement_report,
    count_extrema,
    energy,
    equilibria,
    flow_autonomous,
    flow_switched,
    high_phase_map,
    high_phase_map_many,
    homoclinic_extent,
    low_phase_map,
    low_phase_map_many,
    orbit_period,
    period_map,
    period_map_many,
    rotation_angle,
    rotation_angle_many,
)

NL4 = Cubic(0.4)
FIG2 = dict(g=0.1, nl=NL4, mu=10.0)


def test_equilibrium_is_constant():
    a_mu, _ = equilibria(0.1, NL4, 10.0)
    traj = flow_autonomous(0.1, NL4, 10.0, (a_mu, 0.0), 20.0)
    ts = np.linspace(0.0, 20.0, 101)
    x, y = traj.state(ts)
    assert np.max(np.abs(x - a_mu)) < 1e-9
    assert np.max(np.abs(y)) < 1e-9


def test_closed_orbit_returns():
    period, _ = orbit_period(0.1, NL4, 10.0, 0.07)
    traj = flow_autonomous(0.1, NL4, 10.0, (0.07, 0.0), period)
    assert np.linalg.norm(traj.state(period) - [0.07, 0.0]) < 1e-7
    assert count_extrema(traj, 0.0, period) == (1, 1)


def test_homoclinic_confinement():
    # a zero-level state near the origin stays inside (0, b_mu)
    b_mu = homoclinic_extent(0.1, NL4, 10.0)
    x0 = 0.01
    y0 = math.sqrt(2.0 * (0.05 * x0 * x0 - 10.0 * NL4.integral(x0)))
    traj = flow_autonomous(0.1, NL4, 10.0, (x0, y0), 30.0)
    rep = confinement_report(traj, resolution=1e-3)
    assert rep.x_min > 0.0
    assert rep.x_max < b_mu + 1e-6


def test_energy_drift():
    period, _ = orbit_period(0.1, NL4, 10.0, 0.07)
    traj = flow_autonomous(0.1, NL4, 10.0, (0.07, 0.0), 50.0)
    assert traj.energy_drift_rate() < 1e-9


def test_switched_segments_and_composition():
    p = ModelParams(g=0.1, a=0.4, n0=0.5, n1=50.0, alpha=5.0, beta=11.0)
    traj = flow_switched(p, (0.5, 0.1), p.beta)
    assert [(s.t0, s.t1, s.mu) for s in traj.segments] == [
        (0.0, 5.0, 50.0), (5.0, 11.0, 0.5)]
    # the period map is the composition by construction
    z_end = traj.state(p.beta)
    assert np.linalg.norm(z_end - period_map(p, (0.5, 0.1))) < 1e-10
    comp = low_phase_map(p, high_phase_map(p, (0.5, 0.1)))
    assert np.linalg.norm(comp - period_map(p, (0.5, 0.1))) < 1e-11


def test_switched_matches_autonomous_when_weights_collapse():
    # n0 = n1 is excluded by the params invariant; the limit is approached
    p = ModelParams(g=0.1, a=0.4, n0=0.5, n1=0.5 * (1 + 1e-13), alpha=2.0,
                    beta=5.0)
    sw = flow_switched(p, (0.3, 0.05), 5.0)
    au = flow_autonomous(0.1, NL4, 0.5, (0.3, 0.05), 5.0)
    ts = np.linspace(0.0, 5.0, 51)
    assert np.max(np.abs(sw.state(ts) - au.state(ts))) < 1e-9


def test_reversed_weight_order_differs():
    # the system is genuinely non-autonomous: psi0 . psi1 != psi1 . psi0;
    # values pinned at first build (Fig. 3 parameters)
    p = ModelParams(g=0.1, a=0.4, n0=0.1, n1=10.0, alpha=4.0, beta=6.0)
    z0 = (0.07, 0.0)
    fwd = low_phase_map(p, high_phase_map(p, z0))
    rev = high_phase_map(p, low_phase_map(p, z0))
    assert fwd == pytest.approx([-0.44352817, -0.41721831], abs=1e-6)
    assert rev == pytest.approx([0.25366800, -0.32609559], abs=1e-6)
    assert np.linalg.norm(fwd - rev) > 0.7


def test_reversibility_of_phase_maps():
    # both autonomous systems are reversible under (x, y, t) -> (x, -y, -t):
    # psi1(R psi1(z)) = R z with R the y-flip
    p = ModelParams(g=0.1, a=0.4, n0=0.5, n1=50.0, alpha=5.0, beta=11.0)
    rng = np.random.default_rng(2)
    for _ in range(5):
        # closed orbits around the center, away from the saddle where the
        # round trip amplifies integration error past the tolerance
        z = rng.uniform([0.45, -0.05], [0.65, 0.05])
        w = high_phase_map(p, z, rtol=1e-12, atol=1e-14)
        z_back = high_phase_map(p, (w[0], -w[1]), rtol=1e-12, atol=1e-14)
        assert np.linalg.norm(z_back - [z[0], -z[1]]) < 1e-9


def test_batched_maps_match_single():
    p = ModelParams(g=0.1, a=0.4, n0=0.5, n1=50.0, alpha=5.0, beta=11.0)
    rng = np.random.default_rng(4)
    Z = rng.uniform([0.3, -0.1], [0.6, 0.1], (16, 2))
    many = period_map_many(p, Z)
    single = np.array([period_map(p, z) for z in Z])
    assert np.max(np.abs(many - single)) < 1e-6
    many1 = high_phase_map_many(p, Z)
    single1 = np.array([high_phase_map(p, z) for z in Z])
    assert np.max(np.abs(many1 - single1)) < 1e-6


def test_jacobian_of_period_map_is_area_preserving():
    # each phase map is a Hamiltonian time map; det(D psi) = 1
    p = ModelParams(g=0.1, a=0.4, n0=0.5, n1=50.0, alpha=5.0, beta=11.0)
    z = np.array([0.5, 0.05])
    h = 1e-5
    J = np.empty((2, 2))
    for i in range(2):
        dz = np.zeros(2)
        dz[i] = h
        J[:, i] = (period_map(p, z + dz, rtol=1e-12, atol=1e-14)
                   - period_map(p, z - dz, rtol=1e-12, atol=1e-14)) / (2 * h)
    assert abs(np.linalg.det(J) - 1.0) < 1e-4


def test_rotation_angle_basics():
    p = ModelParams(g=0.1, a=0.4, n0=0.5, n1=50.0, alpha=5.0, beta=11.0)
    a1 = equilibria(p.g, p.nl, p.n1)[0]
    # initial angle convention: theta(0) in [0, pi/2] on the chart
    th = rotation_angle(p, (a1 + 1e-3, 0.0))
    # linearized rotation: theta(alpha) ~ -alpha * sqrt(n1 F'(a1) - g)
    omega = math.sqrt(p.n1 * p.nl.slope(a1) - p.g)
    expected = -p.alpha * omega
    # wrap-free comparison within a quarter turn
    assert th == pytest.approx(expected, abs=0.8)
    with pytest.raises(OutOfRange):
        rotation_angle(p, (a1 - 0.1, 0.1))
    with pytest.raises(CenterSingularity):
        rotation_angle(p, (a1, 0.0))


def test_winding_over_one_period():
    p0 = ModelParams(g=0.1, a=0.4, n0=0.5, n1=50.0, alpha=5.0, beta=11.0)
    period, x1 = orbit_period(p0.g, p0.nl, p0.n1, 0.07)
    p = ModelParams(g=0.1, a=0.4, n0=0.5, n1=50.0, alpha=period,
                    beta=period + 6.0)
    a1 = equilibria(p.g, p.nl, p.n1)[0]
    th0 = math.atan2(0.0, x1 - a1)
    th, states = rotation_angle_many(p, np.array([[x1, 0.0]]),
                                     return_states=True)
    assert th[0] - th0 == pytest.approx(-2.0 * math.pi, abs=1e-6)
    assert np.linalg.norm(states[0] - [x1, 0.0]) < 1e-7


def test_count_extrema_windows_and_degeneracy():
    period, _ = orbit_period(0.1, NL4, 10.0, 0.07)
    traj = flow_autonomous(0.1, NL4, 10.0, (0.07, 0.0), 2.0 * period)
    assert count_extrema(traj, 0.0, period) == (1, 1)
    assert count_extrema(traj, 0.0, 2.0 * period) == (2, 2)
    assert count_extrema(traj, 0.0, 0.45 * period) == (0, 0)
    # near-equilibrium orbit: slopes at the crossings fall below the
    # strictness threshold (integration atol must not swamp the amplitude)
    a_mu = equilibria(0.1, NL4, 10.0)[0]
    tiny = flow_autonomous(0.1, NL4, 10.0, (a_mu + 1e-13, 0.0), 10.0,
                           rtol=1e-12, atol=1e-16)
    assert len(tiny.maxima) or len(tiny.minima)
    with pytest.raises(DegenerateCrossing):
        count_extrema(tiny, 0.0, 10.0)


def test_confinement_report_boundary_cases():
    traj = flow_autonomous(0.1, NL4, 10.0, (0.0, 0.0), 5.0)
    rep = confinement_report(traj)
    assert not rep.confined          # x == 0 throughout fails strict positivity
    esc = flow_autonomous(0.1, NL4, 10.0, (0.5, 1.5), 10.0)
    rep = confinement_report(esc)
    assert not rep.confined
    assert rep.first_exit is not None
    assert rep.x_max > 1.0


def test_trajectory_csv_export(tmp_path):
    p = ModelParams(g=0.1, a=0.4, n0=0.5, n1=50.0, alpha=5.0, beta=11.0)
    traj = flow_switched(p, (0.5, 0.0), p.beta)
    path = tmp_path / "traj.csv"
    traj.to_csv(path, n_samples=101, header_lines=["g = 0.1"])
    lines = path.read_text().splitlines()
    assert lines[0] == "# g = 0.1"
    assert lines[1] == "t,x,y,n,E0,E1"
    assert len(lines) == 103
    row = lines[50].split(",")
    assert len(row) == 6
    float(row[0])  # parsable 17-digit scientific values
    assert "e" in row[1]
