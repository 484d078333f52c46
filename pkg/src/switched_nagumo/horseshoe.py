"""Annulus/band geometry and numerical certification of the stretching relations.

The construction lives between two energy charts: the high-system energy
E1 (annulus M1_c between levels c and 0) and the low-system energy E0
(band W between the levels through (p0,0) and (p1,0)).  Their difference
E1 - E0 = (n1 - n0) * integral(F)(x) depends on x alone, so the chart
(E1, E0) inverts exactly: x by scalar root-finding on the antiderivative,
y from either energy.  The upper rectangle A is the (E1, E0) product box
intersected with the quadrant x >= a_n1, y >= 0; B is its mirror image.

The verifier certifies, path by path, the relation "stretches along
paths": every admissible crossing path must contain a parameter interval
whose image crosses the target rectangle with endpoints on opposite
sides.  Certificates carry margins, not proofs: no interval arithmetic.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import (
    AnchorOrderViolation,
    ChartInversionFailure,
    InclusionFailure,
    OutOfRange,
    RegimeViolation,
)
from .flow import (
    DEFAULT_ATOL,
    DEFAULT_RTOL,
    high_phase_map_many,
    low_phase_map_many,
    rotation_angle,
    rotation_angle_many,
)
from .model import (
    energy,
    equilibria,
    homoclinic_extent,
    homoclinic_threshold,
    horseshoe_constants,
    matching_abscissa,
    saddle_center_threshold,
)
from .timemaps import conjugate_abscissa, slow_anchor_bound, transit_time

__all__ = [
    "RegionSet",
    "CrossingPath",
    "SeparationReport",
    "StretchReport",
    "PathRecord",
    "Certificate",
    "build_regions",
    "separation_report",
    "classify_symbol",
    "band_interval",
    "sample_crossing_path",
    "verify_stretch",
    "certify_horseshoe",
]


def band_interval(j):
    """Angle band of symbol j: theta(alpha, z) in [-(4j+1) pi/2, -2 j pi]."""
    return -(4 * j + 1) * 0.5 * math.pi, -2.0 * j * math.pi


@dataclass(frozen=True)
class RegionSet:
    """Geometry of the construction at one parameter set.

    ``c`` is the inner annulus level E1(pbar0, 0); the W band spans the low
    energies [e0_lo, e0_hi] = [E0(p1,0), E0(p0,0)].  Membership in the
    rectangles is the product of the two energy bands with the quadrant
    constraint (upper: y >= 0, lower: y <= 0, both x >= a_n1).
    """

    params: object
    pbar0: float
    p0: float
    p1: float
    c: float
    e0_hi: float
    e0_lo: float
    a_n1: float
    b_n1: float
    p_check0: float
    p_hat0: float
    p_star: float
    pbar0_plus: float
    constants: object
    mu_bar: float
    strict: bool

    # -- energies -------------------------------------------------------

    def high_energy(self, x, y):
        return energy(x, y, self.params.g, self.params.nl, self.params.n1)

    def low_energy(self, x, y):
        return energy(x, y, self.params.g, self.params.nl, self.params.n0)

    # -- chart ----------------------------------------------------------

    def chart_to_state(self, e1, e0, half=+1):
        """Invert (E1, E0) = (e1, e0) in the half-plane sign(y) = half.

        x solves integral(F)(x) = (e1 - e0)/(n1 - n0) on (a, 1), where the
        antiderivative is strictly increasing; y then follows from e1.
        """
        p = self.params
        val = (e1 - e0) / (p.n1 - p.n0)
        nl = p.nl
        f_a, f_1 = nl.integral(p.a), nl.integral(1.0)
        if not f_a < val < f_1:
            raise ChartInversionFailure(
                f"antiderivative target {val:.6g} outside ({f_a:.6g}, {f_1:.6g})")
        x = brentq(lambda s: nl.integral(s) - val, p.a, 1.0, xtol=1e-15)
        y2 = 2.0 * (e1 + 0.5 * p.g * x * x - p.n1 * nl.integral(x))
        if y2 < -1e-13:
            raise ChartInversionFailure(f"negative y^2 = {y2:.3e} at (e1, e0) = "
                                        f"({e1:.6g}, {e0:.6g})")
        return x, half * math.sqrt(max(y2, 0.0))

    # -- membership -----------------------------------------------------

    def rect_margins(self, z, rect):
        """Signed margins of the membership constraints (positive inside)."""
        x, y = float(z[0]), float(z[1])
        e1 = float(self.high_energy(x, y))
        e0 = float(self.low_energy(x, y))
        return {
            "e1_inner": e1 - self.c,
            "e1_outer": -e1,
            "e0_lo": e0 - self.e0_lo,
            "e0_hi": self.e0_hi - e0,
            "x": x - self.a_n1,
            "y": y if rect == "A" else -y,
        }

    def in_rect(self, z, rect, tol=0.0):
        return all(v >= -tol for v in self.rect_margins(z, rect).values())

    def in_upper(self, z, tol=0.0):
        return self.in_rect(z, "A", tol)

    def in_lower(self, z, tol=0.0):
        return self.in_rect(z, "B", tol)

    def reflect(self, z):
        return np.array([z[0], -z[1]])

    # -- paths and arcs --------------------------------------------------

    def path_point(self, rect, profile, t, refine=False):
        """Point of the profile-path at parameter t in [0, 1].

        Paths are straight lines in the energy chart.  In A the sweep
        coordinate is E1 from c (t=0, inner side) to 0 (t=1, outer side)
        with E0 held at profile*e0_hi + (1-profile)*e0_lo; in B the sweep
        is E0 from e0_hi (t=0) to e0_lo (t=1) with E1 held at profile*c.
        """
        if rect == "A":
            e1 = self.c * (1.0 - t)
            e0 = profile * self.e0_hi + (1.0 - profile) * self.e0_lo
            return self.chart_to_state(e1, e0, half=+1)
        e0 = self.e0_hi + t * (self.e0_lo - self.e0_hi)
        e1 = profile * self.c
        return self.chart_to_state(e1, e0, half=-1)

    def side_arc(self, rect, side, n):
        """Sampled side arc: for A the sides lie on E1 = c ('inner') and
        E1 = 0 ('outer'); for B on E0 = e0_hi ('hi') and E0 = e0_lo ('lo')."""
        ss = np.linspace(0.0, 1.0, n)
        if rect == "A":
            e1 = {"inner": self.c, "outer": 0.0}[side]
            pts = [self.chart_to_state(e1, s * self.e0_hi + (1 - s) * self.e0_lo, +1)
                   for s in ss]
        else:
            e0 = {"hi": self.e0_hi, "lo": self.e0_lo}[side]
            pts = [self.chart_to_state(s * self.c, e0, -1) for s in ss]
        return np.asarray(pts)

    def chart_grid_x(self, n=21):
        """x over an n-by-n chart grid of A (used for the inclusion check)."""
        e1s = np.linspace(self.c, 0.0, n)
        e0s = np.linspace(self.e0_lo, self.e0_hi, n)
        return np.array([[self.chart_to_state(e1, e0)[0] for e0 in e0s] for e1 in e1s])


def build_regions(params, pbar0=None, p0=None, mu_bar=None, strict=True,
                  inclusion_grid=21):
    """Assemble the RegionSet at the given anchors.

    ``pbar0`` (inner-level anchor) defaults to p*/2 and ``p0`` (W-band
    anchor) to (pbar0 + p*)/2, where p* = min(p_check0, p_hat0).  With
    strict=True the full ordering n0 < m0* and m2* < n1 (and n1 >= mu_bar)
    is enforced and the inclusion A within N_c is validated on a chart
    grid; strict=False builds the geometry whenever it exists (n0 < m0*,
    n1 > m1*), which is what the figure emitters need.
    """
    g, nl = params.g, params.nl
    m0 = saddle_center_threshold(g, nl)
    m1 = homoclinic_threshold(g, nl)
    if params.n0 >= m0:
        raise RegimeViolation(f"n0 = {params.n0:g} >= m0* = {m0:.6g}")
    if params.n1 <= m1:
        raise RegimeViolation(f"n1 = {params.n1:g} <= m1* = {m1:.6g}")
    hc = horseshoe_constants(params, mu_bar)
    if strict:
        if params.n1 <= hc.m2star:
            raise RegimeViolation(f"n1 = {params.n1:g} <= m2* = {hc.m2star:.6g}")
        if params.n1 < hc.mu_bar:
            raise RegimeViolation(f"n1 = {params.n1:g} < mu_bar = {hc.mu_bar:g}")
    p_chk = slow_anchor_bound(params)
    p_star = min(p_chk, hc.p_hat0)
    if pbar0 is None:
        pbar0 = 0.5 * p_star
    if p0 is None:
        p0 = 0.5 * (pbar0 + p_star)
    if not 0.0 < pbar0 < p0:
        raise AnchorOrderViolation(f"need 0 < pbar0 < p0, got {pbar0:g}, {p0:g}")
    if strict and not p0 < p_star:
        raise AnchorOrderViolation(f"p0 = {p0:g} >= p* = {p_star:.6g}")
    if p0 >= params.a:
        raise AnchorOrderViolation(f"p0 = {p0:g} >= a = {params.a:g}")

    a_n1, _ = equilibria(g, nl, params.n1)
    b_n1 = homoclinic_extent(g, nl, params.n1)
    c = float(energy(pbar0, 0.0, g, nl, params.n1))
    p1 = conjugate_abscissa(g, nl, params.n1, p0)
    e0_hi = float(energy(p0, 0.0, g, nl, params.n0))
    e0_lo = float(energy(p1, 0.0, g, nl, params.n0))
    regions = RegionSet(
        params=params, pbar0=pbar0, p0=p0, p1=p1, c=c, e0_hi=e0_hi, e0_lo=e0_lo,
        a_n1=a_n1, b_n1=b_n1, p_check0=p_chk, p_hat0=hc.p_hat0, p_star=p_star,
        pbar0_plus=matching_abscissa(nl, pbar0), constants=hc,
        mu_bar=hc.mu_bar, strict=strict)
    if strict:
        xs = regions.chart_grid_x(inclusion_grid)
        worst = float(np.min(xs) - a_n1)
        if worst < 0.0:
            raise InclusionFailure(
                f"A leaves the quarter-annulus: min(x - a_n1) = {worst:.3e} "
                "(n1 too small for this pbar0)")
    return regions


@dataclass(frozen=True)
class SeparationReport:
    """Level-ordering claim: the annulus stays above the W band left of a_n1."""

    min_zeta: float
    argmin_x: float
    floor: float          # g (p0^2 - pbar0^2) / 2, valid up to pbar0_plus
    pbar0_plus: float
    a_n1: float
    inclusion_ok: bool    # a_n1 <= pbar0_plus
    ok: bool              # min_zeta > 0


def separation_report(params, pbar0, p0, n_grid=1000):
    """Evaluate zeta(x) = zeta1(x, pbar0) - zeta0(x, p0) on [p0, a_n1].

    zeta_i(x, s) is half the squared level height at abscissa x of the
    E_i level anchored at (s, 0); positivity of zeta keeps the upper
    component of the intersection inside the quarter-annulus.
    """
    g, nl = params.g, params.nl
    a_n1, _ = equilibria(g, nl, params.n1)
    c = float(energy(pbar0, 0.0, g, nl, params.n1))
    e0_hi = float(energy(p0, 0.0, g, nl, params.n0))
    xs = np.linspace(p0, a_n1, n_grid)
    zeta = (c - e0_hi) - (params.n1 - params.n0) * nl.integral(xs)
    k = int(np.argmin(zeta))
    plus = matching_abscissa(nl, pbar0)
    return SeparationReport(
        min_zeta=float(zeta[k]), argmin_x=float(xs[k]),
        floor=0.5 * g * (p0 * p0 - pbar0 * pbar0),
        pbar0_plus=plus, a_n1=a_n1,
        inclusion_ok=a_n1 <= plus, ok=float(zeta[k]) > 0.0)


def classify_symbol(params, regions, z, p_symbols=2, rtol=DEFAULT_RTOL,
                    atol=DEFAULT_ATOL, theta=None):
    """Symbol j in {1..p_symbols} whose angle band contains theta(alpha, z), else None.

    ``z`` must lie in the quarter-annulus chart N_c (x >= a_n1, y >= 0,
    c <= E1(z) <= 0).  Band j is [-(4j+1) pi/2, -2 j pi]; the gaps between
    bands classify as None.
    """
    if p_symbols < 2:
        raise OutOfRange(f"p_symbols must be >= 2, got {p_symbols}")
    e1 = float(regions.high_energy(z[0], z[1]))
    if (z[0] < regions.a_n1 - 1e-9 or z[1] < -1e-9
            or e1 > 1e-9 or e1 < regions.c - 1e-9):
        raise OutOfRange(f"state {tuple(z)} outside the N_c chart")
    if theta is None:
        theta = rotation_angle(params, z, rtol=rtol, atol=atol)
    for j in range(1, p_symbols + 1):
        lo, hi = band_interval(j)
        if lo <= theta <= hi:
            return j
    return None


@dataclass
class CrossingPath:
    """Discretized chart-line path across a rectangle, side to side."""

    rect: str
    profile: float
    regions: RegionSet
    ts: np.ndarray
    points: np.ndarray

    def point_at(self, t):
        """Exact path point at parameter t (chart inversion, no interpolation)."""
        return np.asarray(self.regions.path_point(self.rect, self.profile, t))


def sample_crossing_path(regions, profile, n_points=129, rect="A", max_spacing=0.02):
    """Path across ``rect`` at the given transverse profile.

    Starts on the left side (A: inner level c; B: the e0_hi level) and
    ends on the right side; consecutive points are refined until closer
    than ``max_spacing`` in the plane.
    """
    if not 0.0 <= profile <= 1.0:
        raise OutOfRange(f"profile must lie in [0, 1], got {profile}")
    ts = list(np.linspace(0.0, 1.0, n_points))
    pts = [regions.path_point(rect, profile, t) for t in ts]
    if max_spacing is not None:
        for _ in range(8):
            dists = [math.hypot(pts[i + 1][0] - pts[i][0], pts[i + 1][1] - pts[i][1])
                     for i in range(len(pts) - 1)]
            if max(dists) <= max_spacing:
                break
            new_ts, new_pts = [ts[0]], [pts[0]]
            for i, d in enumerate(dists):
                if d > max_spacing:
                    tm = 0.5 * (ts[i] + ts[i + 1])
                    new_ts.append(tm)
                    new_pts.append(regions.path_point(rect, profile, tm))
                new_ts.append(ts[i + 1])
                new_pts.append(pts[i + 1])
            ts, pts = new_ts, new_pts
    return CrossingPath(rect=rect, profile=profile, regions=regions,
                        ts=np.asarray(ts), points=np.asarray(pts))


# ---------------------------------------------------------------------------
# stretching verification
# ---------------------------------------------------------------------------

class _PathSweep:
    """Per-path cache: angle profile, band windows, and located crossings."""

    def __init__(self, path, params, rtol, atol):
        self.path = path
        self.params = params
        self.rtol = rtol
        self.atol = atol
        self._theta = None
        self.band_windows = {}
        self.crossings = {}      # (map_id, d_select) -> (t1, t2) or None

    def theta_profile(self):
        """theta(alpha, .) along the path, refined while steps exceed pi/2.

        Near the outer boundary the angle varies on exponentially small
        parameter scales; refinement is capped and the window edges are
        resolved by bisection instead.
        """
        if self._theta is not None:
            return self._theta
        ts = list(self.path.ts)
        th = list(rotation_angle_many(self.params, self.path.points,
                                      rtol=self.rtol, atol=self.atol))
        for _ in range(6):
            jumps = [i for i in range(len(ts) - 1)
                     if abs(th[i + 1] - th[i]) >= 0.5 * math.pi]
            if not jumps:
                break
            mids = [0.5 * (ts[i] + ts[i + 1]) for i in jumps]
            pts = np.asarray([self.path.point_at(t) for t in mids])
            th_mid = rotation_angle_many(self.params, pts, rtol=self.rtol,
                                         atol=self.atol)
            for k in range(len(jumps) - 1, -1, -1):
                ts.insert(jumps[k] + 1, mids[k])
                th.insert(jumps[k] + 1, float(th_mid[k]))
        self._theta = (np.asarray(ts), np.asarray(th))
        return self._theta


def _theta_batch(sweeps, ts_per_sweep, rtol, atol):
    """theta(alpha) at one parameter per sweep, evaluated as one batch."""
    pts = np.asarray([sw.path.point_at(t)
                      for sw, t in zip(sweeps, ts_per_sweep)])
    params = sweeps[0].params
    return rotation_angle_many(params, pts, rtol=rtol, atol=atol)


def _map_batch(sweeps, ts_per_sweep, map_id, rtol, atol):
    pts = np.asarray([sw.path.point_at(t)
                      for sw, t in zip(sweeps, ts_per_sweep)])
    return _map_points(sweeps[0].params, map_id, pts, rtol, atol)


def _bisect_lockstep(fvec, lo, hi, sign_lo, tol, max_iter=60):
    """Vectorized bisection: roots of f_i between lo_i and hi_i.

    ``fvec`` evaluates all components at once (one batched integration per
    iteration); ``sign_lo`` is the known sign of f at the left bracket end.
    """
    lo = np.array(lo, dtype=float)
    hi = np.array(hi, dtype=float)
    for _ in range(max_iter):
        if np.max(hi - lo) <= tol:
            break
        mid = 0.5 * (lo + hi)
        v = fvec(mid)
        left = np.sign(v) == sign_lo
        lo = np.where(left, mid, lo)
        hi = np.where(left, hi, mid)
    return 0.5 * (lo + hi)


def _band_windows_lockstep(sweeps, j, refine_tol, rtol, atol):
    """Band-j windows for every sweep, edge-bisected in lockstep batches."""
    pending = [sw for sw in sweeps if j not in sw.band_windows]
    if not pending:
        return [sw.band_windows[j] for sw in sweeps]
    lo_edge, hi_edge = band_interval(j)
    active, br_out, br_in = [], [], []
    for sw in pending:
        ts, th = sw.theta_profile()
        above = th > hi_edge
        if above[0] or not np.any(above):
            sw.band_windows[j] = None
            continue
        i_up = int(np.argmax(above))
        below = th[:i_up] < lo_edge
        if not np.any(below):
            sw.band_windows[j] = None
            continue
        i_dn = int(np.max(np.nonzero(below)[0]))
        active.append(sw)
        br_out.append((ts[i_up - 1], ts[i_up]))
        br_in.append((ts[i_dn], ts[i_dn + 1]))
    if active:
        fvec_hi = lambda mid: _theta_batch(active, mid, rtol, atol) - hi_edge
        t_out = _bisect_lockstep(fvec_hi, [b[0] for b in br_out],
                                 [b[1] for b in br_out], -1.0, refine_tol)
        fvec_lo = lambda mid: _theta_batch(active, mid, rtol, atol) - lo_edge
        t_in = _bisect_lockstep(fvec_lo, [b[0] for b in br_in],
                                [b[1] for b in br_in], -1.0, refine_tol)
        for sw, ti, to in zip(active, t_in, t_out):
            sw.band_windows[j] = (float(ti), float(to)) if ti < to else None
    return [sw.band_windows[j] for sw in sweeps]


def _search_windows(sweeps, map_id, d_select, target, refine_tol, rtol, atol,
                    margin_floor, n_window):
    """Parameter windows to search for the target crossing, per sweep.

    For the high map this is the band window of the selected symbol set;
    for the composite map it is the crossing certified for the high map
    into the intermediate rectangle (computed on demand), which is where
    the low map then carries the image across the target.
    """
    if d_select is None:
        return [(0.0, 1.0)] * len(sweeps)
    _band_windows_lockstep(sweeps, d_select, refine_tol, rtol, atol)
    if map_id == "psi1":
        return [sw.band_windows[d_select] for sw in sweeps]
    # composite map: reuse (or build) the psi1 crossing subinterval
    key = ("psi1", d_select)
    if any(key not in sw.crossings for sw in sweeps):
        inter = "A" if target == "B" else "B"
        _verify_relation(sweeps, "psi1", d_select, inter, refine_tol, rtol,
                         atol, margin_floor, n_window)
    return [sw.crossings.get(key) for sw in sweeps]


def _verify_relation(sweeps, map_id, d_select, target, refine_tol, rtol, atol,
                     margin_floor, n_window):
    """Run the crossing search for one relation on every sweep (batched)."""
    params = sweeps[0].params
    regions = sweeps[0].path.regions
    (_, s_left), (_, s_right) = _target_sides(regions, target)
    lo_level, hi_level = min(s_left, s_right), max(s_left, s_right)
    label = {s_left: _target_sides(regions, target)[0][0],
             s_right: _target_sides(regions, target)[1][0]}
    corridor_tol = max(100.0 * margin_floor, 1e-5)

    windows = _search_windows(sweeps, map_id, d_select, target, refine_tol,
                              rtol, atol, margin_floor, n_window)
    records = [PathRecord(index=i, profile=sw.path.profile, ok=False,
                          band_window=(sw.band_windows.get(d_select)
                                       if d_select else None))
               for i, sw in enumerate(sweeps)]

    live = [i for i, w in enumerate(windows) if w is not None]
    for i, rec in enumerate(records):
        if windows[i] is None:
            rec.note = ("band not reached along the path" if d_select
                        else "empty search window")
    if not live:
        return records

    # sample every live window in one batch
    ts_all, pts_all = [], []
    for i in live:
        t_lo, t_hi = windows[i]
        ts = np.linspace(t_lo, t_hi, n_window)
        ts_all.append(ts)
        pts_all.extend(sweeps[i].path.point_at(t) for t in ts)
    imgs_all = _map_points(params, map_id, np.asarray(pts_all), rtol, atol)
    m_all = np.asarray(_transverse(regions, target, imgs_all))

    # candidate transitions per path: one outside side to the other
    cand = []  # (sweep_idx, i_enter, i_exitL, enter_level, exit_level)
    for row, i in enumerate(live):
        ts = ts_all[row]
        m = m_all[row * n_window:(row + 1) * n_window]
        code = np.where(m < lo_level, -1, np.where(m > hi_level, 1, 0))
        k0 = 0
        found = []
        while k0 < n_window - 1:
            if code[k0] == 0:
                k0 += 1
                continue
            k1 = k0 + 1
            while k1 < n_window and code[k1] == 0:
                k1 += 1
            if k1 == n_window:
                break
            if code[k1] == -code[k0]:
                enter = hi_level if code[k0] > 0 else lo_level
                exit_ = lo_level if code[k0] > 0 else hi_level
                found.append((i, ts[k0], ts[k0 + 1], ts[k1 - 1], ts[k1],
                              enter, exit_, int(code[k0])))
            k0 = k1
        records[i].n_candidates = len(found)
        if found:
            cand.append(found[0])  # first full transition along the path
        else:
            records[i].note = "no image crossing of the target band"

    if not cand:
        return records

    csweeps = [sweeps[c[0]] for c in cand]
    enter_levels = np.array([c[5] for c in cand])
    exit_levels = np.array([c[6] for c in cand])
    sign_enter = np.array([float(c[7]) for c in cand])

    def fvec_enter(mid):
        img = _map_batch(csweeps, mid, map_id, rtol, atol)
        return np.asarray(_transverse(regions, target, img)) - enter_levels

    def fvec_exit(mid):
        img = _map_batch(csweeps, mid, map_id, rtol, atol)
        return np.asarray(_transverse(regions, target, img)) - exit_levels

    t1 = _bisect_lockstep(fvec_enter, [c[1] for c in cand], [c[2] for c in cand],
                          sign_enter, refine_tol)
    # at the exit bracket's left end m is still on the entry side of the
    # exit level, so the sign there matches the entry code as well
    t2 = _bisect_lockstep(fvec_exit, [c[3] for c in cand], [c[4] for c in cand],
                          sign_enter, refine_tol)

    # validation sub-samples, one batch across all candidates
    k_sub = max(n_window // 2, 17)
    sub_pts = []
    for row, c in enumerate(cand):
        ts = np.linspace(t1[row], t2[row], k_sub)
        sub_pts.extend(csweeps[row].path.point_at(t) for t in ts)
    sub_imgs = _map_points(params, map_id, np.asarray(sub_pts), rtol, atol)
    sub_m = np.asarray(_transverse(regions, target, sub_imgs))
    if d_select is not None:
        sub_th = rotation_angle_many(params, np.asarray(sub_pts), rtol=rtol,
                                     atol=atol)
        lo_edge, hi_edge = band_interval(d_select)

    band_width = hi_level - lo_level
    for row, c in enumerate(cand):
        i = c[0]
        rec = records[i]
        sl = slice(row * k_sub, (row + 1) * k_sub)
        mvals = sub_m[sl]
        imgs = sub_imgs[sl]
        # the located endpoints sit on the side levels only to bisection
        # resolution (refine_tol on the parameter times a possibly huge
        # slope); the corridor check applies to strictly interior samples
        corridor_ok = bool(np.all((mvals[1:-1] >= lo_level - corridor_tol)
                                  & (mvals[1:-1] <= hi_level + corridor_tol)))
        endpoint_residual = max(abs(float(mvals[0]) - enter_levels[row]),
                                abs(float(mvals[-1]) - exit_levels[row]))
        endpoints_ok = endpoint_residual <= 0.1 * band_width
        mem = min(min(_nontransverse_margins(regions, target, img).values())
                  for img in imgs)
        sep = min(abs(mvals[0] - exit_levels[row]),
                  abs(mvals[-1] - enter_levels[row]))
        margins = {"target_membership": float(mem), "side_separation": float(sep)}
        if d_select is not None:
            th = sub_th[sl]
            margins["domain_band"] = float(
                np.min(np.minimum(th - lo_edge, hi_edge - th)))
        rec.crossing = (float(t1[row]), float(t2[row]))
        rec.start_side = label[enter_levels[row]]
        rec.end_side = label[exit_levels[row]]
        rec.margins = margins
        rec.endpoint_residual = endpoint_residual
        rec.ok = (corridor_ok and endpoints_ok
                  and all(v > margin_floor for v in margins.values()))
        if not corridor_ok:
            rec.note = "image leaves the target band between the side crossings"
        elif not endpoints_ok:
            rec.note = "side crossing not resolved to a tenth of the band width"
        elif not rec.ok:
            rec.note = "margin below the certification floor"
        sweeps[i].crossings[(map_id, d_select)] = rec.crossing if rec.ok else None
    return records


@dataclass
class PathRecord:
    """Outcome of the crossing search on one path."""

    index: int
    profile: float
    ok: bool
    band_window: tuple | None = None
    crossing: tuple | None = None
    start_side: str = ""
    end_side: str = ""
    margins: dict = field(default_factory=dict)
    endpoint_residual: float = 0.0
    n_candidates: int = 0
    note: str = ""


@dataclass
class StretchReport:
    """Result of verify_stretch for one relation."""

    map_id: str
    d_select: int | None
    source: str
    target: str
    records: list
    passed: bool
    min_margins: dict

    @property
    def min_margin(self):
        return min(self.min_margins.values()) if self.min_margins else math.inf


def _target_sides(regions, target):
    if target == "A":
        return ("inner", regions.c), ("outer", 0.0)
    return ("hi", regions.e0_hi), ("lo", regions.e0_lo)


def _transverse(regions, target, img):
    x, y = img[..., 0], img[..., 1]
    return (regions.high_energy(x, y) if target == "A"
            else regions.low_energy(x, y))


def _nontransverse_margins(regions, target, img):
    m = regions.rect_margins(img, target)
    drop = ("e1_inner", "e1_outer") if target == "A" else ("e0_lo", "e0_hi")
    return {k: v for k, v in m.items() if k not in drop}


def _map_points(params, map_id, pts, rtol, atol):
    if map_id == "psi0":
        return low_phase_map_many(params, pts, rtol=rtol, atol=atol)
    img1 = high_phase_map_many(params, pts, rtol=rtol, atol=atol)
    if map_id == "psi1":
        return img1
    if map_id == "psi":
        return low_phase_map_many(params, img1, rtol=rtol, atol=atol)
    raise OutOfRange(f"unknown map id {map_id!r}")


def verify_stretch(params, regions, map_id, d_select=None, source="A", target="B",
                   n_paths=64, n_points=129, refine_tol=1e-10,
                   rtol=DEFAULT_RTOL, atol=DEFAULT_ATOL, margin_floor=None,
                   sweeps=None, n_window=33):
    """Certify that (D, map) stretches the source rectangle across the target.

    For ``n_paths`` chart-line crossing paths (equispaced profiles), a
    parameter subinterval is located by continuity and lockstep bisection
    whose points lie in D (the symbol set ``d_select``, or the source
    rectangle itself when None), whose images lie in the target, and whose
    endpoint images sit on opposite target sides.  Failures are report
    content, not errors.
    """
    if margin_floor is None:
        margin_floor = 10.0 * rtol
    if sweeps is None:
        profiles = np.linspace(0.0, 1.0, n_paths) if n_paths > 1 else [0.5]
        sweeps = [_PathSweep(sample_crossing_path(regions, p, n_points, rect=source),
                             params, rtol, atol) for p in profiles]
    records = _verify_relation(sweeps, map_id, d_select, target, refine_tol,
                               rtol, atol, margin_floor, n_window)
    passed = all(r.ok for r in records)
    keys = set().union(*(r.margins.keys() for r in records)) if records else set()
    min_margins = {k: min(r.margins.get(k, math.inf) for r in records) for k in keys}
    return StretchReport(map_id=map_id, d_select=d_select, source=source,
                         target=target, records=records, passed=passed,
                         min_margins=min_margins)


# ---------------------------------------------------------------------------
# certification pipeline
# ---------------------------------------------------------------------------

@dataclass
class StageResult:
    name: str
    passed: bool
    margins: dict = field(default_factory=dict)
    data: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)


@dataclass
class Certificate:
    """Machine-readable record of every certification stage and margin."""

    passed: bool
    first_failure: str | None
    stages: list
    regions: RegionSet | None
    stretch_reports: dict
    p_symbols: int
    n_paths: int
    margin_floor: float
    config: dict

    @property
    def min_margin(self):
        vals = [v for st in self.stages for v in st.margins.values()]
        return min(vals) if vals else math.inf

    def to_text(self):
        lines = ["certificate", f"  pass = {str(self.passed).lower()}",
                 f"  first_failure = {self.first_failure or 'none'}",
                 f"  min_margin = {self.min_margin:.17e}",
                 f"  p_symbols = {self.p_symbols}",
                 f"  n_paths = {self.n_paths}",
                 f"  margin_floor = {self.margin_floor:.17e}",
                 "  config"]
        for k, v in self.config.items():
            lines.append(f"    {k} = {_fmt(v)}")
        for st in self.stages:
            lines.append(f"  stage {st.name}")
            lines.append(f"    pass = {str(st.passed).lower()}")
            for k, v in st.checks.items():
                lines.append(f"    check {k} = {str(bool(v)).lower()}")
            for k, v in st.margins.items():
                lines.append(f"    margin {k} = {_fmt(v)}")
            for k, v in st.data.items():
                lines.append(f"    {k} = {_fmt(v)}")
        return "\n".join(lines) + "\n"

    def paths_csv(self):
        """Per-path crossing records of every stretch relation, as CSV text."""
        cols = ["relation", "path", "profile", "band_in", "band_out", "t1", "t2",
                "start_side", "end_side", "ok", "margin_side_separation",
                "margin_target_membership", "margin_domain_band", "note"]
        rows = [",".join(cols)]
        for rel, report in self.stretch_reports.items():
            for r in report.records:
                bw = r.band_window or (math.nan, math.nan)
                cr = r.crossing or (math.nan, math.nan)
                rows.append(",".join([
                    rel, str(r.index), _fmt(r.profile), _fmt(bw[0]), _fmt(bw[1]),
                    _fmt(cr[0]), _fmt(cr[1]), r.start_side, r.end_side,
                    str(r.ok).lower(),
                    _fmt(r.margins.get("side_separation", math.nan)),
                    _fmt(r.margins.get("target_membership", math.nan)),
                    _fmt(r.margins.get("domain_band", math.nan)),
                    r.note.replace(",", ";")]))
        return "\n".join(rows) + "\n"


def _fmt(v):
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, float):
        return f"{v:.17e}"
    return str(v)


def certify_horseshoe(params, pbar0=None, p0=None, mu_bar=None, p_symbols=2,
                      n_paths=64, n_points=129, refine_tol=1e-10,
                      rtol=DEFAULT_RTOL, atol=DEFAULT_ATOL, arc_samples=65,
                      n_window=33):
    """Run the full certification pipeline and return a Certificate.

    Stages, in order: regime inequalities; anchor/timing inequalities;
    the level-separation claim; the inclusion of A in the quarter-annulus;
    angle-band reachability on the side arcs; the stretching relations of
    every symbol set under the high map, of the lower rectangle under the
    low map, and of every symbol set under the full period map; the
    crossing-order consistency of the located band windows.  A failing
    stage stops the pipeline and is recorded as first_failure.
    """
    margin_floor = 10.0 * rtol
    stages = []
    stretch_reports = {}
    config = dict(g=params.g, a=params.a, n0=params.n0, n1=params.n1,
                  alpha=params.alpha, beta=params.beta,
                  pbar0=pbar0, p0=p0, mu_bar=mu_bar, p_symbols=p_symbols,
                  n_paths=n_paths, refine_tol=refine_tol, rtol=rtol, atol=atol)

    def finish(passed, first_failure, regions=None):
        cfg = dict(config)
        if regions is not None:
            cfg.update(pbar0=regions.pbar0, p0=regions.p0, mu_bar=regions.mu_bar)
        return Certificate(passed=passed, first_failure=first_failure,
                           stages=stages, regions=regions,
                           stretch_reports=stretch_reports, p_symbols=p_symbols,
                           n_paths=n_paths, margin_floor=margin_floor, config=cfg)

    # -- stage 1: regime -------------------------------------------------
    g, nl = params.g, params.nl
    m0 = saddle_center_threshold(g, nl)
    st = StageResult("regime", passed=False)
    stages.append(st)
    st.checks["h0"] = params.satisfies_h0
    st.margins["m0star_minus_n0"] = m0 - params.n0
    st.data["m0star"] = m0
    if not params.satisfies_h0 or params.n0 >= m0:
        return finish(False, "regime")
    m1 = homoclinic_threshold(g, nl)
    hc = horseshoe_constants(params, mu_bar)
    st.data.update(m1star=m1, m2star=hc.m2star, kappa=hc.kappa, eta=hc.eta,
                   mu_star=hc.mu_star, mu_tilde=hc.mu_tilde, mu_bar=hc.mu_bar)
    st.margins["n1_minus_m2star"] = params.n1 - hc.m2star
    st.margins["n1_minus_mu_bar"] = params.n1 - hc.mu_bar
    st.passed = all(v > 0 for v in st.margins.values())
    if not st.passed:
        return finish(False, "regime")

    # -- stage 2: anchors and timing inequalities ------------------------
    st = StageResult("timing", passed=False)
    stages.append(st)
    try:
        regions = build_regions(params, pbar0, p0, mu_bar, strict=True)
    except (RegimeViolation, AnchorOrderViolation, InclusionFailure) as exc:
        st.data["error"] = str(exc)
        return finish(False, "timing")
    st.data.update(p_check0=regions.p_check0, p_hat0=regions.p_hat0,
                   p_star=regions.p_star, pbar0=regions.pbar0, p0=regions.p0,
                   p1=regions.p1, c=regions.c, e0_hi=regions.e0_hi,
                   e0_lo=regions.e0_lo, a_n1=regions.a_n1, b_n1=regions.b_n1)
    st.margins["pstar_minus_p0"] = regions.p_star - regions.p0
    st.margins["p0_minus_pbar0"] = regions.p0 - regions.pbar0
    half_gap = 0.5 * params.low_duration
    sig_slow = transit_time(g, nl, params.n0, regions.p0, params.a)
    sig_fast = (transit_time(g, nl, params.n0, regions.p1, regions.b_n1)
                if regions.p1 < regions.b_n1 else 0.0)
    st.data.update(sigma0_p0_a=sig_slow, sigma0_p1_bn1=sig_fast, half_gap=half_gap)
    st.margins["slow_transit"] = sig_slow - half_gap       # (3pck) at p0
    st.margins["fast_transit"] = half_gap - sig_fast       # (3phat) at p0
    st.checks["kappa_sufficient"] = regions.p1 > regions.b_n1 / regions.constants.kappa
    st.passed = all(v > margin_floor for v in st.margins.values())
    if not st.passed:
        return finish(False, "timing", regions)

    # -- stage 3: separation claim ---------------------------------------
    st = StageResult("separation", passed=False)
    stages.append(st)
    sep = separation_report(params, regions.pbar0, regions.p0)
    st.margins["min_zeta"] = sep.min_zeta
    st.margins["inclusion_x"] = sep.pbar0_plus - sep.a_n1
    st.data.update(floor=sep.floor, argmin_x=sep.argmin_x,
                   pbar0_plus=sep.pbar0_plus)
    st.checks["floor_respected"] = sep.min_zeta >= sep.floor - 1e-12 or \
        sep.argmin_x > sep.pbar0_plus
    st.passed = all(v > margin_floor for v in st.margins.values())
    if not st.passed:
        return finish(False, "separation", regions)

    # -- stage 4: inclusion grid ------------------------------------------
    st = StageResult("inclusion", passed=False)
    stages.append(st)
    xs = regions.chart_grid_x(21)
    st.margins["min_x_minus_an1"] = float(np.min(xs)) - regions.a_n1
    st.data["max_x"] = float(np.max(xs))
    st.passed = st.margins["min_x_minus_an1"] > margin_floor
    if not st.passed:
        return finish(False, "inclusion", regions)

    # -- stage 5: band reachability on the side arcs ----------------------
    st = StageResult("band_reachability", passed=False)
    stages.append(st)
    inner = regions.side_arc("A", "inner", arc_samples)
    outer = regions.side_arc("A", "outer", arc_samples)
    th_in = rotation_angle_many(params, inner, rtol=rtol, atol=atol)
    th_out = rotation_angle_many(params, outer, rtol=rtol, atol=atol)
    deepest = band_interval(p_symbols)[0]
    st.data.update(inner_theta_max=float(np.max(th_in)),
                   inner_theta_min=float(np.min(th_in)),
                   outer_theta_min=float(np.min(th_out)),
                   deepest_band_edge=deepest)
    st.margins["inner_band"] = deepest - float(np.max(th_in))
    st.margins["outer_band"] = float(np.min(th_out)) - (-2.0 * math.pi)
    # The exact fact theta(alpha) > -pi on the zero level is not double-
    # precision resolvable once saddle noise amplification e^(lambda alpha)
    # exceeds the true margin (which itself decays like e^(-lambda alpha));
    # the crossing construction only consumes the -2 pi edge above.  Assert
    # non-violation within a resolution-aware envelope and report the raw value.
    lam_saddle = math.sqrt(g + params.n1 * abs(nl.slope(0.0)))
    envelope = min(0.5 * math.pi,
                   1e3 * rtol * math.exp(min(lam_saddle * params.alpha, 40.0)))
    st.checks["outer_near_minus_pi"] = float(np.min(th_out)) > -math.pi - envelope
    st.data["outer_homoclinic_margin"] = float(np.min(th_out)) + math.pi
    st.data["saddle_noise_envelope"] = envelope
    st.passed = (all(v > margin_floor for v in st.margins.values())
                 and st.checks["outer_near_minus_pi"])
    if not st.passed:
        return finish(False, "band_reachability", regions)

    # -- stage 6: stretching relations ------------------------------------
    st = StageResult("stretching", passed=False)
    stages.append(st)
    profiles = np.linspace(0.0, 1.0, n_paths) if n_paths > 1 else [0.5]
    sweeps_a = [_PathSweep(sample_crossing_path(regions, p, n_points, rect="A"),
                           params, rtol, atol) for p in profiles]
    sweeps_b = [_PathSweep(sample_crossing_path(regions, p, n_points, rect="B"),
                           params, rtol, atol) for p in profiles]
    relations = []
    for j in range(1, p_symbols + 1):
        relations.append((f"psi1_D{j}", "psi1", j, "B", sweeps_a))
    relations.append(("psi0_B", "psi0", None, "A", sweeps_b))
    for j in range(1, p_symbols + 1):
        relations.append((f"psi_D{j}", "psi", j, "A", sweeps_a))
    for name, map_id, d_sel, target, sweeps in relations:
        rep = verify_stretch(params, regions, map_id, d_sel,
                             source=("A" if sweeps is sweeps_a else "B"),
                             target=target, refine_tol=refine_tol, rtol=rtol,
                             atol=atol, margin_floor=margin_floor, sweeps=sweeps,
                             n_window=n_window)
        stretch_reports[name] = rep
        for k, v in rep.min_margins.items():
            st.margins[f"{name}_{k}"] = v
        st.checks[name] = rep.passed
    # composition consistency: psi1 and psi0 passing forces psi to pass
    for j in range(1, p_symbols + 1):
        implied = (stretch_reports[f"psi1_D{j}"].passed
                   and stretch_reports["psi0_B"].passed)
        st.checks[f"composition_D{j}"] = (not implied
                                          or stretch_reports[f"psi_D{j}"].passed)
    st.passed = all(st.checks.values()) and all(
        v > margin_floor for v in st.margins.values())
    if not st.passed:
        return finish(False, "stretching", regions)

    # -- stage 7: crossing order of the band windows ----------------------
    st = StageResult("crossing_order", passed=False)
    stages.append(st)
    worst_gap = math.inf
    ordered = True
    for sweep in sweeps_a:
        windows = [sweep.band_windows.get(j) for j in range(p_symbols, 0, -1)]
        if any(w is None for w in windows):
            ordered = False
            continue
        flat = [t for w in windows for t in w]
        gaps = np.diff(flat)
        worst_gap = min(worst_gap, float(np.min(gaps)))
        ordered = ordered and bool(np.all(gaps > 0.0))
    st.margins["window_order_gap"] = worst_gap
    st.checks["ordered"] = ordered
    st.passed = ordered and worst_gap > 0.0
    if not st.passed:
        return finish(False, "crossing_order", regions)

    return finish(True, None, regions)
