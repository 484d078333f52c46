"""Integration of the autonomous and switched systems, phase maps, angles.

The vector field is x' = y, y' = g x - n F_ext(x) with the clamped
reaction term, so all solutions are global.  Integration uses an
adaptive embedded Runge-Kutta 5(4) pair with dense output; the switched
system is integrated segment by segment so no step straddles a weight
switch.  Events (axis crossings of y, i.e. extrema of x) are localized
on the dense output by the solver's root finder.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .errors import (
    CenterSingularity,
    DegenerateCrossing,
    OutOfRange,
    StepFailure,
)
from .model import energy, equilibria

__all__ = [
    "Trajectory",
    "Segment",
    "ConfinementReport",
    "autonomous_map_many",
    "flow_autonomous",
    "flow_switched",
    "high_phase_map",
    "low_phase_map",
    "period_map",
    "high_phase_map_many",
    "low_phase_map_many",
    "period_map_many",
    "rotation_angle",
    "rotation_angle_many",
    "count_extrema",
    "confinement_report",
]

DEFAULT_RTOL = 1e-10
DEFAULT_ATOL = 1e-12
_EVENT_FUZZ = 1e-9        # time fuzz for window membership of events
_STRICT_SLOPE = 1e-12     # |y'| below this at a crossing flags degeneracy


def _rhs(g, nl, mu):
    def rhs(t, z):
        return (z[1], g * z[0] - mu * nl.value_clamped(z[0]))
    return rhs


def _check(sol, what):
    if sol.status == -1:
        raise StepFailure(f"{what}: {sol.message}")
    return sol


@dataclass
class Segment:
    """One autonomous stretch of a trajectory (constant weight)."""

    t0: float
    t1: float
    mu: float
    sol: object  # scipy OdeSolution over [t0, t1]


@dataclass
class Trajectory:
    """Dense solution record with an event log.

    Events are axis crossings of y = x' (equivalently strict extrema of
    x): ``maxima`` holds times of +to- crossings, ``minima`` of -to+
    crossings, with the defining slope |y'| recorded for degeneracy
    checks.  ``switch_times`` are the weight-switch instants interior to
    the span.
    """

    g: float
    nl: object
    segments: list
    maxima: np.ndarray
    minima: np.ndarray
    max_slopes: np.ndarray
    min_slopes: np.ndarray
    switch_times: np.ndarray = field(default_factory=lambda: np.empty(0))

    @property
    def t0(self):
        return self.segments[0].t0

    @property
    def t1(self):
        return self.segments[-1].t1

    def state(self, t):
        """(x, y) at time(s) t from the dense output."""
        t = np.asarray(t, dtype=float)
        scalar = t.ndim == 0
        tt = np.atleast_1d(t)
        out = np.empty((2, tt.size))
        for seg in self.segments:
            mask = (tt >= seg.t0 - 1e-14) & (tt <= seg.t1 + 1e-14)
            if np.any(mask):
                out[:, mask] = seg.sol(np.clip(tt[mask], seg.t0, seg.t1))
        return out[:, 0] if scalar else out

    def weight_at(self, t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        mu = np.empty_like(t)
        for seg in self.segments:
            mask = (t >= seg.t0 - 1e-14) & (t < seg.t1) if seg is not self.segments[-1] \
                else (t >= seg.t0 - 1e-14) & (t <= seg.t1 + 1e-14)
            mu[mask] = seg.mu
        return mu

    def max_energy_drift(self, samples_per_segment=65):
        """Largest |E(t) - E(t_seg_start)| over any autonomous segment."""
        worst = 0.0
        for seg in self.segments:
            ts = np.linspace(seg.t0, seg.t1, samples_per_segment)
            x, y = seg.sol(ts)
            e = energy(x, y, self.g, self.nl, seg.mu)
            worst = max(worst, float(np.max(np.abs(e - e[0]))))
        return worst

    def energy_drift_rate(self, samples_per_segment=65):
        """max over segments of (energy drift) / (segment duration)."""
        worst = 0.0
        for seg in self.segments:
            ts = np.linspace(seg.t0, seg.t1, samples_per_segment)
            x, y = seg.sol(ts)
            e = energy(x, y, self.g, self.nl, seg.mu)
            worst = max(worst, float(np.max(np.abs(e - e[0]))) / max(seg.t1 - seg.t0, 1e-300))
        return worst

    def to_csv(self, path, n_samples=2001, header_lines=()):
        """Write t, x, y, n(t), E0, E1 at 17 significant digits."""
        ts = np.linspace(self.t0, self.t1, n_samples)
        x, y = self.state(ts)
        mu = self.weight_at(ts)
        e0 = energy(x, y, self.g, self.nl, float(np.min(mu)))
        e1 = energy(x, y, self.g, self.nl, float(np.max(mu)))
        with open(path, "w") as fh:
            for line in header_lines:
                fh.write(f"# {line}\n")
            fh.write("t,x,y,n,E0,E1\n")
            for row in zip(ts, x, y, mu, e0, e1):
                fh.write(",".join(f"{v:.17e}" for v in row) + "\n")


def _integrate_segment(g, nl, mu, z0, t0, t1, rtol, atol):
    ev_max = lambda t, z: z[1]
    ev_max.direction = -1.0
    ev_min = lambda t, z: z[1]
    ev_min.direction = 1.0
    sol = _check(
        solve_ivp(_rhs(g, nl, mu), (t0, t1), np.asarray(z0, dtype=float),
                  method="RK45", rtol=rtol, atol=atol, dense_output=True,
                  events=[ev_max, ev_min]),
        f"autonomous flow (mu={mu:g}) on [{t0:g}, {t1:g}]")
    def slopes(times):
        if len(times) == 0:
            return np.empty(0)
        xs = np.array([sol.sol(t)[0] for t in times])
        return np.abs(g * xs - mu * nl.value_clamped(xs))
    t_max, t_min = sol.t_events[0], sol.t_events[1]
    return (Segment(t0, t1, mu, sol.sol), t_max, t_min, slopes(t_max), slopes(t_min),
            sol.y[:, -1])


def flow_autonomous(g, nl, mu, z0, t_end, rtol=DEFAULT_RTOL, atol=DEFAULT_ATOL):
    """Trajectory of x' = y, y' = g x - mu F_ext(x) over [0, t_end]."""
    if t_end <= 0.0:
        raise OutOfRange(f"t_end must be positive, got {t_end:g}")
    seg, t_max, t_min, s_max, s_min, _ = _integrate_segment(
        g, nl, mu, z0, 0.0, t_end, rtol, atol)
    return Trajectory(g, nl, [seg], t_max, t_min, s_max, s_min)


def flow_switched(params, z0, t_end, rtol=DEFAULT_RTOL, atol=DEFAULT_ATOL):
    """Trajectory of the switched system over [0, t_end].

    The integration restarts exactly at every switch instant k*beta and
    k*beta + alpha, so the discontinuous weight never degrades the step
    order.
    """
    if t_end <= 0.0:
        raise OutOfRange(f"t_end must be positive, got {t_end:g}")
    bounds = [0.0]
    k = 0
    while True:
        for t in (k * params.beta + params.alpha, (k + 1) * params.beta):
            if t < t_end - 1e-13:
                bounds.append(t)
            else:
                break
        else:
            k += 1
            continue
        break
    bounds.append(t_end)
    segments, maxima, minima, s_maxima, s_minima = [], [], [], [], []
    z = np.asarray(z0, dtype=float)
    for t0, t1 in zip(bounds[:-1], bounds[1:]):
        mu = params.n1 if (t0 % params.beta) < params.alpha - 1e-13 else params.n0
        seg, t_max, t_min, s_max, s_min, z = _integrate_segment(
            params.g, params.nl, mu, z, t0, t1, rtol, atol)
        segments.append(seg)
        maxima.append(t_max)
        minima.append(t_min)
        s_maxima.append(s_max)
        s_minima.append(s_min)
    return Trajectory(params.g, params.nl, segments,
                      np.concatenate(maxima), np.concatenate(minima),
                      np.concatenate(s_maxima), np.concatenate(s_minima),
                      switch_times=np.asarray(bounds[1:-1]))


def _final_state(g, nl, mu, z, duration, rtol, atol):
    sol = _check(
        solve_ivp(_rhs(g, nl, mu), (0.0, duration), np.asarray(z, dtype=float),
                  method="RK45", rtol=rtol, atol=atol, t_eval=[duration]),
        f"phase map (mu={mu:g})")
    return sol.y[:, -1]


def high_phase_map(params, z, rtol=DEFAULT_RTOL, atol=DEFAULT_ATOL):
    """psi_1: the time-alpha map of the high system (weight n1)."""
    return _final_state(params.g, params.nl, params.n1, z, params.alpha, rtol, atol)


def low_phase_map(params, z, rtol=DEFAULT_RTOL, atol=DEFAULT_ATOL):
    """psi_0: the time-(beta-alpha) map of the low system (weight n0)."""
    return _final_state(params.g, params.nl, params.n0, z, params.low_duration, rtol, atol)


def period_map(params, z, rtol=DEFAULT_RTOL, atol=DEFAULT_ATOL):
    """psi = psi_0 . psi_1: the period map of the switched system."""
    return low_phase_map(params, high_phase_map(params, z, rtol, atol), rtol, atol)


def _batch_rhs(g, nl, mu, n):
    def rhs(t, ystack):
        x = ystack[:n]
        y = ystack[n:]
        return np.concatenate([y, g * x - mu * nl.value_clamped(x)])
    return rhs


def _final_states_many(g, nl, mu, Z, duration, rtol, atol, chunk, method="RK45"):
    Z = np.asarray(Z, dtype=float)
    out = np.empty_like(Z)
    for lo in range(0, len(Z), chunk):
        part = Z[lo:lo + chunk]
        n = len(part)
        y0 = np.concatenate([part[:, 0], part[:, 1]])
        sol = _check(
            solve_ivp(_batch_rhs(g, nl, mu, n), (0.0, duration), y0,
                      method=method, rtol=rtol, atol=atol, t_eval=[duration]),
            f"batched phase map (mu={mu:g})")
        out[lo:lo + chunk, 0] = sol.y[:n, -1]
        out[lo:lo + chunk, 1] = sol.y[n:, -1]
    return out


def autonomous_map_many(g, nl, mu, Z, duration, rtol=DEFAULT_RTOL,
                        atol=DEFAULT_ATOL, chunk=1024, method="RK45"):
    """Time-``duration`` map of the weight-mu system on an (N, 2) state array."""
    return _final_states_many(g, nl, mu, Z, duration, rtol, atol, chunk, method)


def high_phase_map_many(params, Z, rtol=DEFAULT_RTOL, atol=DEFAULT_ATOL, chunk=1024):
    """psi_1 applied to an (N, 2) array of states, integrated as one batch."""
    return _final_states_many(params.g, params.nl, params.n1, Z, params.alpha,
                              rtol, atol, chunk)


def low_phase_map_many(params, Z, rtol=DEFAULT_RTOL, atol=DEFAULT_ATOL, chunk=1024):
    """psi_0 applied to an (N, 2) array of states."""
    return _final_states_many(params.g, params.nl, params.n0, Z, params.low_duration,
                              rtol, atol, chunk)


def period_map_many(params, Z, rtol=DEFAULT_RTOL, atol=DEFAULT_ATOL, chunk=1024):
    """psi applied to an (N, 2) array of states."""
    return low_phase_map_many(params, high_phase_map_many(params, Z, rtol, atol, chunk),
                              rtol, atol, chunk)


def rotation_angle_many(params, Z, rtol=DEFAULT_RTOL, atol=DEFAULT_ATOL, chunk=512,
                        return_states=False, method="RK45"):
    """Continuous angle about P1 = (a_n1, 0) after the high phase, batched.

    The angle obeys theta' = ((x-a1) y' - y x') / ((x-a1)^2 + y^2) as an
    augmented equation along the high flow, with theta(0) = atan2(y0,
    x0-a1); starting in the closed first quadrant about P1 this lies in
    [0, pi/2].  Raises CenterSingularity if an orbit approaches P1 closer
    than 1e-10 on the sampled trace.
    """
    g, nl, n1 = params.g, params.nl, params.n1
    a1 = equilibria(g, nl, n1)[0]
    Z = np.asarray(Z, dtype=float)
    thetas = np.empty(len(Z))
    states = np.empty_like(Z)
    for lo in range(0, len(Z), chunk):
        part = Z[lo:lo + chunk]
        n = len(part)
        if np.any(part[:, 0] < a1 - 1e-9) or np.any(part[:, 1] < -1e-9):
            raise OutOfRange("initial state outside the quarter-annulus chart "
                             "(needs x >= a_n1, y >= 0)")
        r2_init = (part[:, 0] - a1) ** 2 + part[:, 1] ** 2
        if np.any(r2_init < 1e-20):
            raise CenterSingularity("initial state coincides with the center")
        th0 = np.arctan2(np.maximum(part[:, 1], 0.0), part[:, 0] - a1)

        def rhs(t, ystack):
            x = ystack[:n]
            y = ystack[n:2 * n]
            dy = g * x - n1 * nl.value_clamped(x)
            r2 = (x - a1) ** 2 + y ** 2
            return np.concatenate([y, dy, ((x - a1) * dy - y * y) / r2])

        y0 = np.concatenate([part[:, 0], part[:, 1], th0])
        t_check = np.linspace(0.0, params.alpha, 129)
        sol = _check(
            solve_ivp(rhs, (0.0, params.alpha), y0, method=method,
                      rtol=rtol, atol=atol, t_eval=t_check),
            "angle-augmented high flow")
        x_all = sol.y[:n]
        y_all = sol.y[n:2 * n]
        r2min = np.min((x_all - a1) ** 2 + y_all ** 2, axis=1)
        if np.any(r2min < 1e-20):
            raise CenterSingularity(
                f"orbit passed within {math.sqrt(float(np.min(r2min))):.3e} of the center")
        thetas[lo:lo + chunk] = sol.y[2 * n:, -1]
        states[lo:lo + chunk, 0] = x_all[:, -1]
        states[lo:lo + chunk, 1] = y_all[:, -1]
    return (thetas, states) if return_states else thetas


def rotation_angle(params, z, rtol=DEFAULT_RTOL, atol=DEFAULT_ATOL):
    """theta(alpha, z) for a single state (see rotation_angle_many)."""
    return float(rotation_angle_many(params, np.asarray(z, dtype=float)[None, :],
                                     rtol=rtol, atol=atol)[0])


def count_extrema(traj, t0, t1):
    """(# strict maxima, # strict minima) of x on the window (t0, t1].

    Counted from the event log; the window is half-open with a small time
    fuzz so an extremum landing on the right endpoint (e.g. a closed
    orbit sampled over exactly one period) is counted once.  Raises
    DegenerateCrossing if a counted crossing has |y'| < 1e-12.
    """
    def pick(times, slopes):
        mask = (times > t0 + _EVENT_FUZZ) & (times <= t1 + _EVENT_FUZZ)
        if np.any(slopes[mask] < _STRICT_SLOPE):
            raise DegenerateCrossing(
                f"tangential axis contact in ({t0:g}, {t1:g}]")
        return int(np.count_nonzero(mask))

    return (pick(traj.maxima, traj.max_slopes), pick(traj.minima, traj.min_slopes))


@dataclass(frozen=True)
class ConfinementReport:
    """Range of x over a trajectory and the open-interval confinement verdict."""

    x_min: float
    x_max: float
    confined: bool            # 0 < x < 1 on every sample
    first_exit: float | None  # first sampled time with x <= 0 or x >= 1
    t0: float
    t1: float


def confinement_report(traj, resolution=1e-3):
    """Check 0 < x(t) < 1 on a dense sampling plus all logged extrema."""
    n = max(int(math.ceil((traj.t1 - traj.t0) / resolution)) + 1, 2)
    ts = np.linspace(traj.t0, traj.t1, min(n, 2_000_001))
    ts = np.unique(np.concatenate([ts, traj.maxima, traj.minima]))
    x = traj.state(ts)[0]
    bad = (x <= 0.0) | (x >= 1.0)
    first_exit = float(ts[np.argmax(bad)]) if np.any(bad) else None
    return ConfinementReport(
        x_min=float(np.min(x)), x_max=float(np.max(x)),
        confined=not np.any(bad), first_exit=first_exit,
        t0=float(traj.t0), t1=float(traj.t1))
