"""Time maps of the autonomous systems: transit times, orbit periods, bounds.

All integrals are of the form  ds / sqrt(H(s) - H(anchor))  with
H(x) = g x^2 - 2 mu integral(F)(x) and an inverse-square-root singularity
at the anchor(s).  The difference is evaluated in the exactly factored
form (s - anchor) * B(s, anchor), so the tanh-sinh nodes next to the
singular endpoint lose no precision.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import (
    EnergyOutOfBand,
    InvalidRegime,
    NoGap,
    NotClosedOrbit,
    OutOfRange,
)
from .model import (
    energy,
    equilibria,
    homoclinic_extent,
    homoclinic_threshold,
    matching_abscissa,
    saddle_center_threshold,
    slope_envelope,
)
from .quadrature import tanh_sinh

__all__ = [
    "transit_time",
    "transit_time_bounds",
    "orbit_period",
    "period_scaling_limit",
    "slow_anchor_bound",
    "conjugate_abscissa",
    "gap_crossing_report",
    "GapCrossingReport",
]


def _chord(g, nl, mu, s, anchor):
    """B(s, anchor) = (H(s) - H(anchor)) / (s - anchor), cancellation-free."""
    return g * (s + anchor) - 2.0 * mu * nl.integral_dd(s, anchor)


def transit_time(g, nl, mu, p0, xi, rel_tol=1e-10):
    """Half-transit time sigma(p0, xi) along the level line through (p0, 0).

    Time for the system x'' = g x - mu F(x) (mu below m0*, so the level
    function is strictly increasing) to move from (p0, 0) to the vertical
    line x = xi; equals the time from (xi, -y_xi) back to (p0, 0).
    """
    m0 = saddle_center_threshold(g, nl)
    if not 0.0 < mu < m0:
        raise InvalidRegime(f"transit time needs 0 < mu < m0* = {m0:.6g}, got {mu:g}")
    if not 0.0 < p0 < xi <= 1.0:
        raise OutOfRange(f"need 0 < p0 < xi <= 1, got p0 = {p0:g}, xi = {xi:g}")
    f = lambda s, dlo, dhi: 1.0 / np.sqrt(dlo * _chord(g, nl, mu, s, p0))
    return tanh_sinh(f, p0, xi, rel_tol=rel_tol)


def transit_time_bounds(g, nl, mu, p0, xi):
    """(lower, upper) bounds acosh(xi/p0)/sqrt(g + mu Theta), /sqrt(g - mu Lambda)."""
    m0 = saddle_center_threshold(g, nl)
    if not 0.0 < mu < m0:
        raise InvalidRegime(f"bounds need 0 < mu < m0* = {m0:.6g}, got {mu:g}")
    if not 0.0 < p0 < xi <= 1.0:
        raise OutOfRange(f"need 0 < p0 < xi <= 1, got p0 = {p0:g}, xi = {xi:g}")
    lam, theta = slope_envelope(nl)
    arg = math.acosh(xi / p0)
    return arg / math.sqrt(g + mu * theta), arg / math.sqrt(g - mu * lam)


def _conjugate_turning_point(g, nl, mu, x0, a_mu, b_mu):
    """x1 in (a_mu, b_mu) on the same axis energy level as (x0, 0)."""
    h0 = g * x0 * x0 - 2.0 * mu * nl.integral(x0)
    hfun = lambda s: g * s * s - 2.0 * mu * nl.integral(s) - h0
    return brentq(hfun, a_mu, b_mu, xtol=1e-14)


def orbit_period(g, nl, mu, x0, rel_tol=1e-10):
    """(minimal period, conjugate turning point x1) of the closed orbit through (x0, 0).

    Requires mu > m1* and the level E(x0, 0) inside the closed-orbit band
    (E(a_mu, 0), 0).  The quadrature is split at the center abscissa a_mu
    so each half carries exactly one singular endpoint.
    """
    m1 = homoclinic_threshold(g, nl)
    if mu <= m1:
        raise InvalidRegime(f"period needs mu > m1* = {m1:.6g}, got {mu:g}")
    a_mu, _ = equilibria(g, nl, mu)
    b_mu = homoclinic_extent(g, nl, mu)
    level = energy(x0, 0.0, g, nl, mu)
    if not energy(a_mu, 0.0, g, nl, mu) < level < 0.0:
        raise NotClosedOrbit(
            f"E(x0,0) = {level:.6g} outside ({energy(a_mu, 0.0, g, nl, mu):.6g}, 0)")
    if x0 > a_mu:  # normalize to the left turning point
        x1 = x0
        x0 = _conjugate_turning_point(g, nl, mu, x1, 1e-300, a_mu)
    x1 = _conjugate_turning_point(g, nl, mu, x0, a_mu, b_mu)
    left = tanh_sinh(
        lambda s, dlo, dhi: 1.0 / np.sqrt(dlo * _chord(g, nl, mu, s, x0)),
        x0, a_mu, rel_tol=rel_tol)
    right = tanh_sinh(
        lambda s, dlo, dhi: 1.0 / np.sqrt(dhi * (-_chord(g, nl, mu, s, x1))),
        a_mu, x1, rel_tol=rel_tol)
    return 2.0 * (left + right), x1


def period_scaling_limit(nl, x0, rel_tol=1e-9):
    """Limit of period * sqrt(mu) as mu -> infinity, for 0 < x0 < a.

    Equals sqrt(2) * integral of 1/sqrt(integral(F)(x0) - integral(F)(s))
    from x0 to the matching abscissa x0+; both endpoints are singular, so
    the range is split at a (the minimum of the antiderivative).
    """
    if not 0.0 < x0 < nl.a:
        raise OutOfRange(f"x0 = {x0:g} outside (0, a) = (0, {nl.a:g})")
    x_plus = matching_abscissa(nl, x0)
    left = tanh_sinh(
        lambda s, dlo, dhi: 1.0 / np.sqrt(dlo * (-nl.integral_dd(s, x0))),
        x0, nl.a, rel_tol=rel_tol)
    right = tanh_sinh(
        lambda s, dlo, dhi: 1.0 / np.sqrt(dhi * nl.integral_dd(s, x_plus)),
        nl.a, x_plus, rel_tol=rel_tol)
    return math.sqrt(2.0) * (left + right)


def slow_anchor_bound(params, tol=1e-12):
    """Largest anchor below which the low-phase transit to x = a outlasts half the gap.

    Returns the largest p in (0, a] such that sigma_0(p0, a) > (beta-alpha)/2
    for every p0 <= p.  sigma_0(., a) diverges at 0+ and vanishes at a-,
    and is checked for monotonicity on a grid before the bisection.
    """
    g, nl, n0 = params.g, params.nl, params.n0
    m0 = saddle_center_threshold(g, nl)
    if n0 >= m0:
        raise InvalidRegime(f"n0 = {n0:g} >= m0* = {m0:.6g}")
    target = 0.5 * params.low_duration
    a = params.a
    sig = lambda p: transit_time(g, nl, n0, p, a)
    grid = a * np.linspace(0.02, 0.98, 25)
    vals = np.array([sig(p) for p in grid])
    if np.any(np.diff(vals) >= 0.0):
        warnings.warn("sigma_0(p, a) is not decreasing on the check grid; "
                      "the returned anchor bounds only the scanned branch")
    p_lo = a * 1e-8
    if sig(p_lo) <= target:
        raise NoGap(f"sigma_0({p_lo:g}, a) <= {target:g} next to 0 "
                    "(violates the diverging lower bound)")
    if vals[-1] > target:  # inequality holds on the whole grid span
        hi_probe = a * (1.0 - 1e-9)
        if sig(hi_probe) > target:
            return a
        lo = grid[-1]
    else:
        lo = p_lo
        hi_probe = a * (1.0 - 1e-9)
    return brentq(lambda p: sig(p) - target, lo, hi_probe, xtol=tol)


def conjugate_abscissa(g, nl, n1, p0):
    """The abscissa p1 in (a_n1, b_n1) on the high-system level through (p0, 0)."""
    m1 = homoclinic_threshold(g, nl)
    if n1 <= m1:
        raise InvalidRegime(f"needs n1 > m1* = {m1:.6g}, got {n1:g}")
    a_hi, _ = equilibria(g, nl, n1)
    b_hi = homoclinic_extent(g, nl, n1)
    level = energy(p0, 0.0, g, nl, n1)
    lo_level = energy(a_hi, 0.0, g, nl, n1)
    if not lo_level < level < 0.0:
        raise EnergyOutOfBand(
            f"E1(p0,0) = {level:.6g} outside ({lo_level:.6g}, 0)")
    f = lambda s: energy(s, 0.0, g, nl, n1) - level
    return brentq(f, a_hi, b_hi, xtol=1e-14)


@dataclass(frozen=True)
class GapCrossingReport:
    """Direct and sufficient forms of the low-phase gap-crossing inequality."""

    p0: float
    p1: float
    b_n1: float
    half_gap: float            # (beta - alpha) / 2
    sigma0_p1_bn1: float
    direct_ok: bool            # sigma_0(p1, b_n1) < half_gap
    direct_margin: float       # half_gap - sigma_0(p1, b_n1)
    kappa: float
    sufficient_ok: bool        # p1 > b_n1 / kappa
    sufficient_margin: float   # p1 - b_n1 / kappa


def gap_crossing_report(params, p0, mu_bar=None):
    """Evaluate the low-phase crossing inequality at anchor p0, both ways.

    The direct inequality sigma_0(p1, b_n1) < (beta-alpha)/2 is what the
    construction uses; p1 > b_n1/kappa is the sufficient condition that
    the threshold m2* guarantees.  Both are reported with margins.
    """
    from .model import horseshoe_constants  # local import to avoid cycle noise

    g, nl = params.g, params.nl
    p1 = conjugate_abscissa(g, nl, params.n1, p0)
    b_hi = homoclinic_extent(g, nl, params.n1)
    half_gap = 0.5 * params.low_duration
    sig = transit_time(g, nl, params.n0, p1, b_hi) if p1 < b_hi else 0.0
    kappa = horseshoe_constants(params, mu_bar).kappa
    return GapCrossingReport(
        p0=p0, p1=p1, b_n1=b_hi, half_gap=half_gap,
        sigma0_p1_bn1=sig,
        direct_ok=sig < half_gap,
        direct_margin=half_gap - sig,
        kappa=kappa,
        sufficient_ok=p1 > b_hi / kappa,
        sufficient_margin=p1 - b_hi / kappa,
    )
