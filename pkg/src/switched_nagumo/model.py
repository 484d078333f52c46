"""Bistable nonlinearity, equilibria, energy, and threshold constants.

Everything in this module is closed-form arithmetic or bracketed scalar
root-finding; no ODE integration.  The canonical reaction term is the
cubic F(s) = s (s - a) (1 - s) with inner zero 0 < a < 1; a generic
descriptor can be supplied by subclassing :class:`Nonlinearity`, but all
closed forms target the cubic.

Root-finding contract: bracketing (Brent) to width ~1e-14 followed by a
Newton polish where a derivative is available.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.optimize import brentq

from .errors import (
    BelowHomoclinicThreshold,
    HypothesisH0Violated,
    NoEquilibria,
    NoSolution,
    OutOfRange,
    WeightTooLarge,
)

__all__ = [
    "Nonlinearity",
    "Cubic",
    "ModelParams",
    "HorseshoeConstants",
    "Thresholds",
    "energy",
    "saddle_center_threshold",
    "slope_envelope",
    "homoclinic_threshold",
    "homoclinic_threshold_optimal",
    "equilibria",
    "integral_zero",
    "homoclinic_extent",
    "matching_abscissa",
    "horseshoe_constants",
    "compute_thresholds",
]

_BRACKET_TOL = 1e-14


class Nonlinearity:
    """Reaction term with zeros at 0, a, 1; negative on (0,a), positive on (a,1).

    Subclasses provide ``value``, ``slope`` and the exact antiderivative
    ``integral`` (normalized to integral(0) = 0).  The numeric fallbacks
    below only assume the sign pattern and a single interior hump of
    F(s)/s on (a, 1).
    """

    a: float

    def value(self, s):
        raise NotImplementedError

    def slope(self, s):
        raise NotImplementedError

    def integral(self, s):
        raise NotImplementedError

    def value_clamped(self, s):
        """F on [0,1], clamped to [-1, 1] outside; keeps solutions global."""
        return np.clip(self.value(s), -1.0, 1.0)

    def integral_dd(self, s, s0):
        """Divided difference (integral(s) - integral(s0)) / (s - s0).

        Fallback implementation; near s = s0 it switches to value(s0) to
        avoid cancellation.  Subclasses with polynomial structure should
        override with the exact factored form.
        """
        s = np.asarray(s, dtype=float)
        d = s - s0
        near = np.abs(d) < 1e-7
        out = np.where(near, self.value(0.5 * (s + s0)),
                       (self.integral(s) - self.integral(s0)) / np.where(near, 1.0, d))
        return out if out.ndim else float(out)

    def chord_max(self):
        """(argmax, max) of F(s)/s over (0, 1]; the hump lies in (a, 1)."""
        grid = np.linspace(self.a, 1.0, 2001)[1:-1]
        vals = self.value(grid) / grid
        k = int(np.argmax(vals))
        lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, len(grid) - 1)]
        # stationarity of F(s)/s  <=>  s F'(s) - F(s) = 0
        h = lambda s: s * self.slope(s) - self.value(s)
        if h(lo) * h(hi) < 0:
            s_star = brentq(h, lo, hi, xtol=_BRACKET_TOL)
        else:
            s_star = grid[k]
        return s_star, self.value(s_star) / s_star

    def negative_chord_sup(self):
        """sup of -F(s)/s over (0, 1]; for N-shaped terms this is |F'(0)|."""
        grid = np.linspace(1e-9, 1.0, 2001)
        return max(float(np.max(-self.value(grid) / grid)), abs(float(self.slope(0.0))))

    def interior_critical_points(self, lo, hi, n=512):
        """Sign-change roots of F' inside (lo, hi), for min/max searches."""
        grid = np.linspace(lo, hi, n)
        ds = self.slope(grid)
        roots = []
        for i in range(n - 1):
            if ds[i] == 0.0:
                roots.append(float(grid[i]))
            elif ds[i] * ds[i + 1] < 0:
                roots.append(brentq(self.slope, grid[i], grid[i + 1], xtol=_BRACKET_TOL))
        return roots


@dataclass(frozen=True)
class Cubic(Nonlinearity):
    """The cubic F(s) = s (s - a) (1 - s) = -s^3 + (1+a) s^2 - a s."""

    a: float

    def __post_init__(self):
        if not 0.0 < self.a < 1.0:
            raise OutOfRange(f"inner zero must satisfy 0 < a < 1, got {self.a}")

    def value(self, s):
        return s * (s - self.a) * (1.0 - s)

    def slope(self, s):
        return (-3.0 * s + 2.0 * (1.0 + self.a)) * s - self.a

    def integral(self, s):
        s = np.asarray(s, dtype=float)
        out = s * s * ((-0.25 * s + (1.0 + self.a) / 3.0) * s - 0.5 * self.a)
        return out if out.ndim else float(out)

    def integral_dd(self, s, s0):
        # exact factorization of (integral(s) - integral(s0)) / (s - s0)
        a = self.a
        return (-0.25 * (s * s * s + s * s * s0 + s * s0 * s0 + s0 * s0 * s0)
                + (1.0 + a) / 3.0 * (s * s + s * s0 + s0 * s0)
                - 0.5 * a * (s + s0))

    def chord_max(self):
        # F(s)/s = -(s - a)(s - 1) is a downward parabola peaking at (1+a)/2
        s_star = 0.5 * (1.0 + self.a)
        return s_star, 0.25 * (1.0 - self.a) ** 2

    def negative_chord_sup(self):
        return self.a  # attained as s -> 0+, equals |F'(0)|

    def interior_critical_points(self, lo, hi, n=512):
        a = self.a
        disc = (1.0 + a) ** 2 - 3.0 * a
        r = math.sqrt(disc)
        return [s for s in (((1.0 + a) - r) / 3.0, ((1.0 + a) + r) / 3.0) if lo < s < hi]


def energy(x, y, g, nl, mu):
    """First integral E^mu(x, y) = y^2/2 - g x^2/2 + mu * integral(F)(x)."""
    return 0.5 * np.asarray(y) ** 2 - 0.5 * g * np.asarray(x) ** 2 + mu * nl.integral(x)


def _require_h0(nl):
    if nl.integral(1.0) <= 0.0:
        raise HypothesisH0Violated(
            f"integral of F over [0,1] is {nl.integral(1.0):.3e} <= 0 (cubic: a >= 1/2)")


def saddle_center_threshold(g, nl):
    """Weight m0* below which g s - mu F(s) > 0 for all s > 0.

    Cubic closed form: 4 g / (1 - a)^2.
    """
    if isinstance(nl, Cubic):
        return 4.0 * g / (1.0 - nl.a) ** 2
    return g / nl.chord_max()[1]


def slope_envelope(nl):
    """(Lambda, Theta) = (sup F(s)/s, sup -F(s)/s) over (0, 1].

    Cubic closed forms: Lambda = ((1-a)/2)^2, Theta = a = |F'(0)|.
    """
    return nl.chord_max()[1], nl.negative_chord_sup()


def homoclinic_threshold(g, nl):
    """Weight m1* = g / (2 integral(F,0,1)) above which the zero level is homoclinic.

    Cubic closed form: 6 g / (1 - 2a).  Raises HypothesisH0Violated when
    the mean of F over [0,1] is not positive.
    """
    _require_h0(nl)
    return 0.5 * g / nl.integral(1.0)


def equilibria(g, nl, mu):
    """Nontrivial rest points (a_mu, c_mu) of x'' = g x - mu F(x), a < a_mu < c_mu < 1.

    Roots of g s = mu F(s); for the cubic, of s^2 - (1+a) s + (a + g/mu) = 0.
    Raises NoEquilibria for mu <= m0*.
    """
    m0 = saddle_center_threshold(g, nl)
    if mu <= m0:
        raise NoEquilibria(f"mu = {mu:g} <= m0* = {m0:.6g}: no interior equilibria")
    if isinstance(nl, Cubic):
        a = nl.a
        r = math.sqrt((1.0 - a) ** 2 - 4.0 * g / mu)
        return 0.5 * (1.0 + a - r), 0.5 * (1.0 + a + r)
    h = lambda s: g * s - mu * nl.value(s)
    s_star = nl.chord_max()[0]
    lo = brentq(h, nl.a, s_star, xtol=_BRACKET_TOL)
    hi = brentq(h, s_star, 1.0, xtol=_BRACKET_TOL)
    return lo, hi


def integral_zero(nl):
    """The unique b in (a, 1) where the antiderivative of F vanishes.

    Cubic closed form: smaller root of 3 b^2 - 4 (1+a) b + 6 a = 0.
    """
    _require_h0(nl)
    if isinstance(nl, Cubic):
        a = nl.a
        return (2.0 * (1.0 + a) - math.sqrt(4.0 * (1.0 + a) ** 2 - 18.0 * a)) / 3.0
    return brentq(lambda s: nl.integral(s), nl.a, 1.0, xtol=_BRACKET_TOL)


def homoclinic_extent(g, nl, mu):
    """Rightmost abscissa b_mu of the homoclinic loop: the zero of g x^2 - 2 mu integral(F)(x) in (a_mu, c_mu)."""
    m1 = homoclinic_threshold(g, nl)
    if mu <= m1:
        raise BelowHomoclinicThreshold(f"mu = {mu:g} <= m1* = {m1:.6g}")
    a_mu, c_mu = equilibria(g, nl, mu)
    if isinstance(nl, Cubic):
        # nonzero roots of H(x) = g x^2 - 2 mu integral(x):
        # (mu/2) x^2 - (2 mu (1+a)/3) x + (g + mu a) = 0, smaller root
        a = nl.a
        p = 2.0 * (1.0 + a) / 3.0
        q = (g + mu * a) / (0.5 * mu)
        disc = p * p - q
        if disc <= 0.0:
            raise BelowHomoclinicThreshold(f"no homoclinic crossing at mu = {mu:g}")
        b_mu = p - math.sqrt(disc)
    else:
        hfun = lambda x: g * x * x - 2.0 * mu * nl.integral(x)
        b_mu = brentq(hfun, a_mu * (1 + 1e-13), c_mu, xtol=_BRACKET_TOL)
    if not a_mu < b_mu < c_mu:
        raise BelowHomoclinicThreshold(
            f"homoclinic crossing {b_mu:.6g} outside (a_mu, c_mu) at mu = {mu:g}")
    return b_mu


def homoclinic_threshold_optimal(g, nl, tol=1e-10):
    """Infimum of mu > m0* whose zero level line crosses the axis in (a_mu, c_mu).

    This sharpens m1* (which is sufficient, not optimal).  The crossing
    exists iff the saddle energy E(c_mu, 0) is positive, which is monotone
    in mu; located by bisection to absolute tolerance ``tol``.
    """
    _require_h0(nl)
    lo = saddle_center_threshold(g, nl) * (1.0 + 1e-12)
    hi = homoclinic_threshold(g, nl)
    has_crossing = lambda mu: energy(equilibria(g, nl, mu)[1], 0.0, g, nl, mu) > 0.0
    if not has_crossing(hi):
        return hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if has_crossing(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def matching_abscissa(nl, x0):
    """The point x0+ in (a, 1) with integral(F)(x0+) = integral(F)(x0), for 0 < x0 < a."""
    if not 0.0 < x0 < nl.a:
        raise OutOfRange(f"x0 = {x0:g} outside (0, a) = (0, {nl.a:g})")
    _require_h0(nl)
    target = nl.integral(x0)
    f = lambda s: nl.integral(s) - target
    if f(nl.a) >= 0.0 or f(1.0) <= 0.0:
        raise NoSolution(f"no matching abscissa for x0 = {x0:g}")  # cannot occur under (H0)
    root = brentq(f, nl.a, 1.0, xtol=_BRACKET_TOL)
    fp = nl.value(root)
    if fp != 0.0:  # one Newton polish
        root -= f(root) / fp
    return root


@dataclass(frozen=True)
class ModelParams:
    """Scalar data of the switched equation x'' - g x + n(t) F(x) = 0.

    The weight n(t) is beta-periodic and stepwise: n1 on [0, alpha), n0 on
    [alpha, beta).  ``a`` is the inner zero of the cubic F.
    """

    g: float
    a: float
    n0: float
    n1: float
    alpha: float
    beta: float

    def __post_init__(self):
        if self.g <= 0.0:
            raise OutOfRange(f"g must be positive, got {self.g}")
        if not 0.0 < self.a < 1.0:
            raise OutOfRange(f"a must lie in (0, 1), got {self.a}")
        if not 0.0 < self.n0 < self.n1:
            raise OutOfRange(f"weights must satisfy 0 < n0 < n1, got {self.n0}, {self.n1}")
        if not 0.0 < self.alpha < self.beta:
            raise OutOfRange(f"need 0 < alpha < beta, got {self.alpha}, {self.beta}")

    @cached_property
    def nl(self):
        return Cubic(self.a)

    @property
    def low_duration(self):
        return self.beta - self.alpha

    @property
    def satisfies_h0(self):
        return self.nl.integral(1.0) > 0.0

    def weight(self, t):
        """n(t) for the beta-periodic stepwise schedule."""
        return np.where(np.mod(t, self.beta) < self.alpha, self.n1, self.n0)

    def energy_high(self, x, y):
        return energy(x, y, self.g, self.nl, self.n1)

    def energy_low(self, x, y):
        return energy(x, y, self.g, self.nl, self.n0)

    def in_horseshoe_regime(self, mu_bar=None):
        """True iff n0 < m0* and n1 > m2* (and n1 >= mu_bar)."""
        try:
            hc = horseshoe_constants(self, mu_bar)
        except (WeightTooLarge, BelowHomoclinicThreshold, HypothesisH0Violated):
            return False
        m0 = saddle_center_threshold(self.g, self.nl)
        return self.n0 < m0 and self.n1 > hc.m2star and self.n1 >= hc.mu_bar


@dataclass(frozen=True)
class HorseshoeConstants:
    """Sufficient-condition constants for the low-phase gap crossing."""

    kappa: float      # cosh((beta-alpha)/2 * sqrt(g - n0 Lambda))
    eta: float        # min F over [b, b_mu_bar]
    mu_star: float    # g (kappa+1) / (2 eta b)
    mu_tilde: float   # g (kappa^2 (a^2+1) - 1) / (kappa (kappa-1) b eta)
    m2star: float     # max(mu_star, mu_tilde)
    p_hat0: float     # anchor bound from integral(F)(s) = -eta b (kappa-1)/(2 kappa)
    b: float
    b_mu_bar: float
    mu_bar: float


def horseshoe_constants(params, mu_bar=None):
    """Constants kappa, eta, mu*, mu~, m2*, p_hat0 for the given parameters.

    ``mu_bar`` anchors eta = min F over [b, b_mu_bar]; it defaults to
    2 m1* (the paper fixes only mu_bar > m1*).
    """
    g, nl = params.g, params.nl
    lam = slope_envelope(nl)[0]
    if params.n0 * lam >= g:
        raise WeightTooLarge(f"n0 Lambda = {params.n0 * lam:.6g} >= g = {g:g}")
    m1 = homoclinic_threshold(g, nl)
    if mu_bar is None:
        mu_bar = 2.0 * m1
    if mu_bar <= m1:
        raise BelowHomoclinicThreshold(f"mu_bar = {mu_bar:g} <= m1* = {m1:.6g}")
    b = integral_zero(nl)
    b_bar = homoclinic_extent(g, nl, mu_bar)
    cand = [b, b_bar] + nl.interior_critical_points(b, b_bar)
    eta = min(float(nl.value(s)) for s in cand)
    kappa = math.cosh(0.5 * params.low_duration * math.sqrt(g - params.n0 * lam))
    mu_star = g * (kappa + 1.0) / (2.0 * eta * b)
    mu_tilde = (g * (kappa ** 2 * (params.a ** 2 + 1.0) - 1.0)
                / (kappa * (kappa - 1.0) * b * eta))
    target = -eta * b * (kappa - 1.0) / (2.0 * kappa)
    if nl.integral(params.a) >= target:
        p_hat0 = params.a  # every anchor in (0, a) satisfies the energy bound
    else:
        p_hat0 = brentq(lambda s: nl.integral(s) - target, 1e-15, params.a,
                        xtol=_BRACKET_TOL)
    return HorseshoeConstants(kappa=kappa, eta=eta, mu_star=mu_star, mu_tilde=mu_tilde,
                              m2star=max(mu_star, mu_tilde), p_hat0=p_hat0,
                              b=b, b_mu_bar=b_bar, mu_bar=mu_bar)


@dataclass(frozen=True)
class Thresholds:
    """Every threshold constant of the model at one parameter set."""

    m0star: float
    m1star: float
    m1star_optimal: float
    lambda_sup: float
    theta_sup: float
    b: float
    kappa: float
    eta: float
    mu_star: float
    mu_tilde: float
    m2star: float
    p_hat0: float


def compute_thresholds(params, mu_bar=None, tol=1e-10):
    """Assemble the full threshold record (see :class:`Thresholds`)."""
    g, nl = params.g, params.nl
    lam, theta = slope_envelope(nl)
    hc = horseshoe_constants(params, mu_bar)
    return Thresholds(
        m0star=saddle_center_threshold(g, nl),
        m1star=homoclinic_threshold(g, nl),
        m1star_optimal=homoclinic_threshold_optimal(g, nl, tol),
        lambda_sup=lam,
        theta_sup=theta,
        b=hc.b,
        kappa=hc.kappa,
        eta=hc.eta,
        mu_star=hc.mu_star,
        mu_tilde=hc.mu_tilde,
        m2star=hc.m2star,
        p_hat0=hc.p_hat0,
    )
