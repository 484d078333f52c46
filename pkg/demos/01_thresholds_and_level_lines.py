"""Phase-plane tour: the cubic reaction term, its thresholds, and level lines.

The equation x'' - g x + mu F(x) = 0 with F(s) = s(s-a)(1-s) changes
character as the weight mu grows: below m0* the origin is the only rest
point and g s - mu F(s) > 0 for s > 0; above m0* a center P = (a_mu, 0)
and a saddle Q = (c_mu, 0) appear; above m1* the zero-energy level line
closes into a homoclinic loop through (b_mu, 0) and the annulus between
it and the center fills with periodic orbits.
"""
import numpy as np
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

from switched_nagumo import (
    Cubic, energy, equilibria, homoclinic_extent, homoclinic_threshold,
    homoclinic_threshold_optimal, integral_zero, saddle_center_threshold,
    slope_envelope,
)

g, a = 0.1, 0.4
nl = Cubic(a)

print("cubic with a =", a, "and stiffness g =", g)
print(f"  saddle/center threshold m0* = {saddle_center_threshold(g, nl):.6f}")
print(f"  homoclinic threshold    m1* = {homoclinic_threshold(g, nl):.6f}")
print(f"  optimal homoclinic      m1o = {homoclinic_threshold_optimal(g, nl):.6f}")
print(f"  chord envelope (Lambda, Theta) = {slope_envelope(nl)}")
print(f"  antiderivative zero     b   = {integral_zero(nl):.6f}")

mu_lo, mu_hi = 0.1, 10.0
a_mu, c_mu = equilibria(g, nl, mu_hi)
b_mu = homoclinic_extent(g, nl, mu_hi)
print(f"\nat mu = {mu_hi:g}: center {a_mu:.6f}, saddle {c_mu:.6f}, "
      f"homoclinic apex {b_mu:.6f}")

fig, ax = plt.subplots(figsize=(7, 5))
xs = np.linspace(0.0, 1.0, 600)

# closed level lines of the large weight fill the well around the center
e_center = float(energy(a_mu, 0.0, g, nl, mu_hi))
for c in np.linspace(0.9 * e_center, 0.0, 8):
    y2 = 2.0 * (c + 0.5 * g * xs**2 - mu_hi * nl.integral(xs))
    y = np.sqrt(np.maximum(y2, 0.0))
    mask = y2 >= 0
    ax.plot(xs[mask], y[mask], "b-", lw=0.7)
    ax.plot(xs[mask], -y[mask], "b-", lw=0.7)

# the small weight has no interior rest points: open, run-through levels
for c in np.linspace(-0.02, 0.02, 7):
    y2 = 2.0 * (c + 0.5 * g * xs**2 - mu_lo * nl.integral(xs))
    y = np.sqrt(np.maximum(y2, 0.0))
    mask = y2 >= 0
    ax.plot(xs[mask], y[mask], "r-", lw=0.7)
    ax.plot(xs[mask], -y[mask], "r-", lw=0.7)

ax.plot([a_mu, c_mu], [0, 0], "ko", ms=4)
ax.set(xlabel="x", ylabel="y = x'", title=f"level lines: mu={mu_hi} (blue, closed) "
       f"vs mu={mu_lo} (red, open)")
fig.tight_layout()
fig.savefig("demo01_level_lines.png", dpi=130)
print("\nwrote demo01_level_lines.png")
