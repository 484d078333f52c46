"""Where does the horseshoe certify?  A small scan over the strong weight.

Existence holds for every n1 large enough once n0 sits below m0*; the
scan shows the empirical boundary: too small an n1 fails the regime
inequality n1 > m2* or the winding requirement (the inner arc must sweep
past -9 pi/2 within one high phase), and everything above certifies.
"""
import time

from switched_nagumo import ModelParams, certify_horseshoe

base = dict(g=0.1, a=0.25, n0=0.35, alpha=7.2, beta=14.2)
print(f"{'n1':>6}  {'verdict':<22} {'min margin':>12}")
for n1 in (8.0, 16.0, 22.0, 26.0, 30.0, 40.0):
    t0 = time.time()
    params = ModelParams(n1=n1, **base)
    cert = certify_horseshoe(params, pbar0=0.12, mu_bar=2.4, n_paths=6,
                             n_points=65, arc_samples=17)
    verdict = "certifies" if cert.passed else f"fails: {cert.first_failure}"
    print(f"{n1:6.0f}  {verdict:<22} {cert.min_margin:12.3e}   "
          f"[{time.time() - t0:.0f}s]")
