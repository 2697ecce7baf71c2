"""
Extracting rates from a transmission doublet
============================================

A noisy transmission sweep is fitted with the symmetric doublet model. The
fit reports intrinsic and external decay rates and the coupling rate, and the
quality factors if the resonance frequency is known.
"""

import numpy as np

from wgmbiphoton import paper_device
from wgmbiphoton.fitting import FitResult, SweepTrace, doublet_dips, doublet_model, fit_doublet
from wgmbiphoton.model import TWO_PI

s = paper_device().signal
truth = FitResult(s.gamma0, 0.6 * s.gamma_e, s.beta)
det = np.linspace(-4 * s.beta, 4 * s.beta, 801)
rng = np.random.default_rng(0)
sweep = SweepTrace(det, doublet_model(truth, det) + 0.01 * rng.standard_normal(det.size))

fit = fit_doublet(sweep, coupling="under")
for name in ("gamma0", "gamma_e", "beta"):
    a, b = getattr(fit, name), getattr(truth, name)
    print(f"{name:>8}: fitted {a / TWO_PI / 1e9:.4f} GHz, true {b / TWO_PI / 1e9:.4f} GHz ({a / b - 1:+.2%})")
q0, qe, qb = fit.quality_factors(s.omega0)
print(f"Q0 = {q0:.3e}, Qe = {qe:.3e}, Qbeta = {qb:.3e}")

# The transmission minima sit slightly inside +/- beta because the two
# Lorentzians overlap.
dips = doublet_dips(truth)
print("dip positions / beta:", np.round(dips / truth.beta, 5))
