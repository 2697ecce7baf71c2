"""
Coupling regimes and laser detuning
===================================

Shortening the photon lifetime relative to the backscattering period quenches
the oscillations. Moving the laser across the pump doublet changes the phase
the pump imprints on the pairs, which reshapes the counter-propagating traces
near zero delay.
"""

import numpy as np

from wgmbiphoton import paper_device
from wgmbiphoton.model import TWO_PI
from wgmbiphoton.runner import PAPER_DETUNINGS_GHZ, detuning_sweep, regime_sweep

device = paper_device()

print("beta/Gamma   FF      FB      BF      BB")
for row in regime_sweep(device, (0.1, 0.3, 1.0, 3.0, 10.0)):
    print(f"{row.ratio:9.1f}  " + "  ".join(f"{v:6.3f}" for v in row.contrast.values()))

report = detuning_sweep(device, TWO_PI * 1e9 * np.array(PAPER_DETUNINGS_GHZ))
print("\ndetuning GHz   phi/pi   SF-IB(0)/max   SF-IB(0)/envelope(0)")
for p in report.points:
    print(f"{p.detuning / TWO_PI / 1e9:12.2f}  {p.phi_unwrapped / np.pi:7.3f}  "
          f"{p.fb_zero_own:13.3f}  {p.fb_zero_env:20.3f}")
