"""Full-data tomography against compressive reconstruction, same measurements.

Both columns use one simulated readout of every group; the compressive
column only sees a random subset of the groups.
"""

import numpy as np

from csnmr.harness import PAPER_RATES, compare_methods
from csnmr.nmr import NoiseSpec

noise = NoiseSpec("value_gaussian", 0.02)
print(" n  eta_g  groups   QST f    CS f   (mean over 20 seeds)")
for n, eta in PAPER_RATES.items():
    runs = [compare_methods(n, eta_g=eta, noise=noise, seed=s) for s in range(20)]
    q = np.mean([r.qst_fidelity for r in runs])
    c = np.mean([r.cs_fidelity for r in runs])
    print(f" {n}  {eta:.2f}   {runs[0].g:3d}    {q:.4f}  {c:.4f}")
