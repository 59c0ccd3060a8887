"""How FP-ADMM settings change the result on a fixed set of problems.

Covers the sparse weight, the multiplier sign, the source of the low-rank
step and the step size.
"""

import numpy as np

from csnmr import assemble_from_groups, build_scheme, fidelity, measure_groups
from csnmr.qcore import DegenerateInputError, outer_product, preset_state
from csnmr.sensing import sample_groups
from csnmr.solvers import SolverConfig, fp_admm_solve

rho = outer_product(preset_state("psi3"))
scheme = build_scheme(3)
meas = measure_groups(rho, scheme)
problems = [assemble_from_groups(scheme, meas, sample_groups(16, 8, s)) for s in range(40)]


def score(cfg):
    fs, its = [], []
    for p in problems:
        res = fp_admm_solve(p, cfg)
        try:
            fs.append(fidelity(res.rho_hat, rho))
        except DegenerateInputError:
            fs.append(0.0)
        its.append(res.iterations)
    return np.mean(fs), np.mean(its)


variants = {
    "defaults": SolverConfig(),
    "lam = 1/sqrt(d)": SolverConfig(lam="inv_sqrt_d"),
    "lam = 2": SolverConfig(lam=2.0),
    "y_sign = -1": SolverConfig(y_sign=-1),
    "low-rank step from rho": SolverConfig(rho1_source="rho"),
    "report rho + S": SolverConfig(extract="rho_plus_s"),
    "delta = 0.5": SolverConfig(delta=0.5),
    "delta = 1.9": SolverConfig(delta=1.9),
    "k_max = 100": SolverConfig(k_max=100),
}
print(f"psi3, 8 of 16 groups, {len(problems)} draws")
print(f"{'setting':26s} f_avg   iterations")
for name, cfg in variants.items():
    f, it = score(cfg)
    print(f"{name:26s} {f:.4f}  {it:5.1f}")
