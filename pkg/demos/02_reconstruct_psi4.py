"""Reconstruct the 4-qubit state from half of the readout groups."""

import numpy as np

from csnmr import assemble_from_groups, build_scheme, fidelity, fp_admm_solve, ls_solve, measure_groups
from csnmr.nmr import NoiseSpec
from csnmr.qcore import outer_product, preset_state
from csnmr.sensing import sample_groups

rho = outer_product(preset_state("psi4"))
scheme = build_scheme(4)
meas = measure_groups(rho, scheme, noise=NoiseSpec("value_gaussian", 0.02, seed=3))

idx = sample_groups(scheme.v, scheme.v // 2, seed=11)
problem = assemble_from_groups(scheme, meas, idx)
print(f"sampled {len(idx)} of {scheme.v} groups: A is {problem.a_matrix.shape[0]} x {problem.a_matrix.shape[1]}")

res = fp_admm_solve(problem)
print(f"FP-ADMM: {res.iterations} iterations, final residual {res.final_residual:.2e}")
print(f"fidelity {fidelity(res.rho_hat, rho):.4f}")
print(f"least squares on the same data: {fidelity(ls_solve(problem).rho_hat, rho):.4f}")

print("\nlargest entries of the estimate:")
order = np.argsort(-np.abs(res.rho_hat).ravel())[:4]
for flat in order:
    i, j = divmod(int(flat), 16)
    print(f"  rho[{i:04b}, {j:04b}] = {res.rho_hat[i, j].real:+.4f}{res.rho_hat[i, j].imag:+.4f}j")

print("\nresidual history:", " ".join(f"{r:.1e}" for r in res.residual_history[::5]))
