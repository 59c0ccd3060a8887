"""Fidelity against sampling rate for the three experiment cases.

Usage: python 03_sampling_rate_sweep.py [--n 3] [--trials 30] [--sigma 0.0]
"""

import argparse

from csnmr.harness import SweepConfig, run_sweep
from csnmr.nmr import NoiseSpec

parser = argparse.ArgumentParser()
parser.add_argument("--n", type=int, default=3)
parser.add_argument("--trials", type=int, default=30)
parser.add_argument("--sigma", type=float, default=0.0)
args = parser.parse_args()

noise = NoiseSpec("value_gaussian", args.sigma) if args.sigma else NoiseSpec()
labels = {"A": "groups + FP-ADMM", "B": "groups + LS", "C": "Paulis + FP-ADMM"}
for case in "ABC":
    cfg = SweepConfig(case=case, n=args.n, trials=args.trials, noise=noise)
    _, rows = run_sweep(cfg)
    print(f"\ncase {case}: {labels[case]}")
    print("   eta   f_avg   zeta  P(f>=0.95)")
    for r in rows:
        bar = "#" * int(round(30 * r.f_avg))
        print(f"  {r.eta:.3f}  {r.f_avg:.3f}  {r.zeta:.3f}  {r.success_prob:5.2f}  {bar}")
