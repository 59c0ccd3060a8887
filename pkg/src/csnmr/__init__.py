"""Compressive-sensing reconstruction of NMR quantum states from grouped observable data."""

from .harness import SweepConfig, compare_methods, run_sweep, run_trial, success_probability, zeta
from .nmr import NoiseSpec, SpectrumModel, build_scheme, measure_groups
from .qcore import fidelity, outer_product, preset_state, random_pure_state
from .sensing import assemble_from_groups, assemble_from_paulis, sample_groups, sample_paulis
from .solvers import SolverConfig, fp_admm_solve, ls_solve, qst_invert

__version__ = "0.1.0"

__all__ = [
    "NoiseSpec",
    "SolverConfig",
    "SpectrumModel",
    "SweepConfig",
    "assemble_from_groups",
    "assemble_from_paulis",
    "build_scheme",
    "compare_methods",
    "fidelity",
    "fp_admm_solve",
    "ls_solve",
    "measure_groups",
    "outer_product",
    "preset_state",
    "qst_invert",
    "random_pure_state",
    "run_sweep",
    "run_trial",
    "sample_groups",
    "sample_paulis",
    "success_probability",
    "zeta",
]
