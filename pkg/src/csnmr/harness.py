"""Monte Carlo sweeps of reconstruction fidelity against sampling rate.

Three experiment cases are supported:

* ``A``: random observable groups, FP-ADMM
* ``B``: random observable groups, least squares
* ``C``: random Pauli operators, FP-ADMM

Each trial draws its own seed from ``(base_seed, sampling mode, n, sampled
count, trial index)``. Cases A and B share the sampling mode, so the two
are paired trial-by-trial: they see the same groups and the same noise.
"""

from __future__ import annotations

import concurrent.futures
import dataclasses
import functools
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .nmr import DEFAULT_GROUP_COUNTS, NoiseSpec, ReadoutScheme, SpectrumModel, build_scheme, measure_groups
from .qcore import DegenerateInputError, fidelity, outer_product, preset_state, random_pure_state
from .sensing import assemble_from_groups, assemble_from_paulis, pauli_values_from_groups, sample_groups, sample_paulis
from .solvers import SolverConfig, fp_admm_solve, ls_solve, qst_invert

__all__ = [
    "CASES",
    "SweepConfig",
    "TrialRecord",
    "SummaryRow",
    "Comparison",
    "default_eta_grid",
    "sampled_count",
    "trial_seed",
    "run_trial",
    "run_sweep",
    "summarize",
    "zeta",
    "success_probability",
    "compare_methods",
    "PAPER_RATES",
]

CASES = {
    "A": ("groups", "fpadmm"),
    "B": ("groups", "ls"),
    "C": ("pauli", "fpadmm"),
}
_MODE_CODE = {"groups": 0, "pauli": 1}

# Grid steps of the published group-sampling sweeps; other n use 1/v.
_GROUP_STEPS = {2: 1 / 6, 3: 1 / 16, 4: 1 / 22}
PAULI_STEP = 0.1

# Least group-sampling rates with high success probability, used for the method comparison.
PAPER_RATES = {2: 1.0, 3: 0.75, 4: 0.5}


def default_eta_grid(case: str, n: int) -> tuple[float, ...]:
    """Sampling-rate grid starting at the first positive step and ending at 1."""
    mode, _ = CASES[case]
    if mode == "pauli":
        step = PAULI_STEP
    else:
        step = _GROUP_STEPS.get(n)
        if step is None:
            step = 1 / DEFAULT_GROUP_COUNTS.get(n, 2 * n)
    k = int(round(1 / step))
    return tuple(i / k for i in range(1, k + 1))


@dataclass(frozen=True)
class SweepConfig:
    case: str = "A"
    n: int = 2
    state: str | None = None  # preset name or "random"; default psi<n>
    eta_values: tuple[float, ...] | None = None
    trials: int = 100
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    measurement_path: str = "ideal"
    base_seed: int = 0
    threshold: float = 0.95
    scheme_seed: int = 1
    v: int | None = None
    solver: SolverConfig = field(default_factory=SolverConfig)
    spectral: SpectrumModel | None = None

    def __post_init__(self):
        if self.case not in CASES:
            raise ValueError(f"unknown case {self.case!r}; expected one of {sorted(CASES)}")
        if self.n < 1:
            raise ValueError("n must be positive")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.state is None:
            object.__setattr__(self, "state", f"psi{self.n}")
        if self.state != "random":
            psi = preset_state(self.state)
            if psi.size != 2**self.n:
                raise ValueError(f"preset {self.state} is not a {self.n}-qubit state")
        if self.eta_values is None:
            object.__setattr__(self, "eta_values", default_eta_grid(self.case, self.n))
        etas = tuple(float(e) for e in self.eta_values)
        if not etas or any(not 0 < e <= 1 for e in etas):
            raise ValueError("sampling rates must lie in (0, 1]")
        if any(b <= a for a, b in zip(etas, etas[1:])):
            raise ValueError("sampling rates must be strictly increasing")
        object.__setattr__(self, "eta_values", etas)
        if self.measurement_path not in ("ideal", "spectral"):
            raise ValueError(f"unknown measurement path {self.measurement_path!r}")
        if self.mode == "pauli" and (self.measurement_path != "ideal" or self.noise.mode == "spectral_gaussian"):
            raise ValueError("Pauli sampling (case C) only supports the ideal path with value noise")
        if not 0 <= self.threshold <= 1:
            raise ValueError("success threshold must lie in [0, 1]")
        if self.v is None and self.mode == "groups":
            object.__setattr__(self, "v", DEFAULT_GROUP_COUNTS.get(self.n))
            if self.v is None:
                raise ValueError(f"no default group count for n={self.n}; set v")

    @property
    def mode(self) -> str:
        return CASES[self.case][0]

    @property
    def method(self) -> str:
        return CASES[self.case][1]

    @property
    def d(self) -> int:
        return 2**self.n

    def echo(self) -> dict:
        """Flat description of the sweep, written at the top of every output."""
        return {
            "case": self.case,
            "n": self.n,
            "state": self.state,
            "eta_values": ",".join(repr(e) for e in self.eta_values),
            "trials": self.trials,
            "noise_mode": self.noise.mode,
            "noise_sigma": self.noise.sigma,
            "measurement_path": self.measurement_path,
            "base_seed": self.base_seed,
            "threshold": self.threshold,
            "scheme_seed": self.scheme_seed,
            "v": self.v,
            **{f"solver_{k}": v for k, v in self.solver.as_dict().items()},
        }


@dataclass(frozen=True)
class TrialRecord:
    case: str
    n: int
    eta: float
    trial_index: int
    seed: int
    fidelity: float
    iterations: int
    final_residual: float
    converged: bool
    degenerate: bool = False
    random_state: bool = False


@dataclass(frozen=True)
class SummaryRow:
    case: str
    n: int
    eta: float
    f_avg: float
    zeta: float
    success_prob: float
    threshold: float = 0.95
    trials: int = 0

    @property
    def error_bar(self) -> tuple[float, float]:
        """Plot band f_avg -/+ zeta."""
        return self.f_avg - self.zeta, self.f_avg + self.zeta


def sampled_count(config: SweepConfig, eta: float) -> int:
    """Number of sampled groups (g) or Pauli operators (m) for a rate."""
    total = config.v if config.mode == "groups" else config.d**2
    count = int(round(eta * total))
    if count < 1:
        raise ValueError(f"rate {eta} samples nothing out of {total}")
    return count


def trial_seed(base_seed: int, mode: str, n: int, count: int, trial_index: int) -> int:
    """Reproducible 63-bit seed of one trial; independent of the rest of the grid."""
    ss = np.random.SeedSequence(base_seed, spawn_key=(_MODE_CODE[mode], n, count, trial_index))
    lo, hi = ss.generate_state(2, dtype=np.uint32)
    return int((int(hi) << 32 | int(lo)) & (2**63 - 1))


@functools.lru_cache(maxsize=16)
def _scheme(n: int, v: int, seed: int) -> ReadoutScheme:
    return build_scheme(n, v=v, seed=seed)


def run_trial(config: SweepConfig, eta: float, trial_index: int) -> TrialRecord:
    """One reconstruction: prepare, measure, sample, solve, score."""
    count = sampled_count(config, eta)
    seed = trial_seed(config.base_seed, config.mode, config.n, count, trial_index)
    state_ss, sample_ss, noise_ss = np.random.SeedSequence(seed).spawn(3)
    if config.state == "random":
        psi = random_pure_state(config.n, np.random.default_rng(state_ss))
    else:
        psi = preset_state(config.state)
    rho = outer_product(psi)
    sample_rng = np.random.default_rng(sample_ss)
    noise = dataclasses.replace(config.noise, seed=int(noise_ss.generate_state(1)[0]))

    if config.mode == "groups":
        scheme = _scheme(config.n, config.v, config.scheme_seed)
        idx = sample_groups(scheme.v, count, sample_rng)
        meas = measure_groups(rho, scheme, config.measurement_path, noise, config.spectral)
        problem = assemble_from_groups(scheme, meas, idx, seed=seed)
    else:
        paulis = sample_paulis(config.n, count, sample_rng, include_identity=True)
        problem = assemble_from_paulis(paulis, rho, noise, seed=seed)

    if config.method == "ls":
        result = ls_solve(problem)
    else:
        result = fp_admm_solve(problem, config.solver)

    degenerate = result.degenerate
    try:
        f = fidelity(result.rho_hat, rho)
    except DegenerateInputError:
        f, degenerate = 0.0, True
    return TrialRecord(
        config.case,
        config.n,
        float(eta),
        trial_index,
        seed,
        f,
        result.iterations,
        result.final_residual,
        bool(result.converged and not degenerate),
        degenerate,
        config.state == "random",
    )


def _run_eta(config: SweepConfig, eta: float) -> list[TrialRecord]:
    return [run_trial(config, eta, t) for t in range(config.trials)]


def run_sweep(config: SweepConfig, jobs: int = 1) -> tuple[list[TrialRecord], list[SummaryRow]]:
    """All trials at every rate of the grid, plus per-rate summary rows.

    With ``jobs > 1`` the rates are distributed over worker processes. Every
    trial owns its generator, so the records are identical to a serial run.
    """
    if jobs > 1 and len(config.eta_values) > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(_run_eta, [config] * len(config.eta_values), config.eta_values))
    else:
        chunks = [_run_eta(config, eta) for eta in config.eta_values]
    records = sorted((r for chunk in chunks for r in chunk), key=lambda r: (r.eta, r.trial_index))
    return records, summarize(records, config.threshold)


def zeta(fidelities: Sequence[float]) -> float:
    """Root-mean-square deviation of the fidelities from their mean."""
    f = np.asarray(fidelities, dtype=float)
    if f.size == 0:
        raise ValueError("zeta of an empty set of fidelities")
    return float(np.sqrt(np.mean((f - f.mean()) ** 2)))


def success_probability(fidelities: Sequence[float], threshold: float = 0.95) -> float:
    """Fraction of reconstructions with fidelity >= threshold."""
    f = np.asarray(fidelities, dtype=float)
    if f.size == 0:
        raise ValueError("success probability of an empty set of fidelities")
    if not 0 <= threshold <= 1:
        raise ValueError("threshold must lie in [0, 1]")
    return float(np.mean(f >= threshold))


def summarize(records: Iterable[TrialRecord], threshold: float = 0.95) -> list[SummaryRow]:
    groups: dict[tuple, list[float]] = {}
    for r in records:
        groups.setdefault((r.case, r.n, r.eta), []).append(r.fidelity)
    rows = []
    for (case, n, eta), fs in sorted(groups.items(), key=lambda kv: (kv[0][0], kv[0][1], kv[0][2])):
        rows.append(
            SummaryRow(
                case, n, eta, float(np.mean(fs)), zeta(fs), success_probability(fs, threshold), threshold, len(fs)
            )
        )
    return rows


@dataclass
class Comparison:
    """Full-data tomography against compressive reconstruction on the same data."""

    n: int
    state: str
    eta_g: float
    g: int
    qst_fidelity: float
    cs_fidelity: float
    rho_qst: np.ndarray
    rho_cs: np.ndarray
    rho_true: np.ndarray
    iterations: int = 0
    converged: bool = False
    sampled_groups: tuple[int, ...] = ()


def compare_methods(
    n: int,
    state: str | None = None,
    eta_g: float | None = None,
    noise: NoiseSpec | None = None,
    seed: int = 0,
    scheme_seed: int = 1,
    path: str = "ideal",
    solver: SolverConfig | None = None,
    spectral: SpectrumModel | None = None,
) -> Comparison:
    """Reconstruct one state both ways from a single simulated measurement.

    All groups are measured once. The tomography column inverts the full
    data set through the Pauli basis; the compressive column samples
    ``round(eta_g * v)`` of the same groups and runs FP-ADMM.
    """
    state = state or f"psi{n}"
    eta_g = PAPER_RATES.get(n, 1.0) if eta_g is None else eta_g
    v = DEFAULT_GROUP_COUNTS.get(n)
    if v is None:
        raise ValueError(f"no default group count for n={n}")
    g = max(1, int(round(eta_g * v)))
    state_ss, sample_ss, noise_ss = np.random.SeedSequence(seed).spawn(3)
    psi = random_pure_state(n, np.random.default_rng(state_ss)) if state == "random" else preset_state(state)
    if psi.size != 2**n:
        raise ValueError(f"state {state} is not a {n}-qubit state")
    rho = outer_product(psi)
    scheme = _scheme(n, v, scheme_seed)
    noise = dataclasses.replace(noise or NoiseSpec(), seed=int(noise_ss.generate_state(1)[0]))
    meas = measure_groups(rho, scheme, path, noise, spectral)

    pauli_vals, _ = pauli_values_from_groups(scheme, meas)
    rho_qst = qst_invert(pauli_vals)
    idx = sample_groups(v, g, np.random.default_rng(sample_ss))
    res = fp_admm_solve(assemble_from_groups(scheme, meas, idx, seed=seed), solver)
    return Comparison(
        n,
        state,
        float(eta_g),
        g,
        fidelity(rho_qst, rho),
        fidelity(res.rho_hat, rho),
        rho_qst,
        res.rho_hat,
        rho,
        res.iterations,
        res.converged,
        tuple(int(k) for k in idx),
    )


def interpolate_curve(etas: Sequence[float], values: Sequence[float], at: Sequence[float]) -> np.ndarray:
    """Linear interpolation of a summary curve at other rates (used to match grids)."""
    if any(not math.isfinite(x) for x in values):
        raise ValueError("curve has non-finite values")
    return np.interp(np.asarray(at, dtype=float), np.asarray(etas, dtype=float), np.asarray(values, dtype=float))
