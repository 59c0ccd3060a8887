"""Reconstruction engines: FP-ADMM for nuclear-norm recovery, a least-squares
baseline and direct tomographic inversion from complete Pauli data.

FP-ADMM splits the estimate into a low-rank part ``rho`` and a sparse part
``S`` and iterates, from all-zero starting values,

    rho1 <- D_{delta/mu}( mat( vec(rho1) - delta A^dag (A vec(rho1) - y + A vec(S) + Y/mu) ) )
    rho  <- (rho1 + rho1^dag) / 2
    S    <- S_{delta lam/mu}( mat( vec(S) - delta A^dag (A vec(S) - y + A vec(rho) + Y/mu) ) )
    Y    <- Y + mu (A vec(rho + S) - y)

where ``D`` is singular value thresholding and ``S`` entrywise soft
thresholding. Iteration stops when ``||y - A vec(rho + S)|| / ||y||`` falls
below ``epsilon1`` or after ``k_max`` iterations.
"""

from __future__ import annotations

import dataclasses
import math
import time
from dataclasses import dataclass, field
from typing import Iterator, Mapping

import numpy as np

from .qcore import DegenerateInputError, is_hermitian, mat, pauli_labels, realize_pauli, vec
from .sensing import SamplingProblem

__all__ = [
    "SolverConfig",
    "SolverState",
    "ReconstructionResult",
    "soft_threshold",
    "svt",
    "fp_admm_iterates",
    "fp_admm_solve",
    "ls_solve",
    "qst_invert",
    "psd_project",
    "trace_normalize",
]

POST_PROCESS = ("none", "trace_normalize", "psd_project")


def soft_threshold(x: np.ndarray, tau: float) -> np.ndarray:
    """Entrywise shrinkage toward zero by ``tau``.

    Real entries follow ``x - tau`` above ``tau``, ``x + tau`` below ``-tau`` and
    0 in between. Complex entries keep their phase and lose ``tau`` of
    magnitude.
    """
    if tau < 0:
        raise ValueError("threshold must be nonnegative")
    x = np.asarray(x)
    if np.iscomplexobj(x):
        mag = np.abs(x)
        scale = np.maximum(mag - tau, 0.0) / np.where(mag > 0, mag, 1.0)
        return x * scale
    return np.sign(x) * np.maximum(np.abs(x) - tau, 0.0)


def svt(x: np.ndarray, tau: float) -> np.ndarray:
    """Singular value thresholding U diag(max(s - tau, 0)) V^dag (prox of tau * nuclear norm)."""
    if tau < 0:
        raise ValueError("threshold must be nonnegative")
    u, s, vh = np.linalg.svd(x, full_matrices=False)
    s = np.maximum(s - tau, 0.0)
    return (u * s) @ vh


@dataclass(frozen=True)
class SolverConfig:
    """FP-ADMM settings.

    ``lam`` is the sparse-part weight; ``"inv_sqrt_d"`` selects 1/sqrt(d).
    ``mu=None`` applies the rule ``mu = 0.5 / ||y||``. ``y_sign`` multiplies
    the multiplier update (+1 is the ascent step written above).
    ``rho1_source`` picks which iterate feeds the next low-rank step:
    ``"rho1"`` (the unsymmetrized one) or ``"rho"``. ``extract`` selects the
    reported estimate, ``"rho"`` or ``"rho_plus_s"``.
    """

    delta: float = 1.0
    lam: float | str = 1.0
    mu: float | None = None
    epsilon1: float = 1e-7
    k_max: int = 30
    post_process: str = "trace_normalize"
    y_sign: int = 1
    rho1_source: str = "rho1"
    extract: str = "rho"

    def __post_init__(self):
        if not self.delta >= 0:
            raise ValueError("delta must be nonnegative")
        if isinstance(self.lam, str):
            if self.lam != "inv_sqrt_d":
                raise ValueError(f"unknown lam rule {self.lam!r}")
        elif not self.lam > 0:
            raise ValueError("lam must be positive")
        if self.mu is not None and not self.mu > 0:
            raise ValueError("mu must be positive")
        if not self.epsilon1 > 0:
            raise ValueError("epsilon1 must be positive")
        if self.k_max < 1:
            raise ValueError("k_max must be at least 1")
        if self.post_process not in POST_PROCESS:
            raise ValueError(f"post_process must be one of {POST_PROCESS}")
        if self.y_sign not in (1, -1):
            raise ValueError("y_sign must be +1 or -1")
        if self.rho1_source not in ("rho1", "rho"):
            raise ValueError("rho1_source must be 'rho1' or 'rho'")
        if self.extract not in ("rho", "rho_plus_s"):
            raise ValueError("extract must be 'rho' or 'rho_plus_s'")

    def lam_for(self, d: int) -> float:
        return 1 / math.sqrt(d) if self.lam == "inv_sqrt_d" else float(self.lam)

    def mu_for(self, y: np.ndarray) -> float:
        return self.mu if self.mu is not None else 0.5 / float(np.linalg.norm(y))

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass
class SolverState:
    rho1: np.ndarray
    rho: np.ndarray
    s_mat: np.ndarray
    y_mult: np.ndarray
    k: int = 0
    residual_history: list[float] = field(default_factory=list)


@dataclass
class ReconstructionResult:
    rho_hat: np.ndarray
    iterations: int
    final_residual: float
    converged: bool
    wall_time: float
    method: str = "fpadmm"
    residual_history: list[float] = field(default_factory=list)
    degenerate: bool = False
    config: dict = field(default_factory=dict)


def trace_normalize(rho: np.ndarray) -> np.ndarray:
    tr = np.trace(rho).real
    if abs(tr) < 1e-14:
        return rho
    return rho / tr


def _post(rho: np.ndarray, how: str) -> np.ndarray:
    if how == "trace_normalize":
        return trace_normalize(rho)
    if how == "psd_project":
        return psd_project(rho)
    return rho


def fp_admm_iterates(problem: SamplingProblem, config: SolverConfig | None = None) -> Iterator[SolverState]:
    """Yield the solver state after each FP-ADMM iteration.

    The same :class:`SolverState` object is updated in place and yielded
    every time; copy arrays out of it if you need to keep them.
    """
    config = config or SolverConfig()
    a, ah, gram = problem.a_matrix, problem.a_adjoint, problem.gram
    y = problem.y_vector
    d = problem.d
    y_norm = float(np.linalg.norm(y))
    if y_norm == 0:
        raise DegenerateInputError("||y|| = 0: the mu rule is undefined")
    mu = config.mu_for(y)
    delta = config.delta
    tau_rho = delta / mu
    tau_s = delta * config.lam_for(d) / mu
    zero = np.zeros((d, d), dtype=complex)
    st = SolverState(zero.copy(), zero.copy(), zero.copy(), np.zeros(len(y), dtype=complex))
    for k in range(1, config.k_max + 1):
        x1 = vec(st.rho1 if config.rho1_source == "rho1" else st.rho)
        s = vec(st.s_mat)
        yk = st.y_mult / mu
        arg = x1 - delta * (gram @ x1) + delta * (ah @ (y - a @ s - yk))
        st.rho1 = svt(mat(arg), tau_rho)
        st.rho = (st.rho1 + st.rho1.conj().T) / 2
        r = vec(st.rho)
        arg = s - delta * (gram @ s) + delta * (ah @ (y - a @ r - yk))
        st.s_mat = soft_threshold(mat(arg), tau_s)
        fit = a @ (r + vec(st.s_mat))
        st.y_mult = st.y_mult + config.y_sign * mu * (fit - y)
        st.k = k
        st.residual_history.append(float(np.linalg.norm(y - fit) / y_norm))
        yield st
        if st.residual_history[-1] < config.epsilon1:
            return


def fp_admm_solve(problem: SamplingProblem, config: SolverConfig | None = None) -> ReconstructionResult:
    """Nuclear-norm reconstruction of a density matrix by FP-ADMM.

    An all-zero data vector has the zero matrix as its fixed point; that case
    returns immediately with ``degenerate=True``.
    """
    config = config or SolverConfig()
    t0 = time.perf_counter()
    d = problem.d
    if not np.any(problem.y_vector):
        return ReconstructionResult(
            np.zeros((d, d), dtype=complex), 0, 0.0, True, time.perf_counter() - t0,
            degenerate=True, config=config.as_dict(),
        )
    st = None
    for st in fp_admm_iterates(problem, config):
        pass
    est = st.rho + st.s_mat if config.extract == "rho_plus_s" else st.rho
    est = _post(est.copy(), config.post_process)
    final = st.residual_history[-1]
    return ReconstructionResult(
        est,
        st.k,
        final,
        final < config.epsilon1,
        time.perf_counter() - t0,
        residual_history=list(st.residual_history),
        config=config.as_dict(),
    )


def ls_solve(problem: SamplingProblem, rcond: float = 1e-10) -> ReconstructionResult:
    """Minimum-norm least-squares estimate via the truncated pseudo-inverse.

    The estimate is Hermitized and trace-normalized.
    """
    t0 = time.perf_counter()
    x = np.linalg.pinv(problem.a_matrix, rcond=rcond) @ problem.y_vector
    rho = mat(x)
    rho = trace_normalize((rho + rho.conj().T) / 2)
    res = problem.residual(rho)
    return ReconstructionResult(rho, 1, res, True, time.perf_counter() - t0, method="ls")


def qst_invert(pauli_values: Mapping[str, float]) -> np.ndarray:
    """Direct tomographic inversion rho = (1/d) sum_P <P> P from all d^2 Pauli expectations."""
    if not pauli_values:
        raise ValueError("no Pauli values given")
    n = len(next(iter(pauli_values)))
    labels = pauli_labels(n)
    missing = [p for p in labels if p not in pauli_values]
    if missing:
        shown = ", ".join(missing[:8]) + (" ..." if len(missing) > 8 else "")
        raise ValueError(f"missing {len(missing)} Pauli expectations: {shown}")
    d = 2**n
    rho = np.zeros((d, d), dtype=complex)
    for p in labels:
        rho += pauli_values[p] * realize_pauli(p)
    return rho / d


def psd_project(rho: np.ndarray) -> np.ndarray:
    """Clip negative eigenvalues and renormalize to unit trace."""
    rho = np.asarray(rho, dtype=complex)
    if not is_hermitian(rho, atol=1e-8):
        raise ValueError("psd_project needs a Hermitian matrix")
    w, v = np.linalg.eigh((rho + rho.conj().T) / 2)
    w = np.clip(w, 0.0, None)
    if w.sum() <= 0:
        raise DegenerateInputError("no positive eigenvalues to keep")
    w = w / w.sum()
    return (v * w) @ v.conj().T
