"""Assembly of compressive-sensing problems (A, y) from sampled observable
groups or sampled Pauli operators.

Every row of ``A`` is ``vec(O)^dag / sqrt(d)`` and the matching entry of ``y``
is ``<O> / sqrt(d)``, so that ``A @ vec(rho) == y`` holds exactly for the
generating state when the data are noiseless. A unit-trace row
``vec(I)^dag / sqrt(d)`` with target ``1 / sqrt(d)`` is appended by default:
the group observables are traceless and would otherwise leave the identity
direction unconstrained.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .nmr import Measurement, NoiseSpec, ReadoutScheme
from .qcore import is_hermitian, pauli_labels, realize_pauli, vec

__all__ = [
    "SamplingProblem",
    "RankDeficiencyError",
    "sample_groups",
    "sample_paulis",
    "assemble_from_groups",
    "assemble_from_paulis",
    "pauli_decompose",
    "pauli_values_from_groups",
    "TRACE_ROW",
]

TRACE_ROW = "trace"


class RankDeficiencyError(ValueError):
    """The sampled operators do not span the full operator space."""


@dataclass(frozen=True, eq=False)
class SamplingProblem:
    """Linear measurement model ``y = A vec(rho)``.

    ``row_meta`` labels each row: ``"g<k>:<j>"`` for observable j of group k,
    a Pauli string in Pauli mode, or ``"trace"`` for the unit-trace row.
    """

    a_matrix: np.ndarray
    y_vector: np.ndarray
    row_meta: tuple[str, ...]
    d: int
    mode: str = "groups"
    eta: float = 1.0
    seed: int | None = None
    include_trace_row: bool = True
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        a = np.asarray(self.a_matrix, dtype=complex)
        y = np.asarray(self.y_vector, dtype=float)
        if a.ndim != 2 or a.shape[1] != self.d * self.d:
            raise ValueError(f"A must have d^2={self.d * self.d} columns, got shape {a.shape}")
        if y.shape != (a.shape[0],):
            raise ValueError(f"y has shape {y.shape}, expected ({a.shape[0]},)")
        if len(self.row_meta) != a.shape[0]:
            raise ValueError("row_meta must label every row")
        a.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "a_matrix", a)
        object.__setattr__(self, "y_vector", y)
        object.__setattr__(self, "row_meta", tuple(self.row_meta))

    @property
    def n(self) -> int:
        return self.d.bit_length() - 1

    @property
    def rows(self) -> int:
        return self.a_matrix.shape[0]

    @functools.cached_property
    def a_adjoint(self) -> np.ndarray:
        return self.a_matrix.conj().T

    @functools.cached_property
    def gram(self) -> np.ndarray:
        """A^dag A, reused by every solver iteration."""
        return self.a_adjoint @ self.a_matrix

    def residual(self, x: np.ndarray) -> float:
        """Relative residual ||y - A vec(x)|| / ||y||."""
        r = self.y_vector - self.a_matrix @ vec(x)
        return float(np.linalg.norm(r) / np.linalg.norm(self.y_vector))

    def scaled(self, c: float) -> SamplingProblem:
        return SamplingProblem(
            c * self.a_matrix,
            c * self.y_vector,
            self.row_meta,
            self.d,
            self.mode,
            self.eta,
            self.seed,
            self.include_trace_row,
            dict(self.info, scale=c),
        )


def _rng(seed):
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def sample_groups(v: int, g: int, seed=None) -> np.ndarray:
    """Uniformly random g-subset of the group indices ``0..v-1``, sorted."""
    if not 0 < g <= v:
        raise ValueError(f"need 0 < g <= v, got g={g}, v={v}")
    return np.sort(_rng(seed).choice(v, size=g, replace=False))


def sample_paulis(n: int, m: int, seed=None, include_identity: bool = True) -> list[str]:
    """Uniform m-subset of the Pauli strings on n qubits.

    With ``include_identity=False`` the all-identity string is left out of the
    draw (the unit-trace row already carries that information).
    """
    labels = pauli_labels(n)
    if not include_identity:
        labels = labels[1:]
    if not 0 < m <= len(labels):
        raise ValueError(f"need 0 < m <= {len(labels)}, got m={m}")
    idx = np.sort(_rng(seed).choice(len(labels), size=m, replace=False))
    return [labels[i] for i in idx]


def _trace_row(d: int) -> np.ndarray:
    return vec(np.eye(d, dtype=complex)) / np.sqrt(d)


def assemble_from_groups(
    scheme: ReadoutScheme,
    values: Measurement | np.ndarray | Mapping[int, Sequence[float]],
    indices: Sequence[int],
    include_trace_row: bool = True,
    seed: int | None = None,
) -> SamplingProblem:
    """Stack the sampled groups (ascending index order) into a sensing problem.

    ``values`` gives the d measured values of each group, either as a
    (v, d) array / :class:`Measurement` indexed by group, or as a mapping
    from group index to its values.
    """
    d = scheme.d
    idx = sorted(int(k) for k in indices)
    if not idx:
        raise ValueError("no groups sampled")
    rows, ys, meta = [], [], []
    for k in idx:
        if not 0 <= k < scheme.v:
            raise ValueError(f"group index {k} out of range for v={scheme.v}")
        try:
            vals = np.asarray(values[k], dtype=float)
        except (KeyError, IndexError):
            raise ValueError(f"missing measured values for group {k}") from None
        if vals.shape != (d,):
            raise ValueError(f"group {k} needs {d} values, got shape {vals.shape}")
        obs = scheme.groups[k].observables
        rows.append(obs.transpose(0, 2, 1).reshape(d, d * d).conj() / np.sqrt(d))
        ys.append(vals / np.sqrt(d))
        meta.extend(f"g{k}:{j}" for j in range(d))
    if include_trace_row:
        rows.append(_trace_row(d)[None, :])
        ys.append([1 / np.sqrt(d)])
        meta.append(TRACE_ROW)
    return SamplingProblem(
        np.vstack(rows),
        np.concatenate(ys),
        tuple(meta),
        d,
        mode="groups",
        eta=len(idx) / scheme.v,
        seed=seed,
        include_trace_row=include_trace_row,
        info={"g": len(idx), "v": scheme.v, "groups": idx},
    )


def assemble_from_paulis(
    paulis: Sequence[str],
    rho_or_values: np.ndarray,
    noise: NoiseSpec | None = None,
    include_trace_row: bool = True,
    seed: int | None = None,
) -> SamplingProblem:
    """One row per Pauli string; ``rho_or_values`` is a density matrix or the measured values.

    Value noise (``noise.mode == "value_gaussian"``) is added to the Pauli
    expectations before scaling.
    """
    if not paulis:
        raise ValueError("no Pauli operators given")
    n = len(paulis[0])
    d = 2**n
    if any(len(p) != n for p in paulis):
        raise ValueError("Pauli strings of different lengths")
    mats = np.array([realize_pauli(p) for p in paulis])
    data = np.asarray(rho_or_values)
    if data.ndim == 2:
        if data.shape != (d, d):
            raise ValueError(f"state of shape {data.shape} does not match {n}-qubit Paulis")
        vals = np.einsum("kij,ji->k", mats, data).real
    elif data.shape == (len(paulis),):
        vals = data.astype(float)
    else:
        raise ValueError(f"expected a ({d}, {d}) state or {len(paulis)} values, got shape {data.shape}")
    noise = noise or NoiseSpec()
    if noise.mode == "value_gaussian" and noise.sigma > 0:
        vals = vals + noise.sigma * np.random.default_rng(noise.seed).standard_normal(vals.shape)
    elif noise.mode == "spectral_gaussian":
        raise ValueError("Pauli sampling has no spectral path; use value_gaussian noise")
    rows = mats.transpose(0, 2, 1).reshape(len(paulis), d * d).conj() / np.sqrt(d)
    ys = vals / np.sqrt(d)
    meta = list(paulis)
    if include_trace_row:
        rows = np.vstack([rows, _trace_row(d)[None, :]])
        ys = np.append(ys, 1 / np.sqrt(d))
        meta.append(TRACE_ROW)
    return SamplingProblem(
        rows,
        ys,
        tuple(meta),
        d,
        mode="pauli",
        eta=len(paulis) / d**2,
        seed=seed,
        include_trace_row=include_trace_row,
        info={"m": len(paulis)},
    )


@functools.lru_cache(maxsize=8)
def _pauli_stack(n: int) -> np.ndarray:
    return np.array([realize_pauli(p) for p in pauli_labels(n)])


def pauli_decompose(o: np.ndarray) -> np.ndarray:
    """Real coefficients c_P = Tr(P o) / d over :func:`pauli_labels` order."""
    o = np.asarray(o, dtype=complex)
    if not is_hermitian(o):
        raise ValueError("pauli_decompose needs a Hermitian matrix")
    d = o.shape[0]
    n = d.bit_length() - 1
    c = np.einsum("kij,ji->k", _pauli_stack(n), o) / d
    return c.real


def pauli_values_from_groups(
    scheme: ReadoutScheme, values: Measurement | np.ndarray
) -> tuple[dict[str, float], float]:
    """Recover all d^2 Pauli expectations from a complete set of group data.

    Each observable is a known linear combination of Pauli strings, so the
    group values define an over-determined linear system in the Pauli
    expectations. It is solved in the least-squares sense with
    ``<I...I> = 1`` imposed. Returns the expectations and the norm of the
    least-squares residual.
    """
    vals = np.asarray(values.values if isinstance(values, Measurement) else values, dtype=float)
    if vals.shape != (scheme.v, scheme.d):
        raise ValueError(f"need values for all {scheme.v} groups, got shape {vals.shape}")
    n, d = scheme.n, scheme.d
    obs = scheme.observables
    coeffs = (np.einsum("pij,kji->kp", _pauli_stack(n), obs) / d).real
    rhs = vals.reshape(-1) - coeffs[:, 0]
    sub = coeffs[:, 1:]
    u, s, vh = np.linalg.svd(sub, full_matrices=False)
    rank = int(np.sum(s > 1e-9 * s[0]))
    missing = d * d - 1 - rank
    if missing:
        raise RankDeficiencyError(
            f"scheme is incomplete: {missing} of {d * d - 1} non-identity Pauli directions unobserved"
        )
    sol = vh.conj().T @ ((u.conj().T @ rhs) / s)
    residual = float(np.linalg.norm(sub @ sol - rhs))
    labels = pauli_labels(n)
    out = {labels[0]: 1.0}
    out.update({lab: float(x) for lab, x in zip(labels[1:], sol)})
    return out, residual
