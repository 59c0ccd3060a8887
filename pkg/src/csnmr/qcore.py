"""Quantum-state and matrix algebra shared by the rest of the package.

States are plain numpy arrays: a state vector is a complex 1-D array of
length ``d = 2**n`` and a density matrix is a complex ``(d, d)`` array.
Pauli strings are strings over ``"IXYZ"`` with the leftmost label acting
on the most significant qubit, the same convention used for kets
(``ket("0101")`` has its unit amplitude at index 5).
"""

from __future__ import annotations

import functools
import itertools
from typing import Sequence

import numpy as np

__all__ = [
    "DegenerateInputError",
    "PAULI_MATRICES",
    "ket",
    "preset_state",
    "PRESETS",
    "outer_product",
    "random_pure_state",
    "realize_pauli",
    "pauli_labels",
    "vec",
    "mat",
    "expectation",
    "nuclear_norm",
    "fidelity",
    "is_hermitian",
    "num_qubits",
]

HERMITIAN_ATOL = 1e-10


class DegenerateInputError(ValueError):
    """Raised when an input has no meaningful answer (zero norm, empty spectrum)."""


PAULI_MATRICES = {
    "I": np.array([[1, 0], [0, 1]], dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}
for _m in PAULI_MATRICES.values():
    _m.setflags(write=False)


def num_qubits(d: int) -> int:
    """Return n for a dimension d = 2**n, raising if d is not a power of two."""
    n = int(d).bit_length() - 1
    if d < 2 or 2**n != d:
        raise ValueError(f"dimension {d} is not a power of two >= 2")
    return n


def is_hermitian(m: np.ndarray, atol: float = HERMITIAN_ATOL) -> bool:
    m = np.asarray(m)
    return m.ndim == 2 and m.shape[0] == m.shape[1] and np.max(np.abs(m - m.conj().T), initial=0.0) <= atol


def ket(bits: str | Sequence[int]) -> np.ndarray:
    """Computational basis vector for a bitstring such as ``"0101"`` or ``[0, 1]``."""
    bits = [int(b) for b in bits]
    if not bits:
        raise ValueError("bitstring must be nonempty")
    if any(b not in (0, 1) for b in bits):
        raise ValueError(f"bitstring entries must be 0 or 1, got {bits}")
    psi = np.zeros(2 ** len(bits), dtype=complex)
    psi[int("".join(map(str, bits)), 2)] = 1.0
    return psi


def _psi2():
    return ket("00")


def _psi3():
    return 0.8 * ket("000") - 0.6 * ket("001")


def _psi4():
    return (ket("0101") + ket("1010")) / np.sqrt(2)


PRESETS = {"psi2": _psi2, "psi3": _psi3, "psi4": _psi4}


def preset_state(name: str) -> np.ndarray:
    """One of the three target states used in the NMR experiments.

    ``psi2 = |00>``, ``psi3 = (4|000> - 3|001>)/5`` and
    ``psi4 = (|0101> + |1010>)/sqrt(2)``.
    """
    try:
        return PRESETS[name]()
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; expected one of {sorted(PRESETS)}") from None


def outer_product(psi: np.ndarray) -> np.ndarray:
    """Density matrix |psi><psi| of a normalized state vector."""
    psi = np.asarray(psi, dtype=complex)
    if psi.ndim != 1:
        raise ValueError("state vector must be one-dimensional")
    num_qubits(psi.size)
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > 1e-12:
        raise ValueError(f"state vector is not normalized (norm {norm!r})")
    return np.outer(psi, psi.conj())


def random_pure_state(n: int, seed: int | np.random.Generator | None = None) -> np.ndarray:
    """Haar-random pure state on n qubits (normalized complex Gaussian vector)."""
    if n < 1:
        raise ValueError("need at least one qubit")
    rng = np.random.default_rng(seed)
    d = 2**n
    psi = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return psi / np.linalg.norm(psi)


@functools.lru_cache(maxsize=4096)
def _pauli_cached(label: str) -> np.ndarray:
    m = functools.reduce(np.kron, (PAULI_MATRICES[c] for c in label))
    m.setflags(write=False)
    return m


def realize_pauli(label: str) -> np.ndarray:
    """Matrix of a Pauli string, e.g. ``realize_pauli("XZ") == kron(X, Z)``.

    The returned array is read-only and shared between calls.
    """
    label = label.upper()
    if not label or any(c not in PAULI_MATRICES for c in label):
        raise ValueError(f"invalid Pauli string {label!r}")
    return _pauli_cached(label)


@functools.lru_cache(maxsize=16)
def pauli_labels(n: int) -> tuple[str, ...]:
    """All 4**n Pauli strings in lexicographic ``IXYZ`` order; index 0 is all-identity."""
    if n < 1:
        raise ValueError("need at least one qubit")
    return tuple("".join(p) for p in itertools.product("IXYZ", repeat=n))


def vec(m: np.ndarray) -> np.ndarray:
    """Column-stacking vectorization: column c occupies ``[c*d, (c+1)*d)``."""
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"vec expects a square matrix, got shape {m.shape}")
    return m.reshape(-1, order="F")


def mat(v: np.ndarray) -> np.ndarray:
    """Inverse of :func:`vec`."""
    v = np.asarray(v)
    d = int(round(np.sqrt(v.size)))
    if v.ndim != 1 or d * d != v.size:
        raise ValueError(f"mat expects a vector of square length, got shape {v.shape}")
    return v.reshape((d, d), order="F")


def expectation(o: np.ndarray, rho: np.ndarray) -> float:
    """Re Tr(o rho) for a Hermitian observable."""
    o = np.asarray(o)
    rho = np.asarray(rho)
    if o.shape != rho.shape or o.ndim != 2:
        raise ValueError(f"dimension mismatch: observable {o.shape} vs state {rho.shape}")
    if not is_hermitian(o):
        raise ValueError("observable is not Hermitian")
    # Tr(o rho) = sum_ij o_ij rho_ji
    tr = np.einsum("ij,ji->", o, rho)
    if abs(tr.imag) > 1e-10:
        raise ValueError(f"Tr(o rho) has imaginary part {tr.imag!r}; is rho Hermitian?")
    return float(tr.real)


def nuclear_norm(m: np.ndarray) -> float:
    return float(np.sum(np.linalg.svd(np.asarray(m), compute_uv=False)))


def fidelity(rho_hat: np.ndarray, rho: np.ndarray) -> float:
    """Normalized overlap Tr(rho_hat rho^dag) / sqrt(Tr(rho_hat^2) Tr(rho^2)).

    The measure is insensitive to positive rescaling of either argument, so
    an estimate does not need to be trace-normalized first. Values are
    clamped to [0, 1] only within 1e-9 of the boundary; anything further out
    raises, since it means one of the inputs is not Hermitian.
    """
    rho_hat = np.asarray(rho_hat)
    rho = np.asarray(rho)
    if rho_hat.shape != rho.shape:
        raise ValueError(f"dimension mismatch: {rho_hat.shape} vs {rho.shape}")
    num = np.einsum("ij,ij->", rho_hat, rho.conj()).real
    p_hat = np.einsum("ij,ji->", rho_hat, rho_hat).real
    p = np.einsum("ij,ji->", rho, rho).real
    denom = p_hat * p
    if not denom > 0:
        raise DegenerateInputError("fidelity undefined: Tr(rho_hat^2) * Tr(rho^2) is zero")
    f = num / np.sqrt(denom)
    if f < -1e-9 or f > 1 + 1e-9:
        raise ValueError(f"fidelity {f!r} outside [0, 1]; inputs are not valid density estimates")
    return float(min(max(f, 0.0), 1.0))
