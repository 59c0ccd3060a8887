"""Synthetic NMR readout: FID signals, Lorentzian spectra, peak-area observables
and grouped-observable readout schemes.

One NMR spectrum carries ``d`` peaks, so one measurement yields the values of
``d`` observables at once (an observable *group*). The default readout scheme
builds each group from one observed spin and a choice of 90-degree readout
rotations on every spin::

    O_j = R^dag (sigma_a on spin s) (x) (projector pattern z on the others) R

with ``a`` in {x, y} and ``z`` running over the ``2**(n-1)`` basis patterns of
the unobserved spins, which gives exactly ``2 * 2**(n-1) = d`` observables.
"""

from __future__ import annotations

import dataclasses
import functools
import itertools
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .qcore import PAULI_MATRICES, is_hermitian, vec

__all__ = [
    "PeakSpec",
    "SpectrumModel",
    "NoiseSpec",
    "ObservableGroup",
    "ReadoutScheme",
    "Measurement",
    "DEFAULT_GROUP_COUNTS",
    "fid_signal",
    "spectrum",
    "integrate_peak",
    "window_area_fraction",
    "build_scheme",
    "completeness_rank",
    "measure_groups",
]

# Group counts of the experimental readout schemes for 2, 3 and 4 qubits.
DEFAULT_GROUP_COUNTS = {2: 6, 3: 16, 4: 44}

DEFAULT_POINTS_PER_WINDOW = 4096


@dataclass(frozen=True)
class PeakSpec:
    omega: float
    amplitude: float
    observable_index: int = 0

    def __post_init__(self):
        if not (np.isfinite(self.omega) and np.isfinite(self.amplitude)):
            raise ValueError("peak frequency and amplitude must be finite")


@dataclass(frozen=True)
class SpectrumModel:
    """Lorentzian spectrum parameters.

    ``t2`` is the transverse relaxation time, ``m0`` the magnetization scale,
    ``p0`` the area-to-expectation calibration factor and ``delta_omega`` the
    half-width of the integration window around each peak. Frequencies are
    angular (rad/s).
    """

    peaks: tuple[PeakSpec, ...] = ()
    t2: float = 1.0
    m0: float = 1.0
    p0: float = 1.0
    delta_omega: float = 64.0
    min_separation: float | None = None

    def __post_init__(self):
        if not self.t2 > 0:
            raise ValueError("t2 must be positive")
        if not self.p0 > 0:
            raise ValueError("p0 must be positive")
        if not self.m0 > 0:
            raise ValueError("m0 must be positive")
        if not self.delta_omega > 0:
            raise ValueError("delta_omega must be positive")
        object.__setattr__(self, "peaks", tuple(self.peaks))

    @property
    def separation(self) -> float:
        """Smallest gap between peaks that encode different observables."""
        if self.min_separation is not None:
            return float(self.min_separation)
        gaps = [
            abs(p.omega - q.omega)
            for p, q in itertools.combinations(self.peaks, 2)
            if p.observable_index != q.observable_index
        ]
        return min(gaps, default=np.inf)

    @property
    def well_separated(self) -> bool:
        return self.separation >= 4 * self.delta_omega

    def with_peaks(self, peaks: Sequence[PeakSpec]) -> SpectrumModel:
        return dataclasses.replace(self, peaks=tuple(peaks))


@dataclass(frozen=True)
class NoiseSpec:
    """Additive Gaussian noise on observable values or on spectrum samples."""

    mode: str = "none"
    sigma: float = 0.0
    seed: int | None = None

    MODES = ("none", "value_gaussian", "spectral_gaussian")

    def __post_init__(self):
        if self.mode not in self.MODES:
            raise ValueError(f"unknown noise mode {self.mode!r}; expected one of {self.MODES}")
        if not self.sigma >= 0:
            raise ValueError("noise sigma must be nonnegative")

    @property
    def active(self) -> bool:
        return self.mode != "none" and self.sigma > 0


def fid_signal(model: SpectrumModel, times: np.ndarray) -> np.ndarray:
    """Free induction decay s(t) = sum_i M0 K_i exp(i Omega_i t) exp(-t / T2)."""
    t = np.asarray(times, dtype=float)
    if np.any(t < 0):
        raise ValueError("FID sample times must be nonnegative")
    if t.size > 1 and np.any(np.diff(t) <= 0):
        raise ValueError("FID sample times must be strictly increasing")
    s = np.zeros(t.shape, dtype=complex)
    decay = np.exp(-t / model.t2)
    for p in model.peaks:
        s += model.m0 * p.amplitude * np.exp(1j * p.omega * t)
    return s * decay


def spectrum(model: SpectrumModel, omegas: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Absorption a(w) and dispersion b(w) of the Lorentzian peak sum.

    Note that the one-sided Fourier transform of :func:`fid_signal` is
    ``a(w) - 1j * b(w)`` with this sign convention for ``b``.
    """
    w = np.asarray(omegas, dtype=float)
    gamma = 1.0 / model.t2
    a = np.zeros(w.shape)
    b = np.zeros(w.shape)
    for p in model.peaks:
        dw = w - p.omega
        den = dw * dw + gamma * gamma
        a += model.m0 * p.amplitude * gamma / den
        b += model.m0 * p.amplitude * dw / den
    return a, b


def window_area_fraction(model: SpectrumModel) -> float:
    """Fraction of an isolated Lorentzian's area inside +/- delta_omega: (2/pi) atan(dw T2)."""
    return 2.0 / np.pi * np.arctan(model.delta_omega * model.t2)


def _window(model: SpectrumModel, center: float, resolution: float | None) -> np.ndarray:
    dw = model.delta_omega
    if resolution is None:
        resolution = 2 * dw / DEFAULT_POINTS_PER_WINDOW
    if not resolution > 0:
        raise ValueError("quadrature resolution must be positive")
    if resolution >= dw:
        raise ValueError(f"quadrature resolution {resolution} must be smaller than delta_omega {dw}")
    npts = int(np.ceil(2 * dw / resolution)) + 1
    return np.linspace(center - dw, center + dw, npts)


def integrate_peak(model: SpectrumModel, peak: PeakSpec, resolution: float | None = None) -> float:
    """Observable value from the absorption area around one peak.

    Integrates a(w) over ``[Omega - delta_omega, Omega + delta_omega]`` with the
    composite trapezoid rule and divides by ``p0``. Tails of neighbouring
    peaks that fall into the window are included.
    """
    grid = _window(model, peak.omega, resolution)
    a, _ = spectrum(model, grid)
    return float(np.trapezoid(a, grid) / model.p0)


# Conjugation R^dag P R for the readout rotations, expressed as signed Pauli labels.
_ROTATIONS = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[1, -1j], [-1j, 1]], dtype=complex) / np.sqrt(2),  # 90 deg about x
    "Y": np.array([[1, -1], [1, 1]], dtype=complex) / np.sqrt(2),  # 90 deg about y
}


@functools.lru_cache(maxsize=None)
def _rotated_label(rot: str, pauli: str) -> tuple[str, int]:
    r = _ROTATIONS[rot]
    m = r.conj().T @ PAULI_MATRICES[pauli] @ r
    for label, q in PAULI_MATRICES.items():
        for sign in (1, -1):
            if np.allclose(m, sign * q, atol=1e-12):
                return label, sign
    raise AssertionError("90-degree rotations map Paulis to signed Paulis")


@dataclass(frozen=True)
class ObservableGroup:
    """The d observables read out from one spectrum.

    ``observed_spin`` and ``rotations`` describe how the group was produced in
    the default scheme; custom groups leave them unset.
    """

    group_id: int
    observables: np.ndarray  # (d, d, d), observables[j] is O_j
    observed_spin: int | None = None
    rotations: str | None = None

    def __post_init__(self):
        obs = np.asarray(self.observables, dtype=complex)
        if obs.ndim != 3 or obs.shape[1] != obs.shape[2] or obs.shape[0] != obs.shape[1]:
            raise ValueError(f"a group holds d observables of shape (d, d); got {obs.shape}")
        for j, o in enumerate(obs):
            if not is_hermitian(o):
                raise ValueError(f"observable {j} of group {self.group_id} is not Hermitian")
        obs.setflags(write=False)
        object.__setattr__(self, "observables", obs)

    @property
    def d(self) -> int:
        return self.observables.shape[0]

    @property
    def provenance(self) -> str:
        if self.observed_spin is None:
            return "custom"
        return f"spin={self.observed_spin} rot={self.rotations}"


@dataclass(frozen=True)
class ReadoutScheme:
    n: int
    groups: tuple[ObservableGroup, ...]
    scheme_name: str = "single-quantum-default"
    seed: int | None = None

    def __post_init__(self):
        groups = tuple(self.groups)
        if not groups:
            raise ValueError("a readout scheme needs at least one group")
        d = 2**self.n
        for g in groups:
            if g.d != d:
                raise ValueError(f"group {g.group_id} has dimension {g.d}, expected {d}")
        object.__setattr__(self, "groups", groups)

    @property
    def d(self) -> int:
        return 2**self.n

    @property
    def v(self) -> int:
        return len(self.groups)

    @property
    def observables(self) -> np.ndarray:
        """All observables stacked as (v*d, d, d) in (group, index) order."""
        return np.concatenate([g.observables for g in self.groups])

    @functools.cached_property
    def complete(self) -> bool:
        return completeness_rank(self) == self.d**2


def _default_group(n: int, spin: int, rotations: str) -> tuple[np.ndarray, frozenset]:
    """Observables of one default group plus the Pauli strings spanning it."""
    d = 2**n
    rot = functools.reduce(np.kron, (_ROTATIONS[r] for r in rotations))
    proj = (np.diag([1.0, 0.0]).astype(complex), np.diag([0.0, 1.0]).astype(complex))
    obs = np.empty((d, d, d), dtype=complex)
    j = 0
    for a in ("X", "Y"):
        for z in itertools.product((0, 1), repeat=n - 1):
            zi = iter(z)
            factors = [PAULI_MATRICES[a] if q == spin else proj[next(zi)] for q in range(n)]
            o = functools.reduce(np.kron, factors)
            obs[j] = rot.conj().T @ o @ rot
            j += 1
    # span{R^dag sigma_a R} (x) span{I, R^dag Z R} on the other spins
    per_qubit = []
    for q in range(n):
        if q == spin:
            per_qubit.append({_rotated_label(rotations[q], a)[0] for a in "XY"})
        else:
            per_qubit.append({"I", _rotated_label(rotations[q], "Z")[0]})
    support = frozenset("".join(p) for p in itertools.product(*per_qubit))
    return obs, support


def build_scheme(
    n: int,
    scheme_name: str = "single-quantum-default",
    v: int | None = None,
    seed: int = 1,
    groups: Sequence[np.ndarray] | None = None,
) -> ReadoutScheme:
    """Construct a readout scheme of ``v`` observable groups.

    For the default scheme every (observed spin, rotation pattern) pair is a
    candidate group; groups are picked greedily by how many new Pauli
    directions they add, with ties broken by a seeded shuffle, until the
    scheme is tomographically complete. Remaining slots are filled with
    further distinct groups in shuffled order, so the scheme is over-complete
    exactly like an experimental one.

    ``scheme_name="custom"`` wraps explicitly supplied ``groups``, each an
    array of d observables.
    """
    if n < 1:
        raise ValueError("need at least one qubit")
    if scheme_name == "custom":
        if not groups:
            raise ValueError("custom schemes need explicit groups")
        built = tuple(ObservableGroup(k, np.asarray(g)) for k, g in enumerate(groups))
        return ReadoutScheme(n, built, "custom", seed)
    if scheme_name != "single-quantum-default":
        raise ValueError(f"unknown scheme {scheme_name!r}")
    if v is None:
        if n not in DEFAULT_GROUP_COUNTS:
            raise ValueError(f"no default group count for n={n}; pass v explicitly")
        v = DEFAULT_GROUP_COUNTS[n]
    if v < 1:
        raise ValueError("group count v must be positive")

    rng = np.random.default_rng(seed)
    candidates = [(s, "".join(r)) for s in range(n) for r in itertools.product("IXY", repeat=n)]
    candidates = [candidates[i] for i in rng.permutation(len(candidates))]
    built: dict[tuple[int, str], tuple[np.ndarray, frozenset]] = {}
    seen: set[bytes] = set()
    unique = []
    for cand in candidates:
        obs, support = _default_group(n, *cand)
        key = np.round(obs, 12).tobytes()
        if key in seen:
            continue
        seen.add(key)
        built[cand] = (obs, support)
        unique.append(cand)
    if v > len(unique):
        raise ValueError(f"v={v} exceeds the {len(unique)} distinct groups available for n={n}")

    covered = {"I" * n}
    chosen: list[tuple[int, str]] = []
    pool = list(unique)
    while len(chosen) < v:
        gains = [len(built[c][1] - covered) for c in pool]
        best = int(np.argmax(gains))
        if gains[best] == 0:
            break
        cand = pool.pop(best)
        chosen.append(cand)
        covered |= built[cand][1]
    chosen.extend(pool[: v - len(chosen)])

    out = tuple(
        ObservableGroup(k, built[c][0], observed_spin=c[0], rotations=c[1]) for k, c in enumerate(chosen)
    )
    return ReadoutScheme(n, out, scheme_name, seed)


def completeness_rank(scheme: ReadoutScheme) -> int:
    """Numerical rank of [vec(O_i)^T ...; vec(I)^T] with relative cutoff 1e-9."""
    d = scheme.d
    rows = scheme.observables.reshape(-1, d * d)
    rows = np.vstack([rows, vec(np.eye(d))[None, :]])
    s = np.linalg.svd(rows, compute_uv=False)
    return int(np.sum(s > 1e-9 * s[0]))


@dataclass
class Measurement:
    """Per-group observable values, shape (v, d), plus how they were obtained."""

    values: np.ndarray
    path: str = "ideal"
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    warnings: list[str] = field(default_factory=list)

    def __getitem__(self, k):
        return self.values[k]

    def __len__(self):
        return len(self.values)


def _ideal_values(rho: np.ndarray, scheme: ReadoutScheme) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (scheme.d, scheme.d):
        raise ValueError(f"state of shape {rho.shape} does not match {scheme.n}-qubit scheme")
    obs = scheme.observables
    # Tr(O rho) = sum_ij O_ij rho_ji
    vals = np.einsum("kij,ji->k", obs, rho)
    return vals.real.reshape(scheme.v, scheme.d)


def measure_groups(
    rho: np.ndarray,
    scheme: ReadoutScheme,
    path: str = "ideal",
    noise: NoiseSpec | None = None,
    spectral: SpectrumModel | None = None,
    resolution: float | None = None,
) -> Measurement:
    """Read out every group of ``scheme`` on state ``rho``.

    The ideal path evaluates Tr(O rho) directly. The spectral path encodes
    each group's ideal values as peak amplitudes of one simulated spectrum
    (peaks spaced ``spectral.min_separation`` apart, default ``8 * delta_omega``)
    and reads them back by integrating the absorption spectrum, so the result
    includes window truncation and neighbour contamination.
    """
    noise = noise or NoiseSpec()
    if path not in ("ideal", "spectral"):
        raise ValueError(f"unknown measurement path {path!r}")
    if noise.mode == "spectral_gaussian" and path != "spectral":
        raise ValueError("spectral_gaussian noise needs the spectral measurement path")
    ideal = _ideal_values(rho, scheme)
    rng = np.random.default_rng(noise.seed)
    notes: list[str] = []
    if path == "ideal":
        values = ideal.copy()
    else:
        values = _spectral_values(ideal, spectral or SpectrumModel(), noise, rng, resolution, notes)
    if noise.mode == "value_gaussian" and noise.sigma > 0:
        values = values + noise.sigma * rng.standard_normal(values.shape)
    return Measurement(values, path, noise, notes)


def _spectral_values(ideal, template, noise, rng, resolution, notes):
    d = ideal.shape[1]
    sep = template.min_separation if template.min_separation is not None else 8 * template.delta_omega
    omegas = (np.arange(d) - (d - 1) / 2) * sep
    scale = template.p0 / (2 * template.m0 * np.arctan(template.delta_omega * template.t2))
    model = dataclasses.replace(template, min_separation=sep)
    if not model.well_separated:
        msg = f"peaks {sep} apart are closer than 4*delta_omega={4 * model.delta_omega}; values degraded"
        notes.append(msg)
        warnings.warn(msg, stacklevel=3)
    grids = [_window(model, w, resolution) for w in omegas]
    out = np.empty_like(ideal)
    for k, row in enumerate(ideal):
        peaks = tuple(PeakSpec(w, scale * val, j) for j, (w, val) in enumerate(zip(omegas, row)))
        m = model.with_peaks(peaks)
        for j, grid in enumerate(grids):
            a, _ = spectrum(m, grid)
            if noise.mode == "spectral_gaussian" and noise.sigma > 0:
                a = a + noise.sigma * rng.standard_normal(a.shape)
            out[k, j] = np.trapezoid(a, grid) / m.p0
    return out

