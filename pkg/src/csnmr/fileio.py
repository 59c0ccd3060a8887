"""Plain-text file formats.

Every file starts with ``# key=value`` header lines echoing how it was made.
Numbers use '.' as decimal separator regardless of locale; matrices and
state amplitudes are written with 17 significant digits so they round-trip
exactly.

State file
    ``n`` on the first data line, then d lines ``re im`` (state vector) or d
    lines of d ``re im`` pairs (density matrix).
Scheme file
    ``n v scheme_name seed`` then one ``group <k> <provenance>`` line per
    group; custom groups are followed by their d observables as matrices.
Measurement dump
    ``group <k>`` followed by d lines ``<j> <value>``.
Problem dump
    one line per row: ``row_meta | re im re im ... | y``.
Result dump
    solver metadata in the header, then the estimate in state-file format.
"""

from __future__ import annotations

import csv
import io
import json
import os
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .harness import SummaryRow, TrialRecord
from .nmr import Measurement, NoiseSpec, ObservableGroup, ReadoutScheme, _default_group
from .qcore import num_qubits
from .sensing import SamplingProblem
from .solvers import ReconstructionResult

__all__ = [
    "FormatError",
    "write_state",
    "read_state",
    "read_header",
    "write_scheme",
    "read_scheme",
    "write_measurement",
    "read_measurement",
    "write_problem",
    "read_problem",
    "write_result",
    "read_result",
    "write_records_csv",
    "read_records_csv",
    "write_summary_csv",
    "read_summary_csv",
    "sweep_document",
    "write_json",
    "RECORD_COLUMNS",
    "SUMMARY_COLUMNS",
    "SCHEMA_VERSION",
    "ensure_parent",
]

RECORD_COLUMNS = ("case", "n", "eta", "trial", "seed", "fidelity", "iterations", "residual", "converged")
SUMMARY_COLUMNS = ("case", "n", "eta", "f_avg", "zeta", "success_prob", "threshold")
SCHEMA_VERSION = "1"


class FormatError(ValueError):
    pass


def _g17(x: float) -> str:
    return format(float(x), ".17g")


def _g6(x: float) -> str:
    return format(float(x), ".6g")


def _header(meta: Mapping | None) -> str:
    if not meta:
        return ""
    lines = []
    for k, v in meta.items():
        text = str(v)
        if "\n" in text:
            raise ValueError(f"header value for {k!r} spans lines")
        lines.append(f"# {k}={text}\n")
    return "".join(lines)


def _write(path, text: str) -> None:
    Path(path).write_text(text, encoding="utf-8", newline="\n")


def _lines(path) -> tuple[dict, list[str]]:
    meta, body = {}, []
    with open(path, encoding="utf-8") as fh:
        for raw in fh:
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, sep, val = line[1:].strip().partition("=")
                if sep:
                    meta[key.strip()] = val.strip()
                continue
            body.append(line)
    return meta, body


def read_header(path) -> dict:
    return _lines(path)[0]


def _matrix_lines(m: np.ndarray) -> list[str]:
    m = np.asarray(m, dtype=complex)
    return [" ".join(f"{_g17(z.real)} {_g17(z.imag)}" for z in row) for row in m]


def _parse_row(line: str) -> np.ndarray:
    parts = line.split()
    if len(parts) % 2:
        raise FormatError(f"odd number of fields in complex row: {line[:60]!r}")
    vals = np.array([float(p) for p in parts])
    return vals[0::2] + 1j * vals[1::2]


def format_state(x: np.ndarray) -> str:
    x = np.asarray(x, dtype=complex)
    n = num_qubits(x.shape[0])
    if x.ndim == 1:
        body = [f"{_g17(z.real)} {_g17(z.imag)}" for z in x]
    elif x.ndim == 2 and x.shape[0] == x.shape[1]:
        body = _matrix_lines(x)
    else:
        raise ValueError(f"cannot write array of shape {x.shape} as a state")
    return "\n".join([str(n), *body]) + "\n"


def write_state(path, x: np.ndarray, meta: Mapping | None = None) -> None:
    """Write a state vector or a density matrix."""
    _write(path, _header(meta) + format_state(x))


def _parse_state(body: Sequence[str]) -> np.ndarray:
    if not body:
        raise FormatError("empty state file")
    try:
        n = int(body[0])
    except ValueError:
        raise FormatError(f"first data line must be the qubit count, got {body[0]!r}") from None
    d = 2**n
    rows = [_parse_row(line) for line in body[1:]]
    if len(rows) != d:
        raise FormatError(f"expected {d} data lines for n={n}, found {len(rows)}")
    widths = {r.size for r in rows}
    if widths == {1}:
        return np.array([r[0] for r in rows])
    if widths == {d}:
        return np.array(rows)
    raise FormatError(f"rows must hold 1 or {d} complex entries")


def read_state(path) -> np.ndarray:
    """Read a state vector (1-D) or density matrix (2-D)."""
    return _parse_state(_lines(path)[1])


def write_scheme(path, scheme: ReadoutScheme, meta: Mapping | None = None) -> None:
    out = [f"{scheme.n} {scheme.v} {scheme.scheme_name} {scheme.seed}"]
    for g in scheme.groups:
        if g.observed_spin is None:
            out.append(f"group {g.group_id} custom")
            for o in g.observables:
                out.extend(_matrix_lines(o))
        else:
            out.append(f"group {g.group_id} spin={g.observed_spin} rot={g.rotations}")
    _write(path, _header(meta) + "\n".join(out) + "\n")


def read_scheme(path) -> ReadoutScheme:
    _, body = _lines(path)
    if not body:
        raise FormatError("empty scheme file")
    head = body[0].split()
    if len(head) != 4:
        raise FormatError("scheme header must be 'n v scheme_name seed'")
    n, v, name = int(head[0]), int(head[1]), head[2]
    seed = None if head[3] == "None" else int(head[3])
    d = 2**n
    groups = []
    i = 1
    while i < len(body):
        parts = body[i].split()
        if parts[0] != "group":
            raise FormatError(f"expected a group line, got {body[i][:60]!r}")
        k = int(parts[1])
        if parts[2] == "custom":
            rows = [_parse_row(line) for line in body[i + 1 : i + 1 + d * d]]
            if len(rows) != d * d:
                raise FormatError(f"group {k}: truncated observable matrices")
            groups.append(ObservableGroup(k, np.array(rows).reshape(d, d, d)))
            i += 1 + d * d
        else:
            fields = dict(p.split("=", 1) for p in parts[2:])
            spin, rot = int(fields["spin"]), fields["rot"]
            obs, _ = _default_group(n, spin, rot)
            groups.append(ObservableGroup(k, obs, observed_spin=spin, rotations=rot))
            i += 1
    if len(groups) != v:
        raise FormatError(f"header announces {v} groups, file holds {len(groups)}")
    return ReadoutScheme(n, tuple(groups), name, seed)


def write_measurement(path, meas: Measurement, meta: Mapping | None = None) -> None:
    info = {"path": meas.path, "noise_mode": meas.noise.mode, "noise_sigma": meas.noise.sigma}
    info["noise_seed"] = meas.noise.seed
    for i, w in enumerate(meas.warnings):
        info[f"warning{i}"] = w
    out = []
    for k, row in enumerate(meas.values):
        out.append(f"group {k}")
        out.extend(f"{j} {_g17(val)}" for j, val in enumerate(row))
    _write(path, _header({**(meta or {}), **info}) + "\n".join(out) + "\n")


def read_measurement(path) -> Measurement:
    meta, body = _lines(path)
    groups: list[list[float]] = []
    for line in body:
        parts = line.split()
        if parts[0] == "group":
            if int(parts[1]) != len(groups):
                raise FormatError("group records must be in order")
            groups.append([])
        else:
            if not groups or int(parts[0]) != len(groups[-1]):
                raise FormatError(f"unexpected value line {line!r}")
            groups[-1].append(float(parts[1]))
    if not groups or len({len(g) for g in groups}) != 1:
        raise FormatError("every group must hold the same number of values")
    seed = meta.get("noise_seed", "None")
    noise = NoiseSpec(
        meta.get("noise_mode", "none"),
        float(meta.get("noise_sigma", 0.0)),
        None if seed == "None" else int(seed),
    )
    warns = [v for k, v in sorted(meta.items()) if k.startswith("warning")]
    return Measurement(np.array(groups), meta.get("path", "ideal"), noise, warns)


def write_problem(path, problem: SamplingProblem, meta: Mapping | None = None) -> None:
    info = {
        "mode": problem.mode,
        "n": problem.n,
        "d": problem.d,
        "M": problem.rows,
        "eta": _g17(problem.eta),
        "seed": problem.seed,
        "include_trace_row": problem.include_trace_row,
    }
    out = []
    for tag, row, y in zip(problem.row_meta, problem.a_matrix, problem.y_vector):
        entries = " ".join(f"{_g17(z.real)} {_g17(z.imag)}" for z in row)
        out.append(f"{tag} | {entries} | {_g17(y)}")
    _write(path, _header({**(meta or {}), **info}) + "\n".join(out) + "\n")


def read_problem(path) -> SamplingProblem:
    meta, body = _lines(path)
    try:
        d = int(meta["d"])
        mode = meta["mode"]
    except KeyError as exc:
        raise FormatError(f"problem header lacks {exc}") from None
    tags, rows, ys = [], [], []
    for line in body:
        parts = [p.strip() for p in line.split("|")]
        if len(parts) != 3:
            raise FormatError(f"problem rows need 3 '|'-separated fields: {line[:60]!r}")
        tags.append(parts[0])
        rows.append(_parse_row(parts[1]))
        ys.append(float(parts[2]))
    if "M" in meta and int(meta["M"]) != len(rows):
        raise FormatError(f"header announces {meta['M']} rows, file holds {len(rows)}")
    seed = meta.get("seed", "None")
    return SamplingProblem(
        np.array(rows),
        np.array(ys),
        tuple(tags),
        d,
        mode=mode,
        eta=float(meta.get("eta", 1.0)),
        seed=None if seed == "None" else int(seed),
        include_trace_row=meta.get("include_trace_row", "True") == "True",
    )


def write_result(path, result: ReconstructionResult, meta: Mapping | None = None, timing: bool = True) -> None:
    info = {"method": result.method}
    info.update({f"solver_{k}": v for k, v in result.config.items()})
    info.update(
        iterations=result.iterations,
        converged=result.converged,
        final_residual=_g17(result.final_residual),
        degenerate=result.degenerate,
    )
    if timing:
        info["wall_time"] = _g6(result.wall_time)
    _write(path, _header({**(meta or {}), **info}) + format_state(result.rho_hat))


def read_result(path) -> tuple[dict, np.ndarray]:
    meta, body = _lines(path)
    return meta, _parse_state(body)


def write_records_csv(path, records: Iterable[TrialRecord], meta: Mapping | None = None) -> None:
    buf = io.StringIO()
    buf.write(_header(meta))
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RECORD_COLUMNS)
    for r in records:
        w.writerow(
            [r.case, r.n, _g17(r.eta), r.trial_index, r.seed, _g17(r.fidelity), r.iterations,
             _g17(r.final_residual), int(r.converged)]
        )
    _write(path, buf.getvalue())


def _csv_rows(path) -> tuple[dict, list[dict]]:
    meta = {}
    with open(path, encoding="utf-8", newline="") as fh:
        data = []
        for line in fh:
            if line.startswith("#"):
                key, sep, val = line[1:].strip().partition("=")
                if sep:
                    meta[key.strip()] = val.strip()
            else:
                data.append(line)
    return meta, list(csv.DictReader(data))


def read_records_csv(path) -> tuple[dict, list[TrialRecord]]:
    meta, rows = _csv_rows(path)
    if rows and set(RECORD_COLUMNS) - set(rows[0]):
        raise FormatError(f"records file lacks columns {sorted(set(RECORD_COLUMNS) - set(rows[0]))}")
    recs = [
        TrialRecord(
            r["case"], int(r["n"]), float(r["eta"]), int(r["trial"]), int(r["seed"]), float(r["fidelity"]),
            int(r["iterations"]), float(r["residual"]), r["converged"] in ("1", "True", "true"),
        )
        for r in rows
    ]
    return meta, recs


def write_summary_csv(path, rows: Iterable[SummaryRow], meta: Mapping | None = None) -> None:
    buf = io.StringIO()
    buf.write(_header(meta))
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SUMMARY_COLUMNS)
    for r in rows:
        w.writerow([r.case, r.n, _g6(r.eta), _g6(r.f_avg), _g6(r.zeta), _g6(r.success_prob), _g6(r.threshold)])
    _write(path, buf.getvalue())


def read_summary_csv(path) -> tuple[dict, list[dict]]:
    return _csv_rows(path)


def sweep_document(config_echo: Mapping, records: Sequence[TrialRecord], summary: Sequence[SummaryRow]) -> dict:
    """JSON-ready mirror of both tables; summary rows carry the +/- zeta plot band."""
    return {
        "schema_version": SCHEMA_VERSION,
        "config": dict(config_echo),
        "records": [
            {
                "case": r.case, "n": r.n, "eta": r.eta, "trial": r.trial_index, "seed": r.seed,
                "fidelity": r.fidelity, "iterations": r.iterations, "residual": r.final_residual,
                "converged": r.converged, "degenerate": r.degenerate, "random_state": r.random_state,
            }
            for r in records
        ],
        "summary": [
            {
                "case": s.case, "n": s.n, "eta": s.eta, "f_avg": s.f_avg, "zeta": s.zeta,
                "success_prob": s.success_prob, "threshold": s.threshold, "trials": s.trials,
                "f_low": s.error_bar[0], "f_high": s.error_bar[1],
            }
            for s in summary
        ],
    }


def write_json(path, doc: Mapping) -> None:
    _write(path, json.dumps(doc, indent=2, sort_keys=False) + "\n")


def ensure_parent(path) -> None:
    parent = os.path.dirname(os.fspath(path))
    if parent:
        os.makedirs(parent, exist_ok=True)

