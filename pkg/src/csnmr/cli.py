"""Command-line interface: ``csnmr <subcommand> [options]``.

Options may also come from a flat ``key=value`` file given with
``--config``; keys are option names with dashes or underscores, ``#`` starts
a comment, and command-line flags win over file values. The random seed
falls back to the ``CS_NMR_SEED`` environment variable, then to 0.

Exit status is 0 on success, 1 on runtime errors and 2 on usage errors.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__, fileio
from .harness import CASES, PAPER_RATES, SweepConfig, compare_methods, run_sweep, summarize
from .nmr import DEFAULT_GROUP_COUNTS, NoiseSpec, SpectrumModel, build_scheme, measure_groups
from .qcore import PRESETS, fidelity, num_qubits, outer_product, preset_state, random_pure_state
from .sensing import (
    assemble_from_groups,
    assemble_from_paulis,
    pauli_values_from_groups,
    sample_groups,
    sample_paulis,
)
from .solvers import POST_PROCESS, SolverConfig, fp_admm_solve, ls_solve, qst_invert

SUBCOMMANDS = ("state", "measure", "reconstruct", "sweep", "compare", "report")
SEED_ENV = "CS_NMR_SEED"


class UsageError(Exception):
    pass


@dataclass
class CommandSpec:
    subcommand: str
    options: dict = field(default_factory=dict)
    config_path: str | None = None


def _lam(text: str):
    return text if text == "inv_sqrt_d" else float(text)


def _rates(text: str) -> tuple[float, ...]:
    out = []
    for part in text.split(","):
        part = part.strip()
        if "/" in part:
            num, den = part.split("/")
            out.append(float(num) / float(den))
        elif part:
            out.append(float(part))
    return tuple(out)


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(p) for p in text.split(",") if p.strip())


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", metavar="FILE", help="key=value option file (flags override it)")
    p.add_argument("--seed", type=int, default=None, help=f"random seed (fallback: ${SEED_ENV}, then 0)")


def _add_noise(p: argparse.ArgumentParser) -> None:
    p.add_argument("--noise", choices=NoiseSpec.MODES, default="none")
    p.add_argument("--sigma", type=float, default=0.0, help="noise standard deviation")


def _add_spectral(p: argparse.ArgumentParser) -> None:
    p.add_argument("--path", choices=("ideal", "spectral"), default="ideal", help="measurement path")
    p.add_argument("--t2", type=float, default=1.0)
    p.add_argument("--delta-omega", type=float, default=64.0, help="integration half-window")
    p.add_argument("--separation", type=float, default=None, help="peak spacing (default 8*delta-omega)")


def _add_solver(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("FP-ADMM")
    g.add_argument("--delta", type=float, default=1.0)
    g.add_argument("--lam", type=_lam, default=1.0, help="sparse weight or 'inv_sqrt_d'")
    g.add_argument("--mu", type=float, default=None, help="penalty (default 0.5/||y||)")
    g.add_argument("--epsilon1", type=float, default=1e-7)
    g.add_argument("--k-max", type=int, default=30)
    g.add_argument("--post-process", choices=POST_PROCESS, default="trace_normalize")
    g.add_argument("--y-sign", type=int, choices=(1, -1), default=1)
    g.add_argument("--rho1-source", choices=("rho1", "rho"), default="rho1")
    g.add_argument("--extract", choices=("rho", "rho_plus_s"), default="rho")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="csnmr", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="subcommand", metavar="SUBCOMMAND")
    sub.required = True

    p = sub.add_parser("state", help="write a preset or random state")
    _add_common(p)
    src = p.add_mutually_exclusive_group()
    src.add_argument("--preset", choices=sorted(PRESETS))
    src.add_argument("--random", type=int, metavar="N", help="Haar-random pure state on N qubits")
    p.add_argument("--density", action="store_true", help="write the density matrix instead of the vector")
    p.add_argument("--out", required=True)

    p = sub.add_parser("measure", help="simulate group readout of a state")
    _add_common(p)
    p.add_argument("--state", required=True, help="state or density file")
    p.add_argument("--scheme", help="scheme file (default: built-in scheme for the state's size)")
    p.add_argument("--v", type=int, default=None, help="group count of the built-in scheme")
    p.add_argument("--scheme-seed", type=int, default=1)
    p.add_argument("--scheme-out", help="also write the scheme used")
    _add_noise(p)
    _add_spectral(p)
    p.add_argument("--out", required=True)

    p = sub.add_parser("reconstruct", help="estimate a density matrix")
    _add_common(p)
    p.add_argument("--problem", help="problem dump to solve directly")
    p.add_argument("--measurement", help="measurement dump (needs a scheme)")
    p.add_argument("--state", help="state file: simulate ideal data and report fidelity")
    p.add_argument("--truth", help="state file used only to report fidelity")
    p.add_argument("--scheme", help="scheme file")
    p.add_argument("--v", type=int, default=None)
    p.add_argument("--scheme-seed", type=int, default=1)
    p.add_argument("--mode", choices=("groups", "pauli"), default="groups")
    p.add_argument("--eta", type=float, default=1.0, help="sampling rate")
    p.add_argument("--solver", choices=("fpadmm", "ls", "qst"), default="fpadmm")
    p.add_argument("--no-trace-row", action="store_true")
    p.add_argument("--problem-out", help="also write the assembled problem")
    p.add_argument("--timing", action="store_true", help="record wall time (output no longer byte-reproducible)")
    _add_noise(p)
    _add_solver(p)
    p.add_argument("--out", required=True)

    p = sub.add_parser("sweep", help="Monte Carlo fidelity against sampling rate")
    _add_common(p)
    p.add_argument("--case", choices=sorted(CASES), default="A")
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--state", default=None, help="preset name or 'random' (default psi<n>)")
    p.add_argument("--eta", type=_rates, default=None, help="comma list of rates, fractions allowed")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--threshold", type=float, default=0.95)
    p.add_argument("--v", type=int, default=None)
    p.add_argument("--scheme-seed", type=int, default=1)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out-dir", default=".")
    p.add_argument("--prefix", default="", help="prefix of the output file names")
    _add_noise(p)
    _add_spectral(p)
    _add_solver(p)

    p = sub.add_parser("compare", help="full-data tomography against compressive reconstruction")
    _add_common(p)
    p.add_argument("--n", type=_ints, default=(2, 3, 4), help="comma list of qubit counts")
    p.add_argument("--state", default=None)
    p.add_argument("--eta", type=float, default=None, help="group rate (default: least reliable rate per n)")
    p.add_argument("--scheme-seed", type=int, default=1)
    _add_noise(p)
    _add_spectral(p)
    _add_solver(p)
    p.add_argument("--out", required=True)

    p = sub.add_parser("report", help="re-aggregate a records CSV")
    _add_common(p)
    p.add_argument("--records", required=True)
    p.add_argument("--threshold", type=float, default=None, help="default: the threshold in the records header")
    p.add_argument("--out", required=True)
    return parser


def _read_config(path: str) -> dict[str, str]:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, val = line.partition("=")
            if not sep:
                raise UsageError(f"{path}:{lineno}: expected key=value")
            out[key.strip().replace("-", "_")] = val.strip()
    return out


def _subparser(parser: argparse.ArgumentParser, name: str) -> argparse.ArgumentParser:
    for act in parser._actions:
        if isinstance(act, argparse._SubParsersAction):
            return act.choices[name]
    raise KeyError(name)


def _apply_config(sub: argparse.ArgumentParser, values: dict[str, str]) -> None:
    actions = {a.dest: a for a in sub._actions if a.dest not in ("help", "config")}
    defaults = {}
    for key, text in values.items():
        act = actions.get(key)
        if act is None:
            sub.error(f"unknown config key {key!r}")
        if isinstance(act, argparse._StoreTrueAction):
            val = text.lower() in ("1", "true", "yes", "on")
        else:
            try:
                val = act.type(text) if act.type else text
            except (TypeError, ValueError):
                sub.error(f"bad value for config key {key!r}: {text!r}")
            if act.choices is not None and val not in act.choices:
                sub.error(f"config key {key!r} must be one of {list(act.choices)}")
        defaults[key] = val
    sub.set_defaults(**defaults)
    for act in sub._actions:
        if act.dest in defaults:
            act.required = False


def parse_args(argv: Sequence[str]) -> CommandSpec:
    """Parse argv into a :class:`CommandSpec`; usage errors raise SystemExit(2)."""
    argv = list(argv)
    parser = build_parser()
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv[1:] if argv else [])
    if known.config and argv and argv[0] in SUBCOMMANDS:
        try:
            values = _read_config(known.config)
        except OSError as exc:
            raise FileNotFoundError(f"cannot read config file {known.config}: {exc.strerror}") from exc
        except UsageError as exc:
            parser.error(str(exc))
        _apply_config(_subparser(parser, argv[0]), values)
    ns = parser.parse_args(argv)
    opts = vars(ns)
    sub = opts.pop("subcommand")
    cfg = opts.pop("config", None)
    return CommandSpec(sub, opts, cfg)


def _seed(opts: dict) -> int:
    if opts.get("seed") is not None:
        return int(opts["seed"])
    env = os.environ.get(SEED_ENV)
    if env:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"{SEED_ENV}={env!r} is not an integer") from None
    return 0


def _echo(spec: CommandSpec, seed: int) -> dict:
    meta = {"tool": f"csnmr {__version__}", "command": spec.subcommand, "seed": seed}
    if spec.config_path:
        meta["config_file"] = spec.config_path
    for k, v in sorted(spec.options.items()):
        if k != "seed":
            meta[k] = ",".join(map(str, v)) if isinstance(v, tuple) else v
    return meta


def _solver_config(o: dict) -> SolverConfig:
    return SolverConfig(
        delta=o["delta"],
        lam=o["lam"],
        mu=o["mu"],
        epsilon1=o["epsilon1"],
        k_max=o["k_max"],
        post_process=o["post_process"],
        y_sign=o["y_sign"],
        rho1_source=o["rho1_source"],
        extract=o["extract"],
    )


def _spectral(o: dict) -> SpectrumModel:
    return SpectrumModel(t2=o["t2"], delta_omega=o["delta_omega"], min_separation=o["separation"])


def _density(path: str) -> np.ndarray:
    x = fileio.read_state(path)
    return outer_product(x) if x.ndim == 1 else x


def _out(path: str) -> str:
    fileio.ensure_parent(path)
    return path


def _cmd_state(spec: CommandSpec, seed: int) -> None:
    o = spec.options
    if o["random"] is not None:
        psi = random_pure_state(o["random"], seed)
    else:
        psi = preset_state(o["preset"] or "psi2")
    x = outer_product(psi) if o["density"] else psi
    fileio.write_state(_out(o["out"]), x, _echo(spec, seed))


def _scheme_for(o: dict, n: int):
    if o.get("scheme"):
        scheme = fileio.read_scheme(o["scheme"])
        if scheme.n != n:
            raise ValueError(f"scheme {o['scheme']} is for n={scheme.n}, data have n={n}")
        return scheme
    return build_scheme(n, v=o.get("v"), seed=o["scheme_seed"])


def _cmd_measure(spec: CommandSpec, seed: int) -> None:
    o = spec.options
    rho = _density(o["state"])
    scheme = _scheme_for(o, num_qubits(rho.shape[0]))
    noise = NoiseSpec(o["noise"], o["sigma"], seed)
    meas = measure_groups(rho, scheme, o["path"], noise, _spectral(o))
    meta = _echo(spec, seed)
    if o["scheme_out"]:
        fileio.write_scheme(_out(o["scheme_out"]), scheme, meta)
    fileio.write_measurement(_out(o["out"]), meas, meta)
    for w in meas.warnings:
        print(f"warning: {w}", file=sys.stderr)


def _qst_from_problem(problem) -> np.ndarray:
    d = problem.d
    if problem.mode == "pauli":
        vals = {tag: float(y) * np.sqrt(d) for tag, y in zip(problem.row_meta, problem.y_vector) if tag != "trace"}
        vals.setdefault("I" * problem.n, 1.0)
        return qst_invert(vals)
    raise ValueError("qst needs complete Pauli data or a complete measurement with its scheme")


def _cmd_reconstruct(spec: CommandSpec, seed: int) -> None:
    o = spec.options
    sources = [k for k in ("problem", "measurement", "state") if o[k]]
    if len(sources) != 1:
        raise UsageError("give exactly one of --problem, --measurement, --state")
    truth = _density(o["truth"]) if o["truth"] else None
    trace_row = not o["no_trace_row"]
    meas = scheme = None
    if o["problem"]:
        problem = fileio.read_problem(o["problem"])
    else:
        if o["state"]:
            rho = _density(o["state"])
            truth = rho if truth is None else truth
            n = num_qubits(rho.shape[0])
        else:
            meas = fileio.read_measurement(o["measurement"])
            n = num_qubits(meas.values.shape[1])
            rho = None
        if o["mode"] == "pauli":
            if rho is None:
                raise UsageError("Pauli sampling needs --state")
            m = max(1, int(round(o["eta"] * 4**n)))
            paulis = sample_paulis(n, m, seed)
            problem = assemble_from_paulis(paulis, rho, NoiseSpec(o["noise"], o["sigma"], seed), trace_row, seed)
        else:
            scheme = _scheme_for(o, n)
            if meas is None:
                meas = measure_groups(rho, scheme, "ideal", NoiseSpec(o["noise"], o["sigma"], seed))
            if meas.values.shape[0] != scheme.v:
                raise ValueError(f"measurement holds {meas.values.shape[0]} groups, scheme has {scheme.v}")
            g = max(1, int(round(o["eta"] * scheme.v)))
            idx = sample_groups(scheme.v, g, seed) if g < scheme.v else np.arange(scheme.v)
            problem = assemble_from_groups(scheme, meas, idx, trace_row, seed)

    meta = _echo(spec, seed)
    if o["problem_out"]:
        fileio.write_problem(_out(o["problem_out"]), problem, meta)

    if o["solver"] == "fpadmm":
        result = fp_admm_solve(problem, _solver_config(o))
    elif o["solver"] == "ls":
        result = ls_solve(problem)
    else:
        if meas is not None and scheme is not None:
            if problem.eta < 1:
                raise ValueError("qst needs all groups; use --eta 1")
            vals, _ = pauli_values_from_groups(scheme, meas)
            rho_hat = qst_invert(vals)
        else:
            rho_hat = _qst_from_problem(problem)
        result = ls_solve(problem)
        result.rho_hat, result.method = rho_hat, "qst"
        result.final_residual = problem.residual(rho_hat)
    if truth is not None:
        f = fidelity(result.rho_hat, truth)
        meta["fidelity"] = format(f, ".17g")
        print(f"fidelity {f:.6f}")
    fileio.write_result(_out(o["out"]), result, meta, timing=o["timing"])
    print(f"{result.method}: iterations={result.iterations} converged={result.converged} "
          f"residual={result.final_residual:.3e}")


def _cmd_sweep(spec: CommandSpec, seed: int) -> None:
    o = spec.options
    cfg = SweepConfig(
        case=o["case"],
        n=o["n"],
        state=o["state"],
        eta_values=o["eta"],
        trials=o["trials"],
        noise=NoiseSpec(o["noise"], o["sigma"]),
        measurement_path=o["path"],
        base_seed=seed,
        threshold=o["threshold"],
        scheme_seed=o["scheme_seed"],
        v=o["v"],
        solver=_solver_config(o),
        spectral=_spectral(o) if o["path"] == "spectral" else None,
    )
    if o["jobs"] < 1:
        raise UsageError("--jobs must be at least 1")
    records, summary = run_sweep(cfg, jobs=o["jobs"])
    meta = {**_echo(spec, seed), **{f"sweep_{k}": v for k, v in cfg.echo().items()}}
    meta.pop("jobs", None)
    out = Path(o["out_dir"])
    out.mkdir(parents=True, exist_ok=True)
    pre = o["prefix"]
    fileio.write_records_csv(out / f"{pre}records.csv", records, meta)
    fileio.write_summary_csv(out / f"{pre}summary.csv", summary, meta)
    fileio.write_json(out / f"{pre}sweep.json", fileio.sweep_document(meta, records, summary))
    for row in summary:
        print(f"eta={row.eta:.4f} f_avg={row.f_avg:.4f} zeta={row.zeta:.4f} success={row.success_prob:.2f}")


def _cmd_compare(spec: CommandSpec, seed: int) -> None:
    o = spec.options
    lines = ["n,state,eta_g,groups,qst_fidelity,cs_fidelity,cs_iterations,cs_converged"]
    for n in o["n"]:
        if n not in DEFAULT_GROUP_COUNTS:
            raise ValueError(f"no built-in scheme for n={n}")
        eta = o["eta"] if o["eta"] is not None else PAPER_RATES[n]
        c = compare_methods(
            n, o["state"], eta, NoiseSpec(o["noise"], o["sigma"]), seed, o["scheme_seed"],
            o["path"], _solver_config(o), _spectral(o),
        )
        lines.append(
            f"{n},{c.state},{c.eta_g:.6g},{c.g},{c.qst_fidelity:.6g},{c.cs_fidelity:.6g},"
            f"{c.iterations},{int(c.converged)}"
        )
        print(f"n={n} eta_g={c.eta_g:.3f} QST f={c.qst_fidelity:.4f}  CS f={c.cs_fidelity:.4f}")
    text = fileio._header(_echo(spec, seed)) + "\n".join(lines) + "\n"
    fileio._write(_out(o["out"]), text)


def _cmd_report(spec: CommandSpec, seed: int) -> None:
    o = spec.options
    meta, records = fileio.read_records_csv(o["records"])
    if not records:
        raise ValueError(f"{o['records']} holds no records")
    thr = o["threshold"]
    if thr is None:
        thr = float(meta.get("sweep_threshold", meta.get("threshold", 0.95)))
    rows = summarize(records, thr)
    echo = {**meta, "report_source": o["records"], "report_threshold": thr}
    fileio.write_summary_csv(_out(o["out"]), rows, echo)


_COMMANDS = {
    "state": _cmd_state,
    "measure": _cmd_measure,
    "reconstruct": _cmd_reconstruct,
    "sweep": _cmd_sweep,
    "compare": _cmd_compare,
    "report": _cmd_report,
}


def execute(spec: CommandSpec) -> int:
    """Run a parsed command and return its exit status."""
    try:
        _COMMANDS[spec.subcommand](spec, _seed(spec.options))
    except UsageError as exc:
        print(f"csnmr {spec.subcommand}: usage error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        name = exc.filename if exc.filename else ""
        msg = f"no such file: {name}" if name else str(exc)
        print(f"csnmr {spec.subcommand}: error: {msg}", file=sys.stderr)
        return 1
    except (OSError, ValueError, KeyError) as exc:
        print(f"csnmr {spec.subcommand}: error: {exc}", file=sys.stderr)
        return 1
    return 0


def main(argv: Sequence[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        spec = parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    except FileNotFoundError as exc:
        print(f"csnmr: error: {exc}", file=sys.stderr)
        return 1
    return execute(spec)


if __name__ == "__main__":
    sys.exit(main())
