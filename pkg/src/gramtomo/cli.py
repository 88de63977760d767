"""Config-driven command line front end.

Subcommands: gram-spectrum, reconstruct, sweep, stability, frames-check.
Every command is a pure function of (config, seed): reruns with identical
inputs write byte-identical files. Wall-clock timings go to stderr only,
never into output files.

Config precedence: flag > config file > built-in default. The default
output directory comes from --out, then the config, then the environment
variable GRAMTOMO_OUT, then ./gramtomo-out.

Exit codes: 0 success, 1 validation error, 2 numerical-consistency
failure, 3 IO error.
"""

from __future__ import annotations

import argparse
import copy
import json
import os
import sys
import time
import warnings
from pathlib import Path

import jsonschema
import numpy as np

from .errors import InvalidInputError, NumericalConsistencyError
from .fock import PhaseSpaceGrid, cat_state, coherent_state, fidelity, fock_state, wigner
from .frames import (dual_frame, hadamard_identity_check, linear_inversion,
                     modal_weighting, operator_frame, operator_frame_apply)
from .maxlik import Dataset, SolverConfig, maxlik_solve
from .povm import (HomodyneConfig, PovmSet, build_homodyne_povm, effective_rank,
                   gram_matrix_operator_space, gram_operator, gram_spectrum)
from .serialize import (decode_povm, encode_reconstruction, write_csv, write_json,
                        write_wigner_csv)
from .simulate import (NoiseModel, dimension_sweep, generate_counts, stability_study,
                       trial_generator)

ENV_OUTPUT_DIR = "GRAMTOMO_OUT"

_number = {"type": "number"}
_complex_or_real = {
    "oneOf": [
        {"type": "number"},
        {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
    ]
}

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "dim": {"type": "integer", "minimum": 1},
        "target": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "kind": {"enum": ["cat", "coherent", "fock"]},
                "alpha": _complex_or_real,
                "parity": {"enum": ["even", "odd"]},
                "n": {"type": "integer", "minimum": 0},
            },
        },
        "povm": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "kind": {"enum": ["homodyne", "projective"]},
                "phases": {"type": "array", "items": _number, "minItems": 1},
                "phase_count": {"type": "integer", "minimum": 1},
                "bins": {"type": "integer", "minimum": 1},
                "range": {"type": "array", "items": _number,
                          "minItems": 2, "maxItems": 2},
                "file": {"type": "string"},
            },
        },
        "noise": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "kind": {"enum": ["exact", "multinomial", "poisson"]},
                "exposure": {"type": "number", "exclusiveMinimum": 0},
                "seed": {"type": "integer"},
            },
        },
        "solver": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "dilution": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
                "dilution_floor": {"type": "number", "exclusiveMinimum": 0},
                "probability_floor": {"type": "number", "exclusiveMinimum": 0},
                "max_iterations": {"type": "integer", "minimum": 1},
                "tol_likelihood": {"type": "number", "minimum": 0},
                "tol_born": {"type": "number", "minimum": 0},
            },
        },
        "reconstruction": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "basis": {"enum": ["full", "gram", "fock"]},
                "dimension": {"type": ["integer", "null"], "minimum": 1},
            },
        },
        "sweep": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "dims": {"type": "array", "items": {"type": "integer", "minimum": 1},
                         "minItems": 1},
                "trials": {"type": "integer", "minimum": 1},
                "bases": {"type": "array", "items": {"enum": ["gram", "fock"]},
                          "minItems": 1},
            },
        },
        "stability": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "basis": {"enum": ["gram", "fock"]},
                "dimension": {"type": "integer", "minimum": 1},
                "trials": {"type": "integer", "minimum": 2},
            },
        },
        "wigner_grid": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "x_range": {"type": "array", "items": _number,
                            "minItems": 2, "maxItems": 2},
                "p_range": {"type": "array", "items": _number,
                            "minItems": 2, "maxItems": 2},
                "x_points": {"type": "integer", "minimum": 2},
                "p_points": {"type": "integer", "minimum": 2},
            },
        },
        "counts_file": {"type": "string"},
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "directory": {"type": ["string", "null"]},
                "format": {"enum": ["csv", "json"]},
            },
        },
    },
}

DEFAULTS = {
    "dim": 15,
    "target": {"kind": "cat", "alpha": 2.0, "parity": "even", "n": 0},
    "povm": {"kind": "homodyne", "phases": None, "phase_count": 6, "bins": 51,
             "range": [-5.0, 5.0], "file": None},
    "noise": {"kind": "poisson", "exposure": 100000.0, "seed": 0},
    "solver": {"dilution": 1.0, "dilution_floor": 1.0 / 64.0,
               "probability_floor": 1e-14, "max_iterations": 20000,
               "tol_likelihood": 1e-10, "tol_born": 1e-7},
    "reconstruction": {"basis": "full", "dimension": None},
    "sweep": {"dims": list(range(1, 13)), "trials": 8, "bases": ["gram", "fock"]},
    "stability": {"basis": "gram", "dimension": 3, "trials": 4},
    "wigner_grid": {"x_range": [-5.0, 5.0], "p_range": [-5.0, 5.0],
                    "x_points": 81, "p_points": 81},
    "counts_file": None,
    "output": {"directory": None, "format": "csv"},
}


def _merge(base: dict, override: dict) -> dict:
    out = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def load_config(path: str | None) -> dict:
    """Validate the config file against the schema and merge over defaults."""
    raw = {}
    if path is not None:
        try:
            raw = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise InvalidInputError(f"config file is not valid JSON: {exc}") from exc
    jsonschema.validate(raw, CONFIG_SCHEMA)
    return _merge(DEFAULTS, raw)


def apply_flags(config: dict, args: argparse.Namespace, command: str) -> dict:
    config = copy.deepcopy(config)
    if args.seed is not None:
        config["noise"]["seed"] = args.seed
    if args.out is not None:
        config["output"]["directory"] = args.out
    if args.format is not None:
        config["output"]["format"] = args.format
    if args.trials is not None:
        config["sweep"]["trials"] = args.trials
        config["stability"]["trials"] = args.trials
    if args.dims is not None:
        config["sweep"]["dims"] = [int(v) for v in args.dims.split(",") if v.strip()]
    if args.basis is not None:
        if command == "sweep":
            config["sweep"]["bases"] = [args.basis]
        elif command == "stability":
            config["stability"]["basis"] = args.basis
        else:
            config["reconstruction"]["basis"] = args.basis
    jsonschema.validate(_strip_nones(config), CONFIG_SCHEMA)
    return config


def _strip_nones(config: dict) -> dict:
    # None placeholders (unset optional fields) are not part of the schema
    out = {}
    for key, value in config.items():
        if value is None:
            continue
        out[key] = _strip_nones(value) if isinstance(value, dict) else value
    return out


def resolve_output_dir(config: dict) -> Path:
    directory = config["output"]["directory"]
    if directory is None:
        directory = os.environ.get(ENV_OUTPUT_DIR) or "gramtomo-out"
    path = Path(directory)
    path.mkdir(parents=True, exist_ok=True)
    return path


def build_povm_from_config(config: dict) -> PovmSet:
    pc = config["povm"]
    dim = config["dim"]
    if pc.get("file"):
        data = json.loads(Path(pc["file"]).read_text())
        return decode_povm(data)
    if pc["kind"] == "projective":
        return PovmSet.from_vectors(np.eye(dim, dtype=complex))
    if pc.get("phases") is not None:
        hconf = HomodyneConfig(phases=tuple(float(v) for v in pc["phases"]),
                               bins=pc["bins"], x_range=tuple(pc["range"]))
    else:
        hconf = HomodyneConfig.uniform(phase_count=pc["phase_count"], bins=pc["bins"],
                                       x_range=tuple(pc["range"]))
    return build_homodyne_povm(hconf, dim)


def build_target_from_config(config: dict) -> np.ndarray:
    tc = config["target"]
    dim = config["dim"]
    alpha = tc.get("alpha", 0.0)
    if isinstance(alpha, (list, tuple)):
        alpha = complex(alpha[0], alpha[1])
    if tc["kind"] == "cat":
        return cat_state(alpha, tc.get("parity", "even"), dim)
    if tc["kind"] == "coherent":
        return coherent_state(alpha, dim, normalized=True)
    return fock_state(tc.get("n", 0), dim)


def build_solver_config(config: dict, subspace: np.ndarray | None = None) -> SolverConfig:
    sc = config["solver"]
    return SolverConfig(dilution=sc["dilution"], dilution_floor=sc["dilution_floor"],
                        probability_floor=sc["probability_floor"],
                        max_iterations=sc["max_iterations"],
                        tol_likelihood=sc["tol_likelihood"], tol_born=sc["tol_born"],
                        subspace=subspace)


def build_noise_from_config(config: dict) -> NoiseModel:
    nc = config["noise"]
    return NoiseModel(kind=nc["kind"], exposure=nc["exposure"], seed=nc["seed"])


def build_grid_from_config(config: dict) -> PhaseSpaceGrid:
    gc = config["wigner_grid"]
    return PhaseSpaceGrid(x_range=tuple(gc["x_range"]), p_range=tuple(gc["p_range"]),
                          x_points=gc["x_points"], p_points=gc["p_points"])


def load_counts_file(path: str, povm: PovmSet, config: dict) -> Dataset:
    """CSV bridge to measured data: columns phase_index,bin_index,count."""
    if config["povm"]["kind"] != "homodyne" or config["povm"].get("file"):
        raise InvalidInputError("counts files require an inline homodyne POVM config")
    lines = [ln.strip() for ln in Path(path).read_text().splitlines()
             if ln.strip() and not ln.startswith("#")]
    if lines and lines[0].replace(" ", "") == "phase_index,bin_index,count":
        lines = lines[1:]
    bins = config["povm"]["bins"]
    counts = np.zeros(povm.n_outcomes)
    if len(lines) != povm.n_outcomes:
        raise InvalidInputError(
            f"count file has {len(lines)} rows but the POVM has "
            f"{povm.n_outcomes} outcomes")
    for ln in lines:
        parts = ln.split(",")
        if len(parts) != 3:
            raise InvalidInputError(f"count file row {ln!r} is not phase,bin,count")
        phase, b, count = int(parts[0]), int(parts[1]), float(parts[2])
        idx = phase * bins + b
        if not 0 <= idx < povm.n_outcomes:
            raise InvalidInputError(f"count file row {ln!r} addresses no POVM outcome")
        counts[idx] = count
    return Dataset(counts=counts)


def _subspace_basis(config: dict, povm: PovmSet) -> np.ndarray | None:
    rc = config["reconstruction"]
    if rc["basis"] == "full" or rc["dimension"] is None:
        return None
    d = rc["dimension"]
    if rc["basis"] == "fock":
        return np.eye(povm.dim, dtype=complex)[:, :d]
    analysis = gram_spectrum(gram_operator(povm))
    return analysis.eigenvectors[:, :d]


def _echo(config: dict) -> dict:
    return _strip_nones(config)


def cmd_gram_spectrum(config: dict, outdir: Path) -> list[Path]:
    povm = build_povm_from_config(config)
    analysis = gram_spectrum(gram_operator(povm))
    q_vals = np.linalg.eigvalsh(gram_matrix_operator_space(povm))[::-1]
    echo = _echo(config)
    fmt = config["output"]["format"]
    written = []
    for name, values in (("g_spectrum", analysis.eigenvalues), ("q_spectrum", q_vals)):
        if fmt == "csv":
            path = outdir / f"{name}.csv"
            write_csv(path, ["index", "value"],
                      [(k + 1, float(v)) for k, v in enumerate(values)], echo)
        else:
            path = outdir / f"{name}.json"
            write_json(path, {"values": [float(v) for v in values], "config": echo})
        written.append(path)
    report = {
        "support_rank": analysis.rank,
        "support_threshold": float(analysis.threshold),
        "effective_rank": effective_rank(analysis, 1e-3),
        "effective_rank_drop_ratio": 1e-3,
        "smallest_to_largest_ratio": float(analysis.eigenvalues[-1] / analysis.eigenvalues[0]),
        "config": echo,
    }
    path = outdir / "rank_report.json"
    write_json(path, report)
    written.append(path)
    return written


def cmd_reconstruct(config: dict, outdir: Path) -> list[Path]:
    povm = build_povm_from_config(config)
    target = build_target_from_config(config)
    rho_true = np.outer(target, target.conj())
    if config["counts_file"]:
        dataset = load_counts_file(config["counts_file"], povm, config)
    else:
        dataset = generate_counts(rho_true, povm, build_noise_from_config(config))
    basis = _subspace_basis(config, povm)
    solver = build_solver_config(config, subspace=basis)
    start = time.perf_counter()
    result = maxlik_solve(dataset, povm, solver)
    print(f"reconstruction wall time: {time.perf_counter() - start:.3f} s",
          file=sys.stderr)
    echo = _echo(config)
    payload = encode_reconstruction(result, echo)
    payload["fidelity_to_target"] = fidelity(target, result.rho)
    path_json = outdir / "reconstruction.json"
    write_json(path_json, payload)
    grid = build_grid_from_config(config)
    W = wigner(result.rho, grid)
    if config["output"]["format"] == "csv":
        path_w = outdir / "wigner.csv"
        write_wigner_csv(path_w, grid.xs, grid.ps, W, echo)
    else:
        path_w = outdir / "wigner.json"
        write_json(path_w, {"x": [float(v) for v in grid.xs],
                            "p": [float(v) for v in grid.ps],
                            "w": [[float(v) for v in row] for row in W],
                            "config": echo})
    return [path_json, path_w]


def cmd_sweep(config: dict, outdir: Path) -> list[Path]:
    povm = build_povm_from_config(config)
    target = build_target_from_config(config)
    noise = build_noise_from_config(config)
    solver = build_solver_config(config)
    echo = _echo(config)
    written = []
    summary = {}
    for basis in config["sweep"]["bases"]:
        result = dimension_sweep(target, povm, basis, config["sweep"]["dims"], noise,
                                 config["sweep"]["trials"], solver_config=solver)
        rows = [(d, t, float(result.fidelities[k, t]), bool(result.converged[k, t]))
                for k, d in enumerate(result.dims) for t in range(result.trials)]
        if config["output"]["format"] == "csv":
            path = outdir / f"sweep_{basis}.csv"
            write_csv(path, ["dimension", "trial", "fidelity", "converged"], rows, echo)
        else:
            path = outdir / f"sweep_{basis}.json"
            write_json(path, {"rows": [list(r) for r in rows], "config": echo})
        written.append(path)
        summary[basis] = {
            "dims": list(result.dims),
            "mean": [float(v) for v in result.mean],
            "min": [float(v) for v in result.minimum],
            "max": [float(v) for v in result.maximum],
            "std": [float(v) for v in result.std],
            "trial_seeds": [list(s) for s in result.trial_seeds],
        }
    path = outdir / "sweep_summary.json"
    write_json(path, {"bases": summary, "config": echo})
    written.append(path)
    return written


def cmd_stability(config: dict, outdir: Path) -> list[Path]:
    povm = build_povm_from_config(config)
    target = build_target_from_config(config)
    noise = build_noise_from_config(config)
    solver = build_solver_config(config)
    grid = build_grid_from_config(config)
    sc = config["stability"]
    result = stability_study(target, povm, sc["basis"], sc["dimension"], noise,
                             sc["trials"], grid=grid, solver_config=solver)
    echo = _echo(config)
    written = []
    rows = [(t, float(result.fidelities[t]), bool(result.converged[t]))
            for t in range(result.trials)]
    if config["output"]["format"] == "csv":
        path = outdir / "stability.csv"
        write_csv(path, ["trial", "fidelity", "converged"], rows, echo)
    else:
        path = outdir / "stability.json"
        write_json(path, {"rows": [list(r) for r in rows], "config": echo})
    written.append(path)
    summary = {
        "basis": result.basis,
        "dimension": result.dim,
        "trials": result.trials,
        "fidelity_spread": result.spread,
        "fidelities": [float(v) for v in result.fidelities],
        "trial_seeds": [list(s) for s in result.trial_seeds],
        "config": echo,
    }
    path = outdir / "stability_summary.json"
    write_json(path, summary)
    written.append(path)
    for t, W in enumerate(result.wigner_grids):
        path = outdir / f"wigner_trial_{t}.csv"
        write_wigner_csv(path, grid.xs, grid.ps, W, echo)
        written.append(path)
    return written


def cmd_frames_check(config: dict, outdir: Path) -> list[Path]:
    povm = build_povm_from_config(config)
    dim = povm.dim
    analysis = gram_spectrum(gram_operator(povm))
    rng = trial_generator(config["noise"]["seed"], 0)

    def random_hermitian() -> np.ndarray:
        M = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        return (M + M.conj().T) / 2.0

    checks = []

    dev = hadamard_identity_check(povm)
    checks.append(("hadamard_identity", dev, 1e-14))

    duals = dual_frame(povm, analysis)
    Us = analysis.support_vectors
    projector = Us @ Us.conj().T
    reassembled = povm.vectors.T @ duals.vectors.conj()
    checks.append(("dual_frame_projector", float(np.abs(reassembled - projector).max()),
                   1e-9))

    A, Bop = random_hermitian(), random_hermitian()
    lhs = np.trace(operator_frame_apply(A, povm).conj().T @ Bop)
    rhs = np.trace(A.conj().T @ operator_frame_apply(Bop, povm))
    checks.append(("s_self_adjoint", float(abs(lhs - rhs)), 1e-10))

    frame = operator_frame(povm)
    C = random_hermitian()
    coords = np.array([np.trace(b @ C).real for b in frame.basis])
    V = frame.eigenvectors[:, : frame.rank]
    proj_coords = V @ (V.T @ coords)
    C_proj = np.einsum("a,amn->mn", proj_coords, frame.basis)
    p = np.einsum("im,mn,in->i", povm.vectors.conj(), C_proj, povm.vectors).real
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        C_rec = linear_inversion(p, povm, frame)
    checks.append(("linear_inversion_round_trip", float(np.abs(C_rec - C_proj).max()),
                   1e-8))

    D = random_hermitian()
    _, weighted = modal_weighting(D, analysis)
    G = gram_operator(povm)
    U = analysis.eigenvectors
    dev = float(np.abs((U @ weighted @ U.conj().T) - G @ D @ G).max())
    checks.append(("modal_weighting_congruence", dev, 1e-9))

    report = {
        "checks": [
            {"name": name, "deviation": float(dev), "tolerance": tol,
             "pass": bool(dev < tol)}
            for name, dev, tol in checks
        ],
        "all_pass": bool(all(dev < tol for _, dev, tol in checks)),
        "config": _echo(config),
    }
    path = outdir / "frames_report.json"
    write_json(path, report)
    if not report["all_pass"]:
        failing = [c["name"] for c in report["checks"] if not c["pass"]]
        raise NumericalConsistencyError(f"frame identities beyond tolerance: {failing}")
    return [path]


COMMANDS = {
    "gram-spectrum": cmd_gram_spectrum,
    "reconstruct": cmd_reconstruct,
    "sweep": cmd_sweep,
    "stability": cmd_stability,
    "frames-check": cmd_frames_check,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gramtomo",
        description="Maximum-likelihood homodyne tomography with Gram-operator "
                    "bandwidth analysis. Quadrature convention: hbar = 1, "
                    "x = (a + a^dag)/sqrt(2).")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("gram-spectrum", "eigenvalue spectra of the Gram operator and the "
                          "operator-space Gram matrix"),
        ("reconstruct", "maximum-likelihood reconstruction with Wigner output"),
        ("sweep", "reconstruction fidelity versus subspace dimension"),
        ("stability", "repeated noisy reconstructions at fixed dimension"),
        ("frames-check", "frame-identity test suite (nonzero exit on failure)"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="JSON config file (see docs/config-schema.json)")
        p.add_argument("--seed", type=int, help="noise seed override")
        p.add_argument("--out", help=f"output directory (default ${ENV_OUTPUT_DIR} "
                                     "or ./gramtomo-out)")
        p.add_argument("--format", choices=["csv", "json"], help="tabular output format")
        p.add_argument("--trials", type=int, help="trial count override")
        p.add_argument("--dims", help="comma-separated sweep dimensions")
        p.add_argument("--basis", choices=["gram", "fock"], help="basis override")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = load_config(args.config)
        config = apply_flags(config, args, args.command)
        outdir = resolve_output_dir(config)
        written = COMMANDS[args.command](config, outdir)
    except jsonschema.ValidationError as exc:
        print(f"config validation error: {exc.message}", file=sys.stderr)
        return 1
    except InvalidInputError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return 1
    except NumericalConsistencyError as exc:
        print(f"numerical consistency failure: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 3
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
