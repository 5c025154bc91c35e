"""Command-line frontend: experiments, one-off solves, QUBO export/decode.

Configuration is a single versioned JSON document; validation is strict
(unknown keys are rejected, messages carry the JSON path of the offending
field) and every command is deterministic given config + seed.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys

import numpy as np

from .baselines import BaselineConfig
from .core import Quantizer, SparseInstance, realify_for_complex_signal, realify_for_real_signal, lift_complex_columns
from .harness import (
    ExperimentConfig,
    run_experiment,
    write_curve_csv,
    write_records_jsonl,
)
from .qubo import (
    BuildParams,
    VariableRegistry,
    build_group_l0_qubo,
    build_l0_qubo,
    constraint_violations,
    decode_solution,
    evaluate_l0_objective,
    export_qubo_file,
)
from .scenarios import (
    GenConfig,
    gen_multishot,
    gen_single_instance,
    gen_sparse_signal,
    load_instance,
    instance_from_json,
    svd_scaled_columns,
)
from .solvers import AnnealSchedule, solve_exhaustive, solve_sa

__all__ = ["main", "load_config", "ConfigError", "CliConfig"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3

CONFIG_SCHEMA_VERSION = 1
_MISSING = object()


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field."""


def _check_unknown(obj, allowed, path):
    for key in obj:
        if key not in allowed:
            raise ConfigError(f"{path}{key}: unknown key")


def _get(obj, key, path, kind, default=_MISSING):
    if key not in obj:
        if default is _MISSING:
            raise ConfigError(f"{path}{key}: missing required key")
        return default
    value = obj[key]
    if kind == "int":
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{path}{key}: expected an integer, got {value!r}")
    elif kind == "number":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{path}{key}: expected a number, got {value!r}")
        value = float(value)
    elif kind == "bool":
        if not isinstance(value, bool):
            raise ConfigError(f"{path}{key}: expected a boolean, got {value!r}")
    elif kind == "str":
        if not isinstance(value, str):
            raise ConfigError(f"{path}{key}: expected a string, got {value!r}")
    elif kind == "object":
        if not isinstance(value, dict):
            raise ConfigError(f"{path}{key}: expected an object, got {value!r}")
    elif kind == "str_or_null":
        if value is not None and not isinstance(value, str):
            raise ConfigError(f"{path}{key}: expected a string or null, got {value!r}")
    elif kind == "int_or_null":
        if value is not None and (isinstance(value, bool) or not isinstance(value, int)):
            raise ConfigError(f"{path}{key}: expected an integer or null, got {value!r}")
    else:  # pragma: no cover
        raise AssertionError(kind)
    return value


@dataclasses.dataclass(frozen=True)
class CliConfig:
    experiment: ExperimentConfig
    csv_path: str | None
    jsonl_path: str | None
    timings_in_csv: bool

    def to_canonical_dict(self):
        e = self.experiment
        return {
            "schema_version": CONFIG_SCHEMA_VERSION,
            "scenario": e.scenario,
            "seed": e.master_seed,
            "trials": e.trials,
            "sweep": {"k_values": list(e.sweep_k)},
            "threshold": e.threshold,
            "solver": e.solver,
            "exhaustive_max_bits": e.exhaustive_max_bits,
            "svd_columns": e.svd_columns,
            "gen": {
                "M": e.gen.M,
                "N": e.gen.N,
                "k": e.gen.k,
                "sigma": e.gen.sigma,
                "shots": e.gen.shots,
                "rho": e.gen.rho,
                "grid": e.gen.grid,
                "spacing": e.gen.spacing,
                "grid_snap": e.gen.grid_snap,
            },
            "quantizer": {"bits": e.quantizer_bits, "signed": e.quantizer_signed},
            "build": {
                "gamma0": e.build.gamma0,
                "lambda_c": e.build.lambda_c,
                "lambda_d": e.build.lambda_d,
            },
            "baselines": {
                "gamma1": e.baselines.gamma1,
                "max_iter": e.baselines.max_iter,
                "tol": e.baselines.tol,
                "omp_max_nonzeros": e.baselines.omp_max_nonzeros,
                "omp_tol": e.baselines.omp_tol,
            },
            "anneal": {
                "beta_initial": e.schedule.beta_initial,
                "beta_final": e.schedule.beta_final,
                "sweeps": e.schedule.sweeps,
                "reads": e.schedule.reads,
            },
            "output": {
                "csv": self.csv_path,
                "jsonl": self.jsonl_path,
                "timings_in_csv": self.timings_in_csv,
            },
        }


def parse_config(doc, source="config"):
    """Validate a parsed JSON document into a CliConfig."""
    if not isinstance(doc, dict):
        raise ConfigError(f"{source}: top level must be a JSON object")
    top_allowed = {
        "schema_version", "scenario", "seed", "trials", "sweep", "threshold",
        "solver", "exhaustive_max_bits", "svd_columns", "gen", "quantizer",
        "build", "baselines", "anneal", "output",
    }
    _check_unknown(doc, top_allowed, "")
    version = _get(doc, "schema_version", "", "int")
    if version != CONFIG_SCHEMA_VERSION:
        raise ConfigError(
            f"schema_version: unsupported value {version} (expected {CONFIG_SCHEMA_VERSION})"
        )
    scenario = _get(doc, "scenario", "", "str", "single")
    seed = _get(doc, "seed", "", "int", 0)
    if not (0 <= seed < 2**64):
        raise ConfigError("seed: must fit in 64 bits")
    trials = _get(doc, "trials", "", "int", 100)
    threshold = _get(doc, "threshold", "", "number", 0.02)
    solver = _get(doc, "solver", "", "str", "sa")
    exhaustive_max_bits = _get(doc, "exhaustive_max_bits", "", "int", 24)
    svd_columns = _get(doc, "svd_columns", "", "int", 2)

    sweep = _get(doc, "sweep", "", "object", {})
    _check_unknown(sweep, {"k_min", "k_max", "k_values"}, "sweep.")
    if "k_values" in sweep:
        if "k_min" in sweep or "k_max" in sweep:
            raise ConfigError("sweep.k_values: cannot be combined with k_min/k_max")
        values = sweep["k_values"]
        if not isinstance(values, list) or not values or not all(
            isinstance(v, int) and not isinstance(v, bool) for v in values
        ):
            raise ConfigError("sweep.k_values: expected a non-empty list of integers")
        sweep_k = tuple(values)
    else:
        k_min = _get(sweep, "k_min", "sweep.", "int", 1)
        k_max = _get(sweep, "k_max", "sweep.", "int", 8)
        if k_max < k_min:
            raise ConfigError("sweep.k_max: must be >= sweep.k_min")
        sweep_k = tuple(range(k_min, k_max + 1))

    gen_doc = _get(doc, "gen", "", "object", {})
    _check_unknown(
        gen_doc,
        {"M", "N", "k", "sigma", "shots", "rho", "grid", "spacing", "grid_snap"},
        "gen.",
    )
    try:
        gen = GenConfig(
            M=_get(gen_doc, "M", "gen.", "int", 32),
            N=_get(gen_doc, "N", "gen.", "int", 8),
            k=_get(gen_doc, "k", "gen.", "int_or_null", None),
            sigma=_get(gen_doc, "sigma", "gen.", "number", 0.0),
            shots=_get(gen_doc, "shots", "gen.", "int", 16),
            rho=_get(gen_doc, "rho", "gen.", "number", 0.1),
            grid=_get(gen_doc, "grid", "gen.", "str", "arcsin"),
            spacing=_get(gen_doc, "spacing", "gen.", "number", 0.5),
            grid_snap=_get(gen_doc, "grid_snap", "gen.", "bool", False),
        )
    except ValueError as exc:
        raise ConfigError(f"gen: {exc}") from exc

    quant_doc = _get(doc, "quantizer", "", "object", {})
    _check_unknown(quant_doc, {"bits", "signed"}, "quantizer.")
    bits = _get(quant_doc, "bits", "quantizer.", "int", 4)
    signed = _get(quant_doc, "signed", "quantizer.", "bool", False)

    build_doc = _get(doc, "build", "", "object", {})
    _check_unknown(build_doc, {"gamma0", "lambda_c", "lambda_d"}, "build.")
    try:
        build = BuildParams(
            gamma0=_get(build_doc, "gamma0", "build.", "number", 0.001),
            lambda_c=_get(build_doc, "lambda_c", "build.", "number", 1.5),
            lambda_d=_get(build_doc, "lambda_d", "build.", "number", 1.5),
        )
    except ValueError as exc:
        raise ConfigError(f"build: {exc}") from exc

    base_doc = _get(doc, "baselines", "", "object", {})
    _check_unknown(
        base_doc, {"gamma1", "max_iter", "tol", "omp_max_nonzeros", "omp_tol"}, "baselines."
    )
    try:
        baselines = BaselineConfig(
            gamma1=_get(base_doc, "gamma1", "baselines.", "number", 0.0005),
            max_iter=_get(base_doc, "max_iter", "baselines.", "int", 10_000),
            tol=_get(base_doc, "tol", "baselines.", "number", 1e-8),
            omp_max_nonzeros=_get(base_doc, "omp_max_nonzeros", "baselines.", "int_or_null", None),
            omp_tol=_get(base_doc, "omp_tol", "baselines.", "number", 1e-6),
        )
    except ValueError as exc:
        raise ConfigError(f"baselines: {exc}") from exc

    anneal_doc = _get(doc, "anneal", "", "object", {})
    _check_unknown(anneal_doc, {"beta_initial", "beta_final", "sweeps", "reads"}, "anneal.")
    try:
        schedule = AnnealSchedule(
            beta_initial=_get(anneal_doc, "beta_initial", "anneal.", "number", 0.1),
            beta_final=_get(anneal_doc, "beta_final", "anneal.", "number", 50.0),
            sweeps=_get(anneal_doc, "sweeps", "anneal.", "int", 1000),
            reads=_get(anneal_doc, "reads", "anneal.", "int", 100),
            seed=seed,
        )
    except ValueError as exc:
        raise ConfigError(f"anneal: {exc}") from exc

    out_doc = _get(doc, "output", "", "object", {})
    _check_unknown(out_doc, {"csv", "jsonl", "timings_in_csv"}, "output.")
    csv_path = _get(out_doc, "csv", "output.", "str_or_null", None)
    jsonl_path = _get(out_doc, "jsonl", "output.", "str_or_null", None)
    timings = _get(out_doc, "timings_in_csv", "output.", "bool", False)

    try:
        experiment = ExperimentConfig(
            gen=gen,
            build=build,
            baselines=baselines,
            schedule=schedule,
            quantizer_bits=bits,
            quantizer_signed=signed,
            solver=solver,
            scenario=scenario,
            svd_columns=svd_columns,
            threshold=threshold,
            sweep_k=sweep_k,
            trials=trials,
            master_seed=seed,
            exhaustive_max_bits=exhaustive_max_bits,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return CliConfig(experiment, csv_path, jsonl_path, timings)


def load_config(path):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    return parse_config(doc, source=path)


def _atomic_write(path, text):
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _apply_overrides(cfg, args):
    exp = cfg.experiment
    changes = {}
    if getattr(args, "seed", None) is not None:
        changes["master_seed"] = args.seed
        changes["schedule"] = dataclasses.replace(exp.schedule, seed=args.seed)
    if getattr(args, "solver", None) is not None:
        changes["solver"] = args.solver
    if changes:
        exp = dataclasses.replace(exp, **changes)
    csv_path = cfg.csv_path
    if getattr(args, "out", None) is not None:
        csv_path = args.out
    return CliConfig(exp, csv_path, cfg.jsonl_path, cfg.timings_in_csv)


def _print_config(cfg):
    print(json.dumps(cfg.to_canonical_dict(), indent=2))


def cmd_experiment(args):
    cfg = _apply_overrides(load_config(args.config), args)
    if args.print_config:
        _print_config(cfg)
        return EXIT_OK
    if cfg.csv_path is None:
        raise ConfigError("output.csv: missing required key (or pass --out)")
    curve, records = run_experiment(cfg.experiment)
    try:
        from io import StringIO

        buf = StringIO()
        write_curve_csv(curve, buf, include_timings=cfg.timings_in_csv)
        _atomic_write(cfg.csv_path, buf.getvalue())
        if cfg.jsonl_path is not None:
            write_records_jsonl(records, cfg.jsonl_path)
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def _build_for_instance(inst, cfg):
    """QUBO for an instance document using the config's build settings."""
    e = cfg.experiment
    quantizer = e.quantizer()
    if isinstance(inst, SparseInstance):
        A_r, x_r = realify_for_real_signal(inst.operator, inst.observation)
        model, reg = build_l0_qubo(A_r, x_r, quantizer, e.build)
        return model, reg, (A_r, x_r)
    X_L = svd_scaled_columns(inst.shots, e.svd_columns)
    A_block = realify_for_complex_signal(inst.operator)
    X_real = lift_complex_columns(X_L)
    model, reg = build_group_l0_qubo(A_block, X_real, quantizer, e.build)
    return model, reg, (A_block, X_real)


def _load_instance_arg(instance_arg):
    if instance_arg == "-":
        return instance_from_json(sys.stdin.read())
    return load_instance(instance_arg)


def cmd_solve(args):
    cfg = load_config(args.config) if args.config else parse_config({"schema_version": 1})
    cfg = _apply_overrides(cfg, args)
    e = cfg.experiment
    try:
        inst = _load_instance_arg(args.instance)
    except OSError as exc:
        print(f"error: cannot read instance: {exc}", file=sys.stderr)
        return EXIT_IO
    model, reg, (A_sys, x_sys) = _build_for_instance(inst, cfg)
    if e.solver == "exhaustive":
        result = solve_exhaustive(model, e.exhaustive_max_bits)
    else:
        result = solve_sa(model, e.schedule)
    decoded = decode_solution(reg, result.bits)
    violations = len(constraint_violations(reg, result.bits))
    if isinstance(inst, SparseInstance):
        signal = decoded.values.tolist()
        L_s = evaluate_l0_objective(A_sys, x_sys, decoded.values, e.build.gamma0)
    else:
        signal = decoded.tolist()
        L_s = evaluate_l0_objective(A_sys, x_sys, decoded, e.build.gamma0)
    print(
        json.dumps(
            {
                "signal": signal,
                "energy": result.energy,
                "constraint_violations": violations,
                "monitors": {"L_s": L_s, "Lp_s": result.energy},
                "reads": result.reads,
            }
        )
    )
    return EXIT_OK


def _generated_instance(cfg):
    e = cfg.experiment
    if e.gen.k is None:
        raise ConfigError("gen.k: missing required key (needed to generate an instance)")
    rng = np.random.default_rng(np.random.SeedSequence(entropy=e.master_seed))
    quantizer = e.quantizer()
    truth = gen_sparse_signal(
        e.gen.M, e.gen.k, rng, snap_to=quantizer if e.gen.grid_snap else None
    )
    A = e.gen.operator()
    if e.scenario == "single":
        return gen_single_instance(A, truth, e.gen.sigma, rng)
    return gen_multishot(A, truth, e.gen.shots, e.gen.rho, e.gen.sigma, rng)


def cmd_export_qubo(args):
    if (args.instance is None) == (args.config is None):
        raise ConfigError("export-qubo needs exactly one of --instance or --config")
    if args.config:
        cfg = _apply_overrides(load_config(args.config), args)
        inst = _generated_instance(cfg)
    else:
        cfg = parse_config({"schema_version": 1})
        cfg = _apply_overrides(cfg, args)
        try:
            inst = _load_instance_arg(args.instance)
        except OSError as exc:
            print(f"error: cannot read instance: {exc}", file=sys.stderr)
            return EXIT_IO
    model, reg, _ = _build_for_instance(inst, cfg)
    sidecar = args.out + ".registry.json"
    try:
        export_qubo_file(model, reg, args.out)
        _atomic_write(sidecar, json.dumps(reg.to_dict(), sort_keys=True) + "\n")
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO
    print(json.dumps({"qubo": args.out, "registry": sidecar, "num_vars": model.num_vars}))
    return EXIT_OK


def cmd_decode(args):
    try:
        with open(args.registry) as fh:
            reg = VariableRegistry.from_dict(json.load(fh))
    except OSError as exc:
        print(f"error: cannot read registry: {exc}", file=sys.stderr)
        return EXIT_IO
    except (json.JSONDecodeError, KeyError, ValueError) as exc:
        raise ConfigError(f"{args.registry}: invalid registry document: {exc}")
    if args.bits_file:
        try:
            with open(args.bits_file) as fh:
                bit_text = fh.read()
        except OSError as exc:
            print(f"error: cannot read bits: {exc}", file=sys.stderr)
            return EXIT_IO
    else:
        bit_text = args.bits
    bit_text = "".join(bit_text.split())
    if not bit_text or any(c not in "01" for c in bit_text):
        raise ConfigError("bits: expected a string of 0s and 1s")
    bits = np.array([int(c) for c in bit_text], dtype=np.uint8)
    if bits.size != reg.num_vars:
        raise ConfigError(
            f"bits: got {bits.size} bits for a registry with {reg.num_vars} variables"
        )
    decoded = decode_solution(reg, bits)
    values = decoded.values if hasattr(decoded, "values") else decoded
    print(json.dumps({"signal": np.asarray(values).tolist()}))
    return EXIT_OK


def _make_parser():
    parser = argparse.ArgumentParser(
        prog="l0qubo",
        description="Sparse reconstruction via l0-regularized regression as QUBO.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_exp = sub.add_parser("experiment", help="run a sweep and write the CSV report")
    p_exp.add_argument("--config", required=True, help="path to the JSON config")
    p_exp.add_argument("--seed", type=int, default=None, help="override the master seed")
    p_exp.add_argument("--solver", choices=["exhaustive", "sa"], default=None)
    p_exp.add_argument("--out", default=None, help="override the CSV output path")
    p_exp.add_argument("--print-config", action="store_true", help="echo the validated config and exit")
    p_exp.set_defaults(func=cmd_experiment)

    p_solve = sub.add_parser("solve", help="solve one instance document")
    p_solve.add_argument("instance", help="instance JSON path, or - for stdin")
    p_solve.add_argument("--config", default=None)
    p_solve.add_argument("--seed", type=int, default=None)
    p_solve.add_argument("--solver", choices=["exhaustive", "sa"], default=None)
    p_solve.set_defaults(func=cmd_solve)

    p_export = sub.add_parser("export-qubo", help="write the QUBO text file plus registry sidecar")
    p_export.add_argument("--instance", default=None, help="instance JSON path, or - for stdin")
    p_export.add_argument("--config", default=None, help="generate the instance from this config")
    p_export.add_argument("--seed", type=int, default=None)
    p_export.add_argument("--out", required=True, help="QUBO file path")
    p_export.set_defaults(func=cmd_export_qubo)

    p_decode = sub.add_parser("decode", help="decode an external bit assignment")
    p_decode.add_argument("--registry", required=True, help="registry sidecar path")
    group = p_decode.add_mutually_exclusive_group(required=True)
    group.add_argument("--bits", default=None, help="assignment as a 0/1 string")
    group.add_argument("--bits-file", default=None, help="file containing the assignment")
    p_decode.set_defaults(func=cmd_decode)
    return parser


def main(argv=None):
    parser = _make_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
