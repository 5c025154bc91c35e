"""Trial orchestration: generate, reconstruct with every method, score, aggregate.

Per-trial seeding is a stable hash of (master seed, sweep value, trial
index) via numpy's SeedSequence spawn keys, so adding or removing methods
never perturbs instance generation and sweeps can run concurrently.
"""

from __future__ import annotations

import dataclasses
import json
import time
from dataclasses import dataclass, field

import numpy as np

from .baselines import BaselineConfig, l1_svd_pipeline, lasso_cd, omp
from .core import (
    Quantizer,
    SparseSignal,
    fold_lifted,
    lift_complex_columns,
    realify_for_complex_signal,
    realify_for_real_signal,
    support,
)
from .qubo import (
    BuildParams,
    build_group_l0_qubo,
    build_l0_qubo,
    constraint_violations,
    decode_solution,
    evaluate_l0_objective,
)
from .scenarios import GenConfig, gen_multishot, gen_single_instance, gen_sparse_signal, svd_scaled_columns
from .solvers import AnnealSchedule, solve_exhaustive, solve_sa

__all__ = [
    "ExperimentConfig",
    "MethodOutcome",
    "TrialRecord",
    "SuccessCurve",
    "DeltaDiagnostic",
    "success_score",
    "union_support",
    "delta_diagnostic",
    "run_single_trial",
    "run_multishot_trial",
    "run_experiment",
    "write_curve_csv",
    "write_records_jsonl",
    "CSV_HEADER",
    "SINGLE_METHODS",
    "MULTISHOT_METHODS",
]

SINGLE_METHODS = ("qubo", "omp", "lasso")
MULTISHOT_METHODS = ("qubo", "l1_svd", "lasso_avg")
CSV_HEADER = (
    "sweep_k,method,success_rate,trials,failures,"
    "L_z_mean,L_q_mean,L_s_mean,Lp_s_mean,mean_wall_ms"
)


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a sweep needs; trials derive their own seeds from master_seed."""

    gen: GenConfig = GenConfig()
    build: BuildParams = BuildParams()
    baselines: BaselineConfig = BaselineConfig()
    schedule: AnnealSchedule = AnnealSchedule()
    quantizer_bits: int = 4
    quantizer_signed: bool = False
    solver: str = "sa"  # "sa" | "exhaustive"
    scenario: str = "single"  # "single" | "multishot"
    svd_columns: int = 2
    threshold: float = 0.02
    sweep_k: tuple = (1, 2, 3, 4, 5, 6, 7, 8)
    trials: int = 100
    master_seed: int = 0
    exhaustive_max_bits: int = 24

    def __post_init__(self):
        if self.solver not in ("sa", "exhaustive"):
            raise ValueError(f"unknown solver {self.solver!r}")
        if self.scenario not in ("single", "multishot"):
            raise ValueError(f"unknown scenario {self.scenario!r}")
        if self.quantizer_bits < 1:
            raise ValueError("quantizer_bits must be >= 1")
        if self.threshold < 0:
            raise ValueError("threshold must be >= 0")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if len(self.sweep_k) == 0:
            raise ValueError("sweep_k must be non-empty")
        for k in self.sweep_k:
            if not (0 <= k <= self.gen.M):
                raise ValueError(f"sweep value k={k} outside 0..M")
        if self.scenario == "multishot" and not (
            1 <= self.svd_columns <= min(self.gen.N, self.gen.shots)
        ):
            raise ValueError("svd_columns must satisfy 1 <= L <= min(N, shots)")

    def quantizer(self):
        if self.quantizer_signed:
            return Quantizer.signed(self.quantizer_bits)
        return Quantizer.unsigned(self.quantizer_bits)

    @property
    def methods(self):
        return SINGLE_METHODS if self.scenario == "single" else MULTISHOT_METHODS


@dataclass
class MethodOutcome:
    signal: object  # reconstructed values (real or complex array), None on failure
    success: int | None  # 1/0, None when the method errored
    wall_ms: float
    error: str | None = None


@dataclass
class TrialRecord:
    master_seed: int
    sweep_k: int
    trial_index: int
    outcomes: dict
    losses: dict  # L_z, L_q, L_s, Lp_s (may be absent on qubo failure)
    violations: int | None
    delta: "DeltaDiagnostic | None" = None


@dataclass(frozen=True)
class DeltaDiagnostic:
    """Terms of the stability decomposition of L0(s) - L0(z)."""

    delta_direct: float
    fidelity_term: float
    l0_term: float
    noise_term: float


@dataclass
class SuccessCurve:
    sweep: tuple
    methods: tuple
    trials: int
    rates: dict  # method -> list aligned with sweep
    failures: dict  # method -> list
    loss_means: dict  # monitor -> list
    wall_means: dict  # method -> list


def success_score(truth, recon, threshold):
    """1 iff the thresholded support of the reconstruction matches the truth.

    The truth support is its exact nonzero set; the reconstruction is
    thresholded (strict inequality), so sub-threshold leakage is ignored.
    """
    truth_values = truth.values if isinstance(truth, SparseSignal) else np.asarray(truth)
    recon = np.asarray(recon)
    if recon.shape != truth_values.shape:
        raise ValueError("truth and reconstruction lengths differ")
    return int(support(recon, threshold) == support(truth_values, 0.0))


def union_support(values, threshold):
    """Support of a complex vector: an entry counts if either part exceeds it."""
    v = np.asarray(values)
    return support(v.real, threshold) | support(v.imag, threshold)


def delta_diagnostic(A, z, s, noise, gamma0):
    """Decompose L0(s) - L0(z) into fidelity, support-change and noise terms.

    ``delta_direct`` evaluates both objectives on x = A z + noise;
    the terms use e = s - z: (1/2 gamma0)||Ae||^2, the nonzero-count change,
    and -(1/gamma0) Re<Ae, n>. The two sides agree to float precision.
    """
    if gamma0 <= 0:
        raise ValueError("gamma0 must be > 0")
    A = np.asarray(A)
    z = np.asarray(z)
    s = np.asarray(s)
    noise = np.asarray(noise)
    if z.shape != s.shape or A.shape[1] != z.shape[0] or noise.shape[0] != A.shape[0]:
        raise ValueError("inconsistent shapes for the delta diagnostic")
    x = A @ z + noise
    l0_s = evaluate_l0_objective(A, x, s, gamma0)
    l0_z = evaluate_l0_objective(A, x, z, gamma0)
    e = s - z
    Ae = A @ e
    fidelity = float(np.linalg.norm(Ae) ** 2) / (2.0 * gamma0)
    l0_term = float(np.count_nonzero(e + z) - np.count_nonzero(z))
    noise_term = -float(np.real(np.vdot(Ae, noise))) / gamma0
    return DeltaDiagnostic(l0_s - l0_z, fidelity, l0_term, noise_term)


def _solve(cfg, model, schedule):
    if cfg.solver == "exhaustive":
        return solve_exhaustive(model, cfg.exhaustive_max_bits)
    return solve_sa(model, schedule)


def _timed(fn):
    t0 = time.perf_counter()
    value = fn()
    return value, (time.perf_counter() - t0) * 1e3


def _failed(exc):
    return MethodOutcome(None, None, 0.0, f"{type(exc).__name__}: {exc}")


def run_single_trial(cfg, rng):
    """One single-observation trial: QUBO method plus OMP and LASSO baselines."""
    if cfg.gen.k is None:
        raise ValueError("cfg.gen.k must be set (run_experiment fills it per sweep)")
    solver_seed = int(rng.integers(0, 2**63))
    quantizer = cfg.quantizer()
    A = cfg.gen.operator()
    truth = gen_sparse_signal(
        cfg.gen.M, cfg.gen.k, rng, snap_to=quantizer if cfg.gen.grid_snap else None
    )
    inst = gen_single_instance(A, truth, cfg.gen.sigma, rng)
    A_r, x_r = realify_for_real_signal(A, inst.observation)

    outcomes = {}
    losses = {}
    violations = None
    delta = None
    gamma0 = cfg.build.gamma0
    schedule = dataclasses.replace(cfg.schedule, seed=solver_seed)
    try:
        def qubo_run():
            model, reg = build_l0_qubo(A_r, x_r, quantizer, cfg.build)
            result = _solve(cfg, model, schedule)
            return model, reg, result

        (model, reg, result), wall = _timed(qubo_run)
        recovered = decode_solution(reg, result.bits)
        violations = len(constraint_violations(reg, result.bits))
        outcomes["qubo"] = MethodOutcome(
            recovered.values,
            success_score(truth, recovered.values, cfg.threshold),
            wall,
        )
        q_vals = quantizer.snap(truth.values)
        losses = {
            "L_z": evaluate_l0_objective(A, inst.observation, truth.values, gamma0),
            "L_q": evaluate_l0_objective(A, inst.observation, q_vals, gamma0),
            "L_s": evaluate_l0_objective(A, inst.observation, recovered.values, gamma0),
            "Lp_s": result.energy,
        }
        delta = delta_diagnostic(A, truth.values, recovered.values, inst.noise, gamma0)
    except Exception as exc:  # recorded, other methods still run
        outcomes["qubo"] = _failed(exc)

    try:
        res, wall = _timed(lambda: omp(A_r, x_r, cfg.baselines))
        outcomes["omp"] = MethodOutcome(
            res.coef, success_score(truth, res.coef, cfg.threshold), wall
        )
    except Exception as exc:
        outcomes["omp"] = _failed(exc)

    try:
        res, wall = _timed(
            lambda: lasso_cd(A_r, x_r, cfg.baselines.gamma1, cfg.baselines)
        )
        outcomes["lasso"] = MethodOutcome(
            res.coef, success_score(truth, res.coef, cfg.threshold), wall
        )
    except Exception as exc:
        outcomes["lasso"] = _failed(exc)

    return TrialRecord(
        cfg.master_seed, cfg.gen.k, -1, outcomes, losses, violations, delta
    )


def _multishot_truth_representation(A, supp, X_L):
    """Least-squares coefficients of the SVD-domain observations on the true support."""
    M = A.shape[1]
    L = X_L.shape[1]
    Z = np.zeros((M, L), dtype=complex)
    if supp:
        cols = sorted(supp)
        coef, _, _, _ = np.linalg.lstsq(A[:, cols], X_L, rcond=None)
        Z[cols] = coef
    return Z


def run_multishot_trial(cfg, rng):
    """One multi-shot trial: group-l0 QUBO after SVD preprocessing, plus baselines.

    The complex problem is block-lifted: coefficient rows double (real and
    imaginary parts), and success compares the union of both parts of the
    leading column against the original support.
    """
    if cfg.gen.k is None:
        raise ValueError("cfg.gen.k must be set (run_experiment fills it per sweep)")
    solver_seed = int(rng.integers(0, 2**63))
    quantizer = cfg.quantizer()
    A = cfg.gen.operator()
    truth = gen_sparse_signal(
        cfg.gen.M, cfg.gen.k, rng, snap_to=quantizer if cfg.gen.grid_snap else None
    )
    inst = gen_multishot(A, truth, cfg.gen.shots, cfg.gen.rho, cfg.gen.sigma, rng)

    outcomes = {}
    losses = {}
    violations = None
    gamma0 = cfg.build.gamma0
    schedule = dataclasses.replace(cfg.schedule, seed=solver_seed)
    truth_support = truth.support
    try:
        def qubo_run():
            X_L = svd_scaled_columns(inst.shots, cfg.svd_columns)
            A_block = realify_for_complex_signal(A)
            X_real = lift_complex_columns(X_L)
            model, reg = build_group_l0_qubo(A_block, X_real, quantizer, cfg.build)
            result = _solve(cfg, model, schedule)
            return X_L, A_block, X_real, reg, result

        (X_L, A_block, X_real, reg, result), wall = _timed(qubo_run)
        Z_real = decode_solution(reg, result.bits)  # (2M, L)
        violations = len(constraint_violations(reg, result.bits))
        lead = fold_lifted(Z_real[:, 0])
        score = int(union_support(lead, cfg.threshold) == truth_support)
        outcomes["qubo"] = MethodOutcome(fold_lifted(Z_real), score, wall)

        Z_true = _multishot_truth_representation(A, truth_support, X_L)
        Z_true_real = np.vstack([Z_true.real, Z_true.imag])
        losses = {
            "L_z": evaluate_l0_objective(A_block, X_real, Z_true_real, gamma0),
            "L_q": evaluate_l0_objective(
                A_block, X_real, quantizer.snap(Z_true_real), gamma0
            ),
            "L_s": evaluate_l0_objective(A_block, X_real, Z_real, gamma0),
            "Lp_s": result.energy,
        }
    except Exception as exc:
        outcomes["qubo"] = _failed(exc)

    try:
        res, wall = _timed(
            lambda: l1_svd_pipeline(
                A, inst.shots, cfg.svd_columns, cfg.baselines.gamma1, cfg.baselines
            )
        )
        score = int(union_support(res.coef[:, 0], cfg.threshold) == truth_support)
        outcomes["l1_svd"] = MethodOutcome(res.coef, score, wall)
    except Exception as exc:
        outcomes["l1_svd"] = _failed(exc)

    try:
        def lasso_avg_run():
            xbar = inst.shots.mean(axis=1)
            A_block = realify_for_complex_signal(A)
            x_real = lift_complex_columns(xbar).ravel()
            res = lasso_cd(A_block, x_real, cfg.baselines.gamma1, cfg.baselines)
            return fold_lifted(res.coef)

        z_avg, wall = _timed(lasso_avg_run)
        score = int(union_support(z_avg, cfg.threshold) == truth_support)
        outcomes["lasso_avg"] = MethodOutcome(z_avg, score, wall)
    except Exception as exc:
        outcomes["lasso_avg"] = _failed(exc)

    return TrialRecord(
        cfg.master_seed, cfg.gen.k, -1, outcomes, losses, violations, None
    )


def trial_rng(master_seed, sweep_k, trial_index):
    """Stable per-trial generator: SeedSequence(master, spawn_key=(k, trial))."""
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=(sweep_k, trial_index))
    return np.random.default_rng(ss)


def run_experiment(cfg):
    """Run the configured sweep; returns (SuccessCurve, [TrialRecord...])."""
    records = []
    run_trial = run_single_trial if cfg.scenario == "single" else run_multishot_trial
    for k in cfg.sweep_k:
        cfg_k = dataclasses.replace(cfg, gen=dataclasses.replace(cfg.gen, k=int(k)))
        for t in range(cfg.trials):
            rng = trial_rng(cfg.master_seed, int(k), t)
            record = run_trial(cfg_k, rng)
            record.trial_index = t
            records.append(record)
    return _aggregate(cfg, records), records


def _aggregate(cfg, records):
    methods = cfg.methods
    sweep = tuple(int(k) for k in cfg.sweep_k)
    rates = {m: [] for m in methods}
    failures = {m: [] for m in methods}
    wall_means = {m: [] for m in methods}
    loss_means = {name: [] for name in ("L_z", "L_q", "L_s", "Lp_s")}
    for k in sweep:
        bucket = [r for r in records if r.sweep_k == k]
        for m in methods:
            scores = [r.outcomes[m].success for r in bucket if r.outcomes[m].success is not None]
            fails = sum(1 for r in bucket if r.outcomes[m].success is None)
            rates[m].append(float(np.mean(scores)) if scores else float("nan"))
            failures[m].append(fails)
            walls = [r.outcomes[m].wall_ms for r in bucket if r.outcomes[m].error is None]
            wall_means[m].append(float(np.mean(walls)) if walls else float("nan"))
        for name in loss_means:
            vals = [r.losses[name] for r in bucket if name in r.losses]
            loss_means[name].append(float(np.mean(vals)) if vals else float("nan"))
    return SuccessCurve(sweep, methods, cfg.trials, rates, failures, loss_means, wall_means)


def _fmt(x):
    return repr(float(x))


def write_curve_csv(curve, path, include_timings=False):
    """One row per (sweep value, method); see CSV_HEADER for the columns.

    Wall-time means are written as 0.0 unless ``include_timings`` is set,
    keeping the default output byte-identical across re-runs of the same
    seeded experiment (real timings live in the JSONL records).
    """
    lines = [CSV_HEADER]
    for ki, k in enumerate(curve.sweep):
        for m in curve.methods:
            wall = curve.wall_means[m][ki] if include_timings else 0.0
            lines.append(
                ",".join(
                    [
                        str(k),
                        m,
                        _fmt(curve.rates[m][ki]),
                        str(curve.trials),
                        str(curve.failures[m][ki]),
                        _fmt(curve.loss_means["L_z"][ki]),
                        _fmt(curve.loss_means["L_q"][ki]),
                        _fmt(curve.loss_means["L_s"][ki]),
                        _fmt(curve.loss_means["Lp_s"][ki]),
                        _fmt(wall),
                    ]
                )
            )
    text = "\n".join(lines) + "\n"
    if hasattr(path, "write"):
        path.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)
    return text


def _jsonify_signal(sig):
    if sig is None:
        return None
    arr = np.asarray(sig)
    if np.iscomplexobj(arr):
        return np.stack([arr.real, arr.imag], axis=-1).tolist()
    return arr.tolist()


def write_records_jsonl(records, path):
    """One TrialRecord per line, complex values as [re, im] pairs."""
    with open(path, "w") as fh:
        for r in records:
            doc = {
                "master_seed": r.master_seed,
                "sweep_k": r.sweep_k,
                "trial_index": r.trial_index,
                "violations": r.violations,
                "losses": r.losses,
                "delta": dataclasses.asdict(r.delta) if r.delta is not None else None,
                "methods": {
                    name: {
                        "success": o.success,
                        "wall_ms": o.wall_ms,
                        "error": o.error,
                        "signal": _jsonify_signal(o.signal),
                    }
                    for name, o in r.outcomes.items()
                },
            }
            fh.write(json.dumps(doc) + "\n")
