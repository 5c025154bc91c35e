"""Sparse signal reconstruction via l0-regularized regression compiled to QUBO.

Subpackages
-----------
::

 core       -- quantizers, complex-to-real lifting, instance types
 qubo       -- QUBO/Ising models, penalty gadgets, objective compilers, file interop
 solvers    -- exhaustive Gray-code scan and single-flip simulated annealing
 baselines  -- OMP, LASSO, group LASSO, l1-SVD reference methods
 scenarios  -- DOA steering matrices and synthetic instance generation
 harness    -- trial orchestration, success scoring, loss monitors, sweeps
 cli        -- `l0qubo` command-line frontend
"""

from .baselines import BaselineConfig, FitResult, group_lasso_pg, l1_svd_pipeline, lasso_cd, omp
from .core import (
    MultiShotInstance,
    Quantizer,
    SparseInstance,
    SparseSignal,
    fold_lifted,
    lift_complex_columns,
    realify_for_complex_signal,
    realify_for_real_signal,
    support,
)
from .harness import (
    DeltaDiagnostic,
    ExperimentConfig,
    SuccessCurve,
    TrialRecord,
    delta_diagnostic,
    run_experiment,
    run_multishot_trial,
    run_single_trial,
    success_score,
    union_support,
    write_curve_csv,
    write_records_jsonl,
)
from .qubo import (
    BuildParams,
    IsingModel,
    QuboFileError,
    QuboModel,
    VariableRegistry,
    build_group_l0_qubo,
    build_l0_qubo,
    constraint_violations,
    decode_solution,
    evaluate_ising,
    evaluate_l0_objective,
    evaluate_qubo,
    export_qubo_file,
    import_qubo_file,
    ising_to_qubo,
    penalty_terms,
    qubo_to_ising,
)
from .scenarios import (
    DoaGrid,
    GenConfig,
    gen_multishot,
    gen_single_instance,
    gen_sparse_signal,
    instance_from_json,
    instance_to_json,
    load_instance,
    save_instance,
    steering_matrix_arcsin,
    steering_matrix_uniform,
    svd_preprocess,
)
from .solvers import AnnealSchedule, SolveResult, flip_delta, solve_exhaustive, solve_sa

__version__ = "0.1.0"
