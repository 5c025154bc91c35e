"""Classical reference reconstructions: OMP, LASSO, group LASSO, l1-SVD.

All solvers keep the (1/2 gamma1)||x - Az||^2 + penalty scaling of the
regression objective; paper-style gamma values plug in unchanged. Complex
data must be lifted to real systems before calling these (the l1-SVD
pipeline does its own lifting).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .core import (
    _require_finite,
    fold_lifted,
    lift_complex_columns,
    realify_for_complex_signal,
)

__all__ = ["BaselineConfig", "FitResult", "omp", "lasso_cd", "group_lasso_pg", "l1_svd_pipeline"]


@dataclass(frozen=True)
class BaselineConfig:
    """Shared solver settings for the reference methods."""

    gamma1: float = 5e-4
    max_iter: int = 10_000
    tol: float = 1e-8  # relative objective decrease
    omp_max_nonzeros: int | None = None  # default: min(rows, cols)
    omp_tol: float = 1e-6  # residual norm stopping threshold

    def __post_init__(self):
        if self.gamma1 <= 0 or self.tol <= 0 or self.max_iter < 1:
            raise ValueError("gamma1, tol must be > 0 and max_iter >= 1")
        if self.omp_max_nonzeros is not None and self.omp_max_nonzeros < 1:
            raise ValueError("omp_max_nonzeros must be >= 1")
        if self.omp_tol < 0:
            raise ValueError("omp_tol must be >= 0")


@dataclass(eq=False)
class FitResult:
    """Coefficients plus solver metadata (flags instead of exceptions)."""

    coef: np.ndarray
    n_iter: int
    converged: bool = True
    objective: float = float("nan")
    rank_deficient: bool = False
    objective_history: np.ndarray | None = None


def _check_real_system(A, x, expect_matrix=False):
    A = np.asarray(A, dtype=float)
    x = np.asarray(x, dtype=float)
    _require_finite("A", A)
    _require_finite("x", x)
    if A.ndim != 2:
        raise ValueError("operator must be 2-D")
    if expect_matrix and x.ndim == 1:
        x = x[:, None]
    if x.shape[0] != A.shape[0]:
        raise ValueError("observation rows do not match operator rows")
    return A, x


def omp(A_real, x_real, cfg=BaselineConfig()):
    """Orthogonal matching pursuit with normalized-column selection.

    Greedily picks the column most correlated with the residual, refits by
    least squares on the selected set, and stops once the residual norm is
    at most ``cfg.omp_tol`` or the nonzero budget is exhausted. A
    rank-deficient selected set is solved in the least-squares sense and
    flagged.
    """
    A, x = _check_real_system(A_real, x_real)
    col_norms = np.linalg.norm(A, axis=0)
    if np.any(col_norms == 0.0):
        raise ValueError("operator has a zero column")
    max_nz = cfg.omp_max_nonzeros or min(A.shape)
    selected: list[int] = []
    coef_sel = np.zeros(0)
    residual = x.copy()
    res_norm = float(np.linalg.norm(residual))
    rank_deficient = False
    while len(selected) < max_nz and res_norm > cfg.omp_tol:
        corr = np.abs(A.T @ residual) / col_norms
        if selected:
            corr[selected] = -1.0
        j = int(np.argmax(corr))
        if corr[j] <= 1e-13 * max(1.0, res_norm):
            break  # residual orthogonal to every remaining column
        selected.append(j)
        sub = A[:, selected]
        coef_sel, _, rank, _ = np.linalg.lstsq(sub, x, rcond=None)
        if rank < len(selected):
            rank_deficient = True
        residual = x - sub @ coef_sel
        res_norm = float(np.linalg.norm(residual))
    coef = np.zeros(A.shape[1])
    if selected:
        coef[selected] = coef_sel
    return FitResult(
        coef,
        n_iter=len(selected),
        converged=res_norm <= cfg.omp_tol,
        objective=res_norm,
        rank_deficient=rank_deficient,
    )


@njit(cache=True)
def _lasso_cd_kernel(A, x, gamma1, tol, max_iter):
    R, M = A.shape
    col_sq = np.zeros(M)
    for j in range(M):
        s = 0.0
        for r in range(R):
            s += A[r, j] * A[r, j]
        col_sq[j] = s
    z = np.zeros(M)
    resid = x.copy()
    history = np.zeros(max_iter + 1)
    obj = 0.0
    for r in range(R):
        obj += resid[r] * resid[r]
    obj *= 0.5 / gamma1
    history[0] = obj
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        for j in range(M):
            if col_sq[j] == 0.0:
                continue
            zj = z[j]
            rho = col_sq[j] * zj
            for r in range(R):
                rho += A[r, j] * resid[r]
            if rho > gamma1:
                znew = (rho - gamma1) / col_sq[j]
            elif rho < -gamma1:
                znew = (rho + gamma1) / col_sq[j]
            else:
                znew = 0.0
            if znew != zj:
                d = znew - zj
                for r in range(R):
                    resid[r] -= A[r, j] * d
                z[j] = znew
        new_obj = 0.0
        for r in range(R):
            new_obj += resid[r] * resid[r]
        new_obj *= 0.5 / gamma1
        for j in range(M):
            new_obj += abs(z[j])
        history[it] = new_obj
        if obj - new_obj < tol * max(1.0, abs(obj)):
            converged = True
            break
        obj = new_obj
    return z, history, it, converged


def lasso_cd(A_real, x_real, gamma1, cfg=BaselineConfig()):
    """Cyclic coordinate descent for (1/2 gamma1)||x - Az||^2 + ||z||_1.

    Each coordinate update is the exact soft-threshold minimizer, so the
    objective never increases; iteration stops when a full cycle reduces it
    by less than the relative tolerance.
    """
    if gamma1 <= 0:
        raise ValueError("gamma1 must be > 0")
    A, x = _check_real_system(A_real, x_real)
    z, history, iters, converged = _lasso_cd_kernel(
        A, x, float(gamma1), float(cfg.tol), int(cfg.max_iter)
    )
    resid = x - A @ z
    objective = float(resid @ resid) / (2.0 * gamma1) + float(np.sum(np.abs(z)))
    return FitResult(
        z,
        n_iter=int(iters),
        converged=bool(converged),
        objective=objective,
        objective_history=history[: iters + 1],
    )


def group_lasso_pg(A_real, x_cols, gamma1, cfg=BaselineConfig()):
    """Proximal gradient for (1/2 gamma1)||X - AZ||_F^2 + sum_i ||row_i(Z)||_2.

    Gradient steps use the exact Lipschitz step 1/L with
    L = sigma_max(A)^2 / gamma1, followed by a row-wise block soft threshold,
    so the objective is non-increasing.
    """
    if gamma1 <= 0:
        raise ValueError("gamma1 must be > 0")
    A, X = _check_real_system(A_real, x_cols, expect_matrix=True)
    M, L = A.shape[1], X.shape[1]
    smax = float(np.linalg.norm(A, 2))
    if smax == 0.0:
        return FitResult(np.zeros((M, L)), 0, True, float(np.sum(X * X)) / (2 * gamma1))
    step = gamma1 / (smax * smax)

    def objective(Z, R):
        return float(np.sum(R * R)) / (2.0 * gamma1) + float(
            np.sum(np.linalg.norm(Z, axis=1))
        )

    Z = np.zeros((M, L))
    R = X - A @ Z
    obj = objective(Z, R)
    history = [obj]
    converged = False
    it = 0
    for it in range(1, cfg.max_iter + 1):
        grad = -(A.T @ R) / gamma1
        W = Z - step * grad
        norms = np.linalg.norm(W, axis=1)
        shrink = np.zeros(M)
        active = norms > step
        shrink[active] = 1.0 - step / norms[active]
        Z = W * shrink[:, None]
        R = X - A @ Z
        new_obj = objective(Z, R)
        history.append(new_obj)
        if obj - new_obj < cfg.tol * max(1.0, abs(obj)):
            converged = True
            break
        obj = new_obj
    return FitResult(
        Z,
        n_iter=it,
        converged=converged,
        objective=history[-1],
        objective_history=np.asarray(history),
    )


def l1_svd_pipeline(A, observations, L, gamma1, cfg=BaselineConfig()):
    """Multi-shot group LASSO on the leading left singular vectors.

    Replaces the (N, S) observation matrix with its L leading left singular
    vectors weighted by their singular values (leading column normalized to
    unit scale), lifts the complex system through the block lifting, solves
    the group LASSO, and folds the stacked real solution back to a complex
    (M, L) matrix. Column 0 (the dominant direction) is the evaluation
    column.
    """
    X = np.asarray(observations, dtype=complex)
    if X.ndim == 1:
        X = X[:, None]
    S = X.shape[1]
    if not (1 <= L <= S):
        raise ValueError(f"need 1 <= L <= S; got L={L}, S={S}")
    _require_finite("observations", X)
    try:
        U, sv, _ = np.linalg.svd(X)
    except np.linalg.LinAlgError as exc:
        raise ValueError(f"SVD of the observation matrix failed: {exc}") from exc
    scale = sv[:L] / sv[0] if sv[0] > 0 else np.zeros(L)
    X_L = U[:, :L] * scale[None, :]
    A_block = realify_for_complex_signal(np.asarray(A, dtype=complex))
    X_real = lift_complex_columns(X_L)
    res = group_lasso_pg(A_block, X_real, gamma1, cfg)
    Z = fold_lifted(res.coef)
    return FitResult(
        Z,
        n_iter=res.n_iter,
        converged=res.converged,
        objective=res.objective,
        objective_history=res.objective_history,
    )
