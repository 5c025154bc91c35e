"""QUBO minimizers: exhaustive Gray-code scan and single-flip simulated annealing.

Both solvers work on local fields f_i = Q_ii + sum_j Q_ij b_j, so a flip
proposal costs O(1) and only accepted flips touch the neighbor lists. Energy
is accumulated incrementally and resynchronized from scratch periodically to
cancel floating-point drift; reported energies are always recomputed through
the model's canonical summation order so results compare bit-for-bit.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
from numba import njit

from .qubo import evaluate_qubo

__all__ = ["AnnealSchedule", "SolveResult", "solve_exhaustive", "solve_sa", "flip_delta"]

_U64_PHI = np.uint64(0x9E3779B97F4A7C15)
_U64_M1 = np.uint64(0xBF58476D1CE4E5B9)
_U64_M2 = np.uint64(0x94D049BB133111EB)
_INV_2_53 = 1.0 / 9007199254740992.0
_GRAY_RESYNC_MASK = np.int64(511)


@dataclass(frozen=True)
class AnnealSchedule:
    """Geometric inverse-temperature ladder plus restart and seeding policy."""

    beta_initial: float = 0.01
    beta_final: float = 50.0
    sweeps: int = 1000
    reads: int = 100
    seed: int = 0

    def __post_init__(self):
        if not (0 < self.beta_initial < self.beta_final):
            raise ValueError("need 0 < beta_initial < beta_final")
        if self.sweeps < 1 or self.reads < 1:
            raise ValueError("sweeps and reads must be >= 1")
        if not (0 <= self.seed < 2**64):
            raise ValueError("seed must fit in 64 bits")

    def betas(self):
        return np.geomspace(self.beta_initial, self.beta_final, self.sweeps)


@dataclass(eq=False)
class SolveResult:
    """Best assignment over all reads, with per-read energies for diagnostics."""

    bits: np.ndarray
    energy: float
    read_energies: np.ndarray
    wall_time: float
    reads: int


@njit(cache=True, inline="always")
def _next_u64(state):
    state = state + _U64_PHI
    z = state
    z = (z ^ (z >> np.uint64(30))) * _U64_M1
    z = (z ^ (z >> np.uint64(27))) * _U64_M2
    z = z ^ (z >> np.uint64(31))
    return state, z


@njit(cache=True, inline="always")
def _next_uniform(state):
    state, z = _next_u64(state)
    return state, float(z >> np.uint64(11)) * _INV_2_53


@njit(cache=True)
def _recompute_fields(diag, indptr, indices, weights, b, f):
    n = diag.size
    for u in range(n):
        fu = diag[u]
        for e in range(indptr[u], indptr[u + 1]):
            if b[indices[e]] == 1:
                fu += weights[e]
        f[u] = fu
    energy = 0.0
    for u in range(n):
        if b[u] == 1:
            energy += diag[u]
            for e in range(indptr[u], indptr[u + 1]):
                v = indices[e]
                if v > u and b[v] == 1:
                    energy += weights[e]
    return energy


@njit(cache=True)
def _sa_kernel(diag, indptr, indices, weights, betas, reads, master_seed):
    n = diag.size
    sweeps = betas.size
    out_bits = np.zeros((reads, n), dtype=np.uint8)
    tracked = np.zeros(reads, dtype=np.float64)
    f = np.zeros(n, dtype=np.float64)
    b = np.zeros(n, dtype=np.uint8)
    for r in range(reads):
        state = master_seed ^ (np.uint64(r + 1) * _U64_PHI)
        state, _ = _next_u64(state)
        for i in range(n):
            state, u = _next_uniform(state)
            b[i] = 1 if u < 0.5 else 0
        _recompute_fields(diag, indptr, indices, weights, b, f)
        for s in range(sweeps):
            beta = betas[s]
            for i in range(n):
                delta = (1.0 - 2.0 * b[i]) * f[i]
                accept = delta <= 0.0
                if not accept and beta * delta < 45.0:
                    # exp(-45) < 2**-53: larger deltas can never be accepted
                    state, u = _next_uniform(state)
                    accept = u < np.exp(-beta * delta)
                if accept:
                    step = 1.0 - 2.0 * b[i]
                    b[i] = 1 - b[i]
                    for e in range(indptr[i], indptr[i + 1]):
                        f[indices[e]] += weights[e] * step
        # resync fields and energy once, then zero-temperature polish:
        # descend until no single flip improves (few flips, so the
        # incrementally tracked energy stays within float drift tolerance)
        energy = _recompute_fields(diag, indptr, indices, weights, b, f)
        improved = True
        polish = 0
        while improved and polish < 10 * (sweeps + 1):
            improved = False
            polish += 1
            for i in range(n):
                delta = (1.0 - 2.0 * b[i]) * f[i]
                if delta < 0.0:
                    step = 1.0 - 2.0 * b[i]
                    b[i] = 1 - b[i]
                    energy += delta
                    for e in range(indptr[i], indptr[i + 1]):
                        f[indices[e]] += weights[e] * step
                    improved = True
        out_bits[r] = b
        tracked[r] = energy
    return out_bits, tracked


@njit(cache=True)
def _gray_kernel(diag, indptr, indices, weights):
    n = diag.size
    b = np.zeros(n, dtype=np.uint8)
    f = diag.copy()
    energy = 0.0
    best_energy = 0.0
    best = b.copy()
    total = np.int64(1) << np.int64(n)
    for t in range(1, total):
        i = 0
        tt = t
        while (tt & 1) == 0:
            tt >>= 1
            i += 1
        step = 1.0 - 2.0 * b[i]
        energy += step * f[i]
        b[i] = 1 - b[i]
        for e in range(indptr[i], indptr[i + 1]):
            f[indices[e]] += weights[e] * step
        if (t & _GRAY_RESYNC_MASK) == 0:
            energy = _recompute_fields(diag, indptr, indices, weights, b, f)
        if energy < best_energy:
            best_energy = energy
            best[:] = b
        elif energy == best_energy:
            for u in range(n):
                if b[u] != best[u]:
                    if b[u] < best[u]:
                        best[:] = b
                    break
    return best, energy


def _drift_guard(tracked, canonical):
    tol = 1e-9 * max(1.0, abs(canonical))
    if abs(tracked - canonical) > tol:
        raise RuntimeError(
            f"incremental energy drifted: tracked {tracked!r} vs "
            f"recomputed {canonical!r}"
        )


def solve_exhaustive(model, max_bits=24):
    """Global minimum by Gray-code enumeration of all 2**n assignments.

    Ties break toward the lexicographically smallest bit sequence. Refuses
    models with more than ``max_bits`` variables.
    """
    n = model.num_vars
    if n > max_bits:
        raise ValueError(
            f"model has {n} variables, exceeding the exhaustive cap of {max_bits}; "
            "use solve_sa instead"
        )
    start = time.perf_counter()
    if n == 0:
        bits = np.zeros(0, dtype=np.uint8)
        energy = float(model.offset)
        return SolveResult(bits, energy, np.array([energy]), time.perf_counter() - start, 1)
    diag, indptr, indices, weights = model.adjacency()
    best, final_tracked = _gray_kernel(diag, indptr, indices, weights)
    # final Gray state has only the top bit set; rebuild it for the guard
    final_state = np.zeros(n, dtype=np.uint8)
    final_state[n - 1] = 1
    _drift_guard(final_tracked + model.offset, evaluate_qubo(model, final_state))
    energy = evaluate_qubo(model, best)
    return SolveResult(best, energy, np.array([energy]), time.perf_counter() - start, 1)


def solve_sa(model, schedule=AnnealSchedule()):
    """Single-flip Metropolis annealing; deterministic given (model, schedule).

    Each read restarts from a fresh random assignment drawn from a per-read
    sub-stream of the schedule seed, sweeps all variables in fixed order per
    inverse temperature, and reports its final state. The result is the best
    read; per-read energies are recomputed canonically.
    """
    if not isinstance(schedule, AnnealSchedule):
        raise TypeError("schedule must be an AnnealSchedule")
    start = time.perf_counter()
    n = model.num_vars
    if n == 0:
        energy = float(model.offset)
        return SolveResult(
            np.zeros(0, dtype=np.uint8),
            energy,
            np.full(schedule.reads, energy),
            time.perf_counter() - start,
            schedule.reads,
        )
    diag, indptr, indices, weights = model.adjacency()
    bits, tracked = _sa_kernel(
        diag, indptr, indices, weights,
        schedule.betas(), schedule.reads, np.uint64(schedule.seed),
    )
    read_energies = np.array([evaluate_qubo(model, bits[r]) for r in range(schedule.reads)])
    for r in range(schedule.reads):
        _drift_guard(tracked[r] + model.offset, read_energies[r])
    best = int(np.argmin(read_energies))
    return SolveResult(
        bits[best].copy(),
        float(read_energies[best]),
        read_energies,
        time.perf_counter() - start,
        schedule.reads,
    )


def flip_delta(model, bits, i):
    """Energy change from flipping bit i, in O(degree of i)."""
    b = np.asarray(bits)
    if b.shape != (model.num_vars,):
        raise ValueError("assignment length mismatch")
    if not (0 <= i < model.num_vars):
        raise IndexError(f"variable {i} out of range for {model.num_vars} variables")
    diag, indptr, indices, weights = model.adjacency()
    field = diag[i]
    lo, hi = indptr[i], indptr[i + 1]
    neighbors = indices[lo:hi]
    field += float(weights[lo:hi] @ (b[neighbors] != 0))
    return float((1.0 - 2.0 * (b[i] != 0)) * field)
