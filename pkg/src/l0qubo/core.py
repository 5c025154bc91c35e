"""Core domain types: quantizers, complex-to-real lifting, sparse instances.

Everything downstream (QUBO compilation, solvers, baselines) works on real
quadratic forms, so the complex observation model is lifted to stacked real
systems here, exactly (no approximation).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Quantizer",
    "SparseSignal",
    "SparseInstance",
    "MultiShotInstance",
    "realify_for_real_signal",
    "realify_for_complex_signal",
    "lift_complex_columns",
    "fold_lifted",
    "support",
]

_MAX_ENUM_BITS = 24  # zero-uniqueness is checked by full enumeration


def _require_finite(name, a):
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite entries")


class Quantizer:
    """K-bit code for signal amplitudes: value = sum_k weights[k] * bit_k.

    The constructor enumerates all 2**K bit patterns and verifies that the
    all-zero pattern is the only one decoding to exactly 0, so a decoded
    entry is zero if and only if all of its bits are zero. That property is
    what lets the bit-product expansion of the l0 norm count nonzeros.

    Parameters
    ----------
    weights : array_like
        K finite weights, not all zero.
    """

    def __init__(self, weights):
        w = np.asarray(weights, dtype=float)
        if w.ndim != 1 or w.size < 1:
            raise ValueError("weights must be a non-empty 1-D sequence")
        _require_finite("weights", w)
        if not np.any(w != 0.0):
            raise ValueError("weights must not be all zero")
        if w.size > _MAX_ENUM_BITS:
            raise ValueError(
                f"bit length {w.size} exceeds the enumeration limit {_MAX_ENUM_BITS}"
            )
        self.weights = w
        self.weights.setflags(write=False)
        self.bit_length = int(w.size)

        k = self.bit_length
        codes = np.arange(1 << k, dtype=np.int64)
        patterns = ((codes[:, None] >> np.arange(k)) & 1).astype(np.uint8)
        grid = patterns @ w
        zero_patterns = np.count_nonzero(grid == 0.0)
        if zero_patterns != 1:
            raise ValueError(
                f"weights violate zero-uniqueness: {zero_patterns} of {1 << k} "
                "patterns decode to 0"
            )
        # Order candidates by (|value|, value, code) so that argmin over
        # |value - target| resolves ties toward the smaller decoded magnitude.
        order = np.lexsort((codes, grid, np.abs(grid)))
        self._grid = grid[order]
        self._patterns = patterns[order]
        self._grid.setflags(write=False)
        self._patterns.setflags(write=False)

    @classmethod
    def unsigned(cls, bit_length):
        """Weights 2**-k for k = 1..K: grid over [0, 1 - 2**-K]."""
        return cls(0.5 ** np.arange(1, bit_length + 1))

    @classmethod
    def signed(cls, bit_length):
        """Same grid but with the leading weight negated: range [-0.5, 0.5 - 2**-K]."""
        w = 0.5 ** np.arange(1, bit_length + 1)
        w[0] = -w[0]
        return cls(w)

    @property
    def grid(self):
        """All 2**K decodable values (unsorted; paired with internal patterns)."""
        return self._grid

    def decode(self, bits):
        """Weighted sum of a length-K bit pattern."""
        b = np.asarray(bits)
        if b.shape != (self.bit_length,):
            raise ValueError(
                f"expected {self.bit_length} bits, got shape {b.shape}"
            )
        return float(b.astype(float) @ self.weights)

    def quantize(self, value):
        """Bit pattern decoding nearest to ``value``.

        Ties break toward the pattern with smaller decoded magnitude, so a
        value exactly between 0 and the first grid step quantizes to zero.
        """
        if not np.isfinite(value):
            raise ValueError("value must be finite")
        idx = int(np.argmin(np.abs(self._grid - value)))
        return self._patterns[idx].copy()

    def snap(self, values):
        """Nearest-grid value for each entry (vectorized quantize-then-decode)."""
        v = np.asarray(values, dtype=float)
        _require_finite("values", v)
        idx = np.argmin(np.abs(v[..., None] - self._grid), axis=-1)
        return self._grid[idx]

    def __repr__(self):
        return f"Quantizer(weights={self.weights.tolist()})"


def support(v, threshold=0.0):
    """Indices with |v_i| strictly above ``threshold``.

    The inequality is strict, so ``support(v, 0.0)`` is the exact nonzero set
    and an entry sitting exactly at the detection threshold does not count.
    """
    if threshold < 0:
        raise ValueError("threshold must be >= 0")
    v = np.asarray(v)
    _require_finite("v", v)
    return set(int(i) for i in np.flatnonzero(np.abs(v) > threshold))


@dataclass(frozen=True, eq=False)
class SparseSignal:
    """Real signal vector; support is derived from the values, never stored."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1:
            raise ValueError("signal values must be 1-D")
        _require_finite("values", v)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def length(self):
        return int(self.values.size)

    @property
    def support(self):
        return support(self.values, 0.0)


def realify_for_real_signal(A, x):
    """Stack real/imaginary parts so ||x - A z||^2 is a real form for real z.

    Returns ``(A_r, x_r)`` with ``A_r = [Re A; Im A]`` (2N x M) and
    ``x_r = [Re x; Im x]``; for every real z the complex residual norm of
    (A, x) equals the real residual norm of (A_r, x_r) exactly.
    """
    A = np.asarray(A)
    x = np.asarray(x)
    if A.ndim != 2 or x.ndim != 1 or x.size != A.shape[0]:
        raise ValueError(f"inconsistent shapes A {A.shape}, x {x.shape}")
    _require_finite("A", A)
    _require_finite("x", x)
    A_r = np.vstack([A.real.astype(float), A.imag.astype(float)])
    x_r = np.concatenate([x.real.astype(float), x.imag.astype(float)])
    return A_r, x_r


def realify_for_complex_signal(A):
    """Block lifting [[Re A, -Im A], [Im A, Re A]] (2N x 2M).

    A complex coefficient vector z = u + iv maps to the stacked real vector
    (u; v): column i pairs with column M+i, and the lifted residual norm
    equals the complex one exactly.
    """
    A = np.asarray(A)
    if A.ndim != 2:
        raise ValueError("A must be 2-D")
    _require_finite("A", A)
    re = A.real.astype(float)
    im = A.imag.astype(float)
    return np.block([[re, -im], [im, re]])


def lift_complex_columns(X):
    """Stack each complex column x into [Re x; Im x] (2N x L real)."""
    X = np.asarray(X)
    if X.ndim == 1:
        X = X[:, None]
    return np.vstack([X.real.astype(float), X.imag.astype(float)])


def fold_lifted(z):
    """Inverse of the block lifting: (2M,) or (2M, L) real -> complex M(-row)."""
    z = np.asarray(z, dtype=float)
    n = z.shape[0]
    if n % 2 != 0:
        raise ValueError("lifted array must have an even leading dimension")
    m = n // 2
    return z[:m] + 1j * z[m:]


def _check_instance_residual(what, x, predicted):
    scale = max(1.0, float(np.linalg.norm(x)))
    err = float(np.linalg.norm(x - predicted))
    if err > 1e-12 * scale:
        raise ValueError(
            f"{what} is inconsistent: ||x - (A z + n)|| = {err:.3e} "
            f"exceeds 1e-12 relative tolerance"
        )


@dataclass(eq=False)
class SparseInstance:
    """One observation x = A z + n with the generating pieces kept for diagnostics."""

    operator: np.ndarray  # (N, M) complex
    observation: np.ndarray  # (N,) complex
    truth: SparseSignal
    noise: np.ndarray  # (N,) complex, all-zero when noiseless

    def __post_init__(self):
        A = np.asarray(self.operator, dtype=complex)
        x = np.asarray(self.observation, dtype=complex)
        n = np.asarray(self.noise, dtype=complex)
        if A.ndim != 2:
            raise ValueError("operator must be 2-D")
        if x.shape != (A.shape[0],) or n.shape != x.shape:
            raise ValueError("observation/noise shape does not match operator rows")
        if self.truth.length != A.shape[1]:
            raise ValueError("truth length does not match operator columns")
        _require_finite("operator", A)
        _require_finite("observation", x)
        _check_instance_residual(
            "SparseInstance", x, A @ self.truth.values + n
        )
        self.operator, self.observation, self.noise = A, x, n

    @property
    def shape(self):
        return self.operator.shape


@dataclass(eq=False)
class MultiShotInstance:
    """S observations of one sparse vector with per-shot amplitude fluctuation.

    Every shot signal shares the support of the original vector: the
    fluctuation is proportional to each nonzero value, so zeros stay zero.
    """

    operator: np.ndarray  # (N, M) complex
    shots: np.ndarray  # (N, S) complex observation columns
    truth: SparseSignal  # original vector zeta
    shot_signals: np.ndarray  # (M, S) real perturbed signals
    noise: np.ndarray  # (N, S) complex

    def __post_init__(self):
        A = np.asarray(self.operator, dtype=complex)
        X = np.asarray(self.shots, dtype=complex)
        Z = np.asarray(self.shot_signals, dtype=float)
        E = np.asarray(self.noise, dtype=complex)
        N, M = A.shape
        if X.ndim != 2 or X.shape[0] != N:
            raise ValueError("shots must be (N, S)")
        S = X.shape[1]
        if Z.shape != (M, S) or E.shape != (N, S):
            raise ValueError("shot_signals/noise shapes inconsistent with (M, S)/(N, S)")
        base = self.truth.support
        for s in range(S):
            if support(Z[:, s], 0.0) != base:
                raise ValueError(f"shot {s} does not share the original support")
        _check_instance_residual("MultiShotInstance", X, A @ Z + E)
        self.operator, self.shots, self.shot_signals, self.noise = A, X, Z, E

    @property
    def num_shots(self):
        return int(self.shots.shape[1])
