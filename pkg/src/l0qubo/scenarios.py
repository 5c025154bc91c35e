"""Synthetic direction-of-arrival problems: steering matrices and instances.

The generators take an explicit seeded ``numpy.random.Generator`` so every
instance is reproducible; no module-level random state exists.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass

import numpy as np

from .core import MultiShotInstance, SparseInstance, SparseSignal, _require_finite

__all__ = [
    "DoaGrid",
    "GenConfig",
    "steering_matrix_uniform",
    "steering_matrix_arcsin",
    "gen_sparse_signal",
    "gen_single_instance",
    "gen_multishot",
    "svd_preprocess",
    "instance_to_json",
    "instance_from_json",
    "save_instance",
    "load_instance",
]

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class DoaGrid:
    """Uniform linear array geometry plus the azimuth grid layout.

    ``kind="arcsin"`` places grid point m at arcsin(2m/M - 1), which makes
    the steering matrix a sign-modulated top slice of the M-point DFT;
    ``kind="uniform-angle"`` spaces angles evenly over [-pi/2, pi/2).
    """

    sensors: int
    grid_size: int
    spacing: float = 0.5  # element distance over wavelength (d / lambda)
    kind: str = "arcsin"

    def __post_init__(self):
        if self.sensors < 1 or self.grid_size < 1:
            raise ValueError("sensors and grid_size must be >= 1")
        if not np.isfinite(self.spacing) or self.spacing <= 0:
            raise ValueError("spacing must be positive and finite")
        if self.kind not in ("arcsin", "uniform-angle"):
            raise ValueError(f"unknown grid kind {self.kind!r}")
        if self.sensors >= self.grid_size:
            warnings.warn(
                f"N={self.sensors} >= M={self.grid_size}: the recovery problem "
                "is not underdetermined",
                stacklevel=2,
            )

    def angles(self):
        m = np.arange(self.grid_size)
        if self.kind == "arcsin":
            return np.arcsin(2.0 * m / self.grid_size - 1.0)
        return (m / self.grid_size - 0.5) * np.pi


def steering_matrix_uniform(grid):
    """Entries exp(2 pi i n (d/lambda) sin(phi_m)), sensors n = 0..N-1."""
    n = np.arange(grid.sensors)[:, None]
    phi = grid.angles()[None, :]
    return np.exp(2j * np.pi * n * grid.spacing * np.sin(phi))


def steering_matrix_arcsin(sensors, grid_size):
    """Closed form for the arcsin grid at half-wavelength spacing.

    Entries (-1)**n * exp(2 pi i n m / M): the top N rows of the M-point DFT
    matrix with row-dependent sign, identical to ``steering_matrix_uniform``
    on the arcsin grid.
    """
    if sensors < 1 or grid_size < 1:
        raise ValueError("sensors and grid_size must be >= 1")
    n = np.arange(sensors)[:, None]
    m = np.arange(grid_size)[None, :]
    return ((-1.0) ** n) * np.exp(2j * np.pi * n * m / grid_size)


@dataclass(frozen=True)
class GenConfig:
    """Instance generation settings.

    Nonzero values are uniform on [0, 1]. ``grid_snap`` additionally snaps
    them onto a quantizer grid (values that would snap to zero are lifted to
    the smallest positive grid point so the support is preserved); used by
    noise-free benchmarks where the quantization error should vanish.
    """

    M: int = 32
    N: int = 8
    k: int | None = None  # nonzero count; experiments sweep it instead
    sigma: float = 0.0  # observation noise std per real/imag component
    shots: int = 16
    rho: float = 0.1  # multi-shot amplitude fluctuation (std = rho * value)
    grid: str = "arcsin"
    spacing: float = 0.5
    grid_snap: bool = False

    def __post_init__(self):
        if self.M < 1 or self.N < 1 or self.shots < 1:
            raise ValueError("M, N, shots must be >= 1")
        if self.k is not None and not (0 <= self.k <= self.M):
            raise ValueError("k must satisfy 0 <= k <= M")
        if not (np.isfinite(self.sigma) and self.sigma >= 0):
            raise ValueError("sigma must be finite and >= 0")
        if not (np.isfinite(self.rho) and self.rho >= 0):
            raise ValueError("rho must be finite and >= 0")

    def doa_grid(self):
        return DoaGrid(self.N, self.M, self.spacing, self.grid)

    def operator(self):
        if self.grid == "arcsin" and self.spacing == 0.5:
            return steering_matrix_arcsin(self.N, self.M)
        return steering_matrix_uniform(self.doa_grid())


def gen_sparse_signal(M, k, rng, snap_to=None):
    """k distinct uniformly-chosen indices with i.i.d. uniform [0, 1] values.

    With ``snap_to`` set, values are snapped to that quantizer's grid and
    kept strictly positive.
    """
    if not (0 <= k <= M):
        raise ValueError(f"need 0 <= k <= M; got k={k}, M={M}")
    values = np.zeros(M)
    idx = rng.choice(M, size=k, replace=False)
    vals = rng.random(k)
    if snap_to is not None and k > 0:
        grid = snap_to.grid
        positive_min = float(np.min(grid[grid > 0]))
        vals = snap_to.snap(vals)
        vals[vals == 0.0] = positive_min
    values[idx] = vals
    return SparseSignal(values)


def _complex_noise(shape, sigma, rng):
    if sigma == 0.0:
        return np.zeros(shape, dtype=complex)
    return sigma * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def gen_single_instance(A, signal, sigma, rng):
    """Observation x = A z + n with i.i.d. Gaussian noise per component."""
    A = np.asarray(A, dtype=complex)
    noise = _complex_noise(A.shape[0], sigma, rng)
    x = A @ signal.values + noise
    return SparseInstance(A, x, signal, noise)


def gen_multishot(A, zeta, shots, rho, sigma, rng):
    """S observations of per-shot perturbed copies of ``zeta``.

    Shot s perturbs each nonzero entry by Gaussian noise with standard
    deviation rho times that entry, so zeros stay exactly zero and every
    shot shares the original support.
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    A = np.asarray(A, dtype=complex)
    M = zeta.length
    nz = sorted(zeta.support)
    Z = np.tile(zeta.values[:, None], (1, shots))
    for s in range(shots):
        if nz:
            jitter = rng.standard_normal(len(nz)) * (rho * zeta.values[nz])
            Z[nz, s] = zeta.values[nz] + jitter
    noise = _complex_noise((A.shape[0], shots), sigma, rng)
    X = A @ Z + noise
    return MultiShotInstance(A, X, zeta, Z, noise)


def svd_preprocess(X, L):
    """L leading left singular vectors of the observation matrix, orthonormal."""
    X = np.asarray(X, dtype=complex)
    if X.ndim != 2:
        raise ValueError("X must be (N, S)")
    _require_finite("X", X)
    if not (1 <= L <= min(X.shape)):
        raise ValueError(f"need 1 <= L <= min(N, S) = {min(X.shape)}; got {L}")
    try:
        U, _, _ = np.linalg.svd(X)
    except np.linalg.LinAlgError as exc:
        raise ValueError(f"SVD failed: {exc}") from exc
    return U[:, :L]


def svd_scaled_columns(X, L):
    """Left singular vectors weighted by their singular values, leading one unit.

    Column l is u_l * (s_l / s_1), so directions below the shot matrix's
    numerical rank get (near-)zero weight instead of polluting the group
    regression as unit-norm noise; the leading column keeps unit scale so
    quantizer ranges are unaffected. Zero observations yield zero columns.
    """
    X = np.asarray(X, dtype=complex)
    if X.ndim != 2:
        raise ValueError("X must be (N, S)")
    _require_finite("X", X)
    if not (1 <= L <= min(X.shape)):
        raise ValueError(f"need 1 <= L <= min(N, S) = {min(X.shape)}; got {L}")
    try:
        U, s, _ = np.linalg.svd(X)
    except np.linalg.LinAlgError as exc:
        raise ValueError(f"SVD failed: {exc}") from exc
    scale = s[:L] / s[0] if s[0] > 0 else np.zeros(L)
    return U[:, :L] * scale[None, :]


# ---------------------------------------------------------------------------
# replay documents

def _encode_complex(a):
    a = np.asarray(a, dtype=complex)
    return np.stack([a.real, a.imag], axis=-1).tolist()


def _decode_complex(obj):
    arr = np.asarray(obj, dtype=float)
    return arr[..., 0] + 1j * arr[..., 1]


def instance_to_json(inst):
    """Versioned JSON document with complex entries as [re, im] pairs."""
    if isinstance(inst, SparseInstance):
        doc = {
            "schema_version": SCHEMA_VERSION,
            "kind": "single",
            "operator": _encode_complex(inst.operator),
            "observation": _encode_complex(inst.observation),
            "truth": inst.truth.values.tolist(),
            "noise": _encode_complex(inst.noise),
        }
    elif isinstance(inst, MultiShotInstance):
        doc = {
            "schema_version": SCHEMA_VERSION,
            "kind": "multishot",
            "operator": _encode_complex(inst.operator),
            "shots": _encode_complex(inst.shots),
            "truth": inst.truth.values.tolist(),
            "shot_signals": inst.shot_signals.tolist(),
            "noise": _encode_complex(inst.noise),
        }
    else:
        raise TypeError(f"cannot serialize {type(inst).__name__}")
    return json.dumps(doc)


def instance_from_json(text):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"invalid instance document: {exc}") from exc
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ValueError(f"unsupported schema_version {version!r}")
    kind = doc.get("kind")
    try:
        if kind == "single":
            return SparseInstance(
                _decode_complex(doc["operator"]),
                _decode_complex(doc["observation"]),
                SparseSignal(np.asarray(doc["truth"], dtype=float)),
                _decode_complex(doc["noise"]),
            )
        if kind == "multishot":
            return MultiShotInstance(
                _decode_complex(doc["operator"]),
                _decode_complex(doc["shots"]),
                SparseSignal(np.asarray(doc["truth"], dtype=float)),
                np.asarray(doc["shot_signals"], dtype=float),
                _decode_complex(doc["noise"]),
            )
    except KeyError as exc:
        raise ValueError(f"instance document missing key {exc}") from exc
    raise ValueError(f"unknown instance kind {kind!r}")


def save_instance(inst, path):
    with open(path, "w") as fh:
        fh.write(instance_to_json(inst) + "\n")


def load_instance(path):
    with open(path) as fh:
        return instance_from_json(fh.read())
