"""Compile quantized l0-regularized regression into an exact QUBO.

The l0 norm of a K-bit-quantized signal is a product expansion
``sum_i (1 - prod_k (1 - b_ik))``; products of more than two bits are
reduced to quadratic form with chained auxiliary variables, each chain link
enforced by the penalty gadget ``p(a, b, c) = 3c + ab - 2ac - 2bc`` which is
nonnegative and vanishes exactly when ``c = a*b``. With penalty weights
above 1 the minimum over auxiliaries reproduces the original objective
exactly, because faking a zero-indicator can gain at most 1 from the l0 term
while any violated gadget costs at least the penalty weight.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass

import numpy as np

from .core import Quantizer, SparseSignal, _require_finite

__all__ = [
    "QuboModel",
    "IsingModel",
    "BuildParams",
    "SignalBit",
    "ChainAux",
    "RowAux",
    "VariableRegistry",
    "Violation",
    "penalty_terms",
    "build_l0_qubo",
    "build_group_l0_qubo",
    "evaluate_qubo",
    "evaluate_l0_objective",
    "qubo_to_ising",
    "ising_to_qubo",
    "evaluate_ising",
    "decode_solution",
    "constraint_violations",
    "export_qubo_file",
    "import_qubo_file",
    "QuboFileError",
]


@dataclass(eq=False)
class QuboModel:
    """Upper-triangular coefficient table over binary variables plus offset.

    Diagonal entries are the linear terms (bit**2 == bit); exact zeros are
    never stored. Instances are treated as immutable once built.
    """

    num_vars: int
    coeffs: dict
    offset: float = 0.0

    def __post_init__(self):
        for (i, j), v in self.coeffs.items():
            if not (0 <= i <= j < self.num_vars):
                raise ValueError(f"coefficient index ({i}, {j}) out of range")
            if v == 0.0 or not np.isfinite(v):
                raise ValueError(f"coefficient ({i}, {j}) = {v} must be finite nonzero")
        self._arrays = None
        self._adjacency = None

    def arrays(self):
        """(diag, rows, cols, vals) in sorted (i, j) order; cached.

        This fixed ordering is the canonical energy summation order, shared
        by `evaluate_qubo` and the solvers so that reported energies agree
        bit-for-bit.
        """
        if self._arrays is None:
            diag = np.zeros(self.num_vars)
            rows, cols, vals = [], [], []
            for (i, j) in sorted(self.coeffs):
                v = self.coeffs[(i, j)]
                if i == j:
                    diag[i] = v
                else:
                    rows.append(i)
                    cols.append(j)
                    vals.append(v)
            self._arrays = (
                diag,
                np.asarray(rows, dtype=np.int64),
                np.asarray(cols, dtype=np.int64),
                np.asarray(vals, dtype=float),
            )
        return self._arrays

    def adjacency(self):
        """CSR-style symmetric neighbor lists (indptr, indices, weights) + diag."""
        if self._adjacency is None:
            diag, rows, cols, vals = self.arrays()
            n = self.num_vars
            counts = np.zeros(n + 1, dtype=np.int64)
            for i, j in zip(rows, cols):
                counts[i + 1] += 1
                counts[j + 1] += 1
            indptr = np.cumsum(counts)
            indices = np.zeros(indptr[-1], dtype=np.int64)
            weights = np.zeros(indptr[-1], dtype=float)
            cursor = indptr[:-1].copy()
            for i, j, v in zip(rows, cols, vals):
                indices[cursor[i]] = j
                weights[cursor[i]] = v
                cursor[i] += 1
                indices[cursor[j]] = i
                weights[cursor[j]] = v
                cursor[j] += 1
            self._adjacency = (diag, indptr, indices, weights)
        return self._adjacency

    @property
    def num_entries(self):
        return len(self.coeffs)


def evaluate_qubo(m, bits):
    """Energy of a bit assignment: sum of coefficients over set bits + offset."""
    b = np.asarray(bits, dtype=float)
    if b.shape != (m.num_vars,):
        raise ValueError(f"assignment length {b.shape} != {m.num_vars} variables")
    diag, rows, cols, vals = m.arrays()
    return float(diag @ b + vals @ (b[rows] * b[cols]) + m.offset)


@dataclass(eq=False)
class IsingModel:
    """Spin form H(s) = -sum J_ij s_i s_j - sum h_i s_i + offset, s in {-1, 1}."""

    num_vars: int
    couplings: dict  # (i, j) with i < j
    fields: np.ndarray
    offset: float = 0.0


def evaluate_ising(m, spins):
    s = np.asarray(spins, dtype=float)
    if s.shape != (m.num_vars,):
        raise ValueError("spin assignment length mismatch")
    e = m.offset - float(m.fields @ s)
    for (i, j), jij in sorted(m.couplings.items()):
        e -= jij * s[i] * s[j]
    return e


def qubo_to_ising(m):
    """Exact change of variables b = (1 - s) / 2; energies match per assignment."""
    n = m.num_vars
    h = np.zeros(n)
    couplings = {}
    offset = m.offset
    for (i, j), q in m.coeffs.items():
        if i == j:
            offset += q / 2.0
            h[i] += q / 2.0
        else:
            offset += q / 4.0
            h[i] += q / 4.0
            h[j] += q / 4.0
            couplings[(i, j)] = couplings.get((i, j), 0.0) - q / 4.0
    return IsingModel(n, couplings, h, offset)


def ising_to_qubo(m):
    """Inverse conversion via s = 1 - 2b; round-trips reproduce coefficients."""
    table = _CoeffTable(m.num_vars)
    table.add_offset(m.offset - float(np.sum(m.fields)))
    for i, h in enumerate(m.fields):
        table.add_linear(i, 2.0 * h)
    for (i, j), jij in m.couplings.items():
        table.add_offset(-jij)
        table.add_linear(i, 2.0 * jij)
        table.add_linear(j, 2.0 * jij)
        table.add_pair(i, j, -4.0 * jij)
    return table.build()


@dataclass(frozen=True)
class BuildParams:
    """Regularization and penalty weights for the QUBO compilation."""

    gamma0: float = 0.001
    lambda_c: float = 1.5
    lambda_d: float = 1.5

    def __post_init__(self):
        if not (self.gamma0 > 0 and self.lambda_c > 0 and self.lambda_d > 0):
            raise ValueError("gamma0, lambda_c, lambda_d must all be > 0")
        if self.lambda_c < 1.0 or self.lambda_d < 1.0:
            warnings.warn(
                "penalty weight below 1: one unit of l0 gain can pay for a "
                "violated gadget, so the QUBO may no longer match the l0 objective",
                stacklevel=2,
            )


# ---------------------------------------------------------------------------
# variable catalog

@dataclass(frozen=True)
class SignalBit:
    row: int
    col: int
    bit: int


@dataclass(frozen=True)
class ChainAux:
    row: int
    col: int
    pos: int


@dataclass(frozen=True)
class RowAux:
    row: int
    pos: int


@dataclass(eq=False)
class VariableRegistry:
    """Maps QUBO variable indices to their roles.

    Signal bits come first in index order, then per-entry chain auxiliaries,
    then per-row auxiliaries (group problems only). ``gadgets`` records every
    penalty-enforced identity ``c = a*b`` for constraint checking.
    """

    kind: str  # "single" | "group"
    num_rows: int  # coefficient rows M (already lifted where applicable)
    num_cols: int  # real observation columns (1 for single)
    quantizer: Quantizer
    variables: tuple
    gadgets: tuple  # ((kindtag, row, col, pos), a_lit, b_lit, c_index) entries

    @property
    def num_vars(self):
        return len(self.variables)

    def bit_index(self, row, col, k):
        K = self.quantizer.bit_length
        return (row * self.num_cols + col) * K + k

    def to_dict(self):
        return {
            "kind": self.kind,
            "num_rows": self.num_rows,
            "num_cols": self.num_cols,
            "weights": [float(w) for w in self.quantizer.weights],
        }

    @classmethod
    def from_dict(cls, d):
        q = Quantizer(d["weights"])
        return _make_registry(d["kind"], d["num_rows"], d["num_cols"], q)


def _make_registry(kind, num_rows, num_cols, quantizer):
    """Rebuild the catalog and gadget list for a given problem shape."""
    K = quantizer.bit_length
    M, L = num_rows, num_cols
    variables = []
    for i in range(M):
        for l in range(L):
            for k in range(K):
                variables.append(SignalBit(i, l, k))

    def bit(i, l, k):
        return (i * L + l) * K + k

    gadgets = []
    if kind == "single":
        if L != 1:
            raise ValueError("single problems have exactly one observation column")
        base = M * K
        chain_len = max(0, K - 2)
        for i in range(M):
            for p in range(chain_len):
                variables.append(ChainAux(i, 0, p))
        for i in range(M):
            for p in range(chain_len):
                c = base + i * chain_len + p
                if p == 0:
                    a_lit = (bit(i, 0, 1), True)
                    b_lit = (bit(i, 0, 0), True)
                else:
                    a_lit = (bit(i, 0, p + 1), True)
                    b_lit = (base + i * chain_len + p - 1, False)
                gadgets.append((("chain", i, 0, p), a_lit, b_lit, c))
    elif kind == "group":
        base = M * L * K
        chain_len = max(0, K - 1)
        for i in range(M):
            for l in range(L):
                for p in range(chain_len):
                    variables.append(ChainAux(i, l, p))
        row_len = max(0, L - 1)
        row_base = base + M * L * chain_len
        for i in range(M):
            for p in range(row_len):
                variables.append(RowAux(i, p))

        def chain(i, l, p):
            return base + (i * L + l) * chain_len + p

        def entry_zero_lit(i, l):
            # literal that is 1 exactly when decoded entry (i, l) is zero
            if K == 1:
                return (bit(i, l, 0), True)
            return (chain(i, l, chain_len - 1), False)

        for i in range(M):
            for l in range(L):
                for p in range(chain_len):
                    c = chain(i, l, p)
                    if p == 0:
                        a_lit = (bit(i, l, 1), True)
                        b_lit = (bit(i, l, 0), True)
                    else:
                        a_lit = (bit(i, l, p + 1), True)
                        b_lit = (chain(i, l, p - 1), False)
                    gadgets.append((("chain", i, l, p), a_lit, b_lit, c))
        for i in range(M):
            for p in range(row_len):
                d = row_base + i * row_len + p
                if p == 0:
                    a_lit = entry_zero_lit(i, 1)
                    b_lit = entry_zero_lit(i, 0)
                else:
                    a_lit = entry_zero_lit(i, p + 1)
                    b_lit = (row_base + i * row_len + p - 1, False)
                gadgets.append((("row", i, None, p), a_lit, b_lit, d))
    else:
        raise ValueError(f"unknown registry kind {kind!r}")

    return VariableRegistry(
        kind=kind,
        num_rows=M,
        num_cols=L,
        quantizer=quantizer,
        variables=tuple(variables),
        gadgets=tuple(gadgets),
    )


# ---------------------------------------------------------------------------
# coefficient accumulation

class _CoeffTable:
    def __init__(self, num_vars):
        self.num_vars = num_vars
        self.coeffs = {}
        self.offset = 0.0

    def add_offset(self, v):
        self.offset += v

    def add_linear(self, i, v):
        self.add_pair(i, i, v)

    def add_pair(self, i, j, v):
        if v == 0.0:
            return
        if i > j:
            i, j = j, i
        key = (int(i), int(j))
        self.coeffs[key] = self.coeffs.get(key, 0.0) + v

    def add_literal_product(self, a_lit, b_lit, v):
        """Accumulate v * La * Lb where each literal is x or (1 - x)."""
        (ia, na), (ib, nb) = a_lit, b_lit
        if ia == ib:
            # x*x = x, x*(1-x) = 0, (1-x)*(1-x) = 1-x
            if na != nb:
                return
            if na:
                self.add_offset(v)
                self.add_linear(ia, -v)
            else:
                self.add_linear(ia, v)
            return
        if na and nb:
            self.add_offset(v)
            self.add_linear(ia, -v)
            self.add_linear(ib, -v)
            self.add_pair(ia, ib, v)
        elif na:
            self.add_linear(ib, v)
            self.add_pair(ia, ib, -v)
        elif nb:
            self.add_linear(ia, v)
            self.add_pair(ia, ib, -v)
        else:
            self.add_pair(ia, ib, v)

    def add_penalty(self, a_lit, b_lit, c_index, weight):
        """weight * p(a, b, c) with p = 3c + ab - 2ac - 2bc; c is a plain variable."""
        c_lit = (c_index, False)
        ids = {a_lit[0], b_lit[0], c_index}
        if len(ids) != 3:
            raise ValueError("penalty gadget requires three distinct variables")
        self.add_linear(c_index, 3.0 * weight)
        self.add_literal_product(a_lit, b_lit, weight)
        self.add_literal_product(a_lit, c_lit, -2.0 * weight)
        self.add_literal_product(b_lit, c_lit, -2.0 * weight)

    def build(self):
        coeffs = {k: v for k, v in self.coeffs.items() if v != 0.0}
        return QuboModel(self.num_vars, coeffs, self.offset)


def penalty_terms(a_var, b_var, c_var, weight):
    """Standalone penalty gadget as a QuboModel over the given variable indices.

    The returned function is >= 0 on all 8 assignments and 0 exactly when
    c = a*b.
    """
    if weight <= 0:
        raise ValueError("penalty weight must be > 0")
    n = max(a_var, b_var, c_var) + 1
    table = _CoeffTable(n)
    table.add_penalty((a_var, False), (b_var, False), c_var, weight)
    return table.build()


# ---------------------------------------------------------------------------
# builders

def _add_fidelity(table, A, x, weights, col_block, gamma0):
    """(1/2 gamma0) * ||x - A_expanded b||^2 for the bits of one observation column.

    ``col_block(i)`` maps signal row i to the base index of its K bits.
    """
    R, M = A.shape
    K = weights.size
    expanded = np.repeat(A, K, axis=1) * np.tile(weights, M)  # (R, M*K)
    gram = expanded.T @ expanded
    lin = -2.0 * (expanded.T @ x)
    scale = 1.0 / (2.0 * gamma0)
    idx = np.concatenate([col_block(i) + np.arange(K) for i in range(M)])
    table.add_offset(scale * float(x @ x))
    for u in range(M * K):
        table.add_linear(idx[u], scale * (gram[u, u] + lin[u]))
        for v in range(u + 1, M * K):
            g = gram[u, v]
            if g != 0.0:
                table.add_pair(idx[u], idx[v], 2.0 * scale * g)


def _check_build_inputs(A, x_cols, quantizer, params):
    A = np.asarray(A, dtype=float)
    X = np.asarray(x_cols, dtype=float)
    if A.ndim != 2:
        raise ValueError("operator must be a 2-D real matrix")
    _require_finite("operator", A)
    _require_finite("observation", X)
    if X.shape[0] != A.shape[0]:
        raise ValueError(
            f"observation rows {X.shape[0]} do not match operator rows {A.shape[0]}"
        )
    if not isinstance(quantizer, Quantizer):
        raise TypeError("quantizer must be a Quantizer")
    if not isinstance(params, BuildParams):
        raise TypeError("params must be a BuildParams")
    return A, X, params


def build_l0_qubo(A_real, x_real, quantizer, params=BuildParams()):
    """Compile (1/2 gamma0)||x - A z||^2 + ||z||_0 over K-bit-quantized z.

    Variables: M*K signal bits plus M*(K-2) chain auxiliaries (none for
    K <= 2, where the zero-indicator product is already at most quadratic).
    For every assignment satisfying the chain identities the QUBO energy
    equals the l0 objective of the decoded signal exactly.
    """
    A, x, params = _check_build_inputs(A_real, x_real, quantizer, params)
    if x.ndim != 1:
        raise ValueError("x_real must be a vector; use build_group_l0_qubo for columns")
    M = A.shape[1]
    K = quantizer.bit_length
    reg = _make_registry("single", M, 1, quantizer)
    table = _CoeffTable(reg.num_vars)

    _add_fidelity(table, A, x, quantizer.weights, lambda i: i * K, params.gamma0)

    chain_len = max(0, K - 2)
    base = M * K
    for i in range(M):
        b = lambda k: (i * K + k, True)  # literal (1 - bit k)
        if K == 1:
            # 1 - (1 - b0) = b0
            table.add_linear(i * K, 1.0)
        elif K == 2:
            table.add_offset(1.0)
            table.add_literal_product(b(0), b(1), -1.0)
        else:
            last_c = base + i * chain_len + chain_len - 1
            table.add_offset(1.0)
            table.add_literal_product(
                (last_c, False), (i * K + K - 1, True), -1.0
            )
    for (_, a_lit, b_lit, c) in reg.gadgets:
        table.add_penalty(a_lit, b_lit, c, params.lambda_c)
    return table.build(), reg


def build_group_l0_qubo(A_real, x_cols, quantizer, params=BuildParams()):
    """Compile the multi-column objective with a row-wise group l0 term.

    Fidelity is the sum of per-column squared residuals against the shared
    operator. The group term builds a zero indicator per (row, column) with a
    full bit chain (K-1 auxiliaries, weighted lambda_c), then reduces the
    product across columns with a row chain (L-1 auxiliaries, lambda_d) and
    adds 1 - d_last per row, counting rows with any nonzero entry.
    """
    A, X, params = _check_build_inputs(A_real, x_cols, quantizer, params)
    if X.ndim == 1:
        X = X[:, None]
    L = X.shape[1]
    if L < 1:
        raise ValueError("at least one observation column required")
    M = A.shape[1]
    K = quantizer.bit_length
    reg = _make_registry("group", M, L, quantizer)
    table = _CoeffTable(reg.num_vars)

    for l in range(L):
        _add_fidelity(
            table, A, X[:, l], quantizer.weights,
            lambda i, l=l: (i * L + l) * K, params.gamma0,
        )

    chain_len = max(0, K - 1)
    base = M * L * K
    row_len = max(0, L - 1)
    row_base = base + M * L * chain_len

    def entry_zero_lit(i, l):
        if K == 1:
            return ((i * L + l) * K, True)
        return (base + (i * L + l) * chain_len + chain_len - 1, False)

    for (tag, a_lit, b_lit, c) in reg.gadgets:
        weight = params.lambda_c if tag[0] == "chain" else params.lambda_d
        table.add_penalty(a_lit, b_lit, c, weight)

    for i in range(M):
        if L == 1:
            lit = entry_zero_lit(i, 0)
            table.add_offset(1.0)
            table.add_literal_product(lit, (lit[0], lit[1]), -1.0)
        else:
            d_last = row_base + i * row_len + row_len - 1
            table.add_offset(1.0)
            table.add_linear(d_last, -1.0)
    return table.build(), reg


# ---------------------------------------------------------------------------
# evaluation / decoding / checking

def evaluate_l0_objective(A, x, z, gamma0):
    """(1/2 gamma0)||x - A z||^2 plus the number of nonzero entries of z.

    For matrix-valued z (group problems) the count is over nonzero rows. A
    real z of leading dimension 2M against a complex A is folded back to
    complex before evaluation (block-lifting convention).
    """
    if gamma0 <= 0:
        raise ValueError("gamma0 must be > 0")
    A = np.asarray(A)
    z = np.asarray(z)
    x = np.asarray(x)
    if np.iscomplexobj(A) and z.shape[0] == 2 * A.shape[1]:
        m = A.shape[1]
        z = z[:m] + 1j * z[m:]
    if z.shape[0] != A.shape[1]:
        raise ValueError("z length does not match operator columns")
    residual = x - A @ z
    fid = float(np.linalg.norm(residual) ** 2) / (2.0 * gamma0)
    if z.ndim == 1:
        count = int(np.count_nonzero(z))
    else:
        count = int(np.count_nonzero(np.any(z != 0, axis=1)))
    return fid + count


def decode_solution(reg, bits):
    """Decode signal bits through the quantizer; auxiliaries are ignored.

    Returns a SparseSignal for single problems and an (M, L) array for group
    problems.
    """
    b = np.asarray(bits)
    if b.shape != (reg.num_vars,):
        raise ValueError(f"assignment length {b.shape} != {reg.num_vars} variables")
    K = reg.quantizer.bit_length
    M, L = reg.num_rows, reg.num_cols
    signal_bits = b[: M * L * K].reshape(M, L, K).astype(float)
    values = signal_bits @ reg.quantizer.weights
    if reg.kind == "single":
        return SparseSignal(values[:, 0])
    return values


@dataclass(frozen=True)
class Violation:
    """One broken chain identity c = a*b, located by its registry tag."""

    kind: str
    row: int
    col: object  # None for row-chain identities
    pos: int
    expected: int
    actual: int


def constraint_violations(reg, bits):
    """Every gadget identity broken by the assignment (empty iff penalties vanish).

    Identities are checked with the assigned values of their inputs, exactly
    mirroring the penalty terms, so the list is empty if and only if the
    penalized energy equals the plain objective of the decoded signal.
    """
    b = np.asarray(bits).astype(int)
    if b.shape != (reg.num_vars,):
        raise ValueError("assignment length mismatch")

    def lit_value(lit):
        idx, negated = lit
        v = int(b[idx])
        return 1 - v if negated else v

    out = []
    for (tag, a_lit, b_lit, c) in reg.gadgets:
        expected = lit_value(a_lit) * lit_value(b_lit)
        actual = int(b[c])
        if expected != actual:
            out.append(Violation(tag[0], tag[1], tag[2], tag[3], expected, actual))
    return out


# ---------------------------------------------------------------------------
# file interop

class QuboFileError(ValueError):
    """Malformed QUBO text file; carries the offending 1-based line number."""

    def __init__(self, message, lineno=None):
        self.lineno = lineno
        where = f"line {lineno}: " if lineno is not None else ""
        super().__init__(f"{where}{message}")


def export_qubo_file(model, reg, path):
    """Write the coordinate-list text format.

    Comment lines (``#``) carry the registry metadata; the header line is
    ``p qubo <num_vars> <num_entries>``, one ``<i> <j> <coeff>`` line per
    stored entry with i <= j, and a final ``c offset <value>`` line.
    Coefficients are printed with 17 significant digits so the round trip is
    bit-exact.
    """
    lines = []
    if reg is not None:
        meta = json.dumps(reg.to_dict(), sort_keys=True)
        lines.append(f"# registry {meta}")
    lines.append(f"p qubo {model.num_vars} {model.num_entries}")
    for (i, j) in sorted(model.coeffs):
        lines.append(f"{i} {j} {model.coeffs[(i, j)]:.17g}")
    lines.append(f"c offset {model.offset:.17g}")
    text = "\n".join(lines) + "\n"
    with open(path, "w") as fh:
        fh.write(text)
    return text


def import_qubo_file(path):
    """Parse a QUBO text file; returns (QuboModel, VariableRegistry or None)."""
    with open(path) as fh:
        raw = fh.readlines()
    reg = None
    header = None
    coeffs = {}
    offset = 0.0
    seen_offset = False
    declared = 0
    for lineno, line in enumerate(raw, start=1):
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("registry "):
                try:
                    reg = VariableRegistry.from_dict(json.loads(body[len("registry "):]))
                except (json.JSONDecodeError, KeyError, ValueError) as exc:
                    raise QuboFileError(f"bad registry comment: {exc}", lineno)
            continue
        parts = line.split()
        if parts[0] == "p":
            if header is not None:
                raise QuboFileError("duplicate header line", lineno)
            if len(parts) != 4 or parts[1] != "qubo":
                raise QuboFileError(f"bad header {line!r}", lineno)
            try:
                header = (int(parts[2]), int(parts[3]))
            except ValueError:
                raise QuboFileError(f"bad header {line!r}", lineno)
            continue
        if parts[0] == "c":
            if len(parts) != 3 or parts[1] != "offset":
                raise QuboFileError(f"bad trailer {line!r}", lineno)
            try:
                offset = float(parts[2])
            except ValueError:
                raise QuboFileError(f"bad offset value {parts[2]!r}", lineno)
            seen_offset = True
            continue
        if header is None:
            raise QuboFileError("coefficient line before header", lineno)
        if len(parts) != 3:
            raise QuboFileError(f"expected '<i> <j> <coeff>', got {line!r}", lineno)
        try:
            i, j, v = int(parts[0]), int(parts[1]), float(parts[2])
        except ValueError:
            raise QuboFileError(f"unparseable entry {line!r}", lineno)
        if not (0 <= i <= j < header[0]):
            raise QuboFileError(f"index pair ({i}, {j}) out of range", lineno)
        if (i, j) in coeffs:
            raise QuboFileError(f"duplicate entry ({i}, {j})", lineno)
        coeffs[(i, j)] = v
        declared += 1
    if header is None:
        raise QuboFileError("missing 'p qubo' header")
    if not seen_offset:
        raise QuboFileError("missing 'c offset' trailer")
    if declared != header[1]:
        raise QuboFileError(
            f"header declares {header[1]} entries, found {declared}"
        )
    return QuboModel(header[0], coeffs, offset), reg
