"""Integer-matrix circuit descriptors, layer enumeration and circuit application.

A descriptor is a ``(n_qubits, L)`` matrix of gate codes: rows are qubits,
columns are layers. Codes:

====  =========================================
0     no gate
1     Hadamard
2     R_Z with angle ``theta_j * x_k`` on qubit k
3     CNOT, target q, control q - 1
4     CNOT, target q, control q - 2
5     CNOT, target q, control q - 3
====  =========================================

A CNOT is written on its target row and its control row must hold 0 in the
same layer. Within a layer gates are applied in ascending target order, and
R_Z parameters are numbered layer-major, qubit-minor.
"""
from dataclasses import dataclass
from math import comb

import numpy as np

from . import qstate
from . import _backend

NO_GATE, HADAMARD, RZ = 0, 1, 2
CNOT_CODES = (3, 4, 5)
N_CODES = 6

THETA_DEFAULT = 1.0
THETA_BOUNDS = (0.0, 2.0 * np.pi)


class DescriptorParseError(ValueError):
    """Malformed descriptor text; ``row`` and ``col`` locate the bad cell."""

    def __init__(self, message, row=None, col=None):
        where = "" if row is None else f" (row {row}, column {col})"
        super().__init__(message + where)
        self.row = row
        self.col = col


def control_of(qubit, code):
    """Control qubit of a CNOT code on ``qubit`` (may be negative if invalid)."""
    return qubit - (code - 2)


def layer_error(layer):
    """Return a description of why ``layer`` is invalid, or None."""
    for q, code in enumerate(layer):
        if not 0 <= code < N_CODES:
            return f"gate code {code} on qubit {q} is not in 0..5"
        if code in CNOT_CODES:
            c = control_of(q, code)
            if c < 0:
                return f"CNOT code {code} on qubit {q} needs control qubit {c}"
            if layer[c] != NO_GATE:
                return f"control qubit {c} of CNOT on qubit {q} is not free"
    return None


@dataclass(frozen=True)
class CircuitDescriptor:
    n_qubits: int
    layers: tuple = ()

    def __post_init__(self):
        if not 1 <= self.n_qubits <= qstate.MAX_QUBITS:
            raise ValueError(f"n_qubits {self.n_qubits} outside [1, {qstate.MAX_QUBITS}]")
        layers = tuple(tuple(int(c) for c in layer) for layer in self.layers)
        for j, layer in enumerate(layers):
            if len(layer) != self.n_qubits:
                raise ValueError(f"layer {j} has {len(layer)} entries, expected {self.n_qubits}")
            err = layer_error(layer)
            if err:
                raise ValueError(f"layer {j}: {err}")
        object.__setattr__(self, "layers", layers)

    @classmethod
    def from_matrix(cls, matrix):
        m = np.asarray(matrix, dtype=int)
        if m.ndim != 2:
            raise ValueError("descriptor matrix must be 2-D (qubits x layers)")
        return cls(m.shape[0], tuple(tuple(col) for col in m.T))

    @property
    def depth(self):
        return len(self.layers)

    @property
    def matrix(self):
        if not self.layers:
            return np.zeros((self.n_qubits, 0), dtype=int)
        return np.array(self.layers, dtype=int).T

    def append(self, layer):
        return CircuitDescriptor(self.n_qubits, self.layers + (tuple(layer),))

    def sort_key(self):
        return (self.n_qubits, self.depth, self.layers)

    def __str__(self):
        return serialize(self, sep=";")


def enumerate_layers(n_qubits):
    """Every valid layer on ``n_qubits`` qubits in lexicographic code order.

    Tuples are indexed by qubit, so qubit 0 is the most significant entry and
    the all-zero layer comes first.
    """
    if not 1 <= n_qubits <= qstate.MAX_QUBITS:
        raise ValueError(f"n_qubits must be in [1, {qstate.MAX_QUBITS}]")
    out = []
    layer = [0] * n_qubits

    def fill(q):
        if q == n_qubits:
            out.append(tuple(layer))
            return
        for code in range(N_CODES):
            if code in CNOT_CODES:
                c = control_of(q, code)
                if c < 0 or layer[c] != NO_GATE:
                    continue
            layer[q] = code
            fill(q + 1)
        layer[q] = 0

    fill(0)
    return out


def layer_space_size_formula(g, n, K, L):
    """Circuit count ``C(g+n-1, n) * K * L`` quoted for g gate types on n qubits."""
    for name, v in (("g", g), ("n", n), ("K", K), ("L", L)):
        if int(v) != v or v < 1:
            raise ValueError(f"{name} must be a positive integer, got {v!r}")
    return comb(int(g) + int(n) - 1, int(n)) * int(K) * int(L)


def param_count(c):
    return sum(code == RZ for layer in c.layers for code in layer)


def rz_qubits(c):
    """Qubit of each R_Z gate, in parameter order."""
    return [q for layer in c.layers for q, code in enumerate(layer) if code == RZ]


def default_theta(c):
    return np.full(param_count(c), THETA_DEFAULT)


def extend_theta(theta, layer):
    """Parameters for a child built by appending ``layer``: inherited then defaults."""
    new = sum(code == RZ for code in layer)
    return np.concatenate([np.asarray(theta, dtype=float), np.full(new, THETA_DEFAULT)])


def compile_ops(c):
    """Lower a descriptor to the op table consumed by the backend kernels."""
    ops = []
    col = 0
    for layer in c.layers:
        for q, code in enumerate(layer):
            if code == HADAMARD:
                ops.append((1, q, -1, -1))
            elif code == RZ:
                ops.append((2, q, -1, col))
                col += 1
            elif code in CNOT_CODES:
                ops.append((3, q, control_of(q, code), -1))
    return np.array(ops, dtype=np.int64).reshape(-1, 4)


def _check_theta(c, theta):
    theta = np.asarray(theta, dtype=float).reshape(-1)
    d = param_count(c)
    if theta.size != d:
        raise ValueError(f"theta has {theta.size} entries, circuit has {d} R_Z gates")
    if not np.all(np.isfinite(theta)):
        raise ValueError("theta must be finite")
    return theta


def apply_parametrized_circuit(c, theta, x, state, backend=None):
    """Apply the layers of ``c`` to ``state`` with R_Z angles ``theta_j * x_k``.

    ``x`` is ``(n,)`` with ``state`` of shape ``(2**n,)``, or ``(N, n)`` with a
    matching batch of ``N`` states. ``backend`` ("cython" or "python")
    overrides the kernel chosen at import.
    """
    theta = _check_theta(c, theta)
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != c.n_qubits:
        raise ValueError(f"x has dimension {x.shape[-1]}, circuit has {c.n_qubits} qubits")
    single = x.ndim == 1
    X = np.atleast_2d(x)
    states = np.array(state, dtype=np.complex128, copy=True, order="C")
    states = states.reshape(-1, 1 << c.n_qubits)
    if states.shape[0] != X.shape[0]:
        raise ValueError("number of states and feature vectors differ")
    angles = np.ascontiguousarray(theta[None, :] * X[:, rz_qubits(c)])
    core = _backend.core if backend is None else _backend.get(backend)
    core.apply_ops(states, compile_ops(c), angles)
    return states[0] if single else states


def circuit_states(c, theta, X, backend=None):
    """Prepared states ``U(x)|Phi(x)>`` for every row of ``X``; shape ``(N, 2**n)``."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != c.n_qubits:
        raise ValueError(f"features have dimension {X.shape[1]}, circuit has {c.n_qubits} qubits")
    return apply_parametrized_circuit(c, theta, X, qstate.feature_map_encode(X), backend)


def serialize(c, sep="\n"):
    """One comma-separated row of codes per qubit, rows joined by ``sep``."""
    return sep.join(",".join(str(v) for v in row) for row in c.matrix)


def deserialize(text):
    """Parse descriptor text; rows may be separated by newlines or ``;``."""
    rows = [r.strip() for r in text.strip(" \t\r").replace(";", "\n").split("\n")]
    if len(rows) > 1 and not rows[-1] and any(rows):
        rows.pop()  # trailing newline
    cells = []
    for i, row in enumerate(rows):
        if not row:
            cells.append([])
            continue
        parsed = []
        for j, tok in enumerate(row.split(",")):
            tok = tok.strip()
            try:
                v = int(tok)
            except ValueError:
                raise DescriptorParseError(f"non-integer cell {tok!r}", i, j) from None
            if not 0 <= v < N_CODES:
                raise DescriptorParseError(f"gate code {v} not in 0..5", i, j)
            parsed.append(v)
        cells.append(parsed)
    widths = {len(r) for r in cells}
    if len(widths) != 1:
        raise DescriptorParseError(f"rows have differing lengths {sorted(widths)}")
    if not 1 <= len(cells) <= qstate.MAX_QUBITS:
        raise DescriptorParseError(f"{len(cells)} rows; expected 1..{qstate.MAX_QUBITS} qubits")
    n, depth = len(cells), widths.pop()
    for j in range(depth):
        layer = [cells[i][j] for i in range(n)]
        for q, code in enumerate(layer):
            if code in CNOT_CODES:
                ctrl = control_of(q, code)
                if ctrl < 0:
                    raise DescriptorParseError(f"CNOT code {code} has no control qubit {ctrl}", q, j)
                if layer[ctrl] != NO_GATE:
                    raise DescriptorParseError(f"control qubit {ctrl} is occupied", q, j)
    return CircuitDescriptor(n, tuple(tuple(cells[i][j] for i in range(n)) for j in range(depth)))
