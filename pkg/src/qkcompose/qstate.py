"""Dense statevector simulation for up to 12 qubits.

States are complex128 NumPy arrays whose last axis holds the ``2**n``
amplitudes; any leading axes are treated as a batch. Qubit 0 is the least
significant bit of the basis-state index, and ``Z|0> = +|0>``.

Every function returns a new array; inputs are never modified.
"""
import numpy as np

MAX_QUBITS = 12

_SQRT_HALF = 1.0 / np.sqrt(2.0)


def n_qubits_of(state):
    """Return the qubit count implied by the last axis of ``state``."""
    dim = np.shape(state)[-1]
    n = int(dim).bit_length() - 1
    if dim < 2 or (1 << n) != dim or n > MAX_QUBITS:
        raise ValueError(f"state dimension {dim} is not 2**n with 1 <= n <= {MAX_QUBITS}")
    return n


def _check_qubit(state, qubit, name="qubit"):
    n = n_qubits_of(state)
    if not 0 <= qubit < n:
        raise ValueError(f"{name} {qubit} out of range for {n} qubits")
    return n


def _split(state, qubit):
    # view with the target bit on its own axis: (..., high, 2, low)
    state = np.array(state, dtype=np.complex128, copy=True)
    low = 1 << qubit
    high = state.shape[-1] // (2 * low)
    return state, state.reshape(state.shape[:-1] + (high, 2, low))


def init_zero(n_qubits):
    """Return ``|0...0>`` on ``n_qubits`` qubits."""
    if not isinstance(n_qubits, (int, np.integer)) or not 1 <= n_qubits <= MAX_QUBITS:
        raise ValueError(f"n_qubits must be an integer in [1, {MAX_QUBITS}], got {n_qubits!r}")
    state = np.zeros(1 << int(n_qubits), dtype=np.complex128)
    state[0] = 1.0
    return state


def apply_hadamard(state, qubit):
    _check_qubit(state, qubit)
    out, v = _split(state, qubit)
    a = v[..., 0, :].copy()
    b = v[..., 1, :]
    v[..., 0, :] = (a + b) * _SQRT_HALF
    v[..., 1, :] = (a - b) * _SQRT_HALF
    return out


def apply_rz(state, qubit, angle):
    """Apply ``diag(exp(-i*angle), exp(+i*angle))`` to ``qubit``.

    ``angle`` may be a scalar or an array broadcasting against the batch
    axes of ``state`` (one angle per state).
    """
    _check_qubit(state, qubit)
    angle = np.asarray(angle, dtype=float)
    if not np.all(np.isfinite(angle)):
        raise ValueError("rotation angle must be finite")
    out, v = _split(state, qubit)
    c = np.cos(angle)[..., None, None]
    s = np.sin(angle)[..., None, None]
    v[..., 0, :] *= c - 1j * s
    v[..., 1, :] *= c + 1j * s
    return out


def apply_cnot(state, target, control):
    """Flip ``target`` on every basis state whose ``control`` bit is set."""
    n = _check_qubit(state, target, "target")
    _check_qubit(state, control, "control")
    if target == control:
        raise ValueError("CNOT target and control must differ")
    idx = np.arange(1 << n)
    perm = np.where(idx & (1 << control), idx ^ (1 << target), idx)
    return np.asarray(state, dtype=np.complex128)[..., perm]


def feature_map_encode(x):
    """Encode ``x`` as ``exp(i sum_k x_k Z_k) H^n |0>``.

    ``x`` has shape ``(n,)`` or ``(batch, n)``. Each qubit ends up in
    ``(e^{i x_k}|0> + e^{-i x_k}|1>) / sqrt(2)``.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim not in (1, 2):
        raise ValueError("x must be a vector or a 2-D batch of vectors")
    n = x.shape[-1]
    if not 1 <= n <= MAX_QUBITS:
        raise ValueError(f"feature dimension {n} outside [1, {MAX_QUBITS}]")
    if not np.all(np.isfinite(x)):
        raise ValueError("features must be finite")
    bits = (np.arange(1 << n)[:, None] >> np.arange(n)) & 1
    signs = 1.0 - 2.0 * bits  # Z eigenvalue per (basis state, qubit)
    phase = x @ signs.T
    return np.exp(1j * phase) * (_SQRT_HALF ** n)


def fidelity(bra, ket):
    """Return ``|<bra|ket>|**2`` (batched over leading axes)."""
    bra = np.asarray(bra)
    ket = np.asarray(ket)
    if bra.shape[-1] != ket.shape[-1]:
        raise ValueError(f"dimension mismatch: {bra.shape[-1]} vs {ket.shape[-1]}")
    n_qubits_of(bra)
    overlap = np.sum(np.conj(bra) * ket, axis=-1)
    return np.abs(overlap) ** 2


def norm_error(state):
    """Return ``|sum |a_i|^2 - 1|`` per state."""
    return np.abs(np.sum(np.abs(state) ** 2, axis=-1) - 1.0)
