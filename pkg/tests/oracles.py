"""Independent reference implementations used as test oracles.

Nothing here imports the package's simulators or solvers: gates are dense
Kronecker products, the SVM dual is solved by active-set enumeration and
the GP posterior by dense linear solves.
"""
import itertools

import numpy as np

I2 = np.eye(2, dtype=complex)
H2 = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
X2 = np.array([[0, 1], [1, 0]], dtype=complex)
P0 = np.diag([1, 0]).astype(complex)
P1 = np.diag([0, 1]).astype(complex)


def embed(ops, n):
    """Dense operator from a {qubit: 2x2} map; qubit 0 is the rightmost factor."""
    out = np.eye(1, dtype=complex)
    for q in reversed(range(n)):
        out = np.kron(out, ops.get(q, I2))
    return out


def hadamard(q, n):
    return embed({q: H2}, n)


def rz(q, n, angle):
    return embed({q: np.diag([np.exp(-1j * angle), np.exp(1j * angle)])}, n)


def cnot(target, control, n):
    return embed({control: P0}, n) + embed({control: P1, target: X2}, n)


def encode(x):
    n = len(x)
    U = embed({k: np.diag([np.exp(1j * x[k]), np.exp(-1j * x[k])]) for k in range(n)}, n)
    Hn = embed({k: H2 for k in range(n)}, n)
    e0 = np.zeros(1 << n, dtype=complex)
    e0[0] = 1
    return U @ Hn @ e0


def circuit_unitary(matrix, theta, x):
    """Dense unitary of a descriptor matrix (qubits x layers), gates in ascending qubit order."""
    matrix = np.asarray(matrix)
    n, L = matrix.shape
    U = np.eye(1 << n, dtype=complex)
    j = 0
    for col in range(L):
        for q in range(n):
            code = matrix[q, col]
            if code == 1:
                G = hadamard(q, n)
            elif code == 2:
                G = rz(q, n, theta[j] * x[q])
                j += 1
            elif code in (3, 4, 5):
                G = cnot(q, q - (code - 2), n)
            else:
                continue
            U = G @ U
    return U


def layer_valid(layer):
    for q, code in enumerate(layer):
        if code in (3, 4, 5):
            ctrl = q - (code - 2)
            if ctrl < 0 or layer[ctrl] != 0:
                return False
    return True


def brute_force_layers(n):
    return [t for t in itertools.product(range(6), repeat=n) if layer_valid(t)]


def svm_dual_bruteforce(K, y_pm, C):
    """Maximise the soft-margin dual by enumerating {0, free, C} patterns.

    The dual is concave, so the best feasible stationary point over all
    patterns is the global maximum.
    """
    N = len(y_pm)
    Q = (y_pm[:, None] * y_pm[None, :]) * K
    best, best_a = -np.inf, None
    for pattern in itertools.product((0, 1, 2), repeat=N):
        pattern = np.array(pattern)
        F = np.flatnonzero(pattern == 1)
        a = np.where(pattern == 2, C, 0.0).astype(float)
        if F.size:
            B = np.flatnonzero(pattern != 1)
            A = np.zeros((F.size + 1, F.size + 1))
            A[:F.size, :F.size] = Q[np.ix_(F, F)]
            A[:F.size, F.size] = y_pm[F]
            A[F.size, :F.size] = y_pm[F]
            rhs = np.concatenate([1.0 - Q[np.ix_(F, B)] @ a[B], [-(y_pm[B] @ a[B])]])
            sol, *_ = np.linalg.lstsq(A, rhs, rcond=None)
            if np.linalg.norm(A @ sol - rhs) > 1e-9:
                continue
            a[F] = sol[:F.size]
        if abs(y_pm @ a) > 1e-9 or np.any(a < -1e-12) or np.any(a > C + 1e-12):
            continue
        val = a.sum() - 0.5 * a @ Q @ a
        if val > best:
            best, best_a = val, a.copy()
    return best, best_a


def gp_posterior_dense(X, y, Xs, lengthscale, jitter, signal_variance=1.0):
    """Posterior mean/std via explicit solves on standardised targets."""
    def k(A, B):
        d2 = ((A[:, None, :] - B[None, :, :]) ** 2).sum(-1)
        return signal_variance * np.exp(-d2 / (2 * lengthscale**2))
    mu, sd = y.mean(), y.std()
    sd = sd if sd > 0 else 1.0
    ys = (y - mu) / sd
    Kxx = k(X, X) + jitter * np.eye(len(X))
    Ks = k(Xs, X)
    mean = Ks @ np.linalg.solve(Kxx, ys)
    var = signal_variance - np.einsum("ij,ji->i", Ks, np.linalg.solve(Kxx, Ks.T))
    return mean * sd + mu, np.sqrt(np.clip(var, 0, None)) * sd


def zz_state(x):
    """Second-order ZZ feature state built from dense diagonal operators."""
    n = len(x)
    Z = [embed({k: np.diag([1.0, -1.0]).astype(complex)}, n) for k in range(n)]
    G = sum(x[k] * Z[k] for k in range(n))
    for i in range(n):
        for j in range(i + 1, n):
            G = G + (np.pi - x[i]) * (np.pi - x[j]) * Z[i] @ Z[j]
    U = np.diag(np.exp(1j * np.diag(G)))
    Hn = embed({k: H2 for k in range(n)}, n)
    e0 = np.zeros(1 << n, dtype=complex)
    e0[0] = 1
    return U @ Hn @ U @ Hn @ e0
