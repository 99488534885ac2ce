"""Fidelity-kernel Gram and cross-kernel matrices.

``k(x, x') = |<Phi(x')| U(x')^dagger U(x) |Phi(x)>|^2``. All prepared states
are computed once per call and reused for every pair.
"""
import numpy as np

from .circuit import circuit_states


def gram_from_states(states):
    """Gram matrix of pairwise fidelities, symmetric by construction."""
    overlaps = states.conj() @ states.T
    K = np.abs(overlaps) ** 2
    upper = np.triu(K)
    return upper + np.triu(K, 1).T


def cross_from_states(states_eval, states_train):
    return np.abs(states_eval.conj() @ states_train.T) ** 2


def gram_matrix(X, c, theta):
    X = np.atleast_2d(np.asarray(X, dtype=float))
    return gram_from_states(circuit_states(c, theta, X))


def cross_kernel(X_eval, X_train, c, theta):
    X_eval = np.atleast_2d(np.asarray(X_eval, dtype=float))
    X_train = np.atleast_2d(np.asarray(X_train, dtype=float))
    if X_eval.shape[1] != X_train.shape[1]:
        raise ValueError(
            f"feature dimensions differ: {X_eval.shape[1]} vs {X_train.shape[1]}"
        )
    return cross_from_states(circuit_states(c, theta, X_eval), circuit_states(c, theta, X_train))


def gram_violations(K, sym_tol=1e-10, diag_tol=1e-10, psd_floor=-1e-8):
    """List the Gram-matrix properties ``K`` fails (empty when valid)."""
    K = np.asarray(K)
    problems = []
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        return ["not square"]
    if np.max(np.abs(K - K.T), initial=0.0) > sym_tol:
        problems.append("not symmetric")
    if np.max(np.abs(np.diag(K) - 1.0), initial=0.0) > diag_tol:
        problems.append("diagonal not 1")
    if K.size and np.linalg.eigvalsh(0.5 * (K + K.T)).min() < psd_floor:
        problems.append("not positive semidefinite")
    return problems


def save_csv(path, K):
    np.savetxt(path, K, delimiter=",", fmt="%.17g")
