"""NumPy implementations of the hot kernels.

Used when the compiled ``_core`` extension is unavailable. The two modules
share one contract:

``apply_ops(states, ops, angles)``
    Mutates ``states`` (complex128, shape ``(n_samples, 2**n)``) in place.
    Each row of ``ops`` (int64, shape ``(n_ops, 4)``) is
    ``(kind, target, control, angle_column)`` with kind 1 = Hadamard,
    2 = R_Z, 3 = CNOT. ``angles[s, col]`` is the full rotation angle of
    R_Z op ``col`` for sample ``s``.

``smo(K, y, C, tol, max_iter)``
    Maximal-violating-pair SMO on the soft-margin dual with labels
    ``y`` in {-1, +1}. Returns ``(alpha, bias, n_iter, gap)``.

Arithmetic is ordered the same way as in the compiled loops so that both
backends agree to rounding.
"""
import numpy as np

OP_H = 1
OP_RZ = 2
OP_CNOT = 3

_SQRT_HALF = 1.0 / np.sqrt(2.0)


def apply_ops(states, ops, angles):
    n_samples, dim = states.shape
    for kind, target, control, col in ops:
        bit = 1 << int(target)
        view = states.reshape(n_samples, dim // (2 * bit), 2, bit)
        if kind == OP_H:
            a = view[:, :, 0, :].copy()
            b = view[:, :, 1, :]
            view[:, :, 0, :] = (a + b) * _SQRT_HALF
            view[:, :, 1, :] = (a - b) * _SQRT_HALF
        elif kind == OP_RZ:
            c = np.cos(angles[:, col])[:, None, None]
            s = np.sin(angles[:, col])[:, None, None]
            view[:, :, 0, :] *= c - 1j * s
            view[:, :, 1, :] *= c + 1j * s
        elif kind == OP_CNOT:
            idx = np.arange(dim)
            cbit = 1 << int(control)
            perm = np.where(idx & cbit, idx ^ bit, idx)
            states[:] = states[:, perm]
        else:
            raise ValueError(f"unknown op kind {kind}")


def smo(K, y, C, tol, max_iter):
    n = K.shape[0]
    alpha = np.zeros(n)
    G = -np.ones(n)
    tau = 1e-12
    it = 0
    pos = y > 0
    while True:
        up = np.where(pos, alpha < C, alpha > 0)
        low = np.where(pos, alpha > 0, alpha < C)
        v = -y * G
        if not up.any() or not low.any():
            gap = -np.inf
            break
        i = int(np.argmax(np.where(up, v, -np.inf)))
        j = int(np.argmin(np.where(low, v, np.inf)))
        gap = v[i] - v[j]
        if gap < tol or it >= max_iter:
            break
        it += 1
        old_ai, old_aj = alpha[i], alpha[j]
        ai, aj = old_ai, old_aj
        quad = K[i, i] + K[j, j] - 2.0 * K[i, j]
        if quad <= 0:
            quad = tau
        if y[i] != y[j]:
            delta = (-G[i] - G[j]) / quad
            diff = ai - aj
            ai += delta
            aj += delta
            if diff > 0:
                if aj < 0:
                    aj, ai = 0.0, diff
            elif ai < 0:
                ai, aj = 0.0, -diff
            if diff > 0:
                if ai > C:
                    ai, aj = C, C - diff
            elif aj > C:
                aj, ai = C, C + diff
        else:
            delta = (G[i] - G[j]) / quad
            total = ai + aj
            ai -= delta
            aj += delta
            if total > C:
                if ai > C:
                    ai, aj = C, total - C
            elif aj < 0:
                aj, ai = 0.0, total
            if total > C:
                if aj > C:
                    aj, ai = C, total - C
            elif ai < 0:
                ai, aj = 0.0, total
        alpha[i], alpha[j] = ai, aj
        dai = ai - old_ai
        daj = aj - old_aj
        G += y * (y[i] * K[:, i] * dai + y[j] * K[:, j] * daj)

    yg = y * G
    at_upper = alpha >= C
    at_lower = alpha <= 0
    free = ~(at_upper | at_lower)
    if free.any():
        rho = yg[free].sum() / free.sum()
    else:
        ub_mask = (at_upper & ~pos) | (at_lower & pos)
        lb_mask = (at_upper & pos) | (at_lower & ~pos)
        ub = yg[ub_mask].min() if ub_mask.any() else np.inf
        lb = yg[lb_mask].max() if lb_mask.any() else -np.inf
        rho = (ub + lb) / 2.0
    return alpha, -rho, it, gap
