"""Pure numpy versions of the compiled kernels (same signatures)."""

import numpy as np


def _weights(q, D, lam):
    """Shifted terms ``q_i exp(<lam, D_i> - m)``, zero where ``q_i = 0``."""
    pos = q > 0
    z = D[pos] @ lam
    m = np.max(z)
    e = np.zeros(q.size)
    e[pos] = q[pos] * np.exp(z - m)
    return e, float(m)


def dual_terms(q, D, lam):
    e, m = _weights(q, D, lam)
    grad = e @ D
    hess = (D * e[:, None]).T @ D
    return float(e.sum()), m, grad, hess


def log_dual(q, D, lam):
    e, m = _weights(q, D, lam)
    return float(m + np.log(e.sum()))


def tilt(q, D, lam):
    e, _ = _weights(q, D, lam)
    return e / e.sum()
