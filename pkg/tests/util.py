"""Shared helpers for the test suite."""

import numpy as np


def rel_err(got, want) -> float:
    """Frobenius-relative error with a unit floor on the denominator."""
    got = np.asarray(got, dtype=float)
    want = np.asarray(want, dtype=float)
    return float(np.linalg.norm(got - want) / max(1.0, np.linalg.norm(want)))


def kron_lyap_solve(x, m, u):
    """Independent oracle for X L M + M L X = U via the Kronecker system.

    Row-major vec: vec(X L M) = (X kron M^T) vec(L); M, X symmetric.
    """
    x = np.asarray(x, dtype=float)
    m = np.asarray(m, dtype=float)
    u = np.asarray(u, dtype=float)
    n = x.shape[0]
    op = np.kron(x, m) + np.kron(m, x)
    return np.linalg.solve(op, u.ravel()).reshape(n, n)


def kron_metric_inner(x, m, u, v):
    """Oracle for the GBW metric: 0.5 vec(U)^T (X kron M + M kron X)^{-1} vec(V)."""
    x = np.asarray(x, dtype=float)
    m = np.asarray(m, dtype=float)
    op = np.kron(x, m) + np.kron(m, x)
    w = np.linalg.solve(op, np.asarray(v, dtype=float).ravel())
    return 0.5 * float(np.asarray(u, dtype=float).ravel() @ w)
