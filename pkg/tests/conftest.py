"""Independent oracles shared by the test modules.

None of these reuse library code paths: elimination is a textbook
partial-pivoting loop, the lasso oracle is cyclic coordinate descent and the
AUC oracle counts pairs.
"""

import numpy as np
import pytest


def gauss_solve(A, b):
    """Dense Gaussian elimination with partial pivoting."""
    A = np.array(A, dtype=float)
    b = np.array(b, dtype=float)
    n = len(b)
    for k in range(n):
        p = k + int(np.argmax(np.abs(A[k:, k])))
        if p != k:
            A[[k, p]] = A[[p, k]]
            b[[k, p]] = b[[p, k]]
        for i in range(k + 1, n):
            f = A[i, k] / A[k, k]
            A[i, k:] -= f * A[k, k:]
            b[i] -= f * b[k]
    x = np.zeros(n)
    for i in range(n - 1, -1, -1):
        x[i] = (b[i] - A[i, i + 1:] @ x[i + 1:]) / A[i, i]
    return x


def cd_lasso(K, y, delta, tol=1e-15, max_sweeps=200_000):
    """Cyclic coordinate descent on ``||K a - y||^2 + delta ||a||_1``."""
    K = np.asarray(K, dtype=float)
    n = K.shape[1]
    a = np.zeros(n)
    r = y - K @ a
    col_sq = np.sum(K * K, axis=0)
    for _ in range(max_sweeps):
        biggest = 0.0
        for j in range(n):
            old = a[j]
            rho = K[:, j] @ r + col_sq[j] * old
            new = np.sign(rho) * max(abs(rho) - delta / 2.0, 0.0) / col_sq[j]
            if new != old:
                r -= K[:, j] * (new - old)
                a[j] = new
                biggest = max(biggest, abs(new - old))
        if biggest <= tol:
            break
    return a


def brute_auc(scores, labels):
    pos = [s for s, l in zip(scores, labels) if l == 1]
    neg = [s for s, l in zip(scores, labels) if l == 0]
    total = 0.0
    for p in pos:
        for q in neg:
            total += 1.0 if p > q else 0.5 if p == q else 0.0
    return total / (len(pos) * len(neg))


def random_spd(rng, n, eps=1e-3):
    M = rng.uniform(-1, 1, size=(n, n))
    A = M.T @ M + eps * np.eye(n)
    return 0.5 * (A + A.T)


def well_conditioned_pd(rng, n):
    M = rng.uniform(-1, 1, size=(n, n))
    A = M.T @ M / n + 0.5 * np.eye(n)
    return 0.5 * (A + A.T)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    module = __import__("sys").modules.get("test_acceptance")
    lines = getattr(module, "REPORT", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
