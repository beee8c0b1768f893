"""Multinomial logistic regression fitted by accelerated proximal gradient."""

import numpy as np
from numba import njit


def softmax(z):
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def log_likelihood(W, b, X, Y):
    """Mean log-likelihood of one-hot targets ``Y``."""
    z = X @ W + b
    z = z - z.max(axis=1, keepdims=True)
    logp = z - np.log(np.exp(z).sum(axis=1, keepdims=True))
    return float(np.sum(Y * logp) / X.shape[0])


@njit(cache=True)
def _fista(X, Y, lam, l1, step, max_iter, tol):
    n, d = X.shape
    K = Y.shape[1]
    W = np.zeros((d, K))
    b = np.zeros(K)
    Wm = W.copy()
    bm = b.copy()
    t = 1.0
    it = 0
    for it in range(max_iter):
        Z = X @ Wm
        R = np.empty((n, K))
        for i in range(n):
            zmax = -np.inf
            for k in range(K):
                Z[i, k] += bm[k]
                zmax = max(zmax, Z[i, k])
            s = 0.0
            for k in range(K):
                R[i, k] = np.exp(Z[i, k] - zmax)
                s += R[i, k]
            for k in range(K):
                R[i, k] = R[i, k] / s - Y[i, k]
        gW = X.T @ R
        W_new = np.empty((d, K))
        b_new = np.empty(K)
        for k in range(K):
            gb = 0.0
            for i in range(n):
                gb += R[i, k]
            b_new[k] = bm[k] - step * gb / n
        for j in range(d):
            for k in range(K):
                g = gW[j, k] / n
                if not l1:
                    g += lam * Wm[j, k]
                v = Wm[j, k] - step * g
                if l1:
                    mag = abs(v) - step * lam
                    v = np.sign(v) * mag if mag > 0.0 else 0.0
                W_new[j, k] = v
        delta = 0.0
        scale = 0.0
        uphill = 0.0
        for j in range(d):
            for k in range(K):
                delta += (W_new[j, k] - W[j, k]) ** 2
                scale += W[j, k] ** 2
                uphill += (Wm[j, k] - W_new[j, k]) * (W_new[j, k] - W[j, k])
        for k in range(K):
            delta += (b_new[k] - b[k]) ** 2
            scale += b[k] ** 2
            uphill += (bm[k] - b_new[k]) * (b_new[k] - b[k])
        # restart momentum when it points uphill
        if uphill > 0.0:
            t = 1.0
        t_new = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        mom = (t - 1.0) / t_new
        Wm = W_new + mom * (W_new - W)
        bm = b_new + mom * (b_new - b)
        W = W_new
        b = b_new
        t = t_new
        if np.sqrt(delta) <= tol * (np.sqrt(scale) + 1e-12):
            break
    return W, b, it + 1


class LogisticRegression:
    """Softmax regression with an l1 or l2 penalty.

    Minimises ``mean cross-entropy + R(W) / (C * n)`` where ``R`` is
    ``||W||_1`` or ``||W||^2 / 2``; the intercept is not penalised. FISTA
    with gradient-based restarts; l1 is handled by soft-thresholding.
    """

    def __init__(self, C=1.0, penalty="l2", max_iter=300, tol=1e-6, seed=0):
        if penalty not in ("l1", "l2"):
            raise ValueError(f"penalty must be 'l1' or 'l2', got {penalty!r}")
        self.C = C
        self.penalty = penalty
        self.max_iter = max_iter
        self.tol = tol
        self.seed = seed

    def fit(self, X, y):
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.int64)
        n, d = X.shape
        K = int(y.max()) + 1
        Y = np.eye(K)[y]
        lam = 1.0 / (self.C * n)
        # Lipschitz bound of the smooth part over the augmented design [X, 1]
        sigma = np.linalg.norm(np.column_stack([X, np.ones(n)]), 2)
        L = 0.5 * sigma ** 2 / n + (lam if self.penalty == "l2" else 0.0)
        step = 1.0 / L

        W, b, n_iter = _fista(X, Y, lam, self.penalty == "l1", step, self.max_iter, self.tol)
        self.coef_, self.intercept_ = W, b
        self.n_iter_ = n_iter
        self.n_classes = K
        return self

    def decision_function(self, X):
        return np.asarray(X, dtype=np.float64) @ self.coef_ + self.intercept_

    def predict_proba(self, X):
        return softmax(self.decision_function(X))
