"""Kernel support vector machine trained by dual coordinate ascent.

The bias is absorbed into the kernel (``K + 1``), which removes the
equality constraint from the dual. Multiclass problems are split
one-vs-rest.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def dual_coordinate_ascent(K, y, C, max_iter, tol):
    """Box-constrained dual of the hinge-loss SVM; returns alpha."""
    n = y.size
    alpha = np.zeros(n)
    f = np.zeros(n)  # f_i = sum_j alpha_j y_j K_ij
    for it in range(max_iter):
        max_violation = 0.0
        for i in range(n):
            G = y[i] * f[i] - 1.0
            a = alpha[i]
            if a <= 0.0:
                pg = min(G, 0.0)
            elif a >= C:
                pg = max(G, 0.0)
            else:
                pg = G
            if abs(pg) > max_violation:
                max_violation = abs(pg)
            if pg == 0.0 or K[i, i] <= 0.0:
                continue
            a_new = min(max(a - G / K[i, i], 0.0), C)
            d = (a_new - a) * y[i]
            if d != 0.0:
                alpha[i] = a_new
                for j in range(n):
                    f[j] += d * K[j, i]
        if max_violation < tol:
            break
    return alpha


def kernel_matrix(A, B, kernel, gamma, degree, coef0=1.0):
    G = A @ B.T
    if kernel == "linear":
        return G
    if kernel == "poly":
        return (gamma * G + coef0) ** degree
    if kernel == "rbf":
        sq = (A * A).sum(1)[:, None] + (B * B).sum(1)[None, :] - 2.0 * G
        return np.exp(-gamma * np.maximum(sq, 0.0))
    raise ValueError(f"unknown kernel {kernel!r}")


class SVM:
    """Soft-margin SVM with linear, rbf or polynomial kernel.

    ``gamma='scale'`` uses ``1 / (n_features * X.var())``. The polynomial
    kernel is ``(gamma <x, x'> + 1) ** degree``.
    """

    def __init__(self, C=1.0, kernel="rbf", gamma="scale", degree=3, max_iter=200,
                 tol=1e-3, seed=0):
        self.C = C
        self.kernel = kernel
        self.gamma = gamma
        self.degree = degree
        self.max_iter = max_iter
        self.tol = tol
        self.seed = seed

    def fit(self, X, y):
        X = np.ascontiguousarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.int64)
        self.n_classes = K = int(y.max()) + 1
        if self.gamma == "scale":
            var = X.var()
            self._gamma = 1.0 / (X.shape[1] * var) if var > 0 else 1.0
        else:
            self._gamma = float(self.gamma)
        Kmat = kernel_matrix(X, X, self.kernel, self._gamma, self.degree) + 1.0
        targets = [1] if K == 2 else range(K)
        self.dual_coef_ = []
        for k in targets:
            s = np.where(y == k, 1.0, -1.0)
            alpha = dual_coordinate_ascent(Kmat, s, float(self.C), self.max_iter, self.tol)
            self.dual_coef_.append(alpha * s)
        self.dual_coef_ = np.array(self.dual_coef_)
        keep = np.any(self.dual_coef_ != 0.0, axis=0)
        self.support_vectors_ = X[keep]
        self.dual_coef_ = self.dual_coef_[:, keep]
        return self

    def decision_function(self, X):
        X = np.ascontiguousarray(X, dtype=np.float64)
        if self.support_vectors_.shape[0] == 0:
            return np.zeros((X.shape[0], self.dual_coef_.shape[0]))
        Kx = kernel_matrix(X, self.support_vectors_, self.kernel, self._gamma, self.degree) + 1.0
        return Kx @ self.dual_coef_.T

    def predict_index(self, X):
        scores = self.decision_function(X)
        if self.n_classes == 2:
            return (scores[:, 0] > 0).astype(np.int64)
        return np.argmax(scores, axis=1)
