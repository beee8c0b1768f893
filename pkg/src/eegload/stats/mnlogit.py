"""Multinomial logistic regression fitted by Newton-Raphson."""

import numpy as np

from .distributions import norm_sf

RIDGE = 1e-8


def _loglik(B, Z, Y):
    eta = np.column_stack([np.zeros(Z.shape[0]), Z @ B])
    eta -= eta.max(axis=1, keepdims=True)
    logp = eta - np.log(np.exp(eta).sum(axis=1, keepdims=True))
    return float(np.sum(Y * logp)), np.exp(logp)


def multinomial_logit(X, y, feature_names=None, ridge=RIDGE, max_iter=200, tol=1e-10):
    """Softmax regression of ``y`` on ``X`` with the first class as reference.

    Predictors are standardized internally; coefficients are reported on the
    original scale. A ridge penalty ``ridge/2 * ||beta||^2`` on the slopes
    keeps the estimate finite under (quasi-)separation. Wald z-tests use the
    inverse penalized Hessian.

    Returns
    -------
    dict
        classes, coefficients (per non-reference class), standard errors,
        p-values, log-likelihood, in-sample accuracy, confusion matrix
        (rows = true, columns = predicted), null accuracy and convergence flag.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    y = np.asarray(y)
    n, d = X.shape
    if y.shape[0] != n:
        raise ValueError("X and y lengths differ")
    classes, yi, counts = np.unique(y, return_inverse=True, return_counts=True)
    K = classes.size
    if K < 2:
        raise ValueError("need at least two classes")
    names = list(feature_names) if feature_names is not None else [f"x{j}" for j in range(d)]
    mu = X.mean(axis=0)
    sd = X.std(axis=0)
    sd = np.where(sd > 0, sd, 1.0)
    Z = np.column_stack([np.ones(n), (X - mu) / sd])
    Y = np.eye(K)[yi]
    p = d + 1
    B = np.zeros((p, K - 1))
    B[0] = np.log(counts[1:] / counts[0])
    pen = np.full(p, ridge)
    pen[0] = 0.0

    def objective(B):
        ll, P = _loglik(B, Z, Y)
        return ll - 0.5 * np.sum(pen[:, None] * B * B), P

    obj, P = objective(B)
    converged = False
    for _ in range(max_iter):
        G = Z.T @ (Y[:, 1:] - P[:, 1:]) - pen[:, None] * B
        H = np.zeros(((K - 1) * p, (K - 1) * p))
        for a in range(K - 1):
            for b in range(K - 1):
                wab = P[:, a + 1] * ((a == b) - P[:, b + 1])
                H[a * p:(a + 1) * p, b * p:(b + 1) * p] = (Z * wab[:, None]).T @ Z
        H += np.diag(np.tile(pen, K - 1)) + 1e-12 * np.eye(H.shape[0])
        step = np.linalg.solve(H, G.T.ravel()).reshape(K - 1, p).T
        t = 1.0
        while True:
            cand = B + t * step
            new_obj, new_P = objective(cand)
            if new_obj >= obj - 1e-12 * abs(obj) or t < 1e-10:
                break
            t *= 0.5
        gain = new_obj - obj
        B, obj, P = cand, new_obj, new_P
        if abs(gain) <= tol * (1.0 + abs(obj)) and np.max(np.abs(t * step)) < 1e-6:
            converged = True
            break
    cov = np.linalg.pinv(H)

    # back to the original predictor scale: beta = T @ beta_std within each class block
    T = np.eye(p)
    T[0, 1:] = -mu / sd
    T[1:, 1:] = np.diag(1.0 / sd)
    coef = T @ B
    se = np.empty_like(B)
    for k in range(K - 1):
        block = cov[k * p:(k + 1) * p, k * p:(k + 1) * p]
        se[:, k] = np.sqrt(np.maximum(np.diag(T @ block @ T.T), 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(se > 0, coef / se, 0.0)
    pvals = np.vectorize(lambda v: min(1.0, 2.0 * norm_sf(abs(v))))(z)

    pred = np.argmax(P, axis=1)
    confusion = np.zeros((K, K), dtype=np.int64)
    np.add.at(confusion, (yi, pred), 1)
    terms = ["intercept"] + names
    per_class = {}
    for k in range(1, K):
        per_class[str(classes[k])] = {
            t: {"coef": float(coef[j, k - 1]), "se": float(se[j, k - 1]), "z": float(z[j, k - 1]),
                "p": float(pvals[j, k - 1])} for j, t in enumerate(terms)}
    ll, _ = _loglik(B, Z, Y)
    null_ll = float(np.sum(counts * np.log(counts / n)))
    return {
        "classes": [str(c) for c in classes],
        "reference": str(classes[0]),
        "coefficients": per_class,
        "log_likelihood": ll,
        "null_log_likelihood": null_ll,
        "mcfadden_r2": 1.0 - ll / null_ll if null_ll < 0 else 0.0,
        "accuracy": float(np.mean(pred == yi)),
        "null_accuracy": float(counts.max() / n),
        "confusion_matrix": confusion.tolist(),
        "converged": converged,
        "n": n,
    }
