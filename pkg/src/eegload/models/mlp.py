"""Multilayer perceptron with softmax output, trained by mini-batch Adam."""

import numpy as np
from numba import njit

from .linear import softmax

_ACTIVATIONS = ("relu", "tanh")


@njit(cache=True)
def _layer(params, offsets, sizes, layer):
    fi = sizes[layer]
    fo = sizes[layer + 1]
    o = offsets[layer]
    W = params[o:o + fi * fo].reshape((fi, fo))
    b = params[o + fi * fo:o + fi * fo + fo]
    return W, b


@njit(cache=True)
def _tanh(v):
    # exp-based form; noticeably faster than the libm call inside numba
    return 1.0 - 2.0 / (np.exp(2.0 * v) + 1.0)


@njit(cache=True)
def _forward(params, offsets, sizes, X, act):
    n_layers = sizes.size - 1
    acts = [X]
    a = X
    for layer in range(n_layers):
        W, b = _layer(params, offsets, sizes, layer)
        z = a @ W
        for i in range(z.shape[0]):
            for j in range(z.shape[1]):
                v = z[i, j] + b[j]
                if layer < n_layers - 1:
                    v = max(v, 0.0) if act == 0 else _tanh(v)
                z[i, j] = v
        acts.append(z)
        a = z
    return acts


@njit(cache=True)
def _train(params, offsets, sizes, X, Y, act, alpha, epochs, batch_size, lr, tol,
           n_iter_no_change, seed):
    np.random.seed(seed)
    n = X.shape[0]
    n_layers = sizes.size - 1
    m = np.zeros_like(params)
    v = np.zeros_like(params)
    grad = np.zeros_like(params)
    b1, b2, eps = 0.9, 0.999, 1e-8
    step = 0
    best_loss = np.inf
    stall = 0
    n_epochs = 0
    for _ in range(epochs):
        order = np.random.permutation(n)
        loss = 0.0
        for s in range(0, n, batch_size):
            rows = order[s:s + batch_size]
            nb = rows.size
            xb = X[rows]
            yb = Y[rows]
            acts = _forward(params, offsets, sizes, xb, act)
            out = acts[n_layers]
            delta = np.empty_like(out)
            for i in range(nb):
                zmax = -np.inf
                for k in range(out.shape[1]):
                    zmax = max(zmax, out[i, k])
                tot = 0.0
                for k in range(out.shape[1]):
                    delta[i, k] = np.exp(out[i, k] - zmax)
                    tot += delta[i, k]
                for k in range(out.shape[1]):
                    p = delta[i, k] / tot
                    if yb[i, k] > 0:
                        loss -= yb[i, k] * np.log(max(p, 1e-300))
                    delta[i, k] = (p - yb[i, k]) / nb
            for layer in range(n_layers - 1, -1, -1):
                W, b = _layer(params, offsets, sizes, layer)
                gW, gb = _layer(grad, offsets, sizes, layer)
                gW[:, :] = acts[layer].T @ delta
                for j in range(W.shape[0]):
                    for k in range(W.shape[1]):
                        gW[j, k] += alpha * W[j, k] / nb
                for k in range(delta.shape[1]):
                    acc = 0.0
                    for i in range(nb):
                        acc += delta[i, k]
                    gb[k] = acc
                if layer > 0:
                    back = delta @ W.T
                    a = acts[layer]
                    for i in range(nb):
                        for j in range(back.shape[1]):
                            if act == 0:
                                back[i, j] = back[i, j] if a[i, j] > 0.0 else 0.0
                            else:
                                back[i, j] *= 1.0 - a[i, j] * a[i, j]
                    delta = back
            step += 1
            rate = lr * np.sqrt(1.0 - b2 ** step) / (1.0 - b1 ** step)
            for q in range(params.size):
                g = grad[q]
                m[q] = b1 * m[q] + (1.0 - b1) * g
                v[q] = b2 * v[q] + (1.0 - b2) * g * g
                params[q] -= rate * m[q] / (np.sqrt(v[q]) + eps)
        n_epochs += 1
        penalty = 0.0
        for layer in range(n_layers):
            W, b = _layer(params, offsets, sizes, layer)
            penalty += np.sum(W * W)
        loss = loss / n + 0.5 * alpha * penalty / n
        if loss > best_loss - tol:
            stall += 1
            if stall >= n_iter_no_change:
                break
        else:
            stall = 0
        best_loss = min(best_loss, loss)
    return n_epochs


class MLP:
    """Fully connected network; L2 penalty ``alpha`` on the weights.

    Glorot-uniform initialisation. Training stops after ``epochs`` passes or
    once the epoch training loss has failed to improve by ``tol`` for
    ``n_iter_no_change`` consecutive epochs. Batch order is shuffled with a
    seeded generator.
    """

    def __init__(self, hidden=(64,), activation="relu", alpha=1e-4, epochs=100,
                 batch_size=200, learning_rate=1e-3, tol=1e-4, n_iter_no_change=10, seed=0):
        if activation not in _ACTIVATIONS:
            raise ValueError(f"unknown activation {activation!r}")
        self.hidden = tuple(int(h) for h in hidden)
        self.activation = activation
        self.alpha = alpha
        self.epochs = epochs
        self.batch_size = batch_size
        self.learning_rate = learning_rate
        self.tol = tol
        self.n_iter_no_change = n_iter_no_change
        self.seed = seed

    def fit(self, X, y):
        X = np.ascontiguousarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.int64)
        d = X.shape[1]
        self.n_classes = K = int(y.max()) + 1
        Y = np.eye(K)[y]
        sizes = np.array((d,) + self.hidden + (K,), dtype=np.int64)
        offsets = np.zeros(sizes.size - 1, dtype=np.int64)
        rng = np.random.default_rng(self.seed)
        chunks = []
        for layer, (fan_in, fan_out) in enumerate(zip(sizes[:-1], sizes[1:])):
            offsets[layer] = sum(c.size for c in chunks)
            bound = np.sqrt(6.0 / (fan_in + fan_out))
            chunks.append(rng.uniform(-bound, bound, fan_in * fan_out))
            chunks.append(np.zeros(fan_out))
        params = np.concatenate(chunks)
        shuffle_seed = int(rng.integers(2 ** 31 - 1))
        self.n_epochs_ = _train(params, offsets, sizes, X, Y, _ACTIVATIONS.index(self.activation),
                                float(self.alpha), int(self.epochs), int(min(self.batch_size, X.shape[0])),
                                float(self.learning_rate), float(self.tol), int(self.n_iter_no_change),
                                shuffle_seed)
        self._params, self._offsets, self._sizes = params, offsets, sizes
        self.weights, self.biases = [], []
        for layer in range(sizes.size - 1):
            W, b = _layer(params, offsets, sizes, layer)
            self.weights.append(W)
            self.biases.append(b)
        return self

    def decision_function(self, X):
        X = np.ascontiguousarray(X, dtype=np.float64)
        acts = _forward(self._params, self._offsets, self._sizes, X,
                        _ACTIVATIONS.index(self.activation))
        return acts[-1]

    def predict_proba(self, X):
        return softmax(self.decision_function(X))
