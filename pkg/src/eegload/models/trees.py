"""Histogram decision trees: a random forest and second-order gradient boosting.

Features are binned once per fit. When a feature has at most ``max_bins``
distinct training values every midpoint between them is a candidate
threshold, so small problems are split exactly.
"""

import numpy as np
from numba import njit

MAX_BINS = 256


def make_bins(X, max_bins=MAX_BINS):
    """Per-feature split thresholds and the binned training matrix.

    Features with at most ``max_bins`` distinct values split at midpoints
    between neighbours; others at interpolated quantiles. A value ``x``
    falls in bin ``b`` when exactly ``b`` thresholds are below it, so
    ``x <= thresholds[f, b]`` iff ``bin <= b``.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    thresholds, n_edges = _bin_edges(X, max_bins)
    Xb = apply_bins(X, thresholds, n_edges)
    # one byte per cell keeps the binned matrix cache resident
    return thresholds, n_edges, (Xb.astype(np.uint8) if max_bins <= 256 else Xb)


@njit(cache=True)
def _bin_edges(X, max_bins):
    n, n_features = X.shape
    thresholds = np.full((n_features, max_bins - 1), np.inf)
    n_edges = np.zeros(n_features, dtype=np.int64)
    for f in range(n_features):
        col = np.sort(X[:, f])
        n_unique = 1
        for i in range(1, n):
            if col[i] != col[i - 1]:
                n_unique += 1
        m = 0
        if n_unique <= max_bins:
            for i in range(1, n):
                if col[i] != col[i - 1]:
                    thresholds[f, m] = (col[i - 1] + col[i]) / 2.0
                    m += 1
        else:
            for b in range(1, max_bins):
                # linear-interpolation quantile at b / max_bins
                h = (n - 1) * (b / max_bins)
                lo = int(np.floor(h))
                hi = min(lo + 1, n - 1)
                q = col[lo] + (h - lo) * (col[hi] - col[lo])
                if m == 0 or q > thresholds[f, m - 1]:
                    thresholds[f, m] = q
                    m += 1
        n_edges[f] = m
    return thresholds, n_edges


@njit(cache=True)
def apply_bins(X, thresholds, n_edges):
    n, n_features = X.shape
    Xb = np.empty((n, n_features), dtype=np.int32)
    for f in range(n_features):
        m = n_edges[f]
        for i in range(n):
            # number of thresholds strictly below x (searchsorted side="left")
            x = X[i, f]
            lo, hi = 0, m
            while lo < hi:
                mid = (lo + hi) >> 1
                if thresholds[f, mid] < x:
                    lo = mid + 1
                else:
                    hi = mid
            Xb[i, f] = lo
    return Xb


@njit(cache=True)
def _sample_features(n_features, m, out):
    # partial Fisher-Yates; numba's np.random state is seeded by the caller
    perm = np.arange(n_features)
    for i in range(m):
        j = i + np.random.randint(n_features - i)
        t = perm[i]
        perm[i] = perm[j]
        perm[j] = t
        out[i] = perm[i]


@njit(cache=True)
def build_classification_tree(XbT, y, w, n_classes, n_edges, max_depth, max_features,
                              min_samples_leaf, seed):
    """Gini tree grown depth-first. ``max_depth < 0`` means unbounded."""
    np.random.seed(seed)
    n_features, n = XbT.shape
    cap = 2 * n + 1
    feature = np.full(cap, -1, dtype=np.int64)
    thr_bin = np.zeros(cap, dtype=np.int64)
    left = np.full(cap, -1, dtype=np.int64)
    right = np.full(cap, -1, dtype=np.int64)
    value = np.zeros((cap, n_classes))

    idx = np.empty(n, dtype=np.int64)
    m = 0
    for i in range(n):
        if w[i] > 0:
            idx[m] = i
            m += 1
    idx = idx[:m].copy()

    # stack of (node, start, stop, depth)
    stack = np.empty((cap, 4), dtype=np.int64)
    sp = 0
    stack[0, 0] = 0
    stack[0, 1] = 0
    stack[0, 2] = m
    stack[0, 3] = 0
    sp = 1
    n_nodes = 1
    feats = np.empty(n_features, dtype=np.int64)
    max_bin = 0
    for f in range(n_features):
        if n_edges[f] + 1 > max_bin:
            max_bin = n_edges[f] + 1
    hist = np.zeros((max_bin, n_classes))
    counts = np.zeros(n_classes)
    cl = np.zeros(n_classes)
    keys = np.empty(n, dtype=np.int64)

    while sp > 0:
        sp -= 1
        node = stack[sp, 0]
        start = stack[sp, 1]
        stop = stack[sp, 2]
        depth = stack[sp, 3]

        counts[:] = 0.0
        n_node = 0
        for k in range(start, stop):
            counts[y[idx[k]]] += w[idx[k]]
            n_node += 1
        total = counts.sum()
        for c in range(n_classes):
            value[node, c] = counts[c] / total
        n_nonzero = 0
        for c in range(n_classes):
            if counts[c] > 0:
                n_nonzero += 1
        if n_nonzero <= 1 or n_node < 2 * min_samples_leaf or (max_depth >= 0 and depth >= max_depth):
            continue

        parent_score = 0.0
        for c in range(n_classes):
            parent_score += counts[c] * counts[c]
        parent_score /= total

        _sample_features(n_features, max_features, feats)
        best_gain = 1e-12
        best_f = -1
        best_b = -1
        for fi in range(max_features):
            f = feats[fi]
            nb = n_edges[f] + 1
            if nb < 2:
                continue
            if n_node < nb:
                # few rows: sweep the node's rows in bin order
                for k in range(n_node):
                    keys[k] = XbT[f, idx[start + k]]
                order = np.argsort(keys[:n_node], kind="mergesort")
                cl[:] = 0.0
                for k in range(n_node - 1):
                    r = idx[start + order[k]]
                    cl[y[r]] += w[r]
                    b = keys[order[k]]
                    if keys[order[k + 1]] == b:
                        continue
                    wl = cl.sum()
                    wr = total - wl
                    sl = 0.0
                    sr = 0.0
                    for c in range(n_classes):
                        sl += cl[c] * cl[c]
                        cr = counts[c] - cl[c]
                        sr += cr * cr
                    gain = sl / wl + sr / wr - parent_score
                    if gain > best_gain:
                        best_gain = gain
                        best_f = f
                        best_b = b
                continue
            hist[:nb, :] = 0.0
            for k in range(start, stop):
                r = idx[k]
                hist[XbT[f, r], y[r]] += w[r]
            cl[:] = 0.0
            for b in range(nb - 1):
                empty = True
                for c in range(n_classes):
                    if hist[b, c] != 0.0:
                        empty = False
                    cl[c] += hist[b, c]
                if empty:
                    continue
                wl = cl.sum()
                wr = total - wl
                if wl <= 0.0 or wr <= 0.0:
                    continue
                sl = 0.0
                sr = 0.0
                for c in range(n_classes):
                    sl += cl[c] * cl[c]
                    cr = counts[c] - cl[c]
                    sr += cr * cr
                gain = sl / wl + sr / wr - parent_score
                if gain > best_gain:
                    best_gain = gain
                    best_f = f
                    best_b = b
        if best_f < 0:
            continue

        # partition idx[start:stop] around the split
        i = start
        j = stop - 1
        while i <= j:
            if XbT[best_f, idx[i]] <= best_b:
                i += 1
            else:
                t = idx[i]
                idx[i] = idx[j]
                idx[j] = t
                j -= 1
        if i - start < min_samples_leaf or stop - i < min_samples_leaf:
            continue
        feature[node] = best_f
        thr_bin[node] = best_b
        left[node] = n_nodes
        right[node] = n_nodes + 1
        stack[sp, 0] = n_nodes + 1
        stack[sp, 1] = i
        stack[sp, 2] = stop
        stack[sp, 3] = depth + 1
        sp += 1
        stack[sp, 0] = n_nodes
        stack[sp, 1] = start
        stack[sp, 2] = i
        stack[sp, 3] = depth + 1
        sp += 1
        n_nodes += 2

    return (feature[:n_nodes].copy(), thr_bin[:n_nodes].copy(), left[:n_nodes].copy(),
            right[:n_nodes].copy(), value[:n_nodes].copy())


@njit(cache=True)
def build_gradient_tree(Xb, g, h, rows, feats, n_edges, max_depth, reg_lambda,
                        min_child_weight):
    """Regression tree on gradient/hessian statistics (second-order boosting).

    ``Xb`` is the row-major binned matrix. Histograms are accumulated row by
    row so consecutive updates touch different features.
    """
    n_rows = rows.size
    nf = feats.size
    cap = 2 ** (max_depth + 1)
    feature = np.full(cap, -1, dtype=np.int64)
    thr_bin = np.zeros(cap, dtype=np.int64)
    left = np.full(cap, -1, dtype=np.int64)
    right = np.full(cap, -1, dtype=np.int64)
    value = np.zeros((cap, 1))
    idx = rows.copy()

    max_bin = 0
    for f in range(n_edges.size):
        if n_edges[f] + 1 > max_bin:
            max_bin = n_edges[f] + 1
    hist = np.zeros((nf, max_bin, 2))
    stack = np.empty((cap, 4), dtype=np.int64)
    stack[0, 0] = 0
    stack[0, 1] = 0
    stack[0, 2] = n_rows
    stack[0, 3] = 0
    sp = 1
    n_nodes = 1
    while sp > 0:
        sp -= 1
        node = stack[sp, 0]
        start = stack[sp, 1]
        stop = stack[sp, 2]
        depth = stack[sp, 3]
        G = 0.0
        H = 0.0
        for k in range(start, stop):
            G += g[idx[k]]
            H += h[idx[k]]
        value[node, 0] = -G / (H + reg_lambda)
        if depth >= max_depth or stop - start < 2:
            continue
        hist[:] = 0.0
        for k in range(start, stop):
            r = idx[k]
            gr = g[r]
            hr = h[r]
            for fi in range(nf):
                b = Xb[r, feats[fi]]
                hist[fi, b, 0] += gr
                hist[fi, b, 1] += hr
        parent = G * G / (H + reg_lambda)
        best_gain = 1e-12
        best_f = -1
        best_b = -1
        for fi in range(nf):
            f = feats[fi]
            nb = n_edges[f] + 1
            GL = 0.0
            HL = 0.0
            for b in range(nb - 1):
                GL += hist[fi, b, 0]
                HL += hist[fi, b, 1]
                HR = H - HL
                if HL < min_child_weight or HR < min_child_weight:
                    continue
                GR = G - GL
                gain = GL * GL / (HL + reg_lambda) + GR * GR / (HR + reg_lambda) - parent
                if gain > best_gain:
                    best_gain = gain
                    best_f = f
                    best_b = b
        if best_f < 0:
            continue
        i = start
        j = stop - 1
        while i <= j:
            if Xb[idx[i], best_f] <= best_b:
                i += 1
            else:
                t = idx[i]
                idx[i] = idx[j]
                idx[j] = t
                j -= 1
        feature[node] = best_f
        thr_bin[node] = best_b
        left[node] = n_nodes
        right[node] = n_nodes + 1
        stack[sp, 0] = n_nodes + 1
        stack[sp, 1] = i
        stack[sp, 2] = stop
        stack[sp, 3] = depth + 1
        sp += 1
        stack[sp, 0] = n_nodes
        stack[sp, 1] = start
        stack[sp, 2] = i
        stack[sp, 3] = depth + 1
        sp += 1
        n_nodes += 2
    return (feature[:n_nodes].copy(), thr_bin[:n_nodes].copy(), left[:n_nodes].copy(),
            right[:n_nodes].copy(), value[:n_nodes].copy())


@njit(cache=True)
def _apply_binned(Xb, feature, thr_bin, left, right, value, out, scale):
    for r in range(Xb.shape[0]):
        node = 0
        while feature[node] >= 0:
            if Xb[r, feature[node]] <= thr_bin[node]:
                node = left[node]
            else:
                node = right[node]
        for c in range(value.shape[1]):
            out[r, c] += scale * value[node, c]


@njit(cache=True)
def _apply_raw(X, feature, threshold, left, right, value, out, scale):
    for r in range(X.shape[0]):
        node = 0
        while feature[node] >= 0:
            if X[r, feature[node]] <= threshold[node]:
                node = left[node]
            else:
                node = right[node]
        for c in range(value.shape[1]):
            out[r, c] += scale * value[node, c]


class Tree:
    """Fitted tree: split thresholds are stored as raw feature values."""

    def __init__(self, arrays, thresholds):
        self.feature, self.thr_bin, self.left, self.right, self.value = arrays
        leaf = self.feature < 0
        f = np.where(leaf, 0, self.feature)
        self.threshold = np.where(leaf, 0.0, thresholds[f, self.thr_bin])

    @property
    def n_nodes(self):
        return self.feature.size

    def accumulate(self, X, out, scale=1.0):
        _apply_raw(X, self.feature, self.threshold, self.left, self.right, self.value, out, scale)

    def accumulate_binned(self, Xb, out, scale=1.0):
        _apply_binned(Xb, self.feature, self.thr_bin, self.left, self.right, self.value, out, scale)


def _max_features(spec, n_features):
    if spec is None:
        return n_features
    if spec == "sqrt":
        return max(1, int(np.sqrt(n_features)))
    if isinstance(spec, float):
        return max(1, int(spec * n_features))
    return min(int(spec), n_features)


class RandomForest:
    """Bootstrap forest of Gini trees with soft (probability-averaging) voting."""

    def __init__(self, n_estimators=100, max_depth=None, max_features="sqrt",
                 bootstrap=True, min_samples_leaf=1, seed=0):
        self.n_estimators = n_estimators
        self.max_depth = max_depth
        self.max_features = max_features
        self.bootstrap = bootstrap
        self.min_samples_leaf = min_samples_leaf
        self.seed = seed

    def fit(self, X, y):
        """``y`` holds class indices ``0..K-1``."""
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.int64)
        self.n_classes = int(y.max()) + 1
        thresholds, n_edges, Xb = make_bins(X)
        XbT = np.ascontiguousarray(Xb.T)
        n = X.shape[0]
        rng = np.random.default_rng(self.seed)
        m = _max_features(self.max_features, X.shape[1])
        depth = -1 if self.max_depth is None else int(self.max_depth)
        self.trees = []
        for _ in range(self.n_estimators):
            if self.bootstrap:
                w = np.bincount(rng.integers(0, n, n), minlength=n).astype(np.float64)
            else:
                w = np.ones(n)
            arrays = build_classification_tree(XbT, y, w, self.n_classes, n_edges, depth, m,
                                               self.min_samples_leaf, int(rng.integers(2**31 - 1)))
            self.trees.append(Tree(arrays, thresholds))
        return self

    def predict_proba(self, X):
        X = np.ascontiguousarray(X, dtype=np.float64)
        out = np.zeros((X.shape[0], self.n_classes))
        for t in self.trees:
            t.accumulate(X, out)
        return out / len(self.trees)


class GradientBoostedTrees:
    """Second-order boosting with logistic (2 classes) or softmax loss.

    Rows and columns are subsampled per tree; the initial margin is the log
    class prior, so a single round with a tiny learning rate predicts the
    prior.
    """

    def __init__(self, n_estimators=100, max_depth=3, learning_rate=0.1, subsample=1.0,
                 colsample_bytree=1.0, reg_lambda=1.0, min_child_weight=1.0, max_bins=32,
                 seed=0):
        self.max_bins = max_bins
        self.n_estimators = n_estimators
        self.max_depth = max_depth
        self.learning_rate = learning_rate
        self.subsample = subsample
        self.colsample_bytree = colsample_bytree
        self.reg_lambda = reg_lambda
        self.min_child_weight = min_child_weight
        self.seed = seed

    def fit(self, X, y):
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.int64)
        n, n_features = X.shape
        self.n_classes = K = int(y.max()) + 1
        thresholds, n_edges, Xb = make_bins(X, self.max_bins)
        rng = np.random.default_rng(self.seed)
        prior = np.bincount(y, minlength=K) / n
        n_out = 1 if K == 2 else K
        if K == 2:
            p1 = np.clip(prior[1], 1e-6, 1 - 1e-6)
            self.base = np.array([np.log(p1 / (1 - p1))])
        else:
            self.base = np.log(np.clip(prior, 1e-6, None))
        margin = np.tile(self.base, (n, 1))
        onehot = np.eye(K)[y]
        n_rows = max(1, int(round(self.subsample * n)))
        n_cols = max(1, int(round(self.colsample_bytree * n_features)))
        self.trees = []
        for _ in range(self.n_estimators):
            if K == 2:
                p = 1.0 / (1.0 + np.exp(-margin[:, 0]))
                grads = [(p - y, np.maximum(p * (1 - p), 1e-16))]
            else:
                z = margin - margin.max(axis=1, keepdims=True)
                p = np.exp(z)
                p /= p.sum(axis=1, keepdims=True)
                grads = [(p[:, k] - onehot[:, k], np.maximum(2.0 * p[:, k] * (1 - p[:, k]), 1e-16))
                         for k in range(K)]
            rows = np.sort(rng.permutation(n)[:n_rows]) if n_rows < n else np.arange(n)
            feats = np.sort(rng.permutation(n_features)[:n_cols]) if n_cols < n_features \
                else np.arange(n_features)
            round_trees = []
            for k, (g, h) in enumerate(grads):
                arrays = build_gradient_tree(Xb, g, h, rows, feats, n_edges, int(self.max_depth),
                                             float(self.reg_lambda), float(self.min_child_weight))
                tree = Tree(arrays, thresholds)
                col = np.zeros((n, 1))
                tree.accumulate_binned(Xb, col, self.learning_rate)
                margin[:, k] += col[:, 0]
                round_trees.append(tree)
            self.trees.append(round_trees)
        self._n_out = n_out
        return self

    def decision_function(self, X):
        X = np.ascontiguousarray(X, dtype=np.float64)
        margin = np.tile(self.base, (X.shape[0], 1))
        col = np.zeros((X.shape[0], 1))
        for round_trees in self.trees:
            for k, tree in enumerate(round_trees):
                col[:] = 0.0
                tree.accumulate(X, col, self.learning_rate)
                margin[:, k] += col[:, 0]
        return margin

    def predict_proba(self, X):
        margin = self.decision_function(X)
        if self.n_classes == 2:
            p1 = 1.0 / (1.0 + np.exp(-margin[:, 0]))
            return np.column_stack([1 - p1, p1])
        z = margin - margin.max(axis=1, keepdims=True)
        p = np.exp(z)
        return p / p.sum(axis=1, keepdims=True)
