"""From-scratch multinomial classifiers over sparse count matrices.

Multinomial naive Bayes (closed form), multinomial logistic regression
(full-batch gradient descent), and a CART-style decision tree share one
train/predict contract. All three are deterministic given their inputs;
class ties always resolve to the lowest canonical class value.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .ngrams import FeatureMatrix

_FLOAT_FMT = "{:.17g}"
_MODEL_VERSION = 1


class EmptyClassError(Exception):
    pass


class DivergenceError(Exception):
    pass


class DimensionMismatchError(Exception):
    pass


class ClassifierKind(enum.Enum):
    NAIVE_BAYES = "nb"
    LOGISTIC_REGRESSION = "logreg"
    DECISION_TREE = "tree"


@dataclass(frozen=True)
class ClassifierSpec:
    """Hyperparameters for all three classifier kinds.

    Unused fields are ignored by the other kinds; the defaults are the
    conventional choices recorded with every experiment cell.
    """

    kind: ClassifierKind = ClassifierKind.NAIVE_BAYES
    nb_alpha: float = 1.0
    lr_l2: float = 1e-4
    lr_lr: float = 0.1
    lr_max_iter: int = 500
    lr_tol: float = 1e-6
    tree_max_depth: int | None = None
    tree_min_leaf: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.nb_alpha < 0:
            raise ValueError("nb_alpha must be >= 0")
        if self.lr_l2 < 0 or self.lr_lr <= 0 or self.lr_max_iter < 0 or self.lr_tol < 0:
            raise ValueError("bad logistic regression parameters")
        if self.tree_min_leaf < 1:
            raise ValueError("tree_min_leaf must be >= 1")


def _classes_of(y: np.ndarray) -> np.ndarray:
    classes = np.unique(y)
    if len(classes) == 0:
        raise EmptyClassError("no training rows")
    return classes


def _class_index(y: np.ndarray, classes: np.ndarray) -> np.ndarray:
    idx = np.searchsorted(classes, y)
    if np.any(idx >= len(classes)) or np.any(classes[idx] != y):
        raise EmptyClassError("label outside the training class set")
    return idx


@dataclass
class NaiveBayesModel:
    classes: np.ndarray
    class_log_prior: np.ndarray
    feature_log_prob: np.ndarray  # (n_classes, n_features)

    kind = ClassifierKind.NAIVE_BAYES

    @property
    def n_features(self) -> int:
        return self.feature_log_prob.shape[1]


@dataclass
class LogisticRegressionModel:
    classes: np.ndarray
    weights: np.ndarray  # (n_classes, n_features)
    bias: np.ndarray
    n_iter: int = 0
    loss_curve: np.ndarray = field(default=None, compare=False, repr=False)

    kind = ClassifierKind.LOGISTIC_REGRESSION

    @property
    def n_features(self) -> int:
        return self.weights.shape[1]


@dataclass
class TreeSplit:
    feature: int
    threshold: float
    left: "TreeSplit | TreeLeaf"
    right: "TreeSplit | TreeLeaf"


@dataclass
class TreeLeaf:
    label: int


@dataclass
class DecisionTreeModel:
    classes: np.ndarray
    root: TreeSplit | TreeLeaf
    n_features_in: int

    kind = ClassifierKind.DECISION_TREE

    @property
    def n_features(self) -> int:
        return self.n_features_in


TrainedModel = NaiveBayesModel | LogisticRegressionModel | DecisionTreeModel


# ---------------------------------------------------------------------------
# multinomial naive Bayes


def train_nb(X: FeatureMatrix, y=None, spec: ClassifierSpec | None = None) -> NaiveBayesModel:
    """prior(c) = rows(c)/n; likelihood(f|c) = (count(f,c)+a) / (total(c)+a*F)."""
    spec = spec or ClassifierSpec(kind=ClassifierKind.NAIVE_BAYES)
    y = np.asarray(X.labels if y is None else y, dtype=np.int64)
    classes = _classes_of(y)
    y_idx = _class_index(y, classes)
    n_classes, n_cols = len(classes), X.n_cols
    counts = np.zeros((n_classes, n_cols))
    if len(X.rows):
        flat = y_idx[X.rows] * n_cols + X.cols
        counts = np.bincount(flat, weights=X.counts, minlength=n_classes * n_cols).reshape(
            n_classes, n_cols
        )
    totals = counts.sum(axis=1)
    alpha = spec.nb_alpha
    with np.errstate(divide="ignore", invalid="ignore"):
        log_prob = np.log(counts + alpha) - np.log(totals + alpha * n_cols)[:, None]
        log_prior = np.log(np.bincount(y_idx, minlength=n_classes) / len(y))
    return NaiveBayesModel(classes, log_prior, log_prob)


def _nb_log_scores(model: NaiveBayesModel, X: FeatureMatrix) -> np.ndarray:
    if X.n_cols != model.n_features:
        raise DimensionMismatchError(
            f"matrix has {X.n_cols} features, model expects {model.n_features}"
        )
    scores = np.tile(model.class_log_prior, (X.n_rows, 1))
    for c in range(len(model.classes)):
        scores[:, c] += np.bincount(
            X.rows, weights=X.counts * model.feature_log_prob[c, X.cols], minlength=X.n_rows
        )
    return scores


def predict_nb(model: NaiveBayesModel, X: FeatureMatrix) -> np.ndarray:
    """argmax over classes of log prior + sum of count * log likelihood."""
    scores = _nb_log_scores(model, X)
    return model.classes[np.argmax(scores, axis=1)]


def nb_posterior(model: NaiveBayesModel, X: FeatureMatrix) -> np.ndarray:
    """Normalized class posteriors, one row per instance."""
    scores = _nb_log_scores(model, X)
    m = scores.max(axis=1, keepdims=True)
    p = np.exp(scores - m)
    return p / p.sum(axis=1, keepdims=True)


# ---------------------------------------------------------------------------
# multinomial logistic regression


def _sparse_scores(X: FeatureMatrix, weights: np.ndarray, bias: np.ndarray) -> np.ndarray:
    scores = np.tile(bias, (X.n_rows, 1))
    for c in range(weights.shape[0]):
        scores[:, c] += np.bincount(
            X.rows, weights=X.counts * weights[c, X.cols], minlength=X.n_rows
        )
    return scores


def _softmax(scores: np.ndarray) -> np.ndarray:
    p = np.exp(scores - scores.max(axis=1, keepdims=True))
    return p / p.sum(axis=1, keepdims=True)


def logreg_loss_grad(weights, bias, X: FeatureMatrix, y_idx, l2: float):
    """L2-regularized mean cross-entropy and its analytic gradient.

    The bias is not regularized. Exposed separately so the gradient can be
    checked against finite differences.
    """
    n = X.n_rows
    scores = _sparse_scores(X, weights, bias)
    m = scores.max(axis=1, keepdims=True)
    lse = m[:, 0] + np.log(np.exp(scores - m).sum(axis=1))
    loss = float(np.mean(lse - scores[np.arange(n), y_idx]) + 0.5 * l2 * np.sum(weights * weights))
    probs = _softmax(scores)
    resid = probs
    resid[np.arange(n), y_idx] -= 1.0
    resid /= n
    grad_w = l2 * weights.copy()
    for c in range(weights.shape[0]):
        grad_w[c] += np.bincount(X.cols, weights=X.counts * resid[X.rows, c], minlength=X.n_cols)
    grad_b = resid.sum(axis=0)
    return loss, grad_w, grad_b


def train_logreg(X: FeatureMatrix, y=None, spec: ClassifierSpec | None = None) -> LogisticRegressionModel:
    """Full-batch gradient descent on softmax cross-entropy from zero weights.

    Stops at lr_max_iter or when the gradient max-norm drops below lr_tol.
    Raises DivergenceError if the loss stops being finite.
    """
    spec = spec or ClassifierSpec(kind=ClassifierKind.LOGISTIC_REGRESSION)
    y = np.asarray(X.labels if y is None else y, dtype=np.int64)
    classes = _classes_of(y)
    if len(classes) < 2:
        raise EmptyClassError("logistic regression needs at least 2 classes")
    y_idx = _class_index(y, classes)
    weights = np.zeros((len(classes), X.n_cols))
    bias = np.zeros(len(classes))
    losses = []
    n_iter = 0
    for it in range(spec.lr_max_iter):
        loss, grad_w, grad_b = logreg_loss_grad(weights, bias, X, y_idx, spec.lr_l2)
        if not np.isfinite(loss):
            raise DivergenceError(f"loss became non-finite at iteration {it}")
        losses.append(loss)
        gmax = max(np.abs(grad_w).max() if grad_w.size else 0.0, np.abs(grad_b).max())
        if gmax < spec.lr_tol:
            n_iter = it
            break
        weights -= spec.lr_lr * grad_w
        bias -= spec.lr_lr * grad_b
        n_iter = it + 1
    return LogisticRegressionModel(classes, weights, bias, n_iter, np.asarray(losses))


def logreg_proba(model: LogisticRegressionModel, X: FeatureMatrix) -> np.ndarray:
    if X.n_cols != model.n_features:
        raise DimensionMismatchError(
            f"matrix has {X.n_cols} features, model expects {model.n_features}"
        )
    return _softmax(_sparse_scores(X, model.weights, model.bias))


def predict_logreg(model: LogisticRegressionModel, X: FeatureMatrix) -> np.ndarray:
    if X.n_cols != model.n_features:
        raise DimensionMismatchError(
            f"matrix has {X.n_cols} features, model expects {model.n_features}"
        )
    scores = _sparse_scores(X, model.weights, model.bias)
    return model.classes[np.argmax(scores, axis=1)]


# ---------------------------------------------------------------------------
# CART decision tree


def _best_split(node_rows, col_ptr, col_rows, col_counts, in_node, y_idx, cls_counts, n_classes, min_leaf):
    """Exhaustive minimum-Gini split over (feature, midpoint threshold) pairs.

    Ties go to the lower feature id, then the lower threshold; returns None
    when no split keeps min_leaf rows on both sides.
    """
    n = len(node_rows)
    best = None  # (gini, feature, threshold)
    node_total = float(n)
    for f in range(len(col_ptr) - 1):
        lo, hi = col_ptr[f], col_ptr[f + 1]
        if lo == hi:
            continue
        seg_rows = col_rows[lo:hi]
        mask = in_node[seg_rows]
        if not mask.any():
            continue
        nz_counts = col_counts[lo:hi][mask]
        nz_cls = y_idx[seg_rows[mask]]
        vmax = int(nz_counts.max())
        table = np.zeros((vmax + 1, n_classes))
        np.add.at(table, (nz_counts, nz_cls), 1.0)
        table[0] = cls_counts - table[1:].sum(axis=0)
        present = np.nonzero(table.sum(axis=1) > 0)[0]
        if len(present) < 2:
            continue
        left = np.cumsum(table[present], axis=0)
        n_left = left.sum(axis=1)
        for b in range(len(present) - 1):
            nl = n_left[b]
            nr = node_total - nl
            if nl < min_leaf or nr < min_leaf:
                continue
            lc = left[b]
            rc = cls_counts - lc
            gini_l = 1.0 - np.sum((lc / nl) ** 2)
            gini_r = 1.0 - np.sum((rc / nr) ** 2)
            g = (nl * gini_l + nr * gini_r) / node_total
            t = (present[b] + present[b + 1]) / 2.0
            if best is None or g < best[0]:
                best = (g, f, t)
    return best


def train_tree(X: FeatureMatrix, y=None, spec: ClassifierSpec | None = None) -> DecisionTreeModel:
    """Recursive binary splits on `count(feature) <= threshold`.

    Thresholds are midpoints of consecutive distinct observed counts; a node
    becomes a leaf when pure, at the depth limit, or when no split leaves
    min_leaf rows on each side. Leaf labels are the majority class.
    """
    spec = spec or ClassifierSpec(kind=ClassifierKind.DECISION_TREE)
    y = np.asarray(X.labels if y is None else y, dtype=np.int64)
    if len(y) == 0:
        raise EmptyClassError("no training rows")
    classes = _classes_of(y)
    y_idx = _class_index(y, classes)
    n_classes = len(classes)

    order = np.lexsort((X.rows, X.cols))
    col_rows = X.rows[order]
    col_counts = X.counts[order].astype(np.int64)
    sorted_cols = X.cols[order]
    col_ptr = np.searchsorted(sorted_cols, np.arange(X.n_cols + 1))

    in_node = np.zeros(X.n_rows, dtype=bool)
    pos = np.zeros(X.n_rows, dtype=np.int64)

    def build(rows_idx: np.ndarray, depth: int):
        cls_counts = np.bincount(y_idx[rows_idx], minlength=n_classes).astype(float)
        majority = int(classes[int(np.argmax(cls_counts))])
        if (
            np.count_nonzero(cls_counts) <= 1
            or (spec.tree_max_depth is not None and depth >= spec.tree_max_depth)
            or len(rows_idx) < 2 * spec.tree_min_leaf
        ):
            return TreeLeaf(majority)
        in_node[rows_idx] = True
        found = _best_split(
            rows_idx, col_ptr, col_rows, col_counts, in_node, y_idx, cls_counts, n_classes, spec.tree_min_leaf
        )
        if found is None:
            in_node[rows_idx] = False
            return TreeLeaf(majority)
        _, f, t = found
        values = np.zeros(len(rows_idx), dtype=np.int64)
        pos[rows_idx] = np.arange(len(rows_idx))
        lo, hi = col_ptr[f], col_ptr[f + 1]
        seg_rows = col_rows[lo:hi]
        member = in_node[seg_rows]
        values[pos[seg_rows[member]]] = col_counts[lo:hi][member]
        in_node[rows_idx] = False
        go_left = values <= t
        left = build(rows_idx[go_left], depth + 1)
        right = build(rows_idx[~go_left], depth + 1)
        return TreeSplit(int(f), float(t), left, right)

    root = build(np.arange(X.n_rows, dtype=np.int64), 0)
    return DecisionTreeModel(classes, root, X.n_cols)


def predict_tree(model: DecisionTreeModel, X: FeatureMatrix) -> np.ndarray:
    if X.n_cols != model.n_features:
        raise DimensionMismatchError(
            f"matrix has {X.n_cols} features, model expects {model.n_features}"
        )
    out = np.empty(X.n_rows, dtype=np.int64)
    for i in range(X.n_rows):
        row = dict(X.row_items(i))
        node = model.root
        while isinstance(node, TreeSplit):
            node = node.left if row.get(node.feature, 0) <= node.threshold else node.right
        out[i] = node.label
    return out


# ---------------------------------------------------------------------------
# shared surface


def predict(model: TrainedModel, X: FeatureMatrix) -> np.ndarray:
    if isinstance(model, NaiveBayesModel):
        return predict_nb(model, X)
    if isinstance(model, LogisticRegressionModel):
        return predict_logreg(model, X)
    if isinstance(model, DecisionTreeModel):
        return predict_tree(model, X)
    raise TypeError(f"not a trained model: {type(model)!r}")


def train(X: FeatureMatrix, y=None, spec: ClassifierSpec | None = None) -> TrainedModel:
    spec = spec or ClassifierSpec()
    if spec.kind is ClassifierKind.NAIVE_BAYES:
        return train_nb(X, y, spec)
    if spec.kind is ClassifierKind.LOGISTIC_REGRESSION:
        return train_logreg(X, y, spec)
    return train_tree(X, y, spec)


def accuracy(pred, gold) -> float:
    pred = np.asarray(pred)
    gold = np.asarray(gold)
    if pred.shape != gold.shape:
        raise DimensionMismatchError(f"length mismatch: {pred.shape} vs {gold.shape}")
    if len(pred) == 0:
        raise DimensionMismatchError("empty prediction vector")
    return float(np.mean(pred == gold))


# ---------------------------------------------------------------------------
# versioned text serialization


def _fmt_vec(v) -> str:
    return " ".join(_FLOAT_FMT.format(float(x)) for x in v)


def _tree_lines(node, out: list[str]) -> None:
    if isinstance(node, TreeLeaf):
        out.append(f"leaf {node.label}")
    else:
        out.append(f"split {node.feature} {_FLOAT_FMT.format(node.threshold)}")
        _tree_lines(node.left, out)
        _tree_lines(node.right, out)


def save_model(model: TrainedModel, path, header_lines=()) -> None:
    lines = [f"# {h}" for h in header_lines]
    lines.append(f"model {model.kind.value} {_MODEL_VERSION}")
    lines.append("classes " + " ".join(str(int(c)) for c in model.classes))
    if isinstance(model, NaiveBayesModel):
        lines.append("priors " + _fmt_vec(model.class_log_prior))
        for c in range(len(model.classes)):
            lines.append("likelihood " + _fmt_vec(model.feature_log_prob[c]))
    elif isinstance(model, LogisticRegressionModel):
        lines.append("bias " + _fmt_vec(model.bias))
        for c in range(len(model.classes)):
            lines.append("weights " + _fmt_vec(model.weights[c]))
    else:
        _tree_lines(model.root, lines)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _parse_tree(lines: list[str], pos: int):
    head = lines[pos].split()
    if head[0] == "leaf":
        return TreeLeaf(int(head[1])), pos + 1
    f, t = int(head[1]), float(head[2])
    left, pos = _parse_tree(lines, pos + 1)
    right, pos = _parse_tree(lines, pos)
    return TreeSplit(f, t, left, right), pos


def load_model(path) -> TrainedModel:
    lines = [
        ln for ln in Path(path).read_text(encoding="utf-8").splitlines() if ln and not ln.startswith("#")
    ]
    head = lines[0].split()
    if head[0] != "model" or int(head[2]) != _MODEL_VERSION:
        raise ValueError(f"{path}: not a version-{_MODEL_VERSION} model file")
    kind = ClassifierKind(head[1])
    classes = np.asarray([int(x) for x in lines[1].split()[1:]], dtype=np.int64)
    if kind is ClassifierKind.NAIVE_BAYES:
        priors = np.asarray([float(x) for x in lines[2].split()[1:]])
        probs = np.asarray([[float(x) for x in ln.split()[1:]] for ln in lines[3 : 3 + len(classes)]])
        return NaiveBayesModel(classes, priors, probs)
    if kind is ClassifierKind.LOGISTIC_REGRESSION:
        bias = np.asarray([float(x) for x in lines[2].split()[1:]])
        weights = np.asarray([[float(x) for x in ln.split()[1:]] for ln in lines[3 : 3 + len(classes)]])
        return LogisticRegressionModel(classes, weights, bias)
    root, _ = _parse_tree(lines, 2)
    n_features = 0
    stack = [root]
    while stack:
        node = stack.pop()
        if isinstance(node, TreeSplit):
            n_features = max(n_features, node.feature + 1)
            stack.extend((node.left, node.right))
    return DecisionTreeModel(classes, root, n_features)
