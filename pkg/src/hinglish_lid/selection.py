"""Feature selection over sparse count matrices.

Three selectors share one result type: chi-square top-k filtering, greedy
forward selection driven by a cross-validated classifier objective, and
recursive feature elimination ranked by multinomial logistic regression
coefficients. Every tie resolves on feature id so results are reproducible.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import classifiers
from .classifiers import ClassifierKind, ClassifierSpec
from .ngrams import FeatureMatrix, Vocabulary, project_columns, take_rows


class SingleClassError(Exception):
    pass


class KTooLargeError(Exception):
    pass


class RankingModelDivergenceError(Exception):
    pass


class SelectionMethod(enum.Enum):
    TOP_K = "topk"
    FORWARD = "forward"
    RFE = "rfe"


@dataclass(frozen=True)
class SelectorConfig:
    method: SelectionMethod = SelectionMethod.TOP_K
    k: int = 50
    candidate_pool: int | None = None  # None -> 10*k, clamped to the feature count
    rfe_step: int = 1
    objective_folds: int = 3
    seed: int = 0

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.rfe_step < 1:
            raise ValueError("rfe_step must be >= 1")
        if self.objective_folds < 2:
            raise ValueError("objective_folds must be >= 2")
        if self.candidate_pool is not None and self.candidate_pool < self.k:
            raise ValueError("candidate_pool must be >= k")


@dataclass(frozen=True)
class TraceStep:
    action: str  # "add" or "remove"
    feature: int
    value: float


@dataclass
class SelectionResult:
    selected: list[int]
    scores: list[float]
    trace: list[TraceStep] = field(default_factory=list)


# ---------------------------------------------------------------------------
# chi-square filter


def chi_square_scores(X: FeatureMatrix, y=None) -> np.ndarray:
    """Count-based chi-square score of every feature against the labels.

    For feature f with per-class observed count totals O_c and F = sum OF
    those totals, the expectation under class-prior independence is
    E_c = F * p_c with p_c the class row fraction; the score sums
    (O_c - E_c)^2 / E_c over classes, a term being 0 whenever E_c = 0.
    """
    y = np.asarray(X.labels if y is None else y, dtype=np.int64)
    classes = np.unique(y)
    if len(classes) < 2:
        raise SingleClassError("chi-square needs at least 2 distinct labels")
    y_idx = np.searchsorted(classes, y)
    n_classes = len(classes)
    observed = np.zeros((n_classes, X.n_cols))
    if len(X.rows):
        flat = y_idx[X.rows] * X.n_cols + X.cols
        observed = np.bincount(flat, weights=X.counts, minlength=n_classes * X.n_cols).reshape(
            n_classes, X.n_cols
        )
    feature_total = observed.sum(axis=0)
    class_prob = np.bincount(y_idx, minlength=n_classes) / len(y)
    expected = class_prob[:, None] * feature_total[None, :]
    diff2 = (observed - expected) ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(expected > 0, diff2 / expected, 0.0)
    return terms.sum(axis=0)


def select_top_k(scores, k: int) -> SelectionResult:
    """The k highest-scoring feature ids, ties broken by the lower id."""
    scores = np.asarray(scores, dtype=float)
    if k > len(scores):
        raise KTooLargeError(f"k={k} exceeds {len(scores)} features")
    if k < 1:
        raise ValueError("k must be >= 1")
    order = np.lexsort((np.arange(len(scores)), -scores))
    chosen = order[:k]
    selected = [int(j) for j in chosen]
    sel_scores = [float(scores[j]) for j in chosen]
    trace = [TraceStep("add", f, s) for f, s in zip(selected, sel_scores)]
    return SelectionResult(selected, sel_scores, trace)


# ---------------------------------------------------------------------------
# stratified folds and the wrapper objective


def stratified_fold_ids(y, n_folds: int, seed: int) -> np.ndarray:
    """Fold id per row; each class is shuffled then dealt round-robin."""
    y = np.asarray(y, dtype=np.int64)
    rng = np.random.default_rng(seed)
    fold_of = np.empty(len(y), dtype=np.int64)
    for c in np.unique(y):
        idx = np.flatnonzero(y == c)
        perm = rng.permutation(len(idx))
        fold_of[idx[perm]] = np.arange(len(idx)) % n_folds
    return fold_of


class _NBFold:
    """Per-fold state for the incremental naive Bayes CV objective."""

    def __init__(self, X: FeatureMatrix, y_idx, n_classes, fold_of, fold, alpha):
        test_rows = np.flatnonzero(fold_of == fold)
        train_mask = fold_of != fold
        n_cols = X.n_cols
        tri = train_mask[X.rows] if len(X.rows) else np.zeros(0, dtype=bool)
        flat = y_idx[X.rows[tri]] * n_cols + X.cols[tri]
        self.N = np.bincount(flat, weights=X.counts[tri], minlength=n_classes * n_cols).reshape(
            n_classes, n_cols
        )
        with np.errstate(divide="ignore"):
            self.L = np.log(self.N + alpha)
            train_counts = np.bincount(y_idx[np.flatnonzero(train_mask)], minlength=n_classes)
            self.log_prior = np.log(train_counts / train_counts.sum())
        remap = np.full(X.n_rows, -1, dtype=np.int64)
        remap[test_rows] = np.arange(len(test_rows))
        te = ~tri if len(X.rows) else np.zeros(0, dtype=bool)
        t_rows = remap[X.rows[te]]
        t_cols = X.cols[te]
        t_counts = X.counts[te].astype(float)
        order = np.lexsort((t_rows, t_cols))
        self.t_rows = t_rows[order]
        self.t_cols = t_cols[order]
        self.t_counts = t_counts[order]
        self.col_ptr = np.searchsorted(self.t_cols, np.arange(n_cols + 1))
        self.y_test = y_idx[test_rows]
        self.n_test = len(test_rows)
        self.n_classes = n_classes
        self.reset()

    def reset(self):
        self.A = np.zeros((self.n_test, self.n_classes))
        self.R = np.zeros(self.n_test)
        self.T = np.zeros(self.n_classes)

    def add_feature(self, j: int):
        lo, hi = self.col_ptr[j], self.col_ptr[j + 1]
        rows = self.t_rows[lo:hi]
        cnt = self.t_counts[lo:hi]
        self.A[rows] += cnt[:, None] * self.L[:, j][None, :]
        self.R[rows] += cnt
        self.T += self.N[:, j]

    def fold_accuracy(self, alpha: float, m: int) -> float:
        D = np.log(self.T + alpha * m)
        scores = (self.log_prior[None, :] + self.A) - self.R[:, None] * D[None, :]
        pred = np.argmax(scores, axis=1)
        return float(np.mean(pred == self.y_test))

    def candidate_accuracies(self, cands: np.ndarray, alpha: float, m: int) -> np.ndarray:
        """Accuracy of the current subset extended by each candidate.

        Bit-identical to add_feature followed by fold_accuracy: the tensor
        expressions reproduce the same per-element operation order.
        """
        n_cand = len(cands)
        candpos = np.full(len(self.col_ptr) - 1, -1, dtype=np.int64)
        candpos[cands] = np.arange(n_cand)
        active = candpos[self.t_cols] >= 0 if len(self.t_cols) else np.zeros(0, dtype=bool)
        Xc = np.zeros((self.n_test, n_cand))
        Xc[self.t_rows[active], candpos[self.t_cols[active]]] = self.t_counts[active]
        # In-place updates keep the per-element operation order of
        # add_feature + fold_accuracy (addition commutes bitwise).
        scores = Xc[:, :, None] * self.L[:, cands].T[None, :, :]
        scores += self.A[:, None, :]
        scores += self.log_prior[None, None, :]
        Rp = self.R[:, None] + Xc
        D3 = np.log((self.T[None, :] + self.N[:, cands].T) + alpha * (m + 1))
        for c in range(self.n_classes):
            scores[:, :, c] -= Rp * D3[None, :, c]
        pred = np.argmax(scores, axis=2)
        return np.mean(pred == self.y_test[:, None], axis=0)


class _NaiveBayesObjective:
    """Shared-fold CV accuracy of multinomial naive Bayes on a feature subset.

    Evaluating a subset decomposes the NB log-posterior into a per-feature
    numerator sum and a subset-wide denominator, which lets one greedy step
    score every remaining candidate from the current subset's state instead
    of retraining per candidate.
    """

    def __init__(self, X: FeatureMatrix, y, folds: int, seed: int, alpha: float):
        if alpha <= 0:
            raise ValueError("the naive Bayes objective requires nb_alpha > 0")
        y = np.asarray(y, dtype=np.int64)
        classes = np.unique(y)
        y_idx = np.searchsorted(classes, y)
        fold_of = stratified_fold_ids(y, folds, seed)
        self.alpha = float(alpha)
        self.m = 0
        self.folds = [
            f
            for f in (_NBFold(X, y_idx, len(classes), fold_of, i, self.alpha) for i in range(folds))
            if f.n_test > 0
        ]

    def evaluate(self, subset) -> float:
        """Fresh objective value of an ordered subset (base state untouched)."""
        saved = [(f.A, f.R, f.T) for f in self.folds]
        saved_m = self.m
        for f in self.folds:
            f.reset()
        self.m = 0
        for j in subset:
            self.push(int(j))
        acc = float(np.mean([f.fold_accuracy(self.alpha, self.m) for f in self.folds]))
        for f, (A, R, T) in zip(self.folds, saved):
            f.A, f.R, f.T = A, R, T
        self.m = saved_m
        return acc

    def push(self, j: int):
        for f in self.folds:
            f.add_feature(j)
        self.m += 1

    def evaluate_candidates(self, cands: np.ndarray) -> np.ndarray:
        per_fold = np.stack(
            [f.candidate_accuracies(cands, self.alpha, self.m) for f in self.folds], axis=0
        )
        return per_fold.mean(axis=0)


def wrapper_objective(X: FeatureMatrix, y, subset, classifier_spec: ClassifierSpec,
                      folds: int = 3, seed: int = 0) -> float:
    """Mean stratified-CV accuracy of the classifier on the feature subset.

    Folds depend only on (y, folds, seed), so evaluations within one greedy
    step are paired. Classifier training errors propagate to the caller.
    """
    subset = [int(j) for j in subset]
    if not subset:
        raise ValueError("subset must be non-empty")
    y = np.asarray(X.labels if y is None else y, dtype=np.int64)
    if classifier_spec.kind is ClassifierKind.NAIVE_BAYES:
        obj = _NaiveBayesObjective(X, y, folds, seed, classifier_spec.nb_alpha)
        return obj.evaluate(subset)
    Xs = project_columns(X, subset)
    fold_of = stratified_fold_ids(y, folds, seed)
    accs = []
    for f in range(folds):
        test_rows = np.flatnonzero(fold_of == f)
        if len(test_rows) == 0:
            continue
        train_rows = np.flatnonzero(fold_of != f)
        model = classifiers.train(take_rows(Xs, train_rows), y[train_rows], classifier_spec)
        pred = classifiers.predict(model, take_rows(Xs, test_rows))
        accs.append(classifiers.accuracy(pred, y[test_rows]))
    return float(np.mean(accs))


# ---------------------------------------------------------------------------
# forward selection


def forward_select(X: FeatureMatrix, y=None, classifier_spec: ClassifierSpec | None = None,
                   config: SelectorConfig | None = None) -> SelectionResult:
    """Greedy wrapper selection: grow the subset by the candidate with the
    best shared-fold CV accuracy, ties to the lower feature id.

    When the candidate pool is smaller than the feature count, candidates
    are pre-trimmed to the pool size by chi-square score, which bounds the
    quadratic wrapper cost. A naive Bayes objective is evaluated through
    the incremental scorer; other classifiers retrain per candidate.
    """
    config = config or SelectorConfig(method=SelectionMethod.FORWARD)
    classifier_spec = classifier_spec or ClassifierSpec(kind=ClassifierKind.NAIVE_BAYES)
    y = np.asarray(X.labels if y is None else y, dtype=np.int64)
    k = config.k
    if k > X.n_cols:
        raise KTooLargeError(f"k={k} exceeds {X.n_cols} features")
    pool_size = config.candidate_pool if config.candidate_pool is not None else 10 * k
    pool_size = min(pool_size, X.n_cols)
    if pool_size < k:
        raise KTooLargeError(f"candidate pool {pool_size} smaller than k={k}")
    if pool_size < X.n_cols:
        pool = select_top_k(chi_square_scores(X, y), pool_size).selected
    else:
        pool = list(range(X.n_cols))
    remaining = np.array(sorted(pool), dtype=np.int64)

    nb_obj = None
    if classifier_spec.kind is ClassifierKind.NAIVE_BAYES:
        nb_obj = _NaiveBayesObjective(X, y, config.objective_folds, config.seed, classifier_spec.nb_alpha)

    selected: list[int] = []
    scores: list[float] = []
    trace: list[TraceStep] = []
    for _ in range(k):
        if nb_obj is not None:
            accs = nb_obj.evaluate_candidates(remaining)
            best_pos = int(np.argmax(accs))
            best_acc = float(accs[best_pos])
        else:
            best_pos, best_acc = 0, -np.inf
            for pos, f in enumerate(remaining):
                acc = wrapper_objective(
                    X, y, selected + [int(f)], classifier_spec, config.objective_folds, config.seed
                )
                if acc > best_acc:
                    best_pos, best_acc = pos, acc
        best = int(remaining[best_pos])
        if nb_obj is not None:
            nb_obj.push(best)
        selected.append(best)
        scores.append(best_acc)
        trace.append(TraceStep("add", best, best_acc))
        remaining = np.delete(remaining, best_pos)
    return SelectionResult(selected, scores, trace)


# ---------------------------------------------------------------------------
# recursive feature elimination


def _feature_importance(X: FeatureMatrix, y, surviving, ranking_spec: ClassifierSpec) -> np.ndarray:
    """L2 norm of each surviving feature's per-class weights."""
    try:
        model = classifiers.train_logreg(project_columns(X, surviving), y, ranking_spec)
    except classifiers.DivergenceError as exc:
        raise RankingModelDivergenceError(str(exc)) from exc
    return np.sqrt((model.weights**2).sum(axis=0))


def rfe_path(X: FeatureMatrix, y, config: SelectorConfig, checkpoints,
             ranking_spec: ClassifierSpec | None = None) -> dict[int, SelectionResult]:
    """One elimination pass, snapshotting the survivor set at each checkpoint.

    Rounds remove min(rfe_step, surviving - next_checkpoint) features, so a
    single pass yields the result for every requested k; with a single
    checkpoint this is plain recursive elimination.
    """
    ranking_spec = ranking_spec or ClassifierSpec(kind=ClassifierKind.LOGISTIC_REGRESSION)
    y = np.asarray(X.labels if y is None else y, dtype=np.int64)
    checkpoints = sorted(set(int(k) for k in checkpoints), reverse=True)
    for k in checkpoints:
        if k > X.n_cols:
            raise KTooLargeError(f"k={k} exceeds {X.n_cols} features")
        if k < 1:
            raise ValueError("k must be >= 1")

    surviving = np.arange(X.n_cols, dtype=np.int64)
    trace: list[TraceStep] = []
    results: dict[int, SelectionResult] = {}
    for target in checkpoints:
        while len(surviving) > target:
            imp = _feature_importance(X, y, surviving, ranking_spec)
            n_remove = min(config.rfe_step, len(surviving) - target)
            order = np.lexsort((-surviving, imp))  # importance asc, id desc
            victim_pos = order[:n_remove]
            for p in victim_pos:
                trace.append(TraceStep("remove", int(surviving[p]), float(imp[p])))
            keep_mask = np.ones(len(surviving), dtype=bool)
            keep_mask[victim_pos] = False
            surviving = surviving[keep_mask]
        results[target] = SelectionResult(
            [int(j) for j in surviving], [1.0] * len(surviving), list(trace)
        )
    return results


def recursive_eliminate(X: FeatureMatrix, y=None, config: SelectorConfig | None = None,
                        ranking_spec: ClassifierSpec | None = None) -> SelectionResult:
    """Repeatedly drop the lowest-importance features until k survive.

    The ranking model is multinomial logistic regression refit on each
    surviving set; importance ties remove the higher feature id first.
    """
    config = config or SelectorConfig(method=SelectionMethod.RFE)
    return rfe_path(X, y, config, [config.k], ranking_spec)[config.k]


def recursive_eliminate_cv(X: FeatureMatrix, y=None, config: SelectorConfig | None = None,
                           k_candidates=(), classifier_spec: ClassifierSpec | None = None
                           ) -> tuple[int, SelectionResult]:
    """Pick the candidate k whose surviving subset has the best CV accuracy.

    Ties go to the smaller k. The scoring classifier defaults to the same
    logistic regression used for ranking.
    """
    config = config or SelectorConfig(method=SelectionMethod.RFE)
    if not k_candidates:
        raise ValueError("k_candidates must be non-empty")
    classifier_spec = classifier_spec or ClassifierSpec(kind=ClassifierKind.LOGISTIC_REGRESSION)
    best = None
    for k in sorted(set(int(k) for k in k_candidates)):
        res = recursive_eliminate(X, y, replace(config, k=k))
        score = wrapper_objective(
            X, y, res.selected, classifier_spec, config.objective_folds, config.seed
        )
        if best is None or score > best[0]:
            best = (score, k, res)
    return best[1], best[2]


# ---------------------------------------------------------------------------
# serialization


def save_selection(result: SelectionResult, vocab: Vocabulary, config: SelectorConfig,
                   path, header_lines=()) -> None:
    """Text file: config header, then feature_id / gram / score lines in
    selection order."""
    with open(path, "w", encoding="utf-8") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        fh.write(f"# method={config.method.value} k={config.k} seed={config.seed}\n")
        for fid, score in zip(result.selected, result.scores):
            fh.write(f"{fid}\t{vocab.grams[fid]}\t{score:.17g}\n")


def load_selection(path) -> tuple[dict, list[tuple[int, str, float]]]:
    meta: dict = {}
    rows = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("method="):
                for part in body.split():
                    key, _, value = part.partition("=")
                    meta[key] = value
            continue
        if not line:
            continue
        fid, gram, score = line.split("\t")
        rows.append((int(fid), gram, float(score)))
    return meta, rows
