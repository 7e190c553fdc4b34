"""Train/test splitting, the selector x classifier x profile x k experiment
grid, and emission of result tables and accuracy curves."""

from __future__ import annotations

import enum
import hashlib
import math
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import classifiers, selection
from .classifiers import ClassifierKind, ClassifierSpec
from .ngrams import NGramSpec, build_vocabulary, featurize, project_columns
from .selection import SelectionMethod, SelectorConfig, SelectionResult


class ClassTooSmallError(Exception):
    pass


class SplitKind(enum.Enum):
    HOLDOUT = "holdout"
    KFOLD = "kfold"


@dataclass(frozen=True)
class SplitPlan:
    kind: SplitKind = SplitKind.HOLDOUT
    train_fraction: float = 0.8
    folds: int = 5
    stratified: bool = True
    seed: int = 42

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError("train_fraction must be in (0, 1)")
        if self.folds < 2:
            raise ValueError("folds must be >= 2")


@dataclass
class ExperimentRecord:
    """One grid cell: fully materialized configs plus its outcome."""

    profile: NGramSpec
    selector: SelectorConfig
    classifier: ClassifierSpec
    k: int
    accuracy: float
    wall_time: float
    seed: int
    error: str | None = None


def _labels_of(data) -> np.ndarray:
    labels = getattr(data, "labels", None)
    if labels is None:
        try:
            labels = np.asarray([int(w.tag) for w in data], dtype=np.int64)
        except (TypeError, AttributeError):
            labels = np.asarray(data, dtype=np.int64)
    return np.asarray(labels, dtype=np.int64)


def stratified_holdout(data, plan: SplitPlan) -> tuple[np.ndarray, np.ndarray]:
    """Seeded per-class proportional split; returns (train, test) index lists.

    Accepts a FeatureMatrix, a labeled word list, or a plain label vector;
    only indices are produced, no data is copied.
    """
    y = _labels_of(data)
    rng = np.random.default_rng(plan.seed)
    train, test = [], []
    if plan.stratified:
        for c in np.unique(y):
            idx = np.flatnonzero(y == c)
            if len(idx) < 2:
                raise ClassTooSmallError(f"class {c} has {len(idx)} instance(s); need >= 2")
            perm = idx[rng.permutation(len(idx))]
            n_train = min(len(idx) - 1, max(1, int(math.floor(plan.train_fraction * len(idx) + 0.5))))
            train.extend(perm[:n_train].tolist())
            test.extend(perm[n_train:].tolist())
    else:
        perm = rng.permutation(len(y))
        n_train = min(len(y) - 1, max(1, int(math.floor(plan.train_fraction * len(y) + 0.5))))
        train = perm[:n_train].tolist()
        test = perm[n_train:].tolist()
    return np.asarray(sorted(train), dtype=np.int64), np.asarray(sorted(test), dtype=np.int64)


def split_pairs(data, plan: SplitPlan) -> list[tuple[np.ndarray, np.ndarray]]:
    """The plan's (train, test) index pairs: one for holdout, `folds` for CV."""
    if plan.kind is SplitKind.HOLDOUT:
        return [stratified_holdout(data, plan)]
    y = _labels_of(data)
    if plan.stratified:
        fold_of = selection.stratified_fold_ids(y, plan.folds, plan.seed)
    else:
        rng = np.random.default_rng(plan.seed)
        fold_of = rng.permutation(len(y)) % plan.folds
    pairs = []
    for f in range(plan.folds):
        pairs.append((np.flatnonzero(fold_of != f), np.flatnonzero(fold_of == f)))
    return pairs


def derive_seed(*parts) -> int:
    """Stable 63-bit seed from the global seed and cell coordinates."""
    digest = hashlib.blake2b(":".join(str(p) for p in parts).encode(), digest_size=8).digest()
    return int.from_bytes(digest, "big") >> 1


def _selector_results(method: SelectionMethod, X_train, y_train, ks: list[int],
                      sel_seed: int, *, objective_folds, rfe_step, candidate_pool,
                      wrapper_spec, ranking_spec) -> dict[int, tuple[SelectorConfig, SelectionResult]]:
    """Run one selector once per (profile, split) group, covering every k.

    Top-k results are prefixes of one ranking, forward-selection results are
    prefixes of one greedy trace, and RFE snapshots one elimination pass at
    each k, so the sweep costs a single selector run.
    """
    k_max = max(ks)
    out: dict[int, tuple[SelectorConfig, SelectionResult]] = {}
    if method is SelectionMethod.TOP_K:
        scores = selection.chi_square_scores(X_train, y_train)
        for k in sorted(set(ks)):
            config = SelectorConfig(method, k, objective_folds=objective_folds, seed=sel_seed)
            out[k] = (config, selection.select_top_k(scores, k))
    elif method is SelectionMethod.FORWARD:
        pool = min(candidate_pool if candidate_pool is not None else 10 * k_max, X_train.n_cols)
        config_max = SelectorConfig(
            method, k_max, candidate_pool=pool, objective_folds=objective_folds, seed=sel_seed
        )
        full = selection.forward_select(X_train, y_train, wrapper_spec, config_max)
        for k in sorted(set(ks)):
            out[k] = (
                replace(config_max, k=k),
                SelectionResult(full.selected[:k], full.scores[:k], full.trace[:k]),
            )
    else:
        config = SelectorConfig(
            method, min(ks), rfe_step=rfe_step, objective_folds=objective_folds, seed=sel_seed
        )
        path = selection.rfe_path(X_train, y_train, config, sorted(set(ks)), ranking_spec)
        for k in sorted(set(ks)):
            out[k] = (replace(config, k=k), path[k])
    return out


def run_grid(corpus, selectors, classifier_specs, profiles, k_values, plan: SplitPlan,
             *, min_count: int = 1, wrapper_spec: ClassifierSpec | None = None,
             ranking_spec: ClassifierSpec | None = None, objective_folds: int = 3,
             rfe_step: int = 10, candidate_pool: int | None = None,
             jobs: int = 1, measure_time: bool = True) -> list[ExperimentRecord]:
    """Evaluate every (profile, selector, classifier, k) cell of the grid.

    Per split: the vocabulary is built from training words only, selection
    sees only training rows, both splits are projected to the selected
    features, and the classifier is scored on the held-out rows. k values
    above a profile's vocabulary size clamp to it with a warning. Cell
    errors are recorded in the cell; the grid continues.
    """
    wrapper_spec = wrapper_spec or ClassifierSpec(kind=ClassifierKind.NAIVE_BAYES)
    ranking_spec = ranking_spec or ClassifierSpec(kind=ClassifierKind.LOGISTIC_REGRESSION)
    corpus = list(corpus)
    k_values = sorted(set(int(k) for k in k_values))
    pairs = split_pairs(corpus, plan)

    # (profile_idx, fold) -> (X_train, X_test), and per selector the k -> result map
    matrices: dict[tuple[int, int], tuple] = {}
    sel_runs: dict[tuple[int, int, SelectionMethod], dict] = {}
    clamped: dict[int, dict[int, int]] = {}
    for p_idx, profile in enumerate(profiles):
        for fold, (train_idx, test_idx) in enumerate(pairs):
            train_words = [corpus[i] for i in train_idx]
            test_words = [corpus[i] for i in test_idx]
            vocab = build_vocabulary(train_words, profile, min_count)
            X_train = featurize(train_words, vocab)
            X_test = featurize(test_words, vocab)
            matrices[(p_idx, fold)] = (X_train, X_test)
            if fold == 0:
                kmap = {}
                for k in k_values:
                    kmap[k] = min(k, len(vocab))
                    if k > len(vocab):
                        warnings.warn(
                            f"profile {profile.label}: k={k} clamped to vocabulary size {len(vocab)}"
                        )
                clamped[p_idx] = kmap
            ks = sorted(set(min(k, X_train.n_cols) for k in k_values))
            for method in selectors:
                sel_seed = derive_seed(plan.seed, "selector", profile.label, method.value, fold)
                sel_runs[(p_idx, fold, method)] = _selector_results(
                    method, X_train, X_train.labels, ks, sel_seed,
                    objective_folds=objective_folds, rfe_step=rfe_step,
                    candidate_pool=candidate_pool, wrapper_spec=wrapper_spec,
                    ranking_spec=ranking_spec,
                )

    cells = []
    for p_idx, profile in enumerate(profiles):
        for method in selectors:
            for cls_spec in classifier_specs:
                for k in k_values:
                    cells.append((p_idx, profile, method, cls_spec, k))

    def run_cell(cell):
        p_idx, profile, method, cls_spec, k = cell
        t0 = time.perf_counter() if measure_time else 0.0
        cell_seed = derive_seed(plan.seed, profile.label, method.value, cls_spec.kind.value, k)
        config = None
        accs = []
        error = None
        for fold in range(len(pairs)):
            X_train, X_test = matrices[(p_idx, fold)]
            k_eff = min(k, X_train.n_cols)
            config, result = sel_runs[(p_idx, fold, method)][k_eff]
            try:
                Xtr = project_columns(X_train, result.selected)
                Xte = project_columns(X_test, result.selected)
                model = classifiers.train(Xtr, Xtr.labels, cls_spec)
                pred = classifiers.predict(model, Xte)
                accs.append(classifiers.accuracy(pred, Xte.labels))
            except Exception as exc:  # recorded, grid continues
                error = f"{type(exc).__name__}: {exc}"
                break
        wall = time.perf_counter() - t0 if measure_time else 0.0
        acc = float(np.mean(accs)) if error is None else float("nan")
        return ExperimentRecord(profile, config, cls_spec, k, acc, wall, cell_seed, error)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(run_cell, cells))
    else:
        records = [run_cell(cell) for cell in cells]

    records.sort(key=lambda r: (r.profile.label, r.selector.method.value, r.classifier.kind.value, r.k))
    return records


# ---------------------------------------------------------------------------
# result emission

CSV_COLUMNS = ("profile", "selector", "classifier", "k", "accuracy", "wall_time_s", "seed")


def emit_results_csv(records, path, header_lines=()) -> None:
    """One header row plus one row per record, in stable column order."""
    if not records:
        raise ValueError("no records to emit")
    lines = [f"# {h}" for h in header_lines]
    lines.append(",".join(CSV_COLUMNS))
    for r in records:
        lines.append(
            ",".join(
                (
                    r.profile.label,
                    r.selector.method.value,
                    r.classifier.kind.value,
                    str(r.k),
                    repr(float(r.accuracy)),
                    repr(float(r.wall_time)),
                    str(r.seed),
                )
            )
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


@dataclass
class CsvRow:
    profile: str
    selector: str
    classifier: str
    k: int
    accuracy: float
    wall_time_s: float
    seed: int


def parse_results_csv(path) -> list[CsvRow]:
    rows = []
    header_seen = False
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line or line.startswith("#"):
            continue
        if not header_seen:
            if tuple(line.split(",")) != CSV_COLUMNS:
                raise ValueError(f"{path}: unexpected CSV header {line!r}")
            header_seen = True
            continue
        profile, sel, cls, k, acc, wall, seed = line.split(",")
        rows.append(CsvRow(profile, sel, cls, int(k), float(acc), float(wall), int(seed)))
    return rows


_CLASSIFIER_COLORS = {"nb": "#1f77b4", "logreg": "#d62728", "tree": "#2ca02c"}
_SELECTOR_DASHES = {"topk": "", "forward": "7 3", "rfe": "2 3"}


def emit_curves_svg(records, path, header_lines=()) -> None:
    """Accuracy-versus-k curves, one panel per profile, one polyline per
    (selector, classifier) pair. Standalone SVG, no external resources."""
    if not records:
        raise ValueError("no records to emit")
    panels: dict[str, dict[tuple[str, str], list[tuple[int, float]]]] = {}
    for r in records:
        if r.error is not None or not math.isfinite(r.accuracy):
            continue
        series = panels.setdefault(r.profile.label, {})
        series.setdefault((r.selector.method.value, r.classifier.kind.value), []).append(
            (r.k, r.accuracy)
        )
    if not panels:
        raise ValueError("no plottable records (all cells errored)")

    pw, ph = 520, 300
    ml, mr, mt, mb = 60, 180, 36, 50
    panel_names = sorted(panels)
    width = pw + ml + mr
    height = (ph + mt + mb) * len(panel_names)
    all_ks = sorted({k for series in panels.values() for pts in series.values() for k, _ in pts})
    k_lo, k_hi = min(all_ks), max(all_ks)
    span = max(k_hi - k_lo, 1)

    def sx(k):
        return ml + pw * (k - k_lo) / span

    out = []
    for line in header_lines:
        out.append(f"<!-- {line} -->")
    out.append(
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">'
    )
    out.append(f'<rect width="{width}" height="{height}" fill="white"/>')
    for p_i, name in enumerate(panel_names):
        top = (ph + mt + mb) * p_i + mt

        def sy(a):
            return top + ph * (1.0 - a)

        out.append(
            f'<text x="{ml + pw / 2:.1f}" y="{top - 14}" text-anchor="middle" font-size="14">'
            f"profile n={name}</text>"
        )
        out.append(
            f'<rect x="{ml}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="#999"/>'
        )
        for tick in (0.0, 0.2, 0.4, 0.6, 0.8, 1.0):
            y = sy(tick)
            out.append(f'<line x1="{ml - 4}" y1="{y:.1f}" x2="{ml}" y2="{y:.1f}" stroke="#333"/>')
            out.append(
                f'<text x="{ml - 8}" y="{y + 4:.1f}" text-anchor="end">{tick:.1f}</text>'
            )
        for k in all_ks:
            x = sx(k)
            out.append(
                f'<line x1="{x:.1f}" y1="{top + ph}" x2="{x:.1f}" y2="{top + ph + 4}" stroke="#333"/>'
            )
            out.append(
                f'<text x="{x:.1f}" y="{top + ph + 18}" text-anchor="middle">{k}</text>'
            )
        out.append(
            f'<text x="{ml + pw / 2:.1f}" y="{top + ph + 38}" text-anchor="middle">'
            "number of features selected</text>"
        )
        out.append(
            f'<text x="{ml - 44}" y="{top + ph / 2:.1f}" text-anchor="middle" '
            f'transform="rotate(-90 {ml - 44} {top + ph / 2:.1f})">accuracy</text>'
        )
        legend_y = top + 10
        for (sel, cls), pts in sorted(panels[name].items()):
            pts = sorted(pts)
            color = _CLASSIFIER_COLORS.get(cls, "#555")
            dash = _SELECTOR_DASHES.get(sel, "")
            dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
            coords = " ".join(f"{sx(k):.2f},{sy(a):.2f}" for k, a in pts)
            out.append(
                f'<polyline fill="none" stroke="{color}" stroke-width="1.6"{dash_attr} '
                f'points="{coords}"/>'
            )
            lx = ml + pw + 14
            out.append(
                f'<line x1="{lx}" y1="{legend_y:.1f}" x2="{lx + 26}" y2="{legend_y:.1f}" '
                f'stroke="{color}" stroke-width="1.6"{dash_attr}/>'
            )
            out.append(f'<text x="{lx + 32}" y="{legend_y + 4:.1f}">{sel} / {cls}</text>')
            legend_y += 18
    out.append("</svg>")
    Path(path).write_text("\n".join(out) + "\n", encoding="utf-8")
