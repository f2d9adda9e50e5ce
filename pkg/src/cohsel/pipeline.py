"""Nested cross-validation orchestration.

Stratified holdout, outer 5-fold CV, per-outer-fold grid search over the
consensus parameters with an inner 5-fold CV, and the final retrain/test
pass. Pooling, scaling, oversampling and feature selection are always
recomputed from training rows only.
"""

from dataclasses import dataclass, field

import numpy as np
from joblib import Parallel, delayed

from .augment import MinMaxScaler, balance_classes
from .cluster import SimilarityGraph
from .consensus import ConsensusParams, ConsensusSelector, FeatureSelection
from .errors import InfeasibleCombination, NoFeasibleModelError, StratificationError
from .svm import accuracy, predict, train

# Tags keeping derived seed streams disjoint.
_SEED_SPLIT = 1
_SEED_SMOTE = 2
_SEED_INNER = 3
_SEED_SELECT = 4
_SEED_GRID = 5


@dataclass
class SvmSettings:
    kernel: str = "rbf"
    c: float = 1.0
    gamma: object = "scale"
    tol: float = 1e-3


@dataclass
class PipelineSettings:
    """Everything the nested CV needs besides the data itself."""

    grid: list[ConsensusParams]
    svm: SvmSettings = field(default_factory=SvmSettings)
    graph: SimilarityGraph = field(default_factory=SimilarityGraph)
    holdout_fraction: float = 0.1
    outer_folds: int = 5
    inner_folds: int = 5
    smote_k: int = 5
    seed: int = 0
    jobs: int = 1


@dataclass
class SplitPlan:
    """Stratified holdout plus disjoint, exhaustive outer folds."""

    holdout: np.ndarray
    folds: list[np.ndarray]
    seed: int


@dataclass
class GridCell:
    """Inner-CV outcome of one parameter combination in one grid search."""

    params: ConsensusParams
    inner_accuracy: float | None          # None marks an infeasible cell
    selection: FeatureSelection | None


@dataclass
class FoldResult:
    fold_index: int
    cells: list[GridCell]
    best: GridCell                        # the fold's (gamma*, F*)
    validation_accuracy: float


@dataclass
class CVReport:
    kernel: str
    seed: int
    folds: list[FoldResult]
    best_fold_index: int
    best_params: ConsensusParams          # gamma**
    best_selection: FeatureSelection      # F**
    training_accuracy: float
    holdout_accuracy: float


def _derive_seed(*parts) -> int:
    return int(np.random.SeedSequence(list(parts)).generate_state(1)[0])


def stratified_folds(labels, n_folds: int, seed: int) -> list[np.ndarray]:
    """Deal each class's shuffled indices round-robin into ``n_folds``."""
    labels = np.asarray(labels)
    rng = np.random.default_rng(seed)
    folds: list[list[int]] = [[] for _ in range(n_folds)]
    for cls in sorted(set(labels.tolist())):
        idx = np.flatnonzero(labels == cls)
        if len(idx) < n_folds:
            raise StratificationError(
                f"class {cls!r} has {len(idx)} samples, fewer than "
                f"{n_folds} folds")
        rng.shuffle(idx)
        for pos, sample in enumerate(idx):
            folds[pos % n_folds].append(int(sample))
    return [np.sort(np.array(f)) for f in folds]


def stratified_split(labels, holdout_fraction: float = 0.1,
                     n_folds: int = 5, seed: int = 0) -> SplitPlan:
    """Class-proportional holdout plus outer folds over the remainder."""
    labels = np.asarray(labels)
    rng = np.random.default_rng(_derive_seed(seed, _SEED_SPLIT))
    holdout: list[int] = []
    remaining: list[int] = []
    for cls in sorted(set(labels.tolist())):
        idx = np.flatnonzero(labels == cls)
        rng.shuffle(idx)
        n_hold = int(round(holdout_fraction * len(idx)))
        holdout.extend(idx[:n_hold].tolist())
        remaining.extend(idx[n_hold:].tolist())
    remaining = np.sort(np.array(remaining, dtype=int))
    rel_folds = stratified_folds(labels[remaining], n_folds,
                                 _derive_seed(seed, _SEED_SPLIT, 1))
    folds = [remaining[f] for f in rel_folds]
    return SplitPlan(holdout=np.sort(np.array(holdout, dtype=int)),
                     folds=folds, seed=seed)


def pooled_class_means(values: np.ndarray, labels) -> np.ndarray:
    """Per-feature [mean over class 1 rows, mean over class 2 rows]."""
    labels = np.asarray(labels)
    classes = sorted(set(labels.tolist()))
    if len(classes) != 2:
        raise ValueError(f"exactly two classes required, got {classes}")
    return np.column_stack([values[labels == c].mean(axis=0)
                            for c in classes])


class _InnerEvaluator:
    """Inner 5-fold CV over one training set, cached per iteration.

    The pooled points, Ward tree and spectral embedding of each inner
    iteration are computed once and reused across the whole grid.
    ``raw_values`` are the unscaled coherence values the class-mean
    pooling runs on; the scaled ``values`` feed the classifier.
    """

    def __init__(self, values, labels, settings: PipelineSettings,
                 seed: int, raw_values=None):
        self.values = values
        self.raw_values = values if raw_values is None else raw_values
        self.labels = np.asarray(labels)
        self.settings = settings
        self.seed = seed
        folds = stratified_folds(self.labels, settings.inner_folds,
                                 _derive_seed(seed, _SEED_INNER))
        self.iterations = []
        all_idx = np.arange(len(self.labels))
        for k, fold in enumerate(folds):
            train_idx = np.setdiff1d(all_idx, fold)
            points = pooled_class_means(self.raw_values[train_idx],
                                        self.labels[train_idx])
            self.iterations.append({
                "train": train_idx,
                "val": fold,
                "selector": ConsensusSelector(points, graph=settings.graph),
            })

    def evaluate_iteration(self, k: int, params: ConsensusParams):
        """(accuracy, selection) of iteration ``k``, or None if infeasible."""
        it = self.iterations[k]
        sel_seed = _derive_seed(self.seed, _SEED_SELECT, k, params.m,
                                int(round(params.sigma * 1e9)), params.nu)
        try:
            selection = it["selector"].select(params, seed=sel_seed)
        except InfeasibleCombination:
            return None
        cols = selection.selected
        svm = self.settings.svm
        model = train(self.values[np.ix_(it["train"], cols)],
                      self.labels[it["train"]], kernel=svm.kernel, c=svm.c,
                      gamma=svm.gamma, tol=svm.tol)
        acc = accuracy(predict(model, self.values[np.ix_(it["val"], cols)]),
                       self.labels[it["val"]])
        return acc, selection

    def evaluate(self, params: ConsensusParams) -> GridCell:
        """Best iteration for one parameter combination."""
        best = None
        for k in range(len(self.iterations)):
            result = self.evaluate_iteration(k, params)
            if result is None:
                continue
            if best is None or result[0] > best[0]:
                best = result
        if best is None:
            return GridCell(params=params, inner_accuracy=None, selection=None)
        return GridCell(params=params, inner_accuracy=best[0],
                        selection=best[1])


def inner_cv(values, labels, params: ConsensusParams,
             settings: PipelineSettings, seed: int, raw_values=None):
    """Best (accuracy, selection) across the inner iterations of one gamma.

    Raises :class:`InfeasibleCombination` when every iteration is
    infeasible.
    """
    cell = _InnerEvaluator(values, labels, settings, seed,
                           raw_values=raw_values).evaluate(params)
    if cell.inner_accuracy is None:
        raise InfeasibleCombination(f"all inner iterations infeasible "
                                    f"for {params}")
    return cell.inner_accuracy, cell.selection


def _rank_cells(cells: list[GridCell]):
    """Winning cell by accuracy desc, then fewer features, then grid order."""
    best_i = None
    for i, cell in enumerate(cells):
        if cell.inner_accuracy is None:
            continue
        if best_i is None:
            best_i = i
            continue
        champ = cells[best_i]
        key = (-cell.inner_accuracy, cell.params.m, i)
        champ_key = (-champ.inner_accuracy, champ.params.m, best_i)
        if key < champ_key:
            best_i = i
    return best_i


def grid_search(values, labels, settings: PipelineSettings, seed: int,
                raw_values=None):
    """Inner CV for every grid combination; returns (cells, best cell).

    Iterations are distributed across workers; each worker sweeps the
    whole grid for its iteration so the cached decompositions pay off.
    Results are merged in grid order, independent of completion order.
    """
    evaluator = _InnerEvaluator(values, labels, settings, seed,
                                raw_values=raw_values)
    n_iter = len(evaluator.iterations)
    grid = settings.grid

    def sweep(k):
        return [evaluator.evaluate_iteration(k, params) for params in grid]

    if settings.jobs > 1:
        per_iter = Parallel(n_jobs=settings.jobs)(
            delayed(sweep)(k) for k in range(n_iter))
    else:
        per_iter = [sweep(k) for k in range(n_iter)]

    cells = []
    for gi, params in enumerate(grid):
        best = None
        for k in range(n_iter):
            result = per_iter[k][gi]
            if result is not None and (best is None or result[0] > best[0]):
                best = result
        if best is None:
            cells.append(GridCell(params=params, inner_accuracy=None,
                                  selection=None))
        else:
            cells.append(GridCell(params=params, inner_accuracy=best[0],
                                  selection=best[1]))
    best_i = _rank_cells(cells)
    if best_i is None:
        raise NoFeasibleModelError(
            "every parameter combination in the grid was infeasible")
    return cells, cells[best_i]


def _prepare_training(values, labels, train_idx, settings, fold_tag: int):
    """Scale on training rows, then oversample the smaller class.

    Returns ``(scaler, aug_scaled, aug_raw, aug_labels)`` where the raw
    matrix carries the original coherence units; synthetic rows are mapped
    back through the scaler so pooling sees one consistent scale.
    """
    scaler = MinMaxScaler.fit(values[train_idx])
    scaled = scaler.transform(values[train_idx])
    aug_values, aug_labels = balance_classes(
        scaled, np.asarray(labels)[train_idx], k=settings.smote_k,
        seed=_derive_seed(settings.seed, _SEED_SMOTE, fold_tag))
    n_orig = len(train_idx)
    aug_raw = np.vstack([values[train_idx],
                         scaler.inverse_transform(aug_values[n_orig:])])
    return scaler, aug_values, aug_raw, aug_labels


def outer_cv(values, labels, plan: SplitPlan,
             settings: PipelineSettings) -> list[FoldResult]:
    """Grid search on 4 folds, validate the winner on the fifth, 5 times."""
    labels = np.asarray(labels)
    results = []
    for o, val_idx in enumerate(plan.folds):
        train_idx = np.sort(np.concatenate(
            [f for i, f in enumerate(plan.folds) if i != o]))
        scaler, aug_values, aug_raw, aug_labels = _prepare_training(
            values, labels, train_idx, settings, o)
        cells, best = grid_search(aug_values, aug_labels, settings,
                                  seed=_derive_seed(settings.seed,
                                                    _SEED_GRID, o),
                                  raw_values=aug_raw)
        cols = best.selection.selected
        svm = settings.svm
        model = train(aug_values[:, cols], aug_labels, kernel=svm.kernel,
                      c=svm.c, gamma=svm.gamma, tol=svm.tol)
        val_scaled = scaler.transform(values[val_idx])
        val_acc = accuracy(predict(model, val_scaled[:, cols]),
                           labels[val_idx])
        results.append(FoldResult(fold_index=o, cells=cells, best=best,
                                  validation_accuracy=val_acc))
    return results


def _pick_best_fold(folds: list[FoldResult]) -> int:
    best = 0
    for i, fold in enumerate(folds[1:], start=1):
        key = (-fold.validation_accuracy, fold.best.params.m, i)
        champ = folds[best]
        champ_key = (-champ.validation_accuracy, champ.best.params.m, best)
        if key < champ_key:
            best = i
    return best


def final_eval(values, labels, plan: SplitPlan,
               selection: FeatureSelection, settings: PipelineSettings):
    """Retrain on the full 90% with the winning features; test the holdout."""
    labels = np.asarray(labels)
    train_idx = np.sort(np.concatenate(plan.folds))
    scaler, aug_values, aug_raw, aug_labels = _prepare_training(
        values, labels, train_idx, settings, settings.outer_folds)
    cols = selection.selected
    svm = settings.svm
    model = train(aug_values[:, cols], aug_labels, kernel=svm.kernel,
                  c=svm.c, gamma=svm.gamma, tol=svm.tol)
    train_scaled = scaler.transform(values[train_idx])
    train_acc = accuracy(predict(model, train_scaled[:, cols]),
                         labels[train_idx])
    hold_scaled = scaler.transform(values[plan.holdout])
    hold_acc = accuracy(predict(model, hold_scaled[:, cols]),
                        labels[plan.holdout])
    return train_acc, hold_acc


def run_pipeline(values, labels, settings: PipelineSettings) -> CVReport:
    """Full nested CV: split, outer loop, model choice, final test."""
    labels = np.asarray(labels)
    plan = stratified_split(labels, settings.holdout_fraction,
                            settings.outer_folds, seed=settings.seed)
    folds = outer_cv(values, labels, plan, settings)
    best_i = _pick_best_fold(folds)
    best = folds[best_i].best
    train_acc, hold_acc = final_eval(values, labels, plan, best.selection,
                                     settings)
    return CVReport(kernel=settings.svm.kernel, seed=settings.seed,
                    folds=folds, best_fold_index=best_i,
                    best_params=best.params, best_selection=best.selection,
                    training_accuracy=train_acc, holdout_accuracy=hold_acc)
