"""Nested cross-validation: splits, pooling, ranking and leakage checks."""

import numpy as np
import pytest

from cohsel.cluster import SimilarityGraph
from cohsel.consensus import ConsensusParams, FeatureSelection
from cohsel.errors import NoFeasibleModelError, StratificationError
from cohsel.pipeline import (
    GridCell,
    PipelineSettings,
    SvmSettings,
    _prepare_training,
    _rank_cells,
    grid_search,
    inner_cv,
    pooled_class_means,
    run_pipeline,
    stratified_folds,
    stratified_split,
)


def _informative_dataset(n_per_class=40, n_features=20, seed=0):
    """Three groups of three coincident informative columns, noise elsewhere.

    Groups of three are needed so each member keeps two agreement partners
    and survives the consensus filter at nu = 1.
    """
    rng = np.random.default_rng(seed)
    values = rng.random((2 * n_per_class, n_features)) * 0.1
    labels = np.array(["class1"] * n_per_class + ["class2"] * n_per_class)
    groups = [(0, 1, 2), (3, 4, 5), (6, 7, 8)]
    for g, cols in enumerate(groups):
        for col in cols:
            values[:n_per_class, col] += 0.4 + 0.2 * g
    return values, labels, groups


def _small_settings(seed=0, **overrides):
    defaults = dict(
        grid=[ConsensusParams(m=m, sigma=0.6, nu=1) for m in (2, 3)],
        svm=SvmSettings(kernel="rbf"),
        # Neighborhood scale matched to the tight pooled clumps above; the
        # default median bandwidth is far wider than their spacing.
        graph=SimilarityGraph(knn=4, bandwidth=0.05),
        holdout_fraction=0.1,
        outer_folds=5,
        inner_folds=5,
        smote_k=3,
        seed=seed,
    )
    defaults.update(overrides)
    return PipelineSettings(**defaults)


class TestStratifiedSplit:
    def test_holdout_fraction_rounds_per_class(self):
        labels = ["class1"] * 672 + ["class2"] * 672
        plan = stratified_split(labels, 0.1, 5, seed=0)
        assert len(plan.holdout) == 134
        hold_labels = np.asarray(labels)[plan.holdout]
        assert np.sum(hold_labels == "class1") == 67
        assert np.sum(hold_labels == "class2") == 67

    def test_folds_partition_the_remainder(self):
        labels = ["class1"] * 30 + ["class2"] * 30
        plan = stratified_split(labels, 0.1, 5, seed=1)
        pooled = np.concatenate(plan.folds)
        assert len(np.unique(pooled)) == len(pooled)
        assert set(pooled.tolist()) | set(plan.holdout.tolist()) == set(range(60))
        assert not set(pooled.tolist()) & set(plan.holdout.tolist())

    def test_folds_are_stratified(self):
        labels = np.array(["class1"] * 50 + ["class2"] * 50)
        plan = stratified_split(labels, 0.1, 5, seed=2)
        for fold in plan.folds:
            counts = np.unique(labels[fold], return_counts=True)[1]
            assert abs(int(counts[0]) - int(counts[1])) <= 1

    def test_deterministic_given_seed(self):
        labels = ["class1"] * 20 + ["class2"] * 20
        a = stratified_split(labels, 0.1, 5, seed=3)
        b = stratified_split(labels, 0.1, 5, seed=3)
        assert np.array_equal(a.holdout, b.holdout)
        for fa, fb in zip(a.folds, b.folds):
            assert np.array_equal(fa, fb)
        c = stratified_split(labels, 0.1, 5, seed=4)
        assert not all(np.array_equal(fa, fc)
                       for fa, fc in zip(a.folds, c.folds))

    def test_small_even_split(self):
        labels = ["class1"] * 10 + ["class2"] * 10
        plan = stratified_split(labels, 0.1, 5, seed=5)
        assert len(plan.holdout) == 2
        # 9 remaining per class dealt round-robin: four folds of 2 + 2 and
        # one fold of 1 + 1.
        assert sorted(len(f) for f in plan.folds) == [2, 4, 4, 4, 4]

    def test_too_few_samples_rejected(self):
        with pytest.raises(StratificationError):
            stratified_split(["class1"] * 3 + ["class2"] * 3, 0.0, 5)


class TestStratifiedFolds:
    def test_counts_balanced(self):
        labels = ["a"] * 13 + ["b"] * 17
        folds = stratified_folds(labels, 5, seed=0)
        sizes = sorted(len(f) for f in folds)
        assert sum(sizes) == 30
        assert sizes[-1] - sizes[0] <= 2

    def test_error_message_names_class(self):
        with pytest.raises(StratificationError, match="'b'"):
            stratified_folds(["a"] * 10 + ["b"] * 2, 5, seed=0)


class TestPooledClassMeans:
    def test_column_per_class(self):
        values = np.array([[0.0, 1.0], [2.0, 3.0], [4.0, 5.0], [6.0, 7.0]])
        labels = ["class2", "class1", "class2", "class1"]
        points = pooled_class_means(values, labels)
        assert points.shape == (2, 2)
        assert np.array_equal(points, [[4.0, 2.0], [5.0, 3.0]])

    def test_single_class_rejected(self):
        with pytest.raises(ValueError):
            pooled_class_means(np.zeros((3, 2)), ["a"] * 3)


class TestRankCells:
    @staticmethod
    def _cell(m, acc):
        params = ConsensusParams(m=m, sigma=0.6, nu=1)
        sel = FeatureSelection(selected=list(range(m)), params=params)
        return GridCell(params=params, inner_accuracy=acc, selection=sel)

    def test_accuracy_wins_first(self):
        cells = [self._cell(50, 0.70), self._cell(100, 0.80)]
        assert _rank_cells(cells) == 1

    def test_tie_prefers_fewer_features(self):
        cells = [self._cell(50, 0.70), self._cell(30, 0.70)]
        assert _rank_cells(cells) == 1

    def test_full_tie_prefers_grid_order(self):
        cells = [self._cell(30, 0.70), self._cell(30, 0.70)]
        assert _rank_cells(cells) == 0

    def test_infeasible_cells_skipped(self):
        cells = [GridCell(params=ConsensusParams(m=9, sigma=0.6, nu=1),
                          inner_accuracy=None, selection=None),
                 self._cell(5, 0.60)]
        assert _rank_cells(cells) == 1

    def test_all_infeasible_returns_none(self):
        cells = [GridCell(params=ConsensusParams(m=9, sigma=0.6, nu=1),
                          inner_accuracy=None, selection=None)]
        assert _rank_cells(cells) is None


class TestGridSearch:
    def test_all_infeasible_raises(self):
        values, labels, _ = _informative_dataset(n_per_class=15)
        settings = _small_settings(
            grid=[ConsensusParams(m=2, sigma=0.6, nu=500)])
        with pytest.raises(NoFeasibleModelError):
            grid_search(values, labels, settings, seed=0)

    def test_infeasible_cells_marked_none(self):
        values, labels, _ = _informative_dataset(n_per_class=15)
        settings = _small_settings(grid=[
            ConsensusParams(m=2, sigma=0.6, nu=1),
            ConsensusParams(m=2, sigma=0.6, nu=500),
        ])
        cells, best = grid_search(values, labels, settings, seed=0)
        assert cells[0].inner_accuracy is not None
        assert cells[1].inner_accuracy is None
        assert best is cells[0]

    def test_parallel_matches_serial(self):
        values, labels, _ = _informative_dataset(n_per_class=15)
        serial = grid_search(values, labels, _small_settings(jobs=1), seed=1)
        parallel = grid_search(values, labels, _small_settings(jobs=2), seed=1)
        for cs, cp in zip(serial[0], parallel[0]):
            assert cs.inner_accuracy == cp.inner_accuracy
            assert cs.selection.selected == cp.selection.selected

    def test_inner_cv_infeasible_when_nu_reaches_feature_count(self):
        values, labels, _ = _informative_dataset(n_per_class=15)
        from cohsel.errors import InfeasibleCombination
        with pytest.raises(InfeasibleCombination):
            inner_cv(values, labels,
                     ConsensusParams(m=2, sigma=0.6, nu=values.shape[1]),
                     _small_settings(), seed=0)


class TestPrepareTraining:
    def test_augmented_raw_matches_inverse_scaled(self):
        rng = np.random.default_rng(0)
        values = rng.random((30, 6)) * 5.0 + 2.0
        labels = np.array(["class1"] * 10 + ["class2"] * 20)
        train_idx = np.arange(30)
        scaler, aug_values, aug_raw, aug_labels = _prepare_training(
            values, labels, train_idx, _small_settings(), fold_tag=0)
        assert aug_values.shape == (40, 6)
        assert aug_raw.shape == (40, 6)
        # Original rows are carried through in raw units untouched.
        assert np.array_equal(aug_raw[:30], values)
        # Synthetic rows invert the scaling exactly.
        assert np.max(np.abs(scaler.transform(aug_raw[30:])
                             - aug_values[30:])) < 1e-9
        counts = np.unique(aug_labels, return_counts=True)[1]
        assert counts.tolist() == [20, 20]

    def test_balanced_input_adds_nothing(self):
        rng = np.random.default_rng(1)
        values = rng.random((20, 4))
        labels = np.array(["class1"] * 10 + ["class2"] * 10)
        _, aug_values, aug_raw, aug_labels = _prepare_training(
            values, labels, np.arange(20), _small_settings(), fold_tag=0)
        assert aug_values.shape == (20, 4)
        assert np.array_equal(aug_raw, values)


class TestRunPipeline:
    def test_recovers_informative_features_and_is_deterministic(self):
        values, labels, groups = _informative_dataset(seed=2)
        settings = _small_settings(
            seed=6, grid=[ConsensusParams(m=4, sigma=0.6, nu=1)])
        report = run_pipeline(values, labels, settings)
        assert report.holdout_accuracy == 1.0
        selected = set(report.best_selection.selected)
        for group in groups:
            assert len(set(group) & selected) == 1

        repeat = run_pipeline(values, labels, settings)
        assert repeat.best_params == report.best_params
        assert repeat.best_selection.selected == report.best_selection.selected
        assert repeat.holdout_accuracy == report.holdout_accuracy
        assert repeat.best_fold_index == report.best_fold_index
        for fa, fb in zip(report.folds, repeat.folds):
            assert fa.validation_accuracy == fb.validation_accuracy
            assert fa.best.params == fb.best.params

    def test_holdout_rows_do_not_influence_model_choice(self):
        values, labels, groups = _informative_dataset(seed=3)
        settings = _small_settings(
            seed=7, grid=[ConsensusParams(m=4, sigma=0.6, nu=1)])
        base = run_pipeline(values, labels, settings)

        plan = stratified_split(labels, settings.holdout_fraction,
                                settings.outer_folds, seed=settings.seed)
        perturbed = values.copy()
        perturbed[plan.holdout] += \
            np.random.default_rng(8).random(values.shape[1]) * 0.05
        shifted = run_pipeline(perturbed, labels, settings)

        assert shifted.best_params == base.best_params
        assert shifted.best_selection.selected == base.best_selection.selected
        assert shifted.best_fold_index == base.best_fold_index
        for fa, fb in zip(base.folds, shifted.folds):
            assert fa.validation_accuracy == fb.validation_accuracy

    def test_report_structure(self):
        values, labels, _ = _informative_dataset(n_per_class=20, seed=4)
        settings = _small_settings(seed=9)
        report = run_pipeline(values, labels, settings)
        assert report.kernel == "rbf"
        assert len(report.folds) == 5
        assert 0 <= report.best_fold_index < 5
        assert len(report.best_selection.selected) == report.best_params.m
        assert 0.0 <= report.holdout_accuracy <= 1.0
        assert 0.0 <= report.training_accuracy <= 1.0
        for fold in report.folds:
            assert len(fold.cells) == len(settings.grid)
