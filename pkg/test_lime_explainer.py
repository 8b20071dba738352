import numpy as np
import pytest

from classifiers import train
from datasets import FeatureTable, highfreq_profiles, synth_features
from errors import DataError, ExplainerError
from lime_explainer import (
    ContributionVector,
    abs_lime,
    average_contributions,
    explain_instance,
    explain_scores,
    kernel_width,
    pos_lime,
    row_seed,
    weighted_ridge,
)
from subsets import all_coefficients, last_t

SMALL_MLP = {'hidden': [32, 16], 'max_epochs': 60}


@pytest.fixture(scope='module')
def small_mlp(tiered_train):
    return train('mlp', tiered_train, all_coefficients(), SMALL_MLP, seed=1)


@pytest.mark.parametrize('values, expected', [
    ([0.5, -0.2, 0.1], (1, 3)),
    ([-1.0, -2.0, -0.5], ()),
    ([1.0, 2.0, 0.5], (1, 2, 3)),
])
def test_pos_lime(values, expected):
    assert pos_lime(np.array(values)).indices == expected


def test_abs_lime_strictly_above_median():
    assert abs_lime(np.array([3.0, 1.0, 2.0])).indices == (1,)
    assert abs_lime(np.array([-3.0, 1.0, 2.0])).indices == (1,)
    assert len(abs_lime(np.arange(1.0, 64.0))) == 31


def test_lime_subsets_on_equal_values_are_empty():
    equal = ContributionVector(np.full(63, 0.25), 4)
    assert len(abs_lime(equal)) == 0
    assert len(pos_lime(-equal.c_avg)) == 0


def test_contribution_vector_validation():
    with pytest.raises(DataError):
        ContributionVector(np.zeros(62), 3)
    with pytest.raises(DataError):
        ContributionVector(np.zeros(63), 0)
    with pytest.raises(DataError):
        ContributionVector(np.full(63, np.nan), 2)


def test_kernel_width():
    assert kernel_width(63) == pytest.approx(0.75 * np.sqrt(63))


def test_weighted_ridge_with_no_penalty_recovers_plane():
    rng = np.random.default_rng(0)
    x = rng.normal(size=(50, 3))
    y = x @ np.array([1.0, -2.0, 0.5]) + 4.0
    coef, intercept = weighted_ridge(x, y, rng.uniform(0.1, 1.0, size=50), alpha=0.0)
    np.testing.assert_allclose(coef, [1.0, -2.0, 0.5], atol=1e-8)
    assert intercept == pytest.approx(4.0)


def test_weighted_ridge_penalty_shrinks_to_weighted_mean():
    rng = np.random.default_rng(1)
    x = rng.normal(size=(40, 2))
    y = x @ np.array([3.0, -1.0]) + 2.0
    weights = rng.uniform(0.1, 1.0, size=40)
    coef, intercept = weighted_ridge(x, y, weights, alpha=1e9)
    np.testing.assert_allclose(coef, [0.0, 0.0], atol=1e-6)
    assert intercept == pytest.approx(np.average(y, weights=weights), abs=1e-5)


def test_explain_scores_recovers_linear_oracle():
    a = np.array([0.8, -0.5, 0.3, 0.0, 0.2, -0.7, 0.0, 0.0])
    for seed in range(5):
        coef = explain_scores(lambda z: z @ a + 1.0, np.full(8, 0.3), 2000, np.random.default_rng(seed))
        big = np.abs(a) > 0.05
        assert np.all(np.sign(coef[big]) == np.sign(a[big]))
        assert abs(coef[6]) < 0.02 * np.max(np.abs(coef))


def test_explain_scores_constant_function_gives_zeros():
    coef = explain_scores(lambda z: np.full(len(z), 0.4), np.zeros(5), 100, np.random.default_rng(1))
    np.testing.assert_array_equal(coef, np.zeros(5))


def test_explain_scores_needs_two_samples():
    with pytest.raises(ExplainerError):
        explain_scores(lambda z: z[:, 0], np.zeros(3), 1, np.random.default_rng(0))


def test_explain_instance_is_deterministic(small_mlp, tiered_test):
    x = tiered_test.x[0]
    first = explain_instance(small_mlp, x, n_samples=200, seed=9)
    np.testing.assert_array_equal(first, explain_instance(small_mlp, x, n_samples=200, seed=9))
    assert first.shape == (63,)


def test_explain_instance_zero_outside_subset(tiered_train, tiered_test):
    model = train('mlp', tiered_train, last_t(10), SMALL_MLP, seed=2)
    contributions = explain_instance(model, tiered_test.x[1], n_samples=200, seed=0)
    np.testing.assert_array_equal(contributions[:53], np.zeros(53))
    assert np.any(contributions[53:] != 0)


def test_explain_instance_requires_mlp(tiered_train, tiered_test):
    model = train('knn', tiered_train, all_coefficients())
    with pytest.raises(ExplainerError):
        explain_instance(model, tiered_test.x[0])
    with pytest.raises(ExplainerError):
        average_contributions(model, tiered_test)


def test_average_contributions_counts_correct_rows(small_mlp, tiered_test):
    result = average_contributions(small_mlp, tiered_test, n_samples=100, seed=3)
    correct = int(np.sum(small_mlp.predict_labels(tiered_test) == tiered_test.labels))
    assert result.n_correct == correct
    assert result.c_avg.shape == (63,)


def test_average_over_one_row_is_that_row(small_mlp, tiered_test):
    predicted = small_mlp.predict_labels(tiered_test)
    j = int(np.flatnonzero(predicted == tiered_test.labels)[0])
    one = tiered_test.take([j])
    result = average_contributions(small_mlp, one, n_samples=150, seed=4)
    expected = explain_instance(small_mlp, one.x[0], 150, row_seed(4, one.ids[0]), target=int(one.labels[0]))
    assert result.n_correct == 1
    np.testing.assert_array_equal(result.c_avg, expected)


def test_average_contributions_ignore_row_order(small_mlp, tiered_test):
    subset = tiered_test.take(np.arange(0, 60, 6))
    shuffled = subset.take(np.random.default_rng(0).permutation(len(subset)))
    first = average_contributions(small_mlp, subset, n_samples=100, seed=5)
    second = average_contributions(small_mlp, shuffled, n_samples=100, seed=5)
    np.testing.assert_allclose(first.c_avg, second.c_avg, atol=1e-12)


def test_average_contributions_without_correct_rows(small_mlp, tiered_test):
    predicted = small_mlp.predict_labels(tiered_test)
    wrong = FeatureTable(tiered_test.ids, (predicted + 1) % 3, tiered_test.x)
    with pytest.raises(ExplainerError):
        average_contributions(small_mlp, wrong, n_samples=50)
    with pytest.raises(ExplainerError):
        average_contributions(small_mlp, FeatureTable.empty(), n_samples=50)


def test_contributions_concentrate_on_separating_band():
    train_table = synth_features(highfreq_profiles(), n_per_class=50, image_size=64, seed=21)
    test_table = synth_features(highfreq_profiles(), n_per_class=5, image_size=64, seed=22)
    model = train('mlp', train_table, all_coefficients(), SMALL_MLP, seed=0)
    rows = np.vstack([explain_instance(model, x, n_samples=300, seed=k)
                      for k, x in enumerate(test_table.x)])
    magnitude = np.abs(rows).mean(axis=0)
    assert magnitude[30:].mean() > magnitude[:28].mean()
