import os

import numpy as np
import pytest

from datasets import (
    ClassLabel,
    FeatureTable,
    ManifestRow,
    class_separation,
    extract_table,
    highfreq_profiles,
    lowfreq_profiles,
    split_train_test,
    synth_features,
    synth_generate,
    synth_image,
    tiered_profiles,
    undersample,
)
from errors import DataError, InvalidProfileError, MissingClassError
from features import extract_beta_vector


def make_rows(counts):
    return [ManifestRow(f"{ClassLabel(c).tag}/{k}.png", ClassLabel(c))
            for c, n in enumerate(counts) for k in range(n)]


def make_table(counts):
    labels = np.repeat(np.arange(3), counts)
    x = np.arange(len(labels) * 63, dtype=float).reshape(len(labels), 63)
    return FeatureTable([f"row{i}" for i in range(len(labels))], labels, x)


def test_class_label_parse():
    assert ClassLabel.parse(' GAN ') is ClassLabel.GAN
    assert ClassLabel.DM.tag == 'dm'
    with pytest.raises(DataError):
        ClassLabel.parse('fake')


def test_split_sizes_follow_fraction():
    train, test = split_train_test(make_rows([400, 300, 300]), 0.85, seed=0)
    assert (len(train), len(test)) == (850, 150)


def test_split_rounds_per_class():
    train, test = split_train_test(make_rows([20, 20, 20]), 0.85, seed=3)
    for cls in ClassLabel:
        assert sum(r.label == cls for r in train) == 17
        assert sum(r.label == cls for r in test) == 3


def test_split_is_deterministic_and_order_preserving():
    rows = make_rows([30, 10, 12])
    first = split_train_test(rows, 0.85, seed=9)
    assert first == split_train_test(rows, 0.85, seed=9)
    position = {r.path: i for i, r in enumerate(rows)}
    for part in first:
        indices = [position[r.path] for r in part]
        assert indices == sorted(indices)


def test_split_errors():
    with pytest.raises(MissingClassError):
        split_train_test(make_rows([5, 0, 5]))
    with pytest.raises(DataError):
        split_train_test(make_rows([5, 5, 5]), 1.0)


@pytest.mark.parametrize('counts, target', [((100, 300, 200), 100), ((50, 50, 50), 50), ((1, 5, 9), 1)])
def test_undersample_to_minority(counts, target):
    balanced = undersample(make_table(counts), seed=1)
    assert balanced.class_counts().tolist() == [target] * 3


def test_undersample_keeps_rows_intact():
    table = make_table((4, 7, 5))
    balanced = undersample(table, seed=2)
    for row_id, x in zip(balanced.ids, balanced.x):
        np.testing.assert_array_equal(x, table.x[table.ids.index(row_id)])


def test_feature_table_validation_and_selection():
    table = make_table((2, 2, 2))
    assert table.select_ids(['row4', 'row1']).ids == ['row1', 'row4']
    assert len(FeatureTable.empty()) == 0
    bad = table.x.copy()
    bad[0, 0] = np.nan
    with pytest.raises(DataError):
        FeatureTable(table.ids, table.labels, bad)


def test_zero_profile_gives_blockwise_constant_images():
    image = synth_image(np.zeros(63), 32, np.random.default_rng(0))
    np.testing.assert_array_equal(extract_beta_vector(image).beta, np.zeros(63))


@pytest.mark.parametrize('profile', [np.full(62, 1.0), -np.ones(63), np.full(63, np.inf)])
def test_invalid_profiles(profile):
    with pytest.raises(InvalidProfileError):
        synth_image(profile, 32, np.random.default_rng(0))


def test_invalid_image_size():
    with pytest.raises(InvalidProfileError):
        synth_image(np.ones(63), 12, np.random.default_rng(0))


def test_band_presets_separate_only_inside_band():
    high = highfreq_profiles()
    np.testing.assert_array_equal(high[0, :30], high[2, :30])
    assert np.all(high[2, 30:] > high[0, 30:])
    low = lowfreq_profiles()
    np.testing.assert_array_equal(low[0, 28:], low[1, 28:])
    assert np.all(low[1, :28] > low[0, :28])


def test_synth_features_deterministic_across_workers():
    serial = synth_features(tiered_profiles(), 4, 32, seed=3, workers=1)
    parallel = synth_features(tiered_profiles(), 4, 32, seed=3, workers=2)
    np.testing.assert_array_equal(serial.x, parallel.x)
    assert serial.class_counts().tolist() == [4, 4, 4]


def test_synth_generate_writes_images_and_manifest(tiered_dataset):
    manifest_path, result = tiered_dataset
    out_dir = os.path.dirname(manifest_path)
    assert len(result.manifest) == 60
    assert {r.split for r in result.manifest} == {'train', 'test'}
    assert all(os.path.exists(os.path.join(out_dir, r.path)) for r in result.manifest)
    assert result.ground_truth.ids == [r.path for r in result.manifest]
    assert result.separation > 3.0


def test_tiered_classes_well_separated(tiered_train):
    assert class_separation(tiered_train) > 5.0


def test_extract_table_matches_ground_truth(tiered_dataset):
    manifest_path, result = tiered_dataset
    table, failures = extract_table(result.manifest[:6], base_dir=os.path.dirname(manifest_path))
    assert failures == []
    np.testing.assert_allclose(table.x, result.ground_truth.x[:6])


def test_class_separation_needs_two_rows_per_class():
    with pytest.raises(MissingClassError):
        class_separation(make_table((1, 3, 3)))
