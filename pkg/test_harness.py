import os
import xml.etree.ElementTree as ET

import numpy as np
import pytest
from PIL import Image

import harness
from database import load_features, load_manifest, save_json, save_manifest
from datasets import PROFILE_PRESETS, ClassLabel, ManifestRow, synth_generate, synth_image
from errors import ConfigError, DataError, TrainingError
from harness import (
    EXIT_DATA,
    EXIT_OK,
    EXIT_PARTIAL,
    EXIT_USAGE,
    ExperimentConfig,
    ReportRow,
    emit_report,
    extract_cmd,
    load_report,
    main,
    run_grid,
)
from lime_explainer import ContributionVector
from tools.inspect_beta import run as inspect_run

QUIET = ['--log-file', '', '--log-level', 'WARNING']


def make_dataset(root, preset, n_per_class, size, seed):
    result = synth_generate(PROFILE_PRESETS[preset](), n_per_class, size, seed, str(root))
    manifest = os.path.join(str(root), 'manifest.csv')
    save_manifest(manifest, result.manifest)
    return manifest


def grid_config(manifest, out_dir, **overrides):
    data = {
        'manifest': manifest,
        'subsets': ['all'],
        'algorithms': ['random_forest'],
        'qfs': [],
        'n_trials': 1,
        'out_dir': str(out_dir),
        'workers': 1,
        'search_spaces': {'random_forest': {'n_trees': 30}, 'knn': {'k': 3}},
    }
    data.update(overrides)
    return ExperimentConfig.from_dict(data)


def accuracy(rows, condition):
    return next(r.accuracy for r in rows if r.condition == condition)


@pytest.fixture(scope='module')
def highfreq_manifest(tmp_path_factory):
    return make_dataset(tmp_path_factory.mktemp('highfreq'), 'highfreq', 100, 64, 31)


@pytest.fixture(scope='module')
def lowfreq_manifest(tmp_path_factory):
    return make_dataset(tmp_path_factory.mktemp('lowfreq'), 'lowfreq', 100, 64, 32)


@pytest.fixture(scope='module')
def tiered64_manifest(tmp_path_factory):
    return make_dataset(tmp_path_factory.mktemp('tiered64'), 'tiered', 60, 64, 33)


def write_flat_images(root):
    rows = []
    for c in ClassLabel:
        for k, split in enumerate(('train', 'test')):
            name = f"{c.tag}_{k}.png"
            Image.fromarray(np.full((24, 24), 30 * (c.value + 1) + k, dtype=np.uint8)).save(root / name)
            rows.append(ManifestRow(name, c, split))
    manifest = root / 'manifest.csv'
    save_manifest(manifest, rows)
    return str(manifest)


def test_extract_constant_images_is_stable(tmp_path):
    manifest = write_flat_images(tmp_path)
    table, failures = extract_cmd(manifest, str(tmp_path / 'a.csv'))
    assert failures == []
    np.testing.assert_array_equal(table.x, np.zeros((6, 63)))
    extract_cmd(manifest, str(tmp_path / 'b.csv'))
    assert (tmp_path / 'a.csv').read_bytes() == (tmp_path / 'b.csv').read_bytes()
    test_only, _ = extract_cmd(manifest, str(tmp_path / 'c.csv'), split='test')
    assert len(test_only) == 3


def test_extract_cli_reports_missing_files(tmp_path):
    manifest = write_flat_images(tmp_path)
    os.remove(tmp_path / 'gan_1.png')
    code = main(QUIET + ['extract', '--manifest', manifest, '--out', str(tmp_path / 'f.csv')])
    assert code == EXIT_DATA
    assert len(load_features(tmp_path / 'f.csv')) == 5


def test_usage_errors_exit_with_one(tmp_path):
    with pytest.raises(SystemExit) as info:
        main(QUIET + ['no-such-command'])
    assert info.value.code == EXIT_USAGE
    assert main(QUIET + ['subsets', 'first:99']) == EXIT_USAGE


def test_unknown_config_key(tmp_path):
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({'manifest': 'm.csv', 'flavour': 'x'})
    path = tmp_path / 'experiment.json'
    save_json(path, {'manifest': 'm.csv', 'algorithms': ['svm']})
    assert main(QUIET + ['grid', '--config', str(path)]) == EXIT_USAGE


@pytest.mark.parametrize('overrides', [{'qfs': [0]}, {'n_trials': 0}, {'subsets': []}])
def test_invalid_config_values(overrides):
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({'manifest': 'm.csv', **overrides})


def test_single_cell_raw_grid(tiered_dataset, tmp_path):
    manifest, _ = tiered_dataset
    config = grid_config(manifest, tmp_path, subsets=['first:10'], algorithms=['knn'])
    result = run_grid(config)
    assert not result.partial
    assert len(result.rows) == 1
    row = result.rows[0]
    assert (row.subset, row.algorithm, row.condition) == ('1:10', 'knn', 'RAW')
    assert row.n_test == sum(r.split == 'test' for r in load_manifest(manifest))


def test_feature_cache_follows_the_dataset(tiered_dataset, tmp_path):
    first, _ = tiered_dataset
    second = make_dataset(tmp_path / 'other', 'tiered', 20, 32, 6)
    out = tmp_path / 'grid'
    for manifest in (first, second):
        run_grid(grid_config(manifest, out, subsets=['first:10'], algorithms=['knn'], reuse_cache=True))
    cached = load_features(out / 'features_raw.csv')
    fresh, _ = extract_cmd(second, str(tmp_path / 'fresh.csv'))
    assert cached.ids == fresh.ids
    np.testing.assert_array_equal(cached.x, fresh.x)


def test_feature_cache_reused_for_unchanged_dataset(tiered_dataset, tmp_path, monkeypatch):
    manifest, _ = tiered_dataset
    config = grid_config(manifest, tmp_path, subsets=['first:10'], algorithms=['knn'], qfs=[70],
                         reuse_cache=True)
    first = run_grid(config)

    def no_extraction(*args, **kwargs):
        raise AssertionError('cache was rebuilt')

    monkeypatch.setattr(harness, 'extract_table', no_extraction)
    monkeypatch.setattr(harness, 'attack_dataset', no_extraction)
    assert run_grid(config).rows == first.rows


def test_tiered_grid_is_accurate(tiered64_manifest, tmp_path):
    result = run_grid(grid_config(tiered64_manifest, tmp_path, qfs=[90]))
    assert [r.condition for r in result.rows] == ['RAW', 'QF90']
    assert accuracy(result.rows, 'RAW') >= 0.95
    assert os.path.exists(tmp_path / 'features_qf90.csv')


def test_high_band_collapses_under_strong_compression(highfreq_manifest, tmp_path):
    result = run_grid(grid_config(highfreq_manifest, tmp_path, subsets=['last:33'], qfs=[30]))
    raw = accuracy(result.rows, 'RAW')
    assert raw >= 0.9
    assert accuracy(result.rows, 'QF30') <= raw - 0.2


def test_low_band_survives_mild_compression(lowfreq_manifest, tmp_path):
    result = run_grid(grid_config(lowfreq_manifest, tmp_path, subsets=['first:28'], qfs=[90]))
    assert accuracy(result.rows, 'RAW') - accuracy(result.rows, 'QF90') < 0.10


def test_lime_subsets_in_grid(tiered_dataset, tmp_path):
    manifest, _ = tiered_dataset
    config = grid_config(manifest, tmp_path, subsets=['pos-lime', 'abs-lime'], algorithms=['knn'],
                         lime_samples=100)
    result = run_grid(config)
    assert len(result.rows) + len(result.failures) == 2
    assert result.contributions is not None
    for name in ('contributions.csv', 'pos_lime.txt', 'abs_lime.txt'):
        assert os.path.exists(tmp_path / name)


def test_grid_is_deterministic(tiered_dataset, tmp_path):
    manifest, _ = tiered_dataset
    outputs = []
    for name in ('first', 'second'):
        out = tmp_path / name
        result = run_grid(grid_config(manifest, out, subsets=['first:10', 'center:5'],
                                      algorithms=['knn', 'random_forest'], qfs=[50]))
        emit_report(result.rows, str(out), result.class_curves, result.contributions, result.avg_beta)
        outputs.append(out)
    for name in ('report.csv', 'features_qf50.csv', 'avg_beta_by_class.svg', 'beta_vs_qf_dm.svg'):
        assert (outputs[0] / name).read_bytes() == (outputs[1] / name).read_bytes()


def test_partial_grid_exits_with_three(tiered_dataset, tmp_path, monkeypatch):
    manifest, _ = tiered_dataset
    real_train = harness.train

    def failing_train(algorithm, *args, **kwargs):
        if algorithm == 'knn':
            raise TrainingError('injected failure')
        return real_train(algorithm, *args, **kwargs)

    monkeypatch.setattr(harness, 'train', failing_train)
    path = tmp_path / 'experiment.json'
    save_json(path, {'manifest': manifest, 'subsets': ['first:6'], 'algorithms': ['knn', 'random_forest'],
                     'qfs': [], 'out_dir': str(tmp_path / 'grid'), 'n_trials': 1,
                     'search_spaces': {'knn': {}, 'random_forest': {}}})
    assert main(QUIET + ['grid', '--config', str(path)]) == EXIT_PARTIAL
    rows = load_report(tmp_path / 'grid' / 'report.csv')
    assert [(r.algorithm, r.condition) for r in rows] == [('random_forest', 'RAW')]


def svg_series_ids(path):
    return sorted(el.get('id') for el in ET.parse(path).iter() if (el.get('id') or '').startswith('series-'))


def test_emit_report_writes_csv_and_figures(tmp_path):
    rows = [ReportRow('ALL', 'knn', 'RAW', 0.9, 0.88, 30), ReportRow('ALL', 'knn', 'QF90', 2 / 3, 0.5, 30)]
    curves = {c.tag: {'RAW': np.linspace(10, 1, 63), 'QF90': np.linspace(9, 0.5, 63)} for c in ClassLabel}
    contributions = ContributionVector(np.sin(np.arange(63)), 12)
    avg = np.vstack([np.linspace(10, 1, 63) * s for s in (1.0, 1.5, 2.0)])
    paths = emit_report(rows, str(tmp_path), curves, contributions, avg)
    assert len(paths) == 6
    assert load_report(tmp_path / 'report.csv') == rows
    assert svg_series_ids(tmp_path / 'avg_beta_by_class.svg') == ['series-dm', 'series-gan', 'series-real']
    assert svg_series_ids(tmp_path / 'beta_vs_qf_gan.svg') == ['series-QF90', 'series-RAW']
    assert svg_series_ids(tmp_path / 'lime_contributions.svg') == ['series-contributions']


def test_emit_report_needs_rows(tmp_path):
    with pytest.raises(DataError):
        emit_report([], str(tmp_path))


def test_report_command_rebuilds_figures(tiered_dataset, tmp_path):
    manifest, _ = tiered_dataset
    out = tmp_path / 'grid'
    result = run_grid(grid_config(manifest, out, subsets=['first:10'], algorithms=['knn'], qfs=[70]))
    emit_report(result.rows, str(out), result.class_curves, None, result.avg_beta)
    os.remove(out / 'beta_vs_qf_real.svg')
    assert main(QUIET + ['report', '--grid-dir', str(out)]) == EXIT_OK
    assert svg_series_ids(out / 'beta_vs_qf_real.svg') == ['series-QF70', 'series-RAW']


def test_synth_command(tmp_path):
    out = tmp_path / 'synth'
    code = main(QUIET + ['synth', '--profile', 'lowfreq', '--n-per-class', '4', '--size', '32',
                         '--seed', '2', '--out', str(out)])
    assert code == EXIT_OK
    rows = load_manifest(out / 'manifest.csv')
    assert len(rows) == 12
    assert load_features(out / 'ground_truth.csv').ids == [r.path for r in rows]


def test_synth_command_rejects_bad_profile_file(tmp_path):
    path = tmp_path / 'profiles.json'
    save_json(path, {'profiles': [[1.0] * 62] * 3})
    code = main(QUIET + ['synth', '--profile-file', str(path), '--n-per-class', '2', '--size', '16',
                         '--out', str(tmp_path / 'out')])
    assert code == EXIT_DATA


def test_subsets_command(tmp_path, capsys):
    assert main(QUIET + ['subsets']) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert [line.split('\t')[0] for line in lines][:2] == ['ALL', '1:28']
    assert len(lines) == 10
    assert main(QUIET + ['subsets', '--manual', '--out-dir', str(tmp_path)]) == EXIT_OK
    assert len(os.listdir(tmp_path)) == 29 + 34 + 15


def test_inspect_tool_reports_band_means(tmp_path, capsys):
    path = tmp_path / 'sample.png'
    Image.fromarray(synth_image(np.full(63, 10.0), 64, np.random.default_rng(3))).save(path)
    means = inspect_run(str(path), qfs=(90, 30), band_start=48)
    assert set(means) == {'RAW', 'QF90', 'QF30'}
    assert means['QF30'] < means['QF90']
    assert means['QF30'] < 0.5 * means['RAW']
    assert '[BAND]' in capsys.readouterr().out


def test_attack_command_accepts_manifest_or_feature_cache(tiered_dataset, tmp_path):
    manifest, _ = tiered_dataset
    root = os.path.dirname(manifest)
    assert main(QUIET + ['attack', '--in', manifest, '--qf', '50', '--out', str(tmp_path / 'a.csv')]) == EXIT_OK
    extract_cmd(manifest, str(tmp_path / 'test.csv'), split='test')
    code = main(QUIET + ['attack', '--in', str(tmp_path / 'test.csv'), '--image-root', root,
                         '--qf', '50', '--out', str(tmp_path / 'b.csv')])
    assert code == EXIT_OK
    assert (tmp_path / 'a.csv').read_bytes() == (tmp_path / 'b.csv').read_bytes()
    assert main(QUIET + ['attack', '--manifest', manifest, '--qf', '50', '--out', str(tmp_path / 'c.csv')]) == EXIT_OK
    assert (tmp_path / 'c.csv').read_bytes() == (tmp_path / 'a.csv').read_bytes()
