import os

import pytest

from database import save_manifest
from datasets import synth_features, synth_generate, tiered_profiles

collect_ignore = ['examples', 'output']


@pytest.fixture(scope='session')
def tiered_train():
    """Balanced tiered feature table, 60 rows per class, 64x64 images."""
    return synth_features(tiered_profiles(), n_per_class=60, image_size=64, seed=11)


@pytest.fixture(scope='session')
def tiered_test():
    return synth_features(tiered_profiles(), n_per_class=20, image_size=64, seed=12)


@pytest.fixture(scope='session')
def tiered_dataset(tmp_path_factory):
    """Small synthetic image set on disk with manifest.csv; returns (manifest path, SynthResult)."""
    out = str(tmp_path_factory.mktemp('tiered'))
    result = synth_generate(tiered_profiles(), n_per_class=20, image_size=32, seed=5, out_dir=out)
    manifest = os.path.join(out, 'manifest.csv')
    save_manifest(manifest, result.manifest)
    return manifest, result
