"""File persistence: JSON documents plus the CSV/text formats of manifests, feature caches,
contributions, subsets and reports."""
import csv
import json
import logging
import os

import numpy as np

from classifiers import model_from_state, model_to_state
from config import AC_COUNT
from datasets import ALL_INDICES, SPLITS, ClassLabel, FeatureTable, ManifestRow
from errors import DataError
from lime_explainer import ContributionVector
from subsets import SubsetSpec

logger = logging.getLogger(__name__)

MANIFEST_HEADER = ['path', 'label', 'split']
FEATURE_HEADER = ['path', 'label'] + [f'beta_{i}' for i in ALL_INDICES]


def _ensure_parent(file_path):
    parent = os.path.dirname(os.path.abspath(file_path))
    os.makedirs(parent, exist_ok=True)


def load_json(file_path):
    """Load a JSON object from file with error handling."""
    if not os.path.exists(file_path):
        raise DataError(f"file not found: {file_path}")
    try:
        with open(file_path, 'r') as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise DataError(f"invalid JSON in {file_path}: {e}") from e
    if not isinstance(data, dict):
        raise DataError(f"{file_path} must hold a JSON object")
    return data


def save_json(file_path, data):
    """Save data to JSON file."""
    _ensure_parent(file_path)
    with open(file_path, 'w') as f:
        json.dump(data, f, indent=4)


def write_rows(file_path, header, rows):
    _ensure_parent(file_path)
    with open(file_path, 'w', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(header)
        writer.writerows(rows)


def read_header(file_path):
    """First CSV row of a file, or an empty list for an empty file."""
    if not os.path.exists(file_path):
        raise DataError(f"file not found: {file_path}")
    with open(file_path, 'r', newline='') as f:
        return next(csv.reader(f), [])


def read_rows(file_path, header):
    """Rows of a CSV file whose first line must equal ``header``."""
    if not os.path.exists(file_path):
        raise DataError(f"file not found: {file_path}")
    with open(file_path, 'r', newline='') as f:
        reader = csv.reader(f)
        found = next(reader, None)
        if found != list(header):
            raise DataError(f"{file_path}: expected header {','.join(header)}, got {found}")
        return [row for row in reader if row]


# Manifests
# ---------

def load_manifest(file_path):
    """Manifest rows (path, label, split); paths are kept as written."""
    rows = []
    for n, row in enumerate(read_rows(file_path, MANIFEST_HEADER), start=2):
        if len(row) != 3:
            raise DataError(f"{file_path}:{n}: expected 3 fields, got {len(row)}")
        path, label, split = (v.strip() for v in row)
        if split not in SPLITS:
            raise DataError(f"{file_path}:{n}: split must be train or test, got {split!r}")
        rows.append(ManifestRow(path, ClassLabel.parse(label), split))
    if not rows:
        raise DataError(f"{file_path}: manifest is empty")
    return rows


def save_manifest(file_path, rows):
    write_rows(file_path, MANIFEST_HEADER, [[r.path, r.label.tag, r.split] for r in rows])


# Feature caches
# --------------

def save_features(file_path, table: FeatureTable):
    """Write a 63-column feature cache; floats use repr so values round-trip exactly."""
    if tuple(table.indices) != ALL_INDICES:
        raise DataError("feature caches hold all 63 AC indices; save the unprojected table")
    rows = [[row_id, ClassLabel(int(label)).tag] + [repr(float(v)) for v in x]
            for row_id, label, x in zip(table.ids, table.labels, table.x)]
    write_rows(file_path, FEATURE_HEADER, rows)


def load_features(file_path) -> FeatureTable:
    ids, labels, values = [], [], []
    for n, row in enumerate(read_rows(file_path, FEATURE_HEADER), start=2):
        if len(row) != AC_COUNT + 2:
            raise DataError(f"{file_path}:{n}: expected {AC_COUNT + 2} fields, got {len(row)}")
        try:
            values.append([float(v) for v in row[2:]])
        except ValueError as e:
            raise DataError(f"{file_path}:{n}: {e}") from e
        ids.append(row[0])
        labels.append(int(ClassLabel.parse(row[1])))
    if not ids:
        return FeatureTable.empty()
    return FeatureTable(ids, labels, np.asarray(values))


# Contributions and subsets
# -------------------------

def save_contributions(file_path, contributions):
    _ensure_parent(file_path)
    with open(file_path, 'w', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(['n_correct', contributions.n_correct])
        writer.writerow(['index', 'c_avg'])
        for i, value in enumerate(contributions.c_avg, start=1):
            writer.writerow([i, repr(float(value))])


def load_contributions(file_path):
    if not os.path.exists(file_path):
        raise DataError(f"file not found: {file_path}")
    with open(file_path, 'r', newline='') as f:
        rows = [row for row in csv.reader(f) if row]
    try:
        if len(rows) < 2 or rows[0][0] != 'n_correct' or rows[1] != ['index', 'c_avg']:
            raise ValueError("expected an n_correct line followed by an index,c_avg header")
        n_correct = int(rows[0][1])
        c_avg = np.zeros(AC_COUNT)
        seen = set()
        for row in rows[2:]:
            index = int(row[0])
            if not 1 <= index <= AC_COUNT or index in seen:
                raise ValueError(f"bad or repeated index {index}")
            seen.add(index)
            c_avg[index - 1] = float(row[1])
        if len(seen) != AC_COUNT:
            raise ValueError(f"expected {AC_COUNT} indices, found {len(seen)}")
    except (ValueError, IndexError) as e:
        raise DataError(f"{file_path}: {e}") from e
    return ContributionVector(c_avg=c_avg, n_correct=n_correct)


def save_subset(file_path, subset):
    _ensure_parent(file_path)
    with open(file_path, 'w') as f:
        f.writelines(f"{i}\n" for i in subset.indices)


def load_subset(file_path, name=''):
    if not os.path.exists(file_path):
        raise DataError(f"file not found: {file_path}")
    with open(file_path, 'r') as f:
        lines = [line.strip() for line in f if line.strip()]
    try:
        indices = tuple(int(line) for line in lines)
    except ValueError as e:
        raise DataError(f"{file_path}: {e}") from e
    return SubsetSpec(indices, name)


# Models
# ------

def save_model(file_path, model):
    save_json(file_path, model_to_state(model))
    logger.info("Saved %s model to %s", model.algorithm.value, file_path)


def load_model(file_path):
    return model_from_state(load_json(file_path))
