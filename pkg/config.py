import os

from dotenv import load_dotenv

load_dotenv()

# Directory paths
BASE_DIR = os.path.dirname(os.path.abspath(__file__))
DATA_DIR = os.path.join(BASE_DIR, 'data')
OUTPUT_DIR = os.getenv('BETAFORENSICS_OUTPUT_DIR', os.path.join(BASE_DIR, 'output'))

# Data files
EXPERIMENT_FILE = os.path.join(DATA_DIR, 'experiment.json')

# Logging
LOG_LEVEL = os.getenv('BETAFORENSICS_LOG_LEVEL', 'INFO')
# Empty string disables the file handler
LOG_FILE = os.getenv('BETAFORENSICS_LOG_FILE', os.path.join(DATA_DIR, 'forensics.log'))

# Parallelism and reproducibility
WORKERS = int(os.getenv('BETAFORENSICS_WORKERS', '1'))
SEED = int(os.getenv('BETAFORENSICS_SEED', '0'))

# Block transform
BLOCK_SIZE = 8
AC_COUNT = 63

# Classes, in ordinal order
CLASS_TAGS = ('real', 'gan', 'dm')

# JPEG attack
QUALITY_FACTORS = (90, 70, 50, 30)
HIGH_FREQUENCY_START = 48  # first AC index of the "high band" used in diagnostics

# Dataset handling
TRAIN_FRACTION = 0.85

# Synthetic surrogate data
SYNTH_DC_MEAN = 1024.0
SYNTH_DC_STD = 64.0
SYNTH_CLASS_SCALES = (1.0, 1.5, 2.25)
SYNTH_IMAGE_SIZE = 64
SYNTH_PER_CLASS = 100

# Model selection
CV_FOLDS = 3
SEARCH_TRIALS = 20

SEARCH_SPACES = {
    'knn': {
        'k': {'choice': list(range(1, 32, 2))},
    },
    'random_forest': {
        'n_trees': {'int': [100, 500]},
        'max_depth': {'choice': list(range(4, 25)) + [None]},
        'max_features': {'choice': ['sqrt', 'half', 'all']},
        'bootstrap': {'choice': [True]},
    },
    'gradient_boosting': {
        'n_trees': {'int': [50, 400]},
        'learning_rate': {'loguniform': [0.01, 0.3]},
        'max_depth': {'int': [2, 6]},
    },
    # Network shape is fixed; no search.
    'mlp': {},
}

# MLP training
MLP_HIDDEN = (256, 128, 64)
MLP_BATCH_SIZE = 64
MLP_LEARNING_RATE = 1e-3
MLP_MAX_EPOCHS = 200
MLP_PATIENCE = 10
MLP_VALIDATION_FRACTION = 0.10

# LIME
LIME_SAMPLES = 1000
LIME_RIDGE_ALPHA = 1.0
LIME_KERNEL_SCALE = 0.75  # kernel width = scale * sqrt(n_features)

# Model files
MODEL_FORMAT_VERSION = 1

# Hyperparameters used when no search is run
DEFAULT_HYPERPARAMS = {
    'knn': {'k': 5},
    'random_forest': {'n_trees': 100, 'max_depth': None, 'max_features': 'sqrt', 'bootstrap': True},
    'gradient_boosting': {'n_trees': 100, 'learning_rate': 0.1, 'max_depth': 3},
    'mlp': {
        'hidden': list(MLP_HIDDEN),
        'batch_size': MLP_BATCH_SIZE,
        'learning_rate': MLP_LEARNING_RATE,
        'max_epochs': MLP_MAX_EPOCHS,
        'patience': MLP_PATIENCE,
        'validation_fraction': MLP_VALIDATION_FRACTION,
    },
}
