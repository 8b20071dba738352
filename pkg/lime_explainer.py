"""Local linear explanations of MLP predictions and the LIME-derived coefficient subsets.

Continuous tabular LIME: Gaussian perturbations around the instance,
exponential kernel in standardized space, weighted ridge surrogate. The
surrogate weights are the per-coefficient contributions.
"""
import logging
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from sklearn.linear_model import Ridge

from classifiers import Algorithm, MLPClassifier
from config import AC_COUNT, LIME_KERNEL_SCALE, LIME_RIDGE_ALPHA, LIME_SAMPLES
from datasets import FeatureTable
from errors import DataError, ExplainerError
from subsets import SubsetSpec

logger = logging.getLogger(__name__)


@dataclass
class ContributionVector:
    """Average contribution of every AC index over the N correctly classified rows."""

    c_avg: np.ndarray
    n_correct: int

    def __post_init__(self):
        self.c_avg = np.asarray(self.c_avg, dtype=np.float64).reshape(-1)
        if self.c_avg.size != AC_COUNT:
            raise DataError(f"contribution vector needs {AC_COUNT} entries, got {self.c_avg.size}")
        if not np.all(np.isfinite(self.c_avg)):
            raise DataError("contribution vector contains non-finite values")
        if int(self.n_correct) < 1:
            raise DataError(f"contribution vector must average at least one row, got N={self.n_correct}")
        self.n_correct = int(self.n_correct)


def kernel_width(n_features: int) -> float:
    return LIME_KERNEL_SCALE * float(np.sqrt(n_features))


def weighted_ridge(x, y, weights, alpha: float = LIME_RIDGE_ALPHA):
    """Ridge fit with an unpenalized intercept; returns (coef, intercept)."""
    surrogate = Ridge(alpha=alpha, fit_intercept=True)
    surrogate.fit(x, y, sample_weight=weights)
    return surrogate.coef_, float(surrogate.intercept_)


def explain_scores(score_fn: Callable[[np.ndarray], np.ndarray], x_std, n_samples: int, rng,
                   alpha: float = LIME_RIDGE_ALPHA) -> np.ndarray:
    """Surrogate weights of ``score_fn`` around the standardized point ``x_std``.

    ``score_fn`` maps an (n, d) array of standardized inputs to n scores.
    Perturbations are x + N(0, I) in standardized space, which is x +
    N(0, diag(std^2)) in the original one. The first sample is x itself.
    """
    x_std = np.asarray(x_std, dtype=np.float64).reshape(-1)
    d = x_std.size
    if n_samples < 2:
        raise ExplainerError(f"LIME needs at least 2 samples, got {n_samples}")
    noise = rng.normal(0.0, 1.0, size=(n_samples, d))
    noise[0] = 0.0
    z = x_std + noise
    scores = np.asarray(score_fn(z), dtype=np.float64).reshape(-1)
    if np.all(scores == scores[0]):
        logger.warning("All %d perturbation scores are identical; contributions set to zero", n_samples)
        return np.zeros(d)
    distances_sq = np.sum(noise ** 2, axis=1)
    weights = np.exp(-distances_sq / kernel_width(d) ** 2)
    coef, _ = weighted_ridge(z, scores, weights, alpha)
    return coef


def _require_mlp(model):
    if model.algorithm is not Algorithm.MLP or not isinstance(model.estimator, MLPClassifier):
        raise ExplainerError(f"LIME explanations need the MLP, got {model.algorithm.value}")


def row_seed(seed: int, row_id: str):
    """Seed for one test row, tied to its id rather than its position."""
    return [int(seed), zlib.crc32(str(row_id).encode('utf-8'))]


def explain_instance(model, x, n_samples: int = LIME_SAMPLES, seed=0,
                     target: Optional[int] = None) -> np.ndarray:
    """63 contributions of one beta vector to the MLP score of ``target`` (default: predicted class).

    ``seed`` is anything ``numpy.random.default_rng`` accepts. Indices
    outside the model's subset get zero.
    """
    _require_mlp(model)
    x = np.asarray(getattr(x, 'beta', x), dtype=np.float64).reshape(-1)
    if x.size != AC_COUNT or not np.all(np.isfinite(x)):
        raise DataError(f"explain_instance needs a finite {AC_COUNT}-entry beta vector")
    x_std = model.inputs(x)[0]
    if target is None:
        target = int(np.argmax(model.estimator.predict_proba(x_std[None, :])[0]))

    def score(z):
        return model.estimator.predict_proba(z)[:, target]

    coef = explain_scores(score, x_std, n_samples, np.random.default_rng(seed))
    contributions = np.zeros(AC_COUNT)
    contributions[np.asarray(model.subset.indices) - 1] = coef
    return contributions


def _explain_row(args):
    model, x, n_samples, seed, target = args
    return explain_instance(model, x, n_samples, seed, target)


def average_contributions(model, test: FeatureTable, n_samples: int = LIME_SAMPLES, seed: int = 0,
                          workers: int = 1) -> ContributionVector:
    """Mean contribution over the correctly classified rows of ``test``.

    Each row is explained with a seed derived from its id, so the result
    depends neither on row order nor on worker count.
    """
    _require_mlp(model)
    if len(test) == 0:
        raise ExplainerError("cannot explain an empty test set")
    predicted = model.predict_labels(test)
    correct = np.flatnonzero(predicted == test.labels)
    if correct.size == 0:
        raise ExplainerError("model classifies no test row correctly; nothing to average")
    jobs = [(model, test.x[j], n_samples, row_seed(seed, test.ids[j]), int(test.labels[j])) for j in correct]
    if workers <= 1 or len(jobs) < 2:
        rows = [_explain_row(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_explain_row, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    c_avg = np.mean(np.vstack(rows), axis=0)
    logger.info("LIME averaged over %d of %d correctly classified test rows", correct.size, len(test))
    return ContributionVector(c_avg=c_avg, n_correct=int(correct.size))


def _values(c) -> np.ndarray:
    return np.asarray(getattr(c, 'c_avg', c), dtype=np.float64).reshape(-1)


def pos_lime(c) -> SubsetSpec:
    """Indices with a positive average contribution."""
    values = _values(c)
    subset = SubsetSpec(tuple(int(i) + 1 for i in np.flatnonzero(values > 0)), 'POS-LIME')
    if len(subset) == 0:
        logger.warning("POS-LIME subset is empty: no coefficient has a positive average contribution")
    return subset


def abs_lime(c) -> SubsetSpec:
    """Indices whose |average contribution| strictly exceeds the median magnitude."""
    magnitude = np.abs(_values(c))
    subset = SubsetSpec(tuple(int(i) + 1 for i in np.flatnonzero(magnitude > np.median(magnitude))),
                        'ABS-LIME')
    if len(subset) == 0:
        logger.warning("ABS-LIME subset is empty: all contribution magnitudes are equal")
    return subset
