"""Classifiers over beta-AC feature subsets.

K-NN, Random Forest, multiclass Gradient Boosting and a ReLU MLP, all in
numpy, plus random-search cross-validation and accuracy / macro-F1
evaluation. Every estimator exposes ``fit``, ``predict_proba``,
``to_state`` and ``from_state``; ``TrainedModel`` wraps one together with
its subset and standardizer.
"""
import copy
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from config import (
    CLASS_TAGS,
    CV_FOLDS,
    DEFAULT_HYPERPARAMS,
    MODEL_FORMAT_VERSION,
    SEARCH_SPACES,
    SEARCH_TRIALS,
)
from datasets import ClassLabel, FeatureTable
from errors import DataError, SubsetError, TrainingError
from subsets import SubsetSpec, project

logger = logging.getLogger(__name__)

N_CLASSES = len(CLASS_TAGS)


class Algorithm(str, Enum):
    KNN = 'knn'
    RANDOM_FOREST = 'random_forest'
    GRADIENT_BOOSTING = 'gradient_boosting'
    MLP = 'mlp'

    @classmethod
    def parse(cls, text) -> 'Algorithm':
        if isinstance(text, cls):
            return text
        key = str(text).strip().lower().replace('-', '_')
        aliases = {'k_nn': 'knn', 'rf': 'random_forest', 'gb': 'gradient_boosting', 'nn': 'mlp'}
        key = aliases.get(key, key)
        try:
            return cls(key)
        except ValueError:
            raise DataError(f"unknown algorithm {text!r}; expected one of {', '.join(a.value for a in cls)}") from None


def one_hot(labels, n_classes=N_CLASSES) -> np.ndarray:
    out = np.zeros((len(labels), n_classes))
    out[np.arange(len(labels)), np.asarray(labels, dtype=np.intp)] = 1.0
    return out


def softmax(logits) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


@dataclass
class Standardizer:
    mean: np.ndarray
    std: np.ndarray

    @classmethod
    def fit(cls, x) -> 'Standardizer':
        x = np.asarray(x, dtype=np.float64)
        mean = x.mean(axis=0)
        std = x.std(axis=0)
        flat = std <= 1e-12 * np.maximum(1.0, np.abs(mean))
        if flat.any():
            logger.warning("Zero-variance feature column(s) %s; using std=1", np.flatnonzero(flat).tolist())
            std = np.where(flat, 1.0, std)
        return cls(mean=mean, std=std)

    def transform(self, x) -> np.ndarray:
        return (np.asarray(x, dtype=np.float64) - self.mean) / self.std

    def to_state(self):
        return {'mean': self.mean.tolist(), 'std': self.std.tolist()}

    @classmethod
    def from_state(cls, state):
        return cls(mean=np.asarray(state['mean'], dtype=np.float64),
                   std=np.asarray(state['std'], dtype=np.float64))


# K-NN
# ----

class KNNClassifier:
    """Euclidean k-nearest neighbours; scores are neighbour vote fractions."""

    def __init__(self, k=5):
        self.k = int(k)
        self.x = None
        self.y = None

    def fit(self, x, y, rng=None):
        self.x = np.asarray(x, dtype=np.float64)
        self.y = np.asarray(y, dtype=np.int64)
        if self.k > len(self.y):
            logger.warning("k=%d exceeds %d training rows; using all rows", self.k, len(self.y))
        return self

    def predict_proba(self, x, chunk=64):
        x = np.asarray(x, dtype=np.float64)
        k = min(self.k, len(self.y))
        scores = np.zeros((len(x), N_CLASSES))
        for start in range(0, len(x), chunk):
            q = x[start:start + chunk]
            diff = q[:, None, :] - self.x[None, :, :]
            dist = np.einsum('ijk,ijk->ij', diff, diff)
            # Stable sort: equal distances resolve to the earliest training row
            nearest = np.argsort(dist, axis=1, kind='stable')[:, :k]
            votes = self.y[nearest]
            for c in range(N_CLASSES):
                scores[start:start + chunk, c] = (votes == c).sum(axis=1) / k
        return scores

    def to_state(self):
        return {'k': self.k, 'x': self.x.tolist(), 'y': self.y.tolist()}

    @classmethod
    def from_state(cls, state):
        model = cls(k=state['k'])
        model.x = np.asarray(state['x'], dtype=np.float64).reshape(len(state['y']), -1)
        model.y = np.asarray(state['y'], dtype=np.int64)
        return model


# Trees
# -----

def _n_split_features(max_features, n_features) -> int:
    if max_features in (None, 'all'):
        return n_features
    if max_features == 'sqrt':
        return max(1, int(math.sqrt(n_features)))
    if max_features == 'half':
        return max(1, n_features // 2)
    return max(1, min(n_features, int(max_features)))


class DecisionTree:
    """CART tree minimising squared error of a target matrix.

    With one-hot class targets the squared error of a node is n times its
    Gini impurity, so the same builder grows classification trees (leaves
    hold class proportions) and the regression trees used by boosting.
    """

    def __init__(self, max_depth=None, max_features=None, min_samples_split=2):
        self.max_depth = max_depth
        self.max_features = max_features
        self.min_samples_split = min_samples_split
        self.feature: List[int] = []
        self.threshold: List[float] = []
        self.left: List[int] = []
        self.right: List[int] = []
        self.value: List[np.ndarray] = []

    def _new_node(self, value):
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.value.append(value)
        return len(self.value) - 1

    @staticmethod
    def _best_split(x, t, features):
        n = len(t)
        total = t.sum(axis=0)
        parent = float((total ** 2).sum()) / n
        counts = np.arange(1, n)
        best_gain, best = 1e-12, None
        for f in features:
            order = np.argsort(x[:, f], kind='stable')
            xs = x[order, f]
            valid = xs[1:] > xs[:-1]
            if not valid.any():
                continue
            left = np.cumsum(t[order], axis=0)[:-1]
            gain = ((left ** 2).sum(axis=1) / counts
                    + ((total - left) ** 2).sum(axis=1) / (n - counts) - parent)
            gain[~valid] = -np.inf
            i = int(np.argmax(gain))
            if gain[i] > best_gain:
                best_gain = gain[i]
                best = (int(f), 0.5 * (xs[i] + xs[i + 1]))
        return best

    def fit(self, x, targets, rng=None):
        x = np.asarray(x, dtype=np.float64)
        targets = np.asarray(targets, dtype=np.float64)
        if targets.ndim == 1:
            targets = targets[:, None]
        rng = rng if rng is not None else np.random.default_rng(0)
        n_features = x.shape[1]
        m = _n_split_features(self.max_features, n_features)
        self.feature, self.threshold, self.left, self.right, self.value = [], [], [], [], []

        root = self._new_node(targets.mean(axis=0))
        stack = [(root, np.arange(len(x)), 0)]
        while stack:
            node, rows, depth = stack.pop()
            t = targets[rows]
            if ((self.max_depth is not None and depth >= self.max_depth)
                    or len(rows) < self.min_samples_split
                    or np.all(t == t[0])):
                continue
            features = np.arange(n_features) if m == n_features else rng.choice(n_features, m, replace=False)
            split = self._best_split(x[rows], t, features)
            if split is None:
                continue
            f, thr = split
            go_left = x[rows, f] <= thr
            left_rows, right_rows = rows[go_left], rows[~go_left]
            self.feature[node] = f
            self.threshold[node] = float(thr)
            self.left[node] = self._new_node(targets[left_rows].mean(axis=0))
            self.right[node] = self._new_node(targets[right_rows].mean(axis=0))
            stack.append((self.right[node], right_rows, depth + 1))
            stack.append((self.left[node], left_rows, depth + 1))
        return self

    def apply(self, x) -> np.ndarray:
        """Leaf id reached by every row."""
        x = np.asarray(x, dtype=np.float64)
        node = np.zeros(len(x), dtype=np.intp)
        feature = np.asarray(self.feature)
        threshold = np.asarray(self.threshold)
        left = np.asarray(self.left)
        right = np.asarray(self.right)
        active = feature[node] >= 0
        while active.any():
            idx = np.flatnonzero(active)
            cur = node[idx]
            goes_left = x[idx, feature[cur]] <= threshold[cur]
            node[idx] = np.where(goes_left, left[cur], right[cur])
            active = feature[node] >= 0
        return node

    def predict(self, x) -> np.ndarray:
        return np.asarray(self.value)[self.apply(x)]

    def to_state(self):
        return {
            'feature': list(self.feature),
            'threshold': list(self.threshold),
            'left': list(self.left),
            'right': list(self.right),
            'value': [np.asarray(v).tolist() for v in self.value],
        }

    @classmethod
    def from_state(cls, state):
        tree = cls()
        tree.feature = [int(v) for v in state['feature']]
        tree.threshold = [float(v) for v in state['threshold']]
        tree.left = [int(v) for v in state['left']]
        tree.right = [int(v) for v in state['right']]
        tree.value = [np.asarray(v, dtype=np.float64) for v in state['value']]
        return tree


class RandomForestClassifier:
    """Bagged Gini trees; scores are the mean of per-tree leaf class proportions."""

    def __init__(self, n_trees=100, max_depth=None, max_features='sqrt', bootstrap=True, seed=0):
        self.n_trees = int(n_trees)
        self.max_depth = None if max_depth is None else int(max_depth)
        self.max_features = max_features
        self.bootstrap = bool(bootstrap)
        self.seed = int(seed)
        self.trees: List[DecisionTree] = []

    def fit(self, x, y, rng=None):
        x = np.asarray(x, dtype=np.float64)
        targets = one_hot(y)
        self.trees = []
        for t in range(self.n_trees):
            tree_rng = np.random.default_rng([self.seed, t])
            rows = (tree_rng.integers(0, len(x), size=len(x)) if self.bootstrap
                    else np.arange(len(x)))
            tree = DecisionTree(self.max_depth, self.max_features)
            self.trees.append(tree.fit(x[rows], targets[rows], tree_rng))
        return self

    def predict_proba(self, x):
        scores = np.zeros((len(x), N_CLASSES))
        for tree in self.trees:
            scores += tree.predict(x)
        return scores / len(self.trees)

    def to_state(self):
        return {
            'n_trees': self.n_trees, 'max_depth': self.max_depth, 'max_features': self.max_features,
            'bootstrap': self.bootstrap, 'seed': self.seed,
            'trees': [tree.to_state() for tree in self.trees],
        }

    @classmethod
    def from_state(cls, state):
        model = cls(state['n_trees'], state['max_depth'], state['max_features'],
                    state['bootstrap'], state['seed'])
        model.trees = [DecisionTree.from_state(s) for s in state['trees']]
        return model


class GradientBoostingClassifier:
    """Multiclass gradient boosting: one regression tree per class per round, softmax link.

    Leaves take a single Newton step, (K-1)/K * sum(r) / sum(|r|(1-|r|)).
    """

    def __init__(self, n_trees=100, learning_rate=0.1, max_depth=3, seed=0):
        self.n_trees = int(n_trees)
        self.learning_rate = float(learning_rate)
        self.max_depth = int(max_depth)
        self.seed = int(seed)
        self.init_scores = np.zeros(N_CLASSES)
        self.trees: List[List[DecisionTree]] = []

    def fit(self, x, y, rng=None):
        x = np.asarray(x, dtype=np.float64)
        targets = one_hot(y)
        prior = np.clip(targets.mean(axis=0), 1e-12, None)
        self.init_scores = np.log(prior)
        scores = np.tile(self.init_scores, (len(x), 1))
        rng = np.random.default_rng(self.seed)
        factor = (N_CLASSES - 1) / N_CLASSES
        self.trees = []
        for _ in range(self.n_trees):
            probs = softmax(scores)
            round_trees = []
            for k in range(N_CLASSES):
                residual = targets[:, k] - probs[:, k]
                tree = DecisionTree(self.max_depth, 'all').fit(x, residual, rng)
                leaves = tree.apply(x)
                for leaf in np.unique(leaves):
                    r = residual[leaves == leaf]
                    den = float(np.sum(np.abs(r) * (1.0 - np.abs(r))))
                    step = factor * float(r.sum()) / den if den > 1e-12 else 0.0
                    tree.value[leaf] = np.array([step])
                scores[:, k] += self.learning_rate * tree.predict(x)[:, 0]
                round_trees.append(tree)
            self.trees.append(round_trees)
        return self

    def decision_function(self, x):
        x = np.asarray(x, dtype=np.float64)
        scores = np.tile(self.init_scores, (len(x), 1))
        for round_trees in self.trees:
            for k, tree in enumerate(round_trees):
                scores[:, k] += self.learning_rate * tree.predict(x)[:, 0]
        return scores

    def predict_proba(self, x):
        return softmax(self.decision_function(x))

    def to_state(self):
        return {
            'n_trees': self.n_trees, 'learning_rate': self.learning_rate,
            'max_depth': self.max_depth, 'seed': self.seed,
            'init_scores': self.init_scores.tolist(),
            'trees': [[tree.to_state() for tree in rt] for rt in self.trees],
        }

    @classmethod
    def from_state(cls, state):
        model = cls(state['n_trees'], state['learning_rate'], state['max_depth'], state['seed'])
        model.init_scores = np.asarray(state['init_scores'], dtype=np.float64)
        model.trees = [[DecisionTree.from_state(s) for s in rt] for rt in state['trees']]
        return model


# MLP
# ---

class MLPClassifier:
    """ReLU network (default 256-128-64) with a softmax output and mean cross-entropy loss.

    Trained with Adam on mini-batches; early stopping watches accuracy on
    a validation carve-out of the training rows and keeps the best weights.
    """

    def __init__(self, hidden=(256, 128, 64), batch_size=64, learning_rate=1e-3, max_epochs=200,
                 patience=10, validation_fraction=0.1, seed=0):
        self.hidden = tuple(int(h) for h in hidden)
        self.batch_size = int(batch_size)
        self.learning_rate = float(learning_rate)
        self.max_epochs = int(max_epochs)
        self.patience = int(patience)
        self.validation_fraction = float(validation_fraction)
        self.seed = int(seed)
        self.weights: List[np.ndarray] = []
        self.biases: List[np.ndarray] = []
        self.epochs_run = 0

    def init_params(self, n_inputs, rng=None):
        rng = rng if rng is not None else np.random.default_rng(self.seed)
        sizes = (n_inputs,) + self.hidden + (N_CLASSES,)
        self.weights = [rng.normal(0.0, math.sqrt(2.0 / fan_in), size=(fan_in, fan_out))
                        for fan_in, fan_out in zip(sizes[:-1], sizes[1:])]
        self.biases = [np.zeros(fan_out) for fan_out in sizes[1:]]
        return self

    def _forward(self, x):
        activations = [x]
        pre = []
        a = x
        for w, b in zip(self.weights[:-1], self.biases[:-1]):
            z = a @ w + b
            pre.append(z)
            a = np.maximum(z, 0.0)
            activations.append(a)
        logits = a @ self.weights[-1] + self.biases[-1]
        return softmax(logits), activations, pre

    def loss(self, x, y) -> float:
        probs, _, _ = self._forward(np.asarray(x, dtype=np.float64))
        y = np.asarray(y, dtype=np.intp)
        return float(-np.mean(np.log(np.clip(probs[np.arange(len(y)), y], 1e-300, None))))

    def gradient(self, x, y) -> Tuple[float, List[np.ndarray], List[np.ndarray]]:
        """Backpropagated gradients of the mean cross-entropy: (loss, dW per layer, db per layer)."""
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.intp)
        n = len(y)
        probs, activations, pre = self._forward(x)
        loss = float(-np.mean(np.log(np.clip(probs[np.arange(n), y], 1e-300, None))))
        delta = (probs - one_hot(y)) / n
        grad_w = [None] * len(self.weights)
        grad_b = [None] * len(self.biases)
        for layer in range(len(self.weights) - 1, -1, -1):
            grad_w[layer] = activations[layer].T @ delta
            grad_b[layer] = delta.sum(axis=0)
            if layer > 0:
                delta = (delta @ self.weights[layer].T) * (pre[layer - 1] > 0)
        return loss, grad_w, grad_b

    def fit(self, x, y, rng=None):
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.int64)
        rng = np.random.default_rng(self.seed)
        self.init_params(x.shape[1], rng)

        order = rng.permutation(len(x))
        n_val = int(round(self.validation_fraction * len(x))) if len(x) >= 10 else 0
        val_rows, train_rows = order[:n_val], order[n_val:]
        params = self.weights + self.biases
        m = [np.zeros_like(p) for p in params]
        v = [np.zeros_like(p) for p in params]
        beta1, beta2, eps = 0.9, 0.999, 1e-8
        step = 0
        best_acc, best_params, wait = -1.0, None, 0

        for epoch in range(self.max_epochs):
            shuffled = rng.permutation(train_rows)
            for start in range(0, len(shuffled), self.batch_size):
                batch = shuffled[start:start + self.batch_size]
                _, gw, gb = self.gradient(x[batch], y[batch])
                step += 1
                for i, (p, g) in enumerate(zip(self.weights + self.biases, gw + gb)):
                    m[i] = beta1 * m[i] + (1 - beta1) * g
                    v[i] = beta2 * v[i] + (1 - beta2) * g * g
                    m_hat = m[i] / (1 - beta1 ** step)
                    v_hat = v[i] / (1 - beta2 ** step)
                    p -= self.learning_rate * m_hat / (np.sqrt(v_hat) + eps)
            self.epochs_run = epoch + 1
            if n_val == 0:
                continue
            acc = float(np.mean(np.argmax(self.predict_proba(x[val_rows]), axis=1) == y[val_rows]))
            if acc > best_acc:
                best_acc, wait = acc, 0
                best_params = ([w.copy() for w in self.weights], [b.copy() for b in self.biases])
            else:
                wait += 1
                if wait >= self.patience:
                    logger.debug("MLP early stop after %d epochs (val acc %.4f)", epoch + 1, best_acc)
                    break
        if best_params is not None:
            self.weights, self.biases = best_params
        return self

    def predict_proba(self, x):
        probs, _, _ = self._forward(np.asarray(x, dtype=np.float64))
        return probs

    def to_state(self):
        return {
            'hidden': list(self.hidden), 'batch_size': self.batch_size,
            'learning_rate': self.learning_rate, 'max_epochs': self.max_epochs,
            'patience': self.patience, 'validation_fraction': self.validation_fraction,
            'seed': self.seed, 'epochs_run': self.epochs_run,
            'weights': [w.tolist() for w in self.weights],
            'biases': [b.tolist() for b in self.biases],
        }

    @classmethod
    def from_state(cls, state):
        model = cls(state['hidden'], state['batch_size'], state['learning_rate'], state['max_epochs'],
                    state['patience'], state['validation_fraction'], state['seed'])
        model.epochs_run = state.get('epochs_run', 0)
        model.weights = [np.asarray(w, dtype=np.float64) for w in state['weights']]
        model.biases = [np.asarray(b, dtype=np.float64) for b in state['biases']]
        return model


ESTIMATORS = {
    Algorithm.KNN: KNNClassifier,
    Algorithm.RANDOM_FOREST: RandomForestClassifier,
    Algorithm.GRADIENT_BOOSTING: GradientBoostingClassifier,
    Algorithm.MLP: MLPClassifier,
}


def build_estimator(algorithm: Algorithm, hyperparams: Dict[str, Any], seed: int):
    params = dict(hyperparams)
    if algorithm is not Algorithm.KNN:
        params['seed'] = seed
    try:
        return ESTIMATORS[algorithm](**params)
    except TypeError as e:
        raise TrainingError(f"bad hyperparameters for {algorithm.value}: {e}") from e


# Trained model
# -------------

@dataclass
class TrainedModel:
    algorithm: Algorithm
    subset: SubsetSpec
    standardizer: Standardizer
    estimator: Any
    hyperparams: Dict[str, Any] = field(default_factory=dict)
    seed: int = 0

    def inputs(self, x) -> np.ndarray:
        """Standardized model inputs from full 63-dim beta vectors or a FeatureTable."""
        if isinstance(x, FeatureTable):
            cols = project(x, self.subset).x
        else:
            x = np.atleast_2d(np.asarray(x, dtype=np.float64))
            cols = x[:, np.asarray(self.subset.indices) - 1]
        return self.standardizer.transform(cols)

    def predict_proba(self, x) -> np.ndarray:
        return self.estimator.predict_proba(self.inputs(x))

    def predict_labels(self, x) -> np.ndarray:
        # argmax picks the lowest class ordinal on ties
        return np.argmax(self.predict_proba(x), axis=1)


def _merged_hyperparams(algorithm: Algorithm, hyperparams) -> Dict[str, Any]:
    params = copy.deepcopy(DEFAULT_HYPERPARAMS[algorithm.value])
    params.update(hyperparams or {})
    return params


def train(algorithm, features: FeatureTable, subset: SubsetSpec,
          hyperparams: Optional[Dict[str, Any]] = None, seed: int = 0) -> TrainedModel:
    algorithm = Algorithm.parse(algorithm)
    if len(subset) == 0:
        raise SubsetError(f"cannot train on empty subset {subset.name}")
    present = int(np.count_nonzero(features.class_counts()))
    if present < 2:
        raise TrainingError(f"training data holds {present} class(es); at least 2 are required")
    projected = project(features, subset)
    standardizer = Standardizer.fit(projected.x)
    params = _merged_hyperparams(algorithm, hyperparams)
    estimator = build_estimator(algorithm, params, seed)
    estimator.fit(standardizer.transform(projected.x), projected.labels)
    logger.debug("Trained %s on subset %s (%d rows)", algorithm.value, subset.name, len(features))
    return TrainedModel(algorithm, subset, standardizer, estimator, params, int(seed))


def predict(model: TrainedModel, x) -> Tuple[ClassLabel, np.ndarray]:
    """Label and the 3 class scores for one beta vector (array or BetaVector)."""
    x = getattr(x, 'beta', x)
    x = np.asarray(x, dtype=np.float64).reshape(1, -1)
    if not np.all(np.isfinite(x)):
        raise DataError("cannot classify a non-finite beta vector")
    scores = model.predict_proba(x)[0]
    return ClassLabel(int(np.argmax(scores))), scores


def predict_table(model: TrainedModel, table: FeatureTable) -> Tuple[np.ndarray, np.ndarray]:
    """Predicted labels and score rows for every row of ``table``."""
    scores = model.predict_proba(table)
    return np.argmax(scores, axis=1), scores


def mlp_gradient(model, x, y):
    """Exact gradients of the mean cross-entropy for an MLP (or a TrainedModel wrapping one)."""
    network = model.estimator if isinstance(model, TrainedModel) else model
    if not isinstance(network, MLPClassifier):
        raise TrainingError("mlp_gradient needs an MLP model")
    if len(y) == 0:
        raise DataError("gradient batch is empty")
    return network.gradient(x, y)


# Evaluation
# ----------

@dataclass
class EvalMetrics:
    accuracy: float
    f1_macro: float
    confusion: np.ndarray
    per_class_f1: np.ndarray

    @property
    def n_test(self) -> int:
        return int(self.confusion.sum())


def metrics_from_confusion(confusion) -> EvalMetrics:
    """Accuracy and macro F1 from a confusion matrix indexed [true, predicted]."""
    confusion = np.asarray(confusion, dtype=np.int64)
    total = confusion.sum()
    tp = np.diag(confusion).astype(np.float64)
    denom = confusion.sum(axis=0) + confusion.sum(axis=1)
    # F1 = 2TP / (2TP + FP + FN) = 2TP / (row sum + column sum); 0 when undefined
    f1 = np.divide(2 * tp, denom, out=np.zeros_like(tp), where=denom > 0)
    accuracy = float(tp.sum() / total) if total else 0.0
    return EvalMetrics(accuracy=accuracy, f1_macro=float(f1.mean()), confusion=confusion, per_class_f1=f1)


def evaluate(model: TrainedModel, test: FeatureTable) -> EvalMetrics:
    if len(test) == 0:
        raise DataError("cannot evaluate on an empty test set")
    predicted = model.predict_labels(test)
    confusion = np.zeros((N_CLASSES, N_CLASSES), dtype=np.int64)
    np.add.at(confusion, (test.labels, predicted), 1)
    return metrics_from_confusion(confusion)


# Model selection
# ---------------

def _sample_value(spec, rng):
    if not isinstance(spec, dict):
        return spec
    if 'choice' in spec:
        options = list(spec['choice'])
        return options[int(rng.integers(len(options)))]
    if 'int' in spec:
        low, high = spec['int']
        return int(rng.integers(low, high + 1))
    if 'uniform' in spec:
        low, high = spec['uniform']
        return float(rng.uniform(low, high))
    if 'loguniform' in spec:
        low, high = spec['loguniform']
        return float(math.exp(rng.uniform(math.log(low), math.log(high))))
    raise DataError(f"unknown search distribution {spec!r}")


def sample_hyperparams(search_space: Dict[str, Any], rng) -> Dict[str, Any]:
    return {name: _sample_value(spec, rng) for name, spec in search_space.items()}


def stratified_folds(labels, n_folds: int, rng) -> List[np.ndarray]:
    """Deal each class's shuffled rows round-robin into ``n_folds`` folds."""
    labels = np.asarray(labels, dtype=np.int64)
    folds = [[] for _ in range(n_folds)]
    for cls in np.unique(labels):
        members = rng.permutation(np.flatnonzero(labels == cls))
        if len(members) < n_folds:
            raise TrainingError(f"class {ClassLabel(int(cls)).tag} has {len(members)} training rows; "
                                f"{n_folds}-fold CV needs at least {n_folds}")
        for i, row in enumerate(members):
            folds[i % n_folds].append(row)
    return [np.sort(np.asarray(f, dtype=np.intp)) for f in folds]


@dataclass
class SearchResult:
    best: Dict[str, Any]
    best_score: float
    trials: List[Tuple[Dict[str, Any], float]] = field(default_factory=list)


def cross_val_accuracy(algorithm, features: FeatureTable, subset: SubsetSpec, hyperparams,
                       folds: List[np.ndarray], seed: int) -> float:
    scores = []
    all_rows = np.arange(len(features))
    for held_out in folds:
        fit_rows = np.setdiff1d(all_rows, held_out, assume_unique=True)
        model = train(algorithm, features.take(fit_rows), subset, hyperparams, seed)
        scores.append(evaluate(model, features.take(held_out)).accuracy)
    return float(np.mean(scores))


def random_search_cv(algorithm, features: FeatureTable, subset: SubsetSpec,
                     search_space: Optional[Dict[str, Any]] = None, n_trials: int = SEARCH_TRIALS,
                     seed: int = 0, n_folds: int = CV_FOLDS) -> SearchResult:
    """Random search scored by mean stratified k-fold accuracy; ties go to the first trial."""
    algorithm = Algorithm.parse(algorithm)
    if n_trials < 1:
        raise DataError(f"random search needs at least one trial, got {n_trials}")
    space = SEARCH_SPACES[algorithm.value] if search_space is None else search_space
    rng = np.random.default_rng(seed)
    folds = stratified_folds(features.labels, n_folds, rng)
    cache: Dict[str, float] = {}
    trials = []
    for _ in range(n_trials):
        params = sample_hyperparams(space, rng)
        key = repr(sorted(params.items(), key=lambda kv: kv[0]))
        if key not in cache:
            cache[key] = cross_val_accuracy(algorithm, features, subset, params, folds, seed)
        trials.append((params, cache[key]))
    best_index = int(np.argmax([score for _, score in trials]))
    best, best_score = trials[best_index]
    logger.info("%s on %s: best CV accuracy %.4f with %s (%d trials)",
                algorithm.value, subset.name, best_score, best, n_trials)
    return SearchResult(best=dict(best), best_score=best_score, trials=trials)


# Model files
# -----------

def model_to_state(model: TrainedModel) -> Dict[str, Any]:
    return {
        'version': MODEL_FORMAT_VERSION,
        'algorithm': model.algorithm.value,
        'subset': {'indices': list(model.subset.indices), 'name': model.subset.name},
        'standardizer': model.standardizer.to_state(),
        'hyperparams': model.hyperparams,
        'seed': model.seed,
        'state': model.estimator.to_state(),
    }


def model_from_state(state: Dict[str, Any]) -> TrainedModel:
    version = state.get('version')
    if version != MODEL_FORMAT_VERSION:
        raise DataError(f"unsupported model file version {version!r}")
    algorithm = Algorithm.parse(state['algorithm'])
    return TrainedModel(
        algorithm=algorithm,
        subset=SubsetSpec(tuple(state['subset']['indices']), state['subset']['name']),
        standardizer=Standardizer.from_state(state['standardizer']),
        estimator=ESTIMATORS[algorithm].from_state(state['state']),
        hyperparams=state.get('hyperparams', {}),
        seed=int(state.get('seed', 0)),
    )
