"""SVG figures for a finished grid: class-average beta curves, LIME contributions, beta vs QF."""
import logging
import os

import matplotlib

matplotlib.use('Agg')
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from config import AC_COUNT, CLASS_TAGS  # noqa: E402

logger = logging.getLogger(__name__)

# Fixed salt and no date so reruns produce identical files
plt.rcParams['svg.hashsalt'] = 'betaforensics'
SVG_METADATA = {'Date': None}

INDEX_AXIS = np.arange(1, AC_COUNT + 1)


def _save(fig, path):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    fig.savefig(path, format='svg', bbox_inches='tight', metadata=SVG_METADATA)
    plt.close(fig)
    logger.info("Wrote %s", path)
    return path


def _index_axes(ax, ylabel):
    ax.set_xlabel('AC coefficient (zig-zag index)')
    ax.set_ylabel(ylabel)
    ax.set_xlim(1, AC_COUNT)
    ax.grid(True, alpha=0.3)


def plot_avg_beta_by_class(avg_beta, path):
    """One curve per class of the mean beta vector."""
    avg_beta = np.asarray(avg_beta, dtype=np.float64)
    fig, ax = plt.subplots(figsize=(10, 5))
    for tag, curve in zip(CLASS_TAGS, avg_beta):
        line, = ax.plot(INDEX_AXIS, curve, marker='o', markersize=3, label=tag)
        line.set_gid(f'series-{tag}')
    _index_axes(ax, 'average beta')
    ax.set_title('Average beta-AC per class')
    ax.legend()
    return _save(fig, path)


def plot_lime_contributions(contributions, path):
    """Bar per coefficient; dotted lines at +/- the median magnitude."""
    values = np.asarray(getattr(contributions, 'c_avg', contributions), dtype=np.float64)
    median = float(np.median(np.abs(values)))
    fig, ax = plt.subplots(figsize=(12, 5))
    colors = np.where(values > 0, 'tab:blue', 'tab:red')
    bars = ax.vlines(INDEX_AXIS, 0.0, values, colors=colors.tolist(), linewidth=6)
    bars.set_gid('series-contributions')
    for sign in (1, -1):
        guide = ax.axhline(sign * median, linestyle=':', color='black', linewidth=1)
        guide.set_gid(f"median-{'pos' if sign > 0 else 'neg'}")
    ax.axhline(0.0, color='grey', linewidth=0.5)
    _index_axes(ax, 'average contribution')
    ax.set_xlim(0, AC_COUNT + 1)
    n = getattr(contributions, 'n_correct', None)
    ax.set_title('LIME average contribution' + (f' (N={n})' if n is not None else ''))
    return _save(fig, path)


def plot_beta_vs_qf(curves, class_tag, path):
    """Class-average beta per test condition; ``curves`` maps condition name to a 63-vector."""
    fig, ax = plt.subplots(figsize=(10, 5))
    for condition, curve in curves.items():
        line, = ax.plot(INDEX_AXIS, np.asarray(curve, dtype=np.float64), label=condition)
        line.set_gid(f'series-{condition}')
    _index_axes(ax, 'average beta')
    ax.set_title(f'Average beta-AC of class {class_tag} under JPEG compression')
    ax.legend()
    return _save(fig, path)
