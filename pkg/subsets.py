"""Coefficient subsets: the manual first-k / last-t / centered families and projection."""
from dataclasses import dataclass
from typing import List, Tuple

from config import AC_COUNT
from datasets import FeatureTable
from errors import SubsetError

CENTER_INDEX = 31
LIME_TOKENS = ('pos-lime', 'abs-lime')

# Rows of the reference results grid, in order
TABLE2_SUBSETS = (
    'all',
    'first:28', 'first:29', 'first:30',
    'center:15', 'center:14', 'center:13',
    'last:35', 'last:34', 'last:33',
    'pos-lime', 'abs-lime',
)


@dataclass(frozen=True)
class SubsetSpec:
    indices: Tuple[int, ...]
    name: str = ''

    def __post_init__(self):
        indices = tuple(sorted({int(i) for i in self.indices}))
        bad = [i for i in indices if not 1 <= i <= AC_COUNT]
        if bad:
            raise SubsetError(f"AC indices must lie in 1..{AC_COUNT}, got {bad}")
        object.__setattr__(self, 'indices', indices)
        if not self.name:
            object.__setattr__(self, 'name', range_name(indices))

    def __len__(self):
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)


def range_name(indices) -> str:
    """'a:b' for contiguous runs, comma list otherwise."""
    indices = list(indices)
    if not indices:
        return 'EMPTY'
    if indices == list(range(1, AC_COUNT + 1)):
        return 'ALL'
    if indices == list(range(indices[0], indices[-1] + 1)):
        return f"{indices[0]}:{indices[-1]}"
    return ','.join(str(i) for i in indices)


def _check_range(value, low, high, what):
    if isinstance(value, bool) or int(value) != value or not low <= value <= high:
        raise SubsetError(f"{what} must be an integer in [{low}, {high}], got {value!r}")
    return int(value)


def all_coefficients() -> SubsetSpec:
    return SubsetSpec(tuple(range(1, AC_COUNT + 1)), 'ALL')


def first_k(k: int) -> SubsetSpec:
    k = _check_range(k, 2, 30, 'k')
    return SubsetSpec(tuple(range(1, k + 1)))


def last_t(t: int) -> SubsetSpec:
    t = _check_range(t, 2, 35, 't')
    return SubsetSpec(tuple(range(AC_COUNT + 1 - t, AC_COUNT + 1)))


def centered(z: int) -> SubsetSpec:
    z = _check_range(z, 1, 15, 'z')
    return SubsetSpec(tuple(range(CENTER_INDEX - z, CENTER_INDEX + z + 1)))


def manual_families() -> List[SubsetSpec]:
    """The complete manual sweep: first k = 2..30, last t = 35..2, centered z = 1..15."""
    return ([first_k(k) for k in range(2, 31)]
            + [last_t(t) for t in range(35, 1, -1)]
            + [centered(z) for z in range(1, 16)])


def project(features: FeatureTable, subset: SubsetSpec) -> FeatureTable:
    """Keep only the columns of ``subset``, ascending; values are untouched."""
    position = {idx: col for col, idx in enumerate(features.indices)}
    missing = [i for i in subset.indices if i not in position]
    if missing:
        raise SubsetError(f"subset {subset.name} needs AC indices {missing} absent from the table")
    cols = [position[i] for i in subset.indices]
    return FeatureTable(list(features.ids), features.labels.copy(), features.x[:, cols].copy(),
                        tuple(subset.indices))


def parse_subset(text: str) -> SubsetSpec:
    """Parse the CLI grammar.

    ``all``, ``first:K``, ``last:T``, ``center:Z``, ``list:1,5,9``, a bare
    range ``A:B``, ``pos-lime:<contributions file>`` or ``abs-lime:<file>``.
    """
    text = text.strip()
    kind, _, arg = text.partition(':')
    kind = kind.lower()
    try:
        if kind == 'all' and not arg:
            return all_coefficients()
        if kind == 'first':
            return first_k(int(arg))
        if kind == 'last':
            return last_t(int(arg))
        if kind == 'center':
            return centered(int(arg))
        if kind == 'list':
            return SubsetSpec(tuple(int(i) for i in arg.split(',') if i.strip()))
        if kind in LIME_TOKENS:
            if not arg:
                raise SubsetError(f"{kind} needs a contributions file, e.g. {kind}:contributions.csv")
            # Imported here: the LIME module depends on this one
            from database import load_contributions
            from lime_explainer import abs_lime, pos_lime
            contributions = load_contributions(arg)
            return pos_lime(contributions) if kind == 'pos-lime' else abs_lime(contributions)
        if kind.isdigit() and arg.isdigit():
            low, high = int(kind), int(arg)
            return SubsetSpec(tuple(range(low, high + 1)))
    except ValueError as e:
        raise SubsetError(f"cannot parse subset {text!r}: {e}") from e
    raise SubsetError(f"unknown subset {text!r}")
