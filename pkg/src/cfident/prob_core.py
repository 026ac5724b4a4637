"""Discrete probability tables over the three fixed variables X, Y, Z.

Tables are numpy arrays wrapped in small frozen dataclasses that validate
positivity and normalization on construction and are read-only afterwards.
Axis order of a full joint table is always (X, Y, Z).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional, Sequence, Tuple, Union

import numpy as np

X, Y, Z = 0, 1, 2
VARIABLES = (X, Y, Z)
VAR_NAMES = {X: "X", Y: "Y", Z: "Z"}

DEFAULT_MIN_PROB = 1e-9
DEFAULT_TOL = 1e-9
# Inputs whose total deviates from 1 by more than this are rejected, never repaired.
SUM_TOL = 1e-9


class ProbabilityError(ValueError):
    """Base class for table validation failures.

    ``path`` is a JSON pointer to the offending entry when the table came from
    a document, or an empty string otherwise.
    """

    def __init__(self, message: str, path: str = ""):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class NonPositiveCell(ProbabilityError):
    pass


class NotNormalized(ProbabilityError):
    pass


class BadShape(ProbabilityError):
    pass


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=float)
    arr.setflags(write=False)
    return arr


def _index_path(path: str, index: Sequence[int]) -> str:
    return path + "".join(f"/{i}" for i in index)


def check_simplex_rows(arr: np.ndarray, min_prob: float = DEFAULT_MIN_PROB, path: str = "") -> None:
    """Raise if any vector along the last axis is off the simplex.

    The error names the first offending row (or entry) by JSON pointer.
    """
    if arr.ndim == 0 or arr.shape[-1] < 1:
        raise BadShape("expected at least one probability axis", path)
    if not np.all(np.isfinite(arr)):
        bad = tuple(int(i) for i in np.argwhere(~np.isfinite(arr))[0])
        raise NonPositiveCell("entry is not a finite number", _index_path(path, bad))
    low = arr < min_prob
    if low.any():
        bad = tuple(int(i) for i in np.argwhere(low)[0])
        raise NonPositiveCell(f"entry {float(arr[bad])!r} below min_prob {min_prob:g}", _index_path(path, bad))
    gaps = np.abs(arr.sum(axis=-1) - 1.0)
    if np.any(gaps > SUM_TOL):
        bad = tuple(int(i) for i in np.argwhere(gaps > SUM_TOL)[0])
        raise NotNormalized(f"entries sum to {float(arr[bad].sum())!r}, not 1", _index_path(path, bad))


@dataclass(frozen=True)
class ProbVector:
    """A strictly positive point on a probability simplex."""

    entries: np.ndarray
    min_prob: float = DEFAULT_MIN_PROB

    def __post_init__(self):
        arr = _readonly(self.entries)
        if arr.ndim != 1 or arr.size < 1:
            raise BadShape(f"expected a 1-d vector, got shape {arr.shape}")
        check_simplex_rows(arr, self.min_prob)
        object.__setattr__(self, "entries", arr)

    def __len__(self):
        return self.entries.size

    def __getitem__(self, i):
        return float(self.entries[i])

    def tolist(self):
        return self.entries.tolist()


@dataclass(frozen=True)
class CondTable:
    """Conditional distribution of one variable given others.

    ``rows`` has shape ``(*conditioning_cards, target_card)``; every slice along
    the last axis is a ProbVector, so the row index set is automatically the
    full Cartesian product of the conditioning cardinalities.
    """

    rows: np.ndarray
    min_prob: float = DEFAULT_MIN_PROB

    def __post_init__(self):
        arr = _readonly(self.rows)
        if arr.ndim < 2:
            raise BadShape(f"expected at least 2 axes, got shape {arr.shape}")
        check_simplex_rows(arr, self.min_prob)
        object.__setattr__(self, "rows", arr)

    def row(self, *index: int) -> ProbVector:
        return ProbVector(self.rows[index], self.min_prob)


@dataclass(frozen=True)
class ProbTable:
    """Joint distribution over a subset of the variables (axes in id order)."""

    variables: Tuple[int, ...]
    cells: np.ndarray

    def __post_init__(self):
        arr = _readonly(self.cells)
        vs = tuple(sorted(self.variables))
        if len(vs) != arr.ndim or len(set(vs)) != len(vs):
            raise BadShape(f"{len(vs)} variables for an array of shape {arr.shape}")
        gap = abs(arr.sum() - 1.0)
        if gap > SUM_TOL:
            raise NotNormalized(f"table sums to {float(arr.sum())!r}")
        object.__setattr__(self, "variables", vs)
        object.__setattr__(self, "cells", arr)


@dataclass(frozen=True)
class JointTable:
    """Full joint distribution over X x Y x Z, strictly positive."""

    cells: np.ndarray
    min_prob: float = DEFAULT_MIN_PROB

    def __post_init__(self):
        arr = _readonly(self.cells)
        if arr.ndim != 3 or min(arr.shape) < 2:
            raise BadShape(f"expected a K x M x N array with all dims >= 2, got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise NonPositiveCell("joint table has non-finite cells")
        low = arr < self.min_prob
        if low.any():
            bad = tuple(int(i) for i in np.argwhere(low)[0])
            raise NonPositiveCell(f"cell {bad} = {float(arr[bad])!r} below min_prob {self.min_prob:g}")
        total = arr.sum()
        if abs(total - 1.0) > SUM_TOL:
            raise NotNormalized(f"cells sum to {float(total)!r}")
        object.__setattr__(self, "cells", arr)

    @property
    def dims(self) -> Tuple[int, int, int]:
        return tuple(int(d) for d in self.cells.shape)


Given = Union[None, int, Tuple[int, int]]


@dataclass(frozen=True)
class CiQuery:
    """``left`` independent of ``right``, optionally given a variable or an event.

    ``given`` is None (marginal), a variable id (every slice), or a
    ``(variable, value)`` pair (a single slice).
    """

    left: int
    right: int
    given: Given = None

    def __post_init__(self):
        if self.left not in VARIABLES or self.right not in VARIABLES:
            raise ValueError("unknown variable id")
        if self.left == self.right:
            raise ValueError("left and right must differ")
        gv = self.given_variable
        if gv is not None and gv in (self.left, self.right):
            raise ValueError("conditioning variable must differ from left and right")
        if gv is not None and gv not in VARIABLES:
            raise ValueError("unknown conditioning variable")
        if isinstance(self.given, tuple) and self.given[1] < 0:
            raise ValueError("event value must be non-negative")

    @property
    def given_variable(self) -> Optional[int]:
        if self.given is None:
            return None
        if isinstance(self.given, tuple):
            return self.given[0]
        return self.given

    def __str__(self):
        left, right = VAR_NAMES[self.left], VAR_NAMES[self.right]
        if self.given is None:
            return f"{left}_|_{right}"
        if isinstance(self.given, tuple):
            return f"{left}_|_{right}|{VAR_NAMES[self.given[0]]}={self.given[1]}"
        return f"{left}_|_{right}|{VAR_NAMES[self.given]}"


def validate_joint(cells, min_prob: float = DEFAULT_MIN_PROB) -> JointTable:
    """Validate a raw K x M x N array as a strictly positive joint table."""
    try:
        arr = np.asarray(cells, dtype=float)
    except (TypeError, ValueError) as exc:
        raise BadShape(f"not a rectangular numeric array: {exc}") from exc
    return JointTable(arr, min_prob)


def normalize(cells) -> np.ndarray:
    """Opt-in repair: rescale a nonnegative array to unit total."""
    arr = np.asarray(cells, dtype=float)
    total = arr.sum()
    if not total > 0:
        raise NotNormalized("cannot normalize an array with non-positive total")
    return arr / total


def marginal(joint: JointTable, keep) -> ProbTable:
    """Sum out every variable not in ``keep``."""
    keep = tuple(sorted(set(keep)))
    if not keep or any(v not in VARIABLES for v in keep):
        raise ValueError(f"keep must be a nonempty subset of {VARIABLES}")
    drop = tuple(v for v in VARIABLES if v not in keep)
    return ProbTable(keep, joint.cells.sum(axis=drop))


def conditional(joint: JointTable, target: int, given: Mapping[int, int]) -> ProbVector:
    """P(target | given) as a ProbVector.

    ``given`` maps variable ids to observed values; variables in neither
    ``target`` nor ``given`` are summed out.
    """
    if target in given:
        raise ValueError("target cannot also be conditioned on")
    index = []
    for v in VARIABLES:
        if v == target:
            index.append(slice(None))
        elif v in given:
            index.append(int(given[v]))
        else:
            index.append(slice(None))
    sub = joint.cells[tuple(index)]
    # remaining axes: target plus any summed-out variables, in id order
    free = [v for v in VARIABLES if v == target or v not in given]
    sum_axes = tuple(i for i, v in enumerate(free) if v != target)
    vec = sub.sum(axis=sum_axes) if sum_axes else sub
    return ProbVector(vec / vec.sum(), joint.min_prob)


def pair_slices(joint: JointTable, query: CiQuery):
    """Yield the 2-d tables (axes: left, right) that ``query`` constrains."""
    pair = (query.left, query.right)
    cells = joint.cells
    gv = query.given_variable
    if gv is None:
        drop = tuple(v for v in VARIABLES if v not in pair)
        yield _orient(cells.sum(axis=drop), pair)
        return
    values = range(cells.shape[gv]) if not isinstance(query.given, tuple) else (query.given[1],)
    for value in values:
        if value >= cells.shape[gv]:
            raise ValueError(f"event {VAR_NAMES[gv]}={value} out of range")
        sl = np.take(cells, value, axis=gv)
        yield _orient(sl / sl.sum(), pair)


def _orient(table2d: np.ndarray, pair) -> np.ndarray:
    # table2d axes are the pair variables in id order
    return table2d if pair[0] < pair[1] else table2d.T


def max_minor(table2d: np.ndarray) -> float:
    """Largest |p(a,b)p(a',b') - p(a,b')p(a',b)| over all 2x2 minors."""
    p = table2d
    prod = p[:, None, :, None] * p[None, :, None, :]
    cross = p[:, None, None, :] * p[None, :, :, None]
    return float(np.max(np.abs(prod - cross)))


def check_ci(joint: JointTable, query: CiQuery, tol: float = DEFAULT_TOL) -> Tuple[bool, float]:
    """Exact conditional-independence check via vanishing 2x2 minors.

    Returns ``(holds, worst)`` where ``worst`` is the largest minor magnitude
    over every constrained slice.
    """
    worst = max(max_minor(t) for t in pair_slices(joint, query))
    return worst <= tol, worst

