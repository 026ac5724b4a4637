"""Counterfactual model parameterizations for the two three-variable DAG families.

Family A has X and Z as independent roots of Y.  Family B adds the edge
X -> Z.  Every model carries the observed parameters (what an analyst could
estimate without intervening) and the counterfactual ones describing the
measure P0 obtained by intervening on X = 0.

Array conventions, shared with the JSON file format:

* ``a[x]``          P(X = x)
* ``c[z]``          P(Z = z)                       (family A)
* ``d[x, z]``       P(Z = z | X = x)               (family B, observed)
* ``c[x, z]``       P0(Z = z | X = x)              (family B, counterfactual)
* ``b[x, z, y]``    P(Y = y | X = x, Z = z)
* ``u[x, z, y]``    P0(Y = y | X = x, Z = z)

Row ``x = 0`` of every counterfactual table is pinned to the observed one.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import ClassVar, Tuple, Union

import numpy as np

from .prob_core import (
    DEFAULT_MIN_PROB,
    BadShape,
    CondTable,
    JointTable,
    ProbabilityError,
    ProbVector,
    check_simplex_rows,
)

Dims = Tuple[int, int, int]


class PinningViolation(ProbabilityError):
    """A counterfactual row at X = 0 differs from its observed counterpart."""


class InvalidSummary(ProbabilityError):
    pass


def _as_array(value, shape, path) -> np.ndarray:
    try:
        arr = np.array(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise BadShape(f"not a rectangular numeric array ({exc})", path) from exc
    if arr.shape != tuple(shape):
        raise BadShape(f"expected shape {tuple(shape)}, got {arr.shape}", path)
    arr.setflags(write=False)
    return arr


def _check_pin(observed, counterfactual, path):
    if not np.array_equal(observed, counterfactual):
        bad = int(np.argwhere(np.any(np.atleast_2d(observed != counterfactual), axis=-1))[0][0])
        if observed.ndim == 1:
            raise PinningViolation("counterfactual row at X=0 must equal the observed row", path)
        raise PinningViolation(
            "counterfactual row at X=0 must equal the observed row", f"{path}/{bad}"
        )


def _dims_of(a, b) -> Dims:
    b = np.asarray(b)
    if b.ndim != 3:
        raise BadShape(f"expected a K x N x M array, got shape {b.shape}", "/b")
    K, N, M = b.shape
    if min(K, M, N) < 2:
        raise BadShape(f"every cardinality must be >= 2, got K={K}, M={M}, N={N}", "/b")
    return int(K), int(M), int(N)


@dataclass(frozen=True)
class ModelA:
    """Family A: X and Z independent parents of Y."""

    a: np.ndarray
    c: np.ndarray
    b: np.ndarray
    u: np.ndarray
    min_prob: float = DEFAULT_MIN_PROB

    family: ClassVar[str] = "A"

    def __post_init__(self):
        K, M, N = _dims_of(self.a, self.b)
        fields = {
            "a": _as_array(self.a, (K,), "/a"),
            "c": _as_array(self.c, (N,), "/c"),
            "b": _as_array(self.b, (K, N, M), "/b"),
            "u": _as_array(self.u, (K, N, M), "/u"),
        }
        for name, arr in fields.items():
            check_simplex_rows(arr, self.min_prob, f"/{name}")
            object.__setattr__(self, name, arr)
        _check_pin(self.b[0], self.u[0], "/u/0")

    @property
    def dims(self) -> Dims:
        K, N, M = self.b.shape
        return K, M, N

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class ModelB:
    """Family B: X -> Z -> Y with X also a direct parent of Y."""

    a: np.ndarray
    d: np.ndarray
    c: np.ndarray
    b: np.ndarray
    u: np.ndarray
    min_prob: float = DEFAULT_MIN_PROB

    family: ClassVar[str] = "B"

    def __post_init__(self):
        K, M, N = _dims_of(self.a, self.b)
        fields = {
            "a": _as_array(self.a, (K,), "/a"),
            "d": _as_array(self.d, (K, N), "/d"),
            "c": _as_array(self.c, (K, N), "/c"),
            "b": _as_array(self.b, (K, N, M), "/b"),
            "u": _as_array(self.u, (K, N, M), "/u"),
        }
        for name, arr in fields.items():
            check_simplex_rows(arr, self.min_prob, f"/{name}")
            object.__setattr__(self, name, arr)
        _check_pin(self.d[0], self.c[0], "/c/0")
        _check_pin(self.b[0], self.u[0], "/u/0")

    @property
    def dims(self) -> Dims:
        K, N, M = self.b.shape
        return K, M, N

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)


Model = Union[ModelA, ModelB]


@dataclass(frozen=True)
class ObservedSummary:
    """The observed quantities identification formulas may use.

    ``c`` is P(Z) for family A and P(Z | X = 0) for family B; ``b0[z, y]`` is
    P(Y = y | X = 0, Z = z).
    """

    family: str
    a: np.ndarray
    c: np.ndarray
    b0: np.ndarray

    def __post_init__(self):
        if self.family not in ("A", "B"):
            raise InvalidSummary(f"unknown family {self.family!r}", "/family")
        try:
            a = np.array(self.a, dtype=float)
            c = np.array(self.c, dtype=float)
            b0 = np.array(self.b0, dtype=float)
        except (TypeError, ValueError) as exc:
            raise InvalidSummary(f"non-numeric summary ({exc})") from exc
        if a.ndim != 1 or c.ndim != 1 or b0.ndim != 2 or b0.shape[0] != c.size:
            raise InvalidSummary(f"inconsistent shapes a{a.shape} c{c.shape} b0{b0.shape}")
        if min(a.size, c.size, b0.shape[1]) < 2:
            raise InvalidSummary("every cardinality must be >= 2")
        for name, arr in (("a", a), ("c", c), ("b", b0)):
            try:
                check_simplex_rows(arr, 0.0, f"/{name}")
            except ProbabilityError as exc:
                raise InvalidSummary(str(exc).split(": ", 1)[-1], exc.path) from exc
            if np.any(arr <= 0):
                raise InvalidSummary("entries must be strictly positive", f"/{name}")
            arr.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "b0", b0)

    @property
    def dims(self) -> Dims:
        N, M = self.b0.shape
        return self.a.size, M, N


def summary(model: Model) -> ObservedSummary:
    c = model.c if model.family == "A" else model.d[0]
    return ObservedSummary(model.family, model.a, c, model.b[0])


def observed_joint(model: Model) -> JointTable:
    """P(x, y, z) from the DAG factorization of the observed measure."""
    if model.family == "A":
        cells = np.einsum("x,z,xzy->xyz", model.a, model.c, model.b)
    else:
        cells = np.einsum("x,xz,xzy->xyz", model.a, model.d, model.b)
    return JointTable(cells, model.min_prob * model.min_prob * model.min_prob)


def intervention_joint(model: Model) -> JointTable:
    """P0(x, y, z): X and (family A) Z keep their natural marginals, Y follows u."""
    if model.family == "A":
        cells = np.einsum("x,z,xzy->xyz", model.a, model.c, model.u)
    else:
        cells = np.einsum("x,xz,xzy->xyz", model.a, model.c, model.u)
    return JointTable(cells, model.min_prob * model.min_prob * model.min_prob)


def causal_effect_oracle(model: Model, y: int = 1) -> float:
    """P0(Y = y) by direct summation over the counterfactual parameters."""
    K, M, N = model.dims
    if not 0 <= y < M:
        raise ValueError(f"outcome value {y} out of range for M={M}")
    if model.family == "A":
        return float(np.einsum("z,x,xz->", model.c, model.a, model.u[:, :, y]))
    return float(np.einsum("x,xz,xz->", model.a, model.c, model.u[:, :, y]))


def effect_distribution(model: Model) -> ProbVector:
    return ProbVector([causal_effect_oracle(model, y) for y in range(model.dims[1])], 0.0)


def conditional_tables(model: Model):
    """Every conditional table of the model, as validated CondTables."""
    names = ("b", "u") if model.family == "A" else ("d", "c", "b", "u")
    return {name: CondTable(getattr(model, name), model.min_prob) for name in names}
