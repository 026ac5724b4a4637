"""Independence statements about P0 and the two ways of checking them.

``generic`` mode runs the exact minor-based CI check on the intervention joint
and tests the full statement over every outcome value.  ``literal`` mode
evaluates the parameter equalities that the statement reduces to, using only
the Y = 1 component wherever that is how the published conditions are
written; ratio chains are compared as cross-products.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from typing import FrozenSet, Iterable, List, Optional, Tuple

import numpy as np

from .models import Dims, Model, intervention_joint
from .prob_core import DEFAULT_TOL, CiQuery, X, Y, Z, check_ci

GENERIC = "generic"
LITERAL = "literal"
MODES = (GENERIC, LITERAL)


class UnknownCondition(ValueError):
    def __init__(self, token: str, reason: str = ""):
        self.token = token
        msg = f"unknown condition {token!r}"
        super().__init__(f"{msg}: {reason}" if reason else msg)


class Kind(enum.Enum):
    XY = "X_|_Y"
    XY_GIVEN_Z = "X_|_Y|Z"
    XY_GIVEN_Z_EQ = "X_|_Y|Z="
    YZ = "Y_|_Z"
    YZ_GIVEN_X_EQ = "Y_|_Z|X="
    XZ = "X_|_Z"
    XZ_GIVEN_Y_EQ = "X_|_Z|Y="


_INDEXED = {Kind.XY_GIVEN_Z_EQ: Z, Kind.YZ_GIVEN_X_EQ: X, Kind.XZ_GIVEN_Y_EQ: Y}


@dataclass(frozen=True)
class Condition:
    kind: Kind
    index: Optional[int] = None

    def __post_init__(self):
        if (self.kind in _INDEXED) != (self.index is not None):
            raise ValueError(f"{self.kind.name} {'needs' if self.kind in _INDEXED else 'takes no'} event index")
        if self.index is not None and self.index < 0:
            raise ValueError("event index must be non-negative")

    def __str__(self):
        return self.kind.value + ("" if self.index is None else str(self.index))

    def __lt__(self, other):
        return _sort_key(self) < _sort_key(other)

    @property
    def event_variable(self) -> Optional[int]:
        return _INDEXED.get(self.kind)

    def query(self) -> CiQuery:
        k, i = self.kind, self.index
        if k is Kind.XY:
            return CiQuery(X, Y)
        if k is Kind.XY_GIVEN_Z:
            return CiQuery(X, Y, Z)
        if k is Kind.XY_GIVEN_Z_EQ:
            return CiQuery(X, Y, (Z, i))
        if k is Kind.YZ:
            return CiQuery(Y, Z)
        if k is Kind.YZ_GIVEN_X_EQ:
            return CiQuery(Y, Z, (X, i))
        if k is Kind.XZ:
            return CiQuery(X, Z)
        return CiQuery(X, Z, (Y, i))

    def in_range(self, dims: Dims) -> bool:
        var = self.event_variable
        return var is None or self.index < dims[var]


_ORDER = list(Kind)


def _sort_key(cond: Condition):
    return (_ORDER.index(cond.kind), -1 if cond.index is None else cond.index)


# shorthand constructors
def xy() -> Condition:
    return Condition(Kind.XY)


def xy_z() -> Condition:
    return Condition(Kind.XY_GIVEN_Z)


def xy_zeq(j: int) -> Condition:
    return Condition(Kind.XY_GIVEN_Z_EQ, j)


def yz() -> Condition:
    return Condition(Kind.YZ)


def yz_xeq(i: int) -> Condition:
    return Condition(Kind.YZ_GIVEN_X_EQ, i)


def xz() -> Condition:
    return Condition(Kind.XZ)


def xz_yeq(k: int) -> Condition:
    return Condition(Kind.XZ_GIVEN_Y_EQ, k)


_GRAMMAR = re.compile(r"^([XYZ])_\|_([XYZ])(?:\|([XYZ])(?:=(\d+))?)?$")

GRAMMAR_HELP = (
    "X_|_Y, X_|_Y|Z, X_|_Y|Z=j, Y_|_Z, Y_|_Z|X=i, X_|_Z, X_|_Z|Y=k "
    "(the pair may be written in either order)"
)


def parse_condition(text: str) -> Condition:
    """Parse one token of the shell-safe condition grammar."""
    token = "".join(text.split())
    m = _GRAMMAR.match(token)
    if not m:
        raise UnknownCondition(text, f"expected one of {GRAMMAR_HELP}")
    left, right, given, value = m.groups()
    pair = "".join(sorted(left + right))
    if left == right or pair not in ("XY", "YZ", "XZ"):
        raise UnknownCondition(text, "the two sides must be distinct variables")
    third = ({"X", "Y", "Z"} - set(pair)).pop()
    if given is not None and given != third:
        raise UnknownCondition(text, f"{pair[0]}_|_{pair[1]} can only be conditioned on {third}")
    if given is None:
        return Condition(Kind(f"{pair[0]}_|_{pair[1]}"))
    if value is None:
        if pair != "XY":
            raise UnknownCondition(text, "only X_|_Y supports conditioning on a whole variable")
        return xy_z()
    return Condition(Kind(f"{pair[0]}_|_{pair[1]}|{third}="), int(value))


def parse_conditions(tokens: Iterable[str]) -> FrozenSet[Condition]:
    return frozenset(parse_condition(t) for t in tokens)


def catalog(dims: Dims) -> List[Condition]:
    """Every catalog statement instantiated for the given cardinalities."""
    K, M, N = dims
    return (
        [xy(), xy_z()]
        + [xy_zeq(j) for j in range(N)]
        + [yz()]
        + [yz_xeq(i) for i in range(K)]
        + [xz()]
        + [xz_yeq(k) for k in range(M)]
    )


def check_in_range(conditions: Iterable[Condition], dims: Dims) -> None:
    for cond in conditions:
        if not cond.in_range(dims):
            raise UnknownCondition(str(cond), f"event index out of range for dims {dims}")


def condition_holds(model: Model, cond: Condition, tol: float = DEFAULT_TOL, mode: str = GENERIC, joint=None) -> Tuple[bool, float]:
    """Return ``(holds, violation)`` for one statement about the model's P0.

    ``joint`` may carry a precomputed intervention joint for generic mode.
    """
    check_in_range([cond], model.dims)
    if mode == GENERIC:
        return check_ci(joint if joint is not None else intervention_joint(model), cond.query(), tol)
    if mode == LITERAL:
        worst = _literal_violation(model, cond)
        return worst <= tol, worst
    raise ValueError(f"mode must be one of {MODES}, got {mode!r}")


def _spread(values: np.ndarray, axis: int) -> float:
    """Largest deviation from the first entry along ``axis``."""
    first = np.take(values, [0], axis=axis)
    return float(np.max(np.abs(values - first)))


def _cross_products(m: np.ndarray) -> float:
    """Ratio chain m[x, 0]/m[x+1, 0] = m[x, j]/m[x+1, j] as cross-products."""
    top, bottom = m[:-1], m[1:]
    return float(np.max(np.abs(top[:, :1] * bottom - top * bottom[:, :1])))


def _literal_violation(model: Model, cond: Condition) -> float:
    k, i = cond.kind, cond.index
    u1 = model.u[:, :, 1]
    # P0(Z | X) weights; family A shares one row across X
    cz = np.broadcast_to(model.c, u1.shape)
    if k is Kind.XY:
        return _spread((cz * u1).sum(axis=1), axis=0)
    if k is Kind.XY_GIVEN_Z:
        return float(np.max(np.abs(u1 - u1[:1])))
    if k is Kind.XY_GIVEN_Z_EQ:
        return _spread(u1[:, i], axis=0)
    if k is Kind.YZ:
        # P0(Y=1 | Z=z) = num_z / den_z, compared across z as cross-products
        weights = model.a[:, None] * cz
        num = (weights * u1).sum(axis=0)
        den = weights.sum(axis=0)
        return float(np.max(np.abs(num * den[0] - num[0] * den)))
    if k is Kind.YZ_GIVEN_X_EQ:
        return _spread(u1[i], axis=0)
    if k is Kind.XZ:
        if model.family == "A":
            return 0.0
        return float(np.max(np.abs(model.c - model.c[:1])))
    slab = model.u[:, :, i]
    return _cross_products(slab if model.family == "A" else cz * slab)
