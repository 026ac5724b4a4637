"""Seeded random models that satisfy a requested set of conditions exactly,
and witness pairs showing the causal effect is not identified without them.

The counterfactual table ``u`` is drawn in three steps:

1. Cells forced equal by the conditions (``X_|_Y|Z=j`` ties cell (x, j) to
   (0, j); ``Y_|_Z|X=i`` ties a whole row) are grouped into components.
2. Each ``X_|_Z|Y=k`` fixes the k-th slab to a scaled rank-1 matrix whose
   log-factors are solved so that tied cells agree.
3. Everything else is linear in ``u``.  A strictly feasible centre is found
   (in closed form when possible, by LP otherwise), a random point is
   projected onto the affine constraint space, and the sample is the
   furthest point towards it that keeps every entry above a floor.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Tuple, Union

import numpy as np
from scipy.optimize import linprog
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .conditions import GENERIC, Condition, Kind, check_in_range, condition_holds
from .models import (
    Dims,
    Model,
    ModelA,
    ModelB,
    ObservedSummary,
    causal_effect_oracle,
    intervention_joint,
    observed_joint,
)
from .prob_core import DEFAULT_MIN_PROB

# every sampled simplex entry is at least UNIFORM_MIX / size
UNIFORM_MIX = 0.3
SAMPLE_FLOOR = 1e-3
RANK_ONE_CAP = 0.8
CONSTRAINT_TOL = 1e-9
WITNESS_MIN_GAP = 0.05
WITNESS_LOW, WITNESS_HIGH = 0.1, 0.9


class UnsatisfiableConstraintSet(ValueError):
    pass


class DegenerateBase(ValueError):
    pass


def simplex(rng: np.random.Generator, size: int, shape: Tuple[int, ...] = ()) -> np.ndarray:
    """Well-spread random points on the simplex (Dirichlet mixed with uniform)."""
    draws = rng.dirichlet(np.ones(size), size=shape or None)
    return (1.0 - UNIFORM_MIX) * draws + UNIFORM_MIX / size


@lru_cache(maxsize=256)
def _tie_structure(dims: Dims, constraints: frozenset):
    labels = _components(dims, constraints)
    return labels, tuple(_tie_pairs(labels))


def _components(dims: Dims, constraints) -> np.ndarray:
    """Label each (x, z) cell of u with the id of its forced-equality class."""
    K, _, N = dims
    rows, cols = [], []

    def tie(c1, c2):
        rows.append(c1[0] * N + c1[1])
        cols.append(c2[0] * N + c2[1])

    pinned = {c.index for c in constraints if c.kind is Kind.XY_GIVEN_Z_EQ}
    if any(c.kind is Kind.XY_GIVEN_Z for c in constraints):
        pinned = set(range(N))
    for j in pinned:
        for x in range(1, K):
            tie((x, j), (0, j))
    for c in constraints:
        if c.kind is Kind.YZ_GIVEN_X_EQ:
            for j in range(1, N):
                tie((c.index, j), (c.index, 0))
    graph = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(K * N, K * N))
    _, labels = connected_components(graph, directed=False)
    return labels.reshape(K, N)


def _tie_pairs(labels: np.ndarray):
    """(cell, representative) pairs that together encode every tie."""
    K, N = labels.shape
    first = {}
    pairs = []
    for x in range(K):
        for z in range(N):
            lab = labels[x, z]
            if lab in first:
                pairs.append(((x, z), first[lab]))
            else:
                first[lab] = (x, z)
    return pairs


def _rank_one_slab(rng, weights: np.ndarray, pairs, share: float) -> np.ndarray:
    """Slab s with weights * s rank-1 and s equal across every tied pair."""
    K, N = weights.shape
    theta = rng.normal(0.0, 0.6, K + N)
    if pairs:
        eqs = np.zeros((len(pairs), K + N))
        rhs = np.zeros(len(pairs))
        logw = np.log(weights)
        for r, ((x, z), (x2, z2)) in enumerate(pairs):
            eqs[r, x] += 1.0
            eqs[r, K + z] += 1.0
            eqs[r, x2] -= 1.0
            eqs[r, K + z2] -= 1.0
            rhs[r] = logw[x, z] - logw[x2, z2]
        theta = theta - np.linalg.pinv(eqs) @ (eqs @ theta - rhs)
        if np.max(np.abs(eqs @ theta - rhs)) > 1e-10:
            raise UnsatisfiableConstraintSet("rank-1 slab cannot respect the forced cell equalities")
    slab = np.exp(theta[:K, None] + theta[None, K:]) / weights
    return slab * (share * rng.uniform(0.4, 1.0) / slab.max())


def _linear_system(dims, family, a, c, constraints, pairs, fixed):
    K, M, N = dims
    n = K * N * M

    def idx(x, z, y):
        return (x * N + z) * M + y

    rows = []
    rhs = []

    def add(entries, value=0.0):
        row = np.zeros(n)
        for i, coef in entries:
            row[i] += coef
        rows.append(row)
        rhs.append(value)

    for x in range(K):
        for z in range(N):
            add([(idx(x, z, y), 1.0) for y in range(M)], 1.0)
    for (x, z), (x2, z2) in pairs:
        for y in range(M):
            add([(idx(x, z, y), 1.0), (idx(x2, z2, y), -1.0)])
    for k, slab in fixed.items():
        for x in range(K):
            for z in range(N):
                add([(idx(x, z, k), 1.0)], slab[x, z])
    kinds = {cond.kind for cond in constraints}
    cz = np.broadcast_to(c, (K, N))
    if Kind.XY in kinds:
        for x in range(1, K):
            for y in range(M):
                add([(idx(x, z, y), cz[x, z]) for z in range(N)] + [(idx(0, z, y), -cz[0, z]) for z in range(N)])
    if Kind.YZ in kinds:
        beta = a[:, None] * cz
        beta = beta / beta.sum(axis=0)
        for z in range(1, N):
            for y in range(M):
                add([(idx(x, z, y), beta[x, z]) for x in range(K)] + [(idx(x, 0, y), -beta[x, 0]) for x in range(K)])
    return np.array(rows), np.array(rhs)


def _lp_centre(A, rhs):
    n = A.shape[1]
    cost = np.zeros(n + 1)
    cost[-1] = -1.0
    a_ub = np.hstack([-np.eye(n), np.ones((n, 1))])
    a_eq = np.hstack([A, np.zeros((A.shape[0], 1))])
    res = linprog(cost, A_ub=a_ub, b_ub=np.zeros(n), A_eq=a_eq, b_eq=rhs,
                  bounds=[(0.0, 1.0)] * (n + 1), method="highs")
    if res.status != 0 or res.x[-1] < 1e-6:
        raise UnsatisfiableConstraintSet("no strictly positive counterfactual table meets the constraints")
    return res.x[:n]


def _sample_u(rng, dims, family, a, c, constraints) -> np.ndarray:
    K, M, N = dims
    _, pairs = _tie_structure(tuple(dims), frozenset(constraints))
    ranked = sorted({cond.index for cond in constraints if cond.kind is Kind.XZ_GIVEN_Y_EQ})
    if len(ranked) >= M:
        raise UnsatisfiableConstraintSet(f"X_|_Z|Y=k requested for all {M} outcome values")
    weights = np.ones((K, N)) if family == "A" else np.broadcast_to(c, (K, N))
    fixed = {k: _rank_one_slab(rng, weights, pairs, RANK_ONE_CAP / len(ranked)) for k in ranked}
    A, rhs = _linear_system(dims, family, a, c, constraints, pairs, fixed)

    free = [y for y in range(M) if y not in fixed]
    mass = simplex(rng, len(free))
    centre = np.empty((K, N, M))
    leftover = 1.0 - sum(fixed.values()) if fixed else np.ones((K, N))
    for k, slab in fixed.items():
        centre[:, :, k] = slab
    for pos, y in enumerate(free):
        centre[:, :, y] = leftover * mass[pos]
    centre = centre.ravel()
    if np.max(np.abs(A @ centre - rhs)) > 1e-12:
        centre = _lp_centre(A, rhs)

    target = simplex(rng, M, (K, N)).ravel()
    proj = target - np.linalg.pinv(A) @ (A @ target - rhs)
    floor = min(SAMPLE_FLOOR, 0.5 * centre.min())
    step = proj - centre
    shrinking = step < 0
    lam = 1.0
    if shrinking.any():
        lam = min(1.0, float(np.min((centre[shrinking] - floor) / -step[shrinking])))
    v = centre + lam * step
    if np.max(np.abs(A @ v - rhs)) > 1e-10:
        raise UnsatisfiableConstraintSet("linear constraints are inconsistent")
    return v.reshape(K, N, M)


def sample_model(family: str, dims: Dims, constraints: Iterable[Condition] = (), seed=0,
                 min_prob: float = DEFAULT_MIN_PROB) -> Model:
    """Draw a valid model whose P0 satisfies every condition in ``constraints``.

    Deterministic in ``seed`` (an int or a sequence of ints).  Raises
    UnsatisfiableConstraintSet rather than dropping a constraint.
    """
    K, M, N = dims
    if family not in ("A", "B"):
        raise ValueError(f"family must be 'A' or 'B', got {family!r}")
    if min(dims) < 2:
        raise ValueError(f"every cardinality must be >= 2, got {dims}")
    constraints = frozenset(constraints)
    check_in_range(constraints, dims)
    rng = np.random.default_rng(seed)

    a = simplex(rng, K)
    if family == "A":
        c = simplex(rng, N)
        d = None
    else:
        d = simplex(rng, N, (K,))
        c = np.tile(d[0], (K, 1)) if xz_in(constraints) else np.vstack([d[:1], simplex(rng, N, (K - 1,))])
    b = simplex(rng, M, (K, N))
    u = _sample_u(rng, dims, family, a, c, constraints)
    b[0] = u[0]
    model = ModelA(a, c, b, u, min_prob) if family == "A" else ModelB(a, d, c, b, u, min_prob)

    joint = intervention_joint(model)
    for cond in sorted(constraints):
        ok, worst = condition_holds(model, cond, CONSTRAINT_TOL, GENERIC, joint=joint)
        if not ok:
            raise UnsatisfiableConstraintSet(f"constructed model violates {cond} (score {worst:.3g})")
    return model


def xz_in(constraints) -> bool:
    return any(c.kind is Kind.XZ for c in constraints)


@dataclass(frozen=True)
class WitnessPair:
    model_1: Model
    model_2: Model
    observed_gap: float
    effect_gap: float

    @property
    def effects(self) -> Tuple[float, float]:
        return causal_effect_oracle(self.model_1, 1), causal_effect_oracle(self.model_2, 1)


def model_from_summary(s: ObservedSummary, seed=0, min_prob: float = DEFAULT_MIN_PROB) -> Model:
    """A model reproducing ``s``; unobserved rows are seeded draws and u = b."""
    rng = np.random.default_rng(seed)
    K, M, N = s.dims
    b = np.vstack([s.b0[None], simplex(rng, M, (K - 1, N))])
    if s.family == "A":
        return ModelA(s.a, s.c, b, b, min_prob)
    d = np.vstack([s.c[None], simplex(rng, N, (K - 1,))])
    return ModelB(s.a, d, d, b, b, min_prob)


def witness_pair(base: Union[Model, ObservedSummary], seed=0, min_gap: float = WITNESS_MIN_GAP) -> WitnessPair:
    """Two models with identical observed joints but different P0(Y = 1).

    The first model is ``base`` itself (or its completion when a summary is
    given).  The second moves P0(Y = 1 | X = i, Z = j) for every i >= 1 to
    whichever of the two extremes lies further from the base average; the
    other outcome values share the remaining mass in seeded proportions.
    """
    rng = np.random.default_rng(seed)
    model_1 = model_from_summary(base, rng.integers(2**32)) if isinstance(base, ObservedSummary) else base
    K, M, N = model_1.dims
    weights = model_1.a[1:, None] * np.broadcast_to(model_1.c, (K, N))[1:]
    mean = float((weights * model_1.u[1:, :, 1]).sum() / weights.sum())
    target = WITNESS_HIGH if mean <= 0.5 else WITNESS_LOW

    u = np.array(model_1.u)
    others = [y for y in range(M) if y != 1]
    shares = simplex(rng, len(others), (K - 1, N))
    u[1:, :, 1] = target
    u[1:, :, others] = (1.0 - target) * shares
    model_2 = model_1.replace(u=u)

    observed_gap = float(np.max(np.abs(observed_joint(model_1).cells - observed_joint(model_2).cells)))
    effect_gap = abs(causal_effect_oracle(model_1, 1) - causal_effect_oracle(model_2, 1))
    if effect_gap < min_gap:
        raise DegenerateBase(
            f"effect gap {effect_gap:.4g} < {min_gap}: P(X=0) = {model_1.a[0]:.4g} leaves too little "
            "counterfactual mass to move"
        )
    return WitnessPair(model_1, model_2, observed_gap, effect_gap)


def perturb_unobserved(model: Model, seed=0) -> Model:
    """Redraw the counterfactual parameters the observed joint never sees:
    u rows i >= 1 and, for family B, c rows i >= 1."""
    rng = np.random.default_rng(seed)
    K, M, N = model.dims
    u = np.array(model.u)
    u[1:] = simplex(rng, M, (K - 1, N))
    if model.family == "A":
        return model.replace(u=u)
    c = np.array(model.c)
    c[1:] = simplex(rng, N, (K - 1,))
    return model.replace(u=u, c=c)


def perturb_outside_summary(model: Model, seed=0) -> Model:
    """Redraw every parameter the observed summary omits: on top of
    ``perturb_unobserved``, the observed rows b (and for family B d) at
    X >= 1.  The observed joint changes; the summary does not."""
    rng = np.random.default_rng(seed)
    model = perturb_unobserved(model, rng.integers(2**32))
    K, M, N = model.dims
    b = np.array(model.b)
    b[1:] = simplex(rng, M, (K - 1, N))
    if model.family == "A":
        return model.replace(b=b)
    d = np.array(model.d)
    d[1:] = simplex(rng, N, (K - 1,))
    return model.replace(b=b, d=d)
