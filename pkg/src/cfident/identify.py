"""Sufficient conditions for identifying P0(Y = 1), and their verification.

Each family has a fixed table of branches.  A branch pairs a set of
assumptions about P0 with a closed-form expression over the observed summary.
``identify`` returns the first branch (in table order) whose assumptions are
all granted; ``verify_branch`` checks a branch against the brute-force oracle
on models sampled to satisfy exactly those assumptions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, FrozenSet, Iterable, List, Optional, Tuple


from .conditions import (
    Condition,
    check_in_range,
    xy,
    xy_z,
    xy_zeq,
    yz,
    yz_xeq,
    xz_yeq,
)
from .models import Dims, Model, ObservedSummary, causal_effect_oracle, summary
from .sampling import sample_model

OUTCOME = 1

# the six counterfactual models worked out in closed form, plus the binary case
CITATIONS = {
    ("A", (3, 3, 3)): "Theorem 5",
    ("A", (3, 2, 3)): "Theorem 6",
    ("A", (2, 2, 3)): "Theorem 7",
    ("B", (3, 3, 3)): "Theorem 8",
    ("B", (3, 2, 3)): "Theorem 9",
    ("B", (2, 2, 3)): "Theorem 10",
    ("A", (2, 2, 2)): "Theorem 2",
    ("B", (2, 2, 2)): "Theorem 3",
}
WORKED_DIMS = [(3, 3, 3), (3, 2, 3), (2, 2, 3)]

# template -> case label inside the general-dims theorems
_LABELS = {
    "Theorem 5": {"A1": "(a)", "A2": "(b)", "A3": "(c)", "A4": ", value-table row 4", "A5": "(d)", "A6": ", value-table row 6"},
    "Theorem 7": {"A1": "(a)", "A2": "(b)", "A3": "(c)", "A4": ", value-table row 4", "A5": ", value-table row 5", "A6": "(d)"},
    "Theorem 8": {"B1": "(a)", "B2": "(b)", "B3": "(c)"},
}
_LABELS["Theorem 6"] = _LABELS["Theorem 5"]
_LABELS["Theorem 9"] = _LABELS["Theorem 10"] = _LABELS["Theorem 8"]
_BINARY = {
    "Theorem 2": {("A1", None): "(a)", ("A2", None): "(b)", ("A6", 0): "(c)", ("A6", 1): "(d)"},
    "Theorem 3": {("B1", None): "(a)", ("B3", 0): "(b)", ("B3", 1): "(c)"},
}

QUARANTINE_NOTE = (
    "printed value fails oracle verification: the assumptions force "
    "P0(Y=1|X=x,Z=z) = P(Y=1|X=0,Z=z) for every x, so P0(Y=1) is the "
    "Z-weighted average of that row rather than its i-th entry"
)


def pooled(s: ObservedSummary) -> float:
    """sum_j P(Z=j [| X=0]) * P(Y=1 | X=0, Z=j)"""
    return float(s.c @ s.b0[:, OUTCOME])


def _cell(s: ObservedSummary, i: int) -> float:
    return float(s.b0[i, OUTCOME])


def _mixture(s: ObservedSummary, i: int) -> float:
    a0 = float(s.a[0])
    return a0 * pooled(s) + (1.0 - a0) * _cell(s, i)


FORMULAS: Dict[str, Tuple[str, Callable[[ObservedSummary, Optional[int]], float]]] = {
    "pooled": ("sum_j c_j b_0j^1", lambda s, i: pooled(s)),
    "cell": ("b_0i^1", lambda s, i: _cell(s, i)),
    "cell0": ("b_00^1", lambda s, i: _cell(s, 0)),
    "mixture": ("a_0 sum_j c_j b_0j^1 + (1 - a_0) b_0i^1", lambda s, i: _mixture(s, i)),
}


@dataclass(frozen=True)
class Branch:
    branch_id: str
    template: str
    family: str
    dims: Dims
    index: Optional[int]
    required: FrozenSet[Condition]
    formula: str
    citation: str
    quarantined: bool = False

    def evaluate(self, s: ObservedSummary) -> float:
        return FORMULAS[self.formula][1](s, self.index)

    @property
    def formula_text(self) -> str:
        text = FORMULAS[self.formula][0]
        return text if self.index is None else text.replace("0i", f"0{self.index}")

    def describe(self) -> str:
        conds = " & ".join(str(c) for c in sorted(self.required))
        return f"{self.branch_id} [{self.citation}] {conds} => {self.formula_text}"


def _citation(family: str, dims: Dims, template: str, index: Optional[int]) -> str:
    theorem = CITATIONS.get((family, dims))
    suffix = "" if index is None else f", {'x' if template == 'B2' else 'i'}={index}"
    if theorem in _BINARY:
        label = _BINARY[theorem].get((template, index))
        if label is not None:
            return f"{theorem}{label}"
        theorem = None
    if theorem is None:
        general = "Theorem 5" if family == "A" else "Theorem 8"
        return f"{general}{_LABELS[general][template]}{suffix} pattern at dims {dims}"
    return f"{theorem}{_LABELS[theorem][template]}{suffix}"


def branch_table(family: str, dims: Dims) -> List[Branch]:
    """Instantiated branches for one family and cardinality triple, in match order."""
    K, M, N = dims
    if min(dims) < 2:
        raise ValueError(f"every cardinality must be >= 2, got {dims}")
    dims = (K, M, N)
    rows: List[Tuple[str, Optional[int], FrozenSet[Condition], str, bool]] = []
    later = [yz_xeq(x) for x in range(1, K)]
    if family == "A":
        rows.append(("A1", None, frozenset({xy()}), "pooled", False))
        rows.append(("A2", None, frozenset({xy_z()}), "pooled", False))
        rows += [("A3", i, frozenset({yz(), xy_zeq(i)}), "cell", False) for i in range(N)]
        rows.append(("A4", None, frozenset({yz_xeq(1), xy_z()}), "cell0", False))
        rows += [("A5", i, frozenset({xz_yeq(OUTCOME), xy_zeq(i)}), "cell", True) for i in range(N)]
        rows += [("A6", i, frozenset(later + [xy_zeq(i)]), "mixture", False) for i in range(N)]
    elif family == "B":
        rows.append(("B1", None, frozenset({xy()}), "pooled", False))
        rows += [("B2", x, frozenset({xy_z(), yz_xeq(x)}), "cell0", False) for x in range(K)]
        rows += [("B3", i, frozenset(later + [xy_zeq(i)]), "mixture", False) for i in range(N)]
    else:
        raise ValueError(f"family must be 'A' or 'B', got {family!r}")
    table = []
    for template, index, required, formula, quarantined in rows:
        var = "x" if template == "B2" else "i"
        bid = template if index is None else f"{template}[{var}={index}]"
        table.append(Branch(bid, template, family, dims, index, required, formula,
                            _citation(family, dims, template, index), quarantined))
    return table


def closure(assumptions: Iterable[Condition], dims: Dims) -> FrozenSet[Condition]:
    """Add what follows syntactically: X_|_Y|Z is the conjunction of its events."""
    out = set(assumptions)
    N = dims[2]
    events = {xy_zeq(j) for j in range(N)}
    if events <= out:
        out.add(xy_z())
    if xy_z() in out:
        out |= events
    return frozenset(out)


def matching_branches(family: str, dims: Dims, assumptions: Iterable[Condition]) -> List[Branch]:
    granted = closure(assumptions, dims)
    return [b for b in branch_table(family, dims) if b.required <= granted]


@dataclass(frozen=True)
class IdentificationResult:
    branch_id: Optional[str]
    value: Optional[float]
    provenance: str
    quarantined: bool = False
    formula: Optional[str] = None

    @property
    def identified(self) -> bool:
        return self.value is not None


NO_MATCH = "no matching sufficient condition"


def identify(s: ObservedSummary, assumptions: Iterable[Condition]) -> IdentificationResult:
    """Closed-form P0(Y = 1) from the first branch whose assumptions are granted.

    An unmatched result means the assumptions are not covered by the table,
    not that the effect is unidentifiable.
    """
    assumptions = frozenset(assumptions)
    check_in_range(assumptions, s.dims)
    matches = matching_branches(s.family, s.dims, assumptions)
    if not matches:
        return IdentificationResult(None, None, NO_MATCH)
    br = matches[0]
    provenance = br.citation
    if br.quarantined:
        provenance += " [QUARANTINED: " + QUARANTINE_NOTE + "]"
    return IdentificationResult(br.branch_id, br.evaluate(s), provenance, br.quarantined, br.formula_text)


@dataclass
class BranchReport:
    branch_id: str
    citation: str
    family: str
    dims: Dims
    samples: int
    passes: int
    worst_gap: float
    quarantined: bool
    counterexample: Optional[Model] = None
    formula_value: Optional[float] = None
    oracle_value: Optional[float] = None
    conflicts: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.passes == self.samples

    def as_dict(self) -> dict:
        return {
            "branch": self.branch_id,
            "citation": self.citation,
            "family": self.family,
            "dims": list(self.dims),
            "samples": self.samples,
            "passes": self.passes,
            "pass_rate": self.passes / self.samples,
            "worst_gap": self.worst_gap,
            "quarantined": self.quarantined,
            "has_counterexample": self.counterexample is not None,
            "formula_value": self.formula_value,
            "oracle_value": self.oracle_value,
            "conflicts": list(self.conflicts),
        }


def verify_branch(branch: Branch, n_samples: int = 1000, seed: int = 0, tol: float = 1e-9) -> BranchReport:
    """Compare the branch formula with the oracle on constrained random models.

    Sample ``i`` uses seed ``(seed, i)``.  The worst failing model, if any,
    is kept as the counterexample.  Other branches that also match the same
    assumptions are evaluated too; any whose value disagrees with the oracle
    beyond ``tol`` is listed in ``conflicts``.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    others = [b for b in matching_branches(branch.family, branch.dims, branch.required) if b != branch]
    passes = 0
    worst = 0.0
    worst_fail = None
    conflicts = set()
    for i in range(n_samples):
        model = sample_model(branch.family, branch.dims, branch.required, (seed, i))
        s = summary(model)
        oracle = causal_effect_oracle(model, OUTCOME)
        value = branch.evaluate(s)
        gap = abs(value - oracle)
        worst = max(worst, gap)
        if gap <= tol:
            passes += 1
        elif worst_fail is None or gap > worst_fail[0]:
            worst_fail = (gap, model, value, oracle)
        for other in others:
            if abs(other.evaluate(s) - oracle) > tol:
                conflicts.add(other.branch_id)
    report = BranchReport(branch.branch_id, branch.citation, branch.family, branch.dims,
                          n_samples, passes, worst, branch.quarantined, conflicts=sorted(conflicts))
    if worst_fail is not None:
        _, report.counterexample, report.formula_value, report.oracle_value = worst_fail
    return report


def verify_table(family: str, dims: Dims, n_samples: int = 1000, seed: int = 0, tol: float = 1e-9) -> List[BranchReport]:
    return [verify_branch(b, n_samples, seed, tol) for b in branch_table(family, dims)]
