"""Human-readable record of branches whose printed value disagrees with the oracle.

Each failing branch gets a section with its citation, the two values and the
worst counterexample model as a fenced JSON block in the model file format,
so any entry can be re-checked with ``read_ledger`` (or by hand).
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, List, Optional

from .identify import Branch, BranchReport, branch_table
from .models import Model, causal_effect_oracle, summary
from .modelio import model_from_dict, model_to_dict

TITLE = "# Deviations ledger"


def render_ledger(reports: Iterable[BranchReport], command: str = "") -> str:
    reports = list(reports)
    failing = [r for r in reports if r.counterexample is not None]
    lines = [TITLE, ""]
    if command:
        lines += [f"Generated by `{command}`.", ""]
    checked = ", ".join(sorted({f"family {r.family} dims {tuple(r.dims)}" for r in reports}))
    lines.append(f"Branches checked: {len(reports)} ({checked}).")
    lines.append(f"Branches with counterexamples: {len(failing)}.")
    lines.append("")
    for r in failing:
        branch = _lookup(r.family, tuple(r.dims), r.branch_id)
        lines += [
            f"## {r.branch_id} ({r.citation})",
            "",
            f"- family: {r.family}",
            f"- dims: {','.join(str(d) for d in r.dims)}",
            f"- status: {'quarantined' if r.quarantined else 'FAILED (not quarantined)'}",
            f"- assumptions: {' & '.join(str(c) for c in sorted(branch.required))}",
            f"- printed formula: {branch.formula_text}",
            f"- formula value: {r.formula_value!r}",
            f"- oracle value: {r.oracle_value!r}",
            f"- gap: {abs(r.formula_value - r.oracle_value)!r}",
            f"- failing samples: {r.samples - r.passes} / {r.samples}",
            "",
            "Counterexample model:",
            "",
            "```json",
            json.dumps(model_to_dict(r.counterexample)),
            "```",
            "",
        ]
    conflicted = [r for r in reports if r.conflicts]
    if conflicted:
        lines += ["## Simultaneously matching branches with conflicting values", ""]
        for r in conflicted:
            lines.append(f"- models sampled for {r.branch_id} ({r.family} {tuple(r.dims)}) also match "
                         f"{', '.join(r.conflicts)}, which disagree with the oracle")
        lines.append("")
    return "\n".join(lines)


def write_ledger(reports: Iterable[BranchReport], path, command: str = "") -> None:
    Path(path).write_text(render_ledger(reports, command), encoding="utf-8")


def _lookup(family: str, dims, branch_id: str) -> Branch:
    for branch in branch_table(family, tuple(dims)):
        if branch.branch_id == branch_id:
            return branch
    raise KeyError(f"no branch {branch_id} for family {family} dims {dims}")


@dataclass
class LedgerEntry:
    branch_id: str
    citation: str
    family: str
    dims: tuple
    formula_value: float
    oracle_value: float
    model: Model

    def recompute(self):
        """(formula, oracle) re-evaluated from the stored model."""
        branch = _lookup(self.family, self.dims, self.branch_id)
        return branch.evaluate(summary(self.model)), causal_effect_oracle(self.model, 1)


_SECTION = re.compile(r"^## (\S+) \((.*)\)\s*$", re.M)
_FIELD = re.compile(r"^- ([a-z ]+): (.*)$", re.M)
_JSON = re.compile(r"```json\n(.*?)\n```", re.S)


def parse_ledger(text: str) -> List[LedgerEntry]:
    entries = []
    heads = list(_SECTION.finditer(text))
    for pos, head in enumerate(heads):
        end = heads[pos + 1].start() if pos + 1 < len(heads) else len(text)
        body = text[head.end():end]
        block = _JSON.search(body)
        if block is None:
            continue
        fields = dict(_FIELD.findall(body))
        model = model_from_dict(json.loads(block.group(1)), source=f"ledger:{head.group(1)}")
        entries.append(LedgerEntry(
            branch_id=head.group(1),
            citation=head.group(2),
            family=fields["family"],
            dims=tuple(int(v) for v in fields["dims"].split(",")),
            formula_value=float(fields["formula value"]),
            oracle_value=float(fields["oracle value"]),
            model=model,
        ))
    return entries


def read_ledger(path) -> List[LedgerEntry]:
    return parse_ledger(Path(path).read_text(encoding="utf-8"))


def find_entry(entries: List[LedgerEntry], family: str, dims, branch_id: str) -> Optional[LedgerEntry]:
    for entry in entries:
        if entry.family == family and entry.dims == tuple(dims) and entry.branch_id == branch_id:
            return entry
    return None
