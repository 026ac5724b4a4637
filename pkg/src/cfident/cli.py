"""Command-line front end.

Exit status: 0 on success (including "no matching sufficient condition"),
1 when an input fails validation or a non-quarantined branch fails
verification, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import shlex
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional

import numpy as np

from . import __version__
from .conditions import GENERIC, GRAMMAR_HELP, LITERAL, UnknownCondition, catalog, condition_holds, parse_conditions
from .identify import NO_MATCH, branch_table, identify, verify_branch
from .ledger import write_ledger
from .models import causal_effect_oracle, intervention_joint, observed_joint, summary
from .modelio import (
    MODEL_SCHEMA,
    SUMMARY_SCHEMA,
    ParseError,
    _check_dims,
    _check_schema,
    is_summary_doc,
    load,
    load_model,
    model_from_dict,
    read_document,
    save_model,
    summary_from_dict,
)
from .prob_core import DEFAULT_MIN_PROB, DEFAULT_TOL, SUM_TOL, ProbabilityError
from .sampling import DegenerateBase, UnsatisfiableConstraintSet, witness_pair

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    subcommand: str
    path: Optional[str] = None
    tol: float = DEFAULT_TOL
    seed: int = 0
    samples: int = 1000
    fmt: str = "text"
    assumptions: List[str] = field(default_factory=list)
    mode: str = GENERIC

    def __post_init__(self):
        if not self.tol > 0:
            raise UsageError("--tol must be > 0")
        if self.samples < 1:
            raise UsageError("--samples must be >= 1")
        if self.fmt not in ("text", "json"):
            raise UsageError("--format must be text or json")


def _num(x: float) -> str:
    return f"{x:.15g}"


def _emit(cfg: RunConfig, payload: dict, text_lines: List[str]) -> None:
    if cfg.fmt == "json":
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print("\n".join(text_lines))


# ---------------------------------------------------------------- validate

def _first_bad(doc, names, test):
    for name in names:
        arr = np.asarray(doc[name], dtype=float)
        bad = test(arr)
        if bad is not None:
            return f"/{name}" + "".join(f"/{int(i)}" for i in bad)
    return None


def _positivity(arr):
    hits = np.argwhere(~(arr >= DEFAULT_MIN_PROB))
    return tuple(hits[0]) if len(hits) else None


def _normalization(arr):
    hits = np.argwhere(np.abs(arr.sum(axis=-1) - 1.0) > SUM_TOL)
    return tuple(hits[0]) if len(hits) else None


def validate_document(doc, source) -> List[dict]:
    """Independent pass/fail for each invariant of a model or summary document."""
    checks = []

    def record(name, ok, detail=""):
        checks.append({"check": name, "ok": ok, "detail": detail})

    summary_doc = is_summary_doc(doc)
    try:
        _check_schema(doc, SUMMARY_SCHEMA if summary_doc else MODEL_SCHEMA, source)
        shapes = {"a": "K", "c": "N", "b": "NM"} if summary_doc else {"a": "K", "b": "KNM", "u": "KNM"}
        if not summary_doc:
            shapes.update({"c": "N"} if doc["family"] == "A" else {"c": "KN", "d": "KN"})
        _check_dims(doc, source, shapes)
    except ParseError as exc:
        record("schema", False, f"{exc.pointer}: {str(exc).split(': ', 2)[-1]}")
        return checks
    record("schema", True)
    names = [n for n in ("a", "d", "c", "b", "u") if n in doc and not (n == "d" and doc["family"] == "A")]
    bad = _first_bad(doc, names, _positivity)
    record("positivity", bad is None, f"{bad}: entry below {DEFAULT_MIN_PROB:g}" if bad else "")
    bad = _first_bad(doc, names, _normalization)
    record("normalization", bad is None, f"{bad}: entries do not sum to 1" if bad else "")
    if not summary_doc:
        pins = [("b", "u", "/u/0")] + ([("d", "c", "/c/0")] if doc["family"] == "B" else [])
        detail = ""
        for obs, cf, ptr in pins:
            if not np.array_equal(np.asarray(doc[obs][0], float), np.asarray(doc[cf][0], float)):
                detail = f"{ptr}: counterfactual row at X=0 differs from the observed row"
                break
        record("pinning", not detail, detail)
    if all(c["ok"] for c in checks):
        try:
            if summary_doc:
                summary_from_dict(doc, source)
            else:
                model = model_from_dict(doc, source)
                observed_joint(model)
                intervention_joint(model)
            record("construction", True)
        except (ParseError, ProbabilityError) as exc:
            record("construction", False, str(exc))
    return checks


def cmd_validate(cfg: RunConfig) -> int:
    doc = read_document(cfg.path)
    if not isinstance(doc, dict):
        raise ParseError(cfg.path, "/", "expected a JSON object")
    checks = validate_document(doc, cfg.path)
    valid = all(c["ok"] for c in checks)
    kind = "summary" if is_summary_doc(doc) else "model"
    dims = [doc.get(k) for k in ("K", "M", "N")]
    lines = [f"file: {cfg.path}", f"kind: {kind}  family: {doc.get('family')}  dims: K={dims[0]} M={dims[1]} N={dims[2]}"]
    for c in checks:
        tag = "PASS" if c["ok"] else "FAIL"
        lines.append(f"[{tag}] {c['check']}" + (f": {c['detail']}" if c["detail"] else ""))
    lines.append("valid" if valid else "invalid")
    _emit(cfg, {"file": str(cfg.path), "kind": kind, "family": doc.get("family"), "dims": dims,
                "checks": checks, "valid": valid}, lines)
    return EXIT_OK if valid else EXIT_FAIL


# ---------------------------------------------------------------- identify

def cmd_identify(cfg: RunConfig) -> int:
    assumptions = parse_conditions(cfg.assumptions)
    loaded = load(cfg.path)
    is_model = not hasattr(loaded, "b0")
    s = summary(loaded) if is_model else loaded
    result = identify(s, assumptions)
    payload = {
        "family": s.family,
        "dims": list(s.dims),
        "assumptions": sorted(str(c) for c in assumptions),
        "branch": result.branch_id,
        "provenance": result.provenance,
        "formula": result.formula,
        "value": result.value,
        "quarantined": result.quarantined,
    }
    lines = [f"family: {s.family}  dims: {tuple(s.dims)}",
             f"assumptions: {', '.join(payload['assumptions']) or '(none)'}"]
    if result.identified:
        lines += [f"branch: {result.branch_id} ({result.provenance})",
                  f"formula: {result.formula}",
                  f"P0(Y=1) = {_num(result.value)}"]
        if result.quarantined:
            lines.append("WARNING: this branch is quarantined; its printed value is not sound")
    else:
        lines.append(NO_MATCH)
    if is_model:
        oracle = causal_effect_oracle(loaded, 1)
        payload["oracle"] = oracle
        lines.append(f"oracle P0(Y=1) = {_num(oracle)}")
        if result.identified:
            payload["gap"] = abs(result.value - oracle)
            lines.append(f"|formula - oracle| = {payload['gap']:.3e}")
    _emit(cfg, payload, lines)
    return EXIT_OK


# ---------------------------------------------------------------- check

def cmd_check(cfg: RunConfig) -> int:
    model = load_model(cfg.path)
    modes = [GENERIC, LITERAL] if cfg.mode == "both" else [cfg.mode]
    joint = intervention_joint(model)
    rows = []
    for cond in catalog(model.dims):
        row = {"condition": str(cond)}
        for mode in modes:
            ok, score = condition_holds(model, cond, cfg.tol, mode, joint=joint)
            row[mode] = {"holds": ok, "score": score}
        rows.append(row)
    lines = [f"family: {model.family}  dims: {model.dims}  tol: {cfg.tol:g}",
             f"{'condition':<14}" + "".join(f"{m:>8} {'score':>10}  " for m in modes)]
    for row in rows:
        cells = "".join(f"{str(row[m]['holds']).upper():>8} {row[m]['score']:>10.3e}  " for m in modes)
        lines.append(f"{row['condition']:<14}" + cells)
    _emit(cfg, {"family": model.family, "dims": list(model.dims), "tol": cfg.tol, "modes": modes,
                "conditions": rows}, lines)
    return EXIT_OK


# ---------------------------------------------------------------- witness

def cmd_witness(cfg: RunConfig, out_dir: str) -> int:
    base = load(cfg.path)
    pair = witness_pair(base, cfg.seed)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = [out / "witness_1.json", out / "witness_2.json"]
    save_model(pair.model_1, paths[0])
    save_model(pair.model_2, paths[1])
    e1, e2 = pair.effects
    payload = {"models": [str(p) for p in paths], "effects": [e1, e2],
               "observed_gap": pair.observed_gap, "effect_gap": pair.effect_gap}
    lines = [f"model_1 -> {paths[0]}: P0(Y=1) = {_num(e1)}",
             f"model_2 -> {paths[1]}: P0(Y=1) = {_num(e2)}",
             f"observed joints differ by at most {pair.observed_gap:.3e}",
             f"causal effects differ by {_num(pair.effect_gap)}"]
    _emit(cfg, payload, lines)
    return EXIT_OK


# ---------------------------------------------------------------- verify

def _parse_dims(text: str):
    try:
        dims = tuple(int(v) for v in text.split(","))
    except ValueError:
        raise UsageError(f"--dims must look like K,M,N, got {text!r}") from None
    if len(dims) != 3 or min(dims) < 2:
        raise UsageError(f"--dims needs three cardinalities >= 2, got {text!r}")
    return dims


def cmd_verify(cfg: RunConfig, family: str, dims, ledger_path: str, only: List[str], argv: List[str]) -> int:
    branches = branch_table(family, dims)
    if only:
        unknown = set(only) - {b.branch_id for b in branches}
        if unknown:
            raise UsageError(f"unknown branch id(s): {', '.join(sorted(unknown))}")
        branches = [b for b in branches if b.branch_id in only]
    reports = [verify_branch(b, cfg.samples, cfg.seed, cfg.tol) for b in branches]
    write_ledger(reports, ledger_path, "cfident " + " ".join(shlex.quote(a) for a in argv))
    ok = all(r.passed or r.quarantined for r in reports)
    lines = []
    for r in reports:
        if r.passed:
            status = "PASS"
        else:
            status = "QUARANTINED (counterexample in ledger)" if r.quarantined else "FAIL (counterexample in ledger)"
        lines.append(f"{r.branch_id:<9} {r.citation:<40} samples={r.samples} pass={r.passes} "
                     f"worst_gap={r.worst_gap:.3e} {status}")
        if r.conflicts:
            lines.append(f"          also matched by conflicting branches: {', '.join(r.conflicts)}")
    lines.append(f"ledger: {ledger_path}")
    lines.append("all non-quarantined branches pass" if ok else "verification FAILED")
    _emit(cfg, {"family": family, "dims": list(dims), "samples": cfg.samples, "seed": cfg.seed, "tol": cfg.tol,
                "ledger": str(ledger_path), "reports": [r.as_dict() for r in reports], "ok": ok}, lines)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_branches(cfg: RunConfig, family: str, dims) -> int:
    table = branch_table(family, dims)
    rows = [{"branch": b.branch_id, "citation": b.citation, "assumptions": sorted(str(c) for c in b.required),
             "formula": b.formula_text, "quarantined": b.quarantined} for b in table]
    lines = [b.describe() + ("  [quarantined]" if b.quarantined else "") for b in table]
    _emit(cfg, {"family": family, "dims": list(dims), "branches": rows}, lines)
    return EXIT_OK


# ---------------------------------------------------------------- entry point

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", dest="fmt", choices=["text", "json"], default="text",
                        help="output format (default: text)")

    parser = argparse.ArgumentParser(
        prog="cfident",
        description="Identify P0(Y=1) in three-variable counterfactual models and check the "
                    "closed-form branches against a brute-force oracle.",
        epilog=f"Condition grammar for --assume: {GRAMMAR_HELP}.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", parents=[common], help="check a model or summary file")
    p.add_argument("path")

    p = sub.add_parser("identify", parents=[common], help="closed-form P0(Y=1) under assumptions",
                       epilog=f"Condition grammar: {GRAMMAR_HELP}.")
    p.add_argument("path", help="model or summary JSON")
    p.add_argument("--assume", action="append", default=[], metavar="COND",
                   help="an independence statement about P0 (repeatable)")
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)

    p = sub.add_parser("check", parents=[common], help="evaluate every catalog condition on a model")
    p.add_argument("path")
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.add_argument("--mode", choices=[GENERIC, LITERAL, "both"], default=GENERIC)

    p = sub.add_parser("witness", parents=[common], help="two models, same observations, different effect")
    p.add_argument("path", help="base model or summary JSON")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", default=".")

    p = sub.add_parser("verify", parents=[common], help="check every branch against the oracle")
    p.add_argument("--family", choices=["A", "B"], required=True)
    p.add_argument("--dims", required=True, help="K,M,N")
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.add_argument("--ledger", default="deviations.md", help="where to write the deviations ledger")
    p.add_argument("--branch", action="append", default=[], help="restrict to these branch ids")

    p = sub.add_parser("branches", parents=[common], help="list the branch table")
    p.add_argument("--family", choices=["A", "B"], required=True)
    p.add_argument("--dims", required=True, help="K,M,N")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = RunConfig(
            subcommand=args.command,
            path=getattr(args, "path", None),
            tol=getattr(args, "tol", DEFAULT_TOL),
            seed=getattr(args, "seed", 0),
            samples=getattr(args, "samples", 1000),
            fmt=args.fmt,
            assumptions=getattr(args, "assume", []),
            mode=getattr(args, "mode", GENERIC),
        )
        if args.command == "validate":
            return cmd_validate(cfg)
        if args.command == "identify":
            return cmd_identify(cfg)
        if args.command == "check":
            return cmd_check(cfg)
        if args.command == "witness":
            return cmd_witness(cfg, args.out_dir)
        if args.command == "verify":
            return cmd_verify(cfg, args.family, _parse_dims(args.dims), args.ledger, args.branch, argv)
        return cmd_branches(cfg, args.family, _parse_dims(args.dims))
    except (UsageError, UnknownCondition) as exc:
        parser.error(str(exc))
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (DegenerateBase, UnsatisfiableConstraintSet) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_USAGE  # pragma: no cover


if __name__ == "__main__":
    sys.exit(main())
