"""JSON documents for models and observed summaries.

A full model::

    {"family": "A" | "B", "K": int, "M": int, "N": int,
     "a": [K], "c": [N] (A) or [K][N] (B), "d": [K][N] (B only),
     "b": [K][N][M], "u": [K][N][M]}

A summary (no counterfactual part) has ``"b"`` holding only the X = 0 rows,
``[N][M]``, and for family B ``"c"`` is the single row P(Z | X = 0).  A
document without ``"u"`` is read as a summary.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Union

from jsonschema import Draft202012Validator

from .models import Model, ModelA, ModelB, ObservedSummary
from .prob_core import ProbabilityError

_NUM = {"type": "number"}


def _nested(depth):
    schema = _NUM
    for _ in range(depth):
        schema = {"type": "array", "items": schema, "minItems": 2}
    return schema


_BASE = {
    "type": "object",
    "required": ["family", "K", "M", "N", "a", "c", "b"],
    "properties": {
        "family": {"enum": ["A", "B"]},
        "K": {"type": "integer", "minimum": 2},
        "M": {"type": "integer", "minimum": 2},
        "N": {"type": "integer", "minimum": 2},
        "a": _nested(1),
    },
}

MODEL_SCHEMA = {
    **_BASE,
    "required": _BASE["required"] + ["u"],
    "properties": {**_BASE["properties"], "b": _nested(3), "u": _nested(3), "d": _nested(2)},
    "allOf": [
        {"if": {"properties": {"family": {"const": "A"}}},
         "then": {"properties": {"c": _nested(1)}}},
        {"if": {"properties": {"family": {"const": "B"}}},
         "then": {"required": ["d"], "properties": {"c": _nested(2)}}},
    ],
}

SUMMARY_SCHEMA = {
    **_BASE,
    "properties": {**_BASE["properties"], "b": _nested(2), "c": _nested(1)},
}


class ParseError(ValueError):
    """A model or summary document failed to load; ``pointer`` locates the field."""

    def __init__(self, source, pointer: str, message: str):
        self.source = str(source)
        self.pointer = pointer or "/"
        super().__init__(f"{self.source}: {self.pointer}: {message}")


def _pointer(parts) -> str:
    return "".join(f"/{p}" for p in parts)


def _check_schema(doc, schema, source):
    errors = sorted(Draft202012Validator(schema).iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        raise ParseError(source, _pointer(err.absolute_path), err.message)


def _check_dims(doc, source, shapes):
    sizes = {"K": doc["K"], "M": doc["M"], "N": doc["N"]}

    def walk(value, axes, pointer):
        want = sizes[axes[0]]
        if len(value) != want:
            raise ParseError(source, pointer, f"expected {axes[0]}={want} entries, got {len(value)}")
        if len(axes) > 1:
            for i, item in enumerate(value):
                walk(item, axes[1:], f"{pointer}/{i}")

    for name, axes in shapes.items():
        walk(doc[name], axes, f"/{name}")


def is_summary_doc(doc: dict) -> bool:
    return isinstance(doc, dict) and "u" not in doc


def model_from_dict(doc: dict, source="<model>", min_prob=None) -> Model:
    _check_schema(doc, MODEL_SCHEMA, source)
    shapes = {"a": "K", "b": "KNM", "u": "KNM"}
    if doc["family"] == "A":
        shapes["c"] = "N"
    else:
        shapes.update(c="KN", d="KN")
    _check_dims(doc, source, shapes)
    kwargs = {} if min_prob is None else {"min_prob": min_prob}
    try:
        if doc["family"] == "A":
            return ModelA(doc["a"], doc["c"], doc["b"], doc["u"], **kwargs)
        return ModelB(doc["a"], doc["d"], doc["c"], doc["b"], doc["u"], **kwargs)
    except ProbabilityError as exc:
        raise ParseError(source, exc.path, str(exc).split(": ", 1)[-1]) from exc


def summary_from_dict(doc: dict, source="<summary>") -> ObservedSummary:
    _check_schema(doc, SUMMARY_SCHEMA, source)
    _check_dims(doc, source, {"a": "K", "c": "N", "b": "NM"})
    try:
        return ObservedSummary(doc["family"], doc["a"], doc["c"], doc["b"])
    except ProbabilityError as exc:
        raise ParseError(source, exc.path, str(exc).split(": ", 1)[-1]) from exc


def read_document(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(path, "/", f"invalid JSON ({exc})") from exc
    except OSError as exc:
        raise ParseError(path, "/", f"unreadable ({exc.strerror})") from exc


def load(path) -> Union[Model, ObservedSummary]:
    """Load a model or, when the document has no ``u``, a summary."""
    doc = read_document(path)
    if not isinstance(doc, dict):
        raise ParseError(path, "/", "expected a JSON object")
    if is_summary_doc(doc):
        return summary_from_dict(doc, path)
    return model_from_dict(doc, path)


def load_model(path) -> Model:
    doc = read_document(path)
    if not isinstance(doc, dict):
        raise ParseError(path, "/", "expected a JSON object")
    return model_from_dict(doc, path)


def model_to_dict(model: Model) -> dict:
    K, M, N = model.dims
    doc = {"family": model.family, "K": K, "M": M, "N": N, "a": model.a.tolist()}
    if model.family == "B":
        doc["d"] = model.d.tolist()
    doc["c"] = model.c.tolist()
    doc["b"] = model.b.tolist()
    doc["u"] = model.u.tolist()
    return doc


def summary_to_dict(s: ObservedSummary) -> dict:
    K, M, N = s.dims
    return {"family": s.family, "K": K, "M": M, "N": N,
            "a": s.a.tolist(), "c": s.c.tolist(), "b": s.b0.tolist()}


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=False)


def save_model(model: Model, path: Union[str, Path]) -> None:
    Path(path).write_text(dumps(model_to_dict(model)) + "\n", encoding="utf-8")
