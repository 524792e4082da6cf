"""Shipped report schemas and a small validator for the JSON Schema subset
they use (type, properties, required, items, enum)."""

from __future__ import annotations

import json
from importlib import resources

from .errors import InputError

_TYPES = {
    "object": dict,
    "array": list,
    "string": str,
    "boolean": bool,
    "null": type(None),
}


def _type_ok(value, type_name: str) -> bool:
    if type_name == "number":
        return isinstance(value, (int, float)) and not isinstance(value, bool)
    if type_name == "integer":
        return isinstance(value, int) and not isinstance(value, bool)
    return isinstance(value, _TYPES[type_name])


def validate(obj, schema: dict, path: str = "$") -> None:
    """Raise InputError on the first violation."""
    declared = schema.get("type")
    if declared is not None:
        names = declared if isinstance(declared, list) else [declared]
        if not any(_type_ok(obj, name) for name in names):
            raise InputError(f"{path}: expected {declared}, got {type(obj).__name__}")
    if "enum" in schema and obj not in schema["enum"]:
        raise InputError(f"{path}: {obj!r} not in {schema['enum']}")
    if isinstance(obj, dict):
        for key in schema.get("required", []):
            if key not in obj:
                raise InputError(f"{path}: missing required key {key!r}")
        for key, sub in schema.get("properties", {}).items():
            if key in obj:
                validate(obj[key], sub, f"{path}.{key}")
    if isinstance(obj, list) and "items" in schema:
        for i, item in enumerate(obj):
            validate(item, schema["items"], f"{path}[{i}]")


def load_schema(kind: str) -> dict:
    name = f"{kind}.schema.json"
    with resources.files("fvdlens.schemas_data").joinpath(name).open("r", encoding="utf-8") as fh:
        return json.load(fh)


def validate_report(report: dict) -> None:
    kind = report.get("kind")
    if not isinstance(kind, str):
        raise InputError("report lacks a 'kind' field")
    validate(report, load_schema(kind))
