"""Ingestion of disk-map specifications from JSON documents.

All angles are in turns (multiples of 2*pi).  See docs/schema/ for the
published schema; `SCHEMA` below is the source of truth.
"""

from __future__ import annotations

import json
from pathlib import Path

import jsonschema

from .diskmap import (
    Composition,
    DiskMap,
    HamiltonianFlow,
    RadialTwist,
    RigidRotation,
    TwistProfile,
)
from .errors import InvalidInputError, InvalidProfileError
from .hamiltonians import PolynomialHamiltonian, RadialBumpHamiltonian

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "$id": "https://example.invalid/diskcalabi/mapspec.schema.json",
    "title": "diskcalabi map specification",
    "description": "Area-preserving disk map; angles in turns.",
    "$ref": "#/$defs/map",
    "$defs": {
        "map": {
            "type": "object",
            "required": ["kind"],
            "properties": {"kind": {"enum": ["rotation", "twist", "hamiltonian", "composition"]}},
            "allOf": [
                {
                    "if": {"properties": {"kind": {"const": "rotation"}}},
                    "then": {
                        "required": ["theta0"],
                        "properties": {
                            "kind": {},
                            "theta0": {"type": "number"},
                        },
                        "additionalProperties": False,
                    },
                },
                {
                    "if": {"properties": {"kind": {"const": "twist"}}},
                    "then": {
                        "required": ["profile"],
                        "properties": {
                            "kind": {},
                            "delta": {"type": "number", "minimum": 0, "exclusiveMaximum": 1},
                            "profile": {
                                "type": "object",
                                "required": ["pieces"],
                                "properties": {
                                    "pieces": {
                                        "type": "array",
                                        "minItems": 1,
                                        "items": {
                                            "type": "array",
                                            "minItems": 3,
                                            "items": {"type": "number"},
                                        },
                                    }
                                },
                                "additionalProperties": False,
                            },
                        },
                        "additionalProperties": False,
                    },
                },
                {
                    "if": {"properties": {"kind": {"const": "hamiltonian"}}},
                    "then": {
                        "required": ["hamiltonian", "steps"],
                        "properties": {
                            "kind": {},
                            "steps": {"type": "integer", "minimum": 1},
                            "order": {"enum": [2, 4]},
                            "theta0": {"type": "number"},
                            "delta": {"type": "number", "minimum": 0, "exclusiveMaximum": 1},
                            "hamiltonian": {
                                "type": "object",
                                "required": ["type"],
                                "properties": {
                                    "type": {"enum": ["polynomial", "radial_bump"]},
                                    "terms": {
                                        "type": "array",
                                        "items": {
                                            "type": "array",
                                            "minItems": 3,
                                            "maxItems": 3,
                                            "items": {"type": "number"},
                                        },
                                    },
                                    "time_coeffs": {
                                        "type": "array",
                                        "minItems": 1,
                                        "items": {"type": "number"},
                                    },
                                    "center": {
                                        "type": "array",
                                        "minItems": 2,
                                        "maxItems": 2,
                                        "items": {"type": "number"},
                                    },
                                    "radius": {"type": "number", "exclusiveMinimum": 0},
                                    "strength": {"type": "number"},
                                    "power": {"type": "integer", "minimum": 4},
                                },
                            },
                        },
                        "additionalProperties": False,
                    },
                },
                {
                    "if": {"properties": {"kind": {"const": "composition"}}},
                    "then": {
                        "required": ["factors"],
                        "properties": {
                            "kind": {},
                            "factors": {
                                "type": "array",
                                "minItems": 1,
                                "items": {"$ref": "#/$defs/map"},
                            },
                        },
                        "additionalProperties": False,
                    },
                },
            ],
        }
    },
}


def _build_hamiltonian(spec: dict, path: str):
    kind = spec["type"]
    if kind == "polynomial":
        if "terms" not in spec:
            raise InvalidInputError("polynomial hamiltonian needs 'terms'", path)
        return PolynomialHamiltonian(
            [(t[0], t[1], t[2]) for t in spec["terms"]],
            tuple(spec.get("time_coeffs", [1.0])),
        )
    if kind == "radial_bump":
        for key in ("center", "radius", "strength"):
            if key not in spec:
                raise InvalidInputError(f"radial_bump hamiltonian needs {key!r}", path)
        return RadialBumpHamiltonian(
            tuple(spec["center"]), spec["radius"], spec["strength"],
            spec.get("power", 4),
        )
    raise InvalidInputError(f"unknown hamiltonian type {kind!r}", path)


def build_map(spec: dict, path: str = "$") -> DiskMap:
    """Build a DiskMap from an already-validated specification dict."""
    kind = spec["kind"]
    try:
        if kind == "rotation":
            return RigidRotation(spec["theta0"])
        if kind == "twist":
            profile = TwistProfile.from_pieces(spec["profile"]["pieces"])
            return RadialTwist(profile, delta=spec.get("delta", 0.0))
        if kind == "hamiltonian":
            ham = _build_hamiltonian(spec["hamiltonian"], path + ".hamiltonian")
            return HamiltonianFlow(
                ham, spec["steps"], order=spec.get("order", 4),
                theta0=spec.get("theta0", 0.0), delta=spec.get("delta", 0.25),
            )
        if kind == "composition":
            return Composition([
                build_map(sub, f"{path}.factors[{i}]")
                for i, sub in enumerate(spec["factors"])
            ])
    except InvalidProfileError as exc:
        raise InvalidInputError(str(exc), path) from exc
    raise InvalidInputError(f"unknown map kind {kind!r}", path)


def parse_mapspec(doc: dict) -> DiskMap:
    """Validate a specification dict against the schema and build the map."""
    try:
        jsonschema.validate(doc, SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "$" + "".join(
            f"[{p}]" if isinstance(p, int) else f".{p}" for p in exc.absolute_path
        )
        raise InvalidInputError(f"{where}: {exc.message}", where) from exc
    return build_map(doc)


def load_mapspec(path) -> DiskMap:
    """Read a JSON file and build the map it describes."""
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidInputError(
            f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}", str(path)
        ) from exc
    return parse_mapspec(doc)


def load_params(path) -> dict:
    """Read a JSON parameter document (must be an object)."""
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidInputError(
            f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}", str(path)
        ) from exc
    if not isinstance(doc, dict):
        raise InvalidInputError("parameter document must be a JSON object", "$")
    return doc
