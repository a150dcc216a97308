"""JSON run configurations: schemas, loading and conversion to library objects."""

from __future__ import annotations

import json
from pathlib import Path

import jsonschema
import numpy as np

from .cross import Cross
from .errors import ConfigError
from .extension import GroundTruth, SamplingStrategy
from .extremal import SolveParams
from .geometry import Grid, Shape, shape_from_dict
from .singularity import SingularSet

_POINT = {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}
_COMPLEX = {"oneOf": [{"type": "number"}, _POINT]}
_MATRIX = {"type": "array", "minItems": 1,
           "items": {"type": "array", "minItems": 1, "items": _COMPLEX}}


def _obj(props: dict, required=()) -> dict:
    return {"type": "object", "properties": props, "required": list(required),
            "additionalProperties": False}


_SHAPE = {
    "type": "object",
    "required": ["shape"],
    "properties": {"shape": {"enum": ["disc", "annulus", "rectangle", "union", "intersection",
                                      "difference", "minus_points", "points", "eroded"]}},
    "allOf": [
        {"if": {"properties": {"shape": {"const": "disc"}}},
         "then": _obj({"shape": {}, "center": _POINT, "radius": {"type": "number", "exclusiveMinimum": 0},
                       "closed": {"type": "boolean"}}, ["center", "radius"])},
        {"if": {"properties": {"shape": {"const": "annulus"}}},
         "then": _obj({"shape": {}, "center": _POINT, "r_in": {"type": "number", "minimum": 0},
                       "r_out": {"type": "number"}, "closed": {"type": "boolean"}},
                      ["center", "r_in", "r_out"])},
        {"if": {"properties": {"shape": {"const": "rectangle"}}},
         "then": _obj({"shape": {}, "corners": {"type": "array", "items": _POINT, "minItems": 2,
                                                "maxItems": 2}, "closed": {"type": "boolean"}},
                      ["corners"])},
        {"if": {"properties": {"shape": {"enum": ["union", "intersection"]}}},
         "then": _obj({"shape": {}, "parts": {"type": "array", "minItems": 1,
                                              "items": {"$ref": "#/$defs/shape"}}}, ["parts"])},
        {"if": {"properties": {"shape": {"const": "difference"}}},
         "then": _obj({"shape": {}, "parts": {"type": "array", "minItems": 2, "maxItems": 2,
                                              "items": {"$ref": "#/$defs/shape"}}}, ["parts"])},
        {"if": {"properties": {"shape": {"const": "minus_points"}}},
         "then": _obj({"shape": {}, "base": {"$ref": "#/$defs/shape"},
                       "points": {"type": "array", "items": _POINT}}, ["base", "points"])},
        {"if": {"properties": {"shape": {"const": "points"}}},
         "then": _obj({"shape": {}, "points": {"type": "array", "items": _POINT, "minItems": 1}},
                      ["points"])},
        {"if": {"properties": {"shape": {"const": "eroded"}}},
         "then": _obj({"shape": {}, "base": {"$ref": "#/$defs/shape"},
                       "eps": {"type": "number", "minimum": 0}}, ["base", "eps"])},
    ],
}

_GRID = _obj({"lower": _POINT, "upper": _POINT, "nx": {"type": "integer", "minimum": 8},
              "ny": {"type": "integer", "minimum": 8}}, ["lower", "upper", "nx", "ny"])

_SOLVER = _obj({"tol": {"type": "number", "exclusiveMinimum": 0},
                "max_iter": {"type": "integer", "minimum": 1},
                "relaxation": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 2},
                "method": {"enum": ["direct", "sor"]},
                "fitted": {"type": "boolean"}})

_REF = {"$ref": "#/$defs/shape"}

_CROSS = _obj({"d": _REF, "a": _REF, "g": _REF, "b": _REF}, ["d", "a", "g", "b"])

_SINGULAR = {"oneOf": [_obj({"poly": _MATRIX}, ["poly"]),
                       _obj({"graphs": {"type": "array", "minItems": 1, "items": {
                           "type": "array", "minItems": 1, "items": _COMPLEX}}}, ["graphs"])]}

_DEG = {"type": "array", "items": {"type": "integer", "minimum": 0}, "minItems": 2, "maxItems": 2}

SCHEMAS = {
    "extremal": _obj({"omega": _REF, "a": _REF, "grid": _GRID, "solver": _SOLVER,
                      "regularize": {"type": "boolean"}}, ["omega", "a", "grid"]),
    "envelope": _obj({"cross": _CROSS, "grid_z": _GRID, "grid_w": _GRID, "solver": _SOLVER},
                     ["cross", "grid_z", "grid_w"]),
    "verify": _obj({
        "cross": _CROSS,
        "singular_set": _SINGULAR,
        "ground_truth": _obj({"numerator": _MATRIX, "pole_order": {"type": "integer", "minimum": 0}},
                             ["numerator", "pole_order"]),
        "control": _obj({"offset": _COMPLEX}, ["offset"]),
        "fit": _obj({"m": {"type": "integer", "minimum": 0}, "deg": _DEG}, ["m", "deg"]),
        "sampling": _obj({"n_ag": {"type": "integer", "minimum": 0},
                          "n_db": {"type": "integer", "minimum": 0},
                          "clearance": {"type": "number", "exclusiveMinimum": 0},
                          "seed": {"type": "integer", "minimum": 0}}),
        "envelope": _obj({"grid_z": _GRID, "grid_w": _GRID, "solver": _SOLVER},
                         ["grid_z", "grid_w"]),
        "n_test": {"type": "integer", "minimum": 100},
        "thresholds": _obj({"max_rel_error": {"type": "number", "minimum": 0},
                            "uniqueness": {"type": "number", "minimum": 0},
                            "removability": {"type": "number", "minimum": 0}}),
        "uniqueness": _obj({"deg": _DEG}),
        "removability": _obj({"center": {"type": "array", "items": _COMPLEX, "minItems": 2,
                                         "maxItems": 2},
                              "radii": {"type": "array", "items": {"type": "number",
                                                                   "exclusiveMinimum": 0},
                                        "minItems": 2, "maxItems": 2},
                              "n_quad": {"type": "integer", "minimum": 32}},
                             ["center", "radii"]),
    }, ["cross", "singular_set", "ground_truth", "fit", "envelope"]),
}

for _schema in SCHEMAS.values():
    _schema["$defs"] = {"shape": _SHAPE}


def validate(doc, kind: str) -> dict:
    try:
        jsonschema.validate(doc, SCHEMAS[kind])
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"{where}: {exc.message}") from None
    return doc


def load(path, kind: str) -> dict:
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    return validate(doc, kind)


def complex_value(v) -> complex:
    return complex(v[0], v[1]) if isinstance(v, list) else complex(v)


def grid(d: dict) -> Grid:
    return Grid(complex_value(d["lower"]), complex_value(d["upper"]), d["nx"], d["ny"])


def solver(d: dict | None, tol: float | None = None) -> SolveParams:
    d = dict(d or {})
    d.pop("fitted", None)
    if tol is not None:
        d["tol"] = tol
    return SolveParams(**d)


def fitted(d: dict | None) -> bool:
    return bool((d or {}).get("fitted", True))


def shape(d: dict) -> Shape:
    return shape_from_dict(d)


def cross(d: dict) -> Cross:
    return Cross(shape(d["d"]), shape(d["a"]), shape(d["g"]), shape(d["b"]))


def singular_set(d: dict) -> SingularSet:
    return SingularSet.from_dict(d)


def ground_truth(d: dict, m: SingularSet) -> GroundTruth:
    num = np.array([[complex_value(c) for c in row] for row in d["numerator"]])
    return GroundTruth(num, m, d["pole_order"])


def sampling(d: dict | None, seed: int | None = None) -> SamplingStrategy:
    d = dict(d or {})
    if seed is not None:
        d["seed"] = seed
    return SamplingStrategy(**d)
