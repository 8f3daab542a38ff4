"""Versioned JSON descriptions of bodies, potentials, and integration specs.

Schema version "1". Matrices are row-major nested lists. A function
document describes the convex potential phi; the log-concave function it
names is exp(-phi).

    {"schema": "1", "dim": 2, "kind": "quadratic",   "A": [[...], [...]]}
    {"kind": "gauge_power", "body": {...}, "p": 2}
    {"kind": "composed",   "base": {...}, "T": [[...], [...]]}
    {"kind": "grid", "box": [[lo, hi], ...], "values": [...]}

    {"kind": "polytope", "normals": [[...]], "supports": [...]}
    {"kind": "polytope", "vertices": [[...]]}
    {"kind": "ellipsoid", "Q": [[...]]}
    {"kind": "ball", "dim": 2, "radius": 1.0}
"""

import json

import numpy as np

from .bodies import Ball, ConvexBody, Ellipsoid, Polytope
from .convex import ConvexFunction, GaugePower, Quadratic, SampledGrid
from .errors import ParseError
from .integration import IntegrationSpec
from .logconcave import LogConcaveFunction

SCHEMA_VERSION = "1"


def _require(doc, key, kind):
    if key not in doc:
        raise ParseError(f"{kind} document is missing {key!r}")
    return doc[key]


def body_from_json(doc: dict) -> ConvexBody:
    kind = _require(doc, "kind", "body")
    if kind == "polytope":
        if "vertices" in doc:
            return Polytope.from_vertices(np.asarray(doc["vertices"], dtype=float))
        normals = np.asarray(_require(doc, "normals", "polytope"), dtype=float)
        supports = np.asarray(_require(doc, "supports", "polytope"), dtype=float)
        return Polytope.from_halfspaces(normals, supports)
    if kind == "ellipsoid":
        return Ellipsoid(np.asarray(_require(doc, "Q", "ellipsoid"), dtype=float))
    if kind == "ball":
        return Ball(int(_require(doc, "dim", "ball")), float(doc.get("radius", 1.0)))
    raise ParseError(f"unknown body kind {kind!r}")


def body_to_json(body: ConvexBody) -> dict:
    if isinstance(body, Ball):
        return {"kind": "ball", "dim": body.dim, "radius": body.radius}
    if isinstance(body, Ellipsoid):
        return {"kind": "ellipsoid", "Q": body.Q.tolist()}
    if isinstance(body, Polytope):
        return {
            "kind": "polytope",
            "normals": body.normals.tolist(),
            "supports": body.supports.tolist(),
        }
    raise ParseError(f"cannot serialize body type {type(body).__name__}")


def potential_from_json(doc: dict) -> ConvexFunction:
    kind = _require(doc, "kind", "function")
    if kind == "quadratic":
        return Quadratic(np.asarray(_require(doc, "A", "quadratic"), dtype=float))
    if kind == "gauge_power":
        body = body_from_json(_require(doc, "body", "gauge_power"))
        return GaugePower(body, float(doc.get("p", 2.0)))
    if kind == "composed":
        base = potential_from_json(_require(doc, "base", "composed"))
        return base.compose_linear(np.asarray(_require(doc, "T", "composed"), dtype=float))
    if kind == "grid":
        box = _require(doc, "box", "grid")
        values = np.asarray(_require(doc, "values", "grid"), dtype=float)
        return SampledGrid.from_box(box, values)
    raise ParseError(f"unknown function kind {kind!r}")


def potential_to_json(phi: ConvexFunction) -> dict:
    if isinstance(phi, Quadratic):
        return {"dim": phi.dim, "kind": "quadratic", "A": phi.A.tolist()}
    if isinstance(phi, GaugePower):
        return {
            "dim": phi.dim,
            "kind": "gauge_power",
            "body": body_to_json(phi.body),
            "p": phi.p,
        }
    raise ParseError(f"cannot serialize potential type {type(phi).__name__}")


def log_concave_from_json(doc: dict) -> LogConcaveFunction:
    from .logconcave import _wrap

    return _wrap(potential_from_json(doc))


def load_json(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError as exc:
        raise ParseError(f"input file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(
            f"{path}: malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}"
        ) from exc


def load_log_concave(path: str) -> LogConcaveFunction:
    return log_concave_from_json(load_json(path))


def load_body(path: str) -> ConvexBody:
    return body_from_json(load_json(path))


def spec_from_json(doc: dict) -> IntegrationSpec:
    return IntegrationSpec.from_json(doc)


def dump_report(doc: dict, path=None) -> str:
    """Canonical serialization: sorted keys, two-space indent, trailing
    newline. Identical inputs produce byte-identical text."""
    doc = dict(doc)
    doc.setdefault("schema", SCHEMA_VERSION)
    text = json.dumps(doc, sort_keys=True, indent=2) + "\n"
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text
