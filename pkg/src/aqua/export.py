"""Export of the surrogate problem as a mixed integer conic quadratic program.

The document lists the variables ``(xi, v, r, a, b)``, the linear objective
``h^T xi - r``, the rows of ``C`` followed by the link rows
``2 sqrt(2) a - 2 r = 1``, ``2 sqrt(2) b + 2 r = 1`` and ``S^T xi - v = 0``,
and the cone ``(a, b, v) in Q^(2+t)``. With ``t = 0`` only ``xi`` remains
and there is no cone block.
"""

import json
import math

import jsonschema
import numpy as np

from .errors import IoError

SCHEMA_ID = "aqua/1"
SQRT2 = math.sqrt(2.0)

_num = {"type": "number"}
_bound = {"type": "array", "items": {"type": ["number", "null"]}, "minItems": 2, "maxItems": 2}

MICQP_SCHEMA = {
    "type": "object",
    "required": ["schema", "n", "t", "variables", "objective", "rows", "bounds", "integrality", "metadata"],
    "properties": {
        "schema": {"const": SCHEMA_ID},
        "n": {"type": "integer", "minimum": 1},
        "t": {"type": "integer", "minimum": 0},
        "variables": {
            "type": "object",
            "required": ["xi"],
            "properties": {
                "xi": {"type": "array", "items": {"type": "integer"}, "minItems": 2, "maxItems": 2},
                "v": {"type": "array", "items": {"type": "integer"}, "minItems": 2, "maxItems": 2},
                "r": {"type": "integer"},
                "a": {"type": "integer"},
                "b": {"type": "integer"},
            },
        },
        "objective": {
            "type": "object",
            "required": ["linear", "aux_r"],
            "properties": {"linear": {"type": "array", "items": _num}, "aux_r": {"type": "boolean"}},
        },
        "rows": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["coeffs", "sense", "rhs"],
                "properties": {
                    "coeffs": {"type": "array", "items": _num},
                    "sense": {"enum": ["<=", "="]},
                    "rhs": _num,
                },
            },
        },
        "bounds": {"type": "array", "items": _bound},
        "integrality": {"type": "array", "items": {"type": "boolean"}},
        "cone": {
            "type": "object",
            "required": ["type", "order", "links"],
            "properties": {
                "type": {"const": "second_order"},
                "order": {"type": "integer", "minimum": 2},
                "links": {
                    "type": "object",
                    "required": ["a_row", "b_row", "v_rows"],
                    "properties": {
                        "a_row": {"type": "integer"},
                        "b_row": {"type": "integer"},
                        "v_rows": {"type": "array", "items": {"type": "integer"}},
                    },
                },
            },
        },
        "metadata": {
            "type": "object",
            "required": ["anchor_criterion", "p", "gamma", "a_scale", "c_offset", "V_matrix"],
            "properties": {
                "anchor_criterion": {"type": "string"},
                "p": {"type": "integer"},
                "gamma": {"type": ["number", "null"]},
                "a_scale": _num,
                "c_offset": _num,
                "V_matrix": {"type": "array", "items": {"type": "array", "items": _num}},
            },
        },
    },
}


def _f(x):
    return None if not np.isfinite(x) else float(x)


def rotation_matrix(t):
    """The orthogonal ``V`` mapping ``(1/2, r, S^T xi)`` into the cone coordinates."""
    V = np.eye(t + 2)
    V[:2, :2] = np.array([[1.0, 1.0], [1.0, -1.0]]) / SQRT2
    return V


def micqp_document(Q, C):
    n, t = Q.n, Q.t
    nv = n + (t + 3 if t else 0)
    rows = []

    def row(coeffs, sense, rhs):
        rows.append({"coeffs": [float(x) for x in coeffs], "sense": sense, "rhs": float(rhs)})

    for i in range(C.k):
        r = np.zeros(nv)
        r[:n] = C.A[i]
        row(r, "=" if C.eq[i] else "<=", C.b[i])
    bounds = [[_f(lo), _f(hi)] for lo, hi in zip(C.lower, C.upper)]
    integrality = [bool(x) for x in C.integer]
    variables = {"xi": [0, n]}
    doc = {"schema": SCHEMA_ID, "n": n, "t": t, "variables": variables}
    if t:
        iv, ir, ia, ib = n, n + t, n + t + 1, n + t + 2
        variables.update(v=[iv, t], r=ir, a=ia, b=ib)
        r = np.zeros(nv)
        r[ia], r[ir] = 2.0 * SQRT2, -2.0
        a_row = len(rows)
        row(r, "=", 1.0)
        r = np.zeros(nv)
        r[ib], r[ir] = 2.0 * SQRT2, 2.0
        b_row = len(rows)
        row(r, "=", 1.0)
        v_rows = []
        for j in range(t):
            r = np.zeros(nv)
            r[:n] = Q.S[:, j]
            r[iv + j] = -1.0
            v_rows.append(len(rows))
            row(r, "=", 0.0)
        bounds += [[None, None]] * (t + 3)
        integrality += [False] * (t + 3)
        doc["cone"] = {
            "type": "second_order", "order": t + 2,
            "links": {"a_row": a_row, "b_row": b_row, "v_rows": v_rows},
        }
    crit = Q.criterion
    doc.update(
        objective={"linear": [float(x) for x in Q.h], "aux_r": bool(t)},
        rows=rows, bounds=bounds, integrality=integrality,
    )
    doc["metadata"] = {
        "anchor_criterion": crit.name,
        "p": int(crit.p),
        "gamma": None if Q.gamma is None else float(Q.gamma),
        "a_scale": float(Q.a),
        "c_offset": float(Q.c),
        "V_matrix": rotation_matrix(t).tolist(),
    }
    # keep the document key order readable
    order = ["schema", "n", "t", "variables", "objective", "rows", "bounds", "integrality", "cone", "metadata"]
    return {k: doc[k] for k in order if k in doc}


def validate_document(doc):
    jsonschema.validate(doc, MICQP_SCHEMA)


def export_micqp(Q, C, path=None):
    """Build, validate and optionally write the conic model of ``max phi`` over ``C``."""
    doc = micqp_document(Q, C)
    validate_document(doc)
    if path is not None:
        try:
            with open(path, "w") as fh:
                json.dump(doc, fh)
        except OSError as exc:
            raise IoError(f"cannot write {path}: {exc}") from exc
    return doc


def complete_point(doc, xi):
    """Auxiliary variables implied by ``xi``: ``v = S^T xi``, ``r = |v|^2`` and ``a``, ``b``."""
    n, t = doc["n"], doc["t"]
    xi = np.asarray(xi, dtype=float)
    if not t:
        return xi.copy()
    rows = doc["rows"]
    links = doc["cone"]["links"]
    v = np.array([-(np.asarray(rows[i]["coeffs"][:n]) @ xi) / rows[i]["coeffs"][n + j]
                  for j, i in enumerate(links["v_rows"])])
    r = float(v @ v)
    a = (1.0 + 2.0 * r) / (2.0 * SQRT2)
    b = (1.0 - 2.0 * r) / (2.0 * SQRT2)
    return np.concatenate([xi, v, [r, a, b]])


def evaluate_document(doc, x):
    """Objective value, maximal row residual and cone residual ``a^2 - b^2 - |v|^2`` at ``x``."""
    n, t = doc["n"], doc["t"]
    x = np.asarray(x, dtype=float)
    obj = float(np.asarray(doc["objective"]["linear"]) @ x[:n])
    if doc["objective"]["aux_r"]:
        obj -= x[doc["variables"]["r"]]
    resid = 0.0
    for rw in doc["rows"]:
        lhs = float(np.asarray(rw["coeffs"]) @ x)
        d = lhs - rw["rhs"]
        resid = max(resid, abs(d) if rw["sense"] == "=" else max(d, 0.0))
    cone = 0.0
    if t:
        var = doc["variables"]
        a, b = x[var["a"]], x[var["b"]]
        v = x[var["v"][0]:var["v"][0] + t]
        cone = float(a * a - b * b - v @ v)
    return obj, resid, cone


def load_document(path):
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    validate_document(doc)
    return doc
