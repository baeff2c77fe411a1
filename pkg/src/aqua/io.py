"""Reading and writing models, constraint sets and designs.

Model files are CSV with one design point per row. Columns prefixed ``x_``
hold coordinates, columns prefixed ``f_`` hold regressors, and an optional
``label`` column names the points. Without ``f_`` columns the regressors are
expanded from a formula stored in a sidecar JSON file ``<model>.json``.

Constraint files are JSON::

    {"n": 64,
     "rows": [{"coeffs": [...], "sense": "<=", "rhs": 7},
              {"pairs": [[0, 1.0], [5, 1.0]], "sense": ">=", "rhs": 1}],
     "bounds": {"lower": 0, "upper": [1, 1, ...]},
     "integrality": true,
     "orbits": [[0, 4, 9], ...]}

``>=`` rows are negated into ``<=`` rows on reading. Numbers are written
with ``repr`` so doubles survive a round trip unchanged.
"""

import csv
import json
import os
import re

import numpy as np

from .errors import IoError, ParseError
from .model import from_regressors
from .polytope import ConstraintSet, add_symmetry_orbits

# ----------------------------------------------------------------------------
# formulas


_TERM = re.compile(r"^([A-Za-z_]\w*)(?:\^2|\*([A-Za-z_]\w*))?$")


def parse_formula(formula, names):
    """Parse ``"1 + a + b + a*b + a^2"`` into a list of column-index tuples.

    ``()`` is the intercept, ``(i,)`` a linear term and ``(i, j)`` a product
    (``i == j`` for a square).
    """
    index = {nm: i for i, nm in enumerate(names)}
    terms = []
    for raw in formula.split("+"):
        tok = raw.replace(" ", "")
        if tok == "1":
            terms.append(())
            continue
        mt = _TERM.match(tok)
        if not mt:
            raise ParseError(f"cannot parse formula term {raw.strip()!r}")
        a = mt.group(1)
        b = mt.group(2) or (a if tok.endswith("^2") else None)
        for nm in (a, b):
            if nm is not None and nm not in index:
                raise ParseError(f"formula refers to unknown coordinate {nm!r}")
        terms.append((index[a],) if b is None else (index[a], index[b]))
    if not terms:
        raise ParseError("empty formula")
    return terms


def expand_formula(X, terms):
    X = np.asarray(X, dtype=float)
    cols = []
    for t in terms:
        if not t:
            cols.append(np.ones(len(X)))
        elif len(t) == 1:
            cols.append(X[:, t[0]])
        else:
            cols.append(X[:, t[0]] * X[:, t[1]])
    return np.column_stack(cols)


# ----------------------------------------------------------------------------
# models


def _num(s, where):
    try:
        return float(s)
    except ValueError:
        raise ParseError(f"{where}: {s!r} is not a number") from None


def sidecar_path(path):
    return os.path.splitext(path)[0] + ".json"


def read_model(path, formula=None):
    """Read a model CSV; returns a ``DesignProblem``."""
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise ParseError(f"{path}: empty model file")
    header, body = [h.strip() for h in rows[0]], [r for r in rows[1:] if r]
    if not body:
        raise ParseError(f"{path}: no design points")
    xcols = [i for i, h in enumerate(header) if h.startswith("x_")]
    fcols = [i for i, h in enumerate(header) if h.startswith("f_")]
    lcol = header.index("label") if "label" in header else None
    known = set(xcols) | set(fcols) | ({lcol} if lcol is not None else set())
    if len(known) != len(header):
        extra = [h for i, h in enumerate(header) if i not in known]
        raise ParseError(f"{path}: unknown columns {extra}")
    for k, r in enumerate(body):
        if len(r) != len(header):
            raise ParseError(f"{path}: row {k + 2} has {len(r)} fields, expected {len(header)}")
    X = np.array([[_num(r[i], f"{path}:{k + 2}") for i in xcols] for k, r in enumerate(body)]).reshape(len(body), len(xcols))
    labels = [r[lcol] for r in body] if lcol is not None else None
    if fcols:
        F = np.array([[_num(r[i], f"{path}:{k + 2}") for i in fcols] for k, r in enumerate(body)])
    else:
        if not xcols:
            raise ParseError(f"{path}: needs x_ or f_ columns")
        if formula is None:
            side = sidecar_path(path)
            if not os.path.exists(side):
                raise ParseError(f"{path}: only x_ columns and no formula sidecar {side}")
            try:
                with open(side) as fh:
                    meta = json.load(fh)
            except (OSError, ValueError) as exc:
                raise ParseError(f"cannot read formula sidecar {side}: {exc}") from exc
            if set(meta) - {"formula"} or "formula" not in meta:
                raise ParseError(f"{side}: expected exactly the key 'formula'")
            formula = meta["formula"]
        names = [header[i][2:] for i in xcols]
        F = expand_formula(X, parse_formula(formula, names))
    return from_regressors(F, points=X if xcols else None, labels=labels)


def _fmt(x):
    return repr(float(x))


def write_model(path, P, point_names=None, formula=None):
    """Write a model CSV (and a formula sidecar when ``formula`` is given).

    With ``formula`` only coordinates are written; otherwise the regressors
    are written as ``f_`` columns.
    """
    if formula is None and P.regressors is None:
        raise ParseError("only models given by regressor rows can be written")
    header, cols = [], []
    if P.labels is not None:
        header.append("label")
        cols.append([str(x) for x in P.labels])
    if P.points is not None:
        d = P.points.shape[1]
        names = point_names or [str(j + 1) for j in range(d)]
        header += [f"x_{nm}" for nm in names]
        cols += [[_fmt(x) for x in P.points[:, j]] for j in range(d)]
    elif formula is not None:
        raise ParseError("a formula needs coordinate columns")
    if formula is None:
        header += [f"f_{j + 1}" for j in range(P.m)]
        cols += [[_fmt(x) for x in P.regressors[:, j]] for j in range(P.m)]
    try:
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(header)
            wr.writerows(zip(*cols))
        if formula is not None:
            with open(sidecar_path(path), "w") as fh:
                json.dump({"formula": formula}, fh)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


# ----------------------------------------------------------------------------
# constraints

_CONSTRAINT_KEYS = {"n", "rows", "bounds", "integrality", "orbits"}
_ROW_KEYS = {"coeffs", "pairs", "sense", "rhs"}


def _vector(val, n, what, default):
    if val is None:
        return np.full(n, default, dtype=float)
    if isinstance(val, (int, float)):
        return np.full(n, float(val))
    arr = np.array([default if v is None else v for v in val], dtype=float)
    if arr.shape != (n,):
        raise ParseError(f"{what} has length {arr.size}, expected {n}")
    return arr


def constraints_from_dict(doc, n=None, validate=True):
    """Build a ``ConstraintSet`` from the JSON structure described above."""
    if not isinstance(doc, dict):
        raise ParseError("constraint document must be a JSON object")
    unknown = set(doc) - _CONSTRAINT_KEYS
    if unknown:
        raise ParseError(f"unknown constraint keys {sorted(unknown)}")
    if n is None:
        n = doc.get("n")
    elif doc.get("n") not in (None, n):
        raise ParseError(f"constraint file is for n={doc['n']}, model has n={n}")
    if n is None:
        raise ParseError("number of variables unknown: give 'n' or a model")
    A, b, eq = [], [], []
    for k, row in enumerate(doc.get("rows", [])):
        if set(row) - _ROW_KEYS:
            raise ParseError(f"row {k}: unknown keys {sorted(set(row) - _ROW_KEYS)}")
        a = np.zeros(n)
        if "coeffs" in row:
            c = np.array(row["coeffs"], dtype=float)
            if c.shape != (n,):
                raise ParseError(f"row {k}: {c.size} coefficients, expected {n}")
            a = c
        for i, v in row.get("pairs", []):
            if not 0 <= int(i) < n:
                raise ParseError(f"row {k}: index {i} out of range")
            a[int(i)] += float(v)
        sense = row.get("sense", "<=")
        rhs = float(row["rhs"])
        if sense in ("<=", "="):
            A.append(a)
            b.append(rhs)
        elif sense == ">=":
            A.append(-a)
            b.append(-rhs)
        else:
            raise ParseError(f"row {k}: sense must be <=, >= or =")
        eq.append(sense == "=")
    bounds = doc.get("bounds", {}) or {}
    if set(bounds) - {"lower", "upper"}:
        raise ParseError("bounds accepts only 'lower' and 'upper'")
    lower = _vector(bounds.get("lower"), n, "lower", 0.0)
    upper = _vector(bounds.get("upper"), n, "upper", np.inf)
    integ = doc.get("integrality", True)
    integ = np.full(n, bool(integ)) if isinstance(integ, bool) else np.array(integ, dtype=bool)
    if integ.shape != (n,):
        raise ParseError(f"integrality has length {integ.size}, expected {n}")
    C = ConstraintSet(
        A=np.array(A).reshape(len(A), n), b=np.array(b), eq=np.array(eq, dtype=bool),
        lower=lower, upper=upper, integer=integ, validate=False,
    )
    if doc.get("orbits"):
        C = add_symmetry_orbits(C, doc["orbits"])
    if validate:
        C.check_feasible()
    return C


def read_constraints(path, n=None, validate=True):
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    except ValueError as exc:
        raise ParseError(f"{path}: invalid JSON: {exc}") from exc
    return constraints_from_dict(doc, n=n, validate=validate)


def _list(v, inf_as_none=True):
    return [None if (inf_as_none and not np.isfinite(x)) else float(x) for x in v]


def constraints_to_dict(C, orbits=None, sparse=None):
    """Serializable form of ``C``; ``sparse`` switches to index/value pairs (auto for n > 200)."""
    sparse = C.n > 200 if sparse is None else sparse
    rows = []
    for i in range(C.k):
        row = {"sense": "=" if C.eq[i] else "<=", "rhs": float(C.b[i])}
        if sparse:
            nz = np.flatnonzero(C.A[i])
            row["pairs"] = [[int(j), float(C.A[i, j])] for j in nz]
        else:
            row["coeffs"] = _list(C.A[i], inf_as_none=False)
        rows.append(row)
    doc = {"n": C.n, "rows": rows, "bounds": {"lower": _list(C.lower), "upper": _list(C.upper)}}
    doc["integrality"] = bool(C.integer[0]) if np.all(C.integer == C.integer[0]) else [bool(x) for x in C.integer]
    if orbits:
        doc["orbits"] = [[int(i) for i in orb] for orb in orbits]
    return doc


def write_constraints(path, C, orbits=None, sparse=None):
    """Write ``C``. Pass ``orbits`` only when ``C`` does not already contain their rows."""
    try:
        with open(path, "w") as fh:
            json.dump(constraints_to_dict(C, orbits, sparse), fh)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


# ----------------------------------------------------------------------------
# designs


def design_document(weights, labels=None, criterion_value=None, efficiency_bound=None, report=None):
    w = np.asarray(weights, dtype=float)
    return {
        "schema": "aqua/1",
        "weights": [float(x) for x in w],
        "labels": list(labels) if labels is not None else None,
        "criterion_value": None if criterion_value is None or not np.isfinite(criterion_value) else float(criterion_value),
        "efficiency_bound": None if efficiency_bound is None else float(efficiency_bound),
        "report": report or {},
    }


def write_json(path, doc):
    try:
        with open(path, "w") as fh:
            json.dump(doc, fh, indent=1)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def read_design(path, n=None):
    """Read weights from a design JSON document, a bare JSON list, or a one-column CSV."""
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    try:
        doc = json.loads(text)
        w = doc["weights"] if isinstance(doc, dict) else doc
        w = np.array(w, dtype=float).ravel()
    except (ValueError, KeyError, TypeError):
        try:
            w = np.array([float(x) for x in text.replace(",", " ").split()])
        except ValueError as exc:
            raise ParseError(f"{path}: cannot read design weights") from exc
    if n is not None and w.shape != (n,):
        raise ParseError(f"{path}: design has length {w.size}, model has n={n}")
    return w


def write_points_csv(path, P, weights):
    """CSV of the selected points with their numbers of trials."""
    w = np.asarray(weights, dtype=float)
    idx = np.flatnonzero(w > 0)
    header = ["index", "trials"]
    if P.labels is not None:
        header.append("label")
    d = 0 if P.points is None else P.points.shape[1]
    header += [f"x_{j + 1}" for j in range(d)]
    try:
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(header)
            for i in idx:
                row = [int(i), _fmt(w[i])]
                if P.labels is not None:
                    row.append(P.labels[i])
                row += [_fmt(x) for x in (P.points[i] if d else [])]
                wr.writerow(row)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc
