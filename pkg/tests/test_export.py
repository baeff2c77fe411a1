import json

import numpy as np
import pytest

from aqua import ConstraintSet, Criterion, build, export_micqp, from_regressors
from aqua.errors import IoError
from aqua.export import complete_point, evaluate_document, load_document, rotation_matrix, validate_document
from conftest import random_spd


def make(rng, m=3, n=12, crit=Criterion("negative", 1)):
    P = from_regressors(rng.standard_normal((n, m)))
    Q = build(P, crit, random_spd(rng, m) * 3)
    C = ConstraintSet(A=[np.ones(n), np.r_[np.ones(4), np.zeros(n - 4)]], b=[6.0, 2.0], eq=[True, False])
    return Q, C


def test_round_trip(rng, tmp_path):
    Q, C = make(rng)
    path = tmp_path / "model.json"
    doc = export_micqp(Q, C, path)
    doc2 = load_document(path)
    assert doc2 == json.loads(json.dumps(doc))
    for _ in range(100):
        xi = rng.integers(0, 3, Q.n).astype(float)
        x = complete_point(doc2, xi)
        obj, _, cone = evaluate_document(doc2, x)
        phi = Q.phi(xi)
        assert abs(obj - phi) <= 1e-9 * max(1.0, abs(phi))
        assert abs(cone) <= 1e-9 * max(1.0, x[doc2["variables"]["r"]])
        # auxiliary rows hold exactly; C's own rows are the design's business
        _, resid_aux, _ = evaluate_document({**doc2, "rows": doc2["rows"][C.k:]}, x)
        assert resid_aux <= 1e-9 * max(1.0, np.abs(x).max())


def test_linear_case_has_no_cone(tmp_path):
    P = from_regressors(np.array([[1.0], [2.0]]))
    Q = build(P, Criterion(), np.array([[2.0]]))
    doc = export_micqp(Q, ConstraintSet.size(2, 3))
    assert Q.t == 0 and "cone" not in doc and not doc["objective"]["aux_r"]
    assert evaluate_document(doc, np.array([1.0, 2.0]))[0] == pytest.approx(Q.phi([1.0, 2.0]))


def test_rotation_is_orthogonal():
    V = rotation_matrix(4)
    assert np.allclose(V @ V.T, np.eye(6))
    # (1, 0, ..., 0) lies in the cone: 1 >= |0|
    e = np.zeros(6)
    e[0] = 1.0
    assert e[0] >= np.linalg.norm(e[1:])


def test_schema_rejects_bad_documents(rng):
    import jsonschema

    Q, C = make(rng)
    doc = export_micqp(Q, C)
    bad = dict(doc, schema="other/2")
    with pytest.raises(jsonschema.ValidationError):
        validate_document(bad)
    with pytest.raises(IoError):
        export_micqp(Q, C, "/nonexistent/dir/model.json")
