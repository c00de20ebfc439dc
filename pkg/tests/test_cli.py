import json

import numpy as np
import pytest
from click.testing import CliRunner

from conftest import close, random_g
from homlie3 import __version__
from homlie3.classify import CLASS_TAGS, canonical_matrix
from homlie3.cli import decode_matrix, dumps, encode, main
from homlie3.core import act_on_product, max_abs

ID = [[[1, 0], [0, 0], [0, 0]], [[0, 0], [1, 0], [0, 0]], [[0, 0], [0, 0], [1, 0]]]


def run(args, doc=None, text=None):
    res = CliRunner().invoke(main, args, input=text if text is not None else json.dumps(doc))
    return res.exit_code, res.output


def as_json(M):
    return encode(np.asarray(M, dtype=complex))


def test_classify_examples():
    code, out = run(["classify"], {"matrix": ID})
    rep = json.loads(out)
    assert code == 0 and rep["product_class"]["tag"] == "ND2"
    assert rep["tool"]["version"] == __version__
    assert rep["tolerance"] == {"eps_rank": 1e-8, "eps_zero": 1e-9}
    code, out = run(["classify"], {"matrix": [[0, 0, 0]] * 3})
    pc = json.loads(out)["product_class"]
    assert pc["tag"] == "X_ZERO" and pc["outside_classification"]
    code, out = run(["classify"], {"matrix": [[1, 1, 0], [-1, 1, 0], [0, 0, 0]]})
    assert json.loads(out)["product_class"]["tag"] == "D2_4"


def test_exit_codes():
    assert run(["classify"], text="{not json")[0] == 2
    assert run(["classify"], {"matrix": [[1, 2]]})[0] == 2
    assert run(["classify"], {"wrong": 1})[0] == 2
    assert run(["classify"], text='{"matrix": [[1,0,0],[0,1,0],[0,0,NaN]]}')[0] == 3
    assert run(["classify"], text='{"matrix": [[1,0,0],[0,Infinity,0],[0,0,1]]}')[0] == 3
    e21 = [[0, 0, 0], [1, 0, 0], [0, 0, 0]]
    assert run(["canonicalize-endo"], {"matrix": ID, "endo": e21})[0] == 4
    assert run(["classify", "--tol-zero", "1"], {"matrix": ID})[0] == 2


def test_hl_basis_examples():
    for M, dim in ((np.diag([1, 0, 0]), 9), ([[0, 0, 0], [-2, 0, 1], [0, 1, 0]], 7), (np.eye(3), 6)):
        code, out = run(["hl-basis"], {"matrix": as_json(M)})
        rep = json.loads(out)
        assert code == 0 and rep["hl_basis"]["dim"] == dim
        assert len(rep["hl_basis"]["basis"]) == dim


def test_canonicalize_examples():
    code, out = run(["canonicalize-endo"], {"matrix": ID, "endo": ID})
    assert code == 0 and json.loads(out)["endo_form"]["branch"] == "ND2/scalar"
    # rank-1 datum written in the {H, E, F} basis, moved back to the standard basis
    from homlie3.endo import basis_change
    from homlie3.sl2 import shl_matrix

    h = basis_change("ND2")
    T = np.linalg.inv(h) @ shl_matrix([0, 0, 0, 1, 0]) @ h
    code, out = run(["canonicalize-endo"], {"matrix": ID, "endo": as_json(T)})
    rep = json.loads(out)["endo_form"]
    assert code == 0 and rep["branch"] == "ND2/rank1"
    G = decode_matrix(rep["composed_witness"])
    assert close(G @ T @ np.linalg.inv(G), decode_matrix(rep["canonical_T"]), rel=1e-6)
    assert close(act_on_product(G, np.eye(3)), decode_matrix(rep["working_product"]))


def test_isomorphic_examples(rng):
    g = random_g(rng)
    M2 = act_on_product(g, np.eye(3))
    pair = {"pairs": [{"matrix": ID, "endo": ID}, {"matrix": as_json(M2), "endo": ID}]}
    code, out = run(["isomorphic", "--seed", "3"], pair)
    rep = json.loads(out)
    assert code == 0 and rep["result"] == "yes" and rep["seed"] == 3
    pair = {"pairs": [{"matrix": ID, "endo": ID}, {"matrix": as_json(np.diag([1, 0, 0])), "endo": ID}]}
    assert json.loads(run(["isomorphic"], pair)[1])["result"] == "no"


def test_tables():
    code, out = run(["tables"], text="")
    rep = json.loads(out)
    classes = rep["classes"]
    assert code == 0 and len(classes) == 12
    assert sum(not c["outside_classification"] for c in classes) == 10
    for c in classes:
        assert c["classifies_to_self"] and c["witness_is_identity"]
        tag = c["tag"]
        if tag in CLASS_TAGS:
            assert decode_matrix(c["canonical_matrix"]).tobytes() == canonical_matrix(tag).tobytes()
    dims = {c["tag"]: c["hl_dim"] for c in classes}
    assert dims == {"ND1": 6, "ND2": 6, "ND3": 6, "D2_1": 6, "D2_2": 7, "D2_3": 7, "D2_4": 7,
                    "D1_1": 6, "D1_2": 9, "D1_3": 7, "X_PURE_SKEW": 7, "X_ZERO": 9}
    assert rep["exceptional_hl_dims"]["ND1 a=+-i"] == 7


@pytest.mark.parametrize("cmd,doc", [
    (["classify"], {"matrix": [[1, 2, 0.5], [-1, 3, [0, 1]], [0, 1, 0]]}),
    (["hl-basis"], {"matrix": [[1, 0, 0], [0, 1, -2], [0, 2, 1]]}),
    (["canonicalize-endo"], {"matrix": ID, "endo": [[0.3, 0, 0], [0, 0.3, 0], [0, 0, 0.3]]}),
    (["tables"], None),
])
def test_round_trip_is_byte_identical(cmd, doc):
    code, out = run(cmd, doc, text="" if doc is None else None)
    assert code == 0
    assert dumps(json.loads(out)) == out


def test_witness_reverification(rng):
    for _ in range(20):
        M = act_on_product(random_g(rng), canonical_matrix(CLASS_TAGS[rng.integers(10)]))
        rep = json.loads(run(["classify"], {"matrix": as_json(M)})[1])
        pc = rep["product_class"]
        W = decode_matrix(pc["witness"])
        got = act_on_product(W, decode_matrix(rep["input"]["matrix"]))
        C = decode_matrix(pc["canonical_matrix"])
        assert max_abs(got - C) <= 1e-7 * max(1.0, max_abs(C))


def test_file_input(tmp_path):
    p = tmp_path / "in.json"
    p.write_text(json.dumps({"matrix": ID}), encoding="utf-8")
    code, out = run(["classify", "--in", str(p)], text="")
    assert code == 0 and json.loads(out)["product_class"]["tag"] == "ND2"
