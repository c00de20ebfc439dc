"""Command line front end: JSON in, JSON reports out.

Complex numbers are written as [re, im] pairs and matrices as row-major
nested lists.  Plain real numbers are accepted on input.  Reports are
dumped with sorted keys, so parsing a report and dumping it again gives
the same bytes.

Exit codes: 0 success, 2 unparsable input, 3 non-finite numbers,
4 a semantic precondition failed (for instance T is not in HL).
"""

from __future__ import annotations

import json
import sys
from typing import Any

import click
import numpy as np

from . import __version__
from .classify import (
    ALL_TAGS,
    CATALOG_PARAMETERS,
    CLASS_TAGS,
    ProductClass,
    canonical_matrix,
    classify_product,
)
from .core import GroupElement, HomLieError, NonFiniteInput, NotInHL, Tolerance, max_abs
from .endo import (
    ISOTROPY_DESCRIPTIONS,
    canonicalize_endo,
    hl_algebras_isomorphic,
    to_working,
    working_product,
)
from .hl import hl_basis, hl_contains

EXIT_PARSE, EXIT_NUMERIC, EXIT_SEMANTIC = 2, 3, 4


class InputError(Exception):
    pass


# ---------------------------------------------------------------- encoding


def encode(x: Any) -> Any:
    """Turn library values into plain JSON values."""
    if isinstance(x, GroupElement):
        return encode(x.matrix)
    if isinstance(x, np.ndarray):
        return [encode(v) for v in x.tolist()]
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return float(x)
    if isinstance(x, dict):
        return {str(k): encode(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [encode(v) for v in x]
    if x is None or isinstance(x, str):
        return x
    raise TypeError(f"cannot encode {type(x).__name__}")


def dumps(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def _number(v) -> complex:
    if isinstance(v, bool):
        raise InputError("booleans are not numbers")
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, list) and len(v) == 2 and all(
        isinstance(t, (int, float)) and not isinstance(t, bool) for t in v
    ):
        return complex(v[0], v[1])
    raise InputError(f"expected a number or an [re, im] pair, got {v!r}")


def decode_matrix(obj) -> np.ndarray:
    if not (isinstance(obj, list) and len(obj) == 3 and all(isinstance(r, list) and len(r) == 3 for r in obj)):
        raise InputError("a matrix must be a 3x3 row-major nested list")
    M = np.array([[_number(v) for v in row] for row in obj], dtype=complex)
    if not np.all(np.isfinite(M)):
        raise NonFiniteInput("matrix has non-finite entries")
    return M


def _field(doc: dict, key: str):
    if not isinstance(doc, dict) or key not in doc:
        raise InputError(f"missing field {key!r}")
    return doc[key]


# ---------------------------------------------------------------- report pieces


def product_report(pc: ProductClass) -> dict:
    return {
        "tag": pc.tag,
        "parameter": pc.parameter,
        "canonical_matrix": pc.canonical_matrix,
        "witness": pc.witness,
        "outside_classification": pc.outside_classification,
        "diagnostics": pc.diagnostics,
    }


def _header(command: str, tol: Tolerance, inputs: dict) -> dict:
    return {
        "tool": {"name": "homlie3", "version": __version__},
        "command": command,
        "tolerance": {"eps_zero": tol.eps_zero, "eps_rank": tol.eps_rank},
        "input": inputs,
    }


def run_classify(doc: dict, tol: Tolerance) -> dict:
    M = decode_matrix(_field(doc, "matrix"))
    rep = _header("classify", tol, {"matrix": M})
    rep["product_class"] = product_report(classify_product(M, tol))
    return encode(rep)


def run_hl_basis(doc: dict, tol: Tolerance) -> dict:
    M = decode_matrix(_field(doc, "matrix"))
    rep = _header("hl-basis", tol, {"matrix": M})
    rep["product_class"] = product_report(classify_product(M, tol))
    B = hl_basis(M, tol)
    rep["hl_basis"] = {"dim": B.dim, "basis": list(B.basis)}
    return encode(rep)


def run_canonicalize(doc: dict, tol: Tolerance) -> dict:
    M = decode_matrix(_field(doc, "matrix"))
    T = decode_matrix(_field(doc, "endo"))
    if not hl_contains(M, T, tol):
        raise NotInHL("the endomorphism is not in HL of the product")
    pc, G = to_working(M, tol)
    if pc.tag not in CLASS_TAGS:
        raise NotInHL(f"no canonical twist forms are defined for class {pc.tag}")
    S = G @ T @ np.linalg.inv(G)
    F = canonicalize_endo(pc.tag, S, pc.parameter, tol)
    composed = F.witness.matrix.matrix @ G
    rep = _header("canonicalize-endo", tol, {"matrix": M, "endo": T})
    rep["product_class"] = product_report(pc)
    rep["endo_form"] = {
        "class_tag": F.class_tag,
        "branch": F.branch,
        "canonical_T": F.canonical_T,
        "working_product": working_product(pc.tag, pc.parameter),
        "isotropy_witness": F.witness.matrix,
        "isotropy_parameters": F.witness.parameters,
        "composed_witness": composed,
        "residual_parameters": list(F.residual_parameters),
    }
    return encode(rep)


def run_isomorphic(doc: dict, tol: Tolerance, seed: int) -> dict:
    pairs = _field(doc, "pairs")
    if not (isinstance(pairs, list) and len(pairs) == 2):
        raise InputError("'pairs' must hold exactly two {matrix, endo} objects")
    (M1, T1), (M2, T2) = [
        (decode_matrix(_field(p, "matrix")), decode_matrix(_field(p, "endo"))) for p in pairs
    ]
    verdict = hl_algebras_isomorphic(M1, T1, M2, T2, seed=seed, tol=tol)
    rep = _header("isomorphic", tol, {"pairs": [{"matrix": M1, "endo": T1}, {"matrix": M2, "endo": T2}]})
    rep["seed"] = seed
    rep["product_classes"] = [product_report(classify_product(M, tol)) for M in (M1, M2)]
    rep["result"] = verdict
    return encode(rep)


def run_tables(tol: Tolerance) -> dict:
    classes = []
    for tag in ALL_TAGS:
        p = CATALOG_PARAMETERS.get(tag)
        C = canonical_matrix(tag, p)
        pc = classify_product(C, tol)
        classes.append({
            "tag": tag,
            "parameter": p,
            "canonical_matrix": C,
            "outside_classification": pc.outside_classification,
            "classifies_to_self": pc.tag == tag,
            "witness_is_identity": max_abs(pc.witness.matrix - np.eye(3)) <= 1e-7,
            "hl_dim": hl_basis(C, tol).dim,
            "isotropy": ISOTROPY_DESCRIPTIONS.get(tag, "not described"),
        })
    exceptional = {
        "ND1 a=+-i": hl_basis(canonical_matrix("ND1", 1j), tol).dim,
        "D2_4 z=+-i": hl_basis(canonical_matrix("D2_4", 1j), tol).dim,
    }
    rep = _header("tables", tol, {})
    rep["classes"] = classes
    rep["exceptional_hl_dims"] = exceptional
    return encode(rep)


# ---------------------------------------------------------------- click


def _read(path: str | None) -> dict:
    text = open(path, encoding="utf-8").read() if path else sys.stdin.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise InputError("top-level JSON value must be an object")
    return doc


def _execute(fn):
    try:
        report = fn()
    except InputError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_PARSE)
    except NonFiniteInput as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_NUMERIC)
    except HomLieError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_SEMANTIC)
    click.echo(dumps(report), nl=False)


def _common(f):
    f = click.option("--in", "in_path", type=click.Path(dir_okay=False), default=None,
                     help="Read JSON from this file instead of stdin.")(f)
    f = click.option("--tol-zero", type=float, default=None, help="Absolute zero threshold.")(f)
    f = click.option("--tol-rank", type=float, default=None, help="Relative rank threshold.")(f)
    return f


def _tol(tol_zero, tol_rank) -> Tolerance:
    kw = {}
    if tol_zero is not None:
        kw["eps_zero"] = tol_zero
    if tol_rank is not None:
        kw["eps_rank"] = tol_rank
    try:
        return Tolerance(**kw)
    except ValueError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_PARSE)


@click.group()
@click.version_option(__version__, prog_name="homlie3")
def main() -> None:
    """Classify 3-dimensional products and their Hom-Lie twist maps."""


@main.command()
@_common
def classify(in_path, tol_zero, tol_rank):
    """Classify the product in {"matrix": ...}."""
    tol = _tol(tol_zero, tol_rank)
    _execute(lambda: run_classify(_read(in_path), tol))


@main.command("hl-basis")
@_common
def hl_basis_cmd(in_path, tol_zero, tol_rank):
    """Basis of HL for the product in {"matrix": ...}."""
    tol = _tol(tol_zero, tol_rank)
    _execute(lambda: run_hl_basis(_read(in_path), tol))


@main.command("canonicalize-endo")
@_common
def canonicalize_cmd(in_path, tol_zero, tol_rank):
    """Canonical form of {"matrix": M, "endo": T} under the isotropy of M."""
    tol = _tol(tol_zero, tol_rank)
    _execute(lambda: run_canonicalize(_read(in_path), tol))


@main.command()
@_common
@click.option("--seed", type=int, default=0, show_default=True, help="Seed of the randomized search.")
def isomorphic(in_path, tol_zero, tol_rank, seed):
    """Decide whether {"pairs": [{matrix, endo}, {matrix, endo}]} are isomorphic."""
    tol = _tol(tol_zero, tol_rank)
    _execute(lambda: run_isomorphic(_read(in_path), tol, seed))


@main.command()
@click.option("--tol-zero", type=float, default=None)
@click.option("--tol-rank", type=float, default=None)
def tables(tol_zero, tol_rank):
    """Catalog of canonical products with HL dimensions and isotropy groups."""
    tol = _tol(tol_zero, tol_rank)
    _execute(lambda: run_tables(tol))


if __name__ == "__main__":  # pragma: no cover
    main()
