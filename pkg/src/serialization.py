"""
JSON formats for series, multivectors, algebras, factorisations, changes of
variables and reports. Coefficients are exact strings; output order is
graded-lex for exponents and (size, indices) for subsets.
"""

import json
import logging
from fractions import Fraction
from pathlib import Path
from typing import Any, Optional

import numpy as np

from src.ainfinity.deformation import AInfinityDeformation
from src.ainfinity.relations import check_superfiltered_unital
from src.algebra.diffeo import FormalDiffeo
from src.algebra.exterior import Multivector, basis_masks, indices_to_mask, mask_to_indices
from src.algebra.scalars import GroundRing, parse_ring
from src.algebra.series import TruncatedSeries, laurent_expand, monomial_key, parse_laurent
from src.mf.factorization import MatrixFactorization
from src.shared_models import CertifiedWindow, InvalidInputError, NotInvertibleError

logger = logging.getLogger(__name__)

TOOL_VERSION = "0.1.0"


def _require(data: dict, *keys: str) -> None:
    if not isinstance(data, dict):
        raise InvalidInputError(f"Expected a JSON object, got {type(data).__name__}")
    missing = [k for k in keys if k not in data]
    if missing:
        raise InvalidInputError(f"Missing fields: {', '.join(missing)}")


def _header(ring: GroundRing, nvars: int, order: Optional[int]) -> dict:
    return {"ring": ring.to_json(), "vars": nvars, "order": order}


# -- series -------------------------------------------------------------------


def series_terms_to_json(s: TruncatedSeries) -> list:
    return [{"exp": list(alpha), "coeff": s.ring.format(c)}
            for alpha, c in sorted(s.terms.items(), key=lambda t: monomial_key(t[0]))]


def series_terms_from_json(terms, ring: GroundRing, nvars: int,
                           order: Optional[int]) -> TruncatedSeries:
    if isinstance(terms, (str, int)):
        return TruncatedSeries.constant(ring, nvars, ring.element(terms), order)
    table = {}
    for term in terms:
        _require(term, "exp", "coeff")
        alpha = tuple(int(e) for e in term["exp"])
        if len(alpha) != nvars or any(e < 0 for e in alpha):
            raise InvalidInputError(f"Bad exponent vector {term['exp']} for {nvars} variables")
        try:
            value = ring.element(str(term["coeff"]))
        except (ValueError, ZeroDivisionError, NotInvertibleError) as e:
            raise InvalidInputError(f"Bad coefficient {term['coeff']!r}") from e
        table[alpha] = ring.reduce(table.get(alpha, ring.zero) + value)
    return TruncatedSeries(ring, nvars, table, order)


def series_to_json(s: TruncatedSeries) -> dict:
    data = _header(s.ring, s.nvars, s.order)
    data["terms"] = series_terms_to_json(s)
    return data


def series_from_json(data: dict) -> TruncatedSeries:
    _require(data, "vars", "terms")
    ring = parse_ring(data.get("ring", {"kind": "Q"}))
    return series_terms_from_json(data["terms"], ring, int(data["vars"]), data.get("order"))


# -- multivectors ---------------------------------------------------------------


def multivector_to_json(a: Multivector) -> dict:
    return {"terms": [{"indices": mask_to_indices(m), "coeff": series_terms_to_json(c)}
                      for m, c in a.items()]}


def multivector_from_json(data: dict, ring: GroundRing, nvars: int,
                          order: Optional[int] = None) -> Multivector:
    _require(data, "terms")
    out = {}
    for term in data["terms"]:
        _require(term, "indices", "coeff")
        indices = [int(i) for i in term["indices"]]
        if any(not 1 <= i <= nvars for i in indices) or len(set(indices)) != len(indices):
            raise InvalidInputError(f"Bad subset {term['indices']} for {nvars} variables")
        mask = indices_to_mask(indices)
        coeff = series_terms_from_json(term["coeff"], ring, nvars, order)
        out[mask] = out[mask] + coeff if mask in out else coeff
    return Multivector(ring, nvars, out)


# -- algebras -------------------------------------------------------------------


def algebra_to_json(A: AInfinityDeformation) -> dict:
    data = _header(A.ring, A.nvars, A.order)
    data["arity_cap"] = A.arity_cap
    data["name"] = A.name
    index = {m: k for k, m in enumerate(basis_masks(A.nvars))}
    ops = sorted(A.ops.items(), key=lambda t: (len(t[0]), [index[m] for m in t[0]]))
    data["ops"] = [{"k": len(masks), "inputs": [mask_to_indices(m) for m in masks],
                    "output": multivector_to_json(value)} for masks, value in ops]
    return data


def algebra_from_json(data: dict, validate: bool = True) -> AInfinityDeformation:
    """Load an algebra; with ``validate`` a failed unitality/grading check is an input error."""
    _require(data, "vars", "order", "arity_cap", "ops")
    ring = parse_ring(data.get("ring", {"kind": "Q"}))
    n = int(data["vars"])
    ops = {}
    for op in data["ops"]:
        _require(op, "inputs", "output")
        masks = tuple(indices_to_mask(int(i) for i in inputs) for inputs in op["inputs"])
        if "k" in op and int(op["k"]) != len(masks):
            raise InvalidInputError(f"Operation declares k={op['k']} but has {len(masks)} inputs")
        ops[masks] = multivector_from_json(op["output"], ring, n)
    A = AInfinityDeformation(ring, n, int(data["arity_cap"]), int(data["order"]), ops,
                             name=data.get("name", ""))
    if validate:
        report = check_superfiltered_unital(A)
        if not report["is_valid"]:
            raise InvalidInputError(f"Algebra fails validation: {report['issues'][0]}")
    logger.debug(f"Loaded algebra {A.name!r} with {len(ops)} operations")
    return A


# -- factorisations and changes of variables --------------------------------------


def factorization_to_json(X: MatrixFactorization) -> dict:
    data = _header(X.ring, X.nvars, X.order)
    data["name"] = X.name
    data["potential"] = series_to_json(X.potential)
    data["basis"] = [mask_to_indices(m) for m in X.basis]
    data["matrix"] = [[series_to_json(entry) for entry in row] for row in X.matrix]
    return data


def factorization_from_json(data: dict) -> MatrixFactorization:
    _require(data, "vars", "potential", "matrix")
    w = series_from_json(data["potential"])
    size = 1 << w.nvars
    rows = data["matrix"]
    if len(rows) != size or any(len(row) != size for row in rows):
        raise InvalidInputError(f"Factorisation matrix must be {size}x{size}")
    matrix = np.empty((size, size), dtype=object)
    for r, row in enumerate(rows):
        for c, entry in enumerate(row):
            matrix[r, c] = series_from_json(entry)
    return MatrixFactorization(w, matrix, name=data.get("name", ""))


def diffeo_to_json(f: FormalDiffeo) -> dict:
    data = _header(f.ring, f.nvars, f.order)
    data["components"] = [series_terms_to_json(c) for c in f.components]
    return data


def diffeo_from_json(data: dict) -> FormalDiffeo:
    _require(data, "vars", "components")
    ring = parse_ring(data.get("ring", {"kind": "Q"}))
    n = int(data["vars"])
    return FormalDiffeo([series_terms_from_json(c, ring, n, data.get("order"))
                         for c in data["components"]])


# -- reports and files ------------------------------------------------------------


def to_jsonable(obj: Any) -> Any:
    """Recursively convert a report into plain JSON values."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, Fraction):
        return str(obj.numerator) if obj.denominator == 1 else f"{obj.numerator}/{obj.denominator}"
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, CertifiedWindow):
        return obj.as_dict()
    if isinstance(obj, TruncatedSeries):
        return series_to_json(obj)
    if isinstance(obj, Multivector):
        return multivector_to_json(obj)
    if isinstance(obj, FormalDiffeo):
        return diffeo_to_json(obj)
    if isinstance(obj, AInfinityDeformation):
        return algebra_to_json(obj)
    if isinstance(obj, MatrixFactorization):
        return factorization_to_json(obj)
    return obj


def report_to_json(report: dict, window: Optional[CertifiedWindow] = None) -> dict:
    data = to_jsonable(report)
    if window is not None:
        data["certified"] = {**window.as_dict(), **data.get("certified", {})}
    data["version"] = TOOL_VERSION
    return data


def dumps(data: Any) -> str:
    return json.dumps(to_jsonable(data), indent=2, sort_keys=False)


def read_json(path) -> Any:
    try:
        with open(path, "r") as f:
            return json.load(f)
    except FileNotFoundError as e:
        raise InvalidInputError(f"File not found: {path}") from e
    except json.JSONDecodeError as e:
        raise InvalidInputError(f"Malformed JSON in {path}: {e}") from e


def write_json(path, data: Any) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(data) + "\n")
    logger.info(f"Wrote {path}")


def potential_from_json(data: dict, ring: Optional[GroundRing] = None,
                        order: Optional[int] = None) -> TruncatedSeries:
    """Series JSON, or {"laurent": terms, "rho": [...], "order": N} expanded at z = rho (1 + x)."""
    if ring is not None:
        data = {**data, "ring": ring.to_json()}
    if "laurent" in data:
        _require(data, "rho")
        order = order if order is not None else data.get("order")
        if order is None:
            raise InvalidInputError("A Laurent potential needs an expansion order")
        s = laurent_expand(parse_laurent(data["laurent"]), data["rho"], int(order),
                           parse_ring(data.get("ring", {"kind": "Q"})))
    else:
        s = series_from_json(data)
    return s.truncate(order) if order is not None else s


def load_potential(path, ring: Optional[GroundRing] = None,
                   order: Optional[int] = None) -> TruncatedSeries:
    """Potential file, re-read over ``ring`` and at ``order`` when given."""
    return potential_from_json(read_json(path), ring, order)
