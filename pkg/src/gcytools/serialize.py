"""JSON instance format for :class:`~gcytools.reduction.MomentPointData`.

::

    {
      "dim": 4,
      "phi": "1 + (0,1)*e1^e2 + (0,1)*e3^e4 + (-1,0)*e1^e2^e3^e4",
      "xi": [[0, 0, 1, 0]],
      "dmu": [[0, 0, 0, 1]]
    }

``phi`` is either a form literal (see :func:`gcytools.multivector.parse_form`)
or a list of ``[[i, j, ...], re, im]`` terms with 1-based indices.
"""

from __future__ import annotations

import json

import numpy as np

from .errors import ContractError, ParseError
from .multivector import ComplexForm, format_form, parse_form
from .reduction import MomentPointData


def _real_matrix(obj, where: str, dim: int) -> np.ndarray:
    if not isinstance(obj, list) or not obj:
        raise ParseError("expected a non-empty list of rows", where)
    rows = []
    for i, row in enumerate(obj):
        loc = f"{where}[{i}]"
        if not isinstance(row, list) or len(row) != dim:
            raise ParseError(f"expected a list of {dim} numbers", loc)
        for j, x in enumerate(row):
            if isinstance(x, bool) or not isinstance(x, (int, float)):
                raise ParseError("expected a real number", f"{loc}[{j}]")
        rows.append([float(x) for x in row])
    return np.array(rows)


def _phi(obj, dim: int) -> ComplexForm:
    if isinstance(obj, str):
        try:
            return parse_form(obj, dim)
        except ParseError as e:
            raise ParseError(e.reason, f"$.phi, {e.location}") from None
        except ContractError as e:
            raise ParseError(str(e), "$.phi") from None
    if not isinstance(obj, list):
        raise ParseError("expected a form literal or a list of terms", "$.phi")
    coeffs: dict[tuple[int, ...], complex] = {}
    for i, term in enumerate(obj):
        loc = f"$.phi[{i}]"
        if not (isinstance(term, list) and len(term) == 3 and isinstance(term[0], list)):
            raise ParseError("expected [[indices], re, im]", loc)
        idx, re, im = term
        if not all(isinstance(k, int) and not isinstance(k, bool) for k in idx):
            raise ParseError("indices must be integers", loc)
        if any(isinstance(x, bool) or not isinstance(x, (int, float)) for x in (re, im)):
            raise ParseError("coefficient parts must be numbers", loc)
        key = tuple(idx)
        coeffs[key] = coeffs.get(key, 0) + complex(re, im)
    try:
        return ComplexForm(dim, coeffs)
    except ContractError as e:
        raise ParseError(str(e), "$.phi") from None


def load_instance(text: str, source: str = "<input>") -> MomentPointData:
    """Parse an instance document; errors carry a JSON-path style location."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(e.msg, f"{source}:{e.lineno}:{e.colno}") from None
    if not isinstance(doc, dict):
        raise ParseError("top level must be an object", "$")
    for key in ("dim", "phi", "xi", "dmu"):
        if key not in doc:
            raise ParseError(f"missing field {key!r}", "$")
    dim = doc["dim"]
    if isinstance(dim, bool) or not isinstance(dim, int) or dim < 0:
        raise ParseError("dim must be a non-negative integer", "$.dim")
    phi = _phi(doc["phi"], dim)
    xi = _real_matrix(doc["xi"], "$.xi", dim)
    dmu = _real_matrix(doc["dmu"], "$.dmu", dim)
    if xi.shape != dmu.shape:
        raise ParseError(f"xi has {len(xi)} rows but dmu has {len(dmu)}", "$.dmu")
    return MomentPointData(phi, xi, dmu)


def dump_instance(d: MomentPointData) -> str:
    doc = {"dim": d.dim, "phi": format_form(d.phi), "xi": d.xi_M.tolist(), "dmu": d.dmu.tolist()}
    return json.dumps(doc, indent=2)
