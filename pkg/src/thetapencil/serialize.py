"""Versioned JSON documents for structure-constant tensors.

Layout::

    {"schema": 1, "dim": N, "exact": bool,
     "tensors": [{"label": ..., "entries": [[i, j, k, re, im], ...]}, ...],
     "meta": {...}}

Entries are sparse and sorted.  Floats are written with Python's shortest
round-trip repr.  Exact rationals are written as ``"p/q"`` strings in the
``re`` slot with ``"0"`` in the ``im`` slot; cyclotomic values carry a
``"field": "Q(zeta_n)"`` tag on the tensor and the entry is
``[i, j, k, [coord_0, ..., coord_{phi(n)-1}]]`` on the power basis of zeta_n.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .degenerate import Cyclo, ExactStructure
from .lie import LieStructure

SCHEMA_VERSION = 1


class SchemaError(ValueError):
    pass


@dataclass
class Document:
    dim: int
    exact: bool
    tensors: list  # [(label, LieStructure | ExactStructure)]
    meta: dict = field(default_factory=dict)

    def structures(self) -> list:
        return [t for _, t in self.tensors]


def _frac(v) -> str:
    v = Fraction(v)
    return f"{v.numerator}/{v.denominator}"


def _parse_frac(s: str) -> Fraction:
    if not isinstance(s, str):
        raise SchemaError(f"exact value must be a 'p/q' string, got {s!r}")
    return Fraction(s)


def _tensor_to_json(label: str, t) -> dict:
    if isinstance(t, ExactStructure):
        cyclo_n = {v.n for v in t.entries.values() if isinstance(v, Cyclo) and not v.is_rational()}
        if len(cyclo_n) > 1:
            raise SchemaError("mixed cyclotomic fields in one tensor")
        out: dict = {"label": label}
        entries = []
        if cyclo_n:
            n = cyclo_n.pop()
            out["field"] = f"Q(zeta_{n})"
            for key in sorted(t.entries):
                v = t.entries[key]
                v = v if isinstance(v, Cyclo) else Cyclo.rational(n, v)
                entries.append([*key, [_frac(c) for c in v.coeffs]])
        else:
            for key in sorted(t.entries):
                v = t.entries[key]
                q = v.coeffs[0] if isinstance(v, Cyclo) else v
                entries.append([*key, _frac(q), "0"])
        out["entries"] = entries
        return out
    c = t.c if isinstance(t, LieStructure) else np.asarray(t)
    idx = np.argwhere(c != 0)
    entries = [[int(i), int(j), int(k), float(c[i, j, k].real), float(c[i, j, k].imag)]
               for i, j, k in sorted(map(tuple, idx))]
    return {"label": label, "entries": entries}


def _tensor_from_json(obj: dict, dim: int, exact: bool):
    label = obj.get("label", "")
    entries = obj.get("entries")
    if entries is None:
        raise SchemaError("tensor without entries")
    if exact:
        fld = obj.get("field")
        vals = {}
        if fld is None:
            for e in entries:
                i, j, k, re, im = e
                if _parse_frac(im) != 0:
                    raise SchemaError("exact rational tensor with nonzero imaginary part")
                vals[(i, j, k)] = _parse_frac(re)
        else:
            if not (fld.startswith("Q(zeta_") and fld.endswith(")")):
                raise SchemaError(f"unknown field {fld!r}")
            n = int(fld[7:-1])
            for e in entries:
                i, j, k, coords = e
                vals[(i, j, k)] = Cyclo.make(n, [_parse_frac(s) for s in coords])
        return ExactStructure(dim, vals, label)
    c = np.zeros((dim,) * 3, dtype=complex)
    for e in entries:
        i, j, k, re, im = e
        c[i, j, k] = complex(float(re), float(im))
    return LieStructure(c, label)


def to_json(doc: Document) -> str:
    body = {
        "schema": SCHEMA_VERSION,
        "dim": doc.dim,
        "exact": doc.exact,
        "tensors": [_tensor_to_json(label, t) for label, t in doc.tensors],
        "meta": doc.meta,
    }
    # one entry per line keeps diffs readable
    tensors = []
    for t in body["tensors"]:
        head = {k: v for k, v in t.items() if k != "entries"}
        rows = ",\n".join("   " + json.dumps(e) for e in t["entries"])
        tensors.append("  {" + json.dumps(head, sort_keys=True)[1:-1] + ', "entries": [\n' + rows + "\n  ]}")
    return ("{\n"
            f' "schema": {SCHEMA_VERSION},\n'
            f' "dim": {json.dumps(body["dim"])},\n'
            f' "exact": {json.dumps(body["exact"])},\n'
            f' "meta": {json.dumps(body["meta"], sort_keys=True)},\n'
            ' "tensors": [\n' + ",\n".join(tensors) + "\n ]\n}\n")


def from_json(text: str) -> Document:
    try:
        body = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"not valid JSON: {exc}") from exc
    version = body.get("schema")
    if version != SCHEMA_VERSION:
        raise SchemaError(f"schema version {version!r} is not supported (expected {SCHEMA_VERSION})")
    dim = int(body["dim"])
    exact = bool(body["exact"])
    tensors = [(t.get("label", ""), _tensor_from_json(t, dim, exact)) for t in body["tensors"]]
    return Document(dim, exact, tensors, body.get("meta", {}))
