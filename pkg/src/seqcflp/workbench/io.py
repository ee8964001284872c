"""Instance file format.

One self-describing JSON document per instance::

    {
      "version": 1,
      "p": 2, "r": 2,
      "customers": [{"h": 0.05, "uL": 0.0, "uF": 0.0, "w": [...]}, ...],
      "geometry": {"beta": ..., "alpha": [...], "customer_xy": [...],
                   "site_xy": [...], "seed": ..., "square_side": ...,
                   "demand": "uniform"}   // optional
    }

Floats are serialized as shortest round-trip decimals (Python repr), so
``write . read`` is the identity on canonical files.  Schema violations
are reported with the path of the offending field.
"""

from __future__ import annotations

import json
import os

from ..model import Instance

__all__ = [
    "InstanceFormatError",
    "document_from_instance",
    "instance_from_document",
    "read_document",
    "read_instance",
    "write_instance",
    "dumps_document",
]

FORMAT_VERSION = 1


class InstanceFormatError(ValueError):
    """A malformed instance document; the message carries the field path."""


def document_from_instance(inst: Instance, geometry: dict | None = None) -> dict:
    doc = {
        "version": FORMAT_VERSION,
        "p": inst.p,
        "r": inst.r,
        "customers": [
            {
                "h": float(inst.h[i]),
                "uL": float(inst.ul[i]),
                "uF": float(inst.uf[i]),
                "w": [float(v) for v in inst.w[i]],
            }
            for i in range(inst.num_customers)
        ],
    }
    if geometry is not None:
        doc["geometry"] = geometry
    return doc


def _fail(path: str, why: str):
    raise InstanceFormatError(f"{path}: {why}")


def _number(doc, path, minimum=None) -> float:
    if isinstance(doc, bool) or not isinstance(doc, (int, float)):
        _fail(path, "must be a number")
    value = float(doc)
    if minimum is not None and value < minimum:
        _fail(path, f"must be >= {minimum}")
    return value


def _positive_int(doc, path) -> int:
    if isinstance(doc, bool) or not isinstance(doc, int):
        _fail(path, "must be an integer")
    if doc < 1:
        _fail(path, "must be >= 1")
    return doc


def instance_from_document(doc: dict) -> Instance:
    """Validate a document and build the in-memory instance."""
    if not isinstance(doc, dict):
        _fail("instance", "must be a JSON object")
    version = doc.get("version", FORMAT_VERSION)
    if version != FORMAT_VERSION:
        _fail("instance.version", f"unsupported version {version!r}")
    p = _positive_int(doc.get("p"), "instance.p")
    r = _positive_int(doc.get("r"), "instance.r")
    customers = doc.get("customers")
    if not isinstance(customers, list) or not customers:
        _fail("instance.customers", "must be a non-empty array")
    n_sites = None
    h, ul, uf, w = [], [], [], []
    for i, row in enumerate(customers):
        path = f"instance.customers[{i}]"
        if not isinstance(row, dict):
            _fail(path, "must be an object")
        h.append(_number(row.get("h"), f"{path}.h", minimum=0.0))
        ul.append(_number(row.get("uL", 0.0), f"{path}.uL", minimum=0.0))
        uf.append(_number(row.get("uF", 0.0), f"{path}.uF", minimum=0.0))
        weights = row.get("w")
        if not isinstance(weights, list) or not weights:
            _fail(f"{path}.w", "must be a non-empty array")
        if n_sites is None:
            n_sites = len(weights)
        elif len(weights) != n_sites:
            _fail(f"{path}.w", f"expected {n_sites} entries, got {len(weights)}")
        row_w = []
        for j, value in enumerate(weights):
            v = _number(value, f"{path}.w[{j}]")
            if v <= 0:
                _fail(f"{path}.w[{j}]", "must be > 0")
            row_w.append(v)
        w.append(row_w)
    try:
        return Instance(h=h, w=w, ul=ul, uf=uf, p=p, r=r)
    except ValueError as exc:
        raise InstanceFormatError(f"instance: {exc}") from exc


def dumps_document(doc: dict) -> str:
    return json.dumps(doc, indent=2) + "\n"


def write_instance(inst: Instance, path: str, geometry: dict | None = None) -> None:
    text = dumps_document(document_from_instance(inst, geometry))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def read_document(path: str) -> dict:
    if not os.path.exists(path):
        raise InstanceFormatError(f"instance: file not found: {path}")
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InstanceFormatError(f"instance: invalid JSON ({exc})") from exc
    instance_from_document(doc)  # validate eagerly; callers get a clean doc
    return doc


def read_instance(path: str) -> Instance:
    return instance_from_document(read_document(path))
