"""JSON / CSV serialization shared by all report types.

JSON is emitted with a fixed key order and ``repr``-exact floats so that the
same configuration always produces byte-identical output. Non-finite floats
(not representable in strict JSON) become the strings "inf", "-inf", "nan".
"""

from __future__ import annotations

import csv
import io
import json
import math

CSV_FIELDS = ("route", "value", "err_est", "deviation", "pass")


def _clean(obj):
    if isinstance(obj, float):
        if math.isnan(obj):
            return "nan"
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        return obj
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if hasattr(obj, "item") and callable(obj.item):  # numpy scalars
        return _clean(obj.item())
    return obj


def to_json(doc: dict) -> str:
    return json.dumps(_clean(doc), indent=2, allow_nan=False) + "\n"


def to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_FIELDS, extrasaction="ignore", lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in _clean(row).items()})
    return buf.getvalue()
