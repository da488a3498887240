"""Report records: versioned JSON payloads and flattened CSV.

The determinism contract lives here: `payload_json` serializes the schema
tag, the config echo, and the result (never the wall-clock duration) with
sorted keys, so equal experiments compare byte for byte.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from fractions import Fraction

__all__ = [
    "Report",
    "rational",
    "encode_valuation",
    "valuation_histogram_payload",
    "to_json",
    "payload_json",
    "flatten_rows",
    "to_csv",
    "schema_resource",
    "SCHEMA_FILES",
]

SCHEMA_FILES = {
    "digitlab.moments/1": "moments.v1.json",
    "digitlab.digit_pairs/1": "digit_pairs.v1.json",
    "digitlab.clt/1": "clt.v1.json",
    "digitlab.landau/1": "landau.v1.json",
    "digitlab.scan/1": "scan.v1.json",
    "digitlab.trend/1": "trend.v1.json",
    "digitlab.valuation/1": "valuation.v1.json",
}


@dataclass
class Report:
    schema: str
    config: dict
    result: dict
    duration_seconds: float = 0.0
    workers: int | None = None
    incomplete: bool = False

    def to_dict(self) -> dict:
        # workers and duration are runtime metadata: they stay outside the
        # payload so equal experiments compare byte for byte at any pool size
        out = {
            "schema": self.schema,
            "config": self.config,
            "result": self.result,
            "duration_seconds": self.duration_seconds,
        }
        if self.workers is not None:
            out["workers"] = self.workers
        if self.incomplete:
            out["incomplete"] = True
        return out

    def payload(self) -> dict:
        return {"schema": self.schema, "config": self.config, "result": self.result}


def rational(x: Fraction | int) -> dict:
    """Exact rational as {"num", "den"} plus a decimal rendering."""
    f = Fraction(x)
    return {"num": f.numerator, "den": f.denominator, "decimal": float(f)}


def encode_valuation(v: int | float) -> int | str:
    if v == math.inf:
        return "inf"
    return int(v)


def valuation_histogram_payload(hist: dict) -> dict:
    """Valuation -> count map with JSON-safe keys, finite values ascending."""
    finite = sorted((v, c) for v, c in hist.items() if v != math.inf)
    out = {str(int(v)): c for v, c in finite}
    infinite = sum(c for v, c in hist.items() if v == math.inf)
    if infinite:
        out["inf"] = infinite
    return out


def to_json(report: Report, indent: int = 2) -> str:
    return json.dumps(report.to_dict(), indent=indent, sort_keys=True)


def payload_json(report: Report) -> str:
    """Canonical serialization used for determinism comparisons."""
    return json.dumps(report.payload(), sort_keys=True, separators=(",", ":"))


def flatten_rows(report: Report) -> list[tuple[str, object]]:
    """Depth-first (key, value) rows covering the full payload."""
    rows: list[tuple[str, object]] = []

    def walk(prefix: str, node) -> None:
        if isinstance(node, dict):
            for key in sorted(node):
                walk(f"{prefix}.{key}" if prefix else str(key), node[key])
        elif isinstance(node, (list, tuple)):
            for idx, item in enumerate(node):
                walk(f"{prefix}.{idx}", item)
        elif node is None:
            rows.append((prefix, ""))
        elif isinstance(node, bool):
            rows.append((prefix, "true" if node else "false"))
        else:
            rows.append((prefix, node))

    walk("", report.payload())
    return rows


def to_csv(report: Report) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["key", "value"])
    for key, value in flatten_rows(report):
        writer.writerow([key, value])
    return buf.getvalue()


def schema_resource(schema_tag: str) -> str:
    """Path of the packaged JSON schema file for a schema tag."""
    from importlib.resources import files

    try:
        filename = SCHEMA_FILES[schema_tag]
    except KeyError:
        raise ValueError(f"unknown schema tag {schema_tag!r}")
    return str(files("digitlab").joinpath(f"schemas/{filename}"))
