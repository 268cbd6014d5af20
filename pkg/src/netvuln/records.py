"""Flat result records and their JSON-lines / CSV emission."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

from . import __version__


@dataclass
class ResultRecord:
    op: str
    params: dict
    values: dict
    seed: int
    se: float | None = None
    error: dict | None = None
    wall_time: float | None = None
    version: str = __version__
    extra: dict = field(default_factory=dict)

    def flat(self) -> dict:
        out = {"op": self.op}
        out.update(self.params)
        out.update(self.values)
        if self.se is not None:
            out["se"] = self.se
        out["seed"] = self.seed
        out.update(self.extra)
        if self.error is not None:
            out["error"] = self.error["type"]
            out["error_message"] = self.error["message"]
        if self.wall_time is not None:
            out["wall_time"] = self.wall_time
        out["version"] = self.version
        return out

    @property
    def ok(self) -> bool:
        return self.error is None


def _clean(v):
    if isinstance(v, float) and not math.isfinite(v):
        return repr(v)
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    if isinstance(v, dict):
        return {k: _clean(x) for k, x in v.items()}
    return v


def to_jsonl(records) -> str:
    return "".join(json.dumps(_clean(r.flat())) + "\n" for r in records)


def to_csv(records) -> str:
    rows = [r.flat() for r in records]
    cols = []
    for row in rows:
        for k in row:
            if k not in cols:
                cols.append(k)
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow({k: json.dumps(v) if isinstance(v, (list, dict)) else (repr(v) if isinstance(v, float) else v)
                    for k, v in row.items()})
    return buf.getvalue()


def emit(records, fmt: str = "jsonl") -> str:
    if fmt in ("jsonl", "json-lines", "json"):
        return to_jsonl(records)
    if fmt == "csv":
        return to_csv(records)
    raise ValueError(f"unknown format {fmt!r}")


def read_jsonl(text: str) -> list[dict]:
    return [json.loads(line) for line in text.splitlines() if line.strip()]


def read_csv(text: str) -> list[dict]:
    return list(csv.DictReader(io.StringIO(text)))
