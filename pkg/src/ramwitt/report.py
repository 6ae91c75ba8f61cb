"""Machine-readable verification reports.

A report is a structured JSON document: tool version, config echo, and one
record per check {id, anchor, params, status, certificate, wall_ms}.  The
*canonical body* strips wall-clock fields and serializes with sorted keys,
so identical (config, seed) runs produce byte-identical bodies; the body
hash is embedded when a report is written.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, field
from typing import List, Optional

TOOL_NAME = "ramwitt"
SCHEMA_VERSION = 1


@dataclass
class CheckRecord:
    id: str
    anchor: str  # name of the identity being checked, or "plumbing"
    params: dict
    status: str  # "pass" | "fail" | "skipped"
    certificate: dict = field(default_factory=dict)
    wall_ms: float = 0.0
    reproducer: Optional[dict] = None

    def to_dict(self) -> dict:
        d = {
            "id": self.id,
            "anchor": self.anchor,
            "params": self.params,
            "status": self.status,
            "certificate": self.certificate,
            "wall_ms": round(self.wall_ms, 3),
        }
        if self.reproducer is not None:
            d["reproducer"] = self.reproducer
        return d


@dataclass
class Report:
    config_echo: dict
    checks: List[CheckRecord] = field(default_factory=list)
    version: str = "0.1.0"

    def add(self, record: CheckRecord):
        self.checks.append(record)

    def summary(self) -> dict:
        out = {"pass": 0, "fail": 0, "skipped": 0}
        for c in self.checks:
            out[c.status] = out.get(c.status, 0) + 1
        return out

    def ok(self) -> bool:
        return all(c.status != "fail" for c in self.checks)

    def body(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "tool": {"name": TOOL_NAME, "version": self.version},
            "config": self.config_echo,
            "checks": [
                {k: v for k, v in c.to_dict().items() if k != "wall_ms"}
                for c in self.checks
            ],
            "summary": self.summary(),
        }

    def canonical_body_bytes(self) -> bytes:
        return json.dumps(self.body(), sort_keys=True, separators=(",", ":")).encode()

    def to_dict(self) -> dict:
        body = self.body()
        return {
            "body": body,
            "body_sha256": hashlib.sha256(self.canonical_body_bytes()).hexdigest(),
            "timing": {
                "generated_unix": time.time(),
                "checks_wall_ms": {c.id: round(c.wall_ms, 3) for c in self.checks},
            },
        }


def emit_report(report: Report, path: str):
    """Write the report; the body is stable for a fixed (config, seed)."""
    with open(path, "w") as fh:
        json.dump(report.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def certificate_hash(obj) -> str:
    """Stable digest of certificate data (serializable values only)."""
    blob = json.dumps(obj, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


class Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.ms = (time.perf_counter() - self.t0) * 1000.0
