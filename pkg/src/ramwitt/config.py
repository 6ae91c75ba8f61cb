"""Run configuration: declarative JSON, validated with line-anchored errors.

Schema (all keys optional except ring.p):

    {
      "ring": {"p": 3, "f": 1, "e": 1,
               "eisenstein_coeffs": [...], "conway_override": [...]},
      "lubin_tate": {"preset": "default" | "cyclotomic"} or {"coeffs": [[c0...], ...]},
      "truncation": {"N": 40, "prec": 6, "depth": 3, "witt_len": 3},
      "suites": ["witt", "delta", "lubintate", "prism-log", "tower-theta", "phimod"],
      "samples": 200,
      "seed": 0
    }

A fixed (config, seed) pair makes every suite outcome and certificate
byte-reproducible.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import List, Optional

from .base import OLConfig, OLRing
from .errors import ConfigError
from .lubintate import LTGroup, cyclotomic_frobenius_series, default_frobenius_series
from .series import TruncSeries

ALL_SUITES = ("witt", "delta", "lubintate", "prism-log", "tower-theta", "phimod")

# minimal documented truncation bounds per suite
MIN_BOUNDS = {
    "witt": {"prec": 3},
    "delta": {"prec": 3, "N": 8},
    "lubintate": {"N": 20, "prec": 4},
    "prism-log": {"N": 40, "prec": 5},
    "tower-theta": {"depth": 2, "witt_len": 2, "prec": 3},
    "phimod": {},
}


@dataclass
class RunConfig:
    ring: OLConfig
    lt_preset: str = "default"
    lt_coeffs: Optional[list] = None
    N: int = 40
    prec: int = 6
    depth: int = 3
    witt_len: int = 3
    suites: List[str] = field(default_factory=lambda: list(ALL_SUITES))
    samples: int = 200
    seed: int = 0
    witt_cache_path: Optional[str] = None

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        ring_d = d.get("ring", {})
        if "p" not in ring_d:
            raise ConfigError("config key ring.p is required")
        ring = OLConfig(
            p=int(ring_d["p"]),
            f=int(ring_d.get("f", 1)),
            e=int(ring_d.get("e", 1)),
            eisenstein=ring_d.get("eisenstein_coeffs"),
            conway_override=ring_d.get("conway_override"),
        )
        lt = d.get("lubin_tate", {}) or {}
        preset = lt.get("preset", "default")
        coeffs = lt.get("coeffs")
        if coeffs is not None:
            preset = "explicit"
        tr = d.get("truncation", {}) or {}
        suites = d.get("suites", list(ALL_SUITES))
        for s in suites:
            if s not in ALL_SUITES:
                raise ConfigError(f"unknown suite {s!r}; choose from {ALL_SUITES}")
        cfg = cls(
            ring=ring,
            lt_preset=preset,
            lt_coeffs=coeffs,
            N=int(tr.get("N", 40)),
            prec=int(tr.get("prec", 6)),
            depth=int(tr.get("depth", 3)),
            witt_len=int(tr.get("witt_len", 3)),
            suites=list(suites),
            samples=int(d.get("samples", 200)),
            seed=int(d.get("seed", 0)),
        )
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path: str) -> "RunConfig":
        try:
            with open(path) as fh:
                d = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}:{exc.lineno}: invalid JSON ({exc.msg})")
        return cls.from_dict(d)

    def validate(self, suite_bounds: bool = False):
        """Basic sanity always; per-suite minimal truncation bounds when the
        suites are about to run."""
        if self.samples < 1:
            raise ConfigError("samples must be >= 1")
        if self.prec < 1 or self.N < 2 or self.depth < 1 or self.witt_len < 1:
            raise ConfigError("truncations must be positive (prec >= 1, N >= 2)")
        if not suite_bounds:
            return
        if self.witt_len > self.depth and "tower-theta" in self.suites:
            raise ConfigError("tower-theta requires witt_len <= depth")
        for s in self.suites:
            for key, lo in MIN_BOUNDS.get(s, {}).items():
                if getattr(self, key) < lo:
                    raise ConfigError(
                        f"suite {s!r} needs {key} >= {lo} (got {getattr(self, key)})"
                    )

    def lt_group(self, prec: Optional[int] = None) -> LTGroup:
        R = OLRing(self.ring, prec if prec is not None else self.prec + 2)
        if self.lt_preset == "default":
            f = default_frobenius_series(R)
        elif self.lt_preset == "cyclotomic":
            f = cyclotomic_frobenius_series(R)
        elif self.lt_preset == "explicit":
            coeffs = [R.make(c if isinstance(c, list) else [c]) for c in self.lt_coeffs]
            f = TruncSeries(R, coeffs, 1, None)
        else:
            raise ConfigError(f"unknown Lubin-Tate preset {self.lt_preset!r}")
        return LTGroup(self.ring, f, prec=R.prec)

    def echo(self) -> dict:
        return {
            "ring": self.ring.to_dict(),
            "lubin_tate": (
                {"preset": self.lt_preset}
                if self.lt_coeffs is None
                else {"coeffs": self.lt_coeffs}
            ),
            "truncation": {
                "N": self.N,
                "prec": self.prec,
                "depth": self.depth,
                "witt_len": self.witt_len,
            },
            "suites": list(self.suites),
            "samples": self.samples,
            "seed": self.seed,
        }
