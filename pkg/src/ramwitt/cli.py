"""Command-line front end.

Two kinds of commands: suite orchestration (``verify`` and its per-module
aliases) emitting machine-readable reports, and ``compute`` commands that
print single objects in the textual serialization of the series module.

Exit codes: 0 all checks pass; 1 a check failed; 2 internal integrity
(corrupted cache / broken invariant); 64 configuration error.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import List, Optional

from .base import OLConfig, OLRing, UnramExt
from .config import ALL_SUITES, RunConfig
from .errors import ConfigError, IntegralityFailure, IntegrityError, RamwittError
from .lubintate import LTGroup
from .prism import log_prism
from .phimod import PhiModule, fixed_points, herr_h0_h1, is_etale, stabilization_check
from .report import Report, emit_report
from .series import TruncSeries
from .suites import run_suite
from .tower import theta, iota_witt, tower_level
from .witt import WittRing, build_universal_cache

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_INTEGRITY = 2
EXIT_CONFIG = 64


def _load_config(args) -> RunConfig:
    if getattr(args, "config", None):
        cfg = RunConfig.load(args.config)
    else:
        cfg = RunConfig(ring=OLConfig(3))
    if getattr(args, "suite", None):
        cfg.suites = args.suite.split(",")
        for s in cfg.suites:
            if s not in ALL_SUITES:
                raise ConfigError(f"unknown suite {s!r}")
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed
    if getattr(args, "samples", None) is not None:
        cfg.samples = args.samples
    if getattr(args, "witt_cache", None):
        cfg.witt_cache_path = args.witt_cache
    for key in ("n", "depth", "prec", "trunc", "witt_len"):
        val = getattr(args, key, None)
        if val is not None:
            if key == "trunc":
                cfg.N = val
            elif key == "depth":
                cfg.depth = val
            elif key == "prec":
                cfg.prec = val
            elif key == "witt_len":
                cfg.witt_len = val
    cfg.validate()
    return cfg


def _finish(report: Report, out_path: Optional[str]) -> int:
    for c in report.checks:
        print(f"[{c.status.upper():4s}] {c.id} ({c.wall_ms:.0f} ms)")
    s = report.summary()
    print(f"summary: {s['pass']} pass, {s['fail']} fail, {s.get('skipped', 0)} skipped")
    if out_path:
        emit_report(report, out_path)
        print(f"report written to {out_path}")
    return EXIT_OK if report.ok() else EXIT_CHECK_FAILED


def cmd_verify(args) -> int:
    cfg = _load_config(args)
    cfg.validate(suite_bounds=True)
    report = run_suite(cfg)
    return _finish(report, args.out)


def _group(args) -> LTGroup:
    cfg = _load_config(args)
    return cfg.lt_group()


def cmd_qn(args) -> int:
    G = _group(args)
    N = args.trunc or 40
    print(G.qn(args.n, N).fmt())
    return EXIT_OK


def cmd_lt_law(args) -> int:
    G = _group(args)
    N = args.trunc or 10
    print(G.law(N).fmt())
    return EXIT_OK


def cmd_lt_endo(args) -> int:
    G = _group(args)
    N = args.trunc or 20
    print(G.endo_int(args.a, N).fmt())
    return EXIT_OK


def cmd_witt_add(args) -> int:
    cfg = _load_config(args)
    R = OLRing(cfg.ring, cfg.prec)
    xs = [int(t) for t in args.x.split(",")]
    ys = [int(t) for t in args.y.split(",")]
    if len(xs) != len(ys):
        raise ConfigError("witt-add needs coordinate vectors of equal length")
    W = WittRing(R, len(xs), cfg.ring, prec=cfg.prec)
    x = W.make([R.from_int(c) for c in xs])
    y = W.make([R.from_int(c) for c in ys])
    print(W.add(x, y))
    return EXIT_OK


def cmd_ghost(args) -> int:
    cfg = _load_config(args)
    R = OLRing(cfg.ring, cfg.prec)
    coords = [int(t) for t in args.coords.split(",")]
    W = WittRing(R, len(coords), cfg.ring, prec=cfg.prec)
    g = W.ghost(W.make([R.from_int(c) for c in coords]))
    print("(" + ", ".join(R.fmt(v).split(" + O(")[0] for v in g) + ")")
    return EXIT_OK


def cmd_delta(args) -> int:
    cfg = _load_config(args)
    R = OLRing(cfg.ring, cfg.prec)
    from .witt import delta_from_w2

    if args.elt == "pi":
        x = R.pi()
    else:
        x = R.make([int(t) for t in args.elt.split(",")])
    print(R.fmt(delta_from_w2(x, R)))
    return EXIT_OK


def cmd_theta(args) -> int:
    cfg = _load_config(args)
    G = cfg.lt_group(prec=cfg.prec + cfg.witt_len + 1)
    n = args.n or 1
    N = n + cfg.depth - 1
    level = tower_level(G, N, cfg.prec)
    NT = level.ring.rank
    R = OLRing(cfg.ring, cfg.prec)
    w = iota_witt(TruncSeries.tvar(R, NT), G, N, cfg.depth, cfg.witt_len, shift=n)
    val = theta(w, level.ring)
    print(level.ring.fmt(val))
    return EXIT_OK


def cmd_log_prism(args) -> int:
    cfg = _load_config(args)
    G = cfg.lt_group()
    R = G.R
    res = log_prism(G, R.from_int(args.a), args.n or 1, args.m or 2, cfg.N)
    for c in res.classes:
        print(f"level {c.m}: rep = {c.rep.trunc(12).fmt()}")
    return EXIT_OK


def _load_module(args) -> PhiModule:
    with open(args.module) as fh:
        return PhiModule.from_dict(json.load(fh))


def cmd_fixed(args) -> int:
    M = _load_module(args)
    fp = fixed_points(M)
    print(f"etale: {is_etale(M)}")
    print(f"fixed points: {fp.description()} (size {fp.size()})")
    return EXIT_OK


def cmd_herr(args) -> int:
    M = _load_module(args)
    h0, h1 = herr_h0_h1(M)
    print(f"H0: {h0}")
    print(f"H1: {h1}")
    return EXIT_OK


def cmd_stabilize(args) -> int:
    M = _load_module(args)
    st = stabilization_check(M, max_steps=args.max_steps)
    print(f"m* = {st['m_star']}  trace = {st['trace']}  reached = {st['reached']}")
    return EXIT_OK if st["reached"] else EXIT_CHECK_FAILED


def cmd_witt_cache(args) -> int:
    cfg = _load_config(args)
    cache = build_universal_cache(cfg.ring, args.len, cfg.prec)
    cache.save(args.out)
    print(f"cache (q={cfg.ring.q}, len={args.len}, prec={cfg.prec}) -> {args.out}")
    return EXIT_OK


def _add_common(p):
    p.add_argument("--config", help="path to a JSON run configuration")
    p.add_argument("--seed", type=int, help="seed for sample-based checks")
    p.add_argument("--samples", type=int, help="sample count override")
    p.add_argument("--prec", type=int, help="pi-adic working precision")
    p.add_argument("--trunc", type=int, help="T-adic truncation override")
    p.add_argument("--depth", type=int, help="tilt depth")
    p.add_argument("--witt-len", dest="witt_len", type=int, help="Witt vector length")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="ramwitt",
        description="exact-arithmetic verification of ramified Witt vector, "
        "Lubin-Tate and prism identities",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="run verification suites")
    _add_common(p)
    p.add_argument("--suite", help="comma-separated suite names (default: all)")
    p.add_argument("--out", help="write the JSON report here")
    p.add_argument("--witt-cache", help="load (and integrity-check) a polynomial cache")
    p.set_defaults(func=cmd_verify)

    # per-module verify aliases
    p = sub.add_parser("prism", help="prism module commands")
    psub = p.add_subparsers(dest="subcommand", required=True)
    pv = psub.add_parser("verify", help="run the prism-log suite")
    _add_common(pv)
    pv.add_argument("--out", help="write the JSON report here")
    pv.set_defaults(func=lambda a: cmd_verify(_force_suite(a, "prism-log")))

    p = sub.add_parser("tower", help="tower module commands")
    tsub = p.add_subparsers(dest="subcommand", required=True)
    tv = tsub.add_parser("verify-theta", help="run the tower-theta suite")
    _add_common(tv)
    tv.add_argument("--n", type=int, help="tower level")
    tv.add_argument("--out", help="write the JSON report here")
    tv.set_defaults(func=lambda a: cmd_verify(_force_suite(a, "tower-theta")))

    p = sub.add_parser("phimod", help="phi-module commands")
    fsub = p.add_subparsers(dest="subcommand", required=True)
    for name, fn in (("fixed", cmd_fixed), ("herr", cmd_herr), ("stabilize", cmd_stabilize)):
        fp_ = fsub.add_parser(name)
        fp_.add_argument("--module", required=True, help="JSON module description")
        if name == "stabilize":
            fp_.add_argument("--max-steps", type=int, default=8)
        fp_.set_defaults(func=fn)

    # compute commands
    p = sub.add_parser("qn", help="print q_n(T)")
    _add_common(p)
    p.add_argument("--n", type=int, required=True)
    p.set_defaults(func=cmd_qn)

    p = sub.add_parser("lt-law", help="print the group law")
    _add_common(p)
    p.set_defaults(func=cmd_lt_law)

    p = sub.add_parser("lt-endo", help="print [a](T)")
    _add_common(p)
    p.add_argument("--a", type=int, required=True)
    p.set_defaults(func=cmd_lt_endo)

    p = sub.add_parser("witt-add", help="add two Witt vectors (integer digits)")
    _add_common(p)
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    p.set_defaults(func=cmd_witt_add)

    p = sub.add_parser("ghost", help="print the ghost vector of integer coordinates")
    _add_common(p)
    p.add_argument("--coords", required=True)
    p.set_defaults(func=cmd_ghost)

    p = sub.add_parser("delta", help="print delta of an O_L element")
    _add_common(p)
    p.add_argument("--elt", required=True, help='digit vector, or "pi"')
    p.set_defaults(func=cmd_delta)

    p = sub.add_parser("theta", help="print theta(iota-shift-n(T))")
    _add_common(p)
    p.add_argument("--n", type=int, default=1)
    p.set_defaults(func=cmd_theta)

    p = sub.add_parser("log-prism", help="print prismatic log classes of [a pi^n](omega)")
    _add_common(p)
    p.add_argument("--a", type=int, default=1)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--m", type=int, default=2)
    p.set_defaults(func=cmd_log_prism)

    p = sub.add_parser("fixed", help="fixed points of a phi-module")
    p.add_argument("--module", required=True)
    p.set_defaults(func=cmd_fixed)

    p = sub.add_parser("herr", help="H0/H1 of the (phi - 1) complex")
    p.add_argument("--module", required=True)
    p.set_defaults(func=cmd_herr)

    p = sub.add_parser("witt-cache", help="export the universal polynomial cache")
    _add_common(p)
    p.add_argument("--len", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_witt_cache)

    return ap


def _force_suite(args, suite: str):
    args.suite = suite
    if not hasattr(args, "witt_cache"):
        args.witt_cache = None
    return args


def main(argv: Optional[List[str]] = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except (IntegrityError, IntegralityFailure) as exc:
        print(f"integrity error [{exc.code}]: {exc}", file=sys.stderr)
        return EXIT_INTEGRITY
    except ConfigError as exc:
        print(f"configuration error [{exc.code}]: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except RamwittError as exc:
        print(f"check failed [{exc.code}]: {exc}", file=sys.stderr)
        return EXIT_CHECK_FAILED


if __name__ == "__main__":
    sys.exit(main())
