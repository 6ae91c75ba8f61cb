"""Verification suites: seeded, deterministic, certificate-producing.

Each suite runs a fixed list of identity checks and returns CheckRecords;
run_suite assembles them into a Report.  Sample-based checks draw from a
per-check generator seeded by (seed, check id), so a fixed (config, seed)
reproduces every outcome and certificate byte for byte.
"""

from __future__ import annotations

import random
from typing import Iterable, List, Optional

from .base import FqField, OLConfig, OLRing, UnramExt, teichmuller_lift
from .config import RunConfig
from .errors import IntegrityError, NotEtale, RamwittError
from .lubintate import LTGroup, cyclotomic_frobenius_series, lt_check_associativity
from .prism import (
    DeltaRing,
    check_delta_axioms,
    check_log_additivity,
    check_qn_intersection,
    gen_m,
    is_distinguished,
    log_prism,
    log_transition_check,
    series_delta_ring,
)
from .phimod import (
    PhiModule,
    brute_force_fixed_set,
    base_change,
    fixed_points,
    herr_h0_h1,
    is_etale,
    stabilization_check,
)
from .report import CheckRecord, Report, Timer, certificate_hash
from .series import TruncSeries
from .tower import theta_pinned_e1, tower_level, verify_theta_phi_iota
from .witt import UniversalPolyCache, WittRing, build_universal_cache, delta_from_w2


def _rng(cfg: RunConfig, check_id: str) -> random.Random:
    return random.Random(f"{cfg.seed}:{check_id}")


def _record(cfg: RunConfig, check_id: str, anchor: str, params: dict, fn) -> CheckRecord:
    """Run one check body; translate outcomes into a record."""
    with Timer() as t:
        try:
            cert = fn() or {}
            status = "pass" if cert.pop("_ok", True) else "fail"
        except RamwittError as exc:
            cert = {"error": exc.code, "message": str(exc)}
            status = "fail"
    rec = CheckRecord(
        id=check_id,
        anchor=anchor,
        params=params,
        status=status,
        certificate=cert,
        wall_ms=t.ms,
    )
    if status == "fail":
        rec.reproducer = {"seed": cfg.seed, "config": cfg.echo(), "check": check_id}
    return rec


# ---------------------------------------------------------------------------
# witt suite
# ---------------------------------------------------------------------------

WITT_CONFIGS = ((2, 1), (3, 1), (2, 2), (5, 1))  # (p, f) with q in {2,3,4,5}


def suite_witt(cfg: RunConfig) -> List[CheckRecord]:
    out = []
    samples = cfg.samples

    def ghost_check():
        counts = {}
        for p, f in WITT_CONFIGS:
            wc = OLConfig(p, f)
            R = OLRing(wc, cfg.prec)
            for length in range(1, 5):
                W = WittRing(R, length, wc, prec=cfg.prec)
                rng = _rng(cfg, f"witt.ghost.{p}.{f}.{length}")
                for _ in range(samples):
                    x, y = W.random(rng), W.random(rng)
                    s, pr = W.add(x, y), W.mul(x, y)
                    gx, gy = W.ghost(x), W.ghost(y)
                    gs, gp = W.ghost(s), W.ghost(pr)
                    for k in range(length):
                        if not R.eq(gs[k], R.add(gx[k], gy[k])):
                            return {"_ok": False, "q": p**f, "len": length, "op": "add"}
                        if not R.eq(gp[k], R.mul(gx[k], gy[k])):
                            return {"_ok": False, "q": p**f, "len": length, "op": "mul"}
                counts[f"q{p ** f}-len{length}"] = samples
        return {"samples": counts}

    out.append(
        _record(
            cfg,
            "witt.ghost-homomorphism",
            "ghost-map-is-ring-homomorphism",
            {"qs": [p**f for p, f in WITT_CONFIGS], "max_len": 4, "samples": samples},
            ghost_check,
        )
    )

    def fv_check():
        total = 0
        for p, f in WITT_CONFIGS:
            wc = OLConfig(p, f)
            R = OLRing(wc, cfg.prec)
            for length in range(2, 5):
                Wn = WittRing(R, length, wc, prec=cfg.prec)
                Wm = WittRing(R, length - 1, wc, prec=cfg.prec)
                rng = _rng(cfg, f"witt.fv.{p}.{f}.{length}")
                for _ in range(samples // 4 + 1):
                    x = Wm.random(rng)
                    # F(V(x)) = pi x
                    if not Wm.eq(Wn.frobenius(Wm.verschiebung(x)), Wm.scalar_ol(R.pi(), x)):
                        return {"_ok": False, "id": "FV", "q": p**f, "len": length}
                    # V(x F(y)) = V(x) y
                    y = Wn.random(rng)
                    lhs = Wm.verschiebung(Wm.mul(x, Wn.frobenius(y)))
                    rhs = Wn.mul(Wn.verschiebung(x), y)
                    if not Wn.eq(lhs, rhs):
                        return {"_ok": False, "id": "VxFy", "q": p**f, "len": length}
                    # F = x^q mod pi W
                    z = Wn.random(rng)
                    zq = Wm.shorten(z, length - 1)
                    pw = zq
                    for _ in range(p**f - 1):
                        pw = Wm.mul(pw, zq)
                    if not Wm.in_pi_image(Wm.sub(Wn.frobenius(z), pw)):
                        return {"_ok": False, "id": "F-mod-pi", "q": p**f, "len": length}
                    total += 3
        return {"identities_checked": total}

    out.append(
        _record(
            cfg,
            "witt.fv-identities",
            "frobenius-verschiebung-relations",
            {"samples_each": samples // 4 + 1},
            fv_check,
        )
    )

    def w2f3_check():
        wc = OLConfig(3, 1)
        F3 = FqField(3, 1)
        W2 = WittRing(F3, 2, wc)
        Rz = OLRing(wc, 3)
        teich = {r: teichmuller_lift(r, Rz, 3) for r in F3.elements()}

        def digit_map(x):
            # (x_0, x_1) -> [x_0] + [x_1^(1/q)] pi ; q-th roots are identity on F_q
            v = Rz.add(teich[x.coords[0]], Rz.mul(teich[x.coords[1]], Rz.pi()))
            return v.coeffs[0] % 9

        elems = list(F3.elements())
        for a0 in elems:
            for a1 in elems:
                for b0 in elems:
                    for b1 in elems:
                        x = W2.make([a0, a1])
                        y = W2.make([b0, b1])
                        if (digit_map(W2.add(x, y)) - digit_map(x) - digit_map(y)) % 9:
                            return {"_ok": False, "op": "add", "x": [a0, a1], "y": [b0, b1]}
                        if (digit_map(W2.mul(x, y)) - digit_map(x) * digit_map(y)) % 9:
                            return {"_ok": False, "op": "mul", "x": [a0, a1], "y": [b0, b1]}
        one = W2.one()
        three = W2.add(W2.add(one, one), one)
        if three.coords != ((0,), (1,)):
            return {"_ok": False, "op": "1+1+1", "got": str(three)}
        # length 3: random sampling against Z/27
        W3 = WittRing(F3, 3, wc)
        Rz4 = OLRing(wc, 4)
        teich4 = {r: teichmuller_lift(r, Rz4, 4) for r in F3.elements()}

        def digit_map3(x):
            acc = Rz4.zero()
            for i, c in enumerate(x.coords):
                acc = Rz4.add(acc, Rz4.mul(teich4[c], Rz4.pow(Rz4.pi(), i)))
            return acc.coeffs[0] % 27

        rng = _rng(cfg, "witt.w2f3.len3")
        for _ in range(200):
            x, y = W3.random(rng), W3.random(rng)
            if (digit_map3(W3.add(x, y)) - digit_map3(x) - digit_map3(y)) % 27:
                return {"_ok": False, "op": "add-len3"}
            if (digit_map3(W3.mul(x, y)) - digit_map3(x) * digit_map3(y)) % 27:
                return {"_ok": False, "op": "mul-len3"}
        return {"pairs": 81, "triple_sum": "(0, 1)", "len3_samples": 200}

    out.append(
        _record(
            cfg,
            "witt.w2f3-isomorphism",
            "finite-length-witt-ring-of-prime-field",
            {"q": 3, "len": 2, "exhaustive_pairs": 81},
            w2f3_check,
        )
    )

    def teich_check():
        checked = {}
        for p, f in ((2, 1), (3, 1), (2, 2), (5, 1), (7, 1), (3, 2), (2, 3)):
            wc = OLConfig(p, f)
            R = OLRing(wc, min(cfg.prec, 6))
            Fq = wc.residue
            lifts = {a: teichmuller_lift(a, R, R.prec) for a in Fq.elements()}
            for a in Fq.elements():
                for b in Fq.elements():
                    lhs = R.mul(lifts[a], lifts[b])
                    rhs = lifts[Fq.mul(a, b)]
                    if not R.eq(lhs, rhs):
                        return {"_ok": False, "q": p**f}
            checked[f"q{p ** f}"] = len(list(Fq.elements())) ** 2
        return {"pairs": checked}

    out.append(
        _record(
            cfg,
            "witt.teichmuller-multiplicative",
            "teichmuller-is-multiplicative-section",
            {"qs": [2, 3, 4, 5, 7, 8, 9], "prec": min(cfg.prec, 6)},
            teich_check,
        )
    )
    return out


# ---------------------------------------------------------------------------
# delta suite
# ---------------------------------------------------------------------------


def suite_delta(cfg: RunConfig) -> List[CheckRecord]:
    out = []
    G = cfg.lt_group()
    R = OLRing(cfg.ring, cfg.prec)

    def ol_axioms():
        rep = check_delta_axioms(DeltaRing(R), cfg.samples, _rng(cfg, "delta.ol"))
        return {"_ok": rep["ok"], **{k: rep[k] for k in ("constant", "product", "sum", "phi_hom")}}

    out.append(
        _record(
            cfg,
            "delta.axioms-base",
            "delta-identities-on-O_L",
            {"samples": cfg.samples},
            ol_axioms,
        )
    )

    def series_axioms():
        D = series_delta_ring(G, max(cfg.N // 4, 8))
        rep = check_delta_axioms(D, max(cfg.samples // 4, 20), _rng(cfg, "delta.series"))
        return {"_ok": rep["ok"], **{k: rep[k] for k in ("constant", "product", "sum", "phi_hom")}}

    out.append(
        _record(
            cfg,
            "delta.axioms-series",
            "delta-identities-on-power-series-ring",
            {"samples": max(cfg.samples // 4, 20), "N": max(cfg.N // 4, 8)},
            series_axioms,
        )
    )

    def pinned():
        d = delta_from_w2(R.pi(), R)
        expect = R.sub(R.one(), R.pow(R.pi(), cfg.ring.q - 1))
        return {"_ok": R.eq(d, expect), "delta_pi": R.fmt(d)}

    out.append(
        _record(
            cfg,
            "delta.pinned-delta-pi",
            "delta-of-uniformizer",
            {"q": cfg.ring.q},
            pinned,
        )
    )

    def unram_frob():
        ext = UnramExt(cfg.ring, 2, cfg.prec)
        rng = _rng(cfg, "delta.unram")
        for _ in range(max(cfg.samples // 10, 10)):
            x = ext.random_element(rng)
            y = ext.random_element(rng)
            fx = ext.frobenius(x)
            # phi(x) = x^q mod pi
            if ext.valuation(ext.sub(fx, ext.pow(x, cfg.ring.q))) == 0:
                return {"_ok": False, "id": "phi-mod-pi"}
            if not ext.eq(ext.frobenius(ext.mul(x, y)), ext.mul(fx, ext.frobenius(y))):
                return {"_ok": False, "id": "phi-hom"}
        # phi^m = id on W_L(F_{q^m})
        x = ext.random_element(rng)
        if not ext.eq(ext.frobenius(ext.frobenius(x)), x):
            return {"_ok": False, "id": "phi-order"}
        return {"m": 2}

    out.append(
        _record(
            cfg,
            "delta.unramified-frobenius",
            "lifted-q-frobenius-on-unramified-extension",
            {"m": 2},
            unram_frob,
        )
    )
    return out


# ---------------------------------------------------------------------------
# lubintate suite (law, endomorphisms, Gamma operators)
# ---------------------------------------------------------------------------


def suite_lubintate(cfg: RunConfig) -> List[CheckRecord]:
    out = []
    G = cfg.lt_group()
    R = G.R
    N_law = max(cfg.N // 2, 30) if cfg.N >= 30 else cfg.N

    def law_axioms():
        F = G.law(N_law)
        t = TruncSeries.tvar(R, N_law + 1)
        if not (F.set_y_zero() - t).is_zero():
            return {"_ok": False, "id": "unit"}
        if not F.eq(F.swap()):
            return {"_ok": False, "id": "commutativity"}
        if not lt_check_associativity(G, min(N_law, 30)):
            return {"_ok": False, "id": "associativity"}
        return {"N": N_law, "assoc_N": min(N_law, 30)}

    out.append(
        _record(
            cfg,
            "lt.law-axioms",
            "formal-group-law-axioms",
            {"N": N_law},
            law_axioms,
        )
    )

    def endo_laws():
        rng = _rng(cfg, "lt.endo")
        N = 20
        F = G.law(N)
        pairs = 0
        for _ in range(30):
            a = rng.randrange(-(R.p**2), R.p**2 + 1)
            b = rng.randrange(-(R.p**2), R.p**2 + 1)
            ea, eb = G.endo_int(a, N), G.endo_int(b, N)
            eab = G.endo_int(a * b, N)
            if not (ea.compose(eb).trunc(N) - eab.trunc(N)).is_zero():
                return {"_ok": False, "id": "compose", "a": a, "b": b}
            s = F.substitute_series(ea.trunc(N + 1), eb.trunc(N + 1))
            esum = G.endo_int(a + b, N)
            if not (s - esum.trunc(s.N)).is_zero():
                return {"_ok": False, "id": "F-sum", "a": a, "b": b}
            pairs += 1
        return {"pairs": pairs, "N": N}

    out.append(
        _record(
            cfg,
            "lt.endomorphism-ring-laws",
            "endomorphisms-compose-and-add",
            {"pairs": 30, "N": 20},
            endo_laws,
        )
    )

    def pi_mod_q():
        Fq = cfg.ring.residue
        red = G.f.map_coefficients(Fq.from_ol, ring=Fq)
        mono = TruncSeries(Fq, [Fq.one()], cfg.ring.q, red.N)
        return {"_ok": (red - mono).is_zero(), "f_mod_pi": red.fmt()}

    out.append(
        _record(
            cfg,
            "lt.pi-action-mod-pi",
            "pi-endomorphism-reduces-to-q-power",
            {},
            pi_mod_q,
        )
    )

    def cyclotomic():
        if cfg.ring.q != cfg.ring.p:
            return {"skipped": "needs q = p"}
        Gc = LTGroup(cfg.ring, cyclotomic_frobenius_series(R), prec=R.prec)
        Fc = Gc.law(12)
        for i in range(13):
            for j in range(13 - i):
                expect = 1 if (i, j) in ((1, 0), (0, 1), (1, 1)) else 0
                c = Fc.get(i, j)
                if not R.eq(c, R.cap(R.from_int(expect), getattr(c, "prec", R.prec))):
                    return {"_ok": False, "at": [i, j]}
        return {"law": "X + Y + XY"}

    out.append(
        _record(
            cfg,
            "lt.cyclotomic-preset",
            "multiplicative-formal-group-cross-check",
            {"N": 12},
            cyclotomic,
        )
    )

    def gamma():
        NG = min(cfg.N, 40)
        rng = _rng(cfg, "lt.gamma")
        units = [u for u in (2, 4, 5) if u % cfg.ring.p]
        for u in units:
            g = G.gamma(R.from_int(u), NG)
            for _ in range(20):
                fr = TruncSeries(R, [R.random_element(rng) for _ in range(12)], 0, NG)
                lhs = g(G.phi(fr))
                rhs = G.phi(g(fr))
                if not (lhs - rhs.trunc(lhs.N)).is_zero():
                    return {"_ok": False, "id": "commutation", "u": u}
            for n in (1, 2):
                g.stability_witness(n)  # raises on failure
        return {"units": units, "N": NG, "stability_levels": [1, 2]}

    out.append(
        _record(
            cfg,
            "lt.gamma-operators",
            "unit-action-commutes-with-frobenius-and-preserves-ideals",
            {"units": [2, 4, 5], "N": min(cfg.N, 40)},
            gamma,
        )
    )
    return out


# ---------------------------------------------------------------------------
# prism-log suite
# ---------------------------------------------------------------------------


def suite_prism_log(cfg: RunConfig) -> List[CheckRecord]:
    out = []
    G = cfg.lt_group()
    R = G.R

    def witnesses():
        D = series_delta_ring(G, cfg.N)
        got = []
        for n in (1, 2, 3):
            qn = G.qn(n).trunc(cfg.N)
            ok, cert = is_distinguished(D, qn)
            if not ok:
                return {"_ok": False, "id": "distinguished", "n": n}
            A, B = G.prism_witness(n)  # exact identity, raises on failure
            got.append(
                {
                    "n": n,
                    "witness": certificate_hash(
                        {"A": A.to_dict(), "B": B.to_dict()}
                    ),
                }
            )
        return {"witnesses": got}

    out.append(
        _record(
            cfg,
            "prism.qn-witnesses",
            "uniformizer-in-ideal-pair",
            {"n_max": 3},
            witnesses,
        )
    )

    NL = max(cfg.N, 60)

    def log_checks():
        a1 = R.from_int(1)
        res = log_prism(G, a1, 1, 3, NL)  # membership certificates inside
        for m in (1, 2, 3):
            if not log_transition_check(G, a1, 1, m, NL):
                return {"_ok": False, "id": "transition", "m": m}
        zero = log_prism(G, R.from_int(0), 1, 2, NL)
        if not all(c.rep.is_zero() for c in zero.classes):
            return {"_ok": False, "id": "zero-point"}
        return {
            "levels": [c.m for c in res.classes],
            "rep_hashes": [certificate_hash(c.rep.to_dict()) for c in res.classes],
        }

    out.append(
        _record(
            cfg,
            "prism.log-membership-transition",
            "log-lands-in-ideal-filtration",
            {"n": 1, "M": 3, "N": NL},
            log_checks,
        )
    )

    def additivity():
        rep = check_log_additivity(G, R.from_int(1), R.from_int(1), 1, 2, NL)
        rep2 = check_log_additivity(G, R.from_int(2), R.from_int(1), 1, 2, NL)
        return {"_ok": rep["ok"] and rep2["ok"], "levels": rep["levels"]}

    out.append(
        _record(
            cfg,
            "prism.log-additivity-linearity",
            "log-is-additive-for-the-formal-sum",
            {"n": 1, "M": 2, "N": NL},
            additivity,
        )
    )

    def intersection():
        for n in (1, 2):
            for m in (1, 2):
                rep = check_qn_intersection(G, n, m)
                if not rep["ok"]:
                    return {"_ok": False, "n": n, "m": m}
        rep3 = check_qn_intersection(G, 1, 3)
        return {"_ok": rep3["ok"], "max_m": 3}

    out.append(
        _record(
            cfg,
            "prism.ideal-products-divide",
            "filtration-generators-factor-through-levels",
            {"m_max": 3},
            intersection,
        )
    )
    return out


# ---------------------------------------------------------------------------
# tower-theta suite
# ---------------------------------------------------------------------------


def suite_tower_theta(cfg: RunConfig) -> List[CheckRecord]:
    out = []
    G = cfg.lt_group(prec=cfg.prec + cfg.witt_len + 1)

    def eisenstein():
        for n in (1, 2, 3):
            tower_level(G, n, cfg.prec)  # raises if not Eisenstein
        return {"levels": [1, 2, 3]}

    out.append(
        _record(
            cfg,
            "tower.qn-eisenstein",
            "level-generators-are-eisenstein",
            {"levels": 3},
            eisenstein,
        )
    )

    def pinned():
        return {"_ok": theta_pinned_e1(G, prec=max(cfg.prec, 4))}

    out.append(
        _record(
            cfg,
            "tower.theta-pinned-e1",
            "theta-of-shifted-coordinate-is-torsion-point",
            {"n": 1, "mod": "pi^2"},
            pinned,
        )
    )

    def pipeline():
        results = {}
        n_samples = max(cfg.samples // 10, 10)
        for n in (1, 2):
            rep = verify_theta_phi_iota(
                G,
                n,
                cfg.depth,
                cfg.witt_len,
                cfg.prec,
                n_samples,
                _rng(cfg, f"tower.pipeline.{n}"),
            )
            if not rep["ok"]:
                return {"_ok": False, "n": n, "samples": rep["samples"][:3]}
            results[f"n{n}"] = {
                "claimed_precision": rep["claimed_precision"],
                "samples": len(rep["samples"]),
            }
        return results

    out.append(
        _record(
            cfg,
            "tower.theta-phi-iota",
            "theta-after-shift-recovers-evaluation",
            {
                "depth": cfg.depth,
                "witt_len": cfg.witt_len,
                "prec": cfg.prec,
            },
            pipeline,
        )
    )
    return out


# ---------------------------------------------------------------------------
# phimod suite
# ---------------------------------------------------------------------------


def suite_phimod(cfg: RunConfig) -> List[CheckRecord]:
    out = []
    base_cfg = OLConfig(cfg.ring.p, cfg.ring.f)  # unramified base for W rings

    def oracle():
        rng = _rng(cfg, "phimod.oracle")
        shapes = [(1, 1, 1), (1, 1, 2), (1, 2, 1), (2, 1, 1), (1, 2, 2), (2, 2, 1), (2, 1, 2), (2, 2, 2)]
        tested = 0
        for m, n, r in shapes:
            if base_cfg.q ** (m * n * r) > 6561:
                continue
            ext = UnramExt(base_cfg, m, n)
            for _ in range(3):
                mat = [[ext.random_element(rng) for _ in range(r)] for _ in range(r)]
                M = PhiModule(ext, n, r, mat)
                if not is_etale(M):
                    continue
                if brute_force_fixed_set(M) != fixed_points(M).enumerate():
                    return {"_ok": False, "shape": [m, n, r]}
                tested += 1
        return {"modules": tested}

    out.append(
        _record(
            cfg,
            "phimod.fixed-points-oracle",
            "solver-agrees-with-enumeration",
            {"size_bound": 6561},
            oracle,
        )
    )

    def euler():
        rng = _rng(cfg, "phimod.euler")
        count = 0
        shapes = [(m, n, r) for m in (1, 2) for n in (1, 2) for r in (1, 2)
                  if base_cfg.q**m <= 9]
        while count < 100:
            m, n, r = shapes[count % len(shapes)]
            ext = UnramExt(base_cfg, m, n)
            mat = [[ext.random_element(rng) for _ in range(r)] for _ in range(r)]
            M = PhiModule(ext, n, r, mat)
            if not is_etale(M):
                continue
            h0, h1 = herr_h0_h1(M)
            if h0.size_log_q() != h1.size_log_q():
                return {"_ok": False, "shape": [m, n, r]}
            count += 1
        return {"modules": count}

    out.append(
        _record(
            cfg,
            "phimod.euler-characteristic",
            "h0-and-h1-have-equal-size",
            {"modules": 100},
            euler,
        )
    )

    def stabilization():
        rng = _rng(cfg, "phimod.stab")
        traces = []
        for m in (1, 2):
            if base_cfg.q**m > 9:
                continue
            for n in (1, 2):
                ext = UnramExt(base_cfg, m, n)
                for _ in range(3):
                    a = ext.random_element(rng)
                    if not ext.is_unit(a):
                        continue
                    M = PhiModule(ext, n, 1, [[a]])
                    st = stabilization_check(M, max_steps=8)
                    if not st["reached"]:
                        return {"_ok": False, "shape": [m, n], "trace": st["trace"]}
                    traces.append({"m": m, "n": n, "m_star": st["m_star"]})
        return {"instances": traces}

    out.append(
        _record(
            cfg,
            "phimod.stabilization",
            "rank-one-modules-trivialize-on-finite-covers",
            {"max_steps": 8},
            stabilization,
        )
    )
    return out


# ---------------------------------------------------------------------------
# runner
# ---------------------------------------------------------------------------

SUITE_FUNCS = {
    "witt": suite_witt,
    "delta": suite_delta,
    "lubintate": suite_lubintate,
    "prism-log": suite_prism_log,
    "tower-theta": suite_tower_theta,
    "phimod": suite_phimod,
}


def run_suite(cfg: RunConfig) -> Report:
    """Execute the selected suites and assemble the report.

    A supplied witt cache path is integrity-checked before anything runs
    (IntegrityError propagates to the caller: exit code 2 territory).
    """
    report = Report(config_echo=cfg.echo())
    if cfg.witt_cache_path:
        UniversalPolyCache.load(cfg.witt_cache_path, cfg.ring)
    for name in cfg.suites:
        for rec in SUITE_FUNCS[name](cfg):
            report.add(rec)
    return report
