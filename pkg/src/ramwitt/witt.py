"""Ramified Witt vectors of finite length.

Ring operations are transported through universal arithmetic polynomials:
S_k, M_k, NEG_k (addition, multiplication, negation) and F_k (Frobenius)
are solved recursively from the ghost relations

    w_k(S)   = w_k(X) + w_k(Y)
    w_k(M)   = w_k(X) * w_k(Y)
    w_k(NEG) = -w_k(X)
    w_k(F)   = w_(k+1)(X)

with w_k(Z) = Z_0^(q^k) + pi Z_1^(q^(k-1)) + ... + pi^k Z_k.  Every division
by pi^k during the solve asserts exact divisibility; these assertions are
mandatory (they are the strongest self-test of the ghost solver) and a
failure raises INTEGRALITY_FAILURE.

The polynomials are computed once per (q, len) at working precision
prec + len, cached, and evaluated with a vectorized fast path when the
coefficient ring is unramified.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from .base import OLApprox, OLConfig, OLRing
from .errors import ConfigError, Indivisible, IntegralityFailure, IntegrityError, RingMismatch

_INT64_SAFE = 2**62

# ---------------------------------------------------------------------------
# sparse integer polynomials (coefficient domain Z mod p^K, valid for e = 1;
# the ramified case keeps OLApprox coefficients)
# ---------------------------------------------------------------------------

Poly = Dict[Tuple[int, ...], int]


def _poly_add(a: Poly, b: Poly, m: int) -> Poly:
    out = dict(a)
    for k, c in b.items():
        v = (out.get(k, 0) + c) % m
        if v:
            out[k] = v
        else:
            out.pop(k, None)
    return out


def _poly_scale(a: Poly, s: int, m: int) -> Poly:
    out = {}
    for k, c in a.items():
        v = c * s % m
        if v:
            out[k] = v
    return out


def _poly_mul(a: Poly, b: Poly, m: int) -> Poly:
    out: Poly = {}
    for ka, ca in a.items():
        for kb, cb in b.items():
            key = tuple(x + y for x, y in zip(ka, kb))
            v = (out.get(key, 0) + ca * cb) % m
            if v:
                out[key] = v
            else:
                out.pop(key, None)
    return out


def _poly_pow(a: Poly, n: int, m: int) -> Poly:
    nvars = len(next(iter(a))) if a else 0
    result: Poly = {(0,) * nvars: 1}
    base = a
    while n:
        if n & 1:
            result = _poly_mul(result, base, m)
        base = _poly_mul(base, base, m) if n > 1 else base
        n >>= 1
    return result


def _poly_divide_p_power(a: Poly, p: int, k: int, m: int) -> Poly:
    """Divide every coefficient by p^k; INTEGRALITY_FAILURE on remainder.

    Coefficients live mod m = p^K; the quotient is valid mod p^(K-k).
    """
    pk = p**k
    out: Poly = {}
    for key, c in a.items():
        c %= m
        if c % pk:
            raise IntegralityFailure(
                f"coefficient {c} not divisible by {p}^{k} in ghost solve"
            )
        v = c // pk
        if v:
            out[key] = v
    return out


# ---------------------------------------------------------------------------
# universal polynomial cache
# ---------------------------------------------------------------------------

CACHE_FORMAT_VERSION = 1


class UniversalPolyCache:
    """Sum/product/negation/Frobenius polynomials for W_(L,len) at fixed q.

    For unramified O_L (e = 1) the coefficients are plain integers stored
    mod p^K; S_k/M_k/NEG_k are valid mod p^(K-k).  For ramified O_L the same
    recursion runs with OLApprox coefficients (slower, small cases only).
    """

    def __init__(self, config: OLConfig, length: int, prec: int):
        if length < 1:
            raise ConfigError("Witt length must be >= 1")
        if prec < 1:
            raise ConfigError("cache precision must be >= 1")
        self.config = config
        self.q = config.q
        self.length = length
        self.prec = prec
        self.wprec = prec + length  # margin for the pi^k divisions
        if config.e == 1:
            self._build_int()
        else:
            self._build_ol()
        self._compiled: dict = {}

    # -- integer-domain solver (e = 1, pi = p) --------------------------------

    def _build_int(self):
        cfg = self.config
        p, q, n = cfg.p, self.q, self.length
        K = cfg.kdigits(self.wprec)
        m = p**K
        self._int_mod = m

        def ghost(var_offset: int, k: int, nvars: int) -> Poly:
            # w_k of variables at positions var_offset..var_offset+k
            out: Poly = {}
            for i in range(k + 1):
                key = [0] * nvars
                key[var_offset + i] = q ** (k - i)
                out[tuple(key)] = p**i % m
            return out

        def solve(target, nvars: int, count: int) -> List[Poly]:
            # target(k) must return the ghost image polynomial for level k
            polys: List[Poly] = []
            for k in range(count):
                rhs = target(k)
                acc: Poly = {}
                for i in range(k):
                    acc = _poly_add(
                        acc, _poly_scale(_poly_pow(polys[i], q ** (k - i), m), p**i, m), m
                    )
                num = _poly_add(rhs, _poly_scale(acc, -1, m), m)
                polys.append(_poly_divide_p_power(num, p, k, m))
            return polys

        nv2 = 2 * n
        xg = lambda k: ghost(0, k, nv2)
        yg = lambda k: ghost(n, k, nv2)
        self.S = solve(lambda k: _poly_add(xg(k), yg(k), m), nv2, n)
        self.M = solve(lambda k: _poly_mul(xg(k), yg(k), m), nv2, n)
        xg1 = lambda k: ghost(0, k, n)
        self.NEG = solve(lambda k: _poly_scale(xg1(k), -1, m), n, n)
        if n >= 2:
            self.F = solve(lambda k: ghost(0, k + 1, n), n, n - 1)
        else:
            self.F = []
        self._domain = "int"

    # -- OLApprox-domain solver (ramified) -------------------------------------

    def _build_ol(self):
        R = OLRing(self.config, self.wprec)
        q, n = self.q, self.length
        pi = R.pi()

        def pa(a, b):
            out = dict(a)
            for k, c in b.items():
                out[k] = R.add(out[k], c) if k in out else c
            return {k: c for k, c in out.items() if not R.is_zero(c)}

        def pscale(a, s):
            return {k: R.mul(c, s) for k, c in a.items()}

        def pmul(a, b):
            out = {}
            for ka, ca in a.items():
                for kb, cb in b.items():
                    key = tuple(x + y for x, y in zip(ka, kb))
                    t = R.mul(ca, cb)
                    out[key] = R.add(out[key], t) if key in out else t
            return {k: c for k, c in out.items() if not R.is_zero(c)}

        def ppow(a, e):
            nvars = len(next(iter(a))) if a else 0
            res = {(0,) * nvars: R.one()}
            base = a
            while e:
                if e & 1:
                    res = pmul(res, base)
                base = pmul(base, base) if e > 1 else base
                e >>= 1
            return res

        def pdiv(a, k):
            out = {}
            for key, c in a.items():
                try:
                    out[key] = R.divide_pi(c, k)
                except Indivisible as exc:
                    raise IntegralityFailure(str(exc)) from exc
            return out

        def ghost(off, k, nvars):
            out = {}
            for i in range(k + 1):
                key = [0] * nvars
                key[off + i] = q ** (k - i)
                out[tuple(key)] = R.pow(pi, i)
            return out

        def solve(target, nvars, count):
            polys = []
            for k in range(count):
                acc = {}
                for i in range(k):
                    acc = pa(acc, pscale(ppow(polys[i], q ** (k - i)), R.pow(pi, i)))
                num = pa(target(k), pscale(acc, R.from_int(-1)))
                polys.append(pdiv(num, k))
            return polys

        nv2 = 2 * n
        xg = lambda k: ghost(0, k, nv2)
        yg = lambda k: ghost(n, k, nv2)
        self.S = solve(lambda k: pa(xg(k), yg(k)), nv2, n)
        self.M = solve(lambda k: pmul(xg(k), yg(k)), nv2, n)
        xg1 = lambda k: ghost(0, k, n)
        neg1 = OLRing(self.config, self.wprec).from_int(-1)
        self.NEG = solve(lambda k: pscale(xg1(k), neg1), n, n)
        self.F = (
            solve(lambda k: ghost(0, k + 1, n), n, n - 1) if n >= 2 else []
        )
        self._domain = "ol"

    # -- evaluation ------------------------------------------------------------

    def evaluate(self, poly_kind: str, k: int, values, ring):
        """Evaluate a cached polynomial at ring-element values."""
        poly = getattr(self, poly_kind)[k]
        if self._domain == "int":
            fast = self._eval_fast(poly_kind, k, values, ring)
            if fast is not None:
                return fast
            return self._eval_generic_int(poly, values, ring)
        return self._eval_generic_ol(poly, values, ring)

    def _eval_generic_int(self, poly: Poly, values, ring):
        memo = [dict() for _ in values]

        def power(i, e):
            if e == 0:
                return None
            d = memo[i]
            if e not in d:
                if e == 1:
                    d[e] = values[i]
                else:
                    half = power(i, e // 2)
                    r = ring.mul(half, half)
                    if e & 1:
                        r = ring.mul(r, values[i])
                    d[e] = r
            return d[e]

        acc = ring.zero()
        for key, c in poly.items():
            term = None
            for i, e in enumerate(key):
                if e:
                    pw = power(i, e)
                    term = pw if term is None else ring.mul(term, pw)
            cval = ring.from_int(c)
            term = cval if term is None else ring.mul(cval, term)
            acc = ring.add(acc, term)
        return acc

    def _eval_generic_ol(self, poly, values, ring):
        memo = [dict() for _ in values]

        def power(i, e):
            d = memo[i]
            if e not in d:
                if e == 1:
                    d[e] = values[i]
                else:
                    half = power(i, e // 2)
                    r = ring.mul(half, half)
                    if e & 1:
                        r = ring.mul(r, values[i])
                    d[e] = r
            return d[e]

        acc = ring.zero()
        for key, c in poly.items():
            term = ring.from_ol(c)
            for i, e in enumerate(key):
                if e:
                    term = ring.mul(term, power(i, e))
            acc = ring.add(acc, term)
        return acc

    def _compiled_poly(self, poly_kind: str, k: int):
        key = (poly_kind, k)
        if key not in self._compiled:
            poly = getattr(self, poly_kind)[k]
            if not poly:
                self._compiled[key] = (np.zeros((0, 1), dtype=np.int64), np.zeros(0, dtype=np.int64))
            else:
                nvars = len(next(iter(poly)))
                exps = np.array(list(poly.keys()), dtype=np.int64).reshape(-1, nvars)
                coeffs = np.array([poly[k2] for k2 in poly.keys()], dtype=object)
                self._compiled[key] = (exps, coeffs)
        return self._compiled[key]

    def _eval_fast(self, poly_kind: str, k: int, values, ring):
        """Vectorized evaluation for unramified O_L (f = 1 single ints,
        f = 2 via the quadratic-extension product formula)."""
        cfg = self.config
        if not isinstance(ring, OLRing) or ring.config != cfg or cfg.e != 1:
            return None
        if cfg.f > 2:
            return None
        # results are only valid to the cache's target precision
        P = min(min(v.prec for v in values), self.prec)
        m = ring.p ** cfg.kdigits(P)
        exps, coeffs = self._compiled_poly(poly_kind, k)
        if exps.shape[0] == 0:
            return ring.int_to_elt(0, P) if cfg.f == 1 else ring.make([0], P)
        if m * m >= _INT64_SAFE // max(1, exps.shape[0]):
            return None
        cvec = np.array([int(c) % m for c in coeffs], dtype=np.int64)
        maxe = int(exps.max())
        if cfg.f == 1:
            pows = np.zeros((len(values), maxe + 1), dtype=np.int64)
            for i, v in enumerate(values):
                pows[i, 0] = 1
                x = ring.elt_to_int(v) % m
                for e2 in range(1, maxe + 1):
                    pows[i, e2] = pows[i, e2 - 1] * x % m
            acc = np.ones(exps.shape[0], dtype=np.int64)
            for i in range(len(values)):
                acc = acc * pows[i, exps[:, i]] % m
            total = int(np.dot(acc, cvec) % m)
            return OLApprox(cfg, (total,), P)
        # f == 2: elements a + b*u with u^2 = -(m0 + m1*u)
        m0, m1 = cfg.unram_modulus[0], cfg.unram_modulus[1]
        powa = np.zeros((len(values), maxe + 1), dtype=np.int64)
        powb = np.zeros((len(values), maxe + 1), dtype=np.int64)
        for i, v in enumerate(values):
            powa[i, 0] = 1
            a, b = v.coeffs[0] % m, v.coeffs[1] % m
            for e2 in range(1, maxe + 1):
                pa_, pb_ = powa[i, e2 - 1], powb[i, e2 - 1]
                powa[i, e2] = (pa_ * a - pb_ * b * m0) % m
                powb[i, e2] = (pa_ * b + pb_ * a - pb_ * b * m1) % m
        acca = np.ones(exps.shape[0], dtype=np.int64)
        accb = np.zeros(exps.shape[0], dtype=np.int64)
        for i in range(len(values)):
            ea, eb = powa[i, exps[:, i]], powb[i, exps[:, i]]
            na = (acca * ea - accb * eb * m0) % m
            nb = (acca * eb + accb * ea - accb * eb * m1) % m
            acca, accb = na, nb
        ta = int(np.dot(acca, cvec) % m)
        tb = int(np.dot(accb, cvec) % m)
        return OLApprox(cfg, (ta, tb), P)

    # -- persistence -----------------------------------------------------------

    def key(self) -> dict:
        return {
            "p": self.config.p,
            "f": self.config.f,
            "e": self.config.e,
            "q": self.q,
            "len": self.length,
            "prec": self.prec,
        }

    def to_dict(self) -> dict:
        if self._domain != "int":
            raise ConfigError("on-disk cache format supports unramified configs only")

        def enc(polys):
            return [
                [[list(k), int(c)] for k, c in sorted(poly.items())] for poly in polys
            ]

        payload = {
            "format_version": CACHE_FORMAT_VERSION,
            "key": self.key(),
            "int_mod": self._int_mod,
            "S": enc(self.S),
            "M": enc(self.M),
            "NEG": enc(self.NEG),
            "F": enc(self.F),
        }
        blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return {
            "payload": payload,
            "sha256": hashlib.sha256(blob.encode()).hexdigest(),
        }

    def save(self, path: str):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh)

    @classmethod
    def load(cls, path: str, config: OLConfig) -> "UniversalPolyCache":
        with open(path) as fh:
            doc = json.load(fh)
        payload = doc.get("payload", {})
        blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        if hashlib.sha256(blob.encode()).hexdigest() != doc.get("sha256"):
            raise IntegrityError("universal polynomial cache failed checksum")
        key = payload["key"]
        if (key["p"], key["f"], key["e"]) != (config.p, config.f, config.e):
            raise ConfigError("cache key does not match ring config")
        obj = cls.__new__(cls)
        obj.config = config
        obj.q = key["q"]
        obj.length = key["len"]
        obj.prec = key["prec"]
        obj.wprec = obj.prec + obj.length
        obj._int_mod = payload["int_mod"]
        obj._domain = "int"
        obj._compiled = {}

        def dec(data):
            return [{tuple(k): c for k, c in poly} for poly in data]

        obj.S = dec(payload["S"])
        obj.M = dec(payload["M"])
        obj.NEG = dec(payload["NEG"])
        obj.F = dec(payload["F"])
        return obj


_CACHE_REGISTRY: dict = {}


def build_universal_cache(config: OLConfig, length: int, prec: int) -> UniversalPolyCache:
    """Cached constructor; the polynomials depend only on (config, length, prec)."""
    key = (config, length, prec)
    if key not in _CACHE_REGISTRY:
        _CACHE_REGISTRY[key] = UniversalPolyCache(config, length, prec)
    return _CACHE_REGISTRY[key]


# ---------------------------------------------------------------------------
# Witt vectors
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WittVec:
    """A length-n ramified Witt vector with coordinates in a coefficient ring."""

    ring: object
    coords: tuple

    def __len__(self):
        return len(self.coords)

    def __repr__(self):
        parts = ", ".join(self.ring.fmt(c) for c in self.coords)
        return f"({parts})"


class WittRing:
    """W_(L,len)(R) for a coefficient ring R implementing the ring protocol."""

    def __init__(self, coeff_ring, length: int, config: OLConfig, prec: Optional[int] = None):
        self.coeff = coeff_ring
        self.length = length
        self.config = config
        self.q = config.q
        cache_prec = prec if prec is not None else getattr(coeff_ring, "prec", 2)
        self.cache = build_universal_cache(config, length, cache_prec)

    # -- constructors ---------------------------------------------------------

    def make(self, coords) -> WittVec:
        coords = tuple(coords)
        if len(coords) != self.length:
            raise RingMismatch(f"expected {self.length} coordinates")
        return WittVec(self.coeff, coords)

    def zero(self) -> WittVec:
        return self.make([self.coeff.zero()] * self.length)

    def one(self) -> WittVec:
        return self.teichmuller(self.coeff.one())

    def teichmuller(self, r) -> WittVec:
        """[r] = (r, 0, 0, ...), the multiplicative section."""
        return self.make([r] + [self.coeff.zero()] * (self.length - 1))

    # -- ghost ------------------------------------------------------------

    def ghost(self, x: WittVec) -> list:
        """(w_0(x), ..., w_(n-1)(x)) in the coefficient ring."""
        ring = self.coeff
        pi = ring.from_ol(OLRing(self.config, self.cache.wprec).pi())
        out = []
        for k in range(self.length):
            acc = ring.zero()
            pik = ring.one()
            for i in range(k + 1):
                acc = ring.add(acc, ring.mul(pik, ring.pow(x.coords[i], self.q ** (k - i))))
                pik = ring.mul(pik, pi)
            out.append(acc)
        return out

    def ghost_solve(self, ghost_vals) -> WittVec:
        """Invert the ghost map on a pi-torsion-free ring (test oracle)."""
        ring = self.coeff
        pi = ring.from_ol(OLRing(self.config, self.cache.wprec).pi())
        coords = []
        for k in range(len(ghost_vals)):
            acc = ring.zero()
            pik = ring.one()
            for i in range(k):
                acc = ring.add(acc, ring.mul(pik, ring.pow(coords[i], self.q ** (k - i))))
                pik = ring.mul(pik, pi)
            num = ring.sub(ghost_vals[k], acc)
            try:
                coords.append(ring.divide_pi(num, k) if k else num)
            except Indivisible as exc:
                raise IntegralityFailure(f"ghost vector not in the image: {exc}")
        return self.make(coords)

    # -- arithmetic -------------------------------------------------------

    def _binary(self, kind: str, x: WittVec, y: WittVec) -> WittVec:
        if len(x.coords) != self.length or len(y.coords) != self.length:
            raise RingMismatch("length mismatch")
        values = list(x.coords) + list(y.coords)
        return self.make(
            self.cache.evaluate(kind, k, values, self.coeff) for k in range(self.length)
        )

    def add(self, x: WittVec, y: WittVec) -> WittVec:
        return self._binary("S", x, y)

    def mul(self, x: WittVec, y: WittVec) -> WittVec:
        return self._binary("M", x, y)

    def neg(self, x: WittVec) -> WittVec:
        values = list(x.coords)
        return self.make(
            self.cache.evaluate("NEG", k, values, self.coeff) for k in range(self.length)
        )

    def sub(self, x: WittVec, y: WittVec) -> WittVec:
        return self.add(x, self.neg(y))

    def frobenius(self, x: WittVec) -> WittVec:
        """F: W_(L,n) -> W_(L,n-1); ghost-shift on torsion-free rings."""
        if self.length < 2:
            raise ConfigError("Frobenius needs length >= 2")
        out = []
        for k in range(self.length - 1):
            out.append(self.cache.evaluate("F", k, list(x.coords), self.coeff))
        return WittVec(self.coeff, tuple(out))

    def verschiebung(self, x: WittVec) -> WittVec:
        """V: (x_0, ..., x_(n-1)) -> (0, x_0, ..., x_(n-1)), length n+1."""
        return WittVec(self.coeff, (self.coeff.zero(),) + x.coords)

    def scalar_ol(self, c: OLApprox, x: WittVec) -> WittVec:
        """Multiplication by c in the O_L-algebra structure of W_L(R)."""
        return self.mul(self.from_ol_scalar(c), x)

    def from_ol_scalar(self, c: OLApprox) -> WittVec:
        """Image of c under the structure map O_L -> W_L(R).

        Coordinates are those of the delta-section of c over O_L (phi = id),
        pushed into R coordinatewise.
        """
        R = OLRing(self.config, max(c.prec, self.length + 1))
        sec = delta_section(R.from_ol(c), R, self.length)
        return self.make([self.coeff.from_ol(s) for s in sec.coords])

    def eq(self, x: WittVec, y: WittVec) -> bool:
        return all(self.coeff.eq(a, b) for a, b in zip(x.coords, y.coords))

    def in_pi_image(self, z: WittVec) -> bool:
        """Whether z lies in pi*W_L(R), witnessed through the ghost map.

        Valid on pi-torsion-free rings: z = pi*w iff ghost(z)/pi is again a
        ghost vector with integral coordinates.
        """
        if not getattr(self.coeff, "pi_torsion_free", False):
            raise ConfigError("pi-image test requires a torsion-free ring")
        try:
            shifted = [self.coeff.divide_pi(g, 1) for g in self.ghost(z)]
            self.ghost_solve(shifted)
            return True
        except (Indivisible, IntegralityFailure):
            return False

    def random(self, rng) -> WittVec:
        return self.make([self.coeff.random_element(rng) for _ in range(self.length)])

    def shorten(self, x: WittVec, length: int) -> WittVec:
        return WittVec(self.coeff, x.coords[:length])


# ---------------------------------------------------------------------------
# delta-sections and the delta operator
# ---------------------------------------------------------------------------


def delta_section(a, ring, length: int) -> WittVec:
    """The unique delta-compatible section s_R: R -> W_L(R).

    Requires ring to carry a designated q-Frobenius lift (ring.frobenius)
    and exact division by pi (pi-torsion-free).  Coordinates are solved from
    the ghost identities w_n(s(a)) = phi^n(a).
    """
    if not getattr(ring, "pi_torsion_free", False):
        raise ConfigError("delta-section needs a pi-torsion-free ring")
    config = _ring_config(ring)
    q = config.q
    pi = ring.from_ol(OLRing(config, max(getattr(ring, "prec", 2), 2)).pi())
    coords = []
    phi_a = a
    for k in range(length):
        if k > 0:
            phi_a = ring.frobenius(phi_a)
        acc = ring.zero()
        pik = ring.one()
        for i in range(k):
            acc = ring.add(acc, ring.mul(pik, ring.pow(coords[i], q ** (k - i))))
            pik = ring.mul(pik, pi)
        num = ring.sub(phi_a, acc)
        try:
            coords.append(ring.divide_pi(num, k) if k else num)
        except Indivisible as exc:
            raise IntegralityFailure(
                f"delta-section ghost solve failed at level {k}: {exc}"
            )
    return WittVec(ring, tuple(coords))


def delta_from_w2(a, ring):
    """delta(a) = (phi(a) - a^q) / pi, the length-2 section's top coordinate."""
    config = _ring_config(ring)
    num = ring.sub(ring.frobenius(a), ring.pow(a, config.q))
    return ring.divide_pi(num, 1)


def _ring_config(ring) -> OLConfig:
    cfg = getattr(ring, "config", None)
    if cfg is None:
        raise ConfigError("ring does not expose an O_L config")
    return cfg


# -- spec-level aliases -------------------------------------------------------


def ghost_map(x: WittVec, config: OLConfig) -> list:
    ring = WittRing(x.ring, len(x.coords), config)
    return ring.ghost(x)


def witt_add(x: WittVec, y: WittVec, config: OLConfig) -> WittVec:
    return WittRing(x.ring, len(x.coords), config).add(x, y)


def witt_mul(x: WittVec, y: WittVec, config: OLConfig) -> WittVec:
    return WittRing(x.ring, len(x.coords), config).mul(x, y)


def witt_frobenius(x: WittVec, config: OLConfig) -> WittVec:
    return WittRing(x.ring, len(x.coords), config).frobenius(x)


def witt_verschiebung(x: WittVec, config: OLConfig) -> WittVec:
    return WittRing(x.ring, len(x.coords), config).verschiebung(x)
