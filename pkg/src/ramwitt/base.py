"""Exact finite-precision arithmetic for F_q, O_L and unramified extensions.

O_L is the ring of integers of a finite extension L/Q_p with residue field
of size q = p^f and ramification index e.  Elements are represented in a
two-layer tower: the unramified part is a polynomial quotient over Z/p^k
(modulus a lift of a Conway polynomial), the ramified part an Eisenstein
quotient in the uniformizer pi.  An element "known mod pi^P" stores its
coefficients mod p^(ceil(P/e)+1); valuations and exact division by pi are
local computations in this representation.

Equality is always "at joint precision": there is no exact-equality
predicate for approximated elements.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, List, Optional, Sequence

from .errors import (
    ConfigError,
    Indivisible,
    InsufficientPrecision,
    NotUnit,
    RingMismatch,
)

# Conway polynomials (coefficients low -> high, monic) for q <= 49.
# Default moduli so test vectors are reproducible; overridable per config.
CONWAY = {
    (2, 1): (1, 1),
    (2, 2): (1, 1, 1),
    (2, 3): (1, 1, 0, 1),
    (2, 4): (1, 1, 0, 0, 1),
    (2, 5): (1, 0, 1, 0, 0, 1),
    (3, 1): (1, 1),
    (3, 2): (2, 2, 1),
    (3, 3): (1, 2, 0, 1),
    (5, 1): (3, 1),
    (5, 2): (2, 4, 1),
    (7, 1): (4, 1),
    (7, 2): (3, 6, 1),
    (11, 1): (9, 1),
    (13, 1): (11, 1),
    (17, 1): (14, 1),
    (19, 1): (17, 1),
    (23, 1): (18, 1),
    (29, 1): (27, 1),
    (31, 1): (28, 1),
    (37, 1): (35, 1),
    (41, 1): (35, 1),
    (43, 1): (40, 1),
    (47, 1): (42, 1),
}


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    return all(n % d for d in range(2, int(math.isqrt(n)) + 1))


# ---------------------------------------------------------------------------
# F_q
# ---------------------------------------------------------------------------


class FqField:
    """The finite field F_q, q = p^f, as polynomials over F_p.

    Elements are tuples of f integers in [0, p): coefficient vectors in the
    power basis of the defining modulus.
    """

    pi_torsion_free = False

    def __init__(self, p: int, f: int, modulus: Optional[Sequence[int]] = None):
        if not _is_prime(p):
            raise ConfigError(f"p = {p} is not prime")
        if f < 1:
            raise ConfigError("f must be >= 1")
        self.p = p
        self.f = f
        self.q = p**f
        self.card = self.q
        if modulus is None:
            if (p, f) not in CONWAY:
                raise ConfigError(f"no built-in modulus for q = {p}^{f}; supply one")
            modulus = CONWAY[(p, f)]
        mod = tuple(c % p for c in modulus)
        if len(mod) != f + 1 or mod[-1] != 1:
            raise ConfigError("modulus must be monic of degree f")
        self.modulus = mod
        if f > 1 and not self._modulus_irreducible():
            raise ConfigError("modulus is reducible over F_p")

    # -- constructors ---------------------------------------------------------

    def zero(self):
        return (0,) * self.f

    def one(self):
        return self.from_int(1)

    def gen(self):
        """The class of x; for f = 1 the root of the degree-1 modulus."""
        if self.f == 1:
            return ((-self.modulus[0]) % self.p,)
        return tuple(1 if i == 1 else 0 for i in range(self.f))

    def from_int(self, n: int):
        return (n % self.p,) + (0,) * (self.f - 1)

    def from_coeffs(self, cs: Sequence[int]):
        if len(cs) > self.f:
            raise ConfigError("coefficient vector too long")
        cs = [c % self.p for c in cs]
        return tuple(cs) + (0,) * (self.f - len(cs))

    # -- arithmetic -------------------------------------------------------

    def add(self, a, b):
        return tuple((x + y) % self.p for x, y in zip(a, b))

    def sub(self, a, b):
        return tuple((x - y) % self.p for x, y in zip(a, b))

    def neg(self, a):
        return tuple((-x) % self.p for x in a)

    def mul(self, a, b):
        p, f = self.p, self.f
        if f == 1:
            return (a[0] * b[0] % p,)
        conv = [0] * (2 * f - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    conv[i + j] += x * y
        for k in range(2 * f - 2, f - 1, -1):
            c = conv[k] % p
            if c:
                for i in range(f):
                    conv[k - f + i] -= c * self.modulus[i]
            conv[k] = 0
        return tuple(c % p for c in conv[:f])

    def pow(self, a, n: int):
        r = self.one()
        b = a
        while n:
            if n & 1:
                r = self.mul(r, b)
            b = self.mul(b, b)
            n >>= 1
        return r

    def eq(self, a, b) -> bool:
        return a == b

    def is_zero(self, a) -> bool:
        return all(c == 0 for c in a)

    def is_unit(self, a) -> bool:
        return not self.is_zero(a)

    def inv(self, a):
        if self.is_zero(a):
            raise NotUnit("division by zero in F_q")
        return self.pow(a, self.q - 2)

    def frobenius(self, a):
        """q-power Frobenius: the identity on F_q."""
        return a

    def elements(self) -> Iterator:
        def rec(i):
            if i == self.f:
                yield ()
                return
            for rest in rec(i + 1):
                for c in range(self.p):
                    yield (c,) + rest

        return iter(rec(0))

    def random_element(self, rng):
        return tuple(rng.randrange(self.p) for _ in range(self.f))

    def from_ol(self, x) -> tuple:
        """Residue of an O_L element (the pi-degree-0 layer mod p)."""
        return tuple(c % self.p for c in x.coeffs[: self.f])

    # single-int encoding (prime fields only), used by series fast paths
    def raw_modulus(self, prec=None):
        return self.p if self.f == 1 else None

    def elt_to_int(self, a) -> int:
        return a[0]

    def int_to_elt(self, n: int, prec=None):
        return (n % self.p,) + (0,) * (self.f - 1)

    def fmt(self, a) -> str:
        if self.f == 1:
            return str(a[0])
        parts = []
        for i, c in enumerate(a):
            if c == 0:
                continue
            if i == 0:
                parts.append(str(c))
            else:
                s = "u" if i == 1 else f"u^{i}"
                parts.append(s if c == 1 else f"{c}*{s}")
        return " + ".join(parts) if parts else "0"

    def _modulus_irreducible(self) -> bool:
        gen = tuple(1 if i == 1 else 0 for i in range(self.f))

        def frob_iter(times):
            t = gen
            for _ in range(times):
                t = self.pow(t, self.p)
            return t

        if frob_iter(self.f) != gen:
            return False
        for l in range(2, self.f + 1):
            if self.f % l == 0 and _is_prime(l) and frob_iter(self.f // l) == gen:
                return False
        return True

    def __repr__(self):
        return f"FqField(p={self.p}, f={self.f})"

    def __eq__(self, other):
        return (
            isinstance(other, FqField)
            and (self.p, self.f, self.modulus) == (other.p, other.f, other.modulus)
        )

    def __hash__(self):
        return hash(("Fq", self.p, self.f, self.modulus))


# -- polynomials over a finite field (internal helpers) ----------------------


def fqpoly_trim(F: FqField, xs: List) -> List:
    while xs and F.is_zero(xs[-1]):
        xs.pop()
    return xs


def fqpoly_mulmod(F: FqField, a: List, b: List, g: List) -> List:
    conv = [F.zero()] * (len(a) + len(b) - 1) if a and b else []
    for i, x in enumerate(a):
        if F.is_zero(x):
            continue
        for j, y in enumerate(b):
            conv[i + j] = F.add(conv[i + j], F.mul(x, y))
    return fqpoly_rem(F, conv, g)


def fqpoly_rem(F: FqField, a: List, g: List) -> List:
    a = list(a)
    dg = len(g) - 1
    lead_inv = F.inv(g[-1])
    for k in range(len(a) - 1, dg - 1, -1):
        c = F.mul(a[k], lead_inv)
        if not F.is_zero(c):
            for i in range(dg + 1):
                a[k - dg + i] = F.sub(a[k - dg + i], F.mul(c, g[i]))
    return fqpoly_trim(F, a[:dg])

def fqpoly_gcd(F: FqField, a: List, b: List) -> List:
    a, b = fqpoly_trim(F, list(a)), fqpoly_trim(F, list(b))
    while b:
        a, b = b, fqpoly_rem(F, a, b)
    return a


def fqpoly_powmod(F: FqField, a: List, n: int, g: List) -> List:
    r = [F.one()]
    b = fqpoly_rem(F, list(a), g)
    while n:
        if n & 1:
            r = fqpoly_mulmod(F, r, b, g)
        b = fqpoly_mulmod(F, b, b, g)
        n >>= 1
    return r


def fqpoly_irreducible(F: FqField, g: List) -> bool:
    """Irreducibility over F_q: x^(q^(m/l)) tests plus the full identity."""
    m = len(g) - 1
    if m < 1:
        return False
    x = [F.zero(), F.one()]
    t = fqpoly_powmod(F, x, F.q**m, g)
    if fqpoly_trim(F, [F.sub(u, v) for u, v in _zip_pad(F, t, x)]):
        return False
    for l in range(2, m + 1):
        if m % l == 0 and _is_prime(l):
            t = fqpoly_powmod(F, x, F.q ** (m // l), g)
            diff = [F.sub(u, v) for u, v in _zip_pad(F, t, x)]
            if len(fqpoly_gcd(F, diff, g)) != 1:
                return False
    return True


def _zip_pad(F: FqField, a: List, b: List):
    n = max(len(a), len(b))
    a = list(a) + [F.zero()] * (n - len(a))
    b = list(b) + [F.zero()] * (n - len(b))
    return zip(a, b)


def find_irreducible(F: FqField, m: int) -> List:
    """Deterministic search for a monic degree-m irreducible over F_q."""
    if m == 1:
        return [F.neg(F.gen()), F.one()]
    elts = list(F.elements())

    def rec(coeffs, i):
        if i == m:
            g = coeffs + [F.one()]
            if fqpoly_irreducible(F, g):
                yield g
            return
        for c in elts:
            yield from rec(coeffs + [c], i + 1)

    for g in rec([], 0):
        return g
    raise ConfigError("no irreducible polynomial found")


class RelExtField:
    """F_{q^m} presented relatively: F_q[v]/(g) for g irreducible of degree m.

    Elements are tuples of m F_q-elements (v-power basis).  This is the
    residue field of an UnramExt and matches its coefficient convention.
    """

    def __init__(self, base: FqField, m: int, modulus: Optional[List] = None):
        self.base = base
        self.m = m
        self.p = base.p
        self.q = base.q
        self.card = base.q**m
        if modulus is None:
            if base.f == 1 and m > 1 and (base.p, m) in CONWAY:
                modulus = [base.from_int(c) for c in CONWAY[(base.p, m)]]
            else:
                modulus = find_irreducible(base, m)
        if len(modulus) != m + 1 or not base.eq(modulus[-1], base.one()):
            raise ConfigError("residue modulus must be monic of degree m")
        self.modulus = tuple(modulus)
        if m > 1 and not fqpoly_irreducible(base, list(modulus)):
            raise ConfigError("residue modulus is reducible over F_q")

    def zero(self):
        return (self.base.zero(),) * self.m

    def one(self):
        return (self.base.one(),) + (self.base.zero(),) * (self.m - 1)

    def gen(self):
        if self.m == 1:
            return (self.base.gen(),)
        return (
            (self.base.zero(), self.base.one())
            + (self.base.zero(),) * (self.m - 2)
        )

    def from_base(self, a):
        return (a,) + (self.base.zero(),) * (self.m - 1)

    def from_int(self, n: int):
        return self.from_base(self.base.from_int(n))

    def add(self, x, y):
        return tuple(self.base.add(a, b) for a, b in zip(x, y))

    def sub(self, x, y):
        return tuple(self.base.sub(a, b) for a, b in zip(x, y))

    def neg(self, x):
        return tuple(self.base.neg(a) for a in x)

    def mul(self, x, y):
        r = fqpoly_mulmod(self.base, list(x), list(y), list(self.modulus))
        r += [self.base.zero()] * (self.m - len(r))
        return tuple(r)

    def pow(self, x, n: int):
        r = self.one()
        b = x
        while n:
            if n & 1:
                r = self.mul(r, b)
            b = self.mul(b, b)
            n >>= 1
        return r

    def eq(self, x, y) -> bool:
        return x == y

    def is_zero(self, x) -> bool:
        return all(self.base.is_zero(a) for a in x)

    def inv(self, x):
        if self.is_zero(x):
            raise NotUnit("division by zero")
        return self.pow(x, self.card - 2)

    def frobenius(self, x):
        """q-power Frobenius of F_{q^m} over F_q."""
        return self.pow(x, self.q)

    def elements(self) -> Iterator:
        def rec(i):
            if i == self.m:
                yield ()
                return
            for rest in rec(i + 1):
                for c in self.base.elements():
                    yield (c,) + rest

        return iter(rec(0))

    def random_element(self, rng):
        return tuple(self.base.random_element(rng) for _ in range(self.m))

    def fmt(self, x) -> str:
        parts = []
        for i, c in enumerate(x):
            if self.base.is_zero(c):
                continue
            body = self.base.fmt(c)
            if i == 0:
                parts.append(body)
            else:
                s = "v" if i == 1 else f"v^{i}"
                parts.append(f"({body})*{s}" if body != "1" else s)
        return " + ".join(parts) if parts else "0"


# ---------------------------------------------------------------------------
# O_L configuration
# ---------------------------------------------------------------------------


class OLConfig:
    """Defining data for O_L: prime p, residue degree f, ramification e.

    The unramified subring is Z_p[u]/(conway lift); pi is a root of a monic
    Eisenstein polynomial of degree e over that subring.  The default
    Eisenstein polynomial is x^e - p, so for e = 1 we get pi = p.
    """

    def __init__(
        self,
        p: int,
        f: int = 1,
        e: int = 1,
        eisenstein: Optional[Sequence] = None,
        conway_override: Optional[Sequence[int]] = None,
    ):
        if not _is_prime(p):
            raise ConfigError(f"p = {p} is not prime")
        if f < 1 or e < 1:
            raise ConfigError("f and e must be >= 1")
        self.p = p
        self.f = f
        self.e = e
        self.q = p**f
        self.residue = FqField(p, f, conway_override)
        self.unram_modulus = tuple(int(c) for c in self.residue.modulus)
        if eisenstein is None:
            eis = [[0] * f for _ in range(e + 1)]
            eis[0][0] = -p
            eis[e][0] = 1
            eisenstein = eis
        self.eisenstein = tuple(self._as_unram_vec(c) for c in eisenstein)
        self._validate_eisenstein()

    def _as_unram_vec(self, c) -> tuple:
        if isinstance(c, int):
            return (c,) + (0,) * (self.f - 1)
        c = tuple(int(x) for x in c)
        if len(c) > self.f:
            raise ConfigError("Eisenstein coefficient vector too long")
        return c + (0,) * (self.f - len(c))

    def _validate_eisenstein(self):
        e, p = self.e, self.p
        if len(self.eisenstein) != e + 1:
            raise ConfigError("Eisenstein polynomial must have degree e")
        if self.eisenstein[e] != (1,) + (0,) * (self.f - 1):
            raise ConfigError("Eisenstein polynomial must be monic")
        for c in self.eisenstein[:e]:
            if any(x % p for x in c):
                raise ConfigError(
                    "non-leading Eisenstein coefficients must be divisible by p"
                )
        c0 = self.eisenstein[0]
        if all(x % (p * p) == 0 for x in c0):
            raise ConfigError("Eisenstein constant term must be p times a unit")

    def kdigits(self, prec: int) -> int:
        """Number of stored p-digits for elements known mod pi^prec."""
        return -(-prec // self.e) + 1

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "f": self.f,
            "e": self.e,
            "eisenstein_coeffs": [list(c) for c in self.eisenstein],
            "conway_override": list(self.residue.modulus),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "OLConfig":
        return cls(
            p=int(d["p"]),
            f=int(d.get("f", 1)),
            e=int(d.get("e", 1)),
            eisenstein=d.get("eisenstein_coeffs"),
            conway_override=d.get("conway_override"),
        )

    def __repr__(self):
        return f"OLConfig(p={self.p}, f={self.f}, e={self.e})"

    def __eq__(self, other):
        return isinstance(other, OLConfig) and (
            (self.p, self.f, self.e, self.eisenstein, self.unram_modulus)
            == (other.p, other.f, other.e, other.eisenstein, other.unram_modulus)
        )

    def __hash__(self):
        return hash(("OL", self.p, self.f, self.e, self.eisenstein))


# ---------------------------------------------------------------------------
# O_L elements
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OLApprox:
    """An element of O_L known mod pi^prec.

    coeffs has length e*f; entry i*f + j is the integer coefficient of
    pi^i * u^j, stored mod p^kdigits(prec).
    """

    config: OLConfig
    coeffs: tuple
    prec: int

    def _ring(self) -> "OLRing":
        return OLRing(self.config, max(self.prec, 1))

    def __add__(self, other):
        return self._ring().add(self, other)

    def __sub__(self, other):
        return self._ring().sub(self, other)

    def __neg__(self):
        return self._ring().neg(self)

    def __mul__(self, other):
        return self._ring().mul(self, other)

    def __pow__(self, n):
        return self._ring().pow(self, n)

    def __repr__(self):
        return self._ring().fmt(self)

    def to_dict(self) -> dict:
        return {"digits": list(self.coeffs), "prec": self.prec}


class OLRing:
    """Coefficient ring over O_L at a working precision.

    The ring object fixes the precision used by constructors
    (``from_int``, ``random_element``); arithmetic on elements always
    follows the min-precision rule regardless.
    """

    pi_torsion_free = True

    def __init__(self, config: OLConfig, prec: int):
        if prec < 1:
            raise ConfigError("prec = 0 rejected for constructors")
        self.config = config
        self.prec = prec
        self.p = config.p
        self.q = config.q
        self._ppi_cache: dict = {}

    # -- representation helpers ----------------------------------------------

    def _pk(self, prec: int) -> int:
        return self.p ** self.config.kdigits(prec)

    def _reduce(self, coeffs, prec: int) -> tuple:
        pk = self._pk(prec)
        return tuple(c % pk for c in coeffs)

    def make(self, coeffs: Sequence[int], prec: Optional[int] = None) -> OLApprox:
        prec = self.prec if prec is None else prec
        if prec < 1:
            raise ConfigError("prec = 0 rejected for constructors")
        ef = self.config.e * self.config.f
        cs = [int(c) for c in coeffs]
        if len(cs) > ef:
            raise ConfigError(f"digit vector longer than e*f = {ef}")
        cs += [0] * (ef - len(cs))
        return OLApprox(self.config, self._reduce(cs, prec), prec)

    def zero(self) -> OLApprox:
        return self.make([0])

    def one(self) -> OLApprox:
        return self.make([1])

    def from_int(self, n: int) -> OLApprox:
        return self.make([n])

    def from_ol(self, x: OLApprox) -> OLApprox:
        return self.cap(x, self.prec)

    def from_residue(self, a) -> OLApprox:
        """Coefficient-wise lift of a residue-field element."""
        f = self.config.f
        cs = [0] * (self.config.e * f)
        for j in range(f):
            cs[j] = a[j]
        return self.make(cs)

    def residue_field(self) -> FqField:
        return self.config.residue

    def residue(self, x: OLApprox):
        return tuple(c % self.p for c in x.coeffs[: self.config.f])

    def pi(self) -> OLApprox:
        e, f = self.config.e, self.config.f
        if e == 1:
            # pi = -c0 where the Eisenstein polynomial is x + c0
            return self.make([-c for c in self.config.eisenstein[0]])
        cs = [0] * (e * f)
        cs[f] = 1  # pi^1 * u^0
        return self.make(cs)

    def cap(self, x: OLApprox, prec: int) -> OLApprox:
        if x.config != self.config:
            raise RingMismatch("element from a different O_L")
        prec = min(prec, x.prec)
        return OLApprox(self.config, self._reduce(x.coeffs, prec), prec)

    # -- unramified-layer arithmetic ------------------------------------------

    def _umul(self, a, b, pk):
        """Multiply two length-f coefficient vectors mod (unram modulus, pk)."""
        f = self.config.f
        if f == 1:
            return [a[0] * b[0] % pk]
        mod = self.config.unram_modulus
        conv = [0] * (2 * f - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    conv[i + j] += x * y
        for k in range(2 * f - 2, f - 1, -1):
            c = conv[k] % pk
            if c:
                for i in range(f):
                    conv[k - f + i] -= c * mod[i]
            conv[k] = 0
        return [c % pk for c in conv[:f]]

    # -- ring operations --------------------------------------------------

    def _joint(self, x: OLApprox, y: OLApprox) -> int:
        if x.config != self.config or y.config != self.config:
            raise RingMismatch("operands from different O_L configs")
        return min(x.prec, y.prec)

    def add(self, x: OLApprox, y: OLApprox) -> OLApprox:
        prec = self._joint(x, y)
        cs = [a + b for a, b in zip(x.coeffs, y.coeffs)]
        return OLApprox(self.config, self._reduce(cs, prec), prec)

    def sub(self, x: OLApprox, y: OLApprox) -> OLApprox:
        prec = self._joint(x, y)
        cs = [a - b for a, b in zip(x.coeffs, y.coeffs)]
        return OLApprox(self.config, self._reduce(cs, prec), prec)

    def neg(self, x: OLApprox) -> OLApprox:
        return OLApprox(self.config, self._reduce([-c for c in x.coeffs], x.prec), x.prec)

    def mul(self, x: OLApprox, y: OLApprox) -> OLApprox:
        prec = self._joint(x, y)
        e, f = self.config.e, self.config.f
        pk = self._pk(prec)
        if e == 1 and f == 1:
            return OLApprox(self.config, (x.coeffs[0] * y.coeffs[0] % pk,), prec)
        if e == 1:
            out = self._umul(x.coeffs, y.coeffs, pk)
            return OLApprox(self.config, tuple(out), prec)
        ax = [x.coeffs[i * f : (i + 1) * f] for i in range(e)]
        ay = [y.coeffs[i * f : (i + 1) * f] for i in range(e)]
        conv = [[0] * f for _ in range(2 * e - 1)]
        for i in range(e):
            for j in range(e):
                prod = self._umul(ax[i], ay[j], pk)
                tgt = conv[i + j]
                for t in range(f):
                    tgt[t] += prod[t]
        # reduce pi-degree by the Eisenstein relation
        for k in range(2 * e - 2, e - 1, -1):
            ck = [c % pk for c in conv[k]]
            if any(ck):
                for i in range(e):
                    prod = self._umul(ck, self.config.eisenstein[i], pk)
                    tgt = conv[k - e + i]
                    for t in range(f):
                        tgt[t] -= prod[t]
            conv[k] = [0] * f
        out = []
        for i in range(e):
            out.extend(c % pk for c in conv[i])
        return OLApprox(self.config, tuple(out), prec)

    def pow(self, x: OLApprox, n: int) -> OLApprox:
        r = self.cap(self.one(), x.prec)
        b = x
        while n:
            if n & 1:
                r = self.mul(r, b)
            b = self.mul(b, b)
            n >>= 1
        return r

    # -- valuation and precision -------------------------------------------

    def valuation(self, x: OLApprox) -> Optional[int]:
        """pi-adic valuation, or None when x is 0 at its precision.

        The tower terms pi^i * a_i have pairwise distinct valuations mod e,
        so the minimum over terms is exact.
        """
        e, f, p = self.config.e, self.config.f, self.p
        k = self.config.kdigits(x.prec)
        pk = p**k
        best = None
        for i in range(e):
            vec = x.coeffs[i * f : (i + 1) * f]
            vp = None
            for c in vec:
                c %= pk
                if c:
                    v = 0
                    while c % p == 0:
                        v += 1
                        c //= p
                    vp = v if vp is None else min(vp, v)
            if vp is not None:
                val = e * vp + i
                best = val if best is None else min(best, val)
        if best is None or best >= x.prec:
            return None
        return best

    def is_zero(self, x: OLApprox) -> bool:
        return self.valuation(x) is None

    def eq(self, x: OLApprox, y: OLApprox) -> bool:
        return self.is_zero(self.sub(x, y))

    def is_unit(self, x: OLApprox) -> bool:
        return self.valuation(x) == 0

    def inv(self, x: OLApprox) -> OLApprox:
        """Inverse of a unit, by residue inversion plus Newton lifting."""
        if not self.is_unit(x):
            raise NotUnit("not a unit of O_L at this precision")
        res = self.residue_field()
        y = self.cap(self.from_residue(res.inv(self.residue(x))), x.prec)
        two = self.cap(self.from_int(2), x.prec)
        steps = max(1, math.ceil(math.log2(max(2, x.prec))) + 1)
        for _ in range(steps):
            y = self.mul(y, self.sub(two, self.mul(x, y)))
        return y

    def _p_over_pi(self, prec: int) -> OLApprox:
        """The unit-times-power element p/pi in O_L (val(p) = e >= 1).

        From the Eisenstein relation pi^e + sum_{i<e} c_i pi^i = 0 with
        c_0 = p*u0:  p/pi = -u0^{-1} (pi^(e-1) + sum_{i>=1} c_i pi^(i-1)).
        """
        if prec in self._ppi_cache:
            return self._ppi_cache[prec]
        e, f, p = self.config.e, self.config.f, self.p
        u0 = self.make([c // p for c in self.config.eisenstein[0]], prec)
        acc = [0] * (e * f)
        acc[(e - 1) * f] = 1
        out = self.make(acc, prec)
        for i in range(1, e):
            ci = self.make(list(self.config.eisenstein[i]), prec)
            term = [0] * (e * f)
            term[(i - 1) * f] = 1
            out = self.add(out, self.mul(ci, self.make(term, prec)))
        val = self.neg(self.mul(self.inv(u0), out))
        self._ppi_cache[prec] = val
        return val

    def divide_pi(self, x: OLApprox, k: int = 1) -> OLApprox:
        """x / pi^k at precision prec - k; exactness is checked."""
        if k == 0:
            return x
        v = self.valuation(x)
        if v is None:
            if x.prec <= k:
                raise InsufficientPrecision(
                    "element is 0 at current precision; valuation unknown"
                )
            return OLApprox(self.config, self._reduce(x.coeffs, x.prec - k), x.prec - k)
        if v < k:
            raise Indivisible(f"valuation {v} < {k}")
        e, f, p = self.config.e, self.config.f, self.p
        cur = x
        for _ in range(k):
            prec = cur.prec - 1
            if prec < 1:
                raise InsufficientPrecision("precision exhausted by division")
            pk = self._pk(cur.prec)
            # x = a_0 + pi*(rest); x/pi = rest + (a_0/p)*(p/pi)
            a0 = [(c % pk) // p for c in cur.coeffs[:f]]
            rest = list(cur.coeffs[f:]) + [0] * f
            b = self.make(a0 + [0] * (e - 1) * f, prec)
            shifted = OLApprox(self.config, self._reduce(rest, prec), prec)
            cur = self.add(shifted, self.mul(b, self._p_over_pi(prec)))
        return cur

    def frobenius(self, x: OLApprox) -> OLApprox:
        """phi fixes O_L pointwise."""
        return x

    def random_element(self, rng) -> OLApprox:
        pk = self._pk(self.prec)
        ef = self.config.e * self.config.f
        return OLApprox(
            self.config, tuple(rng.randrange(pk) for _ in range(ef)), self.prec
        )

    # -- fast-path introspection -------------------------------------------

    def raw_modulus(self, prec: int) -> Optional[int]:
        """Modulus for a single-int encoding of elements, when one exists."""
        if self.config.e == 1 and self.config.f == 1:
            return self._pk(prec)
        return None

    def elt_to_int(self, x: OLApprox) -> int:
        return x.coeffs[0]

    def int_to_elt(self, n: int, prec: int) -> OLApprox:
        return OLApprox(self.config, (n % self._pk(prec),), prec)

    def fmt(self, x: OLApprox) -> str:
        e, f, p = self.config.e, self.config.f, self.p
        if e == 1 and f == 1:
            pk = self._pk(x.prec)
            c = x.coeffs[0] % pk
            if c > pk // 2:
                c -= pk
            return f"{c} + O({p}^{x.prec})"
        parts = []
        for i in range(e):
            for j in range(f):
                c = x.coeffs[i * f + j]
                if c == 0:
                    continue
                basis = []
                if i:
                    basis.append("pi" if i == 1 else f"pi^{i}")
                if j:
                    basis.append("u" if j == 1 else f"u^{j}")
                term = "*".join([str(c)] + basis) if basis else str(c)
                parts.append(term)
        body = " + ".join(parts) if parts else "0"
        return f"{body} + O(pi^{x.prec})"

    def __eq__(self, other):
        # ring identity is the O_L config; prec is a working attribute and
        # elements carry their own precision
        return isinstance(other, OLRing) and self.config == other.config

    def __hash__(self):
        return hash(("OLRing", self.config))

    def __repr__(self):
        return f"OLRing({self.config!r}, prec={self.prec})"


# ---------------------------------------------------------------------------
# Unramified extensions W_L(F_{q^m})
# ---------------------------------------------------------------------------


class UnramExt:
    """W_L(F_{q^m}) realized as O_L[v]/(M(v)).

    M is a monic degree-m lift of an irreducible polynomial over F_q.  The
    ring carries the Hensel-lifted q-power Frobenius: the unique ring
    automorphism fixing O_L with phi(x) = x^q mod pi.  Elements are tuples
    of m OLApprox coefficients in the v-power basis.
    """

    pi_torsion_free = True

    def __init__(
        self,
        config: OLConfig,
        m: int,
        prec: int,
        residue_modulus: Optional[Sequence] = None,
    ):
        if m < 1:
            raise ConfigError("extension degree m must be >= 1")
        self.config = config
        self.m = m
        self.prec = prec
        self.p = config.p
        self.q = config.q
        self.base = OLRing(config, prec)
        self._res = RelExtField(config.residue, m, residue_modulus)
        self.modulus = tuple(self.base.from_residue(c) for c in self._res.modulus)
        self._phi_gen = None
        self._phi_gen_pows = None

    # -- constructors ---------------------------------------------------------

    def zero(self):
        return (self.base.zero(),) * self.m

    def one(self):
        return (self.base.one(),) + (self.base.zero(),) * (self.m - 1)

    def gen(self):
        if self.m == 1:
            # v is the Teichmuller-type root of the degree-1 modulus
            return (self.base.neg(self.modulus[0]),)
        return (self.base.zero(), self.base.one()) + (self.base.zero(),) * (self.m - 2)

    def from_int(self, n: int):
        return (self.base.from_int(n),) + (self.base.zero(),) * (self.m - 1)

    def from_ol(self, x: OLApprox):
        return (self.base.from_ol(x),) + (self.base.zero(),) * (self.m - 1)

    def from_base_coeffs(self, cs: Sequence[OLApprox]):
        cs = list(cs)
        if len(cs) > self.m:
            raise ConfigError("coefficient vector too long")
        cs += [self.base.zero()] * (self.m - len(cs))
        return tuple(cs)

    def pi(self):
        return self.from_ol(self.base.pi())

    def residue_field(self) -> RelExtField:
        return self._res

    def residue(self, x):
        return tuple(self.base.residue(c) for c in x)

    def lift_residue(self, a):
        return tuple(self.base.from_residue(c) for c in a)

    def from_residue(self, a):
        return self.lift_residue(a)

    # -- arithmetic -------------------------------------------------------

    def add(self, x, y):
        return tuple(self.base.add(a, b) for a, b in zip(x, y))

    def sub(self, x, y):
        return tuple(self.base.sub(a, b) for a, b in zip(x, y))

    def neg(self, x):
        return tuple(self.base.neg(a) for a in x)

    def mul(self, x, y):
        m = self.m
        if m == 1:
            return (self.base.mul(x[0], y[0]),)
        zero = self.base.zero()
        conv = [zero] * (2 * m - 1)
        for i in range(m):
            if self.base.is_zero(x[i]):
                continue
            for j in range(m):
                conv[i + j] = self.base.add(conv[i + j], self.base.mul(x[i], y[j]))
        for k in range(2 * m - 2, m - 1, -1):
            ck = conv[k]
            if not self.base.is_zero(ck):
                for i in range(m):
                    conv[k - m + i] = self.base.sub(
                        conv[k - m + i], self.base.mul(ck, self.modulus[i])
                    )
        return tuple(conv[:m])

    def pow(self, x, n: int):
        r = self.cap(self.one(), min(c.prec for c in x))
        b = x
        while n:
            if n & 1:
                r = self.mul(r, b)
            b = self.mul(b, b)
            n >>= 1
        return r

    def eq(self, x, y) -> bool:
        return all(self.base.eq(a, b) for a, b in zip(x, y))

    def is_zero(self, x) -> bool:
        return all(self.base.is_zero(a) for a in x)

    def valuation(self, x) -> Optional[int]:
        vals = [v for v in (self.base.valuation(a) for a in x) if v is not None]
        return min(vals) if vals else None

    def is_unit(self, x) -> bool:
        return self.valuation(x) == 0

    def inv(self, x):
        if not self.is_unit(x):
            raise NotUnit("not a unit of W_L(F_{q^m})")
        rf = self._res
        y = self.cap(self.lift_residue(rf.inv(self.residue(x))), min(c.prec for c in x))
        two = self.from_int(2)
        steps = max(1, math.ceil(math.log2(max(2, self.prec))) + 1)
        for _ in range(steps):
            y = self.mul(y, self.sub(two, self.mul(x, y)))
        return y

    def divide_pi(self, x, k: int = 1):
        return tuple(self.base.divide_pi(a, k) for a in x)

    def cap(self, x, prec: int):
        return tuple(self.base.cap(a, prec) for a in x)

    # -- Frobenius ------------------------------------------------------------

    def frobenius_gen(self):
        """Hensel-lifted image phi(v): the root of M congruent to v^q mod pi."""
        if self._phi_gen is not None:
            return self._phi_gen
        if self.m == 1:
            self._phi_gen = self.gen()
            return self._phi_gen
        r = self.pow(self.gen(), self.q)
        steps = max(1, math.ceil(math.log2(max(2, self.prec))) + 2)
        for _ in range(steps):
            fr = self._eval_modulus(r)
            dfr = self._eval_modulus_derivative(r)
            r = self.sub(r, self.mul(fr, self.inv(dfr)))
        if not self.is_zero(self._eval_modulus(r)):
            raise ConfigError("Hensel lift of Frobenius failed")
        self._phi_gen = r
        return r

    def _eval_modulus(self, x):
        acc = self.from_base_coeffs([self.modulus[self.m]])
        for i in range(self.m - 1, -1, -1):
            acc = self.add(self.mul(acc, x), self.from_base_coeffs([self.modulus[i]]))
        return acc

    def _eval_modulus_derivative(self, x):
        acc = self.zero()
        for i in range(self.m, 0, -1):
            c = self.base.mul(self.modulus[i], self.base.from_int(i))
            acc = self.add(self.mul(acc, x), self.from_base_coeffs([c]))
        return acc

    def frobenius(self, x):
        """The q-power Frobenius lift; a ring automorphism fixing O_L."""
        if self.m == 1:
            return x
        if self._phi_gen_pows is None:
            fv = self.frobenius_gen()
            pows = [self.one()]
            for _ in range(self.m - 1):
                pows.append(self.mul(pows[-1], fv))
            self._phi_gen_pows = pows
        acc = self.zero()
        for i in range(self.m):
            acc = self.add(
                acc, self.mul(self.from_base_coeffs([x[i]]), self._phi_gen_pows[i])
            )
        return acc

    def random_element(self, rng):
        return tuple(self.base.random_element(rng) for _ in range(self.m))

    def elements_mod_pin(self, n: int) -> Iterator:
        """All elements of W_{L,n}(F_{q^m}) (requires e = 1)."""
        if self.config.e != 1:
            raise ConfigError("exhaustive enumeration implemented for e = 1 only")
        pn = self.p**n
        f = self.config.f
        base = OLRing(self.config, n)

        def rec(i):
            if i == self.m * f:
                yield []
                return
            for rest in rec(i + 1):
                for c in range(pn):
                    yield [c] + rest

        for digits in rec(0):
            yield tuple(
                base.make(digits[i * f : (i + 1) * f], n) for i in range(self.m)
            )

    def fmt(self, x) -> str:
        parts = []
        for i, c in enumerate(x):
            if self.base.is_zero(c):
                continue
            body = self.base.fmt(c).split(" + O(")[0]
            if i == 0:
                parts.append(body)
            else:
                v = "v" if i == 1 else f"v^{i}"
                parts.append(f"({body})*{v}")
        body = " + ".join(parts) if parts else "0"
        return f"{body} + O(pi^{self.prec})"

    def __repr__(self):
        return f"UnramExt({self.config!r}, m={self.m}, prec={self.prec})"

    def __eq__(self, other):
        return (
            isinstance(other, UnramExt)
            and self.config == other.config
            and self.m == other.m
            and self._res.modulus == other._res.modulus
        )

    def __hash__(self):
        return hash(("UnramExt", self.config, self.m))


# ---------------------------------------------------------------------------
# spec-level operations
# ---------------------------------------------------------------------------


def ol_make(config: OLConfig, digits: Sequence[int], prec: int) -> OLApprox:
    """Construct an O_L element from its digit vector at precision prec."""
    return OLRing(config, prec).make(digits, prec)


def val_divide_pi(x: OLApprox, k: int) -> OLApprox:
    """x / pi^k at precision prec - k (INDIVISIBLE if val < k)."""
    return OLRing(x.config, max(x.prec, 1)).divide_pi(x, k)


def teichmuller_lift(a, ring, prec: int):
    """Multiplicative lift of a residue-field element.

    Iterates t <- t^card (card the residue cardinality of the ring), which
    converges pi-adically to the unique root-of-unity lift; the result
    satisfies t^card = t exactly at precision.
    """
    card = ring.residue_field().card
    t = ring.cap(ring.from_residue(a), prec)
    for _ in range(prec + 1):
        t = ring.pow(t, card)
    if not ring.eq(ring.pow(t, card), t):
        raise InsufficientPrecision("Teichmuller iteration did not stabilize")
    return t


def unram_frobenius(ext: UnramExt, x):
    """The lifted q-power Frobenius on W_L(F_{q^m})."""
    return ext.frobenius(x)
