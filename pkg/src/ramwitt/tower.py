"""Finite models of the Lubin-Tate tower and the tilt/theta constructions.

Level n is the quotient O_L[T]/(q_n(T)), a free O_L-module of rank
q^(n-1)(q-1) with e_n = class of T; q_n is Eisenstein (constant term pi,
monic, middle coefficients divisible by pi) and [pi](e_n) = e_(n-1) under
the embedding T -> [pi](T).

The truncated tilt at base level N stores sequences (x_0, ..., x_(k-1))
with x_i in the mod-pi quotient and x_(i+1)^q = x_i exactly; the map sharp
lifts the deepest available component and raises it to the matching q-power,
which determines the value mod pi^(depth).  theta sums the sharps of the
q^i-th roots of the Witt coordinates against pi^i; with tilt depth k and
Witt length len it computes its target to precision min(len, k) by the
ghost-congruence bound (coordinates agreeing mod pi give ghost values
agreeing mod pi^(k+1) at level k).

The whole module assumes the tower base K = L with residue field F_q, so
the coefficient twists on iota are trivial, and requires the Frobenius
series f to be a monic polynomial (true for both presets).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .base import FqField, OLApprox, OLConfig, OLRing
from .errors import (
    ConfigError,
    DepthExceedsTower,
    Indivisible,
    InsufficientDepth,
    InsufficientPrecision,
    NotUnit,
    RingMismatch,
    WitnessFailure,
)
from .lubintate import LTGroup
from .series import SeriesRing, TruncSeries
from .witt import WittRing, WittVec, delta_section

_INT64_SAFE = 2**62


# ---------------------------------------------------------------------------
# the quotient ring O_L[T]/(q_n)
# ---------------------------------------------------------------------------


class TowerRing:
    """O_L[T]/(modulus) with exact arithmetic at pi-precision prec.

    Dense representation in the power basis of e = class(T); multiplication
    reduces with a precomputed reduction table.  For O_L = Z_p elements are
    int64 numpy arrays; other configs fall back to tuples of OLApprox.
    """

    pi_torsion_free = True

    def __init__(self, config: OLConfig, modulus: TruncSeries, prec: int):
        self.config = config
        self.prec = prec
        self.q = config.q
        R = OLRing(config, prec)
        self.base = R
        if modulus.N is not None or modulus.lowest != 0:
            raise ConfigError("tower modulus must be an exact polynomial")
        if not R.is_unit(modulus.coeff(modulus.degree_bound() - 1)):
            raise ConfigError("tower modulus must have unit leading coefficient")
        self.rank = modulus.degree_bound() - 1
        self.modulus = [R.cap(modulus.coeff(d), prec) for d in range(self.rank + 1)]
        self._fast = config.e == 1 and config.f == 1
        if self._fast:
            self._m = R.raw_modulus(prec)
            if self._m * self._m * self.rank >= _INT64_SAFE:
                self._fast = False
        if self._fast:
            lead_inv = pow(self.modulus[-1].coeffs[0], -1, self._m)
            self._mod_vec = np.array(
                [c.coeffs[0] * lead_inv % self._m for c in self.modulus], dtype=np.int64
            )
            self._redc = self._reduction_table()

    def _reduction_table(self) -> np.ndarray:
        """Row r: coefficients of T^(rank + r) in the power basis."""
        M, m = self.rank, self._m
        rows = np.zeros((M - 1 if M > 1 else 1, M), dtype=np.int64)
        cur = (-self._mod_vec[:M]) % m  # T^M
        if M == 1:
            rows[0] = cur
            return rows
        rows[0] = cur
        for r in range(1, M - 1):
            shifted = np.zeros(M + 1, dtype=np.int64)
            shifted[1:] = cur
            top = shifted[M]
            cur = (shifted[:M] + top * rows[0]) % m
            rows[r] = cur
        return rows

    # -- constructors ---------------------------------------------------------

    def zero(self):
        if self._fast:
            return np.zeros(self.rank, dtype=np.int64)
        return (self.base.zero(),) * self.rank

    def one(self):
        return self.from_int(1)

    def gen(self):
        """The class e of T."""
        if self._fast:
            v = np.zeros(self.rank, dtype=np.int64)
            if self.rank > 1:
                v[1] = 1
            else:
                v[0] = (-self.modulus[0].coeffs[0]) % self._m
            return v
        if self.rank > 1:
            return (
                (self.base.zero(), self.base.one())
                + (self.base.zero(),) * (self.rank - 2)
            )
        return (self.base.neg(self.modulus[0]),)

    def from_int(self, c: int):
        if self._fast:
            v = np.zeros(self.rank, dtype=np.int64)
            v[0] = c % self._m
            return v
        return (self.base.from_int(c),) + (self.base.zero(),) * (self.rank - 1)

    def from_ol(self, c: OLApprox):
        if self._fast:
            v = np.zeros(self.rank, dtype=np.int64)
            v[0] = c.coeffs[0] % self._m
            return v
        return (self.base.from_ol(c),) + (self.base.zero(),) * (self.rank - 1)

    def from_coeffs(self, cs: List[OLApprox]):
        cs = list(cs)
        if len(cs) > self.rank:
            raise ConfigError("coefficient vector too long")
        cs += [self.base.zero()] * (self.rank - len(cs))
        if self._fast:
            return np.array([c.coeffs[0] % self._m for c in cs], dtype=np.int64)
        return tuple(self.base.cap(c, self.prec) for c in cs)

    def coeffs_ol(self, x) -> List[OLApprox]:
        if self._fast:
            return [self.base.int_to_elt(int(c), self.prec) for c in x]
        return list(x)

    # -- arithmetic -------------------------------------------------------

    def add(self, x, y):
        if self._fast:
            return (x + y) % self._m
        return tuple(self.base.add(a, b) for a, b in zip(x, y))

    def sub(self, x, y):
        if self._fast:
            return (x - y) % self._m
        return tuple(self.base.sub(a, b) for a, b in zip(x, y))

    def neg(self, x):
        if self._fast:
            return (-x) % self._m
        return tuple(self.base.neg(a) for a in x)

    def mul(self, x, y):
        M = self.rank
        if M == 1:
            if self._fast:
                return (x * y) % self._m
            return (self.base.mul(x[0], y[0]),)
        if self._fast:
            conv = np.convolve(x, y) % self._m
            if conv.shape[0] > M:
                high = conv[M:]
                low = (conv[:M] + high @ self._redc[: high.shape[0]]) % self._m
                return low
            out = np.zeros(M, dtype=np.int64)
            out[: conv.shape[0]] = conv
            return out
        zero = self.base.zero()
        conv = [zero] * (2 * M - 1)
        for i, a in enumerate(x):
            if self.base.is_zero(a):
                continue
            for j, b in enumerate(y):
                conv[i + j] = self.base.add(conv[i + j], self.base.mul(a, b))
        lead_inv = self.base.inv(self.modulus[-1])
        for k in range(2 * M - 2, M - 1, -1):
            c = self.base.mul(conv[k], lead_inv)
            if not self.base.is_zero(c):
                for i in range(M + 1):
                    conv[k - M + i] = self.base.sub(
                        conv[k - M + i], self.base.mul(c, self.modulus[i])
                    )
        return tuple(conv[:M])

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
        return self.is_zero(self.sub(x, y))

    def is_zero(self, x) -> bool:
        return self.min_coeff_val(x) is None

    def min_coeff_val(self, x) -> Optional[int]:
        """min pi-valuation over basis coefficients (None when all are 0).

        Congruence mod pi^s in the reduced basis is equivalent to every
        coefficient being divisible by pi^s, since val(e^i) = i/rank < 1.
        """
        vals = []
        for c in self.coeffs_ol(x):
            v = self.base.valuation(c)
            if v is not None:
                vals.append(v)
        return min(vals) if vals else None

    def congruent_mod(self, x, y, s: int) -> bool:
        """x = y mod pi^s (requires s <= prec)."""
        if s > self.prec:
            raise InsufficientPrecision(f"ring precision {self.prec} < {s}")
        v = self.min_coeff_val(self.sub(x, y))
        return v is None or v >= s

    def divide_pi(self, x, k: int = 1):
        return self.from_coeffs([self.base.divide_pi(c, k) for c in self.coeffs_ol(x)])

    def is_unit(self, x) -> bool:
        # local ring: unit iff nonzero residue, i.e. some coefficient is a
        # unit at the e-degree-0 position after reduction... the residue
        # field is F_q with e nilpotent, so x is a unit iff coeff 0 is.
        cs = self.coeffs_ol(x)
        return self.base.valuation(cs[0]) == 0

    def inv(self, x):
        if not self.is_unit(x):
            raise NotUnit("not a unit of the tower ring")
        # Newton from the residue inverse (e is topologically nilpotent)
        cs = self.coeffs_ol(x)
        y = self.from_coeffs([self.base.inv(cs[0])])
        two = self.from_int(2)
        import math as _math

        steps = max(1, _math.ceil(_math.log2(max(2, self.prec * self.rank))) + 1)
        for _ in range(steps):
            y = self.mul(y, self.sub(two, self.mul(x, y)))
        if not self.eq(self.mul(x, y), self.one()):
            raise NotUnit("inverse iteration failed")
        return y

    def random_element(self, rng):
        if self._fast:
            return np.array(
                [rng.randrange(self._m) for _ in range(self.rank)], dtype=np.int64
            )
        return tuple(self.base.random_element(rng) for _ in range(self.rank))

    def evaluate_series(self, s: TruncSeries, x):
        """Horner evaluation of a series over O_L at a ring element.

        The tail beyond s's truncation has valuation >= N/rank, so the
        result is determined mod pi^min(prec, floor(N/rank)).
        """
        acc = self.zero()
        for i in range(len(s.coeffs) - 1, -1, -1):
            acc = self.add(self.mul(acc, x), self.from_ol(s.coeffs[i]))
        for _ in range(s.lowest):
            acc = self.mul(acc, x)
        return acc

    def fmt(self, x) -> str:
        parts = []
        for i, c in enumerate(self.coeffs_ol(x)):
            if self.base.is_zero(c):
                continue
            body = self.base.fmt(c).split(" + O(")[0]
            if i == 0:
                parts.append(body)
            else:
                ev = "e" if i == 1 else f"e^{i}"
                parts.append(ev if body == "1" else f"{body}*{ev}")
        return (" + ".join(parts) if parts else "0") + f" + O(pi^{self.prec})"

    def __eq__(self, other):
        return (
            isinstance(other, TowerRing)
            and self.config == other.config
            and self.prec == other.prec
            and self.rank == other.rank
        )

    def __hash__(self):
        return hash(("TowerRing", self.config, self.prec, self.rank))

    def __repr__(self):
        return f"TowerRing(rank={self.rank}, prec={self.prec})"


@dataclass
class TowerLevel:
    """Level n of the tower: O_L[T]/(q_n) with its generator e_n."""

    G: LTGroup
    n: int
    ring: TowerRing

    @property
    def e(self):
        return self.ring.gen()

    def embed_into(self, other: "TowerLevel"):
        """The ring map level n -> level n' >= n sending e_n to
        [pi^(n'-n)](e_n')."""
        if other.n < self.n:
            raise ConfigError("can only embed into a higher level")
        img = other.ring.evaluate_series(
            self.G.pi_power(other.n - self.n), other.e
        )

        def emb(x):
            acc = other.ring.zero()
            for i in range(self.ring.rank - 1, -1, -1):
                acc = other.ring.add(
                    other.ring.mul(acc, img),
                    other.ring.from_ol(self.ring.coeffs_ol(x)[i]),
                )
            return acc

        return emb


def tower_level(G: LTGroup, n: int, prec: int) -> TowerLevel:
    """Construct level n and verify the Eisenstein shape of q_n."""
    if n < 1:
        raise ConfigError("tower level needs n >= 1")
    qn = G.qn(n)
    R = OLRing(G.config, prec)
    # Eisenstein checks: constant term exactly pi, monic, middles div by pi
    if not R.eq(R.cap(qn.coeff(0), prec), R.cap(R.pi(), prec)):
        raise WitnessFailure("q_n constant term is not pi")
    deg = qn.degree_bound() - 1
    expect = G.q ** (n - 1) * (G.q - 1)
    if deg != expect:
        raise WitnessFailure("q_n degree mismatch")
    for d in range(1, deg):
        v = R.valuation(R.cap(qn.coeff(d), prec))
        if v == 0:
            raise WitnessFailure("q_n middle coefficient not divisible by pi")
    qn_w = TruncSeries(R, [R.cap(c, prec) for c in qn.coeffs], qn.lowest, None)
    return TowerLevel(G, n, TowerRing(G.config, qn_w, prec))


# ---------------------------------------------------------------------------
# mod-pi quotient and truncated tilts
# ---------------------------------------------------------------------------


class ModTRing:
    """F_q[T]/(T^M): the mod-pi reduction of a tower level.

    T is nilpotent, so series evaluation is exact once the truncation
    reaches the nilpotency order.
    """

    pi_torsion_free = False

    def __init__(self, config: OLConfig, M: int):
        self.config = config
        self.M = M
        self.q = config.q
        self.Fq = config.residue
        self._fast = config.f == 1

    def zero(self):
        if self._fast:
            return np.zeros(self.M, dtype=np.int64)
        return (self.Fq.zero(),) * self.M

    def one(self):
        return self.from_int(1)

    def from_int(self, c: int):
        if self._fast:
            v = np.zeros(self.M, dtype=np.int64)
            v[0] = c % self.config.p
            return v
        return (self.Fq.from_int(c),) + (self.Fq.zero(),) * (self.M - 1)

    def from_ol(self, c: OLApprox):
        if self._fast:
            v = np.zeros(self.M, dtype=np.int64)
            v[0] = c.coeffs[0] % self.config.p
            return v
        return (self.Fq.from_ol(c),) + (self.Fq.zero(),) * (self.M - 1)

    def from_fq_coeffs(self, cs):
        cs = list(cs)
        cs += [self.Fq.zero()] * (self.M - len(cs))
        if self._fast:
            return np.array([c[0] for c in cs], dtype=np.int64)
        return tuple(cs)

    def monomial(self, d: int):
        v = self.zero()
        if d < self.M:
            if self._fast:
                v[d] = 1
            else:
                v = tuple(
                    self.Fq.one() if i == d else self.Fq.zero() for i in range(self.M)
                )
        return v

    def add(self, x, y):
        if self._fast:
            return (x + y) % self.config.p
        return tuple(self.Fq.add(a, b) for a, b in zip(x, y))

    def sub(self, x, y):
        if self._fast:
            return (x - y) % self.config.p
        return tuple(self.Fq.sub(a, b) for a, b in zip(x, y))

    def neg(self, x):
        if self._fast:
            return (-x) % self.config.p
        return tuple(self.Fq.neg(a) for a in x)

    def mul(self, x, y):
        if self._fast:
            return np.convolve(x, y)[: self.M] % self.config.p
        zero = self.Fq.zero()
        out = [zero] * self.M
        for i, a in enumerate(x):
            if self.Fq.is_zero(a):
                continue
            for j in range(min(self.M - i, self.M)):
                b = y[j]
                if not self.Fq.is_zero(b):
                    out[i + j] = self.Fq.add(out[i + j], self.Fq.mul(a, b))
        return tuple(out)

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
        if self._fast:
            return bool(np.all((x - y) % self.config.p == 0))
        return all(self.Fq.eq(a, b) for a, b in zip(x, y))

    def is_zero(self, x) -> bool:
        if self._fast:
            return bool(np.all(x % self.config.p == 0))
        return all(self.Fq.is_zero(a) for a in x)

    def is_unit(self, x) -> bool:
        if self._fast:
            return x[0] % self.config.p != 0
        return self.Fq.is_unit(x[0])

    def inv(self, x):
        if not self.is_unit(x):
            raise NotUnit("not a unit (T is nilpotent)")
        # geometric series against the nilpotent tail
        c0 = x[0] if not self._fast else None
        if self._fast:
            inv0 = pow(int(x[0]), self.config.p - 2, self.config.p)
            tail = x.copy()
            tail[0] = 0
            acc = self.from_int(inv0)
            term = self.from_int(inv0)
            for _ in range(self.M):
                term = (np.convolve(term, tail)[: self.M] * (-inv0)) % self.config.p
                if not term.any():
                    break
                acc = (acc + term) % self.config.p
            return acc
        inv0 = self.Fq.inv(c0)
        tail = (self.Fq.zero(),) + tuple(x[1:])
        acc = self.from_fq_coeffs([inv0])
        term = acc
        for _ in range(self.M):
            term = self.mul(self.mul(term, tail), self.from_fq_coeffs([self.Fq.neg(inv0)]))
            if self.is_zero(term):
                break
            acc = self.add(acc, term)
        return acc

    def frobenius(self, x):
        return self.pow(x, self.q)

    def random_element(self, rng):
        if self._fast:
            return np.array(
                [rng.randrange(self.config.p) for _ in range(self.M)], dtype=np.int64
            )
        return tuple(self.Fq.random_element(rng) for _ in range(self.M))

    def evaluate_series(self, s: TruncSeries, x):
        """Evaluate an F_q-coefficient series at a nilpotent element; exact
        when s.N is None or s.N >= nilpotency order of x."""
        acc = self.zero()
        for i in range(len(s.coeffs) - 1, -1, -1):
            acc = self.add(self.mul(acc, x), self.from_fq_coeffs([s.coeffs[i]]))
        for _ in range(s.lowest):
            acc = self.mul(acc, x)
        return acc

    def lift_to(self, tower: TowerRing, x):
        """Coefficientwise lift into the tower ring (a section of mod-pi)."""
        if self._fast and tower._fast:
            v = np.zeros(tower.rank, dtype=np.int64)
            v[: self.M] = x % self.config.p
            return v
        R = tower.base
        return tower.from_coeffs([R.from_residue(c) for c in (x if not self._fast else [(int(t),) for t in x])])

    def fmt(self, x) -> str:
        parts = []
        for i in range(self.M):
            c = x[i]
            if self._fast:
                if c % self.config.p == 0:
                    continue
                body = str(int(c))
            else:
                if self.Fq.is_zero(c):
                    continue
                body = self.Fq.fmt(c)
            tv = "" if i == 0 else ("T" if i == 1 else f"T^{i}")
            parts.append(body if not tv else (tv if body == "1" else f"{body}*{tv}"))
        return " + ".join(parts) if parts else "0"

    def __eq__(self, other):
        return (
            isinstance(other, ModTRing)
            and self.config == other.config
            and self.M == other.M
        )

    def __hash__(self):
        return hash(("ModTRing", self.config, self.M))

    def __repr__(self):
        return f"ModTRing(q={self.q}, M={self.M})"


class TiltRing:
    """Depth-k truncation of the tilt: sequences (x_0, ..., x_(k-1)) in
    F_q[T]/(T^M) with x_(i+1)^q = x_i, operations componentwise."""

    pi_torsion_free = False

    def __init__(self, component_ring: ModTRing, depth: int):
        self.comp = component_ring
        self.depth = depth
        self.config = component_ring.config
        self.q = component_ring.q

    def make(self, components, validate: bool = True):
        xs = tuple(components)
        if len(xs) != self.depth:
            raise RingMismatch(f"expected {self.depth} components")
        if validate:
            for i in range(self.depth - 1):
                if not self.comp.eq(self.comp.pow(xs[i + 1], self.q), xs[i]):
                    raise WitnessFailure(
                        f"tilt compatibility x_{i+1}^q = x_{i} violated"
                    )
        return xs

    def zero(self):
        return (self.comp.zero(),) * self.depth

    def one(self):
        return (self.comp.one(),) * self.depth

    def from_int(self, c: int):
        # constants of F_q are q-power stable
        return (self.comp.from_int(c),) * self.depth

    def from_ol(self, c: OLApprox):
        return (self.comp.from_ol(c),) * self.depth

    def add(self, x, y):
        return tuple(self.comp.add(a, b) for a, b in zip(x, y))

    def sub(self, x, y):
        return tuple(self.comp.sub(a, b) for a, b in zip(x, y))

    def neg(self, x):
        return tuple(self.comp.neg(a) for a in x)

    def mul(self, x, y):
        return tuple(self.comp.mul(a, b) for a, b in zip(x, y))

    def pow(self, x, n: int):
        return tuple(self.comp.pow(a, n) for a in x)

    def eq(self, x, y) -> bool:
        return all(self.comp.eq(a, b) for a, b in zip(x, y))

    def is_zero(self, x) -> bool:
        return all(self.comp.is_zero(a) for a in x)

    def frobenius(self, x):
        """q-power map: componentwise q-th power (a left shift in depth)."""
        return tuple(self.comp.pow(a, self.q) for a in x)

    def root_shift(self, x):
        """x^(1/q): drop the 0th component; depth decreases by one."""
        return x[1:]

    def random_element(self, rng):
        """A random compatible sequence: choose the deepest component."""
        deep = self.comp.random_element(rng)
        comps = [deep]
        for _ in range(self.depth - 1):
            comps.append(self.comp.pow(comps[-1], self.q))
        return tuple(reversed(comps))

    def is_unit(self, x) -> bool:
        return all(self.comp.is_unit(a) for a in x)

    def inv(self, x):
        return tuple(self.comp.inv(a) for a in x)

    def fmt(self, x) -> str:
        return "(" + ", ".join(self.comp.fmt(a) for a in x) + ")"

    def __eq__(self, other):
        return (
            isinstance(other, TiltRing)
            and self.comp == other.comp
            and self.depth == other.depth
        )

    def __hash__(self):
        return hash(("TiltRing", self.comp, self.depth))

    def __repr__(self):
        return f"TiltRing(depth={self.depth}, comp={self.comp!r})"


# ---------------------------------------------------------------------------
# omega-bar, iota, theta
# ---------------------------------------------------------------------------


def base_mod_ring(G: LTGroup, N: int) -> ModTRing:
    """The mod-pi quotient of level N: F_q[T]/(T^(q^(N-1)(q-1)))."""
    M = G.q ** (N - 1) * (G.q - 1)
    return ModTRing(G.config, M)


def ebar(G: LTGroup, N: int, j: int, comp: Optional[ModTRing] = None):
    """The mod-pi image of e_j inside level N: the monomial T^(q^(N-j)).

    Exact because [pi^k](T) = T^(q^k) mod pi identically; ebar(0) = 0.
    """
    comp = comp if comp is not None else base_mod_ring(G, N)
    if j > N:
        raise DepthExceedsTower(f"level {j} beyond base level {N}")
    if j == 0:
        return comp.zero()
    return comp.monomial(G.q ** (N - j))


def tilt_omega_bar(G: LTGroup, N: int, k: int):
    """The depth-k tilt element (0, ebar_1, ebar_2, ...): component i is the
    image of e_i, with x_(i+1)^q = x_i exact."""
    if k > N + 1:
        raise DepthExceedsTower("tilt depth exceeds the available tower")
    comp = base_mod_ring(G, N)
    tilt = TiltRing(comp, k)
    return tilt.make([ebar(G, N, i, comp) for i in range(k)])


def iota_n(f: TruncSeries, level: TowerLevel):
    """Evaluation at e_n (the map sending a series on the open disk to its
    value at the level-n torsion point).  Result determined to precision
    min(prec, floor(N/rank))."""
    return level.ring.evaluate_series(f, level.e)


def iota_n_precision(f: TruncSeries, level: TowerLevel) -> int:
    if f.N is None:
        return level.ring.prec
    return min(level.ring.prec, f.N // level.ring.rank)


def iota_witt(
    f: TruncSeries,
    G: LTGroup,
    N: int,
    k: int,
    length: int,
    shift: int = 0,
) -> WittVec:
    """iota (right-shifted by ``shift``) of a series, as a Witt vector over
    the truncated tilt.

    Factorization: apply the delta-section s(f) in (O_L[[T]], T -> [pi](T)),
    then push each coordinate through g -> (g-bar(ebar_(j+shift)))_(j<k).
    Pinned example: the 0th coordinate of iota(T) is omega-bar.
    """
    if length > k:
        raise ConfigError("Witt length must not exceed tilt depth")
    if shift + k - 1 > N:
        raise DepthExceedsTower("need base level N >= shift + depth - 1")
    R = f.ring
    if not isinstance(R, OLRing):
        raise ConfigError("iota expects a series over O_L")
    wprec = max(R.prec, length + 1)
    SR = SeriesRing(OLRing(G.config, wprec), f.N, G.f_at(wprec))
    fw = TruncSeries(
        SR.coeff, [SR.coeff.make(list(c.coeffs), wprec) for c in f.coeffs], f.lowest, f.N
    )
    sec = delta_section(fw, SR, length)
    comp = base_mod_ring(G, N)
    tilt = TiltRing(comp, k)
    Fq = G.config.residue
    ebars = [ebar(G, N, j + shift, comp) for j in range(k)]
    coords = []
    for s_i in sec.coords:
        sbar = s_i.map_coefficients(Fq.from_ol, ring=Fq)
        comps = [comp.evaluate_series(sbar, eb) for eb in ebars]
        coords.append(tilt.make(comps))
    return WittVec(tilt, tuple(coords))


def sharp(tilt: TiltRing, x, tower: TowerRing, depth: Optional[int] = None):
    """x^sharp approximated by lifting the depth-d component and raising it
    to the q^d power; well-defined mod pi^(d+1)."""
    d = (tilt.depth - 1) if depth is None else depth
    if d >= tilt.depth:
        raise InsufficientDepth("requested sharp depth exceeds tilt depth")
    lifted = tilt.comp.lift_to(tower, x[d])
    return tower.pow(lifted, tilt.q**d)


def theta(x: WittVec, tower: TowerRing, depth: Optional[int] = None):
    """theta of a Witt vector over the tilt: sum of sharp(x_i^(1/q^i)) pi^i.

    Coordinate i uses the deepest available component (index depth-1-i after
    the root shift), so the result is determined mod pi^min(prec, depth)
    when the Witt length is at most the tilt depth.
    """
    tilt: TiltRing = x.ring
    k = tilt.depth if depth is None else depth
    n_coords = len(x.coords)
    if n_coords > k:
        raise InsufficientDepth("Witt length exceeds usable tilt depth")
    R = tower.base
    acc = tower.zero()
    pi_elt = R.pi()
    for i, xi in enumerate(x.coords):
        # x_i^(1/q^i): shift i components; deepest index k-1-i
        d = k - 1 - i
        lifted = tilt.comp.lift_to(tower, xi[k - 1])
        term = tower.pow(lifted, tilt.q**d)
        term = tower.mul(term, tower.from_ol(R.pow(pi_elt, i)))
        acc = tower.add(acc, term)
    return acc


def theta_precision(k: int, prec: int) -> int:
    """Documented precision of theta at tilt depth k and ring precision."""
    return min(k, prec)


# ---------------------------------------------------------------------------
# the full verification pipeline
# ---------------------------------------------------------------------------


def verify_theta_phi_iota(
    G: LTGroup,
    n: int,
    k: int,
    length: int,
    prec: int,
    samples: int,
    rng,
    include_pinned: bool = True,
) -> dict:
    """theta(iota-right-shift-n(f)) = f(e_n) mod pi^min(length, k, prec).

    Base level N = n + k - 1 carries all components; series are sampled as
    polynomials of degree < q^(N-1)(q-1) so that both the mod-pi tilt
    evaluations and the target evaluation f(e_n) are determined to the
    claimed precision.
    """
    if length > k:
        raise ConfigError("Witt length must not exceed tilt depth")
    N = n + k - 1
    claimed = min(length, k, prec)
    level_N = tower_level(G, N, prec)
    tower = level_N.ring
    # e_n inside level N
    e_n = tower.evaluate_series(G.pi_power(N - n), tower.gen())
    NT = tower.rank  # series truncation: nilpotency order of ebar_N
    R = OLRing(G.config, prec)
    report = {"claimed_precision": claimed, "samples": [], "ok": True}

    def run_one(fser: TruncSeries, tag: str):
        w = iota_witt(fser, G, N, k, length, shift=n)
        lhs = theta(w, tower)
        rhs = tower.evaluate_series(fser, e_n)
        diff = tower.sub(lhs, rhs)
        v = tower.min_coeff_val(diff)
        ok = v is None or v >= claimed
        report["samples"].append({"tag": tag, "residual_val": v, "ok": ok})
        if not ok:
            report["ok"] = False

    if include_pinned:
        run_one(TruncSeries.tvar(R, NT), "T")
        run_one(TruncSeries(R, [R.from_int(5)], 0, NT), "const")
        qn_t = G.qn(n).trunc(NT)
        qn_w = TruncSeries(R, [R.cap(c, prec) for c in qn_t.coeffs], qn_t.lowest, NT)
        run_one(qn_w, "q_n")
    for s in range(samples):
        coeffs = [R.random_element(rng) for _ in range(min(NT, 40))]
        run_one(TruncSeries(R, coeffs, 0, NT), f"random-{s}")
    return report


def theta_pinned_e1(G: LTGroup, prec: int = 4) -> bool:
    """theta(iota-shift-1(T)) = e_1 in O_L[T]/(q_1), checked mod pi^2.

    Uses depth 3, length 3 (claimed precision 3 >= 2); the comparison
    happens inside level N = 3 under the level-1 embedding.
    """
    n, k, length = 1, 3, 3
    N = n + k - 1
    level_N = tower_level(G, N, prec)
    tower = level_N.ring
    NT = tower.rank
    R = OLRing(G.config, prec)
    w = iota_witt(TruncSeries.tvar(R, NT), G, N, k, length, shift=n)
    lhs = theta(w, tower)
    e_1 = tower.evaluate_series(G.pi_power(N - 1), tower.gen())
    return tower.congruent_mod(lhs, e_1, 2)
