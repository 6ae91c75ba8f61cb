"""Truncated power and Laurent series over any coefficient ring.

A TruncSeries is known modulo T^N (N = None means an exact polynomial);
Laurent support is a finite window of negative exponents with an explicit
``lowest`` index.  Mixed-truncation operations take the minimum, so a result
never claims more T-adic accuracy than its inputs support.

Coefficient arithmetic is delegated to the ring object; rings whose
elements encode as single machine integers (Z_p towers with e = f = 1,
prime fields) get a numpy fast path for convolution-heavy work.
"""

from __future__ import annotations

from typing import Callable, List, Optional

import numpy as np

from .errors import (
    ConfigError,
    ConstantTerm,
    Indivisible,
    InexactDivision,
    NotUnit,
    RingMismatch,
)

_INT64_SAFE = 2**62


def _min_n(*ns):
    vals = [n for n in ns if n is not None]
    return min(vals) if vals else None


class TruncSeries:
    """A truncated series sum_{d >= lowest} c_d T^d known mod T^N."""

    __slots__ = ("ring", "lowest", "coeffs", "N")

    def __init__(self, ring, coeffs: List, lowest: int = 0, N: Optional[int] = None):
        self.ring = ring
        self.lowest = lowest
        self.coeffs = list(coeffs)
        self.N = N
        self._normalize()

    def _normalize(self):
        ring = self.ring
        if self.N is not None:
            # drop stored coefficients at or above the truncation order
            keep = self.N - self.lowest
            if keep < 0:
                keep = 0
            del self.coeffs[keep:]
        while self.coeffs and ring.is_zero(self.coeffs[0]):
            self.coeffs.pop(0)
            self.lowest += 1
        while self.coeffs and ring.is_zero(self.coeffs[-1]):
            self.coeffs.pop()
        if not self.coeffs:
            self.lowest = 0

    # -- constructors -------------------------------------------------------

    @classmethod
    def zero(cls, ring, N: Optional[int] = None) -> "TruncSeries":
        return cls(ring, [], 0, N)

    @classmethod
    def one(cls, ring, N: Optional[int] = None) -> "TruncSeries":
        return cls(ring, [ring.one()], 0, N)

    @classmethod
    def tvar(cls, ring, N: Optional[int] = None) -> "TruncSeries":
        """The series T."""
        return cls(ring, [ring.one()], 1, N)

    @classmethod
    def from_int_coeffs(cls, ring, coeffs, lowest: int = 0, N: Optional[int] = None):
        return cls(ring, [ring.from_int(c) for c in coeffs], lowest, N)

    # -- basic accessors ------------------------------------------------------

    def coeff(self, d: int):
        """Coefficient of T^d (zero when outside the stored window)."""
        if self.N is not None and d >= self.N:
            raise ConfigError(f"coefficient of T^{d} not determined mod T^{self.N}")
        i = d - self.lowest
        if 0 <= i < len(self.coeffs):
            return self.coeffs[i]
        return self.ring.zero()

    def degree_bound(self) -> int:
        return self.lowest + len(self.coeffs)

    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def prec(self) -> Optional[int]:
        """Coefficient pi-adic precision (min over stored coefficients)."""
        ps = [c.prec for c in self.coeffs if hasattr(c, "prec")]
        return min(ps) if ps else None

    def trunc(self, N: Optional[int]) -> "TruncSeries":
        return TruncSeries(self.ring, self.coeffs, self.lowest, _min_n(self.N, N))

    def shift(self, k: int) -> "TruncSeries":
        """Multiply by T^k (k may be negative)."""
        return TruncSeries(
            self.ring,
            self.coeffs,
            self.lowest + k,
            None if self.N is None else self.N + k,
        )

    def map_coefficients(self, fn: Callable, ring=None) -> "TruncSeries":
        return TruncSeries(
            ring if ring is not None else self.ring,
            [fn(c) for c in self.coeffs],
            self.lowest,
            self.N,
        )

    # -- ring operations ------------------------------------------------------

    def _check_ring(self, other: "TruncSeries"):
        if self.ring != other.ring:
            raise RingMismatch("series over different rings")

    def __add__(self, other: "TruncSeries") -> "TruncSeries":
        self._check_ring(other)
        ring = self.ring
        N = _min_n(self.N, other.N)
        if not self.coeffs:
            return other.trunc(N)
        if not other.coeffs:
            return self.trunc(N)
        lo = min(self.lowest, other.lowest)
        hi = max(self.degree_bound(), other.degree_bound())
        out = [ring.zero()] * (hi - lo)
        for i, c in enumerate(self.coeffs):
            out[self.lowest - lo + i] = c
        for i, c in enumerate(other.coeffs):
            j = other.lowest - lo + i
            out[j] = ring.add(out[j], c)
        return TruncSeries(ring, out, lo, N)

    def __neg__(self) -> "TruncSeries":
        return TruncSeries(
            self.ring, [self.ring.neg(c) for c in self.coeffs], self.lowest, self.N
        )

    def __sub__(self, other: "TruncSeries") -> "TruncSeries":
        return self + (-other)

    def __mul__(self, other: "TruncSeries") -> "TruncSeries":
        self._check_ring(other)
        ring = self.ring
        N = _min_n(
            None if self.N is None else self.N + other.lowest,
            None if other.N is None else other.N + self.lowest,
        )
        if not self.coeffs or not other.coeffs:
            return TruncSeries.zero(ring, N)
        lo = self.lowest + other.lowest
        length = (
            len(self.coeffs) + len(other.coeffs) - 1
            if N is None
            else min(len(self.coeffs) + len(other.coeffs) - 1, N - lo)
        )
        if length <= 0:
            return TruncSeries.zero(ring, N)
        conv = _convolve(ring, self.coeffs, other.coeffs, length, self.prec, other.prec)
        return TruncSeries(ring, conv, lo, N)

    def scalar_mul(self, c) -> "TruncSeries":
        ring = self.ring
        return TruncSeries(
            ring, [ring.mul(c, x) for x in self.coeffs], self.lowest, self.N
        )

    def __pow__(self, n: int) -> "TruncSeries":
        if n < 0:
            raise ConfigError("negative powers: use invert_unit")
        result = TruncSeries.one(self.ring, self.N if n == 0 else None)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base if n > 1 else base
            n >>= 1
        return result

    def __eq__(self, other) -> bool:
        """Equality of stored data at joint truncation and precision."""
        if not isinstance(other, TruncSeries):
            return NotImplemented
        self._check_ring(other)
        return (self - other).is_zero()

    # -- composition, inversion, division --------------------------------------

    def compose(self, g: "TruncSeries") -> "TruncSeries":
        """self(g(T)); requires g(0) = 0."""
        self._check_ring(g)
        if self.lowest < 0:
            raise ConfigError("composition needs a power series on the outside")
        if not g.is_zero() and g.lowest < 1:
            raise ConstantTerm("inner series must have zero constant term")
        ring = self.ring
        N = _min_n(
            g.N, None if self.N is None else self.N * max(g.lowest, 1)
        )
        # Horner from the top coefficient down
        acc = TruncSeries.zero(ring, N)
        for i in range(len(self.coeffs) - 1, -1, -1):
            acc = acc * g
            c = self.coeffs[i]
            if not ring.is_zero(c):
                acc = acc + TruncSeries(ring, [c], 0, N)
        if self.lowest:
            acc = acc * (g.trunc(N) ** self.lowest)
        return acc.trunc(N)

    def invert_unit(self, N: Optional[int] = None) -> "TruncSeries":
        """Inverse of a series whose lowest coefficient is a unit.

        For a Laurent series T^k * u the result is T^(-k) * u^(-1).
        """
        ring = self.ring
        N_eff = _min_n(self.N, None if N is None else N + self.lowest)
        if N_eff is None:
            raise ConfigError("specify a truncation order to invert an exact series")
        if self.is_zero():
            raise NotUnit("cannot invert zero")
        u0 = self.coeffs[0]
        if not ring.is_unit(u0):
            raise NotUnit("lowest coefficient is not a unit")
        k = self.lowest
        n_out = N_eff - k  # coefficients of the unit-part inverse
        length = n_out - 0
        if length <= 0:
            return TruncSeries.zero(ring, N_eff - 2 * k)
        inv0 = ring.inv(u0)
        out = [inv0] + [ring.zero()] * (length - 1)
        a = self.coeffs
        for j in range(1, length):
            s = ring.zero()
            for i in range(1, min(j, len(a) - 1) + 1):
                s = ring.add(s, ring.mul(a[i], out[j - i]))
            out[j] = ring.neg(ring.mul(inv0, s))
        return TruncSeries(ring, out, -k, N_eff - 2 * k)

    def divide_exact(self, den: "TruncSeries") -> "TruncSeries":
        """Exact quotient self/den; den's lowest coefficient should be a unit.

        Monomial denominators are exact shifts; exact polynomials with unit
        leading coefficient divide by long division (INEXACT on nonzero
        remainder).  Otherwise the quotient is shift-then-unit-inversion at
        truncation, or, for non-unit lowest coefficients, division is routed
        through valuation bookkeeping in the coefficient ring (the
        PRECISION_LOSS path) and raises INEXACT when a step does not divide.
        """
        self._check_ring(den)
        ring = self.ring
        if den.is_zero():
            raise InexactDivision("division by zero series")
        if len(den.coeffs) == 1 and ring.is_unit(den.coeffs[0]):
            return self.shift(-den.lowest).scalar_mul(ring.inv(den.coeffs[0]))
        if self.N is None and den.N is None and ring.is_unit(den.coeffs[-1]):
            return self._divide_exact_poly(den)
        if ring.is_unit(den.coeffs[0]):
            return self * den.invert_unit()
        return self._divide_nonunit(den)

    def _divide_exact_poly(self, den: "TruncSeries") -> "TruncSeries":
        """Long division of exact (Laurent) polynomials, top down."""
        ring = self.ring
        lead_inv = ring.inv(den.coeffs[-1])
        rem = list(self.coeffs)
        dd = len(den.coeffs) - 1
        if len(rem) - 1 < dd:
            if not rem:
                return TruncSeries.zero(ring)
            raise InexactDivision("degree of numerator below denominator")
        qlen = len(rem) - 1 - dd + 1
        quot = [ring.zero()] * qlen
        for k in range(len(rem) - 1, dd - 1, -1):
            c = ring.mul(rem[k], lead_inv)
            quot[k - dd] = c
            if not ring.is_zero(c):
                for i in range(dd + 1):
                    rem[k - dd + i] = ring.sub(rem[k - dd + i], ring.mul(c, den.coeffs[i]))
        if any(not ring.is_zero(r) for r in rem[:dd]):
            raise InexactDivision("nonzero remainder in exact polynomial division")
        return TruncSeries(ring, quot, self.lowest - den.lowest, None)

    def _divide_nonunit(self, den: "TruncSeries") -> "TruncSeries":
        ring = self.ring
        if not getattr(ring, "pi_torsion_free", False):
            raise InexactDivision("non-unit division needs a torsion-free ring")
        d0 = den.coeffs[0]
        v = ring.valuation(d0)
        if v is None:
            raise InexactDivision("denominator lowest coefficient is 0 at precision")
        unit_part = ring.divide_pi(d0, v)
        inv0 = ring.inv(unit_part)
        N = _min_n(self.N, den.N)
        if N is None:
            N = self.degree_bound()
        k = den.lowest
        lo = self.lowest - k
        n_out = N - k - self.lowest
        if n_out <= 0:
            return TruncSeries.zero(ring, N - k)
        num = [self.coeff(self.lowest + t) for t in range(n_out)]
        dd = [den.coeff(k + t) for t in range(n_out)]
        out = []
        for j in range(n_out):
            s = num[j]
            for i in range(1, j + 1):
                if i < len(dd):
                    s = ring.sub(s, ring.mul(dd[i], out[j - i]))
            try:
                s = ring.divide_pi(s, v)
            except Indivisible as exc:
                raise InexactDivision(f"coefficient {j} not divisible") from exc
            out.append(ring.mul(inv0, s))
        quot = TruncSeries(ring, out, lo, lo + n_out)
        # certificate: remainder must vanish at the joint truncation
        if not (quot * den - self).is_zero():
            raise InexactDivision("nonzero remainder at available precision")
        return quot

    # -- evaluation -----------------------------------------------------------

    def evaluate(self, x, target_ring=None, coeff_map=None):
        """Horner evaluation at a ring element.

        coeff_map sends series coefficients into the target ring (identity
        by default).  The caller is responsible for the T-adic convergence
        bookkeeping (x nilpotent or topologically nilpotent).
        """
        ring = target_ring if target_ring is not None else self.ring
        cm = coeff_map if coeff_map is not None else (lambda c: c)
        if self.lowest < 0:
            raise ConfigError("evaluation of Laurent series is not supported")
        acc = ring.zero()
        for i in range(len(self.coeffs) - 1, -1, -1):
            acc = ring.add(ring.mul(acc, x), cm(self.coeffs[i]))
        for _ in range(self.lowest):
            acc = ring.mul(acc, x)
        return acc

    # -- serialization ---------------------------------------------------------

    def to_dict(self) -> dict:
        enc = []
        for c in self.coeffs:
            enc.append(c.to_dict() if hasattr(c, "to_dict") else list(c))
        return {"lowest": self.lowest, "N": self.N, "prec": self.prec, "coeffs": enc}

    def fmt(self, var: str = "T") -> str:
        ring = self.ring
        parts = []
        for i, c in enumerate(self.coeffs):
            if ring.is_zero(c):
                continue
            d = self.lowest + i
            cs = ring.fmt(c)
            if " + O(" in cs:
                cs = cs.split(" + O(")[0]
            if d == 0:
                parts.append(cs)
            else:
                tv = var if d == 1 else f"{var}^{d}"
                parts.append(tv if cs == "1" else f"{cs}*{tv}")
        body = " + ".join(parts) if parts else "0"
        if self.N is not None:
            body += f" + O({var}^{self.N})"
        return body

    def __repr__(self):
        return self.fmt()


class SeriesRing:
    """Coefficient-ring adapter: truncated power series as ring elements.

    With ``phi_inner`` set to a series s(T) (s = T^q mod pi, s = 0 at T=0)
    the ring carries the Frobenius lift f(T) -> f^phi(s(T)), where the
    coefficient twist f -> f^phi is the designated Frobenius of the
    coefficient ring.  This makes the adapter usable as a delta-ring and as
    a Witt coefficient ring.
    """

    def __init__(self, coeff_ring, N: Optional[int], phi_inner: Optional[TruncSeries] = None):
        self.coeff = coeff_ring
        self.N = N
        self.phi_inner = phi_inner
        self.pi_torsion_free = getattr(coeff_ring, "pi_torsion_free", False)
        self.config = getattr(coeff_ring, "config", None)
        self.prec = getattr(coeff_ring, "prec", None)

    def zero(self) -> TruncSeries:
        return TruncSeries.zero(self.coeff, self.N)

    def one(self) -> TruncSeries:
        return TruncSeries.one(self.coeff, self.N)

    def tvar(self) -> TruncSeries:
        return TruncSeries.tvar(self.coeff, self.N)

    def from_int(self, n: int) -> TruncSeries:
        return TruncSeries(self.coeff, [self.coeff.from_int(n)], 0, self.N)

    def from_ol(self, c) -> TruncSeries:
        return TruncSeries(self.coeff, [self.coeff.from_ol(c)], 0, self.N)

    def add(self, a, b):
        return (a + b).trunc(self.N)

    def sub(self, a, b):
        return (a - b).trunc(self.N)

    def neg(self, a):
        return -a

    def mul(self, a, b):
        return (a * b).trunc(self.N)

    def pow(self, a, n: int):
        return (a**n).trunc(self.N)

    def eq(self, a, b) -> bool:
        return (a - b).is_zero()

    def is_zero(self, a) -> bool:
        return a.is_zero()

    def is_unit(self, a) -> bool:
        return (
            not a.is_zero()
            and a.lowest == 0
            and self.coeff.is_unit(a.coeffs[0])
        )

    def inv(self, a):
        return a.invert_unit(self.N)

    def divide_pi(self, a, k: int = 1):
        return a.map_coefficients(lambda c: self.coeff.divide_pi(c, k))

    def frobenius(self, a: TruncSeries) -> TruncSeries:
        if self.phi_inner is None:
            raise ConfigError("series ring has no designated Frobenius lift")
        coeff_frob = getattr(self.coeff, "frobenius", None)
        twisted = a.map_coefficients(coeff_frob) if coeff_frob else a
        return twisted.compose(self.phi_inner).trunc(self.N)

    def random_element(self, rng) -> TruncSeries:
        n = self.N if self.N is not None else 8
        return TruncSeries(
            self.coeff, [self.coeff.random_element(rng) for _ in range(n)], 0, self.N
        )

    def fmt(self, a) -> str:
        return a.fmt()

    def __eq__(self, other):
        return (
            isinstance(other, SeriesRing)
            and self.coeff == other.coeff
            and self.N == other.N
            and (
                (self.phi_inner is None) == (other.phi_inner is None)
                and (self.phi_inner is None or (self.phi_inner - other.phi_inner).is_zero())
            )
        )

    def __hash__(self):
        return hash(("SeriesRing", id(self.coeff), self.N))

    def __repr__(self):
        return f"SeriesRing({self.coeff!r}, N={self.N})"


# -- spec-level function aliases ------------------------------------------------


def series_add(a: TruncSeries, b: TruncSeries) -> TruncSeries:
    return a + b


def series_mul(a: TruncSeries, b: TruncSeries) -> TruncSeries:
    return a * b


def series_compose(f: TruncSeries, g: TruncSeries) -> TruncSeries:
    return f.compose(g)


def series_divide_exact(num: TruncSeries, den: TruncSeries) -> TruncSeries:
    return num.divide_exact(den)


def series_invert_unit(u: TruncSeries, N: Optional[int] = None) -> TruncSeries:
    return u.invert_unit(N)


# -- convolution backend ---------------------------------------------------------


def _convolve(ring, xs, ys, length, prec_x, prec_y):
    """Cauchy product of coefficient lists, truncated to ``length`` entries."""
    P = None
    if prec_x is not None or prec_y is not None:
        P = min(p for p in (prec_x, prec_y) if p is not None)
    raw = None
    raw_mod = getattr(ring, "raw_modulus", None)
    if raw_mod is not None:
        m = raw_mod(P if P is not None else getattr(ring, "prec", 1))
        if m is not None and m * m * min(len(xs), len(ys)) < _INT64_SAFE:
            raw = m
    if raw is not None:
        ax = np.fromiter((ring.elt_to_int(c) % raw for c in xs), dtype=np.int64)
        ay = np.fromiter((ring.elt_to_int(c) % raw for c in ys), dtype=np.int64)
        conv = np.convolve(ax, ay)[:length] % raw
        if P is None:
            return [ring.int_to_elt(int(c), getattr(ring, "prec", 1)) for c in conv]
        return [ring.int_to_elt(int(c), P) for c in conv]
    out = [ring.zero()] * min(length, len(xs) + len(ys) - 1)
    for i, x in enumerate(xs):
        if ring.is_zero(x):
            continue
        jmax = min(len(ys), len(out) - i)
        for j in range(jmax):
            out[i + j] = ring.add(out[i + j], ring.mul(x, ys[j]))
    return out


# ---------------------------------------------------------------------------
# Two-variable series (internal support for the formal-group machinery)
# ---------------------------------------------------------------------------


class TwoVarSeries:
    """Series in X, Y truncated at total degree <= N.

    table[i][j] is the coefficient of X^i Y^j; entries with i + j > N are
    identically zero.  Only the operations needed by the formal-group-law
    solver and the witness constructions are provided.
    """

    __slots__ = ("ring", "N", "table")

    def __init__(self, ring, N: int, table: Optional[List[List]] = None):
        self.ring = ring
        self.N = N
        if table is None:
            z = ring.zero()
            table = [[z] * (N + 1 - i) for i in range(N + 1)]
        self.table = table

    def copy(self) -> "TwoVarSeries":
        t = TwoVarSeries(self.ring, self.N)
        t.table = [row[:] for row in self.table]
        return t

    def get(self, i: int, j: int):
        if i + j > self.N or i < 0 or j < 0:
            return self.ring.zero()
        return self.table[i][j]

    def set(self, i: int, j: int, c):
        self.table[i][j] = c

    @classmethod
    def x_plus_y(cls, ring, N: int) -> "TwoVarSeries":
        t = cls(ring, N)
        t.set(1, 0, ring.one())
        t.set(0, 1, ring.one())
        return t

    def add(self, other: "TwoVarSeries") -> "TwoVarSeries":
        ring = self.ring
        out = TwoVarSeries(ring, self.N)
        for i in range(self.N + 1):
            for j in range(self.N + 1 - i):
                out.table[i][j] = ring.add(self.get(i, j), other.get(i, j))
        return out

    def sub(self, other: "TwoVarSeries") -> "TwoVarSeries":
        ring = self.ring
        out = TwoVarSeries(ring, self.N)
        for i in range(self.N + 1):
            for j in range(self.N + 1 - i):
                out.table[i][j] = ring.sub(self.get(i, j), other.get(i, j))
        return out

    def scalar_mul(self, c) -> "TwoVarSeries":
        ring = self.ring
        out = TwoVarSeries(ring, self.N)
        for i in range(self.N + 1):
            for j in range(self.N + 1 - i):
                out.table[i][j] = ring.mul(c, self.table[i][j])
        return out

    def mul(self, other: "TwoVarSeries") -> "TwoVarSeries":
        ring = self.ring
        N = self.N
        out = TwoVarSeries(ring, N)
        P = _table_prec(self, other)
        raw = _two_var_raw(ring, self, other, P)
        if raw is not None:
            m, at, bt = raw
            res = np.zeros((N + 1, N + 1), dtype=np.int64)
            for i in range(N + 1):
                row = at[i]
                if not row.any():
                    continue
                for k in range(N + 1 - i):
                    brow = bt[k]
                    if not brow.any():
                        continue
                    conv = np.convolve(row, brow)[: N + 1 - i - k]
                    res[i + k, : conv.shape[0]] += conv
                    res[i + k] %= m
            for i in range(N + 1):
                for j in range(N + 1 - i):
                    out.table[i][j] = ring.int_to_elt(int(res[i, j] % m), P)
            return out
        for i1 in range(N + 1):
            for j1 in range(N + 1 - i1):
                c1 = self.table[i1][j1]
                if ring.is_zero(c1):
                    continue
                for i2 in range(N + 1 - i1 - j1):
                    for j2 in range(N + 1 - i1 - j1 - i2):
                        c2 = other.table[i2][j2]
                        if ring.is_zero(c2):
                            continue
                        i, j = i1 + i2, j1 + j2
                        out.table[i][j] = ring.add(out.table[i][j], ring.mul(c1, c2))
        return out

    def pow_list(self, kmax: int) -> List["TwoVarSeries"]:
        """[self^0, ..., self^kmax] at truncation N."""
        one = TwoVarSeries(self.ring, self.N)
        one.set(0, 0, self.ring.one())
        out = [one]
        for _ in range(kmax):
            out.append(out[-1].mul(self))
        return out

    def substitute_both(self, f: TruncSeries) -> "TwoVarSeries":
        """H(f(X), f(Y)) for a one-variable series f with f(0) = 0."""
        ring = self.ring
        N = self.N
        if not f.is_zero() and f.lowest < 1:
            raise ConstantTerm("substituted series must vanish at 0")
        # powers of f as coefficient vectors of length N+1
        fcoef = [f.coeff(d) if (f.N is None or d < f.N) else ring.zero() for d in range(N + 1)]
        pows = [[ring.one()] + [ring.zero()] * N]
        for _ in range(N):
            prev = pows[-1]
            conv = _convolve(ring, prev, fcoef, N + 1, None, None)
            conv += [ring.zero()] * (N + 1 - len(conv))
            pows.append(conv)
        out = TwoVarSeries(ring, N)
        for i in range(N + 1):
            # inner_j = sum_j H[i][j] * (f^j) gives the Y-part for X-power i
            inner = [ring.zero()] * (N + 1)
            nz = False
            for j in range(N + 1 - i):
                c = self.table[i][j]
                if ring.is_zero(c):
                    continue
                nz = True
                pj = pows[j]
                for t in range(N + 1):
                    if not ring.is_zero(pj[t]):
                        inner[t] = ring.add(inner[t], ring.mul(c, pj[t]))
            if not nz:
                continue
            pi_ = pows[i]
            for a in range(N + 1):
                ca = pi_[a]
                if ring.is_zero(ca):
                    continue
                for b in range(N + 1 - a):
                    if not ring.is_zero(inner[b]):
                        out.table[a][b] = ring.add(out.table[a][b], ring.mul(ca, inner[b]))
        return out

    def outer_apply(self, f: TruncSeries) -> "TwoVarSeries":
        """f(H(X, Y)) for a one-variable series f; needs H(0,0) = 0."""
        ring = self.ring
        if not ring.is_zero(self.get(0, 0)):
            raise ConstantTerm("outer composition needs zero constant term")
        out = TwoVarSeries(ring, self.N)
        # Horner over f's coefficients
        top = min(self.N, (f.degree_bound() - 1)) if f.N is None else min(self.N, f.N - 1)
        for d in range(top, -1, -1):
            out = out.mul(self)
            c = f.coeff(d) if (f.N is None or d < f.N) else ring.zero()
            if not ring.is_zero(c):
                out.table[0][0] = ring.add(out.table[0][0], c)
        return out

    def substitute_series(self, a: TruncSeries, b: TruncSeries) -> TruncSeries:
        """H(a(T), b(T)) as a one-variable series."""
        ring = self.ring
        if (not a.is_zero() and a.lowest < 1) or (not b.is_zero() and b.lowest < 1):
            raise ConstantTerm("substituted series must vanish at 0")
        NT = _min_n(a.N, b.N)
        if NT is None:
            NT = self.N + 1
        apow = [TruncSeries.one(ring, NT)]
        bpow = [TruncSeries.one(ring, NT)]
        for _ in range(self.N):
            apow.append((apow[-1] * a).trunc(NT))
            bpow.append((bpow[-1] * b).trunc(NT))
        total = TruncSeries.zero(ring, NT)
        for i in range(self.N + 1):
            inner = TruncSeries.zero(ring, NT)
            nz = False
            for j in range(self.N + 1 - i):
                c = self.table[i][j]
                if ring.is_zero(c):
                    continue
                nz = True
                inner = inner + bpow[j].scalar_mul(c)
            if nz:
                total = total + (apow[i] * inner).trunc(NT)
        return total.trunc(NT)

    def homogeneous(self, d: int) -> List:
        """Coefficients [c_{d,0}, c_{d-1,1}, ..., c_{0,d}]."""
        return [self.get(d - j, j) for j in range(d + 1)]

    def swap(self) -> "TwoVarSeries":
        out = TwoVarSeries(self.ring, self.N)
        for i in range(self.N + 1):
            for j in range(self.N + 1 - i):
                out.table[i][j] = self.get(j, i)
        return out

    def divide_xy(self) -> "TwoVarSeries":
        """Exact division by X*Y; every monomial must have i, j >= 1."""
        ring = self.ring
        out = TwoVarSeries(ring, self.N)
        for i in range(self.N + 1):
            for j in range(self.N + 1 - i):
                c = self.table[i][j]
                if ring.is_zero(c):
                    continue
                if i < 1 or j < 1:
                    raise Indivisible("monomial not divisible by X*Y")
                out.table[i - 1][j - 1] = c
        return out

    def set_y_zero(self) -> TruncSeries:
        """H(X, 0) as a one-variable series in X."""
        return TruncSeries(
            self.ring, [self.table[i][0] for i in range(self.N + 1)], 0, self.N + 1
        )

    def eq(self, other: "TwoVarSeries") -> bool:
        ring = self.ring
        N = min(self.N, other.N)
        for i in range(N + 1):
            for j in range(N + 1 - i):
                if not ring.eq(self.get(i, j), other.get(i, j)):
                    return False
        return True

    def fmt(self) -> str:
        ring = self.ring
        parts = []
        for d in range(self.N + 1):
            for i in range(d, -1, -1):
                j = d - i
                c = self.get(i, j)
                if ring.is_zero(c):
                    continue
                cs = ring.fmt(c)
                if " + O(" in cs:
                    cs = cs.split(" + O(")[0]
                mono = ""
                if i:
                    mono += "X" if i == 1 else f"X^{i}"
                if j:
                    mono += ("" if not mono else "*") + ("Y" if j == 1 else f"Y^{j}")
                if not mono:
                    parts.append(cs)
                else:
                    parts.append(mono if cs == "1" else f"{cs}*{mono}")
        body = " + ".join(parts) if parts else "0"
        return f"{body} + O(deg {self.N + 1})"

    def __repr__(self):
        return self.fmt()


def _ring_prec(ring) -> int:
    return getattr(ring, "prec", 1)


def _table_prec(*tables) -> int:
    """Joint coefficient precision across two-variable tables."""
    best = None
    for t in tables:
        for row in t.table:
            for c in row:
                p = getattr(c, "prec", None)
                if p is not None and (best is None or p < best):
                    best = p
    return best if best is not None else _ring_prec(tables[0].ring)


def _two_var_raw(ring, a: TwoVarSeries, b: TwoVarSeries, P: int):
    raw_mod = getattr(ring, "raw_modulus", None)
    if raw_mod is None:
        return None
    m = raw_mod(P)
    if m is None or m * m * (a.N + 1) >= _INT64_SAFE:
        return None
    N = a.N

    def pack(t: TwoVarSeries):
        arr = np.zeros((N + 1, N + 1), dtype=np.int64)
        for i in range(N + 1):
            for j in range(N + 1 - i):
                arr[i, j] = ring.elt_to_int(t.table[i][j]) % m
        return arr

    return m, pack(a), pack(b)
