"""Lubin-Tate formal groups: the group law, O_L-endomorphisms, q_n, Gamma.

A Frobenius series f satisfies f = pi*T mod deg 2 and f = T^q mod pi.  The
group law F(X,Y) and the endomorphisms [a](T) are the unique solutions of

    f(F(X,Y)) = F(f(X), f(Y)),   F = X + Y     mod total degree 2
    f([a](T)) = [a](f(T)),       [a] = a*T     mod degree 2

built degree by degree; the degree-d correction is the error slice divided
by pi^d - pi = pi*(pi^(d-1) - 1), a pi times a unit.  Each such division
costs one pi-digit of coefficient precision, so a law at truncation N is
solved at working precision prec + N and its degree-d coefficients carry
precision prec + N - d + 1.

The generators q_n(T) = [pi^n](T)/[pi^(n-1)](T) are computed by the
composition route q_n = q_1 o [pi^(n-1)], which is exact by construction.
"""

from __future__ import annotations

import math
from typing import Dict, List, Optional, Tuple

from .base import OLApprox, OLConfig, OLRing
from .errors import (
    BadFrobeniusSeries,
    ConfigError,
    Indivisible,
    Nonconvergence,
    NotUnit,
)
from .series import TruncSeries, TwoVarSeries


def default_frobenius_series(R: OLRing) -> TruncSeries:
    """f = pi*T + T^q (exact polynomial)."""
    q = R.config.q
    f = [R.pi()] + [R.zero()] * (q - 2) + [R.one()]
    return TruncSeries(R, f, 1, None)


def cyclotomic_frobenius_series(R: OLRing) -> TruncSeries:
    """f = (1+T)^p - 1; requires q = p (the multiplicative formal group)."""
    cfg = R.config
    if cfg.q != cfg.p:
        raise ConfigError("cyclotomic preset needs q = p")
    p = cfg.p
    coeffs = [R.from_int(math.comb(p, k)) for k in range(1, p + 1)]
    return TruncSeries(R, coeffs, 1, None)


def validate_frobenius_series(f: TruncSeries, config: OLConfig):
    """Check f = pi*T mod deg 2 and f = T^q mod pi at available truncation."""
    R = f.ring
    q = config.q
    if f.is_zero() or f.lowest != 1:
        raise BadFrobeniusSeries("f must vanish to order exactly 1")
    if f.N is not None and f.N <= q:
        raise BadFrobeniusSeries("f must determine the coefficient of T^q")
    pi = OLRing(config, max(f.coeff(1).prec, 1)).pi()
    if not R.eq(f.coeff(1), R.cap(pi, f.coeff(1).prec)):
        raise BadFrobeniusSeries("linear coefficient must be pi")
    cq = f.coeff(q)
    if R.valuation(cq) != 0 or any(R.residue(R.sub(cq, R.cap(R.one(), cq.prec)))):
        raise BadFrobeniusSeries("f must reduce to T^q mod pi")
    top = f.degree_bound() if f.N is None else min(f.N, f.degree_bound())
    for d in range(1, top):
        if d == q:
            continue
        v = R.valuation(f.coeff(d))
        if v == 0:
            raise BadFrobeniusSeries(f"coefficient of T^{d} must be divisible by pi")


# ---------------------------------------------------------------------------
# one-variable solver: [a] and morphisms between two Frobenius series
# ---------------------------------------------------------------------------


def lt_solve_1var(
    outer: TruncSeries, inner: TruncSeries, linear: OLApprox, N: int, R: OLRing
) -> TruncSeries:
    """The unique h with h = linear*T mod deg 2 and outer(h) = h(inner) mod T^N.

    Incremental: h's powers (for evaluating outer) and h(inner) are
    maintained across degree steps, so the whole solve is O(N^2) ring ops.
    """
    if N < 2:
        return TruncSeries(R, [linear], 1, N)
    zero, one = R.zero(), R.one()
    pi = R.pi()

    def fcoef(s: TruncSeries, d: int):
        if s.N is not None and d >= s.N:
            return zero
        return s.coeff(d)

    outer_degs = [d for d in range(2, (outer.degree_bound())) if not R.is_zero(fcoef(outer, d))]
    maxk = max(outer_degs, default=1)

    # inner powers inner^r truncated to N, built incrementally as needed
    inner_pows: List[List] = [[one]]  # inner^0 = 1
    inner_c = [fcoef(inner, d) for d in range(N)]

    def inner_pow(r: int) -> List:
        while len(inner_pows) <= r:
            prev = inner_pows[-1]
            nxt = [zero] * N
            for i, a in enumerate(prev):
                if R.is_zero(a):
                    continue
                for j in range(min(N - i, len(inner_c))):
                    b = inner_c[j]
                    if not R.is_zero(b):
                        nxt[i + j] = R.add(nxt[i + j], R.mul(a, b))
            inner_pows.append(nxt)
        return inner_pows[r]

    # state: h coefficients, h^k for 1 <= k <= maxk, and h(inner)
    h = [zero] * N
    h[1] = linear
    hp: Dict[int, List] = {1: list(h)}
    for k in range(2, maxk + 1):
        hk = [zero] * N
        if k < N:
            hk[k] = R.mul(hp[k - 1][k - 1] if k > 2 else linear, linear)
        hp[k] = hk
    hinner = [zero] * N
    ip1 = inner_pow(1)
    for j in range(N):
        if j < len(ip1) and not R.is_zero(ip1[j]):
            hinner[j] = R.mul(linear, ip1[j])

    for r in range(1, N - 1):
        d = r + 1
        # error slice at degree d: sum_(k>=2) outer_k * (h^k)_d - h(inner)_d
        e = zero
        for k in outer_degs:
            ck = fcoef(outer, k)
            if not R.is_zero(ck) and not R.is_zero(hp[k][d]):
                e = R.add(e, R.mul(ck, hp[k][d]))
        e = R.sub(e, hinner[d])
        if R.is_zero(e):
            c = R.cap(zero, max(e.prec - 1, 1))
        else:
            # divide by pi^d - pi = pi * (pi^(d-1) - 1)
            try:
                c = R.divide_pi(e, 1)
            except Indivisible as exc:
                raise Nonconvergence(f"degree {d} step not divisible by pi") from exc
            unit = R.sub(R.pow(pi, d - 1), R.one())
            c = R.mul(c, R.inv(unit))
        h[d] = c
        # update h^k <- (h + cT^d)^k = sum_t C(k,t) h^(k-t) c^t T^(td),
        # descending k so the smaller (old) powers are still unmodified
        cpow = [one, c]
        for k in range(maxk, 1, -1):
            for t in range(1, k + 1):
                if t * d >= N:
                    break
                while len(cpow) <= t:
                    cpow.append(R.mul(cpow[-1], c))
                coef = R.mul(R.from_int(math.comb(k, t)), cpow[t])
                if k - t == 0:
                    hp[k][t * d] = R.add(hp[k][t * d], coef)
                else:
                    src = hp[k - t]
                    for i, a in enumerate(src):
                        if i + t * d >= N:
                            break
                        if not R.is_zero(a):
                            hp[k][i + t * d] = R.add(hp[k][i + t * d], R.mul(coef, a))
        # update h^1 copy and h(inner) += c * inner^d
        hp[1][d] = c
        ipd = inner_pow(d)
        for j in range(min(N, len(ipd))):
            if not R.is_zero(ipd[j]):
                hinner[j] = R.add(hinner[j], R.mul(c, ipd[j]))
    return TruncSeries(R, h[1:], 1, N)


# ---------------------------------------------------------------------------
# two-variable law solver
# ---------------------------------------------------------------------------


def lt_group_law(f: TruncSeries, N: int, target_prec: Optional[int] = None) -> TwoVarSeries:
    """The unique F with F = X+Y mod deg 2 and f(F) = F(f(X), f(Y)) mod deg N+1.

    N is the total-degree truncation of the returned two-variable series.
    f should be supplied at working precision >= target_prec + N (the
    degree-d solve step divides by pi once); output coefficients are
    uniformly capped at target_prec.
    """
    R = f.ring
    cfg = R.config
    validate_frobenius_series(f, cfg)
    target = target_prec if target_prec is not None else max(1, R.prec - N)
    if cfg.e == 1 and cfg.f == 1:
        law = _lt_law_int(f, N, R)
    else:
        law = _lt_law_generic(f, N, R)
    if target >= R.prec:
        return law
    Rt = OLRing(cfg, target)
    out = TwoVarSeries(Rt, N)
    for i in range(N + 1):
        for j in range(N + 1 - i):
            c = law.get(i, j)
            out.set(i, j, Rt.cap(c, target))
    return out


def _lt_law_int(f: TruncSeries, N: int, R: OLRing) -> TwoVarSeries:
    """Plain-integer solver for O_L = Z_p.

    Works at the precision of f's ring (the caller supplies the + N margin
    for the per-degree pi-divisions).  Homogeneous components are
    coefficient vectors (degree-d component v has v[j] = coefficient of
    X^(d-j) Y^j), so products of components are plain convolutions.  The
    degree-d coefficients of the result carry precision wprec - d + 1.
    """
    p = R.config.p
    wprec = R.prec
    K = R.config.kdigits(wprec)
    m = p**K
    fdeg = f.degree_bound() - 1
    fc = [int(f.coeff(d).coeffs[0]) % m if (f.N is None or d < f.N) else 0 for d in range(fdeg + 1)]
    powers_needed = sorted(d for d in range(2, fdeg + 1) if fc[d] % m)
    maxk = max(powers_needed, default=1)
    if maxk < 2:
        raise BadFrobeniusSeries("Frobenius series has no terms beyond the linear one")

    def conv(a: List[int], b: List[int], cap: int) -> List[int]:
        out = [0] * min(len(a) + len(b) - 1, cap)
        for i, x in enumerate(a):
            if x:
                for j in range(min(len(b), len(out) - i)):
                    if b[j]:
                        out[i + j] = (out[i + j] + x * b[j]) % m
        return out

    # 1-var powers of f, truncated to degree N
    fp: List[List[int]] = [[1]]
    for _ in range(N):
        fp.append(conv(fp[-1], fc, N + 1))

    # H components: comp[d] = vector of length d+1 (coefficient of X^(d-j) Y^j)
    comp: List[Optional[List[int]]] = [None] * (N + 1)
    comp[1] = [1, 1]
    # powers of H; start from H = X + Y
    hp: Dict[int, List[Optional[List[int]]]] = {1: [None] * (N + 1)}
    hp[1][1] = [1, 1]
    for k in range(2, maxk + 1):
        hp[k] = [None] * (N + 1)
        if k <= N:
            hp[k][k] = [math.comb(k, j) % m for j in range(k + 1)]
    # H(f(X), f(Y)) components: from H = X + Y it starts as fX + fY
    hff: List[List[int]] = [[0] * (d + 1) for d in range(N + 1)]
    for d in range(1, min(fdeg, N) + 1):
        if fc[d]:
            hff[d][0] = (hff[d][0] + fc[d]) % m
            hff[d][d] = (hff[d][d] + fc[d]) % m

    def add_into(dst: List[int], src: List[int], scale: int):
        for j in range(min(len(dst), len(src))):
            if src[j]:
                dst[j] = (dst[j] + scale * src[j]) % m

    for r in range(1, N):
        d = r + 1
        # error slice at degree d
        err = [0] * (d + 1)
        for k in powers_needed:
            ck = fc[k]
            vk = hp[k][d]
            if vk is not None:
                add_into(err, vk, ck)
        add_into(err, hff[d], m - 1)
        if all(c % m == 0 for c in err):
            comp[d] = None
            continue
        unit_inv = pow(p ** (d - 1) - 1, -1, m)
        D = []
        for c in err:
            c %= m
            if c % p:
                raise Nonconvergence(f"law degree {d} slice not divisible by pi")
            D.append((c // p) * unit_inv % m)
        comp[d] = D
        # update powers of H, descending k so smaller powers are still old
        dpow = {1: D}
        for k in range(maxk, 1, -1):
            for t in range(1, k + 1):
                if t * d > N:
                    break
                if t not in dpow:
                    dpow[t] = conv(dpow[t - 1], D, N + 2)
                cmb = math.comb(k, t) % m
                if k - t == 0:
                    tgt = hp[k][t * d]
                    if tgt is None:
                        hp[k][t * d] = [x * cmb % m for x in dpow[t]]
                    else:
                        add_into(tgt, dpow[t], cmb)
                else:
                    base = hp[k - t]
                    for a in range(1, N + 1 - t * d):
                        va = base[a]
                        if va is None:
                            continue
                        piece = conv(va, dpow[t], N + 2)
                        tgt = hp[k][a + t * d]
                        if tgt is None:
                            hp[k][a + t * d] = [x * cmb % m for x in piece]
                        else:
                            add_into(tgt, piece, cmb)
        hp[1][d] = D
        # update H(fX, fY) += D(fX, fY)
        for mm in range(d, N + 1):
            tgt = hff[mm]
            for j in range(d + 1):
                dj = D[j]
                if not dj:
                    continue
                fxi = fp[d - j]
                fyj = fp[j]
                # component mm: sum_{a+b=mm} fxi[a] * fyj[b]
                for a in range(max(0, mm - len(fyj) + 1), min(len(fxi), mm + 1)):
                    xa = fxi[a]
                    if xa:
                        b = mm - a
                        tgt[b] = (tgt[b] + dj * xa * fyj[b]) % m
    # final verification: f(H) == H(fX, fY) on all maintained components
    for dd in range(1, N + 1):
        lhs = [0] * (dd + 1)
        if comp[dd] is not None:
            add_into(lhs, comp[dd], fc[1])
        for k in powers_needed:
            vk = hp[k][dd]
            if vk is not None:
                add_into(lhs, vk, fc[k])
        diff_prec_digits = K - (dd - 1) - 1
        pv = p**diff_prec_digits if diff_prec_digits > 0 else 1
        for j in range(dd + 1):
            if (lhs[j] - hff[dd][j]) % pv:
                raise Nonconvergence("law functional equation failed verification")
    # package as TwoVarSeries with honest per-degree precision
    out = TwoVarSeries(R, N)
    for dd in range(1, N + 1):
        v = comp[dd]
        if v is None:
            continue
        precd = max(1, wprec - (dd - 1))
        for j in range(dd + 1):
            out.set(dd - j, j, R.int_to_elt(v[j], precd))
    return out


def _lt_law_generic(f: TruncSeries, N: int, R: OLRing) -> TwoVarSeries:
    """Degree-by-degree solver over any O_L (small N; recomputes per step)."""
    pi = R.pi()
    H = TwoVarSeries.x_plus_y(R, N)
    for r in range(1, N):
        d = r + 1
        lhs = H.outer_apply(f)
        rhs = H.substitute_both(f)
        err = lhs.sub(rhs)
        slice_ = err.homogeneous(d)
        if all(R.is_zero(c) for c in slice_):
            continue
        unit = R.sub(R.pow(pi, d - 1), R.one())
        unit_inv = R.inv(unit)
        for j, c in enumerate(slice_):
            if R.is_zero(c):
                continue
            try:
                c1 = R.divide_pi(c, 1)
            except Indivisible as exc:
                raise Nonconvergence(f"law degree {d} not divisible by pi") from exc
            H.set(d - j, j, R.add(H.get(d - j, j), R.mul(c1, unit_inv)))
    lhs = H.outer_apply(f)
    rhs = H.substitute_both(f)
    if not lhs.eq(rhs):
        raise Nonconvergence("law functional equation failed verification")
    return H


# ---------------------------------------------------------------------------
# LTGroup
# ---------------------------------------------------------------------------


class LTGroup:
    """A Lubin-Tate datum: Frobenius series f, group law, endomorphisms.

    The group law and the endomorphisms are memoized per truncation; [pi^k]
    is the k-fold composite of f and stays an exact polynomial whenever f is
    one.
    """

    def __init__(self, config: OLConfig, f: Optional[TruncSeries] = None, prec: int = 8):
        self.config = config
        self.R = OLRing(config, prec)
        self.f = f if f is not None else default_frobenius_series(self.R)
        validate_frobenius_series(self.f, config)
        self.q = config.q
        self._laws: Dict[int, TwoVarSeries] = {}
        self._endos: Dict[Tuple, TruncSeries] = {}
        self._pi_pows: List[TruncSeries] = [TruncSeries.tvar(self.R, self.f.N), self.f]

    def f_at(self, prec: int) -> TruncSeries:
        """The Frobenius series with its digit vector read at higher precision.

        The stored digits define the Lubin-Tate datum exactly; solvers that
        spend pi-digits on divisions re-read them at their working precision.
        """
        Rw = OLRing(self.config, prec)
        return TruncSeries(
            Rw,
            [Rw.make(list(c.coeffs), prec) for c in self.f.coeffs],
            self.f.lowest,
            self.f.N,
        )

    # -- the group law -------------------------------------------------------

    def law(self, N: int) -> TwoVarSeries:
        """Group law at total-degree truncation N, coefficients at ring precision."""
        if N not in self._laws:
            self._laws[N] = lt_group_law(self.f_at(self.R.prec + N), N, target_prec=self.R.prec)
        return self._laws[N]

    # -- endomorphisms -------------------------------------------------------

    def endo(self, a: OLApprox, N: int) -> TruncSeries:
        """[a](T): the unique series commuting with f, linear term a*T.

        The digit vector of a is taken as the exact definition of the
        multiplier (memoization key: digits and truncation).
        """
        if a.config != self.config:
            raise ConfigError("multiplier from a different O_L")
        key = (tuple(a.coeffs), a.prec, N)
        if key not in self._endos:
            Rw = OLRing(self.config, self.R.prec + N)
            aw = Rw.make(list(a.coeffs))
            h = lt_solve_1var(self.f_at(Rw.prec), self.f_at(Rw.prec), aw, N, Rw)
            self._endos[key] = h.map_coefficients(
                lambda c: self.R.cap(c, self.R.prec), ring=self.R
            )
        return self._endos[key]

    def endo_int(self, a: int, N: int) -> TruncSeries:
        return self.endo(self.R.from_int(a), N)

    def pi_power(self, k: int) -> TruncSeries:
        """[pi^k](T) = f o ... o f (k times); exact for polynomial f."""
        while len(self._pi_pows) <= k:
            self._pi_pows.append(self._pi_pows[-1].compose(self.f))
        return self._pi_pows[k]

    # -- prism generators ------------------------------------------------------

    def qn(self, n: int, N: Optional[int] = None) -> TruncSeries:
        """q_n(T) = [pi^n](T)/[pi^(n-1)](T), by the exact composition route
        q_n = q_1 o [pi^(n-1)]."""
        if n < 1:
            raise ConfigError("q_n needs n >= 1")
        q1 = self.f.divide_exact(TruncSeries.tvar(self.R))
        if n > 1:
            q1 = q1.compose(self.pi_power(n - 1))
        return q1 if N is None else q1.trunc(N)

    def prism_witness(self, n: int, N: Optional[int] = None):
        """(A, B) with pi = A*q_n + B*q_(n+1), exact at truncation.

        Built from pi = q_1 + T*f0(T) (f0 = (pi - q_1)/T) transported by
        phi^n:  pi = q_(n+1) + q_n * [pi^(n-1)] * f0([pi^n]).
        """
        if n < 1:
            raise ConfigError("prism witness needs n >= 1")
        R = self.R
        q1 = self.qn(1)
        pi_series = TruncSeries(R, [R.pi()], 0, None)
        f0 = (pi_series - q1).divide_exact(TruncSeries.tvar(R))
        A = self.pi_power(n - 1) * f0.compose(self.pi_power(n))
        B = TruncSeries.one(R)
        if N is not None:
            A = A.trunc(N)
            B = B.trunc(N)
        # certificate
        lhs = A * self.qn(n, N) + B * self.qn(n + 1, N)
        target = pi_series if N is None else pi_series.trunc(N)
        if not (lhs - target).is_zero():
            raise Nonconvergence("prism witness identity failed")
        return A, B

    # -- Gamma operators ---------------------------------------------------

    def gamma(self, u: OLApprox, N: int) -> "GammaOperator":
        if not self.R.is_unit(u):
            raise NotUnit("Gamma operators need a unit of O_L")
        return GammaOperator(self, u, N)

    def phi(self, s: TruncSeries) -> TruncSeries:
        """The Frobenius lift f(T) -> f([pi](T)) on series over O_L."""
        return s.compose(self.f)

    def __repr__(self):
        return f"LTGroup(q={self.q}, f={self.f.fmt()})"


class GammaOperator:
    """The ring endomorphism s(T) -> s([u](T)) for a unit u of O_L."""

    def __init__(self, G: LTGroup, u: OLApprox, N: int):
        self.G = G
        self.u = u
        self.N = N
        self.series = G.endo(u, N)

    def __call__(self, s: TruncSeries) -> TruncSeries:
        return s.compose(self.series)

    def stability_witness(self, n: int) -> TruncSeries:
        """C with q_n([u](T)) = q_n(T) * C, C a unit series; exact check.

        Uses [u](X) = X*w(X) with w a unit power series:
        q_n o [u] = q_n * w([pi^n]) / w([pi^(n-1)]).
        """
        G = self.G
        w = G.endo(self.u, self.N).divide_exact(TruncSeries.tvar(G.R))
        num = w.compose(G.pi_power(n).trunc(self.N))
        den = w.compose(G.pi_power(n - 1).trunc(self.N))
        C = num * den.invert_unit()
        lhs = G.qn(n).trunc(self.N).compose(self.series)
        rhs = (G.qn(n, self.N) * C).trunc(lhs.N)
        if not (lhs - rhs.trunc(lhs.N)).is_zero():
            raise Nonconvergence("Gamma stability witness failed")
        return C


def lt_check_associativity(G: LTGroup, N: int) -> bool:
    """F(F(X,Y),Z) = F(X,F(Y,Z)) at total degree <= N.

    Both sides are assembled from two-variable data: the third variable
    enters as a pure power, so no three-variable multiplication is needed.
    Coefficients of X^a Y^b Z^c are compared for all a + b + c <= N.
    """
    F = G.law(N)
    R = G.R
    pows = F.pow_list(N)
    side1 = []  # index: Z-power; entry: series in (X, Y)
    for j in range(N + 1):
        acc = TwoVarSeries(R, N)
        for i in range(N + 1 - j):
            c = F.get(i, j)
            if not R.is_zero(c):
                acc = acc.add(pows[i].scalar_mul(c))
        side1.append(acc)
    side2 = []  # index: X-power; entry: series in (Y, Z)
    for i in range(N + 1):
        acc = TwoVarSeries(R, N)
        for j in range(N + 1 - i):
            c = F.get(i, j)
            if not R.is_zero(c):
                acc = acc.add(pows[j].scalar_mul(c))
        side2.append(acc)
    for a in range(N + 1):
        for b in range(N + 1 - a):
            for c_ in range(N + 1 - a - b):
                if not R.eq(side1[c_].get(a, b), side2[a].get(b, c_)):
                    return False
    return True


# -- spec-level aliases -------------------------------------------------------


def lt_endomorphism(G: LTGroup, a: OLApprox, N: int) -> TruncSeries:
    return G.endo(a, N)


def qn_series(G: LTGroup, n: int, N: Optional[int] = None) -> TruncSeries:
    return G.qn(n, N)


def gamma_operator(G: LTGroup, u: OLApprox, N: int) -> GammaOperator:
    return G.gamma(u, N)


def prism_witness(G: LTGroup, n: int, N: Optional[int] = None):
    return G.prism_witness(n, N)
