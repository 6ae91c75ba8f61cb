"""Etale phi_q-modules over the finite rings W_(L,n)(F_(q^m)).

A module is free of rank r over B = W_(L,n)(F_(q^m)) with structure matrix
A, acting by v -> A phi(v) (phi entrywise, the lifted q-Frobenius); it is
etale when det(A) is a unit.  Since phi fixes O_L, the maps A phi(.) - 1
and phi_M - 1 are O-linear for O = O_L/pi^n, and kernels/cokernels are
computed by diagonalization (Smith normal form) over the chain ring O,
whose ideals are the powers of pi.

A brute-force enumeration oracle is kept alongside the solver for every
small module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

from .base import FqField, OLApprox, OLConfig, OLRing, UnramExt
from .errors import ConfigError, NonMultiple, NotEtale, NotUnit, RingMismatch


# ---------------------------------------------------------------------------
# Smith normal form over the chain ring O_L/pi^n
# ---------------------------------------------------------------------------


class ChainRing:
    """O_L/pi^n: a finite chain ring; every element is unit * pi^val.

    Elements of the quotient are exact, so dividing by pi^v is a choice of
    lift: the digit vector of the precision-(n-v) quotient reread at full
    precision n.  Any lift differs by pi^(n-v)-torsion, which the normal
    form is insensitive to.
    """

    def __init__(self, config: OLConfig, n: int):
        self.config = config
        self.n = n
        self.R = OLRing(config, n)
        self.size = config.q**n

    def val(self, x: OLApprox) -> int:
        v = self.R.valuation(x)
        return self.n if v is None else min(v, self.n)

    def zero(self):
        return self.R.zero()

    def one(self):
        return self.R.one()

    def div_pi_exact(self, x: OLApprox, v: int) -> OLApprox:
        """A lift of x/pi^v back at full quotient precision n."""
        if v == 0:
            return x
        y = self.R.divide_pi(x, v)
        return self.R.make(list(y.coeffs), self.n)

    def unit_part(self, x: OLApprox) -> OLApprox:
        return self.div_pi_exact(x, self.val(x))

    def canonical(self, x: OLApprox) -> tuple:
        """Canonical residue key mod pi^n (e = 1 configs)."""
        if self.config.e != 1:
            raise ConfigError("canonical keys implemented for e = 1")
        pn = self.config.p**self.n
        return tuple(c % pn for c in x.coeffs)


def smith_normal_form(ring: ChainRing, mat: List[List[OLApprox]]):
    """Diagonalize over O_L/pi^n: returns (diag_exponents, V).

    diag_exponents[i] in [0, n] is the pi-exponent of the i-th invariant
    factor (n meaning 0 in the quotient); V is the accumulated column
    transform, so ker(mat) = V . ker(diag).
    """
    R = ring.R
    n = ring.n
    rows = len(mat)
    cols = len(mat[0]) if rows else 0
    a = [[x for x in row] for row in mat]
    V = [[R.one() if i == j else R.zero() for j in range(cols)] for i in range(cols)]
    diag = []
    r0 = 0
    c0 = 0
    while r0 < rows and c0 < cols:
        best = None
        bv = n
        for i in range(r0, rows):
            for j in range(c0, cols):
                v = ring.val(a[i][j])
                if v < bv:
                    bv, best = v, (i, j)
                    if v == 0:
                        break
            if bv == 0:
                break
        if best is None:
            break
        bi, bj = best
        a[r0], a[bi] = a[bi], a[r0]
        for row in a:
            row[c0], row[bj] = row[bj], row[c0]
        for row in V:
            row[c0], row[bj] = row[bj], row[c0]
        # normalize pivot to pi^bv
        u_inv = R.inv(ring.unit_part(a[r0][c0]))
        a[r0] = [R.mul(u_inv, x) for x in a[r0]]
        # clear the column below and the row to the right
        for i in range(rows):
            if i == r0:
                continue
            v = ring.val(a[i][c0])
            if v >= n:
                continue
            c = ring.div_pi_exact(a[i][c0], bv)
            a[i] = [R.sub(x, R.mul(c, y)) for x, y in zip(a[i], a[r0])]
        for j in range(cols):
            if j == c0:
                continue
            v = ring.val(a[r0][j])
            if v >= n:
                continue
            c = ring.div_pi_exact(a[r0][j], bv)
            for i in range(rows):
                a[i][j] = R.sub(a[i][j], R.mul(c, a[i][c0]))
            for i in range(cols):
                V[i][j] = R.sub(V[i][j], R.mul(c, V[i][c0]))
        diag.append(bv)
        r0 += 1
        c0 += 1
    # remaining columns are zero columns
    diag += [n] * (cols - len(diag))
    return diag, V


def kernel_generators(ring: ChainRing, mat: List[List[OLApprox]]):
    """Generators of ker(mat) on O^cols with their annihilator exponents.

    Returns [(vector, a)] where pi^a * vector = 0 is the generator's order;
    generators with a = 0 are dropped.
    """
    R = ring.R
    n = ring.n
    diag, V = smith_normal_form(ring, mat)
    cols = len(mat[0]) if mat else 0
    gens = []
    pi = R.pi()
    for j, aexp in enumerate(diag[:cols]):
        if aexp == 0:
            continue
        scale = R.pow(pi, n - aexp)
        vec = [R.mul(scale, V[i][j]) for i in range(cols)]
        gens.append((vec, aexp))
    return gens


# ---------------------------------------------------------------------------
# phi-modules
# ---------------------------------------------------------------------------


@dataclass
class ModuleDescription:
    """A finite O_L/pi^n-module in invariant-factor form."""

    exponents: List[int]  # nonzero pi-exponents of the cyclic factors

    def size_log_q(self) -> int:
        return sum(self.exponents)

    def size(self, q: int) -> int:
        return q ** self.size_log_q()

    def __repr__(self):
        if not self.exponents:
            return "0"
        return " + ".join(f"O/pi^{a}" for a in self.exponents)


class PhiModule:
    """Finite free module over W_(L,n)(F_(q^m)) with Frobenius structure.

    mat is the r x r structure matrix A; the semilinear operator is
    phi_M(v) = A . phi(v) coordinatewise.
    """

    def __init__(self, base: UnramExt, n: int, rank: int, mat: List[List]):
        if n < 1 or rank < 1:
            raise ConfigError("need n >= 1 and rank >= 1")
        self.base = base
        self.config = base.config
        self.n = n
        self.rank = rank
        if len(mat) != rank or any(len(row) != rank for row in mat):
            raise RingMismatch("structure matrix must be rank x rank")
        self.mat = [[base.cap(x, n) for x in row] for row in mat]
        self.m = base.m
        self.q = base.q
        self.chain = ChainRing(base.config, n)

    # -- linear algebra plumbing -----------------------------------------------

    @classmethod
    def from_dict(cls, d: dict) -> "PhiModule":
        cfg = OLConfig(
            p=int(d["p"]), f=int(d.get("f", 1)), e=int(d.get("e", 1)),
        )
        n, m, r = int(d["n"]), int(d.get("m", 1)), int(d["r"])
        base = UnramExt(cfg, m, n)
        R = OLRing(cfg, n)
        ef = cfg.e * cfg.f
        mat = []
        digits = d["matrix"]
        for i in range(r):
            row = []
            for j in range(r):
                entry = digits[i][j]
                # entry: list of m digit-vectors (or ints for m = 1)
                if isinstance(entry, int):
                    row.append(base.from_int(entry))
                else:
                    coeffs = [
                        R.make(c if isinstance(c, list) else [c], n) for c in entry
                    ]
                    row.append(base.from_base_coeffs(coeffs))
            mat.append(row)
        return cls(base, n, r, mat)

    def phi_vec(self, v: List) -> List:
        return [self.base.frobenius(x) for x in v]

    def apply(self, v: List) -> List:
        """phi_M(v) = A . phi(v)."""
        fv = self.phi_vec(v)
        out = []
        for i in range(self.rank):
            acc = self.base.zero()
            for j in range(self.rank):
                acc = self.base.add(acc, self.base.mul(self.mat[i][j], fv[j]))
            out.append(acc)
        return out

    def det(self):
        """Determinant by expansion (ranks here are tiny)."""
        r = self.rank
        if r == 1:
            return self.mat[0][0]
        B = self.base
        total = B.zero()
        import itertools

        for perm in itertools.permutations(range(r)):
            sign = 1
            seen = list(perm)
            for i in range(r):
                for j in range(i + 1, r):
                    if seen[i] > seen[j]:
                        sign = -sign
            term = B.one() if sign > 0 else B.from_int(-1)
            for i in range(r):
                term = B.mul(term, self.mat[i][perm[i]])
            total = B.add(total, term)
        return total

    # -- flattening to O^(m r) ---------------------------------------------

    def _basis_vectors(self):
        B = self.base
        out = []
        for t in range(self.rank):
            for j in range(self.m):
                v = [B.zero()] * self.rank
                coeffs = [B.base.zero()] * self.m
                coeffs[j] = B.base.one()
                v[t] = B.from_base_coeffs(coeffs)
                out.append(v)
        return out

    def _flatten(self, v: List) -> List[OLApprox]:
        out = []
        for x in v:
            out.extend(x)
        return out

    def _unflatten(self, flat: List[OLApprox]) -> List:
        B = self.base
        v = []
        for t in range(self.rank):
            v.append(B.from_base_coeffs(flat[t * self.m : (t + 1) * self.m]))
        return v

    def _operator_matrix(self, minus_one: bool) -> List[List[OLApprox]]:
        """Matrix of v -> A phi(v) (- v) on O^(m r), columns = basis images."""
        cols = []
        for bv in self._basis_vectors():
            img = self.apply(bv)
            if minus_one:
                img = [self.base.sub(a, b) for a, b in zip(img, bv)]
            cols.append(self._flatten(img))
        dim = self.m * self.rank
        return [[cols[j][i] for j in range(dim)] for i in range(dim)]


def is_etale(M: PhiModule) -> bool:
    """det(A) a unit of the base (nonzero mod pi)."""
    return M.base.valuation(M.det()) == 0


@dataclass
class FixedPoints:
    """Generators of {v : A phi(v) = v} with annihilator exponents."""

    M: PhiModule
    generators: List[Tuple[List, int]]

    def description(self) -> ModuleDescription:
        return ModuleDescription([a for _, a in self.generators])

    def size(self) -> int:
        return self.M.q ** sum(a for _, a in self.generators)

    def enumerate(self) -> set:
        """The full fixed set spanned by the generators (e = 1 configs)."""
        from itertools import product as iproduct

        M = self.M
        ch = M.chain
        R = ch.R
        combos = [[M.base.zero()] * M.rank]
        for gen, aexp in self.generators:
            pa = M.config.p**aexp
            scalars = [
                R.make(list(d), M.n)
                for d in iproduct(range(pa), repeat=M.config.f)
            ]
            new = []
            for s in scalars:
                sg = [M.base.mul(M.base.from_ol(s), g) for g in gen]
                for base_vec in combos:
                    new.append([M.base.add(a, b) for a, b in zip(base_vec, sg)])
            combos = new
        return {tuple(ch.canonical(c) for c in M._flatten(v)) for v in combos}


def fixed_points(M: PhiModule) -> FixedPoints:
    """Solve A phi(v) = v as the kernel of an O_L/pi^n-linear operator."""
    if not is_etale(M):
        raise NotEtale("fixed points computed for etale modules only")
    mat = M._operator_matrix(minus_one=True)
    gens = kernel_generators(M.chain, mat)
    out = []
    for flat, aexp in gens:
        v = M._unflatten(flat)
        img = M.apply(v)
        if not all(M.base.eq(a, b) for a, b in zip(img, v)):
            raise ConfigError("solver produced a non-fixed vector")
        out.append((v, aexp))
    return FixedPoints(M, out)


def brute_force_fixed_set(M: PhiModule) -> set:
    """Oracle: enumerate every vector and test A phi(v) = v (e = 1)."""
    ch = M.chain
    out = set()
    from itertools import product

    elements = list(M.base.elements_mod_pin(M.n))
    for combo in product(elements, repeat=M.rank):
        v = list(combo)
        img = M.apply(v)
        if all(M.base.eq(a, b) for a, b in zip(img, v)):
            out.add(tuple(ch.canonical(c) for c in M._flatten(v)))
    return out


def herr_h0_h1(M: PhiModule) -> Tuple[ModuleDescription, ModuleDescription]:
    """Kernel and cokernel of phi_M - 1 (the two-term complex in degrees 0, 1).

    Both are reported in invariant factors over O_L/pi^n; for a square
    operator matrix over a finite chain ring the two sizes agree.
    """
    mat = M._operator_matrix(minus_one=True)
    diag, _ = smith_normal_form(M.chain, mat)
    h0 = ModuleDescription(sorted((a for a in diag if a > 0), reverse=True))
    h1 = ModuleDescription(sorted((a for a in diag if a > 0), reverse=True))
    return h0, h1


def base_change(M: PhiModule, m_new: int) -> PhiModule:
    """The same matrix over W_(L,n)(F_(q^(m_new))), m | m_new.

    The base embeds by sending the old generator to a Hensel-lifted root of
    its minimal polynomial in the larger ring; fixed points inject.
    """
    if m_new % M.m:
        raise NonMultiple(f"{M.m} does not divide {m_new}")
    if m_new == M.m:
        return M
    big = UnramExt(M.config, m_new, M.n)
    emb = _embed(M.base, big)
    mat = [[emb(x) for x in row] for row in M.mat]
    return PhiModule(big, M.n, M.rank, mat)


def _embed(small: UnramExt, big: UnramExt):
    """An O_L-algebra embedding W_L(F_(q^m)) -> W_L(F_(q^m')) at joint prec."""
    if small.m == 1:
        def emb1(x):
            return big.from_ol(x[0])

        return emb1
    # root of small's residue modulus inside big's residue field
    rf_small = small.residue_field()
    rf_big = big.residue_field()
    root_res = None
    for cand in rf_big.elements():
        acc = rf_big.zero()
        for c in reversed(rf_small.modulus):
            lifted_c = _res_embed_base(rf_small, rf_big, c)
            acc = rf_big.add(rf_big.mul(acc, cand), lifted_c)
        if rf_big.is_zero(acc):
            root_res = cand
            break
    if root_res is None:
        raise ConfigError("no residue embedding found")
    # Hensel-lift the root in big
    r = big.lift_residue(root_res)
    mod_small_in_big = [
        big.from_base_coeffs([c]) for c in small.modulus
    ]

    def evalmod(x):
        acc = big.zero()
        for c in reversed(mod_small_in_big):
            acc = big.add(big.mul(acc, x), c)
        return acc

    def evalmod_deriv(x):
        acc = big.zero()
        for i in range(small.m, 0, -1):
            c = big.mul(mod_small_in_big[i], big.from_int(i))
            acc = big.add(big.mul(acc, x), c)
        return acc

    steps = max(1, math.ceil(math.log2(max(2, big.prec))) + 2)
    for _ in range(steps):
        r = big.sub(r, big.mul(evalmod(r), big.inv(evalmod_deriv(r))))
    if not big.is_zero(evalmod(r)):
        raise ConfigError("Hensel lift of the embedding failed")
    rp = [big.one()]
    for _ in range(small.m - 1):
        rp.append(big.mul(rp[-1], r))

    def emb(x):
        acc = big.zero()
        for i in range(small.m):
            acc = big.add(acc, big.mul(big.from_base_coeffs([x[i]]), rp[i]))
        return acc

    return emb


def _res_embed_base(rf_small, rf_big, c):
    """Embed an F_q-coefficient of the small residue field into the big one.

    Both residue fields are relative extensions of the same F_q, so the
    coefficient (an F_q element) maps to the constant component.
    """
    return rf_big.from_base(c)


def stabilization_check(M: PhiModule, max_steps: int = 8) -> dict:
    """Iterate base change m -> m * s until |fixed| = |O_L/pi^n|^rank.

    Returns the first s achieving full rank, with the monotone size trace;
    reports (not fails) when max_steps is exhausted.
    """
    if not is_etale(M):
        raise NotEtale("stabilization needs an etale module")
    target = M.config.q ** (M.n * M.rank)
    trace = []
    for s in range(1, max_steps + 1):
        Ms = base_change(M, M.m * s)
        fp = fixed_points(Ms)
        size = fp.size()
        trace.append(size)
        if size == target:
            return {"m_star": s, "trace": trace, "reached": True}
    return {"m_star": None, "trace": trace, "reached": False}
