"""Lattices in E^3 and the orbit of the standard lattice under Gamma_n.

Gamma_0 is the stabiliser of O^3 and A_n = Gamma_n cap Gamma_0, so the
Gamma_n-orbit of O^3 has exactly [Gamma_n : A_n] points.  This gives an
oracle for that index that does not go through the Klingen ladder.

A lattice L with p^{m-s} O^3 <= L <= p^{-s} O^3 is stored as the row span
R = p^s L reduced mod p^m, in Howell canonical form.  Vectors are rows, so
g acts on R by r -> r g^T.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .errors import GuardExceeded, InsufficientPrecision, RankDeficient
from .padic_matrix import (
    A,
    PMatrix,
    is_member,
    lower_rep,
    mat_mul,
    sigma,
    t_matrix,
    torus,
    unitary_inverse,
    upper,
    hermitian_lift,
    norm_one_from,
)
from .ring import GrElem, RingCtx, SpecialKind, enumerate_special, make_ring


def _val(x: tuple, p: int, cap: int) -> int:
    a, b = x
    v = 0
    while v < cap and a % p == 0 and b % p == 0:
        a //= p
        b //= p
        v += 1
    return v


class _Arith:
    """Scalar helpers on (a, b) pairs mod p^m."""

    def __init__(self, ctx: RingCtx):
        self.p, self.c, self.m, self.M = ctx.p, ctx.c, ctx.m, ctx.modulus

    def mul(self, x, y):
        M = self.M
        return ((x[0] * y[0] + self.c * x[1] * y[1]) % M, (x[0] * y[1] + x[1] * y[0]) % M)

    def inv(self, x):
        nrm = (x[0] * x[0] - self.c * x[1] * x[1]) % self.M
        t = pow(nrm, -1, self.M)
        return (x[0] * t % self.M, -x[1] * t % self.M)

    def scale(self, q, row):
        return tuple(self.mul(q, e) for e in row)

    def sub(self, r, s):
        M = self.M
        return tuple(((x[0] - y[0]) % M, (x[1] - y[1]) % M) for x, y in zip(r, s))


@dataclass(frozen=True)
class Lattice:
    """p^{-scale} times the row span of ``basis`` (Howell form over O/p^m)."""

    basis: tuple
    scale: int
    ctx: RingCtx = field(compare=False)
    pivots: tuple = field(compare=False, default=())

    def __hash__(self):
        return hash((self.basis, self.scale, self.ctx.p, self.ctx.m))

    def __eq__(self, other):
        if not isinstance(other, Lattice):
            return NotImplemented
        return (self.basis, self.scale, self.ctx.p, self.ctx.m) == (other.basis, other.scale, other.ctx.p, other.ctx.m)

    @property
    def index_exponent(self) -> int:
        """log_p |O^3 / p^s L| over O, i.e. the sum of pivot valuations."""
        return sum(self.pivots)

    def rows(self) -> tuple:
        return tuple(tuple(GrElem(a, b, self.ctx) for a, b in row) for row in self.basis)


def _pair(x, M: int) -> tuple:
    if isinstance(x, GrElem):
        return (x.a % M, x.b % M)
    if isinstance(x, tuple):
        return (x[0] % M, x[1] % M)
    return (int(x) % M, 0)


def howell_form(rows, ctx: RingCtx | None = None, scale: int = 0) -> Lattice:
    """Canonical basis of the O/p^m-span of three or more row vectors.

    Rows may be given as GrElem entries or (a, b) pairs; in the latter case
    ``ctx`` is required.  Pivots are powers of p, entries above a pivot are
    reduced digit-wise below it, and the p^{m-v} multiples of each pivot row are
    fed back so the result has the Howell property.
    """
    rows = [list(r) for r in rows]
    if ctx is None:
        ctx = next(x.ctx for r in rows for x in r if isinstance(x, GrElem))
    ar = _Arith(ctx)
    p, m, M = ctx.p, ctx.m, ctx.modulus
    pool = []
    for r in rows:
        if len(r) != 3:
            raise ValueError("rows must have three entries")
        pool.append(tuple(_pair(x, M) for x in r))

    basis, pivots = [], []
    for j in range(3):
        best, bv = None, m
        for i, r in enumerate(pool):
            v = _val(r[j], p, m)
            if v < bv:
                best, bv = i, v
        if best is None:
            raise RankDeficient(f"no pivot in column {j} below p^{m}")
        piv = pool.pop(best)
        pv = bv
        unit = (piv[j][0] // p**pv, piv[j][1] // p**pv)
        piv = ar.scale(ar.inv(unit), piv)
        rest = []
        for r in pool:
            x = r[j]
            if x != (0, 0):
                q = (x[0] // p**pv, x[1] // p**pv)  # exact: v(x) >= pv
                r = ar.sub(r, ar.scale(q, piv))
            if any(e != (0, 0) for e in r):
                rest.append(r)
        if pv:
            extra = ar.scale((p ** (m - pv), 0), piv)
            if any(e != (0, 0) for e in extra):
                rest.append(extra)
        pool = rest
        basis.append(piv)
        pivots.append(pv)

    for k in range(3):
        pk = p ** pivots[k]
        for i in range(k):
            x = basis[i][k]
            q = (x[0] // pk, x[1] // pk)
            if q != (0, 0):
                basis[i] = ar.sub(basis[i], ar.scale(q, basis[k]))
    return Lattice(tuple(basis), scale, ctx, tuple(pivots))


def standard_lattice(p: int, m: int, scale: int) -> Lattice:
    """O^3 seen in the window p^{m-scale} O^3 <= L <= p^{-scale} O^3."""
    ctx = make_ring(p, m)
    ps = p**scale
    rows = [[(ps if i == j else 0, 0) for j in range(3)] for i in range(3)]
    return howell_form(rows, ctx, scale)


def lattice_act(g: PMatrix, L: Lattice) -> Lattice:
    """Canonical form of g L for g with a unit determinant.

    Needs g known to effective precision at least m.  Raises
    InsufficientPrecision if g L leaves the window of L.
    """
    ctx = L.ctx
    p, m = ctx.p, ctx.m
    d = g.den_exp
    if g.ctx.p != p:
        raise ValueError("prime mismatch")
    if g.effective_precision < m:
        raise InsufficientPrecision(f"need effective precision {m}, matrix has {g.effective_precision}")
    if d > m:
        raise InsufficientPrecision("denominator exceeds the lattice window")
    big = make_ring(p, m + d)
    bar = _Arith(big)
    N = g.raw()
    Nrows = [[N[3 * i + j] for j in range(3)] for i in range(3)]
    gens = []
    for r in L.basis:
        # (g r^T)^T = r g^T, i.e. component i is sum_j N[i][j] r[j]
        w = []
        for i in range(3):
            acc = (0, 0)
            for j in range(3):
                t = bar.mul(Nrows[i][j], r[j])
                acc = (acc[0] + t[0], acc[1] + t[1])
            w.append((acc[0] % big.modulus, acc[1] % big.modulus))
        pd = p**d
        if any(x[0] % pd or x[1] % pd for x in w):
            raise InsufficientPrecision("g L is not contained in the window")
        gens.append(tuple((x[0] // pd, x[1] // pd) for x in w))
    if m - d > 0:
        s = p ** (m - d)
        for j in range(3):
            gens.append(tuple((Nrows[i][j][0] * s, Nrows[i][j][1] * s) for i in range(3)))
    try:
        out = howell_form(gens, ctx, L.scale)
    except RankDeficient as exc:
        raise InsufficientPrecision("g L leaves the window from below") from exc
    if out.index_exponent != L.index_exponent:
        raise InsufficientPrecision("g L leaves the window from below")
    return out


# -- the Gamma_n orbit of O^3 ------------------------------------------------


def gamma_generators(p: int, n: int, prec: int) -> list[tuple[str, PMatrix]]:
    """A generating family of Gamma_n, every matrix at precision ``prec``.

    sigma_n and t_j(u) (1 <= j <= n, u a trace-zero residue lift) carry the
    non-integral part; Upper, level-n Lower, and torus elements generate the
    integral part A_n.
    """
    ctx = make_ring(p, prec)
    out: list[tuple[str, PMatrix]] = [("sigma", sigma(n, ctx))]
    for u in enumerate_special(p, SpecialKind.TRACE_ZERO, 1):
        if u.is_zero():
            continue
        lu = ctx(u.a, u.b)
        for j in range(1, n + 1):
            out.append((f"t{j}({u.b}r)", t_matrix(j, lu)))
    for al, be in enumerate_special(p, SpecialKind.HERMITIAN_PAIRS):
        if al.is_zero() and be.is_zero():
            continue
        a2, b2 = hermitian_lift(al, be, prec)
        out.append((f"U({al!r},{be!r})", upper(a2, b2)))
        out.append((f"L({al!r},{be!r})", lower_rep(n, al, be, prec)))
    zeta = ctx.residue_generator()
    for a in (zeta, ctx(1 + p, 0), ctx(1, p)):
        out.append((f"T({a!r})", torus(a, ctx.one)))
    out.append(("Tc", torus(ctx.one, norm_one_from(ctx(1, p**n)))))
    return out


@dataclass
class LatticeOrbit:
    p: int
    n: int
    size: int
    depth: int
    schreier_checked: int
    lattices: list


def gamma_lattice_orbit(n: int, p: int, prec: int | None = None, guard: int = 10**4, check_stabilizer: bool = True) -> int:
    """[Gamma_n : A_n] as the size of the Gamma_n-orbit of O^3."""
    return lattice_orbit(n, p, prec, guard, check_stabilizer).size


def lattice_orbit(n: int, p: int, prec: int | None = None, guard: int = 10**4, check_stabilizer: bool = True) -> LatticeOrbit:
    if n < 1:
        raise ValueError("n must be >= 1")
    m = 2 * n + 4 if prec is None else prec
    if m < 2 * n + 4:
        raise InsufficientPrecision(f"lattice window {m} below 2n+4 = {2 * n + 4}")
    gens = gamma_generators(p, n, m + n)
    start = standard_lattice(p, m, n + 1)
    seen = {start: 0}
    parent: list[tuple[int, int] | None] = [None]
    order = [start]
    depth = [0]
    queue = deque([0])
    edges = []
    while queue:
        i = queue.popleft()
        L = order[i]
        for gi, (_, g) in enumerate(gens):
            L2 = lattice_act(g, L)
            j = seen.get(L2)
            if j is None:
                if len(order) >= guard:
                    raise GuardExceeded(f"lattice orbit exceeds guard {guard}")
                j = len(order)
                seen[L2] = j
                order.append(L2)
                parent.append((i, gi))
                depth.append(depth[i] + 1)
                queue.append(j)
            else:
                edges.append((i, gi, j))
    checked = _check_schreier(p, n, gens, parent, depth, edges, m) if check_stabilizer else 0
    return LatticeOrbit(p, n, len(order), max(depth), checked, order)


def _check_schreier(p, n, gens, parent, depth, edges, m) -> int:
    """Every rep_j^-1 g rep_i fixing O^3 must lie in A(n)."""
    D = max(depth)
    P = (2 * D + 3) * n + m
    hi = [g for _, g in gamma_generators(p, n, P)]
    ctx = make_ring(p, P)
    reps = [PMatrix.identity(ctx)]
    for i in range(1, len(parent)):
        src, gi = parent[i]
        reps.append(mat_mul(hi[gi], reps[src]))
    invs = [unitary_inverse(r) for r in reps]
    target = A(n)
    for i, gi, j in edges:
        s = mat_mul(invs[j], mat_mul(hi[gi], reps[i]))
        if not is_member(target, s):
            raise AssertionError(f"Schreier element for edge ({i}, {gi}, {j}) is not in A({n})")
    return len(edges)
