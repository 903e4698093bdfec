"""3x3 matrices over E with a bounded denominator, at finite p-adic precision.

A :class:`PMatrix` with numerator ``num`` (entries in O/p^m) and denominator
exponent ``d`` stands for every matrix X with p^d X integral and
p^d X = num (mod p^m).  The entries of X are therefore known modulo
p^(m-d), the *effective precision*.  Canonical form keeps d minimal.

Membership predicates follow the congruence shapes of the unitary group
U = {g : conj(g)^T J g = J}, J the antidiagonal matrix.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import ConstraintViolated, InsufficientPrecision, NonUnit, NotUnitary
from .ring import GrElem, RingCtx, invert, make_ring

_IDX = [(i, j) for i in range(3) for j in range(3)]


def _val(a: int, b: int, p: int, cap: int) -> int:
    v = 0
    while v < cap and a % p == 0 and b % p == 0:
        a //= p
        b //= p
        v += 1
    return v


class PMatrix:
    __slots__ = ("_ab", "den_exp", "ctx")

    def __init__(self, entries: Sequence, ctx: RingCtx, den_exp: int = 0, *, canonical: bool = True):
        M = ctx.modulus
        ab = []
        for x in entries:
            if isinstance(x, GrElem):
                ab.append((x.a % M, x.b % M))
            elif isinstance(x, tuple):
                ab.append((x[0] % M, x[1] % M))
            else:
                ab.append((int(x) % M, 0))
        if len(ab) != 9:
            raise ValueError("a PMatrix needs exactly 9 entries")
        if den_exp < 0:
            raise ValueError("den_exp must be >= 0")
        self._ab = tuple(ab)
        self.den_exp = den_exp
        self.ctx = ctx
        if canonical:
            self._canonicalize()

    def _canonicalize(self):
        p = self.ctx.p
        ab, d, m = self._ab, self.den_exp, self.ctx.m
        while d > 0 and all(a % p == 0 and b % p == 0 for a, b in ab):
            if m <= 1:
                raise InsufficientPrecision("canonical form exhausted the precision")
            ab = tuple((a // p, b // p) for a, b in ab)
            d -= 1
            m -= 1
        if m != self.ctx.m:
            ctx = make_ring(p, m)
            M = ctx.modulus
            ab = tuple((a % M, b % M) for a, b in ab)
            self.ctx = ctx
        self._ab = ab
        self.den_exp = d

    @classmethod
    def from_rows(cls, rows: Iterable[Iterable], ctx: RingCtx, den_exp: int = 0) -> "PMatrix":
        return cls([x for row in rows for x in row], ctx, den_exp)

    @classmethod
    def identity(cls, ctx: RingCtx) -> "PMatrix":
        return cls([1, 0, 0, 0, 1, 0, 0, 0, 1], ctx)

    @property
    def prec(self) -> int:
        return self.ctx.m

    @property
    def p(self) -> int:
        return self.ctx.p

    @property
    def effective_precision(self) -> int:
        return self.ctx.m - self.den_exp

    @property
    def num(self) -> tuple:
        """Numerator entries as a 3x3 tuple of GrElem."""
        ctx = self.ctx
        ab = self._ab
        return tuple(tuple(GrElem(*ab[3 * i + j], ctx) for j in range(3)) for i in range(3))

    def __getitem__(self, ij) -> GrElem:
        i, j = ij
        return GrElem(*self._ab[3 * i + j], self.ctx)

    def raw(self) -> tuple:
        return self._ab

    def is_integral(self) -> bool:
        return self.den_exp == 0

    def __repr__(self):
        rows = [[self._ab[3 * i + j] for j in range(3)] for i in range(3)]
        return f"PMatrix(p^-{self.den_exp} * {rows}, prec={self.ctx.m})"

    def __eq__(self, other):
        if not isinstance(other, PMatrix):
            return NotImplemented
        return self.ctx == other.ctx and self.den_exp == other.den_exp and self._ab == other._ab

    def __hash__(self):
        return hash((self._ab, self.den_exp, self.ctx.p, self.ctx.m))

    def __matmul__(self, other):
        return mat_mul(self, other)

    def reduce(self, m: int) -> "PMatrix":
        """Drop numerator digits so the precision becomes m."""
        if m > self.ctx.m:
            raise ValueError("cannot raise precision")
        return PMatrix(self._ab, make_ring(self.ctx.p, m), self.den_exp)

    def agrees(self, other: "PMatrix") -> bool:
        """Equality of the represented matrices at their common effective precision."""
        p = self.ctx.p
        D = max(self.den_exp, other.den_exp)
        e = min(self.effective_precision, other.effective_precision)
        mod = p ** (e + D)
        s1 = p ** (D - self.den_exp)
        s2 = p ** (D - other.den_exp)
        for (a1, b1), (a2, b2) in zip(self._ab, other._ab):
            if (a1 * s1 - a2 * s2) % mod or (b1 * s1 - b2 * s2) % mod:
                return False
        return True

    def entry_valuation(self, i: int, j: int) -> tuple[int, bool]:
        """Valuation of entry (i, j) and whether it is exact (vs. a lower bound)."""
        a, b = self._ab[3 * i + j]
        m, d = self.ctx.m, self.den_exp
        if a == 0 and b == 0:
            return m - d, False
        return _val(a, b, self.ctx.p, m) - d, True

    def to_debug(self) -> dict:
        return {
            "entries": [list(x) for x in self._ab],
            "den_exp": self.den_exp,
            "prec": self.ctx.m,
        }

    @classmethod
    def from_debug(cls, data: dict, p: int) -> "PMatrix":
        ctx = make_ring(p, data["prec"])
        return cls([tuple(x) for x in data["entries"]], ctx, data["den_exp"])


def mat_mul(g: PMatrix, h: PMatrix) -> PMatrix:
    if g.ctx.p != h.ctx.p:
        raise ValueError("matrices over different primes")
    m = min(g.ctx.m, h.ctx.m)
    d = g.den_exp + h.den_exp
    if m - d < 1:
        raise InsufficientPrecision(f"product needs precision > {d}, have {m}")
    ctx = make_ring(g.ctx.p, m)
    M, c = ctx.modulus, ctx.c
    x, y = g._ab, h._ab
    out = []
    for i in range(3):
        r0, r1, r2 = x[3 * i], x[3 * i + 1], x[3 * i + 2]
        for j in range(3):
            c0, c1, c2 = y[j], y[3 + j], y[6 + j]
            a = r0[0] * c0[0] + r1[0] * c1[0] + r2[0] * c2[0]
            a += c * (r0[1] * c0[1] + r1[1] * c1[1] + r2[1] * c2[1])
            b = r0[0] * c0[1] + r0[1] * c0[0] + r1[0] * c1[1] + r1[1] * c1[0] + r2[0] * c2[1] + r2[1] * c2[0]
            out.append((a % M, b % M))
    return PMatrix(out, ctx, d)


def mat_prod(*mats: PMatrix) -> PMatrix:
    result = mats[0]
    for g in mats[1:]:
        result = mat_mul(result, g)
    return result


def conj_transpose(g: PMatrix) -> PMatrix:
    ab = g._ab
    return PMatrix([(ab[3 * j + i][0], -ab[3 * j + i][1]) for i in range(3) for j in range(3)], g.ctx, g.den_exp)


def weyl_j(ctx: RingCtx) -> PMatrix:
    return PMatrix([0, 0, 1, 0, 1, 0, 1, 0, 0], ctx)


def _j_conj_transpose(g: PMatrix) -> PMatrix:
    # J conj(g)^T J has (i, j) entry conj(g[2-j, 2-i])
    ab = g._ab
    out = []
    for i in range(3):
        for j in range(3):
            a, b = ab[3 * (2 - j) + (2 - i)]
            out.append((a, -b))
    return PMatrix(out, g.ctx, g.den_exp)


def is_unitary(g: PMatrix) -> bool:
    """Whether conj(g)^T J g = J at the available precision."""
    if g.effective_precision < 1:
        raise InsufficientPrecision("no digits left to test unitarity")
    prod = mat_mul(_j_conj_transpose(g), g)
    # J conj(g)^T J g = I  <=>  conj(g)^T J g = J
    return prod.agrees(PMatrix.identity(make_ring(g.ctx.p, max(prod.effective_precision, 1))))


def unitary_inverse(g: PMatrix) -> PMatrix:
    """g^{-1} = J conj(g)^T J, exact for unitary g."""
    if not is_unitary(g):
        raise NotUnitary(repr(g))
    return _j_conj_transpose(g)


def det_valuation(g: PMatrix) -> int:
    """Exact valuation of det(g), using column scaling to save precision."""
    p, m, d = g.ctx.p, g.ctx.m, g.den_exp
    ab = g._ab
    cols = []
    shifts = []
    for j in range(3):
        v = min(_val(*ab[3 * i + j], p, m) for i in range(3))
        s = min(v, d)  # divide the column by p^s, keeping it integral
        shifts.append(d - s)  # column of X scaled by p^(d-s) is integral
        cols.append([(ab[3 * i + j][0] // p**s, ab[3 * i + j][1] // p**s) for i in range(3)])
    e = min(m - s_ for s_ in [d - sh for sh in shifts])
    if e < 1:
        raise InsufficientPrecision("determinant not determined")
    ctx = make_ring(p, e)
    y = [[GrElem(*cols[j][i], ctx) for j in range(3)] for i in range(3)]
    det = (
        y[0][0] * (y[1][1] * y[2][2] - y[1][2] * y[2][1])
        - y[0][1] * (y[1][0] * y[2][2] - y[1][2] * y[2][0])
        + y[0][2] * (y[1][0] * y[2][1] - y[1][1] * y[2][0])
    )
    if det.is_zero():
        raise InsufficientPrecision("determinant vanishes at working precision")
    return det.valuation() - sum(shifts)


@dataclass(frozen=True)
class SubgroupId:
    """Congruence subgroup tag: Gamma(n), A(n), B(n), C(n, k), Principal(N) or Full."""

    tag: str
    n: int = 0
    k: int = 0

    def __post_init__(self):
        if self.tag not in ("Gamma", "A", "B", "C", "Principal", "Full"):
            raise ValueError(f"unknown subgroup tag {self.tag!r}")
        if self.n < 0:
            raise ValueError("level must be >= 0")
        if self.tag == "C" and not 0 <= self.k <= self.n:
            raise ValueError("C(n, k) needs 0 <= k <= n")

    def __str__(self):
        if self.tag == "C":
            return f"C({self.n},{self.k})"
        if self.tag == "Full":
            return "Full"
        return f"{self.tag}({self.n})"

    def shape(self) -> tuple[dict, int | None]:
        """Lower bounds on entry valuations, and the level of the 1 + p^n centre test."""
        n = self.n
        if self.tag in ("Gamma", "A", "C"):
            k = {"Gamma": 0, "A": n, "C": self.k}[self.tag]
            bounds = {(0, 2): k - n, (1, 0): n, (2, 0): n, (2, 1): n}
            return bounds, n
        if self.tag == "B":
            return {(1, 0): n, (2, 0): n, (2, 1): n}, None
        if self.tag == "Principal":
            return {ij: n for ij in _IDX if ij[0] != ij[1]}, n
        return {}, None

    def level_needed(self) -> int:
        return self.n + 1


def Gamma(n: int) -> SubgroupId:
    return SubgroupId("Gamma", n)


def A(n: int) -> SubgroupId:
    return SubgroupId("A", n)


def B(n: int) -> SubgroupId:
    return SubgroupId("B", n)


def C(n: int, k: int) -> SubgroupId:
    return SubgroupId("C", n, k)


def Principal(N: int) -> SubgroupId:
    return SubgroupId("Principal", N)


FULL = SubgroupId("Full")


def _entry_in(g: PMatrix, i: int, j: int, k: int, shift_one: bool = False) -> bool:
    a, b = g._ab[3 * i + j]
    p, m, d = g.ctx.p, g.ctx.m, g.den_exp
    if shift_one:
        a -= p**d
    M = g.ctx.modulus
    a, b = a % M, b % M
    if a == 0 and b == 0:
        if k <= m - d:
            return True
        raise InsufficientPrecision(f"entry ({i},{j}) in p^{k} undecided at effective precision {m - d}")
    return _val(a, b, p, m) - d >= k


def is_member(s: SubgroupId, g: PMatrix, *, assume_unitary: bool = False) -> bool:
    """Membership of g in the congruence subgroup s of U."""
    if not assume_unitary and not is_unitary(g):
        return False
    bounds, centre = s.shape()
    for i, j in _IDX:
        if (i, j) == (1, 1) and centre is not None:
            if not _entry_in(g, 1, 1, centre, shift_one=True):
                return False
            continue
        if (i, j) in bounds:
            if not _entry_in(g, i, j, bounds[(i, j)]):
                return False
        elif s.tag == "Principal" and i == j:
            if not _entry_in(g, i, j, s.n, shift_one=True):
                return False
        elif not _entry_in(g, i, j, 0):
            return False
    return det_valuation(g) == 0


# -- special elements -------------------------------------------------------


def t_matrix(k: int, u: GrElem, *, check: bool = True) -> PMatrix:
    """The unipotent with u * p^-k in the corner."""
    if check and not u.trace() == 0:
        raise ConstraintViolated(f"u = {u!r} is not trace-zero")
    ctx = u.ctx
    pk = ctx.p**k
    return PMatrix([pk, 0, u, 0, pk, 0, 0, 0, pk], ctx, k)


def sigma(n: int, ctx: RingCtx) -> PMatrix:
    """Antidiagonal element with p^-n, 1, p^n."""
    p = ctx.p
    return PMatrix([0, 0, 1, 0, p**n, 0, p ** (2 * n), 0, 0], ctx, n)


def upper(alpha: GrElem, beta: GrElem) -> PMatrix:
    """Unipotent [[1, -conj(alpha), beta], [0, 1, alpha], [0, 0, 1]]."""
    if not (beta + beta.conj() + alpha * alpha.conj()).is_zero():
        raise ConstraintViolated("beta + conj(beta) + alpha*conj(alpha) != 0")
    ctx = alpha.ctx
    return PMatrix([1, -alpha.conj(), beta, 0, 1, alpha, 0, 0, 1], ctx)


def lower(n: int, alpha: GrElem, beta: GrElem) -> PMatrix:
    """Unipotent with alpha p^n, beta p^n, -conj(alpha) p^n below the diagonal.

    Unitarity forces beta + conj(beta) + p^n alpha conj(alpha) = 0.
    """
    ctx = alpha.ctx
    pn = ctx.p**n
    if not (beta + beta.conj() + alpha * alpha.conj() * pn).is_zero():
        raise ConstraintViolated("beta + conj(beta) + p^n alpha conj(alpha) != 0")
    return PMatrix([1, 0, 0, alpha * pn, 1, 0, beta * pn, -alpha.conj() * pn, 1], ctx)


def torus(a: GrElem, b: GrElem) -> PMatrix:
    """diag(a, b, conj(a)^-1) with a a unit and b of norm one."""
    if not a.is_unit():
        raise ConstraintViolated("torus entry a must be a unit")
    if not b.norm() == 1:
        raise ConstraintViolated("torus entry b must have norm one")
    return PMatrix([a, 0, 0, 0, b, 0, 0, 0, invert(a.conj())], a.ctx)


def hermitian_lift(alpha: GrElem, beta: GrElem, m: int) -> tuple[GrElem, GrElem]:
    """Lift a residue pair with beta + conj(beta) + alpha conj(alpha) = 0 (mod p) exactly to O/p^m."""
    ctx = make_ring(alpha.ctx.p, m)
    al = GrElem(alpha.a, alpha.b, ctx)
    be = GrElem(beta.a, beta.b, ctx)
    half = pow(2, -1, ctx.modulus)
    trace_free = (be - be.conj()) * half
    return al, trace_free - al * al.conj() * half


def lower_rep(n: int, alpha: GrElem, beta: GrElem, m: int) -> PMatrix:
    """Level-n lower unipotent attached to a residue pair of N(O/p).

    The pair (alpha, beta) satisfies beta + conj(beta) + alpha conj(alpha) = 0
    mod p; the (3,1) coefficient used is the trace-free part of beta shifted
    so the exact constraint at level n holds.
    """
    ctx = make_ring(alpha.ctx.p, m)
    al = GrElem(alpha.a, alpha.b, ctx)
    be = GrElem(beta.a, beta.b, ctx)
    half = pow(2, -1, ctx.modulus)
    pn = ctx.p**n
    coeff = (be - be.conj()) * half - al * al.conj() * (pn * half)
    return lower(n, al, coeff)


def norm_one_from(x: GrElem) -> GrElem:
    """x / conj(x), always of norm one."""
    if not x.is_unit():
        raise NonUnit(repr(x))
    return x * invert(x.conj())


def special_element(kind: str, *params, ctx: RingCtx | None = None) -> PMatrix:
    """Dispatch by name: T, Sigma, Upper, Lower, Torus, WeylJ."""
    if kind == "T":
        return t_matrix(*params)
    if kind == "Sigma":
        return sigma(params[0], ctx)
    if kind == "Upper":
        return upper(*params)
    if kind == "Lower":
        return lower(*params)
    if kind == "Torus":
        return torus(*params)
    if kind == "WeylJ":
        return weyl_j(ctx)
    raise ValueError(f"unknown special element {kind!r}")
