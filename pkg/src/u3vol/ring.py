"""Finite quotients o/p^m and O/p^m of an unramified quadratic extension.

With residue degree one the ring of integers O of E is Z_p[sqrt(c)] for a
quadratic non-residue c, so O/p^m is the Galois ring (Z/p^m)[x]/(x^2 - c).
Elements are pairs ``a + b*sqrt(c)`` of residues mod p^m; the Galois
conjugation is ``b -> -b``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator

import numpy as np

from .errors import NonUnit


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


def smallest_nonresidue(p: int) -> int:
    squares = {x * x % p for x in range(1, p)}
    for c in range(1, p):
        if c not in squares:
            return c
    raise ValueError(f"no quadratic non-residue mod {p}")


@dataclass(frozen=True)
class RingCtx:
    """The pair of rings o/p^m and O/p^m = (Z/p^m)[sqrt(c)]."""

    p: int
    m: int
    c: int

    @property
    def modulus(self) -> int:
        return self.p**self.m

    def at(self, m: int) -> "RingCtx":
        """Same extension, different precision."""
        return make_ring(self.p, m)

    def __call__(self, a: int = 0, b: int = 0) -> "GrElem":
        return GrElem(a, b, self)

    def base(self, r: int) -> "BaseElem":
        return BaseElem(r, self)

    @property
    def zero(self) -> "GrElem":
        return GrElem(0, 0, self)

    @property
    def one(self) -> "GrElem":
        return GrElem(1, 0, self)

    @property
    def sqrt_c(self) -> "GrElem":
        return GrElem(0, 1, self)

    def size(self) -> int:
        return self.modulus**2

    def elements(self) -> Iterator["GrElem"]:
        """All of O/p^m in lexicographic (a, b) order."""
        M = self.modulus
        for a in range(M):
            for b in range(M):
                yield GrElem(a, b, self)

    def units(self) -> Iterator["GrElem"]:
        p = self.p
        for x in self.elements():
            if x.a % p or x.b % p:
                yield x

    def residue_generator(self) -> "GrElem":
        """Smallest (lexicographic) generator of the cyclic group (O/p)^x, lifted."""
        p = self.p
        order = p * p - 1
        k1 = make_ring(p, 1)
        prime_factors = [q for q in range(2, order + 1) if order % q == 0 and is_prime(q)]
        for x in k1.units():
            if all(x ** (order // q) != k1.one for q in prime_factors):
                return GrElem(x.a, x.b, self)
        raise AssertionError("finite field without a primitive element")


@lru_cache(maxsize=None)
def make_ring(p: int, m: int) -> RingCtx:
    if not isinstance(p, int) or not is_prime(p):
        raise ValueError(f"p = {p!r} is not a prime")
    if p == 2:
        raise ValueError("p = 2 is excluded: the residue characteristic must be odd")
    if m < 1:
        raise ValueError(f"precision m must be >= 1, got {m}")
    return RingCtx(p, m, smallest_nonresidue(p))


def _check_ctx(x, y):
    if x.ctx != y.ctx:
        raise ValueError(f"mixed rings: {x.ctx} vs {y.ctx}")


class BaseElem:
    """Element of o/p^m = Z/p^m."""

    __slots__ = ("residue", "ctx")

    def __init__(self, residue: int, ctx: RingCtx):
        self.residue = residue % ctx.modulus
        self.ctx = ctx

    def _coerce(self, other):
        if isinstance(other, int):
            return BaseElem(other, self.ctx)
        if isinstance(other, BaseElem):
            _check_ctx(self, other)
            return other
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return BaseElem(self.residue + other.residue, self.ctx)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return BaseElem(self.residue - other.residue, self.ctx)

    def __rsub__(self, other):
        return BaseElem(other, self.ctx) - self

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return BaseElem(self.residue * other.residue, self.ctx)

    __rmul__ = __mul__

    def __neg__(self):
        return BaseElem(-self.residue, self.ctx)

    def __eq__(self, other):
        if isinstance(other, int):
            return self.residue == other % self.ctx.modulus
        if isinstance(other, BaseElem):
            return self.ctx == other.ctx and self.residue == other.residue
        return NotImplemented

    def __hash__(self):
        return hash((self.residue, self.ctx.p, self.ctx.m))

    def __int__(self):
        return self.residue

    def valuation(self) -> int:
        return _int_val(self.residue, self.ctx.p, self.ctx.m)

    def embed(self) -> "GrElem":
        return GrElem(self.residue, 0, self.ctx)

    def __repr__(self):
        return f"{self.residue} (mod {self.ctx.p}^{self.ctx.m})"


def _int_val(r: int, p: int, cap: int) -> int:
    if r == 0:
        return cap
    v = 0
    while r % p == 0 and v < cap:
        r //= p
        v += 1
    return v


class GrElem:
    """Element ``a + b*sqrt(c)`` of O/p^m."""

    __slots__ = ("a", "b", "ctx")

    def __init__(self, a: int, b: int, ctx: RingCtx):
        M = ctx.modulus
        self.a = a % M
        self.b = b % M
        self.ctx = ctx

    def _coerce(self, other):
        if isinstance(other, GrElem):
            _check_ctx(self, other)
            return other
        if isinstance(other, int):
            return GrElem(other, 0, self.ctx)
        if isinstance(other, BaseElem):
            _check_ctx(self, other)
            return GrElem(other.residue, 0, self.ctx)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return GrElem(self.a + other.a, self.b + other.b, self.ctx)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return GrElem(self.a - other.a, self.b - other.b, self.ctx)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other - self

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        a, b, x, y = self.a, self.b, other.a, other.b
        return GrElem(a * x + self.ctx.c * b * y, a * y + b * x, self.ctx)

    __rmul__ = __mul__

    def __neg__(self):
        return GrElem(-self.a, -self.b, self.ctx)

    def __pow__(self, k: int):
        if k < 0:
            return invert(self) ** (-k)
        result, base = self.ctx.one, self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * invert(other)

    def __eq__(self, other):
        if isinstance(other, GrElem):
            return self.ctx == other.ctx and self.a == other.a and self.b == other.b
        if isinstance(other, int):
            M = self.ctx.modulus
            return self.b == 0 and self.a == other % M
        if isinstance(other, BaseElem):
            return self.ctx == other.ctx and self.b == 0 and self.a == other.residue
        return NotImplemented

    def __hash__(self):
        return hash((self.a, self.b, self.ctx.p, self.ctx.m))

    def __repr__(self):
        p, m = self.ctx.p, self.ctx.m
        if self.b == 0:
            return f"{self.a} (mod {p}^{m})"
        return f"{self.a}+{self.b}*sqrt({self.ctx.c}) (mod {p}^{m})"

    def pack(self) -> int:
        """Mixed-radix code ``a + b*p^m``; injective on O/p^m."""
        return self.a + self.b * self.ctx.modulus

    @classmethod
    def unpack(cls, code: int, ctx: RingCtx) -> "GrElem":
        M = ctx.modulus
        return cls(code % M, code // M, ctx)

    def conj(self) -> "GrElem":
        return GrElem(self.a, -self.b, self.ctx)

    def trace(self) -> BaseElem:
        return BaseElem(2 * self.a, self.ctx)

    def norm(self) -> BaseElem:
        return BaseElem(self.a * self.a - self.ctx.c * self.b * self.b, self.ctx)

    def valuation(self) -> int:
        p, m = self.ctx.p, self.ctx.m
        return min(_int_val(self.a, p, m), _int_val(self.b, p, m))

    def is_unit(self) -> bool:
        p = self.ctx.p
        return bool(self.a % p or self.b % p)

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0

    def reduce(self, m: int) -> "GrElem":
        """Image in O/p^m for m <= current precision."""
        if m > self.ctx.m:
            raise ValueError("cannot reduce to a higher precision")
        return GrElem(self.a, self.b, self.ctx.at(m))

    def lift(self, m: int) -> "GrElem":
        """The element with the same integer representatives in O/p^m."""
        return GrElem(self.a, self.b, self.ctx.at(m))

    def divp(self, k: int) -> "GrElem":
        """Exact division by p^k; the quotient is known mod p^(m-k)."""
        pk = self.ctx.p**k
        if self.a % pk or self.b % pk:
            raise ValueError(f"{self!r} is not divisible by p^{k}")
        return GrElem(self.a // pk, self.b // pk, self.ctx.at(self.ctx.m - k))


def conj(x: GrElem) -> GrElem:
    return x.conj()


def galois_invariants(x: GrElem) -> tuple[BaseElem, BaseElem]:
    """Return ``(x + conj(x), x * conj(x))`` as elements of o/p^m."""
    return x.trace(), x.norm()


def valuation(x: GrElem) -> int:
    """p-adic valuation, capped at the precision m (so the zero residue has m)."""
    return x.valuation()


def invert(x: GrElem) -> GrElem:
    if not x.is_unit():
        raise NonUnit(f"{x!r} is not a unit")
    M = x.ctx.modulus
    n_inv = pow(x.norm().residue, -1, M)
    return GrElem(x.a * n_inv, -x.b * n_inv, x.ctx)


def sqrt_one_plus(u: BaseElem) -> BaseElem:
    """Square root of u = 1 (mod p) in o/p^m that is = 1 (mod p)."""
    p, M = u.ctx.p, u.ctx.modulus
    if (u.residue - 1) % p:
        raise ValueError("argument must be congruent to 1 mod p")
    # Newton iteration for r^2 = u, doubling p-adic precision each step
    r = 1
    inv2 = pow(2, -1, M)
    for _ in range(u.ctx.m.bit_length() + 1):
        r = (r + u.residue * pow(r, -1, M)) * inv2 % M
    assert r * r % M == u.residue
    return BaseElem(r, u.ctx)


class SpecialKind(enum.Enum):
    TRACE_ZERO = "TraceZero"
    NORM_ONE = "NormOne"
    HERMITIAN_PAIRS = "HermitianPairs"


@dataclass(frozen=True)
class SpecialSet:
    kind: SpecialKind
    n: int
    elements: tuple
    cardinality: int

    def __len__(self):
        return self.cardinality

    def __iter__(self):
        return iter(self.elements)


def _grid(ctx: RingCtx):
    M = ctx.modulus
    a, b = np.divmod(np.arange(M * M, dtype=np.int64), M)
    return a, b


def enumerate_special(p: int, kind: SpecialKind | str, n: int = 1) -> SpecialSet:
    """Exhaustively list E^0 or E^1 inside O/p^n, or N(O/p) inside (O/p)^2.

    The filter runs over every element (every pair for HermitianPairs);
    results are in lexicographic (a, b) order.
    """
    kind = SpecialKind(kind)
    if kind is SpecialKind.HERMITIAN_PAIRS:
        n = 1
    if n < 1:
        raise ValueError("n must be >= 1")
    ctx = make_ring(p, n)
    M, c = ctx.modulus, ctx.c
    a, b = _grid(ctx)
    if kind is SpecialKind.TRACE_ZERO:
        mask = (2 * a) % M == 0
        elems = tuple(GrElem(int(x), int(y), ctx) for x, y in zip(a[mask], b[mask]))
    elif kind is SpecialKind.NORM_ONE:
        mask = (a * a - c * b * b - 1) % M == 0
        elems = tuple(GrElem(int(x), int(y), ctx) for x, y in zip(a[mask], b[mask]))
    else:
        # (alpha, beta) with beta + conj(beta) + alpha*conj(alpha) = 0 in O/p
        norm_alpha = (a * a - c * b * b) % M
        trace_beta = (2 * a) % M
        ok = (trace_beta[None, :] + norm_alpha[:, None]) % M == 0
        ia, ib = np.nonzero(ok)
        elems = tuple(
            (GrElem(int(a[i]), int(b[i]), ctx), GrElem(int(a[j]), int(b[j]), ctx))
            for i, j in zip(ia, ib)
        )
    return SpecialSet(kind, n, elems, len(elems))
