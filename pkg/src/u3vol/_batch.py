"""Vectorised arithmetic on stacks of elements / 3x3 matrices over O/p^N.

Arrays carry a trailing axis of length 2 holding (a, b) for a + b sqrt(c).
Everything stays in int64; with p^N below ~3*10^4 no product overflows.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .padic_matrix import PMatrix
from .ring import make_ring

J_MAT = np.zeros((3, 3, 2), dtype=np.int64)
J_MAT[0, 2, 0] = J_MAT[1, 1, 0] = J_MAT[2, 0, 0] = 1
EYE = np.zeros((3, 3, 2), dtype=np.int64)
EYE[0, 0, 0] = EYE[1, 1, 0] = EYE[2, 2, 0] = 1


@lru_cache(maxsize=None)
def _inverse_table(M: int, p: int) -> np.ndarray:
    tab = np.zeros(M, dtype=np.int64)
    for r in range(M):
        if r % p:
            tab[r] = pow(r, -1, M)
    return tab


class Quotient:
    """The ring O/p^N with vectorised operations."""

    def __init__(self, p: int, N: int):
        ctx = make_ring(p, N)
        self.p, self.N, self.c = p, N, ctx.c
        self.M = ctx.modulus
        if self.M > 40000:
            raise ValueError("modulus too large for int64 batch arithmetic")
        self.ctx = ctx

    def mul(self, x, y):
        xa, xb = x[..., 0], x[..., 1]
        ya, yb = y[..., 0], y[..., 1]
        out = np.empty(np.broadcast_shapes(x.shape, y.shape), dtype=np.int64)
        out[..., 0] = (xa * ya + self.c * (xb * yb)) % self.M
        out[..., 1] = (xa * yb + xb * ya) % self.M
        return out

    def conj(self, x):
        out = x.copy()
        out[..., 1] = (-x[..., 1]) % self.M
        return out

    def norm(self, x):
        return (x[..., 0] * x[..., 0] - self.c * x[..., 1] * x[..., 1]) % self.M

    def is_unit(self, x):
        return (x[..., 0] % self.p != 0) | (x[..., 1] % self.p != 0)

    def inv(self, x):
        """Inverse of units (garbage on non-units)."""
        tab = _inverse_table(self.M, self.p)
        ninv = tab[self.norm(x)]
        out = np.empty_like(x)
        out[..., 0] = (x[..., 0] * ninv) % self.M
        out[..., 1] = (-x[..., 1] * ninv) % self.M
        return out

    def matmul(self, X, Y):
        """Batched product over the (..., 3, 3, 2) layout."""
        Xa, Xb = X[..., 0], X[..., 1]
        Ya, Yb = Y[..., 0], Y[..., 1]
        re = (np.matmul(Xa, Ya) + self.c * np.matmul(Xb, Yb)) % self.M
        out = np.empty(re.shape + (2,), dtype=np.int64)
        out[..., 0] = re
        out[..., 1] = (np.matmul(Xa, Yb) + np.matmul(Xb, Ya)) % self.M
        return out

    def matvec(self, X, v):
        Xa, Xb = X[..., 0], X[..., 1]
        va, vb = v[..., 0], v[..., 1]
        out = np.empty(np.broadcast_shapes(X.shape[:-3] + (3, 2), v.shape), dtype=np.int64)
        out[..., 0] = (np.einsum("...ij,...j->...i", Xa, va) + self.c * np.einsum("...ij,...j->...i", Xb, vb)) % self.M
        out[..., 1] = (np.einsum("...ij,...j->...i", Xa, vb) + np.einsum("...ij,...j->...i", Xb, va)) % self.M
        return out

    def unitary_inverse(self, X):
        """J conj(X)^T J: reverse both axes, transpose, conjugate."""
        Y = np.swapaxes(X[..., ::-1, ::-1, :], -3, -2)
        return self.conj(np.ascontiguousarray(Y))

    def is_unitary(self, X):
        P = self.matmul(self.unitary_inverse(X), X)
        return np.all((P - EYE) % self.M == 0, axis=(-1, -2, -3))

    def det(self, X):
        m = lambda i, j: X[..., i, j, :]
        t1 = self.mul(m(0, 0), (self.mul(m(1, 1), m(2, 2)) - self.mul(m(1, 2), m(2, 1))))
        t2 = self.mul(m(0, 1), (self.mul(m(1, 0), m(2, 2)) - self.mul(m(1, 2), m(2, 0))))
        t3 = self.mul(m(0, 2), (self.mul(m(1, 0), m(2, 1)) - self.mul(m(1, 1), m(2, 0))))
        return (t1 - t2 + t3) % self.M

    def divisible(self, x, k: int):
        """Entry-wise test x in p^k O."""
        pk = self.p**k
        return (x[..., 0] % pk == 0) & (x[..., 1] % pk == 0)

    def shape_member(self, tag: str, n: int, X):
        """Membership of integral matrices in the shape subgroups B(n), A(n), Full.

        Unitarity is not rechecked; det must be a unit.
        """
        ok = self.is_unit(self.det(X))
        if tag in ("B", "A"):
            for i, j in ((1, 0), (2, 0), (2, 1)):
                ok &= self.divisible(X[..., i, j, :], n)
        if tag == "A":
            centre = X[..., 1, 1, :].copy()
            centre[..., 0] -= 1
            ok &= self.divisible(centre, n)
        return ok

    def from_pmatrix(self, g: PMatrix) -> np.ndarray:
        if g.den_exp:
            raise ValueError("only integral matrices live in the finite quotient")
        if g.ctx.m < self.N:
            raise ValueError("matrix precision below the quotient level")
        arr = np.array(g.raw(), dtype=np.int64).reshape(3, 3, 2)
        return arr % self.M

    def to_pmatrix(self, X) -> PMatrix:
        return PMatrix([(int(X[i, j, 0]), int(X[i, j, 1])) for i in range(3) for j in range(3)], self.ctx)

    def pack_matrices(self, X):
        """Injective int64 code of matrices; requires M^18 < 2^63."""
        if self.M**18 >= 2**63:
            raise ValueError("matrices too large to pack into int64")
        flat = X.reshape(X.shape[:-3] + (18,))
        code = np.zeros(flat.shape[:-1], dtype=np.int64)
        for t in range(18):
            code = code * self.M + flat[..., t]
        return code

    def all_elements(self):
        M = self.M
        a, b = np.divmod(np.arange(M * M, dtype=np.int64), M)
        return np.stack([a, b], axis=-1)
