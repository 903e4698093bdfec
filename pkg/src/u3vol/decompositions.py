"""Constructive coset and matrix decompositions.

* Klingen ladder: C(n, k) = union of t_{n-k}(u) C(n, k+1) over u in E^0_p,
  plus sigma_n C(n, 1) on the bottom rung.
* Iwahori factorisation of B(n) as lower(n) * torus * upper.
* Bruhat decomposition U(F_p) = B  u  B J U_J over the residue field.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass

import numpy as np

from . import _batch
from .errors import NotFactorizable, NotInSubgroup, TraceObstruction
from .group_engine import random_b_element
from .padic_matrix import (
    B,
    C,
    PMatrix,
    is_member,
    is_unitary,
    lower_rep,
    mat_mul,
    mat_prod,
    sigma,
    t_matrix,
    unitary_inverse,
    weyl_j,
)
from .ring import GrElem, SpecialKind, enumerate_special, invert, make_ring


def default_ladder_precision(n: int) -> int:
    return 6 * n + 8


@dataclass(frozen=True)
class KlingenStep:
    rep: PMatrix
    remainder: PMatrix
    u: GrElem | None  # None for the sigma_n branch


def _scaled_entry(g: PMatrix, i: int, j: int, shift: int) -> GrElem:
    """Entry (i, j) of g times p^shift, as an integral element."""
    a, b = g.raw()[3 * i + j]
    p, m = g.ctx.p, g.ctx.m
    s = shift - g.den_exp
    if s >= 0:
        return make_ring(p, m)(a * p**s, b * p**s)
    q = p ** (-s)
    if a % q or b % q:
        raise NotInSubgroup(f"entry ({i},{j}) times p^{shift} is not integral")
    return make_ring(p, m + s)(a // q, b // q)


def klingen_reduce(g: PMatrix, n: int, k: int) -> KlingenStep:
    """Peel one ladder representative off g in C(n, k)."""
    if not 0 <= k < n:
        raise ValueError("need 0 <= k < n")
    if not is_member(C(n, k), g):
        raise NotInSubgroup(f"input is not in C({n},{k})")
    p, ctx = g.ctx.p, g.ctx
    iota = _scaled_entry(g, 2, 2, 0)
    if not iota.is_unit():
        if k > 0:
            raise TraceObstruction(f"iota not a unit on rung k={k}")
        rep = sigma(n, ctx)
        rem = mat_mul(rep, g)  # sigma_n^2 = 1
        u = None
    else:
        gamma = _scaled_entry(g, 0, 2, n - k).reduce(1)
        cres = gamma * invert(iota.reduce(1))
        if not (cres + cres.conj()).is_zero():
            raise TraceObstruction(f"iota^-1 gamma = {cres!r} is not trace-zero mod p")
        u = ctx(0, cres.b)  # (c - conj c)/2 with c = a + b sqrt(c)
        rep = t_matrix(n - k, u)
        rem = mat_mul(t_matrix(n - k, -u), g)
    if not is_member(C(n, k + 1), rem):
        raise NotInSubgroup(f"remainder escaped C({n},{k + 1})")
    return KlingenStep(rep, rem, u)


def ladder_reps(p: int, n: int, k: int, m: int) -> list[PMatrix]:
    ctx = make_ring(p, m)
    reps = [t_matrix(n - k, ctx(u.a, u.b)) for u in enumerate_special(p, SpecialKind.TRACE_ZERO, 1)]
    if k == 0:
        reps.append(sigma(n, ctx))
    return reps


def random_ladder_element(p: int, n: int, j: int, m: int, rng: random.Random) -> PMatrix:
    """Random element of C(n, j) built from A_n elements and t_{n-i}(u), i >= j."""
    ctx = make_ring(p, m)
    parts = [random_b_element(p, n, m, rng, force_kernel=True)]
    for _ in range(2):
        i = rng.randrange(j, n + 1)
        u = ctx(0, rng.randrange(ctx.modulus))
        parts.append(t_matrix(n - i, u))
        parts.append(random_b_element(p, n, m, rng, force_kernel=True))
    return mat_prod(*parts)


@dataclass
class LadderEvidence:
    p: int
    n: int
    indices: list
    samples_per_rung: int
    failures: int
    structured_checked: int


def klingen_index_chain(p: int, n: int, samples: int = 200, seed: int = 0, prec: int | None = None) -> LadderEvidence:
    """Certify [C(n,k) : C(n,k+1)] for k = 0..n-1: exact disjointness, sampled covering."""
    if n < 1:
        raise ValueError("n must be >= 1")
    m = prec or default_ladder_precision(n)
    rng = random.Random(seed)
    indices = []
    failures = 0
    structured = 0
    for k in range(n):
        reps = ladder_reps(p, n, k, m)
        nxt = C(n, k + 1)
        for r in reps:
            if not is_member(C(n, k), r):
                raise NotInSubgroup(f"representative {r!r} not in C({n},{k})")
        for r1, r2 in itertools.combinations(reps, 2):
            if is_member(nxt, mat_mul(unitary_inverse(r1), r2), assume_unitary=True):
                raise AssertionError(f"ladder representatives equivalent on rung {k}")
        for _ in range(samples):
            i = rng.randrange(len(reps))
            h = random_ladder_element(p, n, k + 1, m, rng)
            g = mat_mul(reps[i], h)
            try:
                step = klingen_reduce(g, n, k)
            except (NotInSubgroup, TraceObstruction):
                failures += 1
                continue
            same = is_member(nxt, mat_mul(unitary_inverse(step.rep), reps[i]), assume_unitary=True)
            if not same or not mat_mul(step.rep, step.remainder).agrees(g):
                failures += 1
        # products of special elements that happen to lie in C(n, k)
        for _ in range(samples // 4):
            word = [random_ladder_element(p, n, k, m, rng)]
            if k == 0:
                word.append(sigma(n, make_ring(p, m)))
                word.append(random_ladder_element(p, n, 1, m, rng))
            g = mat_prod(*word)
            if not is_member(C(n, k), g):
                continue
            structured += 1
            try:
                step = klingen_reduce(g, n, k)
                if not mat_mul(step.rep, step.remainder).agrees(g):
                    failures += 1
            except (NotInSubgroup, TraceObstruction):
                failures += 1
        indices.append(len(reps))
    return LadderEvidence(p, n, indices, samples, failures, structured)


# -- Iwahori ----------------------------------------------------------------


@dataclass(frozen=True)
class IwahoriTriple:
    lower: PMatrix
    torus: PMatrix
    upper: PMatrix

    def product(self) -> PMatrix:
        return mat_prod(self.lower, self.torus, self.upper)


def _is_lower_level(g: PMatrix, n: int) -> bool:
    x = g.num
    return (
        all(x[i][i] == 1 for i in range(3))
        and all(x[i][j].is_zero() for i in range(3) for j in range(3) if j > i)
        and all(x[i][j].valuation() >= n for i, j in ((1, 0), (2, 0), (2, 1)))
    )


def _is_upper_unipotent(g: PMatrix) -> bool:
    x = g.num
    return all(x[i][i] == 1 for i in range(3)) and all(x[i][j].is_zero() for i in range(3) for j in range(i))


def _is_diagonal(g: PMatrix) -> bool:
    x = g.num
    return all(x[i][j].is_zero() for i in range(3) for j in range(3) if i != j)


def iwahori_factor(g: PMatrix, n: int) -> IwahoriTriple:
    """Unique g = lower * torus * upper for g in B(n), by LDU elimination."""
    if g.den_exp != 0 or not is_member(B(n), g):
        raise NotFactorizable("input is not in B(n)")
    ctx = g.ctx
    x = g.num
    try:
        t1 = x[0][0]
        i1 = invert(t1)
        l21, l31 = x[1][0] * i1, x[2][0] * i1
        u12, u13 = x[0][1] * i1, x[0][2] * i1
        t2 = x[1][1] - l21 * t1 * u12
        i2 = invert(t2)
        l32 = (x[2][1] - l31 * t1 * u12) * i2
        u23 = (x[1][2] - l21 * t1 * u13) * i2
        t3 = x[2][2] - l31 * t1 * u13 - l32 * t2 * u23
        invert(t3)
    except ArithmeticError as exc:
        raise NotFactorizable(str(exc)) from exc
    z, one = ctx.zero, ctx.one
    lo = PMatrix([one, z, z, l21, one, z, l31, l32, one], ctx)
    to = PMatrix([t1, z, z, z, t2, z, z, z, t3], ctx)
    up = PMatrix([one, u12, u13, z, one, u23, z, z, one], ctx)
    triple = IwahoriTriple(lo, to, up)
    if not (
        _is_lower_level(lo, n)
        and _is_diagonal(to)
        and _is_upper_unipotent(up)
        and is_unitary(lo)
        and is_unitary(to)
        and is_unitary(up)
        and triple.product().agrees(g)
    ):
        raise NotFactorizable("factor failed its shape or unitarity check")
    return triple


def recursive_coset_check(p: int, n: int, prec: int | None = None, covering_samples: int = 20, seed: int = 0) -> int:
    """Certify [B_n : B_{n+1}] = |N(O/p)| with the level-n lower unipotent representatives."""
    if n < 1:
        raise ValueError("n must be >= 1")
    m = prec or 2 * n + 4
    pairs = enumerate_special(p, SpecialKind.HERMITIAN_PAIRS)
    reps = [lower_rep(n, al, be, m) for al, be in pairs]
    Bn, Bn1 = B(n), B(n + 1)
    for r in reps:
        if not is_member(Bn, r):
            raise NotInSubgroup("lower representative not in B(n)")
    invs = [unitary_inverse(r) for r in reps]
    for i, j in itertools.combinations(range(len(reps)), 2):
        if is_member(Bn1, mat_mul(invs[i], reps[j]), assume_unitary=True):
            raise AssertionError(f"representatives {i} and {j} are equivalent mod B(n+1)")
    rng = random.Random(seed)
    for _ in range(covering_samples):
        g = random_b_element(p, n, m, rng)
        hits = sum(is_member(Bn1, mat_mul(r_inv, g), assume_unitary=True) for r_inv in invs)
        if hits != 1:
            raise AssertionError(f"element of B(n) met {hits} representative cosets")
    return len(reps)


# -- Bruhat over the residue field -----------------------------------------


@dataclass(frozen=True)
class BruhatCell:
    w: str  # "I" or "J"
    b: PMatrix
    u: PMatrix


def _bruhat_batch(Q: _batch.Quotient, X):
    """Solve X = b w u for a stack of residue unitary matrices.

    Returns (big, b, u) with big True for the J-cell.
    """
    g31 = X[:, 2, 0]
    big = Q.is_unit(g31)
    upper_tri = ~big & np.all(X[:, 1, 0] == 0, axis=-1) & np.all(X[:, 2, 1] == 0, axis=-1)
    if not np.all(big | upper_tri):
        raise NotFactorizable("element with (3,1) = 0 that is not upper triangular")
    k = len(X)
    b = X.copy()
    u = np.broadcast_to(_batch.EYE, X.shape).copy()
    if big.any():
        Y = X[big]
        inv31 = Q.inv(Y[:, 2, 0])
        alpha = Q.conj(Q.mul(Y[:, 2, 1], inv31))
        beta = (-Q.mul(Q.mul(Y[:, 2, 1], alpha) + Y[:, 2, 2], inv31)) % Q.M
        V = np.broadcast_to(_batch.EYE, Y.shape).copy()
        V[:, 0, 1] = (-Q.conj(alpha)) % Q.M
        V[:, 0, 2] = beta
        V[:, 1, 2] = alpha
        J = _batch.J_MAT
        b[big] = Q.matmul(Q.matmul(Y, V), J)
        u[big] = Q.unitary_inverse(V)
    assert k == len(b)
    return big, b, u


def _check_bruhat(Q, X, big, b, u):
    lower_zero = np.all(b[:, 1, 0] == 0, axis=-1) & np.all(b[:, 2, 0] == 0, axis=-1) & np.all(b[:, 2, 1] == 0, axis=-1)
    w = np.where(big[:, None, None, None], _batch.J_MAT, _batch.EYE)
    recon = Q.matmul(Q.matmul(b, w), u)
    u_unip = np.all(u[:, [1, 2, 2], [0, 0, 1]] == 0, axis=(-1, -2)) & np.all(
        u[:, [0, 1, 2], [0, 1, 2]] == _batch.EYE[[0, 1, 2], [0, 1, 2]], axis=(-1, -2)
    )
    ok = (
        lower_zero
        & np.all(recon == X, axis=(-1, -2, -3))
        & Q.is_unitary(b)
        & Q.is_unitary(u)
        & u_unip
        & (big | np.all(u == _batch.EYE, axis=(-1, -2, -3)))
    )
    return ok


def bruhat_decompose(g: PMatrix) -> BruhatCell:
    """g = b w u over O/p, with w in {I, J} and u upper unipotent (u = I when w = I)."""
    Q = _batch.Quotient(g.ctx.p, 1)
    X = Q.from_pmatrix(g.reduce(1))[None]
    big, b, u = _bruhat_batch(Q, X)
    if not _check_bruhat(Q, X, big, b, u)[0]:
        raise NotFactorizable("Bruhat factor check failed")
    return BruhatCell("J" if big[0] else "I", Q.to_pmatrix(b[0]), Q.to_pmatrix(u[0]))


@dataclass
class BruhatCensus:
    p: int
    total: int
    small_cell: int
    big_cell: int
    unipotent_count: int
    unique: bool


def bruhat_census(p: int) -> BruhatCensus:
    """Classify every residue unitary matrix into its Bruhat cell."""
    from .group_engine import residue_group_elements

    Q = _batch.Quotient(p, 1)
    X = residue_group_elements(p)
    big, b, u = _bruhat_batch(Q, X)
    if not _check_bruhat(Q, X, big, b, u).all():
        raise NotFactorizable("a residue element failed its Bruhat factorisation")
    pairs = Q.pack_matrices(b[big]) * (Q.M**6) + _pack_upper(Q, u[big])
    unique = len(np.unique(pairs)) == int(big.sum())
    n_small = int((~big).sum())
    n_u = unipotent_radical_count(p)
    unique &= int(big.sum()) == n_small * n_u
    return BruhatCensus(p, len(X), n_small, int(big.sum()), n_u, bool(unique))


def _pack_upper(Q, U):
    code = np.zeros(len(U), dtype=np.int64)
    for i, j in ((0, 1), (0, 2), (1, 2)):
        for t in range(2):
            code = code * Q.M + U[:, i, j, t]
    return code


def unipotent_radical_count(p: int) -> int:
    """|U_J^F|: upper unipotent unitary matrices over O/p, by exhaustive search."""
    Q = _batch.Quotient(p, 1)
    el = Q.all_elements()
    q2 = len(el)
    idx = np.indices((q2, q2, q2)).reshape(3, -1).T
    X = np.broadcast_to(_batch.EYE, (len(idx), 3, 3, 2)).copy()
    X[:, 0, 1] = el[idx[:, 0]]
    X[:, 0, 2] = el[idx[:, 1]]
    X[:, 1, 2] = el[idx[:, 2]]
    return int(Q.is_unitary(X).sum())


def index_b1_bruhat(p: int) -> int:
    """[U(F_p) : B(F_p)] = 1 + |U_J^F| from the two-cell decomposition."""
    return 1 + unipotent_radical_count(p)


@dataclass
class WeylData:
    classes: tuple  # permutations labelling N(T)^F / T^F
    reps: tuple
    torus_order: int
    normalizer_order: int


def weyl_fixed_points(p: int) -> WeylData:
    """Monomial unitary matrices over O/p modulo the diagonal ones."""
    Q = _batch.Quotient(p, 1)
    el = Q.all_elements()
    units = el[Q.is_unit(el)]
    nu = len(units)
    idx = np.indices((nu, nu, nu)).reshape(3, -1).T
    diag = units[idx]  # (nu^3, 3, 2)
    torus_order = 0
    normalizer = 0
    classes = []
    reps = []
    for perm in itertools.permutations(range(3)):
        X = np.zeros((len(diag), 3, 3, 2), dtype=np.int64)
        for i in range(3):
            X[:, i, perm[i]] = diag[:, i]
        ok = Q.is_unitary(X)
        cnt = int(ok.sum())
        normalizer += cnt
        if perm == (0, 1, 2):
            torus_order = cnt
        if cnt:
            classes.append(perm)
            reps.append(Q.to_pmatrix(X[np.argmax(ok)]))
    return WeylData(tuple(classes), tuple(reps), torus_order, normalizer)
