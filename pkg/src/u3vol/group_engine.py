"""Finite-quotient group computations for G_N = image of Gamma_0 mod p^N.

* order of the residue unitary group by column backtracking,
* BFS closure of a generator set over the residue field,
* left-coset orbits g H for the shape subgroups B(n) and A(n) of G_N,
* the norm-one exact sequence 1 -> A_n -> B_n -> E^1 -> 1.
"""

from __future__ import annotations

import random
from functools import lru_cache
from dataclasses import dataclass, field

import numpy as np

from . import _batch
from .errors import GuardExceeded, LiftFailed
from .padic_matrix import (
    PMatrix,
    SubgroupId,
    hermitian_lift,
    is_member,
    is_unitary,
    lower_rep,
    mat_prod,
    norm_one_from,
    torus,
    upper,
    weyl_j,
)
from .ring import SpecialKind, enumerate_special, make_ring, sqrt_one_plus

CERTIFIED_CAVEAT = "generators certified only at level 1; completeness modulo p^n for n > 1 is assumed"


@dataclass(frozen=True)
class GeneratorSet:
    p: int
    level: int
    gens: tuple
    names: tuple = ()

    def __post_init__(self):
        for g in self.gens:
            if g.den_exp != 0 or not is_unitary(g.reduce(self.level)):
                raise ValueError(f"generator {g!r} is not an integral unitary matrix")

    def __len__(self):
        return len(self.gens)

    def as_array(self, Q: _batch.Quotient) -> np.ndarray:
        return np.stack([Q.from_pmatrix(g) for g in self.gens])

    def at_level(self, level: int) -> "GeneratorSet":
        if level > self.level:
            raise ValueError("cannot raise the level of a generator set")
        return GeneratorSet(self.p, level, tuple(g.reduce(level) for g in self.gens), self.names)


@lru_cache(maxsize=None)
def generates_residue_group(gens: GeneratorSet) -> bool:
    """Whether the reductions mod p generate all of U(F_p), by order matching."""
    low = gens.at_level(1)
    return bfs_enumerate(low) == residue_group_count(gens.p)


def standard_generators(p: int, N: int, *, compact: bool = False) -> GeneratorSet:
    """Generators of G_N.

    Full set: Upper(alpha, beta) over all lifted pairs of N(O/p), their
    J-conjugates, torus elements from generators of the unit group and of the
    norm-one group, and J.  The compact set keeps only the three upper
    unipotents (1, .), (sqrt c, .), (0, sqrt c), which already generate the
    upper unipotent group mod p^N.
    """
    ctx = make_ring(p, N)
    J = weyl_j(ctx)
    gens, names = [], []
    pairs = enumerate_special(p, SpecialKind.HERMITIAN_PAIRS)
    k1 = pairs.elements[0][0].ctx
    if compact:
        half_sel = [(k1(1), None), (k1(0, 1), None), (k1(0), k1(0, 1))]
        chosen = []
        for al, be in half_sel:
            if be is None:
                be = next(b for a, b in pairs if a == al and b.b == 0)
            chosen.append((al, be))
    else:
        chosen = [pair for pair in pairs if not (pair[0].is_zero() and pair[1].is_zero())]
    for al, be in chosen:
        a_lift, b_lift = hermitian_lift(al, be, N)
        u = upper(a_lift, b_lift)
        gens.append(u)
        names.append(f"Upper({al.a}+{al.b}r,{be.a}+{be.b}r)")
        if not compact:
            gens.append(mat_prod(J, u, J))
            names.append(f"J*Upper({al.a}+{al.b}r,{be.a}+{be.b}r)*J")
    zeta = ctx.residue_generator()
    unit_gens = [zeta]
    if N > 1:
        unit_gens += [ctx(1 + p), ctx(1, p)]
    one = ctx.one
    for a in unit_gens:
        gens.append(torus(a, one))
        names.append(f"Torus({a.a}+{a.b}r,1)")
    for x in unit_gens:
        if x == ctx(1 + p):
            continue  # maps to 1 under x -> x/conj(x)
        b = norm_one_from(x)
        gens.append(torus(one, b))
        names.append(f"Torus(1,{b.a}+{b.b}r)")
    gens.append(J)
    names.append("J")
    return GeneratorSet(p, N, tuple(gens), tuple(names))


# -- residue group ----------------------------------------------------------


def _hermitian(Q: _batch.Quotient, x, Y):
    """h(x, y) = conj(x)^T J y for one vector x against a stack Y."""
    xc = Q.conj(x)
    return (Q.mul(xc[0], Y[..., 2, :]) + Q.mul(xc[1], Y[..., 1, :]) + Q.mul(xc[2], Y[..., 0, :])) % Q.M


def _all_vectors(Q: _batch.Quotient):
    elems = Q.all_elements()
    q2 = len(elems)
    idx = np.indices((q2, q2, q2)).reshape(3, -1).T
    return elems[idx]  # (q^6, 3, 2)


def _column_search(p: int, collect: bool):
    Q = _batch.Quotient(p, 1)
    V = _all_vectors(Q)
    Vc = Q.conj(V)
    self_h = (Q.mul(Vc[:, 0], V[:, 2]) + Q.mul(Vc[:, 1], V[:, 1]) + Q.mul(Vc[:, 2], V[:, 0])) % Q.M
    zero = np.all(self_h == 0, axis=-1)
    unit_norm = (self_h[:, 0] == 1) & (self_h[:, 1] == 0)
    nonzero = np.any(V != 0, axis=(-1, -2))
    first = np.nonzero(zero & nonzero)[0]
    total = 0
    found = []
    for i1 in first:
        v1 = V[i1]
        h1 = _hermitian(Q, v1, V)
        h1_zero = np.all(h1 == 0, axis=-1)
        h1_one = (h1[:, 0] == 1) & (h1[:, 1] == 0)
        S2 = V[h1_zero & unit_norm]
        S3 = V[h1_one & zero]
        if len(S2) == 0 or len(S3) == 0:
            continue
        # h(v2, v3) for every pair
        S2c = Q.conj(S2)
        H = (
            Q.mul(S2c[:, None, 0], S3[None, :, 2])
            + Q.mul(S2c[:, None, 1], S3[None, :, 1])
            + Q.mul(S2c[:, None, 2], S3[None, :, 0])
        ) % Q.M
        ok = np.all(H == 0, axis=-1)
        total += int(ok.sum())
        if collect:
            i2, i3 = np.nonzero(ok)
            block = np.stack([np.broadcast_to(v1, (len(i2), 3, 2)), S2[i2], S3[i3]], axis=2)
            found.append(block)  # columns stacked on axis 2
    if collect:
        return total, (np.concatenate(found) if found else np.zeros((0, 3, 3, 2), dtype=np.int64))
    return total, None


@lru_cache(maxsize=None)
def residue_group_count(p: int) -> int:
    """|U(F_p)| counted column by column from the Hermitian Gram conditions."""
    return _column_search(p, collect=False)[0]


def residue_group_elements(p: int) -> np.ndarray:
    """Every element of U(F_p) as a (count, 3, 3, 2) array, from the same search."""
    return _column_search(p, collect=True)[1]


def bfs_enumerate(gens: GeneratorSet, guard: int = 10**7, chunk: int = 2 * 10**6) -> int:
    """Order of the group generated by ``gens`` over the residue field."""
    if gens.level != 1:
        raise ValueError("full enumeration only over the residue field (level 1)")
    Q = _batch.Quotient(gens.p, 1)
    G = gens.as_array(Q)
    start = _batch.EYE[None].copy()
    seen = np.sort(Q.pack_matrices(start))
    frontier = start
    step = max(1, chunk // len(G))
    while len(frontier):
        nxt = []
        for c0 in range(0, len(frontier), step):
            cand = Q.matmul(G[:, None], frontier[None, c0 : c0 + step]).reshape(-1, 3, 3, 2)
            codes, first = np.unique(Q.pack_matrices(cand), return_index=True)
            new = ~np.isin(codes, seen, assume_unique=True)
            nxt.append(cand[first[new]])
            seen = np.union1d(seen, codes[new])
            if len(seen) > guard:
                raise GuardExceeded(f"group order exceeds guard {guard}")
        frontier = np.concatenate(nxt)
    return int(len(seen))


# -- coset orbits -----------------------------------------------------------


@dataclass
class CosetOrbit:
    subgroup: SubgroupId
    level: int
    p: int
    size: int
    reps_array: np.ndarray = field(repr=False)
    collisions_checked: int = 0
    caveats: tuple = ()

    def rep(self, i: int) -> PMatrix:
        return _batch.Quotient(self.p, self.level).to_pmatrix(self.reps_array[i].astype(np.int64))

    @property
    def reps(self) -> list:
        return [self.rep(i) for i in range(self.size)]


def _coset_keys(Q: _batch.Quotient, X, n: int, with_second: bool):
    """Invariant of g H read from the first (and second) column mod p^n.

    For H = B(n) the coset is the line spanned by g e1 mod p^n; normalising
    the first unit coordinate to 1 gives the key.  For H = A(n) the key also
    carries g e2 reduced modulo that line.
    """
    pn = Q.p**n
    v = X[..., :, 0, :] % pn
    unit = (v[..., 0] % Q.p != 0) | (v[..., 1] % Q.p != 0)
    piv = np.argmax(unit, axis=-1)
    rows = np.arange(len(X))
    Qn = _batch.Quotient(Q.p, n)
    pv = v[rows, piv]
    vn = Qn.mul(v, Qn.inv(pv)[:, None, :])
    digits = [piv]
    cols = [vn]
    if with_second:
        w = X[..., :, 1, :] % pn
        wn = (w - Qn.mul(w[rows, piv][:, None, :], vn)) % pn
        cols.append(wn)
    for arr in cols:
        for i in range(3):
            mask = i != piv
            for t in range(2):
                digits.append(np.where(mask, arr[:, i, t], 0))
    key = np.zeros(len(X), dtype=np.int64)
    for dgt in digits:
        key = key * pn + dgt
    return key


def _relative_in_shape(Q: _batch.Quotient, R, Gcols, tag: str, n: int):
    """Whether r^{-1} g lies in the B(n) / A(n) shape, from g's first two columns.

    The determinant is a unit automatically since r and g are unitary.
    """
    rel = Q.matmul(Q.unitary_inverse(R)[:, 1:], Gcols)  # rows 1..2, columns 0..1
    ok = Q.divisible(rel[:, 0, 0], n) & Q.divisible(rel[:, 1, 0], n) & Q.divisible(rel[:, 1, 1], n)
    if tag == "A":
        centre = rel[:, 0, 1].copy()
        centre[..., 0] -= 1
        ok &= Q.divisible(centre, n)
    return ok


def coset_orbit_index(
    subgroup: SubgroupId,
    level: int,
    gens: GeneratorSet,
    guard: int = 10**5,
    verify: bool = True,
    chunk: int = 20000,
) -> CosetOrbit:
    """Enumerate the left cosets g H of H = shape subgroup in G_N by BFS.

    Each candidate is bucketed by an exact coset invariant; a bucket hit is
    confirmed by testing r^{-1} g in H against the stored representative r.
    """
    if subgroup.tag not in ("B", "A"):
        raise ValueError("coset orbits are implemented for B(n) and A(n)")
    n, N, p = subgroup.n, level, gens.p
    if not 1 <= n <= N - 1:
        raise ValueError("need 1 <= n <= N - 1")
    if gens.level < N:
        raise ValueError("generators must be given at least at the quotient level")
    with_second = subgroup.tag == "A"
    if (p**n) ** (13 if with_second else 7) >= 2**63:
        raise GuardExceeded("coset key does not fit in 64 bits")
    Q = _batch.Quotient(p, N)
    G = np.stack([Q.from_pmatrix(g.reduce(N)) for g in gens.gens])
    store = np.empty((1024, 3, 3, 2), dtype=np.int16 if Q.M < 2**15 else np.int32)
    store[0] = _batch.EYE
    sorted_keys = _coset_keys(Q, _batch.EYE[None], n, with_second)
    sorted_idx = np.array([0], dtype=np.int64)
    size, lo, checked = 1, 0, 0
    while lo < size:
        hi = size
        for c0 in range(lo, hi, chunk):
            frontier = store[c0 : min(c0 + chunk, hi)].astype(np.int64)
            # only the first two columns are needed for keys and coset tests
            cols = Q.matmul(G[:, None], frontier[None, :, :, :2]).reshape(-1, 3, 2, 2)
            ck = _coset_keys(Q, cols, n, with_second)
            order = np.argsort(ck)
            ck_sorted = ck[order]
            pos = np.minimum(np.searchsorted(sorted_keys, ck_sorted), len(sorted_keys) - 1)
            hit_sorted = sorted_keys[pos] == ck_sorted
            hit = np.empty_like(hit_sorted)
            hit[order] = hit_sorted
            if verify and hit.any():
                old = store[sorted_idx[pos[hit_sorted]]].astype(np.int64)
                if not _relative_in_shape(Q, old, cols[order[hit_sorted]], subgroup.tag, n).all():
                    raise AssertionError("coset invariant matched but r^-1 g is not in the subgroup")
                checked += int(hit.sum())
            new_keys, first = np.unique(ck[~hit], return_index=True)
            if not len(new_keys):
                continue
            flat = np.nonzero(~hit)[0][first]
            gi, fi = np.divmod(flat, len(frontier))
            fresh = Q.matmul(G[gi], frontier[fi])
            if size + len(fresh) > guard:
                raise GuardExceeded(f"orbit of {subgroup} exceeds guard {guard}")
            while size + len(fresh) > len(store):
                store = np.concatenate([store, np.empty_like(store)])
            store[size : size + len(fresh)] = fresh
            ins = np.searchsorted(sorted_keys, new_keys)
            sorted_keys = np.insert(sorted_keys, ins, new_keys)
            sorted_idx = np.insert(sorted_idx, ins, np.arange(size, size + len(fresh)))
            size += len(fresh)
        lo = hi
    return CosetOrbit(
        subgroup,
        N,
        p,
        size,
        store[:size].copy(),
        checked,
        _orbit_caveats(subgroup, gens),
    )


def _orbit_caveats(subgroup: SubgroupId, gens: GeneratorSet) -> tuple:
    # The subgroup contains the kernel of reduction mod p^n, so the orbit only
    # sees the image of the generators in G_n.  At n = 1 that image is all of
    # U(F_p) once the order check passes.
    if subgroup.n == 1 and generates_residue_group(gens):
        return ()
    return (CERTIFIED_CAVEAT,)


# -- norm-one exact sequence -------------------------------------------------


def norm_one_lift(eps, N: int):
    """Lift a norm-one residue mod p^n to a norm-one element mod p^N (Hensel)."""
    ctx = make_ring(eps.ctx.p, N)
    e = ctx(eps.a, eps.b)
    if not e.is_unit():
        raise LiftFailed(f"{eps!r} is not a unit")
    r = e.norm()
    if (r.residue - 1) % ctx.p:
        raise LiftFailed(f"{eps!r} does not have norm one mod p")
    root = sqrt_one_plus(r)
    lifted = e * ctx(pow(root.residue, -1, ctx.modulus))
    if not lifted.norm() == 1 or lifted.reduce(eps.ctx.m) != eps:
        raise LiftFailed(f"no norm-one lift of {eps!r}")
    return lifted


def f_map(b: PMatrix, n: int):
    """The (2,2) entry of b reduced mod p^n."""
    return b[1, 1].reduce(n)


def random_b_element(p: int, n: int, N: int, rng: random.Random, force_kernel: bool = False) -> PMatrix:
    """Random element of B_n mod p^N as lower(n) * torus * upper."""
    ctx = make_ring(p, N)
    k1 = make_ring(p, 1)
    rand = lambda: ctx(rng.randrange(ctx.modulus), rng.randrange(ctx.modulus))
    al1 = k1(rng.randrange(p), rng.randrange(p))
    lo = lower_rep(n, al1, k1(0, rng.randrange(p)), N)
    # extra depth in the lower factor
    al2 = rand()
    lo2 = lower_rep(n + 1, al2.reduce(1), k1(0, rng.randrange(p)), N) if n + 1 < N else None
    while True:
        a = rand()
        if a.is_unit():
            break
    while True:
        x = rand()
        if x.is_unit():
            break
    b = norm_one_from(x)
    if force_kernel:
        # push the centre into 1 + p^n by dividing by a norm-one lift of its residue
        b = b / norm_one_lift(b.reduce(n), N)
    au, bu = hermitian_lift(k1(rng.randrange(p), rng.randrange(p)), k1(0, 0), N)
    bu = bu + ctx(0, rng.randrange(ctx.modulus))
    up = upper(au, bu)
    mats = [lo] + ([lo2] if lo2 is not None else []) + [torus(a, b), up]
    return mat_prod(*mats)


@dataclass
class NormOneEvidence:
    p: int
    n: int
    level: int
    index: int
    surjectivity_witnesses: int
    kernel_samples: int
    kernel_hits: int
    counterexamples: int


def verify_norm_one_sequence(p: int, n: int, level: int, sample_budget: int = 500, seed: int = 0) -> NormOneEvidence:
    """Certify [B_n : A_n] = |E^1_{p^n}| via f: B_n -> E^1, centre entry mod p^n."""
    if not 1 <= n <= level - 1:
        raise ValueError("need 1 <= n <= level - 1")
    e1 = enumerate_special(p, SpecialKind.NORM_ONE, n)
    Bn, An = SubgroupId("B", n), SubgroupId("A", n)
    ctx = make_ring(p, level)
    one = ctx.one
    witnesses = 0
    for eps in e1:
        lifted = norm_one_lift(eps, level)
        d = torus(one, lifted)
        if not is_member(Bn, d) or f_map(d, n) != eps:
            raise LiftFailed(f"diag(1, {eps!r}, 1) does not witness surjectivity")
        witnesses += 1
    rng = random.Random(seed)
    bad = hits = 0
    for s in range(sample_budget):
        b = random_b_element(p, n, level, rng, force_kernel=(s % 2 == 0))
        if not is_member(Bn, b):
            bad += 1
            continue
        in_kernel = f_map(b, n) == 1
        hits += in_kernel
        if in_kernel != is_member(An, b, assume_unitary=True):
            bad += 1
    return NormOneEvidence(p, n, level, e1.cardinality, witnesses, sample_budget, hits, bad)
