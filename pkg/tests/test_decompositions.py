import random

import pytest

from u3vol import _batch
from u3vol.decompositions import (
    bruhat_census,
    bruhat_decompose,
    index_b1_bruhat,
    iwahori_factor,
    klingen_index_chain,
    klingen_reduce,
    random_ladder_element,
    recursive_coset_check,
    unipotent_radical_count,
    weyl_fixed_points,
)
from u3vol.errors import NotFactorizable, NotInSubgroup
from u3vol.group_engine import norm_one_lift, random_b_element, residue_group_elements
from u3vol.lattice import gamma_lattice_orbit
from u3vol.padic_matrix import (
    C,
    PMatrix,
    hermitian_lift,
    is_member,
    lower_rep,
    mat_mul,
    mat_prod,
    sigma,
    t_matrix,
    torus,
    upper,
    weyl_j,
)
from u3vol.ring import SpecialKind, enumerate_special, make_ring


def test_reduce_sigma_branch():
    rng = random.Random(0)
    p, n, m = 3, 2, 20
    for _ in range(10):
        h = random_ladder_element(p, n, n, m, rng)
        g = mat_mul(sigma(n, make_ring(p, m)), h)
        step = klingen_reduce(g, n, 0)
        assert step.u is None
        assert step.rep == sigma(n, make_ring(p, m))
        assert mat_mul(step.rep, step.remainder).agrees(g)


def test_reduce_trivial_rep():
    rng = random.Random(1)
    p, n, m = 3, 2, 20
    for k in range(n):
        g = random_ladder_element(p, n, k + 1, m, rng)
        step = klingen_reduce(g, n, k)
        assert step.u is not None and step.u.reduce(1).is_zero()
        assert step.remainder.agrees(g)


def test_reduce_recovers_u0():
    rng = random.Random(2)
    p, n, m = 5, 2, 20
    ctx = make_ring(p, m)
    for k in range(n):
        for b in range(1, p):
            u0 = ctx(0, b)
            h = random_ladder_element(p, n, k + 1, m, rng)
            g = mat_mul(t_matrix(n - k, u0), h)
            step = klingen_reduce(g, n, k)
            assert step.u.reduce(1) == u0.reduce(1)
            assert is_member(C(n, k + 1), step.remainder)


def test_reduce_rejects_non_members():
    ctx = make_ring(3, 10)
    with pytest.raises(NotInSubgroup):
        klingen_reduce(sigma(1, ctx), 2, 1)


@pytest.mark.parametrize("p,n,want", [(3, 1, [4]), (3, 2, [4, 3]), (3, 3, [4, 3, 3]), (5, 1, [6]), (5, 2, [6, 5])])
def test_ladder_chain(p, n, want):
    ev = klingen_index_chain(p, n, samples=200)
    assert ev.indices == want
    assert ev.failures == 0
    assert ev.structured_checked > 0


@pytest.mark.parametrize("p,n", [(3, 1), (3, 2), (5, 1)])
def test_ladder_matches_lattice_orbit(p, n):
    prod = 1
    for k in klingen_index_chain(p, n, samples=20).indices:
        prod *= k
    assert prod == gamma_lattice_orbit(n, p)


def test_iwahori_trivial():
    ctx = make_ring(3, 6)
    I = PMatrix.identity(ctx)
    t = iwahori_factor(I, 2)
    assert t.lower == I and t.torus == I and t.upper == I
    d = torus(ctx(2, 1), ctx.one)
    t = iwahori_factor(d, 2)
    assert t.lower == I and t.torus == d and t.upper == I


@pytest.mark.parametrize("p", [3, 5])
@pytest.mark.parametrize("n", [1, 2])
def test_iwahori_recovers_factors(p, n):
    m = 2 * n + 4
    ctx = make_ring(p, m)
    pairs = enumerate_special(p, SpecialKind.HERMITIAN_PAIRS).elements
    units = [x for x in make_ring(p, 2).elements() if x.is_unit()]
    e1 = enumerate_special(p, SpecialKind.NORM_ONE, 1).elements
    rng = random.Random(p * 10 + n)
    for _ in range(100):
        lo = lower_rep(n, *rng.choice(pairs), m)
        a = rng.choice(units)
        d = torus(ctx(a.a, a.b), norm_one_lift(rng.choice(e1), m))
        up = upper(*hermitian_lift(*rng.choice(pairs), m))
        g = mat_prod(lo, d, up)
        t = iwahori_factor(g, n)
        assert t.lower.agrees(lo) and t.torus.agrees(d) and t.upper.agrees(up)
        again = iwahori_factor(g, n)
        assert (again.lower, again.torus, again.upper) == (t.lower, t.torus, t.upper)


def test_iwahori_random_round_trip():
    rng = random.Random(4)
    for _ in range(100):
        g = random_b_element(3, 2, 10, rng)
        assert iwahori_factor(g, 2).product().agrees(g)


def test_iwahori_rejects_non_members():
    with pytest.raises(NotFactorizable):
        iwahori_factor(weyl_j(make_ring(3, 4)), 1)


@pytest.mark.parametrize("p,n,want", [(3, 1, 27), (3, 2, 27), (5, 1, 125)])
def test_recursive_coset_check(p, n, want):
    assert recursive_coset_check(p, n) == want


def test_bruhat_examples():
    ctx = make_ring(3, 1)
    I = PMatrix.identity(ctx)
    cell = bruhat_decompose(weyl_j(ctx))
    assert cell.w == "J" and cell.b == I and cell.u == I
    up = upper(*hermitian_lift(ctx(1), ctx(1), 1))
    g = mat_mul(torus(ctx(1, 1), ctx.one), up)
    cell = bruhat_decompose(g)
    assert cell.w == "I" and cell.b == g and cell.u == I


def test_bruhat_reconstructs_random_elements():
    Q = _batch.Quotient(3, 1)
    X = residue_group_elements(3)
    rng = random.Random(0)
    J = weyl_j(make_ring(3, 1))
    for i in rng.sample(range(len(X)), 200):
        g = Q.to_pmatrix(X[i])
        cell = bruhat_decompose(g)
        rebuilt = cell.b if cell.w == "I" else mat_prod(cell.b, J, cell.u)
        assert rebuilt == g


def test_bruhat_census_p3():
    c = bruhat_census(3)
    assert (c.total, c.small_cell, c.big_cell) == (24192, 864, 23328)
    assert c.unipotent_count == 27 and c.unique
    assert c.big_cell == c.small_cell * 27


@pytest.mark.parametrize("p,want", [(3, 28), (5, 126)])
def test_index_b1(p, want):
    assert unipotent_radical_count(p) == p**3
    assert index_b1_bruhat(p) == want == p**3 + 1


def test_weyl_fixed_points():
    w = weyl_fixed_points(3)
    assert len(w.classes) == 2
    assert w.classes == ((0, 1, 2), (2, 1, 0))
    assert w.torus_order == 32 == (3**2 - 1) * (3 + 1)
    assert w.normalizer_order == 64
