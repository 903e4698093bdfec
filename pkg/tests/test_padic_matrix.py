import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from u3vol.decompositions import random_ladder_element
from u3vol.errors import ConstraintViolated, InsufficientPrecision, NotUnitary
from u3vol.group_engine import norm_one_lift, random_b_element
from u3vol.padic_matrix import (
    A,
    B,
    C,
    FULL,
    Gamma,
    PMatrix,
    Principal,
    det_valuation,
    hermitian_lift,
    is_member,
    is_unitary,
    lower,
    lower_rep,
    mat_mul,
    mat_prod,
    sigma,
    special_element,
    t_matrix,
    torus,
    unitary_inverse,
    upper,
    weyl_j,
)
from u3vol.ring import SpecialKind, enumerate_special, make_ring


def ident(ctx):
    return PMatrix.identity(ctx)


def test_identity_product():
    ctx = make_ring(3, 5)
    al, be = enumerate_special(3, SpecialKind.HERMITIAN_PAIRS).elements[5]
    g = upper(*hermitian_lift(al, be, 5))
    assert mat_mul(g, ident(ctx)) == g
    assert mat_mul(ident(ctx), g) == g


def test_sigma_squared():
    ctx = make_ring(3, 6)
    s = sigma(1, ctx)
    assert mat_mul(s, s).agrees(ident(ctx))
    assert mat_mul(s, s).den_exp == 0


def test_t_matrices_add():
    ctx = make_ring(3, 6)
    for u in enumerate_special(3, SpecialKind.TRACE_ZERO, 2):
        for v in enumerate_special(3, SpecialKind.TRACE_ZERO, 2):
            uu, vv = ctx(u.a, u.b), ctx(v.a, v.b)
            prod = mat_mul(t_matrix(1, uu), t_matrix(1, vv))
            assert prod.agrees(t_matrix(1, uu + vv))


def test_product_precision_bookkeeping():
    ctx = make_ring(3, 4)
    s = sigma(1, ctx)
    prod = mat_mul(s, s)
    assert prod.effective_precision == 2
    with pytest.raises(InsufficientPrecision):
        mat_mul(sigma(2, make_ring(3, 3)), sigma(2, make_ring(3, 3)))


def test_unitary_inverse_examples():
    ctx = make_ring(3, 8)
    assert unitary_inverse(ident(ctx)) == ident(ctx)
    J = weyl_j(ctx)
    assert unitary_inverse(J) == J
    s2 = sigma(2, ctx)
    assert unitary_inverse(s2) == s2
    assert mat_mul(s2, s2).agrees(ident(ctx))
    with pytest.raises(NotUnitary):
        unitary_inverse(PMatrix([3, 0, 0, 0, 1, 0, 0, 0, 1], ctx))


def test_is_unitary_examples():
    ctx = make_ring(3, 5)
    assert is_unitary(ident(ctx))
    # diag(p, 1, p^-1) written as p^-1 * diag(p^2, p, 1)
    assert is_unitary(PMatrix([9, 0, 0, 0, 3, 0, 0, 0, 1], ctx, 1))
    assert not is_unitary(PMatrix([3, 0, 0, 0, 1, 0, 0, 0, 1], ctx))


def test_member_examples():
    ctx = make_ring(3, 6)
    assert is_member(Gamma(1), sigma(1, ctx))
    for u in make_ring(3, 1).elements():
        uu = ctx(u.a, u.b)
        g = t_matrix(1, uu, check=False)
        assert is_member(Gamma(1), g) == (uu + uu.conj()).is_zero()


def test_member_needs_precision():
    ctx = make_ring(3, 2)
    g = PMatrix.identity(ctx)
    with pytest.raises(InsufficientPrecision):
        is_member(B(3), g)


def test_special_elements():
    ctx = make_ring(3, 6)
    J = special_element("WeylJ", ctx=ctx)
    assert mat_mul(J, J) == ident(ctx)
    k1 = make_ring(3, 1)
    al = k1(0, 1)
    be = next(b for a, b in enumerate_special(3, SpecialKind.HERMITIAN_PAIRS) if a == al)
    a6, b6 = hermitian_lift(al, be, 6)
    assert (b6 + b6.conj() + a6 * a6.conj()).is_zero()
    assert is_member(B(1), special_element("Upper", a6, b6))
    for eps in enumerate_special(3, SpecialKind.NORM_ONE, 1):
        d = special_element("Torus", ctx.one, norm_one_lift(eps, 6))
        for n in range(1, 6):
            assert is_member(B(n), d)


def test_constraint_violations():
    ctx = make_ring(3, 4)
    with pytest.raises(ConstraintViolated):
        upper(ctx(1), ctx(0))
    with pytest.raises(ConstraintViolated):
        t_matrix(1, ctx(1))
    with pytest.raises(ConstraintViolated):
        torus(ctx(3), ctx.one)
    with pytest.raises(ConstraintViolated):
        torus(ctx.one, ctx(2))
    with pytest.raises(ConstraintViolated):
        lower(1, ctx(1), ctx(0))


def test_lower_constraint_is_exact():
    # beta + conj(beta) + p^n alpha conj(alpha) = 0 is what unitarity needs
    ctx = make_ring(3, 6)
    for al, be in enumerate_special(3, SpecialKind.HERMITIAN_PAIRS):
        for n in (1, 2):
            g = lower_rep(n, al, be, 6)
            assert is_unitary(g) and is_member(B(n), g)


def test_all_special_outputs_unitary():
    ctx = make_ring(5, 6)
    assert is_unitary(sigma(2, ctx))
    assert is_unitary(t_matrix(2, ctx(0, 3)))
    assert is_unitary(weyl_j(ctx))
    assert is_unitary(torus(ctx(2, 1), ctx.one))


def random_elements(p, n, m, count, seed=1):
    rng = random.Random(seed)
    out = []
    for i in range(count):
        if i % 2:
            out.append(random_b_element(p, n, m, rng))
        else:
            out.append(random_ladder_element(p, n, rng.randrange(n + 1), m, rng))
    return out


@pytest.mark.parametrize("n", [1, 2])
def test_subgroup_chain(n):
    for g in random_elements(3, n, 4 * n + 8, 40):
        mem = {k: is_member(C(n, k), g) for k in range(n + 1)}
        for k in range(n):
            if mem[k + 1]:
                assert mem[k]
        assert mem[0] == is_member(Gamma(n), g)
        assert mem[n] == is_member(A(n), g)
        if is_member(A(n), g):
            assert is_member(B(n), g) and is_member(Gamma(n), g)
        if is_member(B(n), g):
            for j in range(n, 0, -1):
                assert is_member(B(j), g)
            assert is_member(Gamma(0), g) and is_member(FULL, g)


def test_det_unit_for_unitary():
    for g in random_elements(5, 2, 12, 20, seed=3):
        if g.is_integral():
            assert det_valuation(g) == 0


def test_precision_monotonicity():
    rng = random.Random(5)
    for _ in range(20):
        g_hi = random_ladder_element(3, 2, rng.randrange(3), 30, rng)
        for m in (14, 20):
            g = g_hi.reduce(m)
            for s in (Gamma(2), C(2, 1), A(2), B(2), B(1), Principal(1)):
                assert is_member(s, g) == is_member(s, g_hi)


def test_canonical_idempotent():
    ctx = make_ring(3, 6)
    g = PMatrix([3, 0, 6, 0, 3, 0, 0, 0, 3], ctx, 1)
    assert g.den_exp == 0 and g.prec == 5
    again = PMatrix(g.raw(), g.ctx, g.den_exp)
    assert again == g


def test_debug_roundtrip():
    ctx = make_ring(5, 4)
    g = mat_prod(sigma(1, ctx), t_matrix(1, ctx(0, 2)))
    assert PMatrix.from_debug(g.to_debug(), 5) == g


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 26), st.integers(0, 26), st.integers(0, 26))
def test_group_law_associative(i, j, k):
    pairs = enumerate_special(3, SpecialKind.HERMITIAN_PAIRS).elements
    ctx = make_ring(3, 8)
    g = upper(*hermitian_lift(*pairs[i], 8))
    h = lower_rep(1, *pairs[j], 8)
    s = sigma(1, ctx)
    t = lower_rep(2, *pairs[k], 8)
    left = mat_mul(mat_mul(g, s), mat_mul(h, t))
    right = mat_mul(g, mat_mul(s, mat_mul(h, t)))
    assert left.agrees(right)
    assert is_unitary(left)
