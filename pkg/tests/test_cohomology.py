import pytest

from u3vol.cohomology import ModuleKind, cocycle_bijections, hilbert90_image, tate_cohomology
from u3vol.errors import ModuleTooLarge
from u3vol.ring import SpecialKind, enumerate_special, make_ring


def naive_h1(p, n, kind):
    """Kernel of the norm map over the image of s - 1, with plain loops."""
    ctx = make_ring(p, n)
    els = list(ctx.elements())
    if kind == "Additive":
        ker = [x for x in els if (x + x.conj()).is_zero()]
        img = {x - x.conj() for x in els}
    else:
        els = [x for x in els if x.is_unit()]
        ker = [x for x in els if x * x.conj() == 1]
        img = {x.conj() / x for x in els}
    return len(ker), len(img)


@pytest.mark.parametrize("p,n", [(3, 1), (3, 2), (5, 1)])
@pytest.mark.parametrize("kind", ["Additive", "Multiplicative"])
def test_degree_one_matches_loops(p, n, kind):
    r = tate_cohomology(p, kind, n, 1)
    assert (r.cocycle_count, r.coboundary_count) == naive_h1(p, n, kind)


def test_examples():
    r = tate_cohomology(3, ModuleKind.MULTIPLICATIVE, 1, 1)
    assert (r.cocycle_count, r.coboundary_count, r.h_order) == (4, 4, 1)
    assert tate_cohomology(3, ModuleKind.ADDITIVE, 2, 2).h_order == 1
    r = tate_cohomology(5, "Additive", 1, 1)
    assert r.cocycle_count == 5 and r.h_order == 1


@pytest.mark.parametrize("p", [3, 5, 7])
@pytest.mark.parametrize("n", [1, 2, 3])
def test_vanishing_everywhere(p, n):
    for kind in ModuleKind:
        for degree in (1, 2):
            r = tate_cohomology(p, kind, n, degree)
            assert r.cocycle_count % r.coboundary_count == 0
            assert r.h_order == 1


@pytest.mark.parametrize("p,n", [(3, 1), (3, 3), (5, 2), (7, 2)])
def test_counting_identities(p, n):
    units = tate_cohomology(p, "Multiplicative", n, 1)
    total_units = p ** (2 * n) - p ** (2 * n - 2)
    fixed_units = p**n - p ** (n - 1)
    assert units.cocycle_count == total_units // fixed_units
    add = tate_cohomology(p, "Additive", n, 1)
    assert enumerate_special(p, SpecialKind.TRACE_ZERO, n).cardinality == p ** (2 * n) // p**n * add.h_order


def test_size_guard():
    with pytest.raises(ModuleTooLarge):
        tate_cohomology(7, "Additive", 5, 1)


def test_bad_degree():
    with pytest.raises(ValueError):
        tate_cohomology(3, "Additive", 1, 3)


@pytest.mark.parametrize("p,n,nm,na", [(3, 1, 4, 3), (3, 2, 12, 9), (5, 1, 6, 5)])
def test_cocycle_bijections(p, n, nm, na):
    b = cocycle_bijections(p, n)
    assert len(b.multiplicative) == nm and len(b.additive) == na
    assert b.multiplicative_ok and b.additive_ok


def test_hilbert90_surjects():
    assert hilbert90_image(5, 1) == set(enumerate_special(5, SpecialKind.NORM_ONE, 1))
    assert hilbert90_image(3, 2) == set(enumerate_special(3, SpecialKind.NORM_ONE, 2))
