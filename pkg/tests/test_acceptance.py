"""Acceptance criteria, one test each; every test records a PASS/FAIL line.

All comparisons are exact (integers and reduced fractions), tolerance zero.
The lines are collected in the "acceptance criteria" section of the pytest
terminal summary.
"""

import os
import random
import subprocess
import sys
import time

import pytest

from u3vol.cohomology import ModuleKind, tate_cohomology
from u3vol.decompositions import bruhat_census, iwahori_factor, klingen_index_chain, recursive_coset_check
from u3vol.group_engine import (
    SubgroupId,
    bfs_enumerate,
    coset_orbit_index,
    random_b_element,
    residue_group_count,
    standard_generators,
    verify_norm_one_sequence,
)
from u3vol.lattice import lattice_orbit
from u3vol.padic_matrix import A, B, is_member, mat_prod
from u3vol.ring import SpecialKind, enumerate_special
from u3vol.volumes import Strategy, vol_formula, vol_from_oracles

DESK = [(p, n) for p in (3, 5) for n in (1, 2, 3)]


def test_criterion_01_volume_both_strategies(criterion):
    with criterion(1, "vol(Gamma_n) = p^(3-3n)/(p^3+1), both strategies, p in {3,5}, n <= 3") as v:
        start = time.perf_counter()
        vols = []
        for p, n in DESK:
            for s in Strategy:
                rep = vol_from_oracles(p, n, s)
                assert rep.vol == vol_formula(p, n) == rep.vol.limit_denominator(rep.vol.denominator)
                assert rep.idx_a == rep.idx_b * rep.e1
            vols.append(f"{rep.vol}")
        elapsed = time.perf_counter() - start
        assert elapsed < 120, f"took {elapsed:.0f}s"
        v.detail = f"vols {' '.join(vols)} ({elapsed:.0f}s)"


def test_criterion_02_cardinalities(criterion):
    with criterion(2, "|E0| = p^n, |E1| = p^(n-1)(p+1), |N(O/p)| = p^3 for p in {3,5,7}") as v:
        for p in (3, 5, 7):
            for n in (1, 2, 3):
                e0 = enumerate_special(p, SpecialKind.TRACE_ZERO, n)
                e1 = enumerate_special(p, SpecialKind.NORM_ONE, n)
                assert len(e0.elements) == e0.cardinality == p**n
                assert len(e1.elements) == e1.cardinality == p ** (n - 1) * (p + 1)
            pairs = enumerate_special(p, SpecialKind.HERMITIAN_PAIRS)
            assert len(pairs.elements) == p**3
        v.detail = "18 tower sizes, 3 Heisenberg sizes"


def test_criterion_03_cohomology_vanishes(criterion):
    with criterion(3, "H^1, H^2 additive and H^1 multiplicative are trivial, p in {3,5}, n <= 2") as v:
        count = 0
        for p in (3, 5):
            for n in (1, 2):
                for kind, deg in ((ModuleKind.ADDITIVE, 1), (ModuleKind.ADDITIVE, 2), (ModuleKind.MULTIPLICATIVE, 1)):
                    rep = tate_cohomology(p, kind, n, deg)
                    assert rep.h_order == 1
                    assert rep.cocycle_count == rep.coboundary_count
                    count += 1
        v.detail = f"{count} groups of order 1"


LADDER = {(3, 1): [4], (3, 2): [4, 3], (3, 3): [4, 3, 3], (5, 1): [6], (5, 2): [6, 5]}


def test_criterion_04_ladder(criterion):
    with criterion(4, "ladder indices [4]/[4,3]/[4,3,3] at p=3, [6]/[6,5] at p=5, 200 samples per rung") as v:
        for (p, n), want in LADDER.items():
            ev = klingen_index_chain(p, n, samples=200, seed=0)
            assert ev.indices == want
            assert ev.samples_per_rung >= 200 and ev.failures == 0
        v.detail = "5 chains, zero reduction failures"


def test_criterion_05_lattice_orbit(criterion):
    with criterion(5, "lattice orbit = p^(n-1)(p+1) with every Schreier element in A(n)") as v:
        sizes = []
        checked = 0
        for p, n in DESK:
            orb = lattice_orbit(n, p, check_stabilizer=True)
            assert orb.size == p ** (n - 1) * (p + 1)
            assert orb.schreier_checked > 0
            checked += orb.schreier_checked
            sizes.append(orb.size)
        v.detail = f"sizes {sizes}, {checked} stabilizer elements checked"


def test_criterion_06_residue_census(criterion):
    with criterion(6, "|U(3,F_3)| = 24192 by count and BFS; Bruhat cells 864 + 23328") as v:
        start = time.perf_counter()
        count = residue_group_count.__wrapped__(3)
        bfs = bfs_enumerate(standard_generators(3, 1))
        census = bruhat_census(3)
        elapsed = time.perf_counter() - start
        assert count == bfs == census.total == 24192
        assert (census.small_cell, census.big_cell) == (864, 23328) and census.unique
        assert elapsed < 30, f"took {elapsed:.1f}s"
        v.detail = f"({elapsed:.1f}s)"


def test_criterion_07_coset_indices(criterion):
    with criterion(7, "[Gamma_0:B_n] = p^(3(n-1))(p^3+1) at quotient levels N = n+1 and n+2") as v:
        sizes = {}
        for p, n in DESK:
            want = p ** (3 * (n - 1)) * (p**3 + 1)
            for N in (n + 1, n + 2):
                gens = standard_generators(p, N, compact=True)
                orb = coset_orbit_index(SubgroupId("B", n), N, gens, guard=3 * 10**6)
                assert orb.size == want, (p, n, N, orb.size)
            if p == 3:
                assert want <= 20412
            sizes[(p, n)] = want
        v.detail = " ".join(f"{p},{n}:{s}" for (p, n), s in sizes.items())


def test_criterion_08_norm_one_sequence(criterion):
    with criterion(8, "[B_n:A_n] = |E1| with full surjectivity and >= 500 kernel samples") as v:
        for p, n in DESK:
            ev = verify_norm_one_sequence(p, n, n + 1, sample_budget=500, seed=0)
            assert ev.index == p ** (n - 1) * (p + 1)
            assert ev.surjectivity_witnesses == ev.index
            assert ev.kernel_samples >= 500 and ev.counterexamples == 0 and ev.kernel_hits > 0
        v.detail = "6 sequences, zero counterexamples"


def test_criterion_09_round_trips(criterion):
    with criterion(9, "100 Iwahori round trips per (p, n <= 2); every coset rung is p^3") as v:
        trips = 0
        for p in (3, 5):
            for n in (1, 2):
                rng = random.Random(p * 100 + n)
                N = 2 * n + 6
                for _ in range(100):
                    g = random_b_element(p, n, N, rng)
                    f = iwahori_factor(g, n)
                    assert mat_prod(f.lower, f.torus, f.upper).agrees(g)
                    assert is_member(B(n), f.lower) and is_member(A(n), f.upper)
                    trips += 1
            for k in (1, 2):
                assert recursive_coset_check(p, k) == p**3
        v.detail = f"{trips} round trips, 4 rungs"


def _cli(args, threads):
    env = dict(os.environ)
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        env[var] = str(threads)
    res = subprocess.run([sys.executable, "-m", "u3vol", *args], capture_output=True, env=env, timeout=600)
    assert res.returncode == 0, res.stderr.decode()
    return res.stdout


@pytest.mark.parametrize("args", [["verify"], ["table", "--format", "csv"]])
def test_criterion_10_determinism(criterion, args):
    with criterion(10, f"byte-identical output of `u3vol {' '.join(args)}` across runs and thread counts") as v:
        first = _cli(args, 1)
        second = _cli(args, 4)
        assert first == second
        v.detail = f"{len(first)} bytes"
