"""
Volumes of the Gamma_n tower
============================

vol(Gamma_n) = [Gamma_n : A_n] / ([Gamma_0 : B_n] |E1|), with A_n the
integral part of Gamma_n.  Each factor is computed here by two unrelated
routes and compared with the closed form p^(3-3n) / (p^3 + 1).
"""

from u3vol.decompositions import klingen_index_chain
from u3vol.group_engine import SubgroupId, coset_orbit_index, standard_generators
from u3vol.lattice import lattice_orbit
from u3vol.volumes import Strategy, build_index_table, vol_formula, vol_from_oracles

p, n = 3, 2

# [Gamma_n : A_n] from the Klingen ladder and from lattices
ladder = klingen_index_chain(p, n)
orbit = lattice_orbit(n, p)
print("ladder indices", ladder.indices, "lattice orbit", orbit.size)

# [Gamma_0 : B_n] as the orbit of the coset B_n under Gamma_0 mod p^(n+1)
cosets = coset_orbit_index(SubgroupId("B", n), n + 1, standard_generators(p, n + 1, compact=True))
print("[Gamma_0 : B_n] =", cosets.size, cosets.caveats)

for s in Strategy:
    rep = vol_from_oracles(p, n, s)
    print(f"{s.value:<12} vol = {rep.vol}  (formula {vol_formula(p, n)})")

for row in build_index_table([3], 3):
    r = row.report
    print(r.p, r.n, r.idx_gamma_a, r.idx_b, r.idx_a, r.vol, r.method)
