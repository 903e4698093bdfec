"""
The finite unitary group U(3) over F_p
======================================

Counted three ways: column by column, by breadth-first search from
generators, and cell by cell in the Bruhat decomposition.
"""

import random

from u3vol import _batch
from u3vol.decompositions import bruhat_census, bruhat_decompose, weyl_fixed_points
from u3vol.group_engine import bfs_enumerate, residue_group_count, residue_group_elements, standard_generators

p = 3
print("column search:", residue_group_count(p))
print("BFS from generators:", bfs_enumerate(standard_generators(p, 1)))

w = weyl_fixed_points(p)
print("Frobenius-fixed Weyl elements:", w.classes, "torus", w.torus_order, "normaliser", w.normalizer_order)

census = bruhat_census(p)
print(f"small cell {census.small_cell} + big cell {census.big_cell} = {census.total}")

# one element from the big cell, written as b J u
X = residue_group_elements(p)
g = _batch.Quotient(p, 1).to_pmatrix(X[random.Random(7).randrange(len(X))])
cell = bruhat_decompose(g)
print("cell", cell.w)
print(cell.b.to_debug())
