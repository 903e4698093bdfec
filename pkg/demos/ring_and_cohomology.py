"""
The Galois ring O/p^m and its Galois cohomology
===============================================

O/p^m is modelled as (Z/p^m)[sqrt(c)] with c the smallest quadratic
non-residue mod p.  Conjugation flips the sign of sqrt(c).
"""

from u3vol.cohomology import ModuleKind, hilbert90_image, tate_cohomology
from u3vol.ring import SpecialKind, enumerate_special, make_ring

ctx = make_ring(5, 2)
x = ctx(3, 7)
print(ctx, "element", x, "conjugate", x.conj())
print("trace", x.trace(), "norm", x.norm())

# trace-zero and norm-one elements grow like p^n and p^(n-1)(p+1)
for n in (1, 2, 3):
    e0 = enumerate_special(5, SpecialKind.TRACE_ZERO, n)
    e1 = enumerate_special(5, SpecialKind.NORM_ONE, n)
    print(f"n={n}: |E0|={e0.cardinality:4d}  |E1|={e1.cardinality:4d}")

# pairs (alpha, beta) with beta + conj(beta) + alpha conj(alpha) = 0 over F_p
print("Heisenberg pairs over F_5:", enumerate_special(5, SpecialKind.HERMITIAN_PAIRS).cardinality)

# The order-two Galois group has no cohomology on these modules
for kind, degree in [(ModuleKind.ADDITIVE, 1), (ModuleKind.ADDITIVE, 2), (ModuleKind.MULTIPLICATIVE, 1)]:
    rep = tate_cohomology(3, kind, 2, degree)
    print(f"H^{degree} {kind.value:<14} cocycles={rep.cocycle_count:3d} coboundaries={rep.coboundary_count:3d} order={rep.h_order}")

# every norm-one element is conj(y)/y for some unit y
image = hilbert90_image(3, 2)
print("conj(y)/y reaches", len(image), "of", enumerate_special(3, SpecialKind.NORM_ONE, 2).cardinality, "norm-one elements")
