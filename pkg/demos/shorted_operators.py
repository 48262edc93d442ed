# Shorting an operator to a pair of subspaces.
#
# Pick orthogonal projectors P (domain) and Q (codomain).  Relative to the
# splittings they induce, T becomes a 2x2 block matrix.  When the corner
# systems T22 X = T21 and T22* Y = T12* are solvable, the shorted operator
# replaces T11 by T11 - T12 T22^+ T21 and zeroes everything else: it is the
# part of T that genuinely maps the chosen subspace into the chosen subspace.
#
# Run with:  python3 demos/shorted_operators.py

import numpy as np

from opshort import (
    is_complementable,
    opnorm,
    partition,
    pseudo_inverse,
    shorted,
    verify_range_kernel,
)

rng = np.random.default_rng(23)

# A PSD operator is always complementable, so start there.
g = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
t = g @ g.conj().T

# Project onto the span of the first three coordinates.
p = np.diag([1.0, 1.0, 1.0, 0.0, 0.0]).astype(complex)

block = partition(t, p, p)
print("block shapes:", block.T11.shape, block.T12.shape,
      block.T21.shape, block.T22.shape)

comp = is_complementable(block)
print("complementable:", comp.complementable, " margins:", comp.margins)

res = shorted(block)
print("mode:", res.mode)
print("core (compressed to the subspace):")
print(np.round(res.core.real, 4))

# For PSD inputs the core must agree with the generalized Schur complement.
schur = block.T11 - block.T12 @ pseudo_inverse(block.T22) @ block.T21
print("gap to T11 - T12 T22^+ T21:", opnorm(res.core - schur))

# The witnesses are the reduced solutions of the four corner systems; the
# two cross products they form agree, which is what makes the construction
# independent of the route taken.
w = res.witnesses
print("cross-product gap:", opnorm(w.F.conj().T @ w.E - w.Ftilde.conj().T @ w.Etilde))

# Range and kernel bookkeeping: the shorted operator's range is the part of
# range(T) lying inside the codomain subspace, and its kernel gains exactly
# the complement of the domain subspace.
report = verify_range_kernel(block, res)
print("rank of range(T) inside codomain subspace:", report.rank_range_intersection)
print("rank of the shorted operator          :", report.rank_shorted)
print("range equality  :", report.range_equal)
print("kernel equality :", report.kernel_equal)

# Shorting and adjoints commute after swapping the two projectors.
dual = shorted(partition(t.conj().T, p, p))
print("duality gap:", opnorm(dual.shorted - res.shorted.conj().T))
