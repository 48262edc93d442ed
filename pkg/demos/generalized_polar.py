# Generalized polar decomposition walkthrough.
#
# Classical polar splits T into a partial isometry times |T|.  Replacing the
# exponent 1 on |T| with any alpha in (0, 1) still gives a factorization
# T = U |T|^alpha, but U is no longer an isometry: its Gram matrices recover
# the complementary powers |T|^(2(1-alpha)) and |T*|^(2(1-alpha)).
#
# Run with:  python3 demos/generalized_polar.py

import numpy as np

from opshort import (
    absolute_value,
    gpolar,
    gpolar_iterative,
    opnorm,
    polar_decompose,
    psd_power,
)

rng = np.random.default_rng(7)


def gap(lhs, rhs):
    return opnorm(lhs - rhs)


# A rank-deficient rectangular operator keeps the demo honest: the factor U
# is a genuine partial isometry, not a unitary.
t = rng.standard_normal((6, 3)) @ rng.standard_normal((3, 4)) \
    + 1j * rng.standard_normal((6, 2)) @ rng.standard_normal((2, 4))

print("shape of T:", t.shape, " rank:", np.linalg.matrix_rank(t))

# Classical polar first.
form = polar_decompose(t)
print("\nclassical polar  T = U |T|:")
print("  reconstruction gap:", gap(form.U @ form.absT, t))
print("  U*U is the projector onto range(|T|):",
      gap(form.U.conj().T @ form.U, (form.U.conj().T @ form.U) @ (form.U.conj().T @ form.U)) < 1e-12)

# Now the fractional version for a few exponents.
abst_star = absolute_value(t, "left")
for alpha in (0.25, 0.5, 0.75):
    g = gpolar(t, alpha)
    print(f"\nalpha = {alpha}:")
    print("  T - U |T|^a         :", gap(g.U @ psd_power(g.absT, alpha), t))
    print("  U*U - |T|^(2(1-a))  :", gap(g.U.conj().T @ g.U, psd_power(g.absT, 2 * (1 - alpha))))
    print("  UU* - |T*|^(2(1-a)) :", gap(g.U @ g.U.conj().T, psd_power(abst_star, 2 * (1 - alpha))))
    # U intertwines the two absolute values at every power.
    for beta in (0.5, 1.0, 2.0):
        lhs = g.U @ psd_power(g.absT, beta)
        rhs = psd_power(abst_star, beta) @ g.U
        print(f"  U |T|^{beta} - |T*|^{beta} U :", gap(lhs, rhs))

# The iterative route avoids forming |T|^(alpha-1) on a possibly singular
# operator: U_n = T (I/n + T*T)^(-1/2) (T*T)^((1-alpha)/2).  The error decays
# like 1/n, so each tenfold increase in n buys a decimal digit.
alpha = 0.5
u_exact = gpolar(t, alpha).U
print("\niteration error vs closed form (alpha = 0.5):")
print("  n        error        ratio to previous")
prev = None
for n in (10, 100, 1000, 10000):
    err = gap(gpolar_iterative(t, alpha, n), u_exact)
    ratio = "" if prev is None else f"{prev / err:10.2f}"
    print(f"  {n:<7d} {err:.3e}  {ratio}")
    prev = err
