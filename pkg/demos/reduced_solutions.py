# Range inclusion and reduced solutions of A X = C.
#
# The equation A X = C over matrices is solvable exactly when range(C) is
# contained in range(A).  The reduced solution is the unique solution whose
# columns live in range(A*); every other solution differs by a kernel piece
# and is therefore longer.
#
# Run with:  python3 demos/reduced_solutions.py

import numpy as np

from opshort import NotSolvable, opnorm, range_included, reduced_solution

rng = np.random.default_rng(11)

# Build a solvable system by construction: C = A X0 for a random X0.
a = rng.standard_normal((6, 4)) + 1j * rng.standard_normal((6, 4))
x0 = rng.standard_normal((4, 2)) + 1j * rng.standard_normal((4, 2))
c = a @ x0

inc = range_included(a, c)
print("range(C) inside range(A):", inc.included, " margin:", inc.margin)

sol = reduced_solution(a, c)
print("residual ||A D - C||   :", opnorm(a @ sol.D - c))
print("columns in range(A*)   :", sol.range_ok)
print("||D|| vs ||X0||        :", opnorm(sol.D), "<=", opnorm(x0))

# The margin is the relative size of the part of C sticking out of range(A).
# Perturbing C off the range moves the margin continuously; the solver flags
# a band around the tolerance as borderline instead of pretending the
# verdict is sharp.
print("\nmargin as the perturbation grows:")
p_out = np.eye(6) - a @ np.linalg.pinv(a)          # projector onto range(A)^perp
noise = p_out @ (rng.standard_normal((6, 2)) + 1j * rng.standard_normal((6, 2)))
noise /= opnorm(noise)
for eps in (1e-12, 1e-9, 1e-6, 1e-2):
    probe = c + eps * noise
    inc = range_included(a, probe)
    print(f"  eps = {eps:.0e}: included = {inc.included!s:5}  "
          f"borderline = {inc.borderline!s:5}  margin = {inc.margin:.2e}")

# When the inclusion genuinely fails, the solver raises but keeps the
# least-squares candidate and its residual on the exception.
try:
    reduced_solution(a, c + 0.5 * noise)
except NotSolvable as exc:
    print("\nnot solvable: margin =", f"{exc.margin:.3f}",
          " best residual =", f"{exc.residual:.3f}")
    print("least-squares candidate shape:", exc.candidate.shape)
