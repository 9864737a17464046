"""
Stabilizing a divergent gradient iteration
==========================================

The plain iteration ``x <- x - (A x - b)`` diverges on the 4x4 matrix A1
because I - A1 has spectral radius above 11. Adding the ``gamma A^T A``
term turns it into a contraction once gamma is large enough.
"""

import numpy as np

from stabgrad import (
    Constant,
    RelativeResidual,
    convergence_factor,
    gradient_iteration_matrix,
    gradient_solve,
    matrix_a1,
    spectral_radius_estimate,
    stabilized_solve,
)

p = matrix_a1()
x0 = np.zeros(p.n)

#%%
# The unmodified iteration blows up within a few dozen steps.

g = gradient_iteration_matrix(p.a, 1.0)
print("rho(I - A1) =", round(spectral_radius_estimate(lambda x: g @ x, p.n), 4))

r = gradient_solve(p.a, p.b, x0, Constant(1.0), RelativeResidual(1e-5), 200)
print("plain iteration:", r.stop_reason.name, "after", r.iterations, "steps")

#%%
# Sweep gamma. The contraction factor drops below one, and the iteration
# count falls with it.

print(f"{'gamma':>8} {'factor':>10} {'iters':>6} {'rel. error':>11}")
for gamma in 10.0 ** np.arange(5, 11):
    r = stabilized_solve(p.a, p.b, x0, gamma, Constant(1.0), RelativeResidual(1e-5), 100,
                         x_star=p.x_star)
    err = np.linalg.norm(r.final_x - p.x_star) / np.linalg.norm(p.x_star)
    print(f"{gamma:8.0e} {convergence_factor(p.a, 1.0, gamma):10.2e} {r.iterations:6d} {err:11.3e}")
