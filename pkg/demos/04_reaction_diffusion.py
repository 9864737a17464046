"""
Reaction-diffusion on a refined grid
====================================

The five-point discretization of ``-Laplace(u) + kappa^2 u = f`` on the
square [-1, 1]^2 is symmetric positive definite. The stabilized step
factors the shifted normal matrix with a fast sine transform, so
refinement stays cheap.
"""

import numpy as np

from stabgrad import Constant, RelativeError, reaction_diffusion_2d, stabilized_solve

#%%
# Stop once the relative error drops below the mesh size. The remaining
# error is discretization error, which shrinks by about four per level.
# Level 3 is skipped: with h = 1/4 the sine part of the solution vanishes at
# every node and the stencil reproduces the quadratic part exactly.

prev = None
for level in range(4, 9):
    p = reaction_diffusion_2d(level)
    r = stabilized_solve(p.a, p.b, np.zeros(p.n), 1e15, Constant(1.0),
                         RelativeError(p.metadata["mesh_size"]), 100, x_star=p.x_star)
    err = float(np.max(np.abs(r.final_x - p.x_star)))
    ratio = "" if prev is None else f"  ratio {prev / err:5.2f}"
    print(f"level {level}  unknowns {p.n:6d}  iters {r.iterations}  max error {err:9.3e}{ratio}")
    prev = err
