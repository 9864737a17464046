"""
Ill-posed integral equations
============================

Discretized first-kind Fredholm equations have singular values that decay
to roundoff level. This demo looks at the numerical rank of three classic
test problems and solves each one with a single stabilized step.
"""

import numpy as np

from stabgrad import (
    Constant,
    NotPositiveDefinite,
    RelativeResidual,
    condition_number,
    gravity,
    heat,
    numerical_rank,
    shaw,
    stabilized_solve,
    svd,
)

n = 400

#%%
# Rank and conditioning.

problems = [shaw(n), heat(n), gravity(n)]
for p in problems:
    s = svd(p.a)
    print(f"{p.name:8s} rank {numerical_rank(s):4d}   cond {condition_number(s, retained_only=False):9.2e}")

#%%
# gamma = 1e12 typically needs one step. A much larger gamma loses
# accuracy again because (I + gamma A^T A) becomes too ill-conditioned to
# factor accurately; for some problems the Cholesky factorization breaks
# down altogether.

for p in problems:
    for gamma in (1e8, 1e12, 1e16):
        try:
            r = stabilized_solve(p.a, p.b, np.zeros(n), gamma, Constant(1.0), RelativeResidual(1e-5), n,
                                 x_star=p.x_star)
        except NotPositiveDefinite as exc:
            print(f"{p.name:8s} gamma {gamma:6.0e}  factorization failed ({exc})")
            continue
        err = np.linalg.norm(r.final_x - p.x_star) / np.linalg.norm(p.x_star)
        print(f"{p.name:8s} gamma {gamma:6.0e}  iters {r.iterations:4d}  rel. error {err:9.3e}")
