"""
Filter factors of the stabilized iteration
==========================================

For symmetric A, k steps from zero give ``x_k = sum phi_i (u_i . b / sigma_i) v_i``.
The factors phi_i show which singular components the iteration lets
through. Unlike Tikhonov filtering, they approach one as gamma grows.
"""

import numpy as np

from stabgrad import filter_factors

sigma = np.logspace(-8, 0, 9)

#%%
# One step, several gamma values. Small singular values are only admitted
# once gamma * sigma^2 is no longer small.

print("sigma    " + " ".join(f"{s:9.0e}" for s in sigma))
for gamma in (1e2, 1e6, 1e10, 1e14):
    phi = filter_factors(sigma, 1.0, gamma, 1).phi
    print(f"g={gamma:6.0e} " + " ".join(f"{v:9.2e}" for v in phi))

#%%
# More steps at fixed gamma act like a larger gamma.

for k in (1, 5, 50):
    phi = filter_factors(sigma, 1.0, 1e6, k).phi
    print(f"k={k:<6d} " + " ".join(f"{v:9.2e}" for v in phi))
