"""How small can the subspace estimation error be?

For n Gaussian samples with covariance U diag(lam) U^T, no estimator of
the rank-d spectral projector can beat a certain squared Hilbert-Schmidt
error on average over a uniformly random basis U.  That floor is the
value of a small linear program: route as much mass as possible through
the leading-by-trailing eigenvalue pairs, where each pair (i, j) carries
at most 2 lam_i lam_j / (n (lam_i - lam_j)^2) (the inverse Fisher
information of the direction mixing them) and every row and column of
mass is capped by a mixing level delta.

This script builds that program for a few spectra and inspects the
solutions.
"""

import numpy as np

from subspace_bounds import (
    CovModel,
    Spectrum,
    canonical_bound,
    hs_bound_d1,
    hs_lower_bound,
    optimize_delta,
    spike_spectrum,
)

# %% A two-point spectrum, solvable by hand ---------------------------------
model = CovModel(spike_spectrum(2.0, 1.0, 1, 2), n=8)
result = hs_lower_bound(model, delta=1.0)
print("two-point spectrum (2, 1), n = 8")
print(f"  bound value          : {result.value:.6f}   (exact: 1/6)")
print(f"  optimal mass matrix  : {result.x.ravel()}")
print(f"  closed form (d = 1)  : {hs_bound_d1(model, 1.0):.6f}")
print()

# %% The optimum, the canonical feasible point, and the closed form ---------
lam = np.array([5.0, 4.0, 2.5, 1.2, 0.7, 0.3])
model = CovModel(Spectrum(lam, 2), n=40)
result = hs_lower_bound(model, delta=1.0)
print("six-point spectrum, d = 2, n = 40")
print(f"  optimized bound      : {result.value:.6f}")
print(f"  canonical mass value : {canonical_bound(model):.6f}  (never exceeds the optimum)")
print(f"  tight rows           : {result.tight_rows}")
print(f"  tight cols           : {result.tight_cols}")
print(f"  saturated edge caps  : {int(np.sum(result.tight_edges))} of {result.x.size}")
print()

# %% The mixing level delta trades prefactor against mass -------------------
print("delta sweep (same model):")
for delta in (0.25, 0.5, 1.0, 2.0, 4.0):
    r = hs_lower_bound(model, delta)
    print(
        f"  delta = {delta:4.2f}: value = {r.value:.6f}, "
        f"routed mass = {r.flow_value:.6f}, prefactor = {r.prefactor:.4f}"
    )
best_delta, best = optimize_delta(model)
print(f"  best delta ~= {best_delta:.4f} gives {best.value:.6f}")
print()

# %% Flat spectra: pure combinatorics ---------------------------------------
# With all eigenvalues equal the pair capacities are infinite and the
# program degenerates to min(d, p - d) times the row/column cap.
flat = CovModel(spike_spectrum(1.0, 1.0, 3, 8), n=10)
r = hs_lower_bound(flat, delta=1.0)
print("flat spectrum, p = 8, d = 3:")
print(f"  bound = {r.value:.6f}  (= delta/(1+2*delta) * min(d, p-d) = 1.0)")
