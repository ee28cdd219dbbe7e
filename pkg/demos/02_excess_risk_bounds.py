"""Lower bounds for the PCA reconstruction-error regret.

The excess risk of a rank-d projector is a weighted squared loss with
spectral-gap weights, and the matching lower bound is again a capacitated
mass-routing program: pair capacities lam_i lam_j / (n (lam_i - lam_j)),
row caps lam_i - mu and column caps mu - lam_j for a split level mu
between lam_{d+1} and lam_d.  When the sample size dominates an effective-
rank quantity, the caps stop binding and the bound has a closed plug-in
form.
"""

import numpy as np

from subspace_bounds import (
    CovModel,
    Spectrum,
    excess_lower_bound,
    exp_spectrum,
    poly_spectrum,
    relrank_bound,
    relrank_condition,
)

# %% The split level mu is a free parameter; "auto" optimizes it ------------
model = CovModel(Spectrum([4.0, 3.0, 1.0, 0.5], 2), n=60)
lam = model.spectrum.lambdas
print("spectrum (4, 3, 1, 0.5), d = 2, n = 60")
for mu in np.linspace(lam[2], lam[1], 6):
    print(f"  mu = {mu:5.2f}: bound = {excess_lower_bound(model, mu).value:.6f}")
auto = excess_lower_bound(model, "auto")
print(f"  auto mu = {auto.params['mu']:.4f}: bound = {auto.value:.6f}")
print()

# %% Plug-in regime: the effective-rank condition ----------------------------
holds, lhs = relrank_condition(model)
print(f"effective-rank condition: lhs = {lhs:.2f} vs n/2 = {model.n / 2:.1f} -> holds = {holds}")
if holds:
    print(f"  plug-in bound = {relrank_bound(model):.6f} (dominated by the optimized bound)")
print()

# %% Exponentially decaying eigenvalues --------------------------------------
# The plug-in bound tracks d * exp(-d) / n across d.
n = 10**6
print("exponential decay exp(-j), p = 40, n = 1e6:")
print("   d   bound          bound / (d e^-d / n)")
for d in range(3, 13):
    m = CovModel(exp_spectrum(1.0, 40, d), n)
    value = relrank_bound(m)
    print(f"  {d:2d}   {value:.4e}   {value / (d * np.exp(-d) / n):.4f}")
print()

# %% Polynomially decaying eigenvalues ---------------------------------------
# For lam_j = j^-2 the plug-in mass stays essentially constant in d: the
# double sum of lam_i lam_j/(lam_i - lam_j) telescopes to 1/(j^2 - i^2)
# terms whose total approaches pi^2/8 as d grows.
print("polynomial decay j^-2, p = 40, n = 1e6:")
print("   d   bound          bound * n")
for d in range(3, 13):
    m = CovModel(poly_spectrum(1.0, 40, d), n)
    value = relrank_bound(m)
    print(f"  {d:2d}   {value:.4e}   {value * n:.5f}")
