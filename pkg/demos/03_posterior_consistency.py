"""Consistency of the mass-covering approximate posterior, at desk scale.

The Gaussian-mean model has posterior N((mu0 + sum x)/(n+1), sigma^2/(n+1)).
Fitting a Laplace member by minimizing D_2 from that posterior, the fitted
location tracks the true parameter and the fitted variance shrinks like
1/n: the approximate posterior concentrates where the truth is.
"""

import numpy as np

from renyi_vi import fit, gaussian_mean_model, laplace_family

theta0 = 0.5
model = gaussian_mean_model(0.0, 1.0)

print(f"{'n':>7} {'median |mean - theta0|':>24} {'median fitted var':>18}")
medians = []
for n in (100, 1000, 10_000, 100_000):
    errs, variances = [], []
    for seed in range(15):
        data = model.simulate(theta0, n, seed)
        res = fit((model, data), laplace_family(), "renyi-alpha", alpha=2.0,
                  budget=260, quad_tol=1e-7)
        errs.append(abs(res.params[0] - theta0))
        variances.append(res.density.var)
    medians.append((n, np.median(errs), np.median(variances)))
    print(f"{n:>7} {medians[-1][1]:>24.6f} {medians[-1][2]:>18.3e}")

ns = np.array([m[0] for m in medians], dtype=float)
var_slope = np.polyfit(np.log(ns), np.log([m[2] for m in medians]), 1)[0]
err_slope = np.polyfit(np.log(ns), np.log([m[1] for m in medians]), 1)[0]
print(f"\nvariance log-log slope: {var_slope:.3f}  (parametric rate = -1)")
print(f"error    log-log slope: {err_slope:.3f}  (CLT rate = -0.5)")
print("\nThe full 100-seed version with verdicts:")
print('  renyi-vi experiment cfg.json  with {"experiment": "consistency", ...}')
