# Subsampling a sparse regression with heavy-tailed noise.
#
# n=10000 rows, p=1000 features, 5 of which matter. We only afford to fit on
# m rows at a time and compare three ways of choosing (and using) them.

import numpy as np

from robust_subsample import AisConfig, SeededRng, StratConfig, fit_uniform_subsample, generate, run_ais, run_stratified
from robust_subsample.bench import SPARSE_HEAVY, mse, sparse_env

rng = SeededRng(2024)
d = generate(sparse_env(SPARSE_HEAVY), rng.spawn(0))
print(d.n, d.p, d.meta["noise"])

# %% plain uniform subsample, least squares (minimum-norm while m < p)
for m in (200, 400, 800):
    ols = fit_uniform_subsample(d, m, rng.spawn(1, m))
    ais = run_ais(d, AisConfig(m=m, T=10), rng.spawn(2, m))
    ss = run_stratified(d, StratConfig(m=m, K=10), rng.spawn(3, m))
    print(f"m={m:4d}  ols={mse(ols.theta, d.truth):.5f}  ais={mse(ais.theta, d.truth):.5f}  ss={mse(ss.theta, d.truth):.5f}")

# %% what AIS learned about the rows
# the final weights favour low-loss rows; mixing keeps every row above 0.05/n
w = ais.info["weights"].w
print("ESS of final weights:", round(ais.ess), "of", d.n)
print("min weight * n:", w.min() * d.n)
print("full-data mean loss per round:", np.round(ais.objective_trace, 3))

# the first five coefficients are the true signal (value 1.0)
print("AIS estimate, first 8 coords:", np.round(ais.theta[:8], 3))
