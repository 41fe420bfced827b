# Error vs subsample size on a log-log scale.
#
# Mean estimation in p=50 with Student-t(4) noise. If the error behaves like
# C / sqrt(m), the fitted slope of log(median error) on log(m) is about -0.5.

import numpy as np

from robust_subsample import EnvironmentSpec, Noise
from robust_subsample.bench import ExperimentSpec, run_experiment

env = EnvironmentSpec(20000, 50, 50, noise=Noise("student_t", 1.0, 4.0), task="mean")
spec = ExperimentSpec(env, [{"name": "ais"}, {"name": "uniform-mean"}], [125, 250, 500, 1000, 2000], replicates=10, seed=3)
report = run_experiment(spec)

for row in report["summary"]:
    print(f"{row['method']:>13s}  m={row['m']:5d}  median error={row['error_median']:.4f}")

for method, fit in report["rate_fits"].items():
    print(f"{method}: slope={fit['slope']:.3f}  r2={fit['r2']:.4f}")

# a cheap sanity check on the constant: at m=1000 the error is roughly sqrt(p * var / m)
print("sqrt(p * var / 1000) =", np.sqrt(50 * 2.0 / 1000))
