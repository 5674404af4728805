# Without envy every agent ends on a pure strategy, one or two per option.
import numpy as np
from envy_condensation import (ClassLabel, ModelParams, build_option_grid, classify,
                               evaluate, evolve, init_population, nash_check)

M = N = 100
profile = build_option_grid(N, theta=0.5)
params = ModelParams(M, envy=0.0, seed=1)

p = evolve(init_population(M, N, params.seed), profile, params).final_population
state = evaluate(p, profile, params)
report = classify(p, state)

for label in ClassLabel:
    n_s, n_p = report.type_counts[label]
    print(f"{label.value:7s} {n_s}/{n_p}")

occ = np.bincount(p.argmax(axis=1), minlength=N)
print("max agents per option:", occ.max())
print("mean income %.4f" % state.mean_income)
print("Nash check passed:", nash_check(p, profile, params, 1e-6).passed)
