# Cross-checks: pairwise envy agrees with the mean-field form to second
# order, and replicator fixed points of tiny games are pure Nash equilibria.
import numpy as np
from envy_condensation import (ModelParams, brute_force_pure_nash, build_option_grid,
                               check_fixed_point, compare_envy_formulations)

rng = np.random.default_rng(0)
shape = rng.uniform(-1, 1, 50)
for delta in (1e-2, 5e-3, 2.5e-3):
    cmp = compare_envy_formulations(1.5 * (1 + delta * shape), epsilon=2.0)
    print(f"delta={delta:.4f}  max |pairwise - mean field| = {cmp.max_abs_difference:.3e}")

for M, N in [(2, 2), (3, 2), (3, 3)]:
    profile = build_option_grid(N, 0.5)
    params = ModelParams(M)
    eq = brute_force_pure_nash(profile, params)
    hits = sum(check_fixed_point(profile, params, s, eq).is_nash for s in range(10))
    print(f"M={M} N={N}: {len(eq)} pure equilibria, {hits}/10 runs land on one")
