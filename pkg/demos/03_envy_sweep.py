# Ensemble averages across envy levels: the condensate appears near
# epsilon ~ 2, mean income falls while mean reward rises.
# (N = 200 and ten replicates reproduce the published curves but take
# ~15 minutes; this demo runs a smaller ensemble.)
from envy_condensation import ExperimentConfig, epsilon_sweep

config = ExperimentConfig(agents=60, options=60, epsilon_grid=(0, 1, 2, 3, 4, 6), replicates=3)
records = epsilon_sweep(config, threads=3)

print(" eps  mixed  support  cond.  n_clu   I_bar   R_bar")
for rec in records:
    m = rec.means()
    print(f"{rec.epsilon:4.1f}  {m['frac_mixed']:5.2f}  {m['avg_mixed_support']:7.1f}  "
          f"{m['condensate_fraction']:5.2f}  {m['n_mixed_clusters']:5.1f}  "
          f"{m['mean_income']:6.3f}  {m['mean_reward']:6.3f}")
