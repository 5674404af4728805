# The same experiment with divide-the-cake payoffs and with envy measured
# on rewards instead of incomes.
from envy_condensation import ExperimentConfig, run_experiment

for variant in ("income-envy", "divide-the-cake", "reward-envy"):
    config = ExperimentConfig(agents=60, options=60, variant=variant)
    run = run_experiment(config, epsilon=4.0, seed=0)
    rep = run.report
    print(f"{variant:15s} mixed {rep.type_counts['mixed'][1]:3d} agents in "
          f"{len(rep.mixed_clusters)} strategies, condensate {rep.condensate_fraction:.2f}, "
          f"I_bar {run.state.mean_income:.3f}")
