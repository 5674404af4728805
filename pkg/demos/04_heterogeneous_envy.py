# Per-agent envy drawn uniformly from [0, 2 eps_bar]: the classes separate
# into non-overlapping income bands.
from envy_condensation import ClassLabel, ExperimentConfig, heterogeneous_scatter

config = ExperimentConfig(agents=100, options=100, envy_mode="per-agent-uniform")
table = heterogeneous_scatter(config, seed=0, epsilon=4.0)

for label in ClassLabel:
    band = table.class_interval(label)
    if band is None:
        continue
    envy = table.envy[[i for i, lab in enumerate(table.labels) if lab is label]]
    print(f"{label.value:7s} income [{band[0]:.3f}, {band[1]:.3f}]  "
          f"envy [{envy.min():.2f}, {envy.max():.2f}]")
print("mean income %.3f" % table.incomes.mean())
