# Lowest accepted ultimatum offer as a function of envy, and the envy level
# implied by the typical 40% threshold seen in experiments.
from envy_condensation import acceptance_threshold, calibrate_epsilon, threshold_curve

for sol in threshold_curve([0, 0.5, 1, 1.75, 2.5, 5]):
    print(f"eps={sol.epsilon:4.2f}  lowest accepted offer {sol.threshold:.4f}")

print("threshold at eps=1.75: %.4f" % acceptance_threshold(1.75).threshold)
print("eps for a 0.4 threshold: %.4f" % calibrate_epsilon(0.4))
