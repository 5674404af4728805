"""Replicator dynamics of competition games with envy.

Agents choose mixed strategies over options of increasing bare utility,
compete for them, and compare their income to the population mean.  Above
a critical envy level a macroscopic group of agents condenses onto one
shared mixed strategy, separated from the pure-strategy agents by income
gaps.
"""

from .analysis import (
    ClassLabel,
    EquilibriumReport,
    IncomeGapProfile,
    NashReport,
    StrategyCluster,
    classify,
    income_gap_profile,
    nash_check,
    support,
)
from .dynamics import (
    DegenerateStateError,
    DynamicsReport,
    StabilityReport,
    evolve,
    init_population,
    perturb_and_retest,
    step,
)
from .oracles import (
    EnvyComparison,
    FixedPointCheck,
    brute_force_pure_nash,
    check_fixed_point,
    compare_envy_formulations,
    pairwise_envy,
)
from .sweeps import (
    ExperimentConfig,
    ExperimentError,
    RunResult,
    ScatterTable,
    SweepRecord,
    epsilon_sweep,
    heterogeneous_scatter,
    run_experiment,
)
from .ultimatum import (
    UltimatumSolution,
    acceptance_threshold,
    calibrate_epsilon,
    proposer_offer,
    responder_reward,
    threshold_curve,
)
from .utility import (
    EvaluatedState,
    ModelParams,
    UtilityProfile,
    Variant,
    build_option_grid,
    evaluate,
    income_matrix,
    occupations,
    participation_ratio,
)

__version__ = "0.1.0"
