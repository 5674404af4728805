"""Acceptance criteria, each checked at its stated tolerance.

Every check records a one-line PASS/FAIL verdict that pytest prints in an
"acceptance criteria" section at the end of the run.  The full module takes
about 25 minutes on one core; the large ensembles are shared through
``runs.py``.
"""

from dataclasses import replace

import numpy as np
import pytest

from envy_condensation import (
    ClassLabel,
    ModelParams,
    acceptance_threshold,
    brute_force_pure_nash,
    build_option_grid,
    calibrate_epsilon,
    check_fixed_point,
    compare_envy_formulations,
    evaluate,
    evolve,
    income_gap_profile,
    init_population,
    nash_check,
)
from envy_condensation.cli import main as cli_main

from runs import (
    LONG_ITERATIONS,
    N100,
    ensemble100,
    ensemble200,
    hetero100,
    hetero400,
    record,
)

P2, MX = ClassLabel.PURE2, ClassLabel.MIXED


def ens_mean(runs, name):
    vals = [r.observables()[name] for r in runs]
    return float(np.nanmean(vals)), float(np.nanstd(vals, ddof=1))


def test_criterion_01_pure_structure_without_envy():
    runs = ensemble100(0.0)
    profile = N100.profile()
    pure = all(r.report.type_counts[MX] == (0, 0) for r, _ in runs)
    max_occ = max(int(np.bincount(r.dynamics.final_population.argmax(axis=1)).max()) for r, _ in runs)
    nash = [nash_check(r.dynamics.final_population, profile, r.params, 1e-6) for r, _ in runs]
    worst = max(n.worst_improvement for n in nash)
    slowest = max(t for _, t in runs)
    ok = pure and max_occ <= 2 and all(n.passed for n in nash) and slowest <= 60
    record(
        "1 eps=0 structure",
        ok,
        f"all pure={pure}, max agents/option={max_occ}, worst Nash gain={worst:.2e}, slowest run={slowest:.1f}s",
    )
    assert ok


def test_criterion_02_condensation_transition():
    lo, lo_sd = ens_mean(ensemble200(1.5), "avg_mixed_support")
    hi, hi_sd = ens_mean(ensemble200(2.0), "avg_mixed_support")
    ok = 1.5 <= lo <= 6 and 12 <= hi <= 40 and hi / lo >= 4
    record(
        "2 condensation transition",
        ok,
        f"avg mixed support {lo:.2f}+-{lo_sd:.2f} (eps=1.5), {hi:.2f}+-{hi_sd:.2f} (eps=2.0), ratio {hi / lo:.1f}",
    )
    assert ok


def _condensed(run):
    big = run.report.largest_mixed_cluster()
    if big is None:
        return False, None
    return big.size >= 25 and len(big.support) >= 40 and big.max_pairwise_distance < 1e-3, big


def test_criterion_03_condensed_state():
    runs = ensemble100(4.0, LONG_ITERATIONS)
    rows = []
    hits = 0
    for run, _ in runs:
        ok, big = _condensed(run)
        hits += ok
        rows.append(f"{big.size}/{len(big.support)}/{big.max_pairwise_distance:.1e}" if big else "none")
    ok = hits >= 7
    record(
        "3 condensed state",
        ok,
        f"{hits}/10 seeds condensed at {LONG_ITERATIONS:.0e} steps (size/support/L1: {', '.join(rows)})",
    )
    assert ok


def test_criterion_04_mixed_cluster_count():
    c4, sd4 = ens_mean(ensemble200(4.0), "n_mixed_clusters")
    c6, sd6 = ens_mean(ensemble200(6.0), "n_mixed_clusters")
    ok = 1.5 <= c4 <= 4.5 and 1.0 <= c6 <= 2.0
    record("4 mixed-cluster count", ok, f"{c4:.2f}+-{sd4:.2f} (eps=4), {c6:.2f}+-{sd6:.2f} (eps=6)")
    assert ok


def test_criterion_05_social_dilemma():
    r0, _ = ens_mean(ensemble200(0.0), "mean_reward")
    r7, _ = ens_mean(ensemble200(7.0), "mean_reward")
    grid = (2.0, 3.0, 4.0, 5.0, 6.0)
    inc = [ens_mean(ensemble200(e), "mean_income") for e in grid]
    steps_down = [b[0] < a[0] for a, b in zip(inc, inc[1:])]
    ok = abs(r0 - 1.86) <= 0.10 and abs(r7 - 2.11) <= 0.15 and all(steps_down)
    curve = ", ".join(f"{e:g}:{m:.3f}+-{s:.3f}" for e, (m, s) in zip(grid, inc))
    record("5 social dilemma", ok, f"R_bar {r0:.3f} (eps=0), {r7:.3f} (eps=7); I_bar {curve}")
    assert ok


def test_criterion_06_heterogeneous_envy():
    i1 = float(np.mean([r.state.mean_income for r in hetero100(1.0)]))
    i4 = float(np.mean([r.state.mean_income for r in hetero100(4.0)]))
    big = hetero400(4.0)
    labels = big.report.labels
    inc = np.asarray(big.state.agent_incomes)
    bands = {}
    for lab in ClassLabel:
        sel = inc[[i for i, x in enumerate(labels) if x is lab]]
        if sel.size:
            bands[lab] = (float(sel.min()), float(sel.max()))
    low = bands.get(MX)
    width = (low[1] - low[0]) / np.mean(low) if low else float("nan")
    ordered = sorted(bands.values())
    disjoint = len(bands) == 3 and all(a[1] < b[0] for a, b in zip(ordered, ordered[1:]))
    ok = i4 < i1 - 0.1 and low is not None and 1.0 <= low[0] and low[1] <= 1.15 and width <= 0.03 and disjoint
    text = ", ".join(f"{k.value} [{a:.3f}, {b:.3f}]" for k, (a, b) in bands.items())
    record(
        "6 heterogeneous envy",
        ok,
        f"I_bar {i1:.3f} (1) vs {i4:.3f} (4); M=400 bands {text}; lower width {width:.2%}; disjoint={disjoint}",
    )
    assert ok


def test_criterion_07_income_gap_in_condensed_states():
    gaps = []
    for run, _ in ensemble100(4.0, LONG_ITERATIONS):
        if not _condensed(run)[0]:
            continue
        prof = income_gap_profile(run.state.agent_incomes, run.report.labels)
        gaps.append(prof.class_gap)
    ok = bool(gaps) and all(g is not None and g > 0 for g in gaps)
    shown = ", ".join("none" if g is None else f"{g:.3f}" for g in gaps)
    record("7 income gap", ok, f"min I(pure-2) - max I(mixed) over {len(gaps)} condensed runs: {shown}")
    assert ok


def test_criterion_08_ultimatum_calibration():
    s = acceptance_threshold(1.75).threshold
    e = calibrate_epsilon(0.4)
    curve = [acceptance_threshold(x) for x in np.linspace(0.0, 5.0, 50)]
    thresholds = np.array([c.threshold for c in curve])
    monotone = bool(np.all(np.diff(thresholds) > 0))
    resid = max(abs(c.reward_at_threshold) for c in curve[1:])
    ok = abs(s - 0.40) <= 0.01 and abs(e - 1.79) <= 0.05 and monotone and resid <= 1e-10
    record(
        "8 ultimatum",
        ok,
        f"s(1.75)={s:.4f}, eps(0.4)={e:.4f}, monotone on 50 points={monotone}, max residual={resid:.1e}",
    )
    assert ok


def test_criterion_09_appendix_quadratic_agreement():
    shape = np.random.default_rng(2024).uniform(-1, 1, 100)
    shape -= shape.mean()
    shape /= np.abs(shape).max()
    deltas = (1e-2, 5e-3, 2.5e-3)
    diffs = [compare_envy_formulations(1.6 * (1 + d * shape), 1.0).max_abs_difference for d in deltas]
    ratios = [a / b for a, b in zip(diffs, diffs[1:])]
    ok = all(3.0 <= r <= 5.0 for r in ratios)
    record("9 appendix agreement", ok, f"max diff {', '.join(f'{d:.2e}' for d in diffs)}; ratios {ratios[0]:.3f}, {ratios[1]:.3f}")
    assert ok


def test_criterion_10_oracle_equivalence():
    misses = []
    for M, N in [(2, 2), (2, 3), (3, 2), (3, 3)]:
        profile = build_option_grid(N, 0.5)
        params = ModelParams(M)
        eq = brute_force_pure_nash(profile, params)
        for seed in range(20):
            if not check_fixed_point(profile, params, seed, eq).is_nash:
                misses.append((M, N, seed))
    ok = not misses
    record("10 oracle equivalence", ok, f"80 fixed points checked, misses: {misses or 'none'}")
    assert ok


def test_criterion_11_determinism_and_invariants(tmp_path):
    notes = []

    # byte-identical outputs for a repeated manifest
    cfg = tmp_path / "c.cfg"
    cfg.write_text("agents = 100\noptions = 100\nepsilon = 4\n", encoding="utf-8")
    a, b = tmp_path / "a", tmp_path / "b"
    assert cli_main(["run", "--config", str(cfg), "--seed", "3", "--out-dir", str(a)]) == 0
    assert cli_main(["run", "--config", str(a / "manifest.json"), "--out-dir", str(b)]) == 0
    same = all((a / f).read_bytes() == (b / f).read_bytes() for f in ("agents.csv", "payoffs.csv"))
    notes.append(f"manifest replay identical={same}")

    # simplex and support monotonicity along a full 1e5-step run
    profile = N100.profile()
    params = ModelParams(100, envy=4.0)
    p = init_population(100, 100, 5)
    simplex_err, grew = 0.0, False
    for _ in range(100):
        new = evolve(p, profile, replace(params, iterations=1000)).final_population
        simplex_err = max(simplex_err, float(np.abs(new.sum(axis=1) - 1).max()), float(-new.min()))
        grew |= bool(np.any((p == 0) & (new != 0)))
        p = new
    simplex_ok = simplex_err <= 1e-9 and not grew
    notes.append(f"simplex err={simplex_err:.1e}, support grew={grew}")

    # envy identity on every cached final state
    worst_identity = 0.0
    for eps in (0.0, 4.0):
        for run, _ in ensemble100(eps, LONG_ITERATIONS if eps else 100_000):
            st = run.state
            eps_a = run.params.envy_vector()
            resid = st.agent_rewards - st.agent_incomes - eps_a * np.log(st.agent_incomes / st.mean_income) * st.participation
            worst_identity = max(worst_identity, float(np.abs(resid).max()))
    notes.append(f"identity residual={worst_identity:.1e}")

    # offset invariance at converged fixed points (eps=0, and a condensed state run to 2e6 steps)
    run4, _ = ensemble100(4.0, LONG_ITERATIONS)[0]
    p4 = evolve(run4.dynamics.final_population, profile, replace(run4.params, iterations=LONG_ITERATIONS)).final_population
    drift = 0.0
    for fixed, par in [(ensemble100(0.0)[0][0].dynamics.final_population, ModelParams(100)), (p4, run4.params)]:
        for offset in (5.0, 50.0, 200.0):
            moved = evolve(fixed, profile, replace(par, fitness_offset=offset, iterations=100)).final_population
            drift = max(drift, float(np.abs(moved - fixed).max()))
    notes.append(f"offset drift={drift:.1e}")

    ok = same and simplex_ok and worst_identity <= 1e-9 and drift < 1e-9
    record("11 determinism & invariants", ok, "; ".join(notes))
    assert ok
