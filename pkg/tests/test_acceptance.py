"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest -s tests/test_acceptance.py`` to see the summary lines;
they are also written when output is captured.
"""
import itertools
import math
import time

import numpy as np
import pytest

from smooth_renyi import (
    arimoto_conditional_renyi,
    build_code,
    code_error_probability,
    code_moment,
    coding_exponent_curve,
    convergence_report,
    converse_bound,
    converse_length_profile,
    decode,
    direct_bound,
    error_probability,
    expected_cost,
    guessing_exponent_curve,
    kraft_holds,
    make_mixture,
    optimal_cost,
    optimal_strategy,
    optimize_allocation,
    oracle_allocation,
    simulate_guessing,
    smooth_conditional_entropy,
    sorted_conditional,
    truncated_q,
    validate_joint,
    vanishing_vs_zero_error_contrast,
)
from _oracles import (
    DIST_A,
    brute_single_dice_cost,
    grid_general_min,
    lp_general_cost,
    random_feasible_q,
    random_joint,
)

RHOS = (0.5, 1.0, 2.0)
EPSILONS = (0.0, 0.1, 0.3)
UNIFORM_2X2 = np.full((2, 2), 0.25)
DIAGONAL = np.array([[0.5, 0.0], [0.0, 0.5]])
BERNOULLI = np.array([[0.11], [0.89]])


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail, elapsed, limit=None):
        timing = f"{elapsed:.1f}s" + (f" (limit {limit:g}s)" if limit else "")
        with capsys.disabled():
            print(f"\ncriterion {number}: {'PASS' if ok else 'FAIL'}  {detail}  [{timing}]")
    return emit


def _coding_instances():
    rng = np.random.default_rng(707)
    return [random_joint(rng, 8, 4) for _ in range(100)]


def test_criterion_01_arimoto_reduction(report):
    rng = np.random.default_rng(101)
    t0 = time.perf_counter()
    worst, misses = 0.0, 0
    for _ in range(200):
        p = random_joint(rng, 8, 4)
        alpha = float(rng.uniform(0.05, 0.95))
        ref = arimoto_conditional_renyi(p, alpha)
        got = smooth_conditional_entropy(p, alpha, 0.0).value
        # a single x makes both values rounding noise around an exact zero
        misses += not math.isclose(got, ref, rel_tol=1e-12, abs_tol=1e-15)
        if abs(ref) > 1e-12:
            worst = max(worst, abs(got - ref) / abs(ref))
    elapsed = time.perf_counter() - t0
    ok = misses == 0 and elapsed < 5
    report(1, ok, f"{misses} misses; max relative deviation {worst:.2e} over 200 joints", elapsed, 5)
    assert ok


def test_criterion_02_solver_matches_oracle(report):
    rng = np.random.default_rng(202)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(50):
        p = random_joint(rng, 6, 3)
        alpha = float(rng.choice([0.3, 0.5, 0.8]))
        eps = float(rng.choice([0.05, 0.1, 0.3]))
        ours = optimize_allocation(p, alpha, eps)
        ref = oracle_allocation(p, alpha, eps)
        worst = max(worst, abs(ours.objective - ref.objective) / ref.objective)
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-6 and elapsed < 120
    report(2, ok, f"max relative objective gap {worst:.2e} over 50 instances", elapsed, 120)
    assert ok


def test_criterion_03_truncation_optimality(report):
    rng = np.random.default_rng(303)
    t0 = time.perf_counter()
    violations = 0
    for _ in range(100):
        p = rng.dirichlet(np.ones(int(rng.integers(2, 9))))
        eps = float(rng.uniform(0.0, 0.95))
        alpha = float(rng.uniform(0.05, 0.95))
        cond = sorted_conditional(validate_joint(p), 0)
        star = np.sum(truncated_q(cond, eps).values ** alpha)
        q = random_feasible_q(cond.probs_desc, eps, 10 ** 4, rng)
        violations += int(np.sum(np.sum(q ** alpha, axis=1) < star * (1 - 1e-12)))
    elapsed = time.perf_counter() - t0
    ok = violations == 0 and elapsed < 60
    report(3, ok, f"{violations} violations over 100 slices x 10^4 candidates", elapsed, 60)
    assert ok


def test_criterion_04_guessing_sandwich(report):
    rng = np.random.default_rng(404)
    t0 = time.perf_counter()
    violations = 0
    for _ in range(100):
        p = random_joint(rng, 8, 4)
        for rho, eps in itertools.product(RHOS, EPSILONS):
            s = optimal_strategy(p, rho, eps)
            cost = expected_cost(s, p, rho)
            lo, hi = converse_bound(p, rho, eps), direct_bound(p, rho, eps)
            # equal bounds at K = 1 meet the cost up to rounding
            ok = lo <= cost * (1 + 1e-12) and cost <= hi + 1e-9 and error_probability(s, p) <= eps + 1e-10
            violations += not ok
    elapsed = time.perf_counter() - t0
    ok = violations == 0 and elapsed < 60
    report(4, ok, f"{violations} violations over 900 cases", elapsed, 60)
    assert ok


def test_criterion_05_guessing_brute_force(report):
    rng = np.random.default_rng(505)
    t0 = time.perf_counter()
    dice_gap = general_gap = 0.0
    grid_beats = 0
    for i in range(30):
        # every third instance is small enough for the general oracle
        p = random_joint(rng, 3 if i % 3 == 0 else 4, 2)
        rho = float(rng.choice(RHOS))
        eps = float(rng.choice([0.0, 0.1, 0.2, 0.3]))
        ours = optimal_cost(p, rho, eps)
        dice_gap = max(dice_gap, abs(ours - brute_single_dice_cost(p, rho, eps)))
        if p.shape[0] <= 3:
            general_gap = max(general_gap, abs(ours - lp_general_cost(p, rho, eps)))
            grid_beats += grid_general_min(p, rho, eps) < ours - 1e-12
    elapsed = time.perf_counter() - t0
    ok = dice_gap <= 1e-6 and general_gap <= 1e-4 and grid_beats == 0 and elapsed < 300
    report(5, ok, f"single-dice gap {dice_gap:.1e}, randomized gap {general_gap:.1e}, "
                  f"grid wins {grid_beats}", elapsed, 300)
    assert ok


def test_criterion_06_monte_carlo(report):
    rng = np.random.default_rng(606)
    cases = [(DIST_A, 1.0, 0.25)] + [(random_joint(rng, 6, 3), float(rng.choice(RHOS)), 0.2) for _ in range(5)]
    t0 = time.perf_counter()
    worst = 0.0
    for seed, (p, rho, eps) in enumerate(cases):
        s = optimal_strategy(p, rho, eps)
        sim = simulate_guessing(s, p, rho, seed=seed, trials=10 ** 6)
        for got, want, se in ((sim.error_prob, error_probability(s, p), sim.error_se),
                              (sim.cost, expected_cost(s, p, rho), sim.cost_se)):
            z = abs(got - want) / se if se > 0 else (0.0 if abs(got - want) <= 1e-12 else math.inf)
            worst = max(worst, z)
    elapsed = time.perf_counter() - t0
    ok = worst <= 4 and elapsed < 60
    report(6, ok, f"max deviation {worst:.2f} standard errors over 6 instances", elapsed, 60)
    assert ok


def test_criterion_07_coding_sandwich(report):
    t0 = time.perf_counter()
    violations = 0
    for p in _coding_instances():
        for rho, eps in itertools.product(RHOS, EPSILONS):
            spec = build_code(p, rho, eps)
            m = code_moment(spec, p, rho)
            h = direct_bound(p, rho, eps)
            ok = h * (1 - 1e-12) <= m <= 4 ** rho * h + eps * 2 ** rho
            ok &= code_error_probability(spec, p) <= eps + 1e-10
            for y in range(spec.y_size):
                ok &= kraft_holds(spec.lengths[spec.support(y), y])
                ok &= all(decode(spec, "0" + cw, y) == x for x, cw in spec.codewords[y].items())
            violations += not ok
    elapsed = time.perf_counter() - t0
    ok = violations == 0 and elapsed < 120
    report(7, ok, f"{violations} violations over 900 codes", elapsed, 120)
    assert ok


def test_criterion_08_converse_profile(report):
    t0 = time.perf_counter()
    kraft_dev = moment_dev = 0.0
    for p in _coding_instances():
        for rho, eps in itertools.product(RHOS, EPSILONS):
            prof = converse_length_profile(p, rho, eps)
            live = prof.q_joint.sum(axis=0) > 0
            kraft_dev = max(kraft_dev, float(np.max(np.abs(prof.kraft_sums()[live] - 1.0))))
            h = direct_bound(p, rho, eps)
            moment_dev = max(moment_dev, abs(prof.moment() - h) / h)
    elapsed = time.perf_counter() - t0
    ok = kraft_dev <= 1e-12 and moment_dev <= 1e-9
    report(8, ok, f"Kraft deviation {kraft_dev:.1e}, moment deviation {moment_dev:.1e}", elapsed)
    assert ok


def test_criterion_09_convergence(report):
    mix = make_mixture([UNIFORM_2X2, DIAGONAL], [0.5, 0.5])
    t0 = time.perf_counter()
    rep = convergence_report(mix, 0.5, 0.25, 10, tail_window=5, max_cells=2 ** 22)
    elapsed = time.perf_counter() - t0
    last = rep.rows[-1]
    gap_ok = abs(last.rate - math.log(2)) <= 0.15
    floor_ok = all(r.rate >= r.lower_bound - 1e-12 for r in rep.rows)
    ok = gap_ok and rep.monotone_tail_ok and floor_ok and rep.tail == (6, 10) and elapsed < 600
    tail = ", ".join(f"{r.gap:+.4f}" for r in rep.rows[5:])
    report(9, ok, f"|rate - log 2| at n=10 = {abs(last.gap):.4f} (target 0.15); gaps n=6..10: {tail}; "
                  f"tail nonincreasing {rep.monotone_tail_ok}; floor respected {floor_ok}", elapsed, 600)
    assert rep.monotone_tail_ok and floor_ok
    assert gap_ok, "finite-n gap exceeds the 0.15 nat engineering target at n=10"


def test_criterion_10_exponent_equality(report):
    mixtures = {
        "uniform+deterministic": make_mixture([UNIFORM_2X2, DIAGONAL], [0.5, 0.5]),
        "two binary channels": make_mixture([[[0.3, 0.2], [0.1, 0.4]], [[0.05, 0.45], [0.45, 0.05]]],
                                            [0.3, 0.7]),
        "bernoulli(0.11)": make_mixture([BERNOULLI], [1.0]),
    }
    t0 = time.perf_counter()
    target_mismatch = 0
    worst = -math.inf
    for mix in mixtures.values():
        k = mix.components[0].x_size
        for rho, eps in itertools.product(RHOS, (0.0, 0.1, 0.25)):
            n_list = range(1, 9)
            code_rows = coding_exponent_curve(mix, rho, eps, n_list)
            guess_rows = guessing_exponent_curve(mix, rho, eps, n_list)
            for c, g in zip(code_rows, guess_rows):
                target_mismatch += c.target != g.target
                slack = (rho * 2 * math.log(2) + math.log(1 + c.n * math.log(k))) / c.n
                worst = max(worst, abs(g.exponent - c.exponent) - slack)
    elapsed = time.perf_counter() - t0
    ok = target_mismatch == 0 and worst <= 0
    report(10, ok, f"{target_mismatch} target mismatches; worst |guess - code| minus slack {worst:+.4f} "
                   f"over 3 mixtures x 9 settings x n=1..8", elapsed)
    assert ok


def test_criterion_11_contrast(report):
    t0 = time.perf_counter()
    rows = vanishing_vs_zero_error_contrast(BERNOULLI, 1.0, 0.1, 10)
    elapsed = time.perf_counter() - t0
    arikan = 2 * math.log(math.sqrt(0.11) + math.sqrt(0.89))
    last = rows[-1]
    zero_dev = max(abs(r.zero_error_exponent - arikan) for r in rows)
    ok = last.entropy_exponent < arikan and zero_dev <= 1e-9 and elapsed < 60
    report(11, ok, f"eps-exponent at n=10 {last.entropy_exponent:.6f} < {arikan:.6f}; "
                   f"eps=0 deviation {zero_dev:.1e}", elapsed, 60)
    assert ok
