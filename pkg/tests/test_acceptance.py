"""End-to-end acceptance checks, one test per criterion.

Each test prints a single ``criterion N [...]: PASS/FAIL`` line; the lines are
repeated in the terminal summary.  These runs take tens of minutes on one core.
"""

import math
import random
import time

import numpy as np
from scipy import stats

from coopclean.bounds import (
    BoundDomainError, BoundParams, closed_form_time, combined_frontier, default_delta_grid,
    deterministic_trajectory, impossibility_probability, impossibility_threshold,
    naive_trajectory, recursive_bound_trajectory,
)
from coopclean.config import emit_config, parse_config
from coopclean.montecarlo import (
    RunConfig, aggregate, area_reaches, bound_step_check, run_batch, run_one,
)
from coopclean.region import compute_potential, generate_shape, sphere_potential_size
from coopclean.spreading import RngStream, SpreadPolicy, sample_spread_counts

import oracles


def test_criterion_1_one_step_bound_holds_empirically(criterion):
    start = time.perf_counter()
    res = bound_step_check(2000, 50, 0.3, 0.3, [1, 5, 10, 20], trials=10_000, seed=0)
    elapsed = time.perf_counter() - start
    detail = "; ".join(f"t={r.t} S={r.s_t} freq={r.frequency:.4f} >? {r.q_t - r.margin:.4f}"
                       for r in res)
    ok = all(r.passed for r in res) and elapsed < 120
    criterion(1, "one-step bound", ok, f"{detail}; {elapsed:.1f}s (limit 120s)")
    assert ok


def test_criterion_2_spread_is_binomial(criterion):
    region = generate_shape("digital_sphere", 221)
    assert region.tiles == {(y, x) for y in range(-10, 11) for x in range(-10, 11)
                            if abs(y) + abs(x) <= 10}
    n = len(compute_potential(region.tiles))
    draws = 10_000
    parts = []
    ok = True
    for i, p in enumerate((0.1, 0.5, 0.9)):
        counts = sample_spread_counts(region, SpreadPolicy.uniform(p), RngStream(2024, i).generator(), draws)
        observed = np.bincount(counts, minlength=n + 1)[:n + 1]
        expected = stats.binom.pmf(np.arange(n + 1), n, p) * draws
        keep = expected >= 5
        obs = np.append(observed[keep], observed[~keep].sum())
        exp = np.append(expected[keep], expected[~keep].sum())
        pval = stats.chisquare(obs, exp * obs.sum() / exp.sum()).pvalue
        se = math.sqrt(n * p * (1 - p) / draws)
        z = (counts.mean() - n * p) / se
        good = pval > 0.001 and abs(z) < 3
        ok &= good
        parts.append(f"p={p}: chi2 p-value {pval:.3g}, mean z {z:+.2f}")
    criterion(2, "binomial spread", ok, f"|dF|={n}; " + "; ".join(parts))
    assert ok


def _criterion_3_grid():
    points = []
    for s0 in (5000, 20000):
        for k in (50, 150):
            for p in (0.1, 0.3, 0.5):
                for delta in (0.3, 0.5):
                    for frac in np.linspace(0.05, 0.95, 10):
                        points.append((s0, k, p, delta, int(s0 * frac)))
    return points


def test_criterion_3_closed_form_tracks_recursion(criterion):
    checked = 0
    bad = []
    anchor_points = 0
    for s0, k, p, delta, s_hat in _criterion_3_grid():
        params = BoundParams(s0, k, p, delta, s_hat)
        if not params.admissible:
            continue
        try:
            tau, _ = closed_form_time(params)
        except BoundDomainError:
            continue
        t_rec = recursive_bound_trajectory(params, 1_000_000).first_passage(s_hat)
        if t_rec is None:
            continue
        checked += 1
        anchor_points += (s0, k, p, delta) == (20000, 150, 0.5, 0.3)
        gap = abs(math.ceil(tau) - t_rec)
        if gap > max(2, 0.02 * t_rec):
            bad.append((s0, k, p, delta, s_hat, math.ceil(tau), t_rec))
    ok = checked >= 100 and anchor_points > 0 and not bad
    worst = max(bad, key=lambda b: abs(b[5] - b[6]) / b[6], default=None)
    detail = f"{checked} valid points ({anchor_points} at 20000/150/0.5/0.3), {len(bad)} outside tolerance"
    if worst:
        detail += f"; worst (s0,k,p,delta,s_hat,ceil tau,t_rec)={worst}"
    criterion(3, "closed form vs recursion", ok, detail)
    assert ok


def test_criterion_4_isoperimetric_floor(criterion):
    start = time.perf_counter()
    levels = oracles.fixed_polyominoes(8)
    total = 0
    violations = 0
    for size in range(1, 9):
        floor = sphere_potential_size(size, 0)
        for poly in levels[size]:
            total += 1
            pot = compute_potential(set(poly))
            assert pot == oracles.potential(set(poly))
            violations += len(pot) < floor
    elapsed = time.perf_counter() - start
    ok = violations == 0 and elapsed < 60
    criterion(4, "isoperimetric oracle", ok,
              f"{total} polyominoes, {violations} below the floor, {elapsed:.1f}s")
    assert ok


def test_criterion_5_impossibility(criterion):
    runs = 1000
    parts = []
    ok = True
    for k, p in [(4, 0.5), (10, 0.2), (20, 0.1)]:
        thr = impossibility_threshold(k, p)
        s0 = thr + 50
        above = RunConfig("digital_sphere", s0, k, SpreadPolicy.uniform(p), cleaner="perfect",
                          cutoff=200, replications=runs)
        grew = sum(area_reaches(above, i, s0) for i in range(runs)) / runs
        s0b = max(k + 2, thr - 50)
        below = RunConfig("digital_sphere", s0b, k, SpreadPolicy.uniform(p / 2), cleaner="perfect",
                          cutoff=200, replications=runs)
        shrank = sum(not area_reaches(below, i, s0b) for i in range(runs)) / runs
        good = grew >= 0.95 and shrank > 1 - grew
        ok &= good
        parts.append(f"(k={k},p={p}) thr={thr}: S_200>=S_0 in {grew:.1%}; "
                     f"below/halved success {shrank:.1%} vs {1 - grew:.1%}")
    criterion(5, "impossibility", ok, "; ".join(parts))
    assert ok


def _local_minima(series):
    return [series[i] for i in range(1, len(series) - 1)
            if series[i][1] < series[i - 1][1] and series[i][1] <= series[i + 1][1]]


def test_criterion_6_figure_shapes(criterion):
    # (a) slack ordering, and the smallest slack against the d=3 zig-zag
    deltas = [0.01, 0.1, 0.2, 0.3, 0.5]
    curves = {}
    for d in deltas:
        c = recursive_bound_trajectory(BoundParams(20000, 150, 1 / 3, d), 5000)
        curves[d] = dict(zip(c.t, c.s_lower))
    order_bad = 0
    for lo, hi in zip(deltas, deltas[1:]):
        for t, s in curves[hi].items():
            if t in curves[lo] and s > curves[lo][t]:
                order_bad += 1
    det = deterministic_trajectory(20000, 150, 3, 5000)
    minima = _local_minima(det)
    far = [(t, s, curves[0.01].get(t)) for t, s in minima
           if t in curves[0.01] and abs(curves[0.01][t] - s) > 0.05 * s]
    compared = sum(1 for t, _ in minima if t in curves[0.01])
    ok_a = order_bad == 0 and not far and compared > 0
    detail_a = (f"(a) {order_bad} ordering violations; {len(far)}/{compared} d=3 minima off by >5%"
                + (f", first at t={far[0][0]} ({far[0][2]} vs {far[0][1]})" if far else ""))

    # (b) frontier between the naive line and the d=10 zig-zag
    front = combined_frontier(20000, 50, 0.1, 0.95, default_delta_grid(50), 5000)
    naive = dict(naive_trajectory(20000, 50, 5000))
    det10 = dict(deterministic_trajectory(20000, 50, 10, 5000))
    out_b = [(t, s) for t, s in zip(front.t, front.s_lower)
             if (t in naive and s < naive[t]) or (t in det10 and s > det10[t])]
    ok_b = not out_b and len(front) > 1
    detail_b = f"(b) frontier {len(front)} points, {len(out_b)} outside [naive, d=10]"

    # (c) threshold and guarantee fans
    ks = range(1, 61)
    ps = (0.1, 0.2, 0.3, 0.4)
    thr_k = all(impossibility_threshold(k + 1, p) > impossibility_threshold(k, p)
                for p in ps for k in ks if k < 60)
    thr_p = all(impossibility_threshold(k, b) <= impossibility_threshold(k, a)
                for k in ks for a, b in zip(ps, ps[1:]))
    prob_k = True
    for p in ps:
        q = [impossibility_probability(impossibility_threshold(k, p, 0.3) + 1, k, p, 0.3, 10)
             for k in ks]
        prob_k &= all(b >= a for a, b in zip(q, q[1:]))
    ok_c = thr_k and thr_p and prob_k
    detail_c = f"(c) threshold up in k: {thr_k}, down in p: {thr_p}, probability up in k: {prob_k}"

    ok = ok_a and ok_b and ok_c
    criterion(6, "figure shapes", ok, "; ".join([detail_a, detail_b, detail_c]))
    assert ok


def test_criterion_7_team_size_trends(criterion):
    parts = []
    ok = True
    for shape in ("digital_sphere", "square", "cross"):
        rows = []
        for k in (5, 10, 20, 40):
            cfg = RunConfig(shape, 500, k, SpreadPolicy.uniform(0.02), cleaner="sweep",
                            cutoff=3000, replications=100)
            st = run_batch(cfg, stop_when_hopeless=True)
            assert not st.aborted, st.aborted[:3]
            rows.append((k, st))
        success_ok = all(b.ci_high >= a.ci_low for (_, a), (_, b) in zip(rows, rows[1:]))
        timed = [(k, st.mean_t_success) for k, st in rows if k <= 20 and st.n_success]
        time_ok = all(b <= a for (_, a), (_, b) in zip(timed, timed[1:]))
        ok &= success_ok and time_ok
        slow = rows[3][1].n_success and rows[2][1].n_success and \
            rows[3][1].mean_t_success > rows[2][1].mean_t_success
        parts.append(shape + " " + ", ".join(
            f"k={k}: {st.success_pct:.0%} [{st.ci_low:.2f},{st.ci_high:.2f}] T={st.mean_t_success:.0f}"
            for k, st in rows) + (" (slower at k=40)" if slow else ""))
    criterion(7, "team size trends", ok, "; ".join(parts))
    assert ok


def test_criterion_8_invariants(criterion):
    rng = random.Random(8)
    aborted = 0
    for i in range(1000):
        cfg = RunConfig(rng.choice(["digital_sphere", "square", "cross"]), rng.randint(5, 120),
                        rng.randint(1, 8), SpreadPolicy.uniform(rng.choice([0.0, 0.01, 0.03, 0.08])),
                        cleaner=rng.choice(["sweep", "perfect"]), cutoff=250, seed=rng.randrange(2 ** 32))
        try:
            run_one(cfg, i, check_invariants=True)
        except Exception:  # counted, never hidden
            aborted += 1
    cfg = RunConfig("cross", 150, 6, SpreadPolicy.uniform(0.03), cutoff=600, replications=40,
                    trajectory_every=10, seed=99)
    a, b = run_batch(cfg), run_batch(cfg)
    same = a.records == b.records and a.mean_trajectory == b.mean_trajectory
    recs = list(a.records)
    random.Random(1).shuffle(recs)
    c = aggregate(recs)
    ordered = (c.records == a.records and c.mean_trajectory == a.mean_trajectory
               and c.n_success == a.n_success
               and (c.mean_t_success == a.mean_t_success or math.isnan(a.mean_t_success)))
    round_trip = parse_config(emit_config(cfg)) == cfg and \
        parse_config(emit_config(BoundParams(20000, 150, 0.5, 0.3, 10000))) == \
        BoundParams(20000, 150, 0.5, 0.3, 10000)
    ok = aborted == 0 and same and ordered and round_trip
    criterion(8, "invariant suite", ok,
              f"1000 checked runs, {aborted} broke connectivity; rerun identical: {same}; "
              f"order-free: {ordered}; config round-trip: {round_trip}")
    assert ok
